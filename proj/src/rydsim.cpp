#include "gridcut/rydsim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <random>

#include "gridcut/error.hpp"

namespace gridcut {

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

double Layout::min_distance() const {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < positions.size(); ++i) {
        for (std::size_t j = i + 1; j < positions.size(); ++j) {
            m = std::min(m, distance(positions[i], positions[j]));
        }
    }
    return m;
}

void Layout::validate(const LayoutConstraints& c) const {
    constexpr double slack = 1e-9;
    for (std::size_t i = 0; i < positions.size(); ++i) {
        const auto& p = positions[i];
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || p.x < -slack || p.y < -slack ||
            p.x > c.box_width + slack || p.y > c.box_height + slack) {
            throw ValidationError("atom " + std::to_string(i) + " lies outside the " +
                                  std::to_string(c.box_width) + " x " + std::to_string(c.box_height) +
                                  " um box");
        }
        for (std::size_t j = i + 1; j < positions.size(); ++j) {
            if (distance(p, positions[j]) < c.min_spacing - slack) {
                throw ValidationError("atoms " + std::to_string(i) + " and " + std::to_string(j) +
                                      " are closer than " + std::to_string(c.min_spacing) + " um");
            }
        }
    }
}

double SymMatrix::max_abs() const {
    double m = 0.0;
    for (double v : data_) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

SymMatrix interaction_weights(const Layout& layout, const PhysicsConstants& constants) {
    const int n = layout.size();
    SymMatrix w(n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            double d = distance(layout.positions[i], layout.positions[j]);
            if (!(d > 0.0)) {
                throw DomainError("atoms " + std::to_string(i) + " and " + std::to_string(j) +
                                  " coincide");
            }
            double d2 = d * d;
            w.set(i, j, constants.c6 / (4.0 * d2 * d2 * d2));
        }
    }
    return w;
}

// ---------------------------------------------------------------------------
// Waveforms

PiecewiseLinear::PiecewiseLinear(std::vector<std::pair<double, double>> knots) : knots_(std::move(knots)) {
    for (std::size_t k = 0; k < knots_.size(); ++k) {
        if (!std::isfinite(knots_[k].first) || !std::isfinite(knots_[k].second)) {
            throw InputError("waveform knot " + std::to_string(k) + " is not finite");
        }
        if (k > 0 && !(knots_[k].first > knots_[k - 1].first)) {
            throw InputError("waveform knot times must be strictly increasing");
        }
    }
}

PiecewiseLinear PiecewiseLinear::constant(double value, double t0, double t1) {
    return PiecewiseLinear({{t0, value}, {t1, value}});
}

bool PiecewiseLinear::covers(double t0, double t1) const {
    constexpr double slack = 1e-12;
    return !knots_.empty() && knots_.front().first <= t0 + slack && knots_.back().first >= t1 - slack;
}

double PiecewiseLinear::operator()(double t) const {
    constexpr double slack = 1e-12;
    if (knots_.empty() || t < knots_.front().first - slack || t > knots_.back().first + slack) {
        throw InputError("waveform undefined at t = " + std::to_string(t) + " us");
    }
    if (t <= knots_.front().first) {
        return knots_.front().second;
    }
    if (t >= knots_.back().first) {
        return knots_.back().second;
    }
    auto it = std::upper_bound(knots_.begin(), knots_.end(), t,
                               [](double v, const auto& knot) { return v < knot.first; });
    const auto& [t1, v1] = *it;
    const auto& [t0, v0] = *(it - 1);
    double s = (t - t0) / (t1 - t0);
    return v0 + s * (v1 - v0);
}

PiecewiseConstant::PiecewiseConstant(std::vector<std::pair<double, double>> knots) : knots_(std::move(knots)) {
    for (std::size_t k = 1; k < knots_.size(); ++k) {
        if (!(knots_[k].first > knots_[k - 1].first)) {
            throw InputError("phase knot times must be strictly increasing");
        }
    }
}

double PiecewiseConstant::operator()(double t) const {
    if (knots_.empty()) {
        return 0.0;
    }
    auto it = std::upper_bound(knots_.begin(), knots_.end(), t,
                               [](double v, const auto& knot) { return v < knot.first; });
    if (it == knots_.begin()) {
        return knots_.front().second;
    }
    return (it - 1)->second;
}

void PulseSchedule::validate(const PhysicsConstants& constants, bool hardware_legal) const {
    if (!(t_max > 0.0)) {
        throw ValidationError("t_max must be positive");
    }
    if (!omega.covers(0.0, t_max) || !delta_global.covers(0.0, t_max)) {
        throw ValidationError("amplitude and detuning must be defined on [0, t_max]");
    }
    constexpr double slack = 1e-9;
    std::string bad;
    const auto& ok = omega.knots();
    for (std::size_t k = 0; k < ok.size(); ++k) {
        double v = ok[k].second;
        if (v < -slack || (hardware_legal && v > constants.omega_max + slack)) {
            bad += " omega[" + std::to_string(k) + "]=" + std::to_string(v);
        }
    }
    if (hardware_legal) {
        if (std::abs(omega(0.0)) > slack || std::abs(omega(t_max)) > slack) {
            bad += " omega must start and end at 0;";
        }
        const auto& dk = delta_global.knots();
        for (std::size_t k = 0; k < dk.size(); ++k) {
            if (std::abs(dk[k].second) > constants.delta_max + slack) {
                bad += " delta[" + std::to_string(k) + "]=" + std::to_string(dk[k].second);
            }
        }
        if (local_detuning) {
            for (std::size_t k = 0; k < local_detuning->size(); ++k) {
                if (std::abs((*local_detuning)[k]) > constants.delta_max + slack) {
                    bad += " local_detuning[" + std::to_string(k) + "]";
                }
            }
        }
    }
    if (!bad.empty()) {
        throw ValidationError("schedule violates bounds:" + bad);
    }
}

// ---------------------------------------------------------------------------
// State vector

StateVector::StateVector(int n_qubits) : n_(n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxSimQubits) {
        throw CapacityError("simulator supports 1.." + std::to_string(kMaxSimQubits) + " qubits, got " +
                            std::to_string(n_qubits));
    }
    amps_.assign(std::size_t{1} << n_qubits, Complex{});
    amps_[0] = 1.0;
}

StateVector::StateVector(int n_qubits, std::vector<Complex> amplitudes) : n_(n_qubits), amps_(std::move(amplitudes)) {
    if (n_qubits < 1 || n_qubits > kMaxSimQubits) {
        throw CapacityError("simulator supports 1.." + std::to_string(kMaxSimQubits) + " qubits");
    }
    if (amps_.size() != (std::size_t{1} << n_qubits)) {
        throw InputError("amplitude vector length does not match qubit count");
    }
}

StateVector StateVector::basis(int n_qubits, Bits z) {
    StateVector s(n_qubits);
    if (z >= s.dim()) {
        throw InputError("basis index out of range");
    }
    s.amps_[0] = 0.0;
    s.amps_[z] = 1.0;
    return s;
}

StateVector StateVector::plus(int n_qubits) {
    StateVector s(n_qubits);
    double a = 1.0 / std::sqrt(static_cast<double>(s.dim()));
    std::fill(s.amps_.begin(), s.amps_.end(), Complex(a, 0.0));
    return s;
}

double StateVector::norm() const {
    double s = 0.0;
    for (const auto& a : amps_) {
        s += std::norm(a);
    }
    return std::sqrt(s);
}

Complex StateVector::inner(const StateVector& other) const {
    if (other.dim() != dim()) {
        throw InputError("inner product of states with different sizes");
    }
    Complex s{};
    for (std::size_t z = 0; z < amps_.size(); ++z) {
        s += std::conj(amps_[z]) * other.amps_[z];
    }
    return s;
}

std::vector<double> StateVector::probabilities_dense() const {
    std::vector<double> p(amps_.size());
    for (std::size_t z = 0; z < amps_.size(); ++z) {
        p[z] = std::norm(amps_[z]);
    }
    return p;
}

// ---------------------------------------------------------------------------
// Evolution

namespace {

void check_normalized(const StateVector& state) {
    if (std::abs(state.norm() - 1.0) > 1e-9) {
        throw InputError("input state is not normalized (norm " + std::to_string(state.norm()) + ")");
    }
}

// exp(-i h Omega/2 (X cos phi - Y sin phi)) on every qubit.
void rotate_all(StateVector& state, double omega, double phi, double h) {
    double half = 0.5 * omega * h;
    if (half == 0.0) {
        return;
    }
    const Complex c(std::cos(half), 0.0);
    const double s = std::sin(half);
    const Complex u01 = Complex(0.0, -s) * std::polar(1.0, phi);
    const Complex u10 = Complex(0.0, -s) * std::polar(1.0, -phi);
    auto amps = state.amplitudes();
    const std::size_t dim = amps.size();
    for (int k = 0; k < state.n_qubits(); ++k) {
        const std::size_t stride = std::size_t{1} << k;
        for (std::size_t base = 0; base < dim; base += 2 * stride) {
            Complex* lo = amps.data() + base;
            Complex* hi = lo + stride;
            for (std::size_t j = 0; j < stride; ++j) {
                Complex a0 = lo[j];
                Complex a1 = hi[j];
                lo[j] = c * a0 + u01 * a1;
                hi[j] = u10 * a0 + c * a1;
            }
        }
    }
}

}  // namespace

RydbergSystem::RydbergSystem(const Layout& layout, const PhysicsConstants& constants,
                             std::optional<std::vector<double>> local_detuning)
    : n_(layout.size()), constants_(constants), weights_(interaction_weights(layout, constants)) {
    if (n_ < 1 || n_ > kMaxSimQubits) {
        throw CapacityError("simulator supports 1.." + std::to_string(kMaxSimQubits) + " atoms, got " +
                            std::to_string(n_));
    }
    if (local_detuning && static_cast<int>(local_detuning->size()) != n_) {
        throw InputError("local detuning list has " + std::to_string(local_detuning->size()) +
                         " entries for " + std::to_string(n_) + " atoms");
    }
    const std::size_t d = dim();
    static_energy_.assign(d, 0.0);
    zsum_half_.assign(d, 0.0);

    // C6/4 (Z_i - 1)(Z_j - 1)/d^6 equals 4 w_ij when both atoms are excited, else 0.
    for (std::size_t z = 0; z < d; ++z) {
        double e = 0.0;
        for (int i = 0; i < n_; ++i) {
            if (!((z >> i) & 1U)) {
                continue;
            }
            for (int j = i + 1; j < n_; ++j) {
                if ((z >> j) & 1U) {
                    e += 4.0 * weights_(i, j);
                }
            }
        }
        int excited = std::popcount(z);
        zsum_half_[z] = 0.5 * static_cast<double>(n_ - 2 * excited);
        if (local_detuning) {
            for (int i = 0; i < n_; ++i) {
                double s = ((z >> i) & 1U) ? -1.0 : 1.0;
                e += 0.5 * (*local_detuning)[i] * s;
            }
        }
        static_energy_[z] = e;
    }
}

std::vector<double> RydbergSystem::diagonal_energy(double delta_global) const {
    std::vector<double> e(static_energy_);
    for (std::size_t z = 0; z < e.size(); ++z) {
        e[z] += delta_global * zsum_half_[z];
    }
    return e;
}

void RydbergSystem::evolve(StateVector& state, const PulseSchedule& schedule, double dt, double t_start,
                           double t_end) const {
    if (state.n_qubits() != n_) {
        throw InputError("state has " + std::to_string(state.n_qubits()) + " qubits, system has " +
                         std::to_string(n_));
    }
    if (!(dt > 0.0)) {
        throw InputError("time step must be positive");
    }
    if (!(t_start >= 0.0 && t_start < t_end && t_end <= schedule.t_max + 1e-12)) {
        throw InputError("evolution interval must satisfy 0 <= t_start < t_end <= t_max");
    }
    if (!schedule.omega.covers(t_start, t_end) || !schedule.delta_global.covers(t_start, t_end)) {
        throw InputError("schedule undefined on [" + std::to_string(t_start) + ", " + std::to_string(t_end) +
                         "]");
    }
    check_normalized(state);

    const auto steps = static_cast<std::size_t>(std::ceil((t_end - t_start) / dt - 1e-9));
    const double h = (t_end - t_start) / static_cast<double>(steps);
    const std::size_t d = dim();

    // The diagonal factor splits into a static table times a detuning factor
    // that depends only on the excitation count.
    std::vector<Complex> static_half(d);
    std::vector<Complex> static_full(d);
    std::vector<std::uint8_t> excited(d);
    for (std::size_t z = 0; z < d; ++z) {
        static_half[z] = std::polar(1.0, -0.5 * h * static_energy_[z]);
        static_full[z] = static_half[z] * static_half[z];
        excited[z] = static_cast<std::uint8_t>(std::popcount(z));
    }
    std::vector<Complex> detuning_factor(n_ + 1);
    auto diag_pass = [&](const std::vector<Complex>& table, double detuning_time) {
        for (int c = 0; c <= n_; ++c) {
            detuning_factor[c] = std::polar(1.0, -detuning_time * 0.5 * (n_ - 2 * c));
        }
        auto amps = state.amplitudes();
        for (std::size_t z = 0; z < d; ++z) {
            amps[z] *= table[z] * detuning_factor[excited[z]];
        }
    };

    auto midpoint = [&](std::size_t k) { return t_start + (static_cast<double>(k) + 0.5) * h; };
    double delta_prev = schedule.delta_global(midpoint(0));
    diag_pass(static_half, 0.5 * h * delta_prev);
    for (std::size_t k = 0; k < steps; ++k) {
        double tm = midpoint(k);
        rotate_all(state, schedule.omega(tm), schedule.phi(tm), h);
        if (k + 1 < steps) {
            // Trailing half-step of k merged with the leading half-step of k+1.
            double delta_next = schedule.delta_global(midpoint(k + 1));
            diag_pass(static_full, 0.5 * h * (delta_prev + delta_next));
            delta_prev = delta_next;
        } else {
            diag_pass(static_half, 0.5 * h * delta_prev);
        }
    }
}

void RydbergSystem::apply_hamiltonian(const StateVector& in, StateVector& out, double omega, double phi,
                                      double delta_global) const {
    const std::size_t d = dim();
    auto src = in.amplitudes();
    auto dst = out.amplitudes();
    for (std::size_t z = 0; z < d; ++z) {
        dst[z] = (static_energy_[z] + delta_global * zsum_half_[z]) * src[z];
    }
    if (omega == 0.0) {
        return;
    }
    const Complex up = 0.5 * omega * std::polar(1.0, phi);     // <0|.|1>
    const Complex down = 0.5 * omega * std::polar(1.0, -phi);  // <1|.|0>
    for (int k = 0; k < n_; ++k) {
        const std::size_t stride = std::size_t{1} << k;
        for (std::size_t base = 0; base < d; base += 2 * stride) {
            for (std::size_t j = 0; j < stride; ++j) {
                std::size_t lo = base + j;
                std::size_t hi = lo + stride;
                dst[lo] += up * src[hi];
                dst[hi] += down * src[lo];
            }
        }
    }
}

void RydbergSystem::evolve_constant(StateVector& state, double omega, double phi, double delta_global,
                                    double duration) const {
    if (state.n_qubits() != n_) {
        throw InputError("state size does not match system");
    }
    if (!std::isfinite(duration)) {
        throw InputError("evolution time must be finite");
    }
    if (duration == 0.0) {
        return;
    }
    double e_min = std::numeric_limits<double>::infinity();
    double e_max = -e_min;
    for (std::size_t z = 0; z < dim(); ++z) {
        double e = static_energy_[z] + delta_global * zsum_half_[z];
        e_min = std::min(e_min, e);
        e_max = std::max(e_max, e);
    }
    const double center = 0.5 * (e_max + e_min);
    const double radius = (0.5 * (e_max - e_min) + 0.5 * std::abs(omega) * n_) * 1.01 + 1e-12;

    // Keep each Chebyshev segment short enough that the expansion stays well
    // conditioned. A negative duration runs the evolution backwards.
    constexpr double max_tau = 40.0;
    const double span = std::abs(duration);
    const int segments = std::max(1, static_cast<int>(std::ceil(radius * span / max_tau)));
    const double t = span / segments;
    const double tau = radius * t;
    const Complex step_unit(0.0, duration > 0.0 ? -1.0 : 1.0);  // (-i sign t)

    int terms = 0;
    std::vector<double> bessel;
    for (int k = 0;; ++k) {
        double j = std::cyl_bessel_j(static_cast<double>(k), tau);
        bessel.push_back(j);
        if (k > tau && std::abs(j) < 1e-17) {
            terms = k + 1;
            break;
        }
        if (k > 10000) {
            throw NumericalError("Chebyshev expansion failed to converge");
        }
    }
    terms = std::max(terms, 2);
    if (static_cast<int>(bessel.size()) < terms) {
        bessel.resize(terms, 0.0);
    }

    const std::size_t d = dim();
    StateVector prev(n_), curr(n_), next(n_);
    std::vector<Complex> acc(d);
    const Complex phase = std::polar(1.0, duration > 0.0 ? -center * t : center * t);

    // (H - center)/radius applied to `in`, written to `out`.
    auto scaled = [&](const StateVector& in, StateVector& out) {
        apply_hamiltonian(in, out, omega, phi, delta_global);
        auto o = out.amplitudes();
        auto i = in.amplitudes();
        for (std::size_t z = 0; z < d; ++z) {
            o[z] = (o[z] - center * i[z]) / radius;
        }
    };

    for (int seg = 0; seg < segments; ++seg) {
        auto psi = state.amplitudes();
        std::copy(psi.begin(), psi.end(), prev.amplitudes().begin());
        for (std::size_t z = 0; z < d; ++z) {
            acc[z] = bessel[0] * psi[z];
        }
        scaled(prev, curr);
        Complex unit_pow = step_unit;
        Complex coef = 2.0 * unit_pow * bessel[1];
        for (std::size_t z = 0; z < d; ++z) {
            acc[z] += coef * curr[z];
        }
        for (int k = 2; k < terms; ++k) {
            scaled(curr, next);
            auto nx = next.amplitudes();
            auto pv = prev.amplitudes();
            unit_pow *= step_unit;
            coef = 2.0 * unit_pow * bessel[k];
            for (std::size_t z = 0; z < d; ++z) {
                nx[z] = 2.0 * nx[z] - pv[z];
                acc[z] += coef * nx[z];
            }
            std::swap(prev, curr);
            std::swap(curr, next);
        }
        for (std::size_t z = 0; z < d; ++z) {
            psi[z] = phase * acc[z];
        }
    }
}

void evolve(StateVector& state, const Layout& layout, const PulseSchedule& schedule, double dt, double t_start,
            double t_end, const PhysicsConstants& constants) {
    RydbergSystem system(layout, constants, schedule.local_detuning);
    system.evolve(state, schedule, dt, t_start, t_end);
}

void apply_diagonal_evolution(StateVector& state, std::span<const double> diag, double time) {
    auto amps = state.amplitudes();
    if (diag.size() != amps.size()) {
        throw InputError("diagonal length does not match state");
    }
    for (std::size_t z = 0; z < amps.size(); ++z) {
        amps[z] *= std::polar(1.0, -time * diag[z]);
    }
}

void apply_x_mixer(StateVector& state, double angle) {
    // exp(-i angle/2 X) equals the drive rotation with omega*h = angle, phi = 0.
    rotate_all(state, angle, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Measurement

Distribution probabilities(const StateVector& state, double drop_below) {
    auto p = state.probabilities_dense();
    return Distribution::from_dense(state.n_qubits(), p, drop_below);
}

ShotHistogram sample_distribution(const std::vector<double>& probs, int n_bits, std::uint64_t shots,
                                  std::uint64_t seed, const std::optional<MeasurementNoise>& noise) {
    if (shots < 1) {
        throw InputError("shot count must be at least 1");
    }
    if (probs.size() != (std::size_t{1} << n_bits)) {
        throw InputError("probability vector has wrong length");
    }
    if (noise && (noise->p01 < 0.0 || noise->p01 > 1.0 || noise->p10 < 0.0 || noise->p10 > 1.0)) {
        throw InputError("flip probabilities must lie in [0, 1]");
    }
    std::vector<double> cdf(probs.size());
    double run = 0.0;
    for (std::size_t z = 0; z < probs.size(); ++z) {
        run += probs[z];
        cdf[z] = run;
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    ShotHistogram hist{n_bits, shots, {}};
    for (std::uint64_t s = 0; s < shots; ++s) {
        double u = unit(rng) * run;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        auto z = static_cast<Bits>(std::min<std::ptrdiff_t>(it - cdf.begin(), cdf.size() - 1));
        // Skip zero-probability states that upper_bound can land on via rounding.
        while (probs[z] == 0.0 && z > 0) {
            --z;
        }
        if (noise) {
            for (int k = 0; k < n_bits; ++k) {
                bool one = (z >> k) & 1U;
                double flip = one ? noise->p10 : noise->p01;
                if (unit(rng) < flip) {
                    z ^= Bits{1} << k;
                }
            }
        }
        ++hist.counts[z];
    }
    return hist;
}

ShotHistogram sample(const StateVector& state, std::uint64_t shots, std::uint64_t seed,
                     const std::optional<MeasurementNoise>& noise) {
    return sample_distribution(state.probabilities_dense(), state.n_qubits(), shots, seed, noise);
}

std::vector<double> cost_table(const WeightedGraph& graph) {
    const int n = graph.n_vertices();
    if (n > kMaxSimQubits) {
        throw CapacityError("cost table limited to " + std::to_string(kMaxSimQubits) + " vertices");
    }
    std::vector<double> table(std::size_t{1} << n);
    for (std::size_t z = 0; z < table.size(); ++z) {
        table[z] = cost_value_bits(graph, z);
    }
    return table;
}

double expectation_diagonal(const StateVector& state, std::span<const double> diag) {
    auto amps = state.amplitudes();
    if (diag.size() != amps.size()) {
        throw InputError("diagonal length does not match state");
    }
    double e = 0.0;
    for (std::size_t z = 0; z < amps.size(); ++z) {
        e += std::norm(amps[z]) * diag[z];
    }
    return e;
}

double expectation_cost(const StateVector& state, const WeightedGraph& graph) {
    if (graph.n_vertices() != state.n_qubits()) {
        throw InputError("graph has " + std::to_string(graph.n_vertices()) + " vertices, state has " +
                         std::to_string(state.n_qubits()) + " qubits");
    }
    return expectation_diagonal(state, cost_table(graph));
}

std::vector<double> single_z_coefficients(std::span<const double> diag, int n) {
    if (diag.size() != (std::size_t{1} << n)) {
        throw InputError("diagonal length does not match qubit count");
    }
    std::vector<double> coef(n, 0.0);
    for (std::size_t z = 0; z < diag.size(); ++z) {
        for (int i = 0; i < n; ++i) {
            coef[i] += ((z >> i) & 1U) ? -diag[z] : diag[z];
        }
    }
    for (double& c : coef) {
        c /= static_cast<double>(diag.size());
    }
    return coef;
}

}  // namespace gridcut
