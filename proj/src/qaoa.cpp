#include "gridcut/qaoa.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <tuple>

#include "gridcut/error.hpp"
#include "gridcut/parallel.hpp"

namespace gridcut {

void QaoaParams::validate(double cap, double lower) const {
    if (gammas.size() != betas.size()) {
        throw InputError("QAOA needs as many gammas as betas");
    }
    if (gammas.empty()) {
        throw InputError("QAOA needs at least one layer");
    }
    for (const auto* v : {&gammas, &betas}) {
        for (double t : *v) {
            if (!std::isfinite(t) || t < lower - 1e-12 || t > cap + 1e-12) {
                throw InputError("layer parameter " + std::to_string(t) + " outside [" + std::to_string(lower) +
                                 ", " + std::to_string(cap) + "]");
            }
        }
    }
}

std::vector<double> QaoaParams::flatten() const {
    std::vector<double> x = gammas;
    x.insert(x.end(), betas.begin(), betas.end());
    return x;
}

QaoaParams QaoaParams::unflatten(const std::vector<double>& x) {
    if (x.size() % 2 != 0) {
        throw InputError("flattened QAOA parameters must have even length");
    }
    const auto half = static_cast<std::ptrdiff_t>(x.size() / 2);
    return {{x.begin(), x.begin() + half}, {x.begin() + half, x.end()}};
}

std::vector<double> local_detunings(const Layout& layout, const PhysicsConstants& constants) {
    SymMatrix w = interaction_weights(layout, constants);
    std::vector<double> d(layout.size(), 0.0);
    for (int i = 0; i < layout.size(); ++i) {
        for (int j = 0; j < layout.size(); ++j) {
            d[i] += 2.0 * w(i, j);
        }
    }
    return d;
}

// ---------------------------------------------------------------------------
// Generic forward / reverse sweeps

QaoaModel::QaoaModel(int n, std::vector<double> objective, StateVector initial)
    : n_(n), objective_(std::move(objective)), initial_(std::move(initial)) {}

void apply_qaoa_layers(const QaoaModel& model, StateVector& state, const QaoaParams& params) {
    if (params.gammas.size() != params.betas.size()) {
        throw InputError("QAOA needs as many gammas as betas");
    }
    for (std::size_t k = 0; k < params.gammas.size(); ++k) {
        model.apply_cost(state, params.gammas[k]);
        model.apply_mixer(state, params.betas[k]);
    }
}

StateVector QaoaModel::evolve(const QaoaParams& params) const {
    StateVector s = initial_;
    apply_qaoa_layers(*this, s, params);
    return s;
}

double QaoaModel::cost(const QaoaParams& params) const { return expectation_diagonal(evolve(params), objective_); }

double qaoa_objective(const QaoaModel& model, const QaoaParams& params) { return model.cost(params); }

namespace {

// 2 Im <a|b>
double twice_imag_inner(const StateVector& a, const StateVector& b) { return 2.0 * a.inner(b).imag(); }

}  // namespace

Objective QaoaModel::cost_and_gradient(const QaoaParams& params) const {
    const std::size_t p = params.gammas.size();
    if (params.betas.size() != p) {
        throw InputError("QAOA needs as many gammas as betas");
    }
    StateVector psi = evolve(params);
    StateVector lam = psi;
    {
        auto l = lam.amplitudes();
        for (std::size_t z = 0; z < l.size(); ++z) {
            l[z] *= objective_[z];
        }
    }
    Objective out;
    out.value = psi.inner(lam).real();
    out.gradient.assign(2 * p, 0.0);

    // Walk the layers backwards. At each point psi is the forward state and
    // lam = U_after^dagger C psi_final, so dE/dt = 2 Im <lam| H |psi>.
    StateVector tmp(n_);
    for (std::size_t k = p; k-- > 0;) {
        mixer_hamiltonian(psi, tmp);
        out.gradient[p + k] = twice_imag_inner(lam, tmp);
        apply_mixer(psi, -params.betas[k]);
        apply_mixer(lam, -params.betas[k]);

        cost_hamiltonian(psi, tmp);
        out.gradient[k] = twice_imag_inner(lam, tmp);
        apply_cost(psi, -params.gammas[k]);
        apply_cost(lam, -params.gammas[k]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Neutral-atom flavour

StateVector prepare_plus(const Layout& layout, const QaoaHardwareConfig& hw, const SimConfig& sim) {
    if (!(hw.omega_prep > 0.0)) {
        throw InputError("preparation amplitude must be positive");
    }
    RydbergSystem system(layout, sim.constants, local_detunings(layout, sim.constants));
    StateVector s(layout.size());
    system.evolve_constant(s, hw.omega_prep, hw.phi_prep, 0.0, std::numbers::pi / (2.0 * hw.omega_prep));
    return s;
}

LocalDetuningQaoa::LocalDetuningQaoa(const WeightedGraph& graph, const Layout& layout, const QaoaHardwareConfig& hw,
                                     const SimConfig& sim, MixerPropagation mixer)
    : QaoaModel(graph.n_vertices(), cost_table(graph), prepare_plus(layout, hw, sim)),
      hw_(hw),
      sim_(sim),
      mixer_(mixer),
      detunings_(local_detunings(layout, sim.constants)) {
    if (layout.size() != graph.n_vertices()) {
        throw InputError("layout has " + std::to_string(layout.size()) + " atoms for a graph with " +
                         std::to_string(graph.n_vertices()) + " vertices");
    }
    system_ = std::make_unique<RydbergSystem>(layout, sim.constants, detunings_);
    cost_diag_ = system_->diagonal_energy(0.0);
}

void LocalDetuningQaoa::apply_cost(StateVector& state, double t) const {
    apply_diagonal_evolution(state, cost_diag_, t);
}

void LocalDetuningQaoa::apply_mixer(StateVector& state, double t) const {
    if (t == 0.0) {
        return;
    }
    if (mixer_ == MixerPropagation::chebyshev) {
        system_->evolve_constant(state, hw_.omega_mixer, hw_.phi_mixer, 0.0, t);
        return;
    }
    if (t < 0.0 && std::abs(std::sin(hw_.phi_mixer)) > 1e-15) {
        throw InputError("reverse Strang mixer needs a real drive (phi = 0 or pi)");
    }
    PulseSchedule s;
    const double span = std::abs(t);
    s.t_max = span;
    s.omega = PiecewiseLinear::constant(hw_.omega_mixer, 0.0, span);
    s.delta_global = PiecewiseLinear::constant(0.0, 0.0, span);
    s.phi = PiecewiseConstant({{0.0, hw_.phi_mixer}});
    // The mixer generator is real, so exp(+iHt) psi = conj(exp(-iHt) conj(psi)).
    auto conj_all = [&] {
        for (auto& a : state.amplitudes()) {
            a = std::conj(a);
        }
    };
    if (t < 0.0) {
        conj_all();
    }
    system_->evolve(state, s, sim_.dt, 0.0, span);
    if (t < 0.0) {
        conj_all();
    }
}

void LocalDetuningQaoa::cost_hamiltonian(const StateVector& in, StateVector& out) const {
    auto i = in.amplitudes();
    auto o = out.amplitudes();
    for (std::size_t z = 0; z < i.size(); ++z) {
        o[z] = cost_diag_[z] * i[z];
    }
}

void LocalDetuningQaoa::mixer_hamiltonian(const StateVector& in, StateVector& out) const {
    system_->apply_hamiltonian(in, out, hw_.omega_mixer, hw_.phi_mixer, 0.0);
}

// ---------------------------------------------------------------------------
// Textbook flavour

namespace {

double weight_norm(const WeightedGraph& graph) {
    double s = 0.0;
    for (const auto& e : graph.edges()) {
        s += e.w * e.w;
    }
    return std::sqrt(s);
}

}  // namespace

VanillaQaoa::VanillaQaoa(const WeightedGraph& graph, std::optional<double> cost_scale)
    : QaoaModel(graph.n_vertices(), cost_table(graph), StateVector::plus(graph.n_vertices())),
      scale_(cost_scale.value_or(weight_norm(graph))) {
    if (!(scale_ > 0.0) || !std::isfinite(scale_)) {
        throw InputError("cost scale must be positive");
    }
    generator_ = objective_;
    for (double& v : generator_) {
        v /= scale_;
    }
}

void VanillaQaoa::apply_cost(StateVector& state, double t) const { apply_diagonal_evolution(state, generator_, t); }

void VanillaQaoa::apply_mixer(StateVector& state, double t) const { apply_x_mixer(state, 2.0 * t); }

void VanillaQaoa::cost_hamiltonian(const StateVector& in, StateVector& out) const {
    auto i = in.amplitudes();
    auto o = out.amplitudes();
    for (std::size_t z = 0; z < i.size(); ++z) {
        o[z] = generator_[z] * i[z];
    }
}

void VanillaQaoa::mixer_hamiltonian(const StateVector& in, StateVector& out) const {
    auto i = in.amplitudes();
    auto o = out.amplitudes();
    std::fill(o.begin(), o.end(), Complex{});
    for (std::size_t z = 0; z < i.size(); ++z) {
        for (int q = 0; q < n_; ++q) {
            o[z] += i[z ^ (std::size_t{1} << q)];
        }
    }
}

// ---------------------------------------------------------------------------
// Optimization

OptimizerConfig QaoaRunConfig::default_qaoa_optimizer() {
    OptimizerConfig c;
    c.algorithm = Algorithm::adam;
    c.learning_rate = 0.05;
    c.max_steps = 2000;
    c.gradient = GradientMethod::adjoint;
    c.fd_step = 1e-5;
    return c;
}

QaoaParams random_qaoa_params(int layers, std::uint64_t seed, double high) {
    if (layers < 1) {
        throw InputError("QAOA needs at least one layer");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, high);
    QaoaParams p;
    for (int k = 0; k < layers; ++k) {
        p.gammas.push_back(u(rng));
        p.betas.push_back(u(rng));
    }
    return p;
}

QaoaSeedResult optimize_qaoa_seed(const QaoaModel& model, const OracleResult& oracle, const QaoaParams& init,
                                  const OptimizerConfig& cfg, double max_duration) {
    const double lower = model.signed_parameters() ? -max_duration : 0.0;
    init.validate(max_duration, lower);
    QaoaSeedResult r;
    r.init = init;
    const std::size_t dim = 2 * init.gammas.size();
    Box box{std::vector<double>(dim, lower), std::vector<double>(dim, max_duration)};
    try {
        OptimizeResult opt;
        if (cfg.gradient == GradientMethod::adjoint) {
            opt = minimize([&](const std::vector<double>& x) { return model.cost_and_gradient(QaoaParams::unflatten(x)); },
                           init.flatten(), box, cfg);
        } else {
            opt = minimize_fd([&](const std::vector<double>& x) { return model.cost(QaoaParams::unflatten(x)); },
                              init.flatten(), box, cfg);
        }
        r.params = QaoaParams::unflatten(opt.x_best);
        r.steps = opt.steps;
        r.converged = opt.converged;
        StateVector s = model.evolve(r.params);
        r.cost = expectation_diagonal(s, model.objective_diagonal());
        r.p_gs = ground_state_probability(probabilities(s, 0.0), oracle);
    } catch (const NumericalError& e) {
        r.failed = true;
        r.message = e.what();
        r.params = init;
    }
    return r;
}

QaoaReport optimize_qaoa(const QaoaModel& model, const OracleResult& oracle, const QaoaRunConfig& cfg,
                         double max_duration) {
    if (cfg.seeds < 1) {
        throw InputError("need at least one seed");
    }
    cfg.optimizer.validate();
    QaoaReport report;
    report.oracle = oracle;
    report.layers = cfg.layers;
    report.seeds.resize(cfg.seeds);
    parallel_for(static_cast<std::size_t>(cfg.seeds), cfg.threads, [&](std::size_t s) {
        std::uint64_t seed = cfg.seed + s;
        QaoaParams init = random_qaoa_params(cfg.layers, seed, std::min(cfg.init_high, max_duration));
        report.seeds[s] = optimize_qaoa_seed(model, oracle, init, cfg.optimizer, max_duration);
        report.seeds[s].seed = seed;
    });
    double sum = 0.0;
    std::size_t ok = 0;
    bool have_best = false;
    for (std::size_t s = 0; s < report.seeds.size(); ++s) {
        const auto& r = report.seeds[s];
        if (r.failed) {
            ++report.failed;
            continue;
        }
        sum += r.p_gs;
        ++ok;
        if (!have_best || r.p_gs > report.best_p_gs) {
            report.best_p_gs = r.p_gs;
            report.best_index = s;
            have_best = true;
        }
    }
    report.mean_p_gs = ok > 0 ? sum / static_cast<double>(ok) : 0.0;
    return report;
}

// ---------------------------------------------------------------------------
// Geometry helpers

Layout rescale_to_spacing(const Layout& layout, double spacing) {
    if (layout.size() < 2) {
        throw InputError("rescaling needs at least two atoms");
    }
    if (!(spacing > 0.0)) {
        throw InputError("spacing must be positive");
    }
    double d = layout.min_distance();
    if (!(d > 0.0)) {
        throw DomainError("layout has coincident atoms");
    }
    double s = spacing / d;
    double min_x = INFINITY;
    double min_y = INFINITY;
    for (const auto& p : layout.positions) {
        min_x = std::min(min_x, p.x);
        min_y = std::min(min_y, p.y);
    }
    Layout out;
    for (const auto& p : layout.positions) {
        out.positions.push_back({(p.x - min_x) * s, (p.y - min_y) * s});
    }
    return out;
}

double cost_generator_margin(const Layout& layout, const OracleResult& oracle, const PhysicsConstants& constants) {
    if (static_cast<int>(oracle.n_vertices) != layout.size()) {
        throw InputError("oracle and layout sizes differ");
    }
    RydbergSystem system(layout, constants, local_detunings(layout, constants));
    const auto energy = system.diagonal_energy(0.0);
    std::set<Bits> optimal(oracle.optimal_assignments.begin(), oracle.optimal_assignments.end());
    double best_opt = INFINITY;
    double best_other = INFINITY;
    for (std::size_t z = 0; z < energy.size(); ++z) {
        double& slot = optimal.count(z) ? best_opt : best_other;
        slot = std::min(slot, energy[z]);
    }
    return best_other - best_opt;
}

QaoaLayoutChoice select_qaoa_layout(const std::vector<Layout>& candidates, const OracleResult& oracle,
                                    const QaoaHardwareConfig& hw, const PhysicsConstants& constants) {
    if (candidates.empty()) {
        throw InputError("layout selection needs at least one candidate");
    }
    QaoaLayoutChoice choice;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        Layout scaled = rescale_to_spacing(candidates[i], hw.spacing);
        choice.margins.push_back(cost_generator_margin(scaled, oracle, constants));
        if (i == 0 || choice.margins[i] > choice.margins[choice.best_index]) {
            choice.best_index = i;
            choice.layout = std::move(scaled);
        }
    }
    return choice;
}

LatticeKind lattice_from_string(const std::string& s) {
    if (s == "square") {
        return LatticeKind::square;
    }
    if (s == "honeycomb") {
        return LatticeKind::honeycomb;
    }
    throw InputError("unknown lattice '" + s + "'");
}

std::string to_string(LatticeKind k) { return k == LatticeKind::square ? "square" : "honeycomb"; }

namespace {

// Site label (i, j, sublattice) on an integer grid.
using Site = std::tuple<int, int, int>;

std::vector<Site> lattice_neighbours(const Site& s, LatticeKind kind) {
    auto [i, j, b] = s;
    if (kind == LatticeKind::square) {
        return {{i + 1, j, 0}, {i - 1, j, 0}, {i, j + 1, 0}, {i, j - 1, 0}};
    }
    // Honeycomb with A at i*a1 + j*a2 and B shifted by one bond upwards.
    if (b == 0) {
        return {{i, j, 1}, {i, j - 1, 1}, {i + 1, j - 1, 1}};
    }
    return {{i, j, 0}, {i, j + 1, 0}, {i - 1, j + 1, 0}};
}

Point site_position(const Site& s, LatticeKind kind, double a) {
    auto [i, j, b] = s;
    if (kind == LatticeKind::square) {
        return {i * a, j * a};
    }
    const double r3 = std::sqrt(3.0);
    return {a * (r3 * i + r3 / 2.0 * j), a * (1.5 * j + b)};
}

}  // namespace

LatticeInstance lattice_graph(int n, LatticeKind kind, std::uint64_t seed, double spacing,
                              const PhysicsConstants& constants) {
    if (n < 2 || n > kMaxSimQubits) {
        throw InputError("lattice size must lie in [2, " + std::to_string(kMaxSimQubits) + "]");
    }
    if (!(spacing > 0.0)) {
        throw InputError("spacing must be positive");
    }
    std::mt19937_64 rng(seed);
    std::vector<Site> sites{{0, 0, 0}};
    std::set<Site> occupied{sites.front()};
    while (static_cast<int>(sites.size()) < n) {
        // Frontier in deterministic (sorted) order, then a uniform pick.
        std::set<Site> frontier;
        for (const auto& s : sites) {
            for (const auto& nb : lattice_neighbours(s, kind)) {
                if (!occupied.count(nb)) {
                    frontier.insert(nb);
                }
            }
        }
        std::uniform_int_distribution<std::size_t> pick(0, frontier.size() - 1);
        auto it = frontier.begin();
        std::advance(it, static_cast<std::ptrdiff_t>(pick(rng)));
        sites.push_back(*it);
        occupied.insert(*it);
    }

    Layout raw;
    for (const auto& s : sites) {
        raw.positions.push_back(site_position(s, kind, spacing));
    }
    const double w = constants.c6 / (4.0 * std::pow(spacing, 6));
    std::vector<Edge> edges;
    for (int a = 0; a < n; ++a) {
        for (const auto& nb : lattice_neighbours(sites[a], kind)) {
            auto it = std::find(sites.begin(), sites.end(), nb);
            int b = static_cast<int>(it - sites.begin());
            if (it != sites.end() && a < b) {
                edges.push_back({a, b, w});
            }
        }
    }
    return {WeightedGraph(n, std::move(edges)), rescale_to_spacing(raw, spacing)};
}

}  // namespace gridcut
