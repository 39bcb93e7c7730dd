#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "gridcut/graph.hpp"

namespace gridcut {

// Units: time in microseconds, lengths in micrometres, and every frequency,
// detuning or energy in angular units (rad/us). User-facing files use MHz and
// convert with kTwoPi at the boundary.
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline double mhz_to_rad_per_us(double mhz) { return mhz * kTwoPi; }
inline double rad_per_us_to_mhz(double w) { return w / kTwoPi; }

struct PhysicsConstants {
    double c6 = 5'420'441.0;  // rad/us * um^6, 2*pi * 862690
    double omega_max = 15.8;  // rad/us
    double delta_max = 125.0; // rad/us
};

struct Point {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Point&) const = default;
};

double distance(const Point& a, const Point& b);

struct LayoutConstraints {
    double min_spacing = 4.0;  // um
    double box_width = 75.0;   // um
    double box_height = 76.0;  // um
};

struct Layout {
    std::vector<Point> positions;

    int size() const { return static_cast<int>(positions.size()); }
    double min_distance() const;
    // Throws ValidationError naming the first violated constraint. Positions
    // are measured from the box origin, i.e. x in [0, width], y in [0, height].
    void validate(const LayoutConstraints& c) const;
    bool operator==(const Layout&) const = default;
};

// Dense symmetric matrix, row-major.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(int n) : n_(n), data_(static_cast<std::size_t>(n) * n, 0.0) {}

    int size() const { return n_; }
    double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * n_ + j]; }
    void set(int i, int j, double v) {
        data_[static_cast<std::size_t>(i) * n_ + j] = v;
        data_[static_cast<std::size_t>(j) * n_ + i] = v;
    }
    double max_abs() const;

private:
    int n_ = 0;
    std::vector<double> data_;
};

// w_ij = C6 / (4 d_ij^6): the ZZ coupling implied by the van der Waals term.
// Diagonal entries are zero. Throws DomainError for coincident atoms.
SymMatrix interaction_weights(const Layout& layout, const PhysicsConstants& constants = {});

// Knot-based waveform.
class PiecewiseLinear {
public:
    PiecewiseLinear() = default;
    explicit PiecewiseLinear(std::vector<std::pair<double, double>> knots);
    static PiecewiseLinear constant(double value, double t0, double t1);

    // Throws InputError outside the knot span.
    double operator()(double t) const;
    bool covers(double t0, double t1) const;
    bool empty() const { return knots_.empty(); }
    const std::vector<std::pair<double, double>>& knots() const { return knots_; }
    std::vector<std::pair<double, double>>& mutable_knots() { return knots_; }

private:
    std::vector<std::pair<double, double>> knots_;
};

// Holds the value of the last knot at or before t. An empty waveform is 0.
class PiecewiseConstant {
public:
    PiecewiseConstant() = default;
    explicit PiecewiseConstant(std::vector<std::pair<double, double>> knots);

    double operator()(double t) const;
    const std::vector<std::pair<double, double>>& knots() const { return knots_; }

private:
    std::vector<std::pair<double, double>> knots_;
};

struct PulseSchedule {
    double t_max = 0.0;
    PiecewiseLinear omega;         // rad/us, >= 0
    PiecewiseLinear delta_global;  // rad/us
    PiecewiseConstant phi;         // rad
    std::optional<std::vector<double>> local_detuning;  // rad/us per atom

    // With hardware_legal the amplitude must start and end at zero and all
    // values must respect the limits in `constants`. Throws ValidationError.
    void validate(const PhysicsConstants& constants, bool hardware_legal) const;
};

struct ShotHistogram {
    int n_bits = 0;
    std::uint64_t shots = 0;
    std::map<Bits, std::uint64_t> counts;

    Distribution distribution() const { return Distribution::from_counts(n_bits, counts); }
};

// Independent asymmetric bit flips applied at readout.
struct MeasurementNoise {
    double p01 = 0.0;  // 0 read as 1
    double p10 = 0.0;  // 1 read as 0
};

using Complex = std::complex<double>;

class StateVector {
public:
    StateVector() = default;
    explicit StateVector(int n_qubits);  // |0...0>
    StateVector(int n_qubits, std::vector<Complex> amplitudes);

    static StateVector basis(int n_qubits, Bits z);
    static StateVector plus(int n_qubits);

    int n_qubits() const { return n_; }
    std::size_t dim() const { return amps_.size(); }
    std::span<Complex> amplitudes() { return amps_; }
    std::span<const Complex> amplitudes() const { return amps_; }
    Complex& operator[](std::size_t z) { return amps_[z]; }
    const Complex& operator[](std::size_t z) const { return amps_[z]; }

    double norm() const;
    Complex inner(const StateVector& other) const;  // <this|other>
    std::vector<double> probabilities_dense() const;

private:
    int n_ = 0;
    std::vector<Complex> amps_;
};

inline constexpr int kMaxSimQubits = 20;

// Settings shared by every routine that runs the simulator.
struct SimConfig {
    PhysicsConstants constants;
    double dt = 1e-3;  // us
    int threads = 1;
};

// Hamiltonian of a fixed register:
//   H(t) = sum_i (Delta(t) + Delta_i)/2 Z_i + Omega(t)/2 sum_i (X_i cos phi - Y_i sin phi)
//          + C6/4 sum_{i<j} (Z_i - 1)(Z_j - 1) / d_ij^6
// In occupation form (n = (1 - Z)/2) the same operator reads
//   -sum_i (Delta + Delta_i) n_i + sum_{i<j} C6/d_ij^6 n_i n_j + const.
class RydbergSystem {
public:
    RydbergSystem(const Layout& layout, const PhysicsConstants& constants,
                  std::optional<std::vector<double>> local_detuning = std::nullopt);

    int n_qubits() const { return n_; }
    std::size_t dim() const { return std::size_t{1} << n_; }
    const SymMatrix& weights() const { return weights_; }

    // Diagonal energy for a constant global detuning (rad/us), including the
    // local detunings and the full interaction term.
    std::vector<double> diagonal_energy(double delta_global) const;

    // Second-order Strang splitting over [t_start, t_end] with uniform steps no
    // longer than dt. Detuning, amplitude and phase are sampled at step midpoints.
    // Local detunings come from the system; schedule.local_detuning is ignored.
    void evolve(StateVector& state, const PulseSchedule& schedule, double dt, double t_start,
                double t_end) const;

    // Exact propagation under a time-independent drive using a Chebyshev
    // expansion of exp(-iHt); accurate to ~1e-13 in norm. Negative durations
    // apply the inverse evolution.
    void evolve_constant(StateVector& state, double omega, double phi, double delta_global,
                         double duration) const;

    // out = H psi for a time-independent drive.
    void apply_hamiltonian(const StateVector& in, StateVector& out, double omega, double phi,
                           double delta_global) const;

private:

    int n_;
    PhysicsConstants constants_;
    SymMatrix weights_;
    std::vector<double> static_energy_;  // interaction + local detuning
    std::vector<double> zsum_half_;      // sum_i Z_i / 2
};

void evolve(StateVector& state, const Layout& layout, const PulseSchedule& schedule, double dt,
            double t_start, double t_end, const PhysicsConstants& constants = {});

// Multiplies each amplitude by exp(-i * time * diag[z]).
void apply_diagonal_evolution(StateVector& state, std::span<const double> diag, double time);

// Applies exp(-i angle/2 * X) to every qubit.
void apply_x_mixer(StateVector& state, double angle);

Distribution probabilities(const StateVector& state, double drop_below = 1e-15);

ShotHistogram sample(const StateVector& state, std::uint64_t shots, std::uint64_t seed,
                     const std::optional<MeasurementNoise>& noise = std::nullopt);
ShotHistogram sample_distribution(const std::vector<double>& probs, int n_bits, std::uint64_t shots,
                                  std::uint64_t seed,
                                  const std::optional<MeasurementNoise>& noise = std::nullopt);

// cost_value for every basis state.
std::vector<double> cost_table(const WeightedGraph& graph);

double expectation_cost(const StateVector& state, const WeightedGraph& graph);
double expectation_diagonal(const StateVector& state, std::span<const double> diag);

// Coefficient of Z_i when a diagonal operator is expanded in the {1, Z} basis.
std::vector<double> single_z_coefficients(std::span<const double> diag, int n);

}  // namespace gridcut
