#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gridcut/graph.hpp"
#include "gridcut/optim.hpp"
#include "gridcut/rydsim.hpp"

namespace gridcut {

// Layer durations in microseconds: gammas drive the cost Hamiltonian, betas the mixer.
struct QaoaParams {
    std::vector<double> gammas;
    std::vector<double> betas;

    int layers() const { return static_cast<int>(gammas.size()); }
    // Throws InputError on length mismatch, non-finite entries, or any entry
    // outside [lower, cap].
    void validate(double cap, double lower = 0.0) const;
    std::vector<double> flatten() const;
    static QaoaParams unflatten(const std::vector<double>& x);
};

struct QaoaHardwareConfig {
    double omega_prep = 5.0 * 3.14159265358979323846;  // rad/us
    double phi_prep = -3.14159265358979323846 / 2.0;
    double omega_mixer = 2.0;    // rad/us
    // |+> is the top eigenstate of the phi = 0 drive, so positive-time layers
    // would climb towards the worst cut. A pi phase makes it the bottom one.
    double phi_mixer = 3.14159265358979323846;
    double spacing = 12.0;       // um, nearest-neighbour lattice distance
    double max_duration = 4.0;   // us, per-layer bound
};

// Per-atom detuning 2 * sum_j w_ij; cancels the single-Z part of the
// interaction so the remaining diagonal is an Ising cost.
std::vector<double> local_detunings(const Layout& layout, const PhysicsConstants& constants = {});

// How the mixer exp(-i beta H_b) is propagated on the Rydberg model.
enum class MixerPropagation { chebyshev, strang };

// Uniform interface for the two QAOA flavours. The objective is always the
// problem-graph cost; only the physical generators differ.
class QaoaModel {
public:
    virtual ~QaoaModel() = default;

    int n_qubits() const { return n_; }
    const std::vector<double>& objective_diagonal() const { return objective_; }
    const StateVector& initial_state() const { return initial_; }

    // Final state after all layers.
    StateVector evolve(const QaoaParams& params) const;
    double cost(const QaoaParams& params) const;
    // Cost plus exact gradient by one forward and one reverse sweep.
    Objective cost_and_gradient(const QaoaParams& params) const;

    // Physical models evolve for non-negative times; an ideal circuit may use
    // signed angles.
    virtual bool signed_parameters() const { return false; }

    // exp(-i t H_c) and exp(-i t H_b); t may be negative.
    virtual void apply_cost(StateVector& state, double t) const = 0;
    virtual void apply_mixer(StateVector& state, double t) const = 0;
    // out = H_c psi and out = H_b psi.
    virtual void cost_hamiltonian(const StateVector& in, StateVector& out) const = 0;
    virtual void mixer_hamiltonian(const StateVector& in, StateVector& out) const = 0;

protected:
    QaoaModel(int n, std::vector<double> objective, StateVector initial);

    int n_;
    std::vector<double> objective_;
    StateVector initial_;
};

// Neutral-atom QAOA: state preparation by a uniform pulse, cost layers as free
// evolution under interactions plus local detuning, mixer layers as a drive.
class LocalDetuningQaoa final : public QaoaModel {
public:
    LocalDetuningQaoa(const WeightedGraph& graph, const Layout& layout, const QaoaHardwareConfig& hw = {},
                      const SimConfig& sim = {}, MixerPropagation mixer = MixerPropagation::chebyshev);

    void apply_cost(StateVector& state, double t) const override;
    void apply_mixer(StateVector& state, double t) const override;
    void cost_hamiltonian(const StateVector& in, StateVector& out) const override;
    void mixer_hamiltonian(const StateVector& in, StateVector& out) const override;

    const std::vector<double>& detunings() const { return detunings_; }
    const std::vector<double>& cost_diagonal() const { return cost_diag_; }

private:
    QaoaHardwareConfig hw_;
    SimConfig sim_;
    MixerPropagation mixer_;
    std::vector<double> detunings_;
    std::unique_ptr<RydbergSystem> system_;
    std::vector<double> cost_diag_;
};

// Textbook QAOA: |+>^n start, H_c = problem cost / cost_scale, H_b = sum_i X_i.
// By default cost_scale is the Euclidean norm of the edge weights, which keeps
// the useful gamma range comparable across graphs. The objective is never
// rescaled. Angles may be negative.
class VanillaQaoa final : public QaoaModel {
public:
    explicit VanillaQaoa(const WeightedGraph& graph, std::optional<double> cost_scale = std::nullopt);

    double cost_scale() const { return scale_; }
    bool signed_parameters() const override { return true; }

    void apply_cost(StateVector& state, double t) const override;
    void apply_mixer(StateVector& state, double t) const override;
    void cost_hamiltonian(const StateVector& in, StateVector& out) const override;
    void mixer_hamiltonian(const StateVector& in, StateVector& out) const override;

private:
    double scale_;
    std::vector<double> generator_;
};

// Resonant pi/2 pulse with local detunings on, starting from |0...0>.
StateVector prepare_plus(const Layout& layout, const QaoaHardwareConfig& hw = {}, const SimConfig& sim = {});

// Applies the layers to `state` in place.
void apply_qaoa_layers(const QaoaModel& model, StateVector& state, const QaoaParams& params);

double qaoa_objective(const QaoaModel& model, const QaoaParams& params);

struct QaoaSeedResult {
    std::uint64_t seed = 0;
    QaoaParams init;
    QaoaParams params;
    double cost = 0.0;
    double p_gs = 0.0;
    int steps = 0;
    bool converged = false;
    bool failed = false;
    std::string message;
};

struct QaoaReport {
    OracleResult oracle;
    int layers = 0;
    bool vanilla = false;
    std::vector<QaoaSeedResult> seeds;
    double mean_p_gs = 0.0;  // over non-failed seeds
    double best_p_gs = 0.0;
    std::size_t best_index = 0;
    std::size_t failed = 0;
};

struct QaoaRunConfig {
    int layers = 10;
    int seeds = 20;
    std::uint64_t seed = 0;  // seed s uses seed + s
    double init_high = 0.5;  // initial durations drawn from U[0, init_high] us
    OptimizerConfig optimizer = default_qaoa_optimizer();
    int threads = 1;          // seeds optimized concurrently

    static OptimizerConfig default_qaoa_optimizer();
};

QaoaParams random_qaoa_params(int layers, std::uint64_t seed, double high = 0.5);

QaoaSeedResult optimize_qaoa_seed(const QaoaModel& model, const OracleResult& oracle, const QaoaParams& init,
                                  const OptimizerConfig& cfg, double max_duration);

QaoaReport optimize_qaoa(const QaoaModel& model, const OracleResult& oracle, const QaoaRunConfig& cfg,
                         double max_duration = QaoaHardwareConfig{}.max_duration);

// Scales a layout about its first atom's corner so its closest pair sits at
// `spacing`, then shifts it to the positive quadrant.
Layout rescale_to_spacing(const Layout& layout, double spacing);

struct QaoaLayoutChoice {
    std::size_t best_index = 0;
    Layout layout;                // rescaled to the hardware spacing
    std::vector<double> margins;  // per candidate
};

// Ground-state margin of the native cost generator on `layout`: lowest energy
// over non-optimal cuts minus lowest energy over optimal ones. Positive means
// the generator's ground state is a maximum cut.
double cost_generator_margin(const Layout& layout, const OracleResult& oracle, const PhysicsConstants& constants = {});

// Rescales every candidate to hw.spacing and keeps the largest margin (ties go
// to the lowest index).
QaoaLayoutChoice select_qaoa_layout(const std::vector<Layout>& candidates, const OracleResult& oracle,
                                    const QaoaHardwareConfig& hw = {}, const PhysicsConstants& constants = {});

enum class LatticeKind { square, honeycomb };

LatticeKind lattice_from_string(const std::string& s);
std::string to_string(LatticeKind k);

struct LatticeInstance {
    WeightedGraph graph;
    Layout layout;
};

// Seeded random growth of an n-site cluster on a lattice with the given
// spacing; edges join nearest neighbours with weight C6 / (4 spacing^6).
LatticeInstance lattice_graph(int n, LatticeKind kind, std::uint64_t seed, double spacing = 12.0,
                              const PhysicsConstants& constants = {});

}  // namespace gridcut
