#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gridcut/embed.hpp"
#include "gridcut/graph.hpp"
#include "gridcut/optim.hpp"
#include "gridcut/rydsim.hpp"

namespace gridcut {

// Three-parameter adiabatic sweep:
//   Omega(t) = p0 (1 - [1 - sin^2(pi t / T)]^(p1/2))
//   Delta(t) = (2/pi) p2 atan(p1 (t - T/2))
struct AdiabaticParams {
    double p0 = 0.0;  // peak amplitude, rad/us
    double p1 = 0.0;  // steepness, shared by both waveforms
    double p2 = 0.0;  // detuning scale, rad/us

    static AdiabaticParams defaults(const PhysicsConstants& constants = {});
    void validate(const PhysicsConstants& constants) const;
    bool operator==(const AdiabaticParams&) const = default;
};

inline constexpr double kDefaultTmax = 4.0;  // us
inline constexpr int kDefaultKnots = 101;

double adiabatic_omega(const AdiabaticParams& p, double t, double t_max);
double adiabatic_delta(const AdiabaticParams& p, double t, double t_max);

// Samples the ansatz onto `knots` equally spaced points. Throws
// ValidationError (listing offending knots) if the result is not hardware legal.
PulseSchedule adiabatic_schedule(const AdiabaticParams& params, double t_max = kDefaultTmax,
                                 int knots = kDefaultKnots, const PhysicsConstants& constants = {});

struct ProjectedSchedule {
    PulseSchedule schedule;
    bool clamped = false;
};

ProjectedSchedule project_to_hardware(const PulseSchedule& schedule, const PhysicsConstants& constants = {});

// Reusable objective for one (graph, layout) pair.
class PulseProblem {
public:
    PulseProblem(const WeightedGraph& graph, const Layout& layout, const SimConfig& sim,
                 double t_max = kDefaultTmax, int knots = kDefaultKnots);

    StateVector final_state(const AdiabaticParams& params, double dt) const;
    double cost(const AdiabaticParams& params) const;
    double cost(const AdiabaticParams& params, double dt) const;

    const SimConfig& sim() const { return sim_; }
    double t_max() const { return t_max_; }
    int knots() const { return knots_; }

private:
    SimConfig sim_;
    double t_max_;
    int knots_;
    RydbergSystem system_;
    std::vector<double> cost_table_;
};

double pulse_objective(const WeightedGraph& graph, const Layout& layout, const AdiabaticParams& params,
                       const SimConfig& sim, double t_max = kDefaultTmax);

struct PulseOptimization {
    AdiabaticParams best;
    std::vector<double> trace;
    bool converged = false;
};

// Nadam/Adam over (p0, p1, p2) with parameter-box projection. Parameters are
// optimized in units of (omega_max, 1, delta_max).
PulseOptimization optimize_pulse(const PulseProblem& problem, const AdiabaticParams& init,
                                 const OptimizerConfig& cfg);
PulseOptimization optimize_pulse(const WeightedGraph& graph, const Layout& layout, const AdiabaticParams& init,
                                 const OptimizerConfig& cfg, const SimConfig& sim);

struct PipelineConfig {
    SimConfig sim;
    double dt_final = 1e-4;
    double t_max = kDefaultTmax;
    int knots = kDefaultKnots;
    int registers = 50;
    EmbedParams embed = default_pipeline_embedding();
    // Register i is embedded with k_scales[i % size]; empty keeps embed.k_scale.
    // Spreading the scale matters because the blockade ground state only
    // matches the cut inside a geometry-dependent window.
    std::vector<double> k_scales{6.0, 7.0, 8.0, 9.0, 10.0};
    std::optional<AdiabaticParams> init;  // defaults from AdiabaticParams::defaults
    OptimizerConfig optimizer = default_pulse_optimizer();
    std::uint64_t shots = 0;
    std::uint64_t seed = 0;
    std::optional<MeasurementNoise> noise;

    static EmbedParams default_pipeline_embedding();
    static OptimizerConfig default_pulse_optimizer();
};

struct RunReport {
    OracleResult oracle;
    std::vector<double> register_costs;
    std::size_t best_register = 0;
    std::uint64_t layout_seed = 0;
    double layout_k_scale = 0.0;
    Layout layout;
    AdiabaticParams init;
    AdiabaticParams params;
    std::vector<double> cost_trace;
    PulseSchedule schedule;
    bool clamped = false;
    double final_cost = 0.0;
    Distribution distribution;
    std::optional<ShotHistogram> histogram;
    double p_gs = 0.0;
    std::optional<double> histogram_p_gs;
    std::optional<double> step_to_solution;  // empty when P(GS) == 1
};

// Register selection with the default pulse, pulse optimization on the winner,
// then a fine-step evaluation of the optimized pulse.
RunReport run_adiabatic_pipeline(const WeightedGraph& graph, const PipelineConfig& config);

}  // namespace gridcut
