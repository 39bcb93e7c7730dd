#include "gridcut/pulseopt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gridcut/error.hpp"

namespace gridcut {

AdiabaticParams AdiabaticParams::defaults(const PhysicsConstants& constants) {
    return {0.8 * constants.omega_max, 2.0, 0.5 * constants.delta_max};
}

void AdiabaticParams::validate(const PhysicsConstants& constants) const {
    std::string bad;
    if (!(p0 > 0.0 && p0 <= constants.omega_max + 1e-12)) {
        bad += " p0=" + std::to_string(p0);
    }
    if (!(p1 > 0.0) || !std::isfinite(p1)) {
        bad += " p1=" + std::to_string(p1);
    }
    if (!(std::abs(p2) <= constants.delta_max + 1e-12)) {
        bad += " p2=" + std::to_string(p2);
    }
    if (!bad.empty()) {
        throw ValidationError("adiabatic parameters out of bounds:" + bad);
    }
}

double adiabatic_omega(const AdiabaticParams& p, double t, double t_max) {
    double s = std::sin(std::numbers::pi * t / t_max);
    double bracket = std::max(0.0, 1.0 - s * s);
    return p.p0 * (1.0 - std::pow(bracket, 0.5 * p.p1));
}

double adiabatic_delta(const AdiabaticParams& p, double t, double t_max) {
    return 2.0 / std::numbers::pi * p.p2 * std::atan(p.p1 * (t - 0.5 * t_max));
}

PulseSchedule adiabatic_schedule(const AdiabaticParams& params, double t_max, int knots,
                                 const PhysicsConstants& constants) {
    params.validate(constants);
    if (!(t_max > 0.0) || knots < 2) {
        throw InputError("schedule needs t_max > 0 and at least two knots");
    }
    std::vector<std::pair<double, double>> omega(knots);
    std::vector<std::pair<double, double>> delta(knots);
    for (int k = 0; k < knots; ++k) {
        double t = t_max * k / (knots - 1);
        if (k == knots - 1) {
            t = t_max;
        }
        omega[k] = {t, adiabatic_omega(params, t, t_max)};
        delta[k] = {t, adiabatic_delta(params, t, t_max)};
    }
    // Endpoints are zero analytically; remove rounding residue.
    omega.front().second = 0.0;
    omega.back().second = 0.0;
    PulseSchedule s;
    s.t_max = t_max;
    s.omega = PiecewiseLinear(std::move(omega));
    s.delta_global = PiecewiseLinear(std::move(delta));
    s.validate(constants, true);
    return s;
}

ProjectedSchedule project_to_hardware(const PulseSchedule& schedule, const PhysicsConstants& constants) {
    ProjectedSchedule out{schedule, false};
    auto& ok = out.schedule.omega.mutable_knots();
    for (auto& [t, v] : ok) {
        double c = std::clamp(v, 0.0, constants.omega_max);
        out.clamped |= c != v;
        v = c;
    }
    if (!ok.empty()) {
        for (auto* knot : {&ok.front(), &ok.back()}) {
            out.clamped |= knot->second != 0.0;
            knot->second = 0.0;
        }
    }
    for (auto& [t, v] : out.schedule.delta_global.mutable_knots()) {
        double c = std::clamp(v, -constants.delta_max, constants.delta_max);
        out.clamped |= c != v;
        v = c;
    }
    if (out.schedule.local_detuning) {
        for (double& v : *out.schedule.local_detuning) {
            double c = std::clamp(v, -constants.delta_max, constants.delta_max);
            out.clamped |= c != v;
            v = c;
        }
    }
    return out;
}

PulseProblem::PulseProblem(const WeightedGraph& graph, const Layout& layout, const SimConfig& sim, double t_max,
                           int knots)
    : sim_(sim), t_max_(t_max), knots_(knots), system_(layout, sim.constants), cost_table_(cost_table(graph)) {
    if (layout.size() != graph.n_vertices()) {
        throw InputError("layout has " + std::to_string(layout.size()) + " atoms for a graph with " +
                         std::to_string(graph.n_vertices()) + " vertices");
    }
}

StateVector PulseProblem::final_state(const AdiabaticParams& params, double dt) const {
    PulseSchedule schedule = adiabatic_schedule(params, t_max_, knots_, sim_.constants);
    StateVector state(system_.n_qubits());
    system_.evolve(state, schedule, dt, 0.0, t_max_);
    return state;
}

double PulseProblem::cost(const AdiabaticParams& params, double dt) const {
    return expectation_diagonal(final_state(params, dt), cost_table_);
}

double PulseProblem::cost(const AdiabaticParams& params) const { return cost(params, sim_.dt); }

double pulse_objective(const WeightedGraph& graph, const Layout& layout, const AdiabaticParams& params,
                       const SimConfig& sim, double t_max) {
    return PulseProblem(graph, layout, sim, t_max).cost(params);
}

namespace {

constexpr double kMinP0Fraction = 1e-3;
constexpr double kMinP1 = 0.05;
constexpr double kMaxP1 = 50.0;

}  // namespace

PulseOptimization optimize_pulse(const PulseProblem& problem, const AdiabaticParams& init,
                                 const OptimizerConfig& cfg) {
    const auto& c = problem.sim().constants;
    init.validate(c);
    auto to_params = [&](const std::vector<double>& u) {
        return AdiabaticParams{u[0] * c.omega_max, u[1], u[2] * c.delta_max};
    };
    Box box{{kMinP0Fraction, kMinP1, -1.0}, {1.0, kMaxP1, 1.0}};
    std::vector<double> u0{init.p0 / c.omega_max, init.p1, init.p2 / c.delta_max};
    auto f = [&](const std::vector<double>& u) { return problem.cost(to_params(u)); };
    OptimizeResult r = minimize_fd(f, u0, box, cfg, problem.sim().threads);
    return {to_params(r.x_best), std::move(r.trace), r.converged};
}

PulseOptimization optimize_pulse(const WeightedGraph& graph, const Layout& layout, const AdiabaticParams& init,
                                 const OptimizerConfig& cfg, const SimConfig& sim) {
    return optimize_pulse(PulseProblem(graph, layout, sim), init, cfg);
}

EmbedParams PipelineConfig::default_pipeline_embedding() {
    EmbedParams p;
    p.model = ForceModel::rydberg;
    p.k_scale = 9.0;
    return p;
}

OptimizerConfig PipelineConfig::default_pulse_optimizer() {
    OptimizerConfig c;
    c.algorithm = Algorithm::nadam;
    c.learning_rate = 0.05;
    c.max_steps = 100;
    c.gradient = GradientMethod::central_difference;
    c.fd_step = 1e-4;
    return c;
}

RunReport run_adiabatic_pipeline(const WeightedGraph& graph, const PipelineConfig& config) {
    const int n = graph.n_vertices();
    if (n > 16) {
        throw CapacityError("adiabatic pipeline limited to 16 vertices, got " + std::to_string(n));
    }
    RunReport report;
    report.oracle = brute_force_maxcut(graph);
    report.init = config.init.value_or(AdiabaticParams::defaults(config.sim.constants));

    PulseSchedule default_pulse =
        adiabatic_schedule(report.init, config.t_max, config.knots, config.sim.constants);
    EmbedParams embed = config.embed;
    embed.seed = config.seed;
    RegisterSelection sel =
        select_register(graph, config.registers, default_pulse, embed, config.sim, config.k_scales);
    report.register_costs = sel.costs;
    report.best_register = sel.best_index;
    report.layout_seed = sel.seeds.at(sel.best_index);
    report.layout_k_scale = sel.k_scales.at(sel.best_index);
    report.layout = sel.best;

    PulseProblem problem(graph, report.layout, config.sim, config.t_max, config.knots);
    PulseOptimization opt = optimize_pulse(problem, report.init, config.optimizer);
    report.params = opt.best;
    report.cost_trace = std::move(opt.trace);

    auto projected = project_to_hardware(
        adiabatic_schedule(report.params, config.t_max, config.knots, config.sim.constants), config.sim.constants);
    report.schedule = projected.schedule;
    report.clamped = projected.clamped;

    RydbergSystem system(report.layout, config.sim.constants);
    StateVector state(n);
    system.evolve(state, report.schedule, config.dt_final, 0.0, config.t_max);
    report.final_cost = expectation_cost(state, graph);
    report.distribution = probabilities(state);
    report.p_gs = ground_state_probability(report.distribution, report.oracle);
    if (report.p_gs < 1.0) {
        report.step_to_solution = step_to_solution(report.p_gs);
    }
    if (config.shots > 0) {
        report.histogram = sample(state, config.shots, config.seed, config.noise);
        report.histogram_p_gs = ground_state_probability(report.histogram->distribution(), report.oracle);
    }
    return report;
}

}  // namespace gridcut
