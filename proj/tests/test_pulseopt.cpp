#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "gridcut/error.hpp"
#include "gridcut/optim.hpp"
#include "gridcut/pulseopt.hpp"

using namespace gridcut;

namespace {

constexpr double kPi = std::numbers::pi;

Layout pair_layout(double d) { return Layout{{{0.0, 0.0}, {d, 0.0}}}; }

}  // namespace

TEST(AdiabaticAnsatz, ShapeOfTheWaveforms) {
    AdiabaticParams p{12.0, 2.0, 60.0};
    const double T = 4.0;
    EXPECT_NEAR(adiabatic_omega(p, 0.0, T), 0.0, 1e-12);
    EXPECT_NEAR(adiabatic_omega(p, T, T), 0.0, 1e-12);
    EXPECT_NEAR(adiabatic_omega(p, T / 2, T), 12.0, 1e-12);
    // [DERIVED] p1 = 2 makes Omega = p0 sin^2(pi t / T).
    EXPECT_NEAR(adiabatic_omega(p, 1.0, T), 12.0 * std::pow(std::sin(kPi / 4.0), 2), 1e-12);
    EXPECT_NEAR(adiabatic_delta(p, T / 2, T), 0.0, 1e-12);
    EXPECT_NEAR(adiabatic_delta(p, 1.0, T), -adiabatic_delta(p, 3.0, T), 1e-12);
    EXPECT_NEAR(adiabatic_delta(p, 3.0, T), 2.0 / kPi * 60.0 * std::atan(2.0), 1e-12);
}

TEST(AdiabaticAnsatz, DefaultsAreHardwareLegal) {
    auto p = AdiabaticParams::defaults();
    PhysicsConstants c;
    EXPECT_DOUBLE_EQ(p.p0, 0.8 * c.omega_max);
    EXPECT_DOUBLE_EQ(p.p2, 0.5 * c.delta_max);
    auto s = adiabatic_schedule(p);
    EXPECT_EQ(s.omega.knots().size(), static_cast<std::size_t>(kDefaultKnots));
    EXPECT_DOUBLE_EQ(s.t_max, kDefaultTmax);
    EXPECT_NO_THROW(s.validate(c, true));
}

TEST(AdiabaticAnsatz, RejectsOutOfBoundParameters) {
    EXPECT_THROW(adiabatic_schedule({20.0, 2.0, 10.0}), ValidationError);
    EXPECT_THROW(adiabatic_schedule({10.0, -1.0, 10.0}), ValidationError);
    EXPECT_THROW(adiabatic_schedule({10.0, 2.0, 200.0}), ValidationError);
    EXPECT_THROW(adiabatic_schedule({10.0, 2.0, 10.0}, 4.0, 1), InputError);
}

TEST(ProjectToHardware, ClampsAndReports) {
    auto s = adiabatic_schedule(AdiabaticParams::defaults());
    auto same = project_to_hardware(s);
    EXPECT_FALSE(same.clamped);
    s.omega.mutable_knots()[50].second = 30.0;
    s.delta_global.mutable_knots()[0].second = -400.0;
    auto fixed = project_to_hardware(s);
    EXPECT_TRUE(fixed.clamped);
    EXPECT_DOUBLE_EQ(fixed.schedule.omega.knots()[50].second, PhysicsConstants{}.omega_max);
    EXPECT_DOUBLE_EQ(fixed.schedule.delta_global.knots()[0].second, -PhysicsConstants{}.delta_max);
    EXPECT_NO_THROW(fixed.schedule.validate({}, true));
}

TEST(PulseProblem, CostIsExpectedIsingEnergyOfTheFinalState) {
    WeightedGraph g(2, {{0, 1, 1.0}});
    SimConfig sim;
    sim.dt = 1e-2;
    PulseProblem prob(g, pair_layout(8.0), sim);
    auto p = AdiabaticParams::defaults();
    auto st = prob.final_state(p, sim.dt);
    EXPECT_NEAR(prob.cost(p), expectation_cost(st, g), 1e-12);
    EXPECT_NEAR(pulse_objective(g, pair_layout(8.0), p, sim), prob.cost(p), 1e-12);
    EXPECT_GE(prob.cost(p), -1.0 - 1e-12);
    EXPECT_LE(prob.cost(p), 1.0 + 1e-12);
}

TEST(OptimizePulse, NeverReturnsWorseThanTheStart) {
    WeightedGraph g(3, {{0, 1, 1.0}, {1, 2, 0.6}});
    SimConfig sim;
    sim.dt = 1e-2;
    PulseProblem prob(g, Layout{{{0, 0}, {7, 0}, {14, 0}}}, sim);
    auto init = AdiabaticParams::defaults();
    OptimizerConfig cfg = PipelineConfig::default_pulse_optimizer();
    cfg.max_steps = 5;
    auto r = optimize_pulse(prob, init, cfg);
    ASSERT_FALSE(r.trace.empty());
    EXPECT_LE(prob.cost(r.best), prob.cost(init) + 1e-12);
    EXPECT_NO_THROW(r.best.validate({}));
}

TEST(Pipeline, SmallRunIsConsistentAndReproducible) {
    WeightedGraph g(3, {{0, 1, 1.0}, {1, 2, 0.6}});
    PipelineConfig cfg;
    cfg.registers = 3;
    cfg.optimizer.max_steps = 3;
    cfg.sim.dt = 1e-2;
    cfg.dt_final = 1e-3;
    cfg.shots = 200;
    cfg.seed = 5;
    auto a = run_adiabatic_pipeline(g, cfg);
    EXPECT_EQ(a.register_costs.size(), 3u);
    EXPECT_NEAR(a.distribution.total(), 1.0, 1e-9);
    EXPECT_NEAR(a.p_gs, ground_state_probability(a.distribution, a.oracle), 1e-15);
    ASSERT_TRUE(a.histogram);
    EXPECT_EQ(a.histogram->shots, 200u);
    if (a.p_gs < 1.0) {
        ASSERT_TRUE(a.step_to_solution);
        EXPECT_NEAR(*a.step_to_solution, step_to_solution(a.p_gs), 1e-12);
    }
    EXPECT_NO_THROW(a.schedule.validate({}, true));
    auto b = run_adiabatic_pipeline(g, cfg);
    EXPECT_EQ(a.p_gs, b.p_gs);
    EXPECT_EQ(a.histogram->counts, b.histogram->counts);
    EXPECT_EQ(a.layout, b.layout);
}

TEST(Pipeline, RefusesLargeGraphs) {
    EXPECT_THROW(run_adiabatic_pipeline(WeightedGraph(17, {}), PipelineConfig{}), CapacityError);
}

// ---------------------------------------------------------------------------
// Optimizer

TEST(Optimizer, AdamAndNadamSolveAQuadratic) {
    for (auto alg : {Algorithm::adam, Algorithm::nadam}) {
        OptimizerConfig cfg;
        cfg.algorithm = alg;
        cfg.learning_rate = 0.1;
        cfg.max_steps = 500;
        Box box{{-5, -5}, {5, 5}};
        auto f = [](const std::vector<double>& x) {
            return Objective{std::pow(x[0] - 1.0, 2) + 2.0 * std::pow(x[1] + 0.5, 2),
                             {2.0 * (x[0] - 1.0), 4.0 * (x[1] + 0.5)}};
        };
        auto r = minimize(f, {3.0, 3.0}, box, cfg);
        EXPECT_NEAR(r.x_best[0], 1.0, 1e-2) << to_string(alg);
        EXPECT_NEAR(r.x_best[1], -0.5, 1e-2) << to_string(alg);
    }
}

TEST(Optimizer, ProjectionKeepsIteratesInTheBox) {
    OptimizerConfig cfg;
    cfg.learning_rate = 0.5;
    cfg.max_steps = 50;
    Box box{{0.0}, {1.0}};
    auto r = minimize_fd([](const std::vector<double>& x) { return -x[0]; }, {0.5}, box, cfg);
    EXPECT_DOUBLE_EQ(r.x_best[0], 1.0);
}

TEST(Optimizer, FiniteDifferenceMatchesAnalyticGradient) {
    auto f = [](const std::vector<double>& x) { return std::sin(x[0]) * std::exp(x[1]); };
    Box box{{-10, -10}, {10, 10}};
    std::vector<double> x{0.3, -0.2};
    auto g = finite_difference_gradient(f, x, f(x), 1e-5, box, 2);
    EXPECT_NEAR(g[0], std::cos(0.3) * std::exp(-0.2), 1e-8);
    EXPECT_NEAR(g[1], std::sin(0.3) * std::exp(-0.2), 1e-8);
    // At the upper bound the stencil turns one-sided and stays feasible.
    std::vector<double> edge{10.0, 0.0};
    auto h = finite_difference_gradient(
        [](const std::vector<double>& y) {
            if (y[0] > 10.0) {
                throw std::runtime_error("left the box");
            }
            return y[0] * y[0];
        },
        edge, 100.0, 1e-6, box);
    EXPECT_NEAR(h[0], 20.0, 1e-3);
}

TEST(Optimizer, NonFiniteObjectiveThrows) {
    OptimizerConfig cfg;
    Box box{{-1}, {1}};
    EXPECT_THROW(minimize_fd([](const std::vector<double>&) { return std::numeric_limits<double>::quiet_NaN(); },
                             {0.0}, box, cfg),
                 NumericalError);
}

TEST(Optimizer, ConfigValidation) {
    OptimizerConfig cfg;
    cfg.learning_rate = -1.0;
    EXPECT_THROW(cfg.validate(), InputError);
    EXPECT_EQ(algorithm_from_string("nadam"), Algorithm::nadam);
    EXPECT_EQ(gradient_from_string("adjoint"), GradientMethod::adjoint);
    EXPECT_THROW(algorithm_from_string("sgd"), InputError);
}
