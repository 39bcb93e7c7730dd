#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "gridcut/error.hpp"
#include "gridcut/rydsim.hpp"

using namespace gridcut;

namespace {

constexpr double kPi = std::numbers::pi;

Layout line(int n, double spacing) {
    Layout l;
    for (int i = 0; i < n; ++i) {
        l.positions.push_back({spacing * i, 0.0});
    }
    return l;
}

PulseSchedule constant_schedule(double omega, double delta, double t_max, double phi = 0.0) {
    PulseSchedule s;
    s.t_max = t_max;
    s.omega = PiecewiseLinear::constant(omega, 0.0, t_max);
    s.delta_global = PiecewiseLinear::constant(delta, 0.0, t_max);
    s.phi = PiecewiseConstant({{0.0, phi}});
    return s;
}

// A smooth, non-commuting two-atom schedule.
PulseSchedule smooth_schedule(double t_max) {
    PulseSchedule s;
    s.t_max = t_max;
    std::vector<std::pair<double, double>> om;
    std::vector<std::pair<double, double>> de;
    for (int k = 0; k <= 400; ++k) {
        const double t = t_max * k / 400.0;
        om.push_back({t, 6.0 * std::sin(kPi * t / t_max)});
        de.push_back({t, -10.0 + 20.0 * t / t_max});
    }
    s.omega = PiecewiseLinear(om);
    s.delta_global = PiecewiseLinear(de);
    return s;
}

double diff_norm(const StateVector& a, const StateVector& b) {
    double s = 0.0;
    for (std::size_t z = 0; z < a.dim(); ++z) {
        s += std::norm(a[z] - b[z]);
    }
    return std::sqrt(s);
}

// Independent dense Hamiltonian for a small register, built entry by entry
// from the operator definition.
std::vector<Complex> dense_hamiltonian(const Layout& layout, double omega, double phi, double delta,
                                       const std::vector<double>& local, const PhysicsConstants& c) {
    const int n = layout.size();
    const std::size_t dim = std::size_t{1} << n;
    std::vector<Complex> h(dim * dim);
    for (std::size_t z = 0; z < dim; ++z) {
        double diag = 0.0;
        for (int i = 0; i < n; ++i) {
            const double zi = (z >> i & 1) ? -1.0 : 1.0;
            diag += 0.5 * (delta + (local.empty() ? 0.0 : local[i])) * zi;
            for (int j = i + 1; j < n; ++j) {
                const double zj = (z >> j & 1) ? -1.0 : 1.0;
                diag += c.c6 / 4.0 * (zi - 1.0) * (zj - 1.0) /
                        std::pow(distance(layout.positions[i], layout.positions[j]), 6);
            }
        }
        h[z * dim + z] = diag;
        for (int i = 0; i < n; ++i) {
            const std::size_t w = z ^ (std::size_t{1} << i);
            // <w| (X cos phi - Y sin phi) |z>: Y|0> = i|1>, Y|1> = -i|0>.
            const Complex y = (z >> i & 1) ? Complex(0, -1) : Complex(0, 1);
            h[w * dim + z] += 0.5 * omega * (std::cos(phi) - y * std::sin(phi));
        }
    }
    return h;
}

}  // namespace

TEST(Units, MegahertzConversion) {
    EXPECT_DOUBLE_EQ(mhz_to_rad_per_us(1.0), 2.0 * kPi);
    EXPECT_DOUBLE_EQ(rad_per_us_to_mhz(mhz_to_rad_per_us(2.51)), 2.51);
    // [PAPER] C6 = 2 pi x 862690 MHz um^6.
    EXPECT_NEAR(PhysicsConstants{}.c6, 2.0 * kPi * 862690.0, 1.0);
}

TEST(Layout, Validation) {
    LayoutConstraints box;
    EXPECT_NO_THROW(line(3, 5.0).validate(box));
    EXPECT_THROW(line(3, 3.0).validate(box), ValidationError);
    EXPECT_THROW(line(20, 5.0).validate(box), ValidationError);
    Layout neg{{{-1.0, 0.0}, {10.0, 0.0}}};
    EXPECT_THROW(neg.validate(box), ValidationError);
    EXPECT_DOUBLE_EQ(line(3, 7.0).min_distance(), 7.0);
}

TEST(InteractionWeights, VanDerWaalsQuarter) {
    PhysicsConstants c;
    auto w = interaction_weights(line(3, 10.0), c);
    EXPECT_NEAR(w(0, 1), c.c6 / 4.0 / 1e6, 1e-12);
    EXPECT_NEAR(w(0, 2), c.c6 / 4.0 / 64e6, 1e-12);
    EXPECT_DOUBLE_EQ(w(1, 1), 0.0);
    EXPECT_THROW(interaction_weights(Layout{{{1, 1}, {1, 1}}}, c), DomainError);
}

TEST(Waveforms, LinearAndConstantInterpolation) {
    PiecewiseLinear f({{0.0, 0.0}, {1.0, 2.0}, {3.0, 2.0}});
    EXPECT_DOUBLE_EQ(f(0.25), 0.5);
    EXPECT_DOUBLE_EQ(f(2.0), 2.0);
    EXPECT_THROW(f(3.5), InputError);
    EXPECT_THROW(PiecewiseLinear({{1.0, 0.0}, {1.0, 1.0}}), InputError);
    PiecewiseConstant g({{0.0, 1.0}, {2.0, -1.0}});
    EXPECT_DOUBLE_EQ(g(1.999), 1.0);
    EXPECT_DOUBLE_EQ(g(2.0), -1.0);
    EXPECT_DOUBLE_EQ(PiecewiseConstant()(5.0), 0.0);
}

TEST(PulseSchedule, HardwareLegality) {
    PhysicsConstants c;
    auto s = constant_schedule(1.0, 0.0, 1.0);
    EXPECT_NO_THROW(s.validate(c, false));
    EXPECT_THROW(s.validate(c, true), ValidationError);  // amplitude not zero at the ends
    s.omega = PiecewiseLinear({{0.0, 0.0}, {0.5, 20.0}, {1.0, 0.0}});
    EXPECT_THROW(s.validate(c, true), ValidationError);  // above omega_max
    s.omega = PiecewiseLinear({{0.0, 0.0}, {0.5, 10.0}, {1.0, 0.0}});
    EXPECT_NO_THROW(s.validate(c, true));
}

TEST(StateVector, BasicsAndErrors) {
    StateVector s(3);
    EXPECT_DOUBLE_EQ(s.norm(), 1.0);
    EXPECT_EQ(s[0], Complex(1.0, 0.0));
    auto p = StateVector::plus(3);
    EXPECT_NEAR(std::abs(p.inner(s)), 1.0 / std::sqrt(8.0), 1e-15);
    EXPECT_THROW(StateVector(kMaxSimQubits + 1), CapacityError);
    EXPECT_THROW(StateVector::basis(2, 4), InputError);
}

TEST(Evolution, SingleAtomRabiPiPulse) {
    StateVector s(1);
    evolve(s, line(1, 0.0), constant_schedule(kPi, 0.0, 1.0), 1e-4, 0.0, 1.0);
    EXPECT_LT(std::abs(std::norm(s[1]) - 1.0), 1e-6);
}

TEST(Evolution, DetunedRabiFormula) {
    // [DERIVED] P1 = W^2/(W^2 + D^2) sin^2(sqrt(W^2 + D^2) t / 2).
    const double om = 4.0, de = 3.0, t = 0.8;
    StateVector s(1);
    evolve(s, line(1, 0.0), constant_schedule(om, de, t), 1e-4, 0.0, t);
    const double gen = std::hypot(om, de);
    const double expected = om * om / (gen * gen) * std::pow(std::sin(gen * t / 2.0), 2);
    EXPECT_NEAR(std::norm(s[1]), expected, 1e-7);
}

TEST(Evolution, BlockadeSuppressesDoubleExcitation) {
    StateVector s(2);
    evolve(s, line(2, 4.0), constant_schedule(2.0, 0.0, 1.0), 1e-4, 0.0, 1.0);
    EXPECT_LT(std::norm(s[3]), 1e-3);
    // [DERIVED] blockaded pair: collective Rabi frequency sqrt(2) Omega.
    const double single = std::norm(s[1]) + std::norm(s[2]);
    EXPECT_NEAR(single, std::pow(std::sin(std::sqrt(2.0) * 2.0 * 1.0 / 2.0), 2), 2e-3);
}

TEST(Evolution, FarApartAtomsAreIndependent) {
    StateVector s(2);
    evolve(s, line(2, 60.0), constant_schedule(kPi, 0.0, 0.5), 1e-4, 0.0, 0.5);
    // Each atom gets a pi/2 pulse, so every basis state holds 1/4.
    for (std::size_t z = 0; z < 4; ++z) {
        EXPECT_NEAR(std::norm(s[z]), 0.25, 1e-6);
    }
}

TEST(Evolution, SecondOrderConvergence) {
    const auto sched = smooth_schedule(1.0);
    const Layout l = line(2, 7.0);
    auto run = [&](double dt) {
        StateVector s(2);
        evolve(s, l, sched, dt, 0.0, 1.0);
        return s;
    };
    const double dt = 0.02;
    const auto ref = run(dt / 16);
    const double e1 = diff_norm(run(dt), ref);
    const double e2 = diff_norm(run(dt / 2), ref);
    EXPECT_GE(e1 / e2, 3.5);
    EXPECT_LE(e1 / e2, 4.5);
}

TEST(Evolution, PreservesNorm) {
    StateVector s(3);
    evolve(s, line(3, 6.0), smooth_schedule(2.0), 1e-2, 0.0, 2.0);
    EXPECT_NEAR(s.norm(), 1.0, 1e-12);
}

TEST(Evolution, RejectsBadIntervals) {
    StateVector s(1);
    auto sched = constant_schedule(1.0, 0.0, 1.0);
    EXPECT_THROW(evolve(s, line(1, 0.0), sched, 1e-3, 0.0, 2.0), InputError);
    EXPECT_THROW(evolve(s, line(1, 0.0), sched, -1e-3, 0.0, 1.0), InputError);
    StateVector wrong(2);
    EXPECT_THROW(evolve(wrong, line(1, 0.0), sched, 1e-3, 0.0, 1.0), InputError);
}

TEST(RydbergSystem, HamiltonianMatchesDenseConstruction) {
    PhysicsConstants c;
    Layout l{{{0.0, 0.0}, {7.0, 1.0}, {3.0, 8.0}}};
    std::vector<double> local{0.3, -1.2, 2.0};
    RydbergSystem sys(l, c, local);
    const double om = 3.1, phi = 0.7, de = -4.0;
    auto h = dense_hamiltonian(l, om, phi, de, local, c);
    StateVector in(3);
    for (std::size_t z = 0; z < 8; ++z) {
        in[z] = Complex(std::cos(1.3 * z), std::sin(0.4 * z + 0.1));
    }
    StateVector out(3);
    sys.apply_hamiltonian(in, out, om, phi, de);
    for (std::size_t r = 0; r < 8; ++r) {
        Complex acc = 0.0;
        for (std::size_t k = 0; k < 8; ++k) {
            acc += h[r * 8 + k] * in[k];
        }
        EXPECT_NEAR(std::abs(acc - out[r]), 0.0, 1e-9 * std::abs(acc) + 1e-9);
    }
}

TEST(RydbergSystem, DiagonalEnergyOccupationForm) {
    PhysicsConstants c;
    Layout l = line(3, 8.0);
    RydbergSystem sys(l, c);
    const double de = 5.0;
    auto e = sys.diagonal_energy(de);
    auto w = interaction_weights(l, c);
    for (Bits z = 0; z < 8; ++z) {
        // [DERIVED] E(z) - E(0) = -Delta |z| + sum_{i<j} 4 w_ij n_i n_j.
        double expected = -de * std::popcount(z);
        for (int i = 0; i < 3; ++i) {
            for (int j = i + 1; j < 3; ++j) {
                if ((z >> i & 1) && (z >> j & 1)) {
                    expected += 4.0 * w(i, j);
                }
            }
        }
        EXPECT_NEAR(e[z] - e[0], expected, 1e-9 * std::abs(expected) + 1e-9);
    }
}

TEST(RydbergSystem, ChebyshevMatchesFineStrang) {
    Layout l{{{0.0, 0.0}, {6.0, 0.0}, {3.0, 5.0}}};
    RydbergSystem sys(l, {});
    StateVector a = StateVector::plus(3);
    StateVector b = a;
    const double om = 5.0, phi = 0.4, de = 2.0, t = 0.6;
    sys.evolve_constant(a, om, phi, de, t);
    sys.evolve(b, constant_schedule(om, de, t, phi), 2e-5, 0.0, t);
    EXPECT_LT(diff_norm(a, b), 1e-6);
}

TEST(RydbergSystem, NegativeDurationInverts) {
    RydbergSystem sys(line(3, 7.0), {});
    StateVector s = StateVector::plus(3);
    s[5] *= Complex(0.0, 1.0);
    const StateVector start = s;
    sys.evolve_constant(s, 3.0, 1.1, -2.0, 1.7);
    EXPECT_GT(diff_norm(s, start), 0.1);
    sys.evolve_constant(s, 3.0, 1.1, -2.0, -1.7);
    EXPECT_LT(diff_norm(s, start), 1e-11);
}

TEST(RydbergSystem, RejectsMismatchedLocalDetuning) {
    EXPECT_THROW(RydbergSystem(line(3, 7.0), {}, std::vector<double>{1.0}), InputError);
}

TEST(Mixer, MatchesSingleQubitRotation) {
    StateVector s(1);
    apply_x_mixer(s, 0.9);
    EXPECT_NEAR(s[0].real(), std::cos(0.45), 1e-15);
    EXPECT_NEAR(s[1].imag(), -std::sin(0.45), 1e-15);
    StateVector p = StateVector::plus(4);
    apply_x_mixer(p, 1.3);  // |+> is an X eigenstate: global phase only
    EXPECT_NEAR(std::abs(p.inner(StateVector::plus(4))), 1.0, 1e-14);
}

TEST(Diagonal, SingleZCoefficientsRecoverLinearTerms) {
    const int n = 3;
    const std::vector<double> h{0.5, -1.0, 2.0};
    std::vector<double> diag(8);
    for (Bits z = 0; z < 8; ++z) {
        double v = 1.7;  // constant
        for (int i = 0; i < n; ++i) {
            v += h[i] * ((z >> i & 1) ? -1.0 : 1.0);
        }
        v += 0.8 * ((z & 1) ? -1.0 : 1.0) * ((z & 2) ? -1.0 : 1.0);  // ZZ term
        diag[z] = v;
    }
    auto c = single_z_coefficients(diag, n);
    for (int i = 0; i < n; ++i) {
        EXPECT_NEAR(c[i], h[i], 1e-14);
    }
}

TEST(Diagonal, EvolutionAndExpectation) {
    StateVector s = StateVector::plus(2);
    std::vector<double> d{1.0, -1.0, 0.5, 2.0};
    EXPECT_NEAR(expectation_diagonal(s, d), 0.625, 1e-15);
    apply_diagonal_evolution(s, d, 0.3);
    EXPECT_NEAR(std::arg(s[1] / s[0]), 0.6, 1e-14);
    EXPECT_NEAR(expectation_diagonal(s, d), 0.625, 1e-15);
}

TEST(Sampling, SeededAndComplete) {
    StateVector s = StateVector::plus(3);
    auto a = sample(s, 1000, 42);
    auto b = sample(s, 1000, 42);
    EXPECT_EQ(a.counts, b.counts);
    std::uint64_t total = 0;
    for (const auto& [z, c] : a.counts) {
        total += c;
    }
    EXPECT_EQ(total, 1000u);
    EXPECT_THROW(sample(s, 0, 1), InputError);
}

TEST(Sampling, CertainFlipNoise) {
    StateVector s(3);
    auto h = sample(s, 50, 1, MeasurementNoise{1.0, 0.0});
    ASSERT_EQ(h.counts.size(), 1u);
    EXPECT_EQ(h.counts.begin()->first, 0b111u);
    EXPECT_THROW(sample(s, 5, 1, MeasurementNoise{1.5, 0.0}), InputError);
}

TEST(CostTable, AgreesWithCostValue) {
    WeightedGraph g(3, {{0, 1, 1.0}, {1, 2, 0.5}});
    auto t = cost_table(g);
    for (Bits z = 0; z < 8; ++z) {
        EXPECT_DOUBLE_EQ(t[z], cost_value_bits(g, z));
    }
    EXPECT_NEAR(expectation_cost(StateVector::plus(3), g), 0.0, 1e-15);
}
