#include "gridcut/bench.hpp"

#include <cmath>

#include "gridcut/error.hpp"
#include "gridcut/parallel.hpp"

namespace gridcut {

void FidelityTrace::validate() const {
    const std::size_t n = cycle_times.size();
    if (fidelity.size() != n || p_initial.size() != n || p_ground.size() != n) {
        throw ValidationError("fidelity trace columns have different lengths");
    }
    for (std::size_t k = 0; k < n; ++k) {
        for (double p : {p_initial[k], p_ground[k]}) {
            if (!(p >= -1e-12 && p <= 1.0 + 1e-12)) {
                throw ValidationError("probability outside [0, 1] at cycle " + std::to_string(k + 1));
            }
        }
    }
}

double fidelity_estimate(std::span<const double> p0, std::span<const double> p) {
    if (p0.size() != p.size()) {
        throw InputError("distributions cover different bitstring spaces");
    }
    double cross = 0.0;
    double self = 0.0;
    for (std::size_t z = 0; z < p0.size(); ++z) {
        cross += p0[z] * p[z];
        self += p0[z] * p0[z];
    }
    if (!(self > 0.0)) {
        throw DomainError("reference distribution is identically zero");
    }
    return 2.0 * cross / self - 1.0;
}

double fidelity_estimate(const Distribution& p0, const Distribution& p) {
    if (p0.n_bits != p.n_bits) {
        throw InputError("distributions cover different bitstring spaces");
    }
    double cross = 0.0;
    double self = 0.0;
    for (const auto& [z, m] : p0.mass) {
        cross += m * p.at(z);
        self += m * m;
    }
    if (!(self > 0.0)) {
        throw DomainError("reference distribution is identically zero");
    }
    return 2.0 * cross / self - 1.0;
}

std::vector<double> apply_readout_noise(std::span<const double> probs, int n_bits, const MeasurementNoise& noise) {
    if (probs.size() != (std::size_t{1} << n_bits)) {
        throw InputError("probability vector has wrong length");
    }
    if (noise.p01 < 0.0 || noise.p01 > 1.0 || noise.p10 < 0.0 || noise.p10 > 1.0) {
        throw InputError("flip probabilities must lie in [0, 1]");
    }
    std::vector<double> out(probs.begin(), probs.end());
    for (int q = 0; q < n_bits; ++q) {
        const std::size_t bit = std::size_t{1} << q;
        for (std::size_t z = 0; z < out.size(); ++z) {
            if (z & bit) {
                continue;
            }
            const double a = out[z];        // bit q reads 0
            const double b = out[z | bit];  // bit q reads 1
            out[z] = a * (1.0 - noise.p01) + b * noise.p10;
            out[z | bit] = a * noise.p01 + b * (1.0 - noise.p10);
        }
    }
    return out;
}

void BenchConfig::validate(double t_max) const {
    if (cycles < 1) {
        throw InputError("need at least one cycle");
    }
    if (!(t_cycle > 0.0) || !std::isfinite(t_cycle)) {
        throw InputError("cycle time must be positive");
    }
    if (cycles * t_cycle > t_max + 1e-9) {
        throw InputError("cycles * t_cycle = " + std::to_string(cycles * t_cycle) + " us exceeds t_max = " +
                         std::to_string(t_max) + " us");
    }
}

namespace {

struct CycleRecord {
    double fidelity = 0.0;
    double p_initial = 0.0;
    double p_ground = 0.0;
};

CycleRecord measure_cycle(const StateVector& state, int k, const OracleResult& oracle, const BenchConfig& cfg) {
    const int n = state.n_qubits();
    const auto exact = state.probabilities_dense();

    std::vector<double> p0 = exact;
    if (cfg.reference_shots > 0) {
        auto h = sample_distribution(exact, n, cfg.reference_shots, cfg.seed + 2 * k + 1);
        p0.assign(exact.size(), 0.0);
        for (const auto& [z, c] : h.counts) {
            p0[z] = static_cast<double>(c) / static_cast<double>(cfg.reference_shots);
        }
    }

    std::vector<double> p;
    if (cfg.shots > 0) {
        auto h = sample_distribution(exact, n, cfg.shots, cfg.seed + 2 * k, cfg.noise);
        p.assign(exact.size(), 0.0);
        for (const auto& [z, c] : h.counts) {
            p[z] = static_cast<double>(c) / static_cast<double>(cfg.shots);
        }
    } else if (cfg.noise) {
        p = apply_readout_noise(exact, n, *cfg.noise);
    } else {
        p = exact;
    }

    CycleRecord r;
    r.fidelity = fidelity_estimate(p0, p);
    r.p_initial = p[0];
    for (Bits z : oracle.optimal_assignments) {
        r.p_ground += p[z];
    }
    return r;
}

}  // namespace

FidelityTrace fidelity_benchmark(const WeightedGraph& graph, const Layout& layout, const PulseSchedule& schedule,
                                 const BenchConfig& cfg, const SimConfig& sim) {
    cfg.validate(schedule.t_max);
    if (layout.size() != graph.n_vertices()) {
        throw InputError("layout has " + std::to_string(layout.size()) + " atoms for a graph with " +
                         std::to_string(graph.n_vertices()) + " vertices");
    }
    const OracleResult oracle = brute_force_maxcut(graph);
    const RydbergSystem system(layout, sim.constants, schedule.local_detuning);
    std::vector<CycleRecord> records(cfg.cycles);

    // Both paths step over identical per-cycle segments, so they agree to
    // rounding; the reference path simply redoes the earlier segments.
    if (cfg.incremental) {
        StateVector state(layout.size());
        for (int k = 1; k <= cfg.cycles; ++k) {
            system.evolve(state, schedule, sim.dt, (k - 1) * cfg.t_cycle, k * cfg.t_cycle);
            records[k - 1] = measure_cycle(state, k, oracle, cfg);
        }
    } else {
        parallel_for(static_cast<std::size_t>(cfg.cycles), sim.threads, [&](std::size_t idx) {
            const int k = static_cast<int>(idx) + 1;
            StateVector state(layout.size());
            for (int j = 0; j < k; ++j) {
                system.evolve(state, schedule, sim.dt, j * cfg.t_cycle, (j + 1) * cfg.t_cycle);
            }
            records[idx] = measure_cycle(state, k, oracle, cfg);
        });
    }

    FidelityTrace trace;
    for (int k = 1; k <= cfg.cycles; ++k) {
        const auto& r = records[k - 1];
        trace.cycle_times.push_back(k * cfg.t_cycle);
        trace.fidelity.push_back(r.fidelity);
        trace.p_initial.push_back(r.p_initial);
        trace.p_ground.push_back(r.p_ground);
    }
    return trace;
}

}  // namespace gridcut
