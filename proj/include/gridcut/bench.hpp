#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gridcut/graph.hpp"
#include "gridcut/rydsim.hpp"

namespace gridcut {

struct FidelityTrace {
    std::vector<double> cycle_times;  // us
    std::vector<double> fidelity;
    std::vector<double> p_initial;    // mass on |0...0>
    std::vector<double> p_ground;     // mass on maximum cuts

    std::size_t size() const { return cycle_times.size(); }
    // Throws ValidationError on ragged columns or probabilities outside [0, 1].
    void validate() const;
};

// F = 2 sum_z p0(z) p(z) / sum_z p0(z)^2 - 1. Inputs need not be normalized
// the same way; they are used as given. Throws DomainError if p0 is all zero
// and InputError if the bit widths differ.
double fidelity_estimate(const Distribution& p0, const Distribution& p);
double fidelity_estimate(std::span<const double> p0, std::span<const double> p);

// Exact readout channel: independent flips 0->1 with p01 and 1->0 with p10.
std::vector<double> apply_readout_noise(std::span<const double> probs, int n_bits, const MeasurementNoise& noise);

struct BenchConfig {
    int cycles = 16;
    double t_cycle = 0.25;         // us
    std::uint64_t shots = 0;       // 0: use the exact (optionally noisy) distribution
    std::uint64_t reference_shots = 0;  // 0: exact reference distribution
    std::uint64_t seed = 0;
    std::optional<MeasurementNoise> noise;
    bool incremental = false;      // carry the state across cycles instead of re-evolving

    void validate(double t_max) const;
};

// For k = 1..cycles evolves |0...0> to k * t_cycle under `schedule`, compares
// the reference distribution p0 with the measured one p, and records F,
// P(initial) and P(GS) of p. Cycle k samples with seed + 2k (reference:
// seed + 2k + 1), so traces are reproducible and independent of threading.
FidelityTrace fidelity_benchmark(const WeightedGraph& graph, const Layout& layout, const PulseSchedule& schedule,
                                 const BenchConfig& cfg, const SimConfig& sim = {});

}  // namespace gridcut
