#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "gridcut/graph.hpp"
#include "gridcut/rydsim.hpp"

namespace gridcut {

enum class ForceModel {
    classic,  // repulsion -k^2/d, attraction d^2/k
    rydberg,  // repulsion -k^6/d^6 with pair-dependent k from triangle structure
};

struct EmbedParams {
    LayoutConstraints box;              // bounding box and minimum spacing
    int iterations = 300;
    double initial_temperature = 7.5;   // um, largest per-step displacement
    double rho = 0.5;                   // clique exponent
    std::optional<double> k_scale;      // um; defaults to sqrt(area / n)
    ForceModel model = ForceModel::rydberg;
    std::uint64_t seed = 0;

    double resolved_k_scale(int n_vertices) const;
    void validate() const;
};

struct ForcePair {
    double repulsive = 0.0;  // negative: pushes apart
    double attractive = 0.0;
};

// Force magnitudes at separation d. d <= 0 is clamped to `d_floor`.
ForcePair fr_forces(double d, double k, ForceModel model, double d_floor = 0.4);

// k_ij = k_scale * (T_ij / N_tri)^rho where T_ij counts triangles holding both
// i and j. Pairs in no triangle, and every pair of a triangle-free graph, get
// k_scale.
SymMatrix clique_coupling(const WeightedGraph& graph, double rho, double k_scale);

struct LayoutTrace {
    std::vector<double> temperature;       // cap applied at each iteration
    std::vector<double> max_displacement;  // largest move actually made
};

// Force-directed relaxation followed by clamping into the box and a spacing
// repair pass. Throws CapacityError when min_spacing cannot be met.
Layout fr_layout(const WeightedGraph& graph, const EmbedParams& params, LayoutTrace* trace = nullptr);

// Pushes violating pairs apart (<= 100 passes) and clamps into the box.
void repair_spacing(Layout& layout, const LayoutConstraints& box);

struct RegisterSelection {
    std::size_t best_index = 0;
    Layout best;
    std::vector<Layout> layouts;
    std::vector<double> costs;  // expected cost after the default pulse
    std::vector<std::uint64_t> seeds;
    std::vector<double> k_scales;  // resolved k_scale of each layout
};

// Evaluates n_layouts seeded layouts under `pulse` and keeps the one with the
// lowest expected cost (ties go to the lowest index). Layout i uses seed
// params.seed + i and, when `k_scales` is non-empty, k_scales[i % size].
RegisterSelection select_register(const WeightedGraph& graph, int n_layouts, const PulseSchedule& pulse,
                                  const EmbedParams& params, const SimConfig& sim,
                                  const std::vector<double>& k_scales = {});

// The n_layouts candidate layouts used by select_register, without simulating.
std::vector<Layout> candidate_layouts(const WeightedGraph& graph, int n_layouts, const EmbedParams& params,
                                      const std::vector<double>& k_scales = {}, int threads = 1);

// Same, over caller-provided layouts.
RegisterSelection select_register(const WeightedGraph& graph, std::vector<Layout> layouts,
                                  const PulseSchedule& pulse, const SimConfig& sim);

}  // namespace gridcut
