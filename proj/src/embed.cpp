#include "gridcut/embed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "gridcut/error.hpp"
#include "gridcut/parallel.hpp"

namespace gridcut {

double EmbedParams::resolved_k_scale(int n_vertices) const {
    if (k_scale) {
        return *k_scale;
    }
    return std::sqrt(box.box_width * box.box_height / static_cast<double>(std::max(1, n_vertices)));
}

void EmbedParams::validate() const {
    if (iterations < 1) {
        throw InputError("embedding needs at least one iteration");
    }
    if (!(box.min_spacing > 0.0)) {
        throw InputError("min_spacing must be positive");
    }
    if (box.box_width < box.min_spacing || box.box_height < box.min_spacing) {
        throw InputError("bounding box is smaller than min_spacing");
    }
    if (!(initial_temperature > 0.0)) {
        throw InputError("initial temperature must be positive");
    }
    if (!std::isfinite(rho)) {
        throw InputError("rho must be finite");
    }
    if (k_scale && !(*k_scale > 0.0)) {
        throw InputError("k_scale must be positive");
    }
}

ForcePair fr_forces(double d, double k, ForceModel model, double d_floor) {
    if (!(k > 0.0)) {
        throw InputError("optimal distance k must be positive");
    }
    d = std::max(d, d_floor);
    if (model == ForceModel::classic) {
        return {-k * k / d, d * d / k};
    }
    double r = k / d;
    double r2 = r * r;
    return {-r2 * r2 * r2, d * d / k};
}

SymMatrix clique_coupling(const WeightedGraph& graph, double rho, double k_scale) {
    if (!std::isfinite(rho)) {
        throw InputError("rho must be finite");
    }
    const int n = graph.n_vertices();
    std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
    for (const auto& e : graph.edges()) {
        adj[e.i][e.j] = adj[e.j][e.i] = true;
    }
    std::vector<int> shared(static_cast<std::size_t>(n) * n, 0);
    long triangles = 0;
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            if (!adj[a][b]) {
                continue;
            }
            for (int c = b + 1; c < n; ++c) {
                if (adj[a][c] && adj[b][c]) {
                    ++triangles;
                    ++shared[a * n + b];
                    ++shared[a * n + c];
                    ++shared[b * n + c];
                }
            }
        }
    }
    SymMatrix k(n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            int t = shared[i * n + j];
            double v = k_scale;
            if (triangles > 0 && t > 0) {
                v = k_scale * std::pow(static_cast<double>(t) / static_cast<double>(triangles), rho);
            }
            k.set(i, j, v);
        }
    }
    return k;
}

namespace {

void clamp_into(Point& p, const LayoutConstraints& box) {
    p.x = std::clamp(p.x, 0.0, box.box_width);
    p.y = std::clamp(p.y, 0.0, box.box_height);
}

// Hexagonal packing bound on how many discs of diameter min_spacing fit.
void check_capacity(int n, const LayoutConstraints& box) {
    const double s = box.min_spacing;
    const double cols = std::floor(box.box_width / s) + 1.0;
    const double rows = std::floor(box.box_height / (s * std::sqrt(3.0) / 2.0)) + 1.0;
    if (static_cast<double>(n) > cols * rows) {
        throw CapacityError("cannot place " + std::to_string(n) + " atoms " + std::to_string(s) +
                            " um apart inside the box");
    }
}

}  // namespace

void repair_spacing(Layout& layout, const LayoutConstraints& box) {
    const int n = layout.size();
    check_capacity(n, box);
    auto& pos = layout.positions;
    for (auto& p : pos) {
        clamp_into(p, box);
    }
    constexpr int max_passes = 100;
    // Overshoot slightly so a resolved pair does not sit on the boundary.
    const double target = box.min_spacing * (1.0 + 1e-6);
    for (int pass = 0; pass < max_passes; ++pass) {
        bool violated = false;
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                double dx = pos[j].x - pos[i].x;
                double dy = pos[j].y - pos[i].y;
                double d = std::hypot(dx, dy);
                if (d >= box.min_spacing) {
                    continue;
                }
                violated = true;
                if (d < 1e-12) {
                    // Deterministic direction for coincident atoms.
                    double angle = 2.0 * std::numbers::pi * ((i * 7 + j * 13) % 32) / 32.0;
                    dx = std::cos(angle);
                    dy = std::sin(angle);
                    d = 0.0;
                } else {
                    dx /= d;
                    dy /= d;
                }
                double push = 0.5 * (target - d);
                pos[i].x -= dx * push;
                pos[i].y -= dy * push;
                pos[j].x += dx * push;
                pos[j].y += dy * push;
                clamp_into(pos[i], box);
                clamp_into(pos[j], box);
            }
        }
        if (!violated) {
            return;
        }
    }
    if (layout.min_distance() < box.min_spacing - 1e-9) {
        throw CapacityError("spacing repair did not converge within 100 passes");
    }
}

Layout fr_layout(const WeightedGraph& graph, const EmbedParams& params, LayoutTrace* trace) {
    params.validate();
    const int n = graph.n_vertices();
    const auto& box = params.box;
    check_capacity(n, box);

    const double k_scale = params.resolved_k_scale(n);
    SymMatrix k = params.model == ForceModel::rydberg ? clique_coupling(graph, params.rho, k_scale)
                                                       : clique_coupling(WeightedGraph(n, {}), 0.0, k_scale);
    const double w_max = graph.max_weight();
    const double d_floor = box.min_spacing / 10.0;

    std::mt19937_64 rng(params.seed);
    std::uniform_real_distribution<double> ux(0.0, box.box_width);
    std::uniform_real_distribution<double> uy(0.0, box.box_height);
    Layout layout;
    layout.positions.resize(n);
    for (auto& p : layout.positions) {
        p.x = ux(rng);
        p.y = uy(rng);
    }
    auto& pos = layout.positions;

    std::vector<Point> disp(n);
    for (int it = 0; it < params.iterations; ++it) {
        const double temperature =
            params.initial_temperature * (1.0 - static_cast<double>(it) / params.iterations);
        std::fill(disp.begin(), disp.end(), Point{});
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                double dx = pos[i].x - pos[j].x;
                double dy = pos[i].y - pos[j].y;
                double d = std::hypot(dx, dy);
                if (d < 1e-12) {
                    // Coincident atoms separate along a fixed direction.
                    dx = 1.0;
                    dy = 0.0;
                    d = 1.0;
                }
                double ux_ = dx / d;
                double uy_ = dy / d;
                ForcePair f = fr_forces(d, k(i, j), params.model, d_floor);
                double push = -f.repulsive;
                disp[i].x += ux_ * push;
                disp[i].y += uy_ * push;
                disp[j].x -= ux_ * push;
                disp[j].y -= uy_ * push;
            }
        }
        for (const auto& e : graph.edges()) {
            double dx = pos[e.i].x - pos[e.j].x;
            double dy = pos[e.i].y - pos[e.j].y;
            double d = std::max(std::hypot(dx, dy), d_floor);
            ForcePair f = fr_forces(d, k(e.i, e.j), params.model, d_floor);
            double pull = f.attractive * (e.w / w_max);
            disp[e.i].x -= dx / d * pull;
            disp[e.i].y -= dy / d * pull;
            disp[e.j].x += dx / d * pull;
            disp[e.j].y += dy / d * pull;
        }
        double max_move = 0.0;
        for (int i = 0; i < n; ++i) {
            double len = std::hypot(disp[i].x, disp[i].y);
            if (len <= 0.0) {
                continue;
            }
            double step = std::min(len, temperature);
            Point before = pos[i];
            pos[i].x += disp[i].x / len * step;
            pos[i].y += disp[i].y / len * step;
            clamp_into(pos[i], box);
            max_move = std::max(max_move, distance(before, pos[i]));
        }
        if (trace) {
            trace->temperature.push_back(temperature);
            trace->max_displacement.push_back(max_move);
        }
    }
    repair_spacing(layout, box);
    return layout;
}

RegisterSelection select_register(const WeightedGraph& graph, std::vector<Layout> layouts,
                                  const PulseSchedule& pulse, const SimConfig& sim) {
    if (layouts.empty()) {
        throw InputError("register selection needs at least one layout");
    }
    const auto table = cost_table(graph);
    RegisterSelection sel;
    sel.costs.assign(layouts.size(), 0.0);
    parallel_for(layouts.size(), sim.threads, [&](std::size_t i) {
        if (layouts[i].size() != graph.n_vertices()) {
            throw InputError("layout size does not match graph");
        }
        RydbergSystem system(layouts[i], sim.constants);
        StateVector state(graph.n_vertices());
        system.evolve(state, pulse, sim.dt, 0.0, pulse.t_max);
        sel.costs[i] = expectation_diagonal(state, table);
    });
    sel.best_index = static_cast<std::size_t>(std::min_element(sel.costs.begin(), sel.costs.end()) - sel.costs.begin());
    sel.best = layouts[sel.best_index];
    sel.layouts = std::move(layouts);
    return sel;
}

namespace {

EmbedParams candidate_params(const EmbedParams& params, std::size_t i, const std::vector<double>& k_scales) {
    EmbedParams p = params;
    p.seed = params.seed + i;
    if (!k_scales.empty()) {
        p.k_scale = k_scales[i % k_scales.size()];
    }
    return p;
}

}  // namespace

std::vector<Layout> candidate_layouts(const WeightedGraph& graph, int n_layouts, const EmbedParams& params,
                                      const std::vector<double>& k_scales, int threads) {
    if (n_layouts < 1) {
        throw InputError("register selection needs n_layouts >= 1");
    }
    for (double k : k_scales) {
        if (!(k > 0.0) || !std::isfinite(k)) {
            throw InputError("k_scale values must be positive");
        }
    }
    std::vector<Layout> layouts(n_layouts);
    parallel_for(layouts.size(), threads,
                 [&](std::size_t i) { layouts[i] = fr_layout(graph, candidate_params(params, i, k_scales)); });
    return layouts;
}

RegisterSelection select_register(const WeightedGraph& graph, int n_layouts, const PulseSchedule& pulse,
                                  const EmbedParams& params, const SimConfig& sim,
                                  const std::vector<double>& k_scales) {
    RegisterSelection sel =
        select_register(graph, candidate_layouts(graph, n_layouts, params, k_scales, sim.threads), pulse, sim);
    for (int i = 0; i < n_layouts; ++i) {
        EmbedParams p = candidate_params(params, i, k_scales);
        sel.seeds.push_back(p.seed);
        sel.k_scales.push_back(p.resolved_k_scale(graph.n_vertices()));
    }
    return sel;
}

}  // namespace gridcut
