#include "gridcut/graph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <random>

#include "gridcut/error.hpp"

namespace gridcut {

bool operator==(const Edge& a, const Edge& b) {
    return a.i == b.i && a.j == b.j && a.w == b.w;
}

WeightedGraph::WeightedGraph(int n_vertices, std::vector<Edge> edges) : n_(n_vertices) {
    if (n_vertices < 1) {
        throw InputError("graph must have at least one vertex");
    }
    if (n_vertices > 63) {
        throw CapacityError("graphs are limited to 63 vertices");
    }
    for (auto& e : edges) {
        if (e.i == e.j) {
            throw InputError("self-loop on vertex " + std::to_string(e.i));
        }
        if (e.i > e.j) {
            std::swap(e.i, e.j);
        }
        if (e.i < 0 || e.j >= n_vertices) {
            throw InputError("edge (" + std::to_string(e.i) + ", " + std::to_string(e.j) +
                             ") out of range for " + std::to_string(n_vertices) + " vertices");
        }
        if (!std::isfinite(e.w) || e.w <= 0.0) {
            throw InputError("edge (" + std::to_string(e.i) + ", " + std::to_string(e.j) +
                             ") has non-positive or non-finite weight");
        }
    }
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
        return std::tie(a.i, a.j) < std::tie(b.i, b.j);
    });
    for (std::size_t k = 1; k < edges.size(); ++k) {
        if (edges[k].i == edges[k - 1].i && edges[k].j == edges[k - 1].j) {
            throw InputError("duplicate edge (" + std::to_string(edges[k].i) + ", " +
                             std::to_string(edges[k].j) + ")");
        }
    }
    edges_ = std::move(edges);
}

double WeightedGraph::total_weight() const {
    double total = 0.0;
    for (const auto& e : edges_) {
        total += e.w;
    }
    return total;
}

double WeightedGraph::max_weight() const {
    double m = 0.0;
    for (const auto& e : edges_) {
        m = std::max(m, e.w);
    }
    return m;
}

double WeightedGraph::weight(int a, int b) const {
    if (a > b) {
        std::swap(a, b);
    }
    for (const auto& e : edges_) {
        if (e.i == a && e.j == b) {
            return e.w;
        }
    }
    return 0.0;
}

std::vector<double> WeightedGraph::adjacency_matrix() const {
    std::vector<double> m(static_cast<std::size_t>(n_) * n_, 0.0);
    for (const auto& e : edges_) {
        m[e.i * n_ + e.j] = e.w;
        m[e.j * n_ + e.i] = e.w;
    }
    return m;
}

bool is_connected(const WeightedGraph& graph) {
    const int n = graph.n_vertices();
    std::vector<std::vector<int>> adj(n);
    for (const auto& e : graph.edges()) {
        adj[e.i].push_back(e.j);
        adj[e.j].push_back(e.i);
    }
    std::vector<bool> seen(n, false);
    std::queue<int> frontier;
    frontier.push(0);
    seen[0] = true;
    int reached = 1;
    while (!frontier.empty()) {
        int v = frontier.front();
        frontier.pop();
        for (int u : adj[v]) {
            if (!seen[u]) {
                seen[u] = true;
                ++reached;
                frontier.push(u);
            }
        }
    }
    return reached == n;
}

CutAssignment::CutAssignment(int n_vertices, Bits bits) : n_(n_vertices), bits_(bits) {
    if (n_vertices < 1 || n_vertices > 64) {
        throw InputError("assignment length must be in [1, 64]");
    }
    if (n_vertices < 64 && (bits >> n_vertices) != 0) {
        throw InputError("assignment has bits set beyond its length");
    }
}

CutAssignment CutAssignment::parse(std::string_view text) {
    return CutAssignment(static_cast<int>(text.size()), bits_from_string(text));
}

CutAssignment CutAssignment::complement() const {
    Bits mask = n_ == 64 ? ~Bits{0} : ((Bits{1} << n_) - 1);
    return CutAssignment(n_, ~bits_ & mask);
}

std::string CutAssignment::str() const { return bits_to_string(bits_, n_); }

std::string bits_to_string(Bits bits, int n) {
    std::string s(static_cast<std::size_t>(n), '0');
    for (int k = 0; k < n; ++k) {
        if ((bits >> k) & 1U) {
            s[k] = '1';
        }
    }
    return s;
}

Bits bits_from_string(std::string_view text) {
    if (text.empty() || text.size() > 64) {
        throw InputError("bitstring length must be in [1, 64]");
    }
    Bits bits = 0;
    for (std::size_t k = 0; k < text.size(); ++k) {
        if (text[k] == '1') {
            bits |= Bits{1} << k;
        } else if (text[k] != '0') {
            throw InputError("bitstring contains '" + std::string(1, text[k]) + "'");
        }
    }
    return bits;
}

namespace {

void check_length(const WeightedGraph& graph, const CutAssignment& a) {
    if (a.size() != graph.n_vertices()) {
        throw InputError("assignment length " + std::to_string(a.size()) +
                         " does not match graph with " + std::to_string(graph.n_vertices()) +
                         " vertices");
    }
}

}  // namespace

double cut_value_bits(const WeightedGraph& graph, Bits bits) {
    double cut = 0.0;
    for (const auto& e : graph.edges()) {
        if (((bits >> e.i) ^ (bits >> e.j)) & 1U) {
            cut += e.w;
        }
    }
    return cut;
}

double cost_value_bits(const WeightedGraph& graph, Bits bits) {
    double cost = 0.0;
    for (const auto& e : graph.edges()) {
        cost += (((bits >> e.i) ^ (bits >> e.j)) & 1U) ? -e.w : e.w;
    }
    return cost;
}

double cut_value(const WeightedGraph& graph, const CutAssignment& a) {
    check_length(graph, a);
    return cut_value_bits(graph, a.bits());
}

double cost_value(const WeightedGraph& graph, const CutAssignment& a) {
    check_length(graph, a);
    return cost_value_bits(graph, a.bits());
}

bool OracleResult::is_optimal(Bits bits) const {
    return std::binary_search(optimal_assignments.begin(), optimal_assignments.end(), bits);
}

OracleResult brute_force_maxcut(const WeightedGraph& graph) {
    const int n = graph.n_vertices();
    if (n > kMaxOracleVertices) {
        throw CapacityError("brute-force oracle limited to " + std::to_string(kMaxOracleVertices) +
                            " vertices, got " + std::to_string(n));
    }
    const double total = graph.total_weight();
    const Bits full = (Bits{1} << n) - 1;

    // Vertex n-1 is pinned to side 0; the other half follows by complement.
    // Gray-code walk: flipping vertex v changes the cut by sum of incident
    // weights on v's side minus those across.
    std::vector<std::vector<std::pair<int, double>>> adj(n);
    for (const auto& e : graph.edges()) {
        adj[e.i].emplace_back(e.j, e.w);
        adj[e.j].emplace_back(e.i, e.w);
    }
    const std::uint64_t half = Bits{1} << (n - 1);

    auto walk = [&](auto&& visit) {
        Bits bits = 0;
        double cut = 0.0;
        visit(bits, cut);
        for (std::uint64_t step = 1; step < half; ++step) {
            int v = std::countr_zero(step);
            bool was = (bits >> v) & 1U;
            for (auto [u, w] : adj[v]) {
                bool same = (((bits >> u) & 1U) != 0) == was;
                cut += same ? w : -w;
            }
            bits ^= Bits{1} << v;
            visit(bits, cut);
        }
    };

    double best = -std::numeric_limits<double>::infinity();
    walk([&](Bits, double cut) { best = std::max(best, cut); });

    const double tol = 1e-12 * std::max(total, std::numeric_limits<double>::min());
    OracleResult result;
    result.n_vertices = n;
    walk([&](Bits bits, double cut) {
        if (cut >= best - tol) {
            result.optimal_assignments.push_back(bits);
            result.optimal_assignments.push_back(~bits & full);
        }
    });
    std::sort(result.optimal_assignments.begin(), result.optimal_assignments.end());

    // Report the exact (non-incremental) value of a representative optimum.
    double exact_best = -std::numeric_limits<double>::infinity();
    for (Bits b : result.optimal_assignments) {
        exact_best = std::max(exact_best, cut_value_bits(graph, b));
    }
    result.max_cut_value = exact_best;
    result.min_cost = total - 2.0 * exact_best;
    return result;
}

RandomGraph gen_erdos_renyi(int n, double p, double w_low, double w_high, std::uint64_t seed) {
    if (n < 2) {
        throw InputError("Erdos-Renyi graph needs n >= 2");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        throw InputError("edge probability must lie in [0, 1]");
    }
    if (!(w_low <= w_high) || !(w_high > 0.0) || w_low < 0.0) {
        throw InputError("weight range must satisfy 0 <= w_low <= w_high, w_high > 0");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            double coin = unit(rng);
            double draw = unit(rng);
            if (coin < p) {
                // (w_low, w_high]: 1 - draw lies in (0, 1].
                double w = w_low + (w_high - w_low) * (1.0 - draw);
                edges.push_back({i, j, w});
            }
        }
    }
    RandomGraph out{WeightedGraph(n, std::move(edges)), false};
    out.connected = is_connected(out.graph);
    return out;
}

double Distribution::total() const {
    double t = 0.0;
    for (const auto& [bits, m] : mass) {
        t += m;
    }
    return t;
}

double Distribution::at(Bits bits) const {
    auto it = mass.find(bits);
    return it == mass.end() ? 0.0 : it->second;
}

Distribution Distribution::normalized() const {
    double t = total();
    if (!(t > 0.0)) {
        throw InputError("distribution has no mass");
    }
    Distribution out{n_bits, {}};
    for (const auto& [bits, m] : mass) {
        out.mass.emplace(bits, m / t);
    }
    return out;
}

Distribution Distribution::from_counts(int n_bits, const std::map<Bits, std::uint64_t>& counts) {
    Distribution d{n_bits, {}};
    for (const auto& [bits, c] : counts) {
        d.mass.emplace(bits, static_cast<double>(c));
    }
    return d.normalized();
}

Distribution Distribution::from_dense(int n_bits, std::span<const double> probs, double drop_below) {
    if (probs.size() != (std::size_t{1} << n_bits)) {
        throw InputError("dense distribution has wrong length");
    }
    Distribution d{n_bits, {}};
    for (std::size_t z = 0; z < probs.size(); ++z) {
        if (probs[z] > drop_below) {
            d.mass.emplace_hint(d.mass.end(), static_cast<Bits>(z), probs[z]);
        }
    }
    return d;
}

double ground_state_probability(const Distribution& dist, const OracleResult& oracle) {
    if (dist.n_bits != oracle.n_vertices) {
        throw InputError("distribution over " + std::to_string(dist.n_bits) +
                         " bits does not match oracle over " + std::to_string(oracle.n_vertices) +
                         " vertices");
    }
    double t = dist.total();
    if (!(t > 0.0)) {
        throw InputError("distribution has no mass");
    }
    double hit = 0.0;
    for (Bits b : oracle.optimal_assignments) {
        hit += dist.at(b);
    }
    return hit / t;
}

double step_to_solution(double p_gs) {
    if (!(p_gs >= 0.0) || p_gs >= 1.0) {
        throw DomainError("step-to-solution requires 0 <= P(GS) < 1, got " + std::to_string(p_gs));
    }
    if (p_gs == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return std::log(0.01) / std::log1p(-p_gs);
}

}  // namespace gridcut
