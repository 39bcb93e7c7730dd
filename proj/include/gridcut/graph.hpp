#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gridcut {

// Basis-state index. Bit k holds the state of vertex/atom k.
// Convention used throughout: bit 1 = Rydberg (excited) state = Z eigenvalue -1,
// and that vertex belongs to the marked side of the cut.
using Bits = std::uint64_t;

struct Edge {
    int i = 0;
    int j = 0;
    double w = 0.0;
};

// Undirected graph with strictly positive finite weights. Edges are stored with
// i < j, sorted, and without duplicates.
class WeightedGraph {
public:
    WeightedGraph() = default;
    // Endpoints may be given in either order; they are canonicalized. Throws
    // InputError on self-loops, out-of-range vertices, duplicates or bad weights.
    WeightedGraph(int n_vertices, std::vector<Edge> edges);

    int n_vertices() const { return n_; }
    const std::vector<Edge>& edges() const { return edges_; }
    std::size_t n_edges() const { return edges_.size(); }
    double total_weight() const;
    double max_weight() const;
    // Weight of edge {a, b}, or 0 when absent.
    double weight(int a, int b) const;
    // Dense symmetric n x n matrix, row-major.
    std::vector<double> adjacency_matrix() const;

    bool operator==(const WeightedGraph&) const = default;

private:
    int n_ = 0;
    std::vector<Edge> edges_;
};

bool operator==(const Edge& a, const Edge& b);

bool is_connected(const WeightedGraph& graph);

// Vertex bipartition as a fixed-length bitstring.
class CutAssignment {
public:
    CutAssignment(int n_vertices, Bits bits);
    // Character k is the side of vertex k ('0' or '1').
    static CutAssignment parse(std::string_view text);

    int size() const { return n_; }
    Bits bits() const { return bits_; }
    bool side(int vertex) const { return (bits_ >> vertex) & 1U; }
    CutAssignment complement() const;
    std::string str() const;

private:
    int n_;
    Bits bits_;
};

std::string bits_to_string(Bits bits, int n);
Bits bits_from_string(std::string_view text);

double cut_value(const WeightedGraph& graph, const CutAssignment& a);
// Ising cost sum_{ij} w_ij s_i s_j with s = +1 for bit 0 and -1 for bit 1.
double cost_value(const WeightedGraph& graph, const CutAssignment& a);

// Unchecked variants used by inner loops; `bits` must have no set bits >= n.
double cut_value_bits(const WeightedGraph& graph, Bits bits);
double cost_value_bits(const WeightedGraph& graph, Bits bits);

struct OracleResult {
    int n_vertices = 0;
    double max_cut_value = 0.0;
    double min_cost = 0.0;
    // Sorted ascending; closed under complement.
    std::vector<Bits> optimal_assignments;

    bool is_optimal(Bits bits) const;
};

inline constexpr int kMaxOracleVertices = 24;

// Exhaustive search. Assignments within 1e-12 (relative to the total weight)
// of the maximum are reported as co-optimal.
OracleResult brute_force_maxcut(const WeightedGraph& graph);

struct RandomGraph {
    WeightedGraph graph;
    bool connected = false;
};

// G(n, p) with weights drawn from (w_low, w_high]. When w_low == w_high every
// weight equals w_low, which must then be positive.
RandomGraph gen_erdos_renyi(int n, double p, double w_low, double w_high, std::uint64_t seed);

// Probability mass over basis states. Exact distributions and shot histograms
// share this type; `normalized()` divides by the total mass.
struct Distribution {
    int n_bits = 0;
    std::map<Bits, double> mass;

    double total() const;
    double at(Bits bits) const;
    Distribution normalized() const;

    static Distribution from_counts(int n_bits, const std::map<Bits, std::uint64_t>& counts);
    // Dense vector of length 2^n_bits.
    static Distribution from_dense(int n_bits, std::span<const double> probs, double drop_below = 0.0);
};

// Fraction of the (normalized) mass sitting on any optimal assignment.
double ground_state_probability(const Distribution& dist, const OracleResult& oracle);

// Repetitions needed to observe a solution with 99% certainty.
// Returns +inf for p_gs == 0; throws DomainError for p_gs >= 1 or < 0.
double step_to_solution(double p_gs);

}  // namespace gridcut
