#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "gridcut/graph.hpp"

namespace gridcut {

using BusId = long long;

struct BranchRecord {
    BusId from_bus = 0;
    BusId to_bus = 0;
    double r = 0.0;  // per-unit resistance
    double x = 0.0;  // per-unit reactance
};

struct CaseData {
    std::string name;
    std::vector<BusId> bus_ids;  // file order
    std::vector<BranchRecord> branches;
};

// Reads the `mpc.bus` and `mpc.branch` matrices of a MATPOWER case file.
// Only the bus id column and the first four branch columns are kept.
CaseData parse_matpower(std::string_view text);
CaseData load_matpower(const std::string& path);

struct GridGraph {
    WeightedGraph graph;
    std::map<BusId, int> bus_index;  // bus id -> vertex
};

// Line admittance magnitude 1/|R + iX| becomes the edge weight. Parallel
// branches between the same buses are merged by summing their weights.
GridGraph case_to_graph(const CaseData& data);

double branch_weight(const BranchRecord& branch);

}  // namespace gridcut
