#pragma once

#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

#include "gridcut/bench.hpp"
#include "gridcut/graph.hpp"
#include "gridcut/gridparse.hpp"
#include "gridcut/pulseopt.hpp"
#include "gridcut/qaoa.hpp"
#include "gridcut/rydsim.hpp"

namespace gridcut {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSchemaVersion = "gridcut.report/1";

// {"n": int, "edges": [[i, j, w], ...]}
Json graph_to_json(const WeightedGraph& g);
WeightedGraph graph_from_json(const Json& j);

// {"positions_um": [[x, y], ...]}
Json layout_to_json(const Layout& layout);
Layout layout_from_json(const Json& j);

// Frequencies in MHz on disk, rad/us in memory:
// {"t_max", "omega": [[t, MHz]], "delta": [[t, MHz]], "phi": [[t, rad]], "local_detuning_MHz": [..] | null}
Json schedule_to_json(const PulseSchedule& s);
PulseSchedule schedule_from_json(const Json& j);

Json bus_index_to_json(const std::map<BusId, int>& index);

Json oracle_to_json(const OracleResult& r);
Json adiabatic_params_to_json(const AdiabaticParams& p);  // p0, p2 in MHz
Json qaoa_params_to_json(const QaoaParams& p);
QaoaParams qaoa_params_from_json(const Json& j);
Json qaoa_report_to_json(const QaoaReport& r);
Json run_report_to_json(const RunReport& r);
Json fidelity_trace_to_json(const FidelityTrace& t);

// "bitstring,count" (histogram) or "bitstring,probability" (distribution);
// bit k of the string is vertex k.
std::string histogram_csv(const ShotHistogram& h);
std::string distribution_csv(const Distribution& d);
// t_us, fidelity, p_initial, p_ground
std::string fidelity_trace_csv(const FidelityTrace& t);

std::string read_text_file(const std::filesystem::path& path);
Json read_json_file(const std::filesystem::path& path);
// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string dump_json(const Json& j);  // two-space indent, trailing newline

}  // namespace gridcut
