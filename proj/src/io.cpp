#include "gridcut/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "gridcut/error.hpp"

namespace gridcut {

namespace {

const Json& require(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) {
        throw InputError(std::string("missing JSON field '") + key + "'");
    }
    return j.at(key);
}

double number(const Json& j, const std::string& what) {
    if (!j.is_number()) {
        throw InputError(what + " must be a number");
    }
    return j.get<double>();
}

Json knots_to_json(const std::vector<std::pair<double, double>>& knots, double scale) {
    Json a = Json::array();
    for (const auto& [t, v] : knots) {
        a.push_back({t, v * scale});
    }
    return a;
}

std::vector<std::pair<double, double>> knots_from_json(const Json& j, double scale, const std::string& what) {
    if (!j.is_array()) {
        throw InputError(what + " must be an array of [t, value] pairs");
    }
    std::vector<std::pair<double, double>> out;
    for (const auto& k : j) {
        if (!k.is_array() || k.size() != 2) {
            throw InputError(what + " entries must be [t, value] pairs");
        }
        out.emplace_back(number(k[0], what), number(k[1], what) * scale);
    }
    return out;
}

// Infinity and NaN have no JSON spelling; they become null.
Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json string_list(const std::vector<Bits>& bits, int n) {
    Json a = Json::array();
    for (Bits b : bits) {
        a.push_back(bits_to_string(b, n));
    }
    return a;
}

}  // namespace

Json graph_to_json(const WeightedGraph& g) {
    Json edges = Json::array();
    for (const auto& e : g.edges()) {
        edges.push_back({e.i, e.j, e.w});
    }
    return {{"n", g.n_vertices()}, {"edges", edges}};
}

WeightedGraph graph_from_json(const Json& j) {
    const Json& n = require(j, "n");
    if (!n.is_number_integer()) {
        throw InputError("'n' must be an integer");
    }
    std::vector<Edge> edges;
    for (const auto& e : require(j, "edges")) {
        if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() || !e[1].is_number_integer()) {
            throw InputError("edges must be [i, j, w] triples with integer endpoints");
        }
        edges.push_back({e[0].get<int>(), e[1].get<int>(), number(e[2], "edge weight")});
    }
    return WeightedGraph(n.get<int>(), std::move(edges));
}

Json layout_to_json(const Layout& layout) {
    Json pos = Json::array();
    for (const auto& p : layout.positions) {
        pos.push_back({p.x, p.y});
    }
    return {{"positions_um", pos}};
}

Layout layout_from_json(const Json& j) {
    Layout layout;
    for (const auto& p : require(j, "positions_um")) {
        if (!p.is_array() || p.size() != 2) {
            throw InputError("positions must be [x, y] pairs");
        }
        layout.positions.push_back({number(p[0], "x"), number(p[1], "y")});
    }
    return layout;
}

Json schedule_to_json(const PulseSchedule& s) {
    const double to_mhz = 1.0 / kTwoPi;
    Json j;
    j["t_max"] = s.t_max;
    j["omega"] = knots_to_json(s.omega.knots(), to_mhz);
    j["delta"] = knots_to_json(s.delta_global.knots(), to_mhz);
    j["phi"] = knots_to_json(s.phi.knots(), 1.0);
    if (s.local_detuning) {
        Json d = Json::array();
        for (double v : *s.local_detuning) {
            d.push_back(v * to_mhz);
        }
        j["local_detuning_MHz"] = d;
    } else {
        j["local_detuning_MHz"] = nullptr;
    }
    return j;
}

PulseSchedule schedule_from_json(const Json& j) {
    PulseSchedule s;
    s.t_max = number(require(j, "t_max"), "t_max");
    s.omega = PiecewiseLinear(knots_from_json(require(j, "omega"), kTwoPi, "omega"));
    s.delta_global = PiecewiseLinear(knots_from_json(require(j, "delta"), kTwoPi, "delta"));
    if (j.contains("phi") && !j.at("phi").is_null()) {
        s.phi = PiecewiseConstant(knots_from_json(j.at("phi"), 1.0, "phi"));
    }
    if (j.contains("local_detuning_MHz") && !j.at("local_detuning_MHz").is_null()) {
        std::vector<double> d;
        for (const auto& v : j.at("local_detuning_MHz")) {
            d.push_back(number(v, "local detuning") * kTwoPi);
        }
        s.local_detuning = std::move(d);
    }
    return s;
}

Json bus_index_to_json(const std::map<BusId, int>& index) {
    Json m = Json::object();
    for (const auto& [bus, v] : index) {
        m[std::to_string(bus)] = v;
    }
    return {{"bus_index", m}};
}

Json oracle_to_json(const OracleResult& r) {
    return {{"n", r.n_vertices},
            {"max_cut", r.max_cut_value},
            {"min_cost", r.min_cost},
            {"optimal_assignments", string_list(r.optimal_assignments, r.n_vertices)}};
}

Json adiabatic_params_to_json(const AdiabaticParams& p) {
    return {{"p0_MHz", p.p0 / kTwoPi}, {"p1", p.p1}, {"p2_MHz", p.p2 / kTwoPi}};
}

Json qaoa_params_to_json(const QaoaParams& p) { return {{"gammas_us", p.gammas}, {"betas_us", p.betas}}; }

QaoaParams qaoa_params_from_json(const Json& j) {
    QaoaParams p;
    for (const auto& v : require(j, "gammas_us")) {
        p.gammas.push_back(number(v, "gamma"));
    }
    for (const auto& v : require(j, "betas_us")) {
        p.betas.push_back(number(v, "beta"));
    }
    return p;
}

Json qaoa_report_to_json(const QaoaReport& r) {
    Json seeds = Json::array();
    for (const auto& s : r.seeds) {
        Json e;
        e["seed"] = s.seed;
        e["cost"] = s.cost;
        e["p_gs"] = s.p_gs;
        e["steps"] = s.steps;
        e["converged"] = s.converged;
        e["failed"] = s.failed;
        if (s.failed) {
            e["message"] = s.message;
        }
        e["init"] = qaoa_params_to_json(s.init);
        e["params"] = qaoa_params_to_json(s.params);
        seeds.push_back(e);
    }
    Json j;
    j["layers"] = r.layers;
    j["vanilla"] = r.vanilla;
    j["oracle"] = oracle_to_json(r.oracle);
    j["mean_p_gs"] = r.mean_p_gs;
    j["best_p_gs"] = r.best_p_gs;
    j["best_seed_index"] = r.best_index;
    j["failed_seeds"] = r.failed;
    j["seeds"] = seeds;
    return j;
}

Json run_report_to_json(const RunReport& r) {
    Json j;
    j["oracle"] = oracle_to_json(r.oracle);
    j["p_gs"] = r.p_gs;
    j["step_to_solution"] = r.step_to_solution ? finite_or_null(*r.step_to_solution) : Json(nullptr);
    j["final_cost"] = r.final_cost;
    j["init"] = adiabatic_params_to_json(r.init);
    j["params"] = adiabatic_params_to_json(r.params);
    j["best_register"] = r.best_register;
    j["layout_seed"] = r.layout_seed;
    j["layout_k_scale_um"] = r.layout_k_scale;
    j["register_costs"] = r.register_costs;
    j["layout"] = layout_to_json(r.layout);
    j["schedule"] = schedule_to_json(r.schedule);
    j["clamped"] = r.clamped;
    j["cost_trace"] = r.cost_trace;
    if (r.histogram_p_gs) {
        j["histogram_p_gs"] = *r.histogram_p_gs;
    }
    return j;
}

Json fidelity_trace_to_json(const FidelityTrace& t) {
    return {{"t_us", t.cycle_times}, {"fidelity", t.fidelity}, {"p_initial", t.p_initial}, {"p_ground", t.p_ground}};
}

std::string histogram_csv(const ShotHistogram& h) {
    std::ostringstream out;
    out << "bitstring,count\n";
    for (const auto& [z, c] : h.counts) {
        out << bits_to_string(z, h.n_bits) << ',' << c << '\n';
    }
    return out.str();
}

std::string distribution_csv(const Distribution& d) {
    std::ostringstream out;
    out.precision(17);
    out << "bitstring,probability\n";
    for (const auto& [z, m] : d.mass) {
        out << bits_to_string(z, d.n_bits) << ',' << m << '\n';
    }
    return out.str();
}

std::string fidelity_trace_csv(const FidelityTrace& t) {
    t.validate();
    std::ostringstream out;
    out.precision(17);
    out << "t_us,fidelity,p_initial,p_ground\n";
    for (std::size_t k = 0; k < t.size(); ++k) {
        out << t.cycle_times[k] << ',' << t.fidelity[k] << ',' << t.p_initial[k] << ',' << t.p_ground[k] << '\n';
    }
    return out.str();
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot read '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Json read_json_file(const std::filesystem::path& path) {
    try {
        return Json::parse(read_text_file(path));
    } catch (const Json::parse_error& e) {
        throw InputError("'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot write '" + tmp.string() + "'");
        }
        out << content;
        out.flush();
        if (!out) {
            throw Error("write to '" + tmp.string() + "' failed");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw Error("cannot move result into '" + path.string() + "': " + ec.message());
    }
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace gridcut
