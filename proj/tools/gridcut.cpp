// gridcut command-line driver.
//
// Every subcommand resolves its configuration as built-in defaults, then an
// optional --config JSON file (a previous run's manifest also works), then
// explicit flags. Outputs are written atomically next to --out (or inside
// --outdir) together with a manifest that replays the run.

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <iostream>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gridcut/bench.hpp"
#include "gridcut/embed.hpp"
#include "gridcut/error.hpp"
#include "gridcut/graph.hpp"
#include "gridcut/gridparse.hpp"
#include "gridcut/io.hpp"
#include "gridcut/pulseopt.hpp"
#include "gridcut/qaoa.hpp"

#ifndef GRIDCUT_VERSION
#define GRIDCUT_VERSION "dev"
#endif

namespace {

using namespace gridcut;
namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 digest failed");
    }
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) {
        hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    }
    return hex.str();
}

// ---------------------------------------------------------------------------
// Flag registry: remembers which flags were given so they can override the
// config file, and nothing else does.

class Flags {
public:
    template <class T>
    CLI::Option* add(CLI::App* app, const std::string& spec, const std::string& key, const std::string& help) {
        auto value = std::make_shared<T>();
        CLI::Option* opt = app->add_option(spec, *value, help);
        appliers_.push_back([opt, value, key](Json& cfg) {
            if (opt->count() > 0) {
                cfg[key] = *value;
            }
        });
        return opt;
    }

    CLI::Option* add_switch(CLI::App* app, const std::string& spec, const std::string& key, const std::string& help) {
        auto value = std::make_shared<bool>(false);
        CLI::Option* opt = app->add_flag(spec, *value, help);
        appliers_.push_back([opt, value, key](Json& cfg) {
            if (opt->count() > 0) {
                cfg[key] = *value;
            }
        });
        return opt;
    }

    void apply(Json& cfg) const {
        for (const auto& f : appliers_) {
            f(cfg);
        }
    }

private:
    std::vector<std::function<void(Json&)>> appliers_;
};

// ---------------------------------------------------------------------------
// Run context and outputs

struct RunContext {
    Json config;
    std::map<std::string, std::string> inputs;  // path -> sha256
    std::vector<std::uint64_t> seeds;

    void record_input(const std::string& path) { inputs[path] = sha256_hex(read_text_file(path)); }
};

struct Outputs {
    std::string primary;  // written to the main output path
    // (suffix, content) pairs written next to the main output.
    std::vector<std::pair<std::string, std::string>> extras;
    // A JSON report gets the schema version and manifest stamped in. It
    // becomes the primary output unless `report_suffix` names a side file.
    std::optional<Json> report;
    std::string report_suffix;
    std::string summary;  // one line for the terminal
};

using Runner = std::function<Outputs(RunContext&, const fs::path& stem)>;

struct Command {
    std::string name;
    std::string help;
    std::string default_output;  // file name used with --outdir
    Json defaults;
    std::function<void(CLI::App*, Flags&)> declare;
    Runner run;
};

std::optional<std::string> opt_string(const Json& cfg, const char* key) {
    const Json& v = cfg.at(key);
    if (v.is_null()) {
        return std::nullopt;
    }
    return v.get<std::string>();
}

int threads_default() {
    if (const char* env = std::getenv("GRIDCUT_THREADS")) {
        try {
            int t = std::stoi(env);
            if (t >= 1) {
                return t;
            }
        } catch (const std::exception&) {
        }
        throw UsageError("GRIDCUT_THREADS must be a positive integer");
    }
    return 1;
}

SimConfig sim_from(const Json& cfg) {
    SimConfig sim;
    sim.dt = cfg.at("dt").get<double>();
    sim.threads = cfg.at("threads").get<int>();
    if (!(sim.dt > 0.0)) {
        throw InputError("dt must be positive");
    }
    if (sim.threads < 1) {
        throw InputError("threads must be at least 1");
    }
    return sim;
}

std::optional<MeasurementNoise> noise_from(const Json& cfg) {
    MeasurementNoise n{cfg.at("p01").get<double>(), cfg.at("p10").get<double>()};
    if (n.p01 == 0.0 && n.p10 == 0.0) {
        return std::nullopt;
    }
    return n;
}

WeightedGraph load_graph(RunContext& ctx) {
    const auto graph = opt_string(ctx.config, "graph");
    const auto mcase = opt_string(ctx.config, "case");
    if (graph && mcase) {
        throw UsageError("give either --graph or --case, not both");
    }
    if (graph) {
        ctx.record_input(*graph);
        return graph_from_json(read_json_file(*graph));
    }
    if (mcase) {
        ctx.record_input(*mcase);
        return case_to_graph(load_matpower(*mcase)).graph;
    }
    throw UsageError("an input graph is required (--graph or --case)");
}

void add_graph_flags(CLI::App* app, Flags& f) {
    f.add<std::string>(app, "--graph", "graph", "graph JSON {n, edges}");
    f.add<std::string>(app, "--case", "case", "MATPOWER case file");
}

void add_sim_flags(CLI::App* app, Flags& f) {
    f.add<double>(app, "--dt", "dt", "integrator step (us)");
}

EmbedParams embed_from(const Json& cfg) {
    EmbedParams p;
    p.model = cfg.at("model").get<std::string>() == "classic" ? ForceModel::classic : ForceModel::rydberg;
    if (cfg.at("model") != "classic" && cfg.at("model") != "rydberg") {
        throw InputError("model must be 'classic' or 'rydberg'");
    }
    p.rho = cfg.at("rho").get<double>();
    p.iterations = cfg.at("iterations").get<int>();
    p.initial_temperature = cfg.at("temperature").get<double>();
    p.box.box_width = cfg.at("box_width").get<double>();
    p.box.box_height = cfg.at("box_height").get<double>();
    p.box.min_spacing = cfg.at("min_spacing").get<double>();
    if (!cfg.at("k_scale").is_null()) {
        p.k_scale = cfg.at("k_scale").get<double>();
    }
    p.seed = cfg.at("seed").get<std::uint64_t>();
    p.validate();
    return p;
}

Json embed_defaults() {
    return {{"model", "rydberg"},  {"rho", 0.5},         {"iterations", 300},   {"temperature", 7.5},
            {"box_width", 75.0},   {"box_height", 76.0}, {"min_spacing", 4.0},  {"k_scale", nullptr},
            {"k_scales", PipelineConfig{}.k_scales}};
}

void add_embed_flags(CLI::App* app, Flags& f) {
    f.add<std::string>(app, "--model", "model", "force model: rydberg or classic");
    f.add<double>(app, "--rho", "rho", "clique exponent");
    f.add<int>(app, "--iterations", "iterations", "force-directed iterations");
    f.add<double>(app, "--temperature", "temperature", "initial step cap (um)");
    f.add<double>(app, "--box-width", "box_width", "box width (um)");
    f.add<double>(app, "--box-height", "box_height", "box height (um)");
    f.add<double>(app, "--min-spacing", "min_spacing", "minimum atom spacing (um)");
    f.add<double>(app, "--k-scale", "k_scale", "fixed k scale (um); disables cycling");
    f.add<std::vector<double>>(app, "--k-scales", "k_scales", "k scales cycled over candidate layouts (um)");
}

std::vector<double> k_scales_from(const Json& cfg) {
    if (!cfg.at("k_scale").is_null()) {
        return {};
    }
    return cfg.at("k_scales").get<std::vector<double>>();
}

std::string fmt(double v) {
    std::ostringstream s;
    s << std::setprecision(6) << v;
    return s.str();
}

// ---------------------------------------------------------------------------
// Subcommands

Command parse_command() {
    Command c;
    c.name = "parse";
    c.help = "MATPOWER case -> graph JSON plus bus index";
    c.default_output = "graph.json";
    c.defaults = {{"case", nullptr}};
    c.declare = [](CLI::App* app, Flags& f) { f.add<std::string>(app, "--case", "case", "MATPOWER case file"); };
    c.run = [](RunContext& ctx, const fs::path&) {
        auto path = opt_string(ctx.config, "case");
        if (!path) {
            throw UsageError("--case is required");
        }
        ctx.record_input(*path);
        CaseData data = load_matpower(*path);
        GridGraph g = case_to_graph(data);
        Outputs out;
        out.primary = dump_json(graph_to_json(g.graph));
        out.extras.push_back({".bus_index.json", dump_json(bus_index_to_json(g.bus_index))});
        out.summary = data.name + ": " + std::to_string(g.graph.n_vertices()) + " buses, " +
                      std::to_string(g.graph.n_edges()) + " edges";
        return out;
    };
    return c;
}

Command oracle_command() {
    Command c;
    c.name = "oracle";
    c.help = "exact maximum cut by enumeration";
    c.default_output = "oracle.json";
    c.defaults = {{"graph", nullptr}, {"case", nullptr}};
    c.declare = add_graph_flags;
    c.run = [](RunContext& ctx, const fs::path&) {
        WeightedGraph g = load_graph(ctx);
        OracleResult r = brute_force_maxcut(g);
        Outputs out;
        out.report = oracle_to_json(r);
        out.summary = "max cut " + fmt(r.max_cut_value) + ", " + std::to_string(r.optimal_assignments.size()) +
                      " optimal assignments";
        return out;
    };
    return c;
}

Command embed_command() {
    Command c;
    c.name = "embed";
    c.help = "force-directed atom layout, best of N candidates under the default pulse";
    c.default_output = "layout.json";
    c.defaults = embed_defaults();
    c.defaults.update(Json{{"graph", nullptr}, {"case", nullptr}, {"registers", 50}, {"seed", 0}, {"dt", 1e-3}});
    c.declare = [](CLI::App* app, Flags& f) {
        add_graph_flags(app, f);
        add_embed_flags(app, f);
        add_sim_flags(app, f);
        f.add<int>(app, "--registers", "registers", "number of candidate layouts");
        f.add<std::uint64_t>(app, "--seed", "seed", "base seed; candidate i uses seed + i");
    };
    c.run = [](RunContext& ctx, const fs::path&) {
        WeightedGraph g = load_graph(ctx);
        EmbedParams params = embed_from(ctx.config);
        SimConfig sim = sim_from(ctx.config);
        int registers = ctx.config.at("registers").get<int>();
        auto pulse = adiabatic_schedule(AdiabaticParams::defaults(sim.constants), kDefaultTmax, kDefaultKnots,
                                        sim.constants);
        RegisterSelection sel = select_register(g, registers, pulse, params, sim, k_scales_from(ctx.config));
        ctx.seeds = sel.seeds;
        Json j = layout_to_json(sel.best);
        j["best_register"] = sel.best_index;
        j["seed"] = sel.seeds.at(sel.best_index);
        j["k_scale_um"] = sel.k_scales.at(sel.best_index);
        j["register_costs"] = sel.costs;
        Outputs out;
        out.report = j;
        out.summary = "register " + std::to_string(sel.best_index) + " of " + std::to_string(registers) +
                      ", default-pulse cost " + fmt(sel.costs.at(sel.best_index));
        return out;
    };
    return c;
}

Command adiabatic_command() {
    Command c;
    c.name = "adiabatic";
    c.help = "register selection, pulse optimization and final evaluation";
    c.default_output = "adiabatic.json";
    c.defaults = embed_defaults();
    c.defaults.update(Json{{"graph", nullptr},
                           {"case", nullptr},
                           {"registers", 50},
                           {"steps", 100},
                           {"optimizer", "nadam"},
                           {"lr", 0.05},
                           {"fd_step", 1e-4},
                           {"dt", 1e-3},
                           {"dt_final", 1e-4},
                           {"t_max", kDefaultTmax},
                           {"knots", kDefaultKnots},
                           {"shots", 0},
                           {"seed", 0},
                           {"p01", 0.0},
                           {"p10", 0.0}});
    c.declare = [](CLI::App* app, Flags& f) {
        add_graph_flags(app, f);
        add_embed_flags(app, f);
        add_sim_flags(app, f);
        f.add<int>(app, "--registers", "registers", "number of candidate layouts (N_R)");
        f.add<int>(app, "--steps", "steps", "optimizer steps");
        f.add<std::string>(app, "--optimizer", "optimizer", "nadam or adam");
        f.add<double>(app, "--lr", "lr", "learning rate");
        f.add<double>(app, "--fd-step", "fd_step", "relative finite-difference step");
        f.add<double>(app, "--dt-final", "dt_final", "integrator step for the final evaluation (us)");
        f.add<double>(app, "--t-max", "t_max", "pulse duration (us)");
        f.add<int>(app, "--knots", "knots", "waveform knots");
        f.add<std::uint64_t>(app, "--shots", "shots", "shots to sample from the final state (0: none)");
        f.add<std::uint64_t>(app, "--seed", "seed", "base seed for layouts and sampling");
        f.add<double>(app, "--p01", "p01", "readout flip probability 0 -> 1");
        f.add<double>(app, "--p10", "p10", "readout flip probability 1 -> 0");
    };
    c.run = [](RunContext& ctx, const fs::path& stem) {
        const Json& cfg = ctx.config;
        WeightedGraph g = load_graph(ctx);
        PipelineConfig pc;
        pc.sim = sim_from(cfg);
        pc.dt_final = cfg.at("dt_final").get<double>();
        pc.t_max = cfg.at("t_max").get<double>();
        pc.knots = cfg.at("knots").get<int>();
        pc.registers = cfg.at("registers").get<int>();
        pc.embed = embed_from(cfg);
        pc.k_scales = k_scales_from(cfg);
        pc.optimizer.algorithm = algorithm_from_string(cfg.at("optimizer").get<std::string>());
        pc.optimizer.learning_rate = cfg.at("lr").get<double>();
        pc.optimizer.max_steps = cfg.at("steps").get<int>();
        pc.optimizer.fd_step = cfg.at("fd_step").get<double>();
        pc.shots = cfg.at("shots").get<std::uint64_t>();
        pc.seed = cfg.at("seed").get<std::uint64_t>();
        pc.noise = noise_from(cfg);
        RunReport r = run_adiabatic_pipeline(g, pc);

        for (int i = 0; i < pc.registers; ++i) {
            ctx.seeds.push_back(pc.seed + i);
        }
        Outputs out;
        Json j = run_report_to_json(r);
        const std::string name = stem.filename().string();
        j["distribution_csv"] = name + ".distribution.csv";
        j["histogram_csv"] = nullptr;
        out.extras.push_back({".distribution.csv", distribution_csv(r.distribution)});
        if (r.histogram) {
            j["histogram_csv"] = name + ".histogram.csv";
            out.extras.push_back({".histogram.csv", histogram_csv(*r.histogram)});
        }
        out.extras.push_back({".layout.json", dump_json(layout_to_json(r.layout))});
        out.extras.push_back({".schedule.json", dump_json(schedule_to_json(r.schedule))});
        out.report = j;
        out.summary = "P(GS) = " + fmt(r.p_gs) +
                      (r.step_to_solution ? ", S = " + fmt(*r.step_to_solution) : std::string(", S = 0"));
        return out;
    };
    return c;
}

Command qaoa_command() {
    Command c;
    c.name = "qaoa";
    c.help = "QAOA with local detuning (or the ideal circuit with --vanilla)";
    c.default_output = "qaoa.json";
    const QaoaHardwareConfig hw;
    c.defaults = embed_defaults();
    c.defaults.update(Json{{"graph", nullptr},
                           {"case", nullptr},
                           {"layout", nullptr},
                           {"lattice", nullptr},
                           {"lattice_n", 10},
                           {"lattice_seed", 0},
                           {"registers", 50},
                           {"embed_seed", 0},
                           {"layers", 10},
                           {"seeds", 20},
                           {"seed", 0},
                           {"steps", 2000},
                           {"lr", QaoaRunConfig::default_qaoa_optimizer().learning_rate},
                           {"gradient", "adjoint"},
                           {"fd_step", 1e-5},
                           {"init_high", 0.5},
                           {"max_duration", hw.max_duration},
                           {"vanilla", false},
                           {"spacing", hw.spacing},
                           {"omega_prep", hw.omega_prep},
                           {"phi_prep", hw.phi_prep},
                           {"omega_mixer", hw.omega_mixer},
                           {"phi_mixer", hw.phi_mixer},
                           {"mixer", "chebyshev"},
                           {"dt", 1e-3}});
    c.declare = [](CLI::App* app, Flags& f) {
        add_graph_flags(app, f);
        add_embed_flags(app, f);
        add_sim_flags(app, f);
        f.add<std::string>(app, "--layout", "layout", "layout JSON used as given");
        f.add<std::string>(app, "--lattice", "lattice", "generate a lattice instance: square or honeycomb");
        f.add<int>(app, "--lattice-n", "lattice_n", "lattice instance size");
        f.add<std::uint64_t>(app, "--lattice-seed", "lattice_seed", "lattice growth seed");
        f.add<int>(app, "--registers", "registers", "candidate layouts when no layout is given");
        f.add<std::uint64_t>(app, "--embed-seed", "embed_seed", "base seed of candidate layouts");
        f.add<int>(app, "--layers", "layers", "QAOA depth p");
        f.add<int>(app, "--seeds", "seeds", "random initializations");
        f.add<std::uint64_t>(app, "--seed", "seed", "base seed; initialization s uses seed + s");
        f.add<int>(app, "--steps", "steps", "Adam steps per initialization");
        f.add<double>(app, "--lr", "lr", "learning rate");
        f.add<std::string>(app, "--gradient", "gradient", "adjoint or fd");
        f.add<double>(app, "--fd-step", "fd_step", "relative finite-difference step");
        f.add<double>(app, "--init-high", "init_high", "initial durations drawn from U[0, init_high] us");
        f.add<double>(app, "--max-duration", "max_duration", "per-layer duration bound (us)");
        f.add_switch(app, "--vanilla", "vanilla", "ideal circuit: exp(-i gamma C), exp(-i beta sum X)");
        f.add<double>(app, "--spacing", "spacing", "closest-pair distance of derived layouts (um)");
        f.add<double>(app, "--omega-prep", "omega_prep", "preparation amplitude (rad/us)");
        f.add<double>(app, "--phi-prep", "phi_prep", "preparation phase (rad)");
        f.add<double>(app, "--omega-mixer", "omega_mixer", "mixer amplitude (rad/us)");
        f.add<double>(app, "--phi-mixer", "phi_mixer", "mixer phase (rad)");
        f.add<std::string>(app, "--mixer", "mixer", "mixer propagation: chebyshev or strang");
    };
    c.run = [](RunContext& ctx, const fs::path&) {
        const Json& cfg = ctx.config;
        SimConfig sim = sim_from(cfg);
        QaoaHardwareConfig hw;
        hw.spacing = cfg.at("spacing").get<double>();
        hw.omega_prep = cfg.at("omega_prep").get<double>();
        hw.phi_prep = cfg.at("phi_prep").get<double>();
        hw.omega_mixer = cfg.at("omega_mixer").get<double>();
        hw.phi_mixer = cfg.at("phi_mixer").get<double>();
        hw.max_duration = cfg.at("max_duration").get<double>();
        const bool vanilla = cfg.at("vanilla").get<bool>();
        const std::string mixer_name = cfg.at("mixer").get<std::string>();
        if (mixer_name != "chebyshev" && mixer_name != "strang") {
            throw InputError("mixer must be 'chebyshev' or 'strang'");
        }

        Json extra = Json::object();
        std::optional<WeightedGraph> graph;
        std::optional<Layout> layout;
        if (auto lattice = opt_string(cfg, "lattice")) {
            if (opt_string(cfg, "graph") || opt_string(cfg, "case")) {
                throw UsageError("--lattice replaces --graph/--case");
            }
            auto inst = lattice_graph(cfg.at("lattice_n").get<int>(), lattice_from_string(*lattice),
                                      cfg.at("lattice_seed").get<std::uint64_t>(), hw.spacing, sim.constants);
            graph = inst.graph;
            layout = inst.layout;
            extra["graph"] = graph_to_json(*graph);
        } else {
            graph = load_graph(ctx);
        }
        OracleResult oracle = brute_force_maxcut(*graph);

        if (!vanilla && !layout) {
            if (auto path = opt_string(cfg, "layout")) {
                ctx.record_input(*path);
                layout = layout_from_json(read_json_file(*path));
            } else {
                EmbedParams ep = embed_from(cfg);
                ep.seed = cfg.at("embed_seed").get<std::uint64_t>();
                auto candidates = candidate_layouts(*graph, cfg.at("registers").get<int>(), ep, k_scales_from(cfg),
                                                    sim.threads);
                QaoaLayoutChoice choice = select_qaoa_layout(candidates, oracle, hw, sim.constants);
                layout = choice.layout;
                extra["layout_candidate"] = choice.best_index;
                extra["layout_margin"] = choice.margins.at(choice.best_index);
            }
        }

        std::unique_ptr<QaoaModel> model;
        if (vanilla) {
            model = std::make_unique<VanillaQaoa>(*graph);
        } else {
            model = std::make_unique<LocalDetuningQaoa>(
                *graph, *layout, hw, sim, mixer_name == "strang" ? MixerPropagation::strang : MixerPropagation::chebyshev);
        }

        QaoaRunConfig rc;
        rc.layers = cfg.at("layers").get<int>();
        rc.seeds = cfg.at("seeds").get<int>();
        rc.seed = cfg.at("seed").get<std::uint64_t>();
        rc.init_high = cfg.at("init_high").get<double>();
        rc.optimizer.learning_rate = cfg.at("lr").get<double>();
        rc.optimizer.max_steps = cfg.at("steps").get<int>();
        rc.optimizer.gradient = gradient_from_string(cfg.at("gradient").get<std::string>());
        rc.optimizer.fd_step = cfg.at("fd_step").get<double>();
        rc.threads = sim.threads;
        QaoaReport report = optimize_qaoa(*model, oracle, rc, hw.max_duration);
        report.vanilla = vanilla;
        for (int s = 0; s < rc.seeds; ++s) {
            ctx.seeds.push_back(rc.seed + s);
        }

        Json j = qaoa_report_to_json(report);
        if (layout) {
            j["layout"] = layout_to_json(*layout);
            j["local_detuning_MHz"] = Json::array();
            for (double d : local_detunings(*layout, sim.constants)) {
                j["local_detuning_MHz"].push_back(rad_per_us_to_mhz(d));
            }
        }
        if (auto* v = dynamic_cast<VanillaQaoa*>(model.get())) {
            j["cost_scale"] = v->cost_scale();
        }
        j.update(extra);
        Outputs out;
        out.report = j;
        out.summary = "mean P(GS) = " + fmt(report.mean_p_gs) + ", best = " + fmt(report.best_p_gs) + ", failed " +
                      std::to_string(report.failed);
        return out;
    };
    return c;
}

Command bench_command() {
    Command c;
    c.name = "bench";
    c.help = "cycle-wise fidelity benchmark of a schedule";
    c.default_output = "trace.csv";
    c.defaults = {{"graph", nullptr}, {"case", nullptr},    {"layout", nullptr}, {"schedule", nullptr},
                  {"cycles", 16},     {"t_cycle", 0.25},    {"shots", 0},        {"reference_shots", 0},
                  {"seed", 0},        {"p01", 0.0},         {"p10", 0.0},        {"incremental", false},
                  {"dt", 1e-3}};
    c.declare = [](CLI::App* app, Flags& f) {
        add_graph_flags(app, f);
        add_sim_flags(app, f);
        f.add<std::string>(app, "--layout", "layout", "layout JSON");
        f.add<std::string>(app, "--schedule", "schedule", "schedule JSON (MHz)");
        f.add<int>(app, "--cycles", "cycles", "number of cycles");
        f.add<double>(app, "--t-cycle", "t_cycle", "cycle length (us)");
        f.add<std::uint64_t>(app, "--shots", "shots", "shots per cycle (0: exact distribution)");
        f.add<std::uint64_t>(app, "--reference-shots", "reference_shots", "shots for the reference (0: exact)");
        f.add<std::uint64_t>(app, "--seed", "seed", "sampling seed");
        f.add<double>(app, "--p01", "p01", "readout flip probability 0 -> 1");
        f.add<double>(app, "--p10", "p10", "readout flip probability 1 -> 0");
        f.add_switch(app, "--incremental", "incremental", "carry the state across cycles");
    };
    c.run = [](RunContext& ctx, const fs::path&) {
        const Json& cfg = ctx.config;
        WeightedGraph g = load_graph(ctx);
        auto layout_path = opt_string(cfg, "layout");
        auto schedule_path = opt_string(cfg, "schedule");
        if (!layout_path || !schedule_path) {
            throw UsageError("--layout and --schedule are required");
        }
        ctx.record_input(*layout_path);
        ctx.record_input(*schedule_path);
        Layout layout = layout_from_json(read_json_file(*layout_path));
        PulseSchedule schedule = schedule_from_json(read_json_file(*schedule_path));
        BenchConfig bc;
        bc.cycles = cfg.at("cycles").get<int>();
        bc.t_cycle = cfg.at("t_cycle").get<double>();
        bc.shots = cfg.at("shots").get<std::uint64_t>();
        bc.reference_shots = cfg.at("reference_shots").get<std::uint64_t>();
        bc.seed = cfg.at("seed").get<std::uint64_t>();
        bc.noise = noise_from(cfg);
        bc.incremental = cfg.at("incremental").get<bool>();
        FidelityTrace t = fidelity_benchmark(g, layout, schedule, bc, sim_from(cfg));
        for (int k = 1; k <= bc.cycles; ++k) {
            if (bc.shots > 0) {
                ctx.seeds.push_back(bc.seed + 2 * k);
            }
            if (bc.reference_shots > 0) {
                ctx.seeds.push_back(bc.seed + 2 * k + 1);
            }
        }
        Outputs out;
        out.primary = fidelity_trace_csv(t);
        out.report = fidelity_trace_to_json(t);
        out.report_suffix = ".report.json";
        out.summary = std::to_string(t.size()) + " cycles, final P(GS) = " + fmt(t.p_ground.back());
        return out;
    };
    return c;
}

// ---------------------------------------------------------------------------
// Config resolution

bool same_kind(const Json& a, const Json& b) {
    if (a.is_null() || b.is_null()) {
        return true;
    }
    if (a.is_number() && b.is_number()) {
        // Integers must stay integers; reals accept integers.
        return !(a.is_number_integer() && b.is_number_float());
    }
    return a.type() == b.type();
}

void merge_into(Json& cfg, const Json& overrides, const std::string& origin) {
    if (!overrides.is_object()) {
        throw UsageError(origin + ": configuration must be a JSON object");
    }
    for (const auto& [key, value] : overrides.items()) {
        if (!cfg.contains(key)) {
            throw UsageError(origin + ": unknown option '" + key + "'");
        }
        if (!same_kind(cfg[key], value)) {
            throw UsageError(origin + ": option '" + key + "' has the wrong type");
        }
        cfg[key] = value;
    }
}

Json load_config_file(const std::string& path, const std::string& command) {
    Json j;
    try {
        j = Json::parse(read_text_file(path));
    } catch (const std::exception& e) {
        throw UsageError("cannot read config '" + path + "': " + e.what());
    }
    // A manifest carries its resolved config under "config".
    if (j.is_object() && j.contains("command") && j.contains("config")) {
        if (j.at("command") != command) {
            throw UsageError("manifest '" + path + "' belongs to '" + j.at("command").get<std::string>() + "'");
        }
        return j.at("config");
    }
    return j;
}

int execute(const Command& cmd, RunContext& ctx, const std::optional<std::string>& out_path,
            const std::optional<std::string>& outdir) {
    fs::path primary;
    if (out_path && outdir) {
        throw UsageError("give either --out or --outdir, not both");
    }
    if (outdir) {
        fs::create_directories(*outdir);
        primary = fs::path(*outdir) / cmd.default_output;
    } else if (out_path) {
        primary = *out_path;
        if (primary.filename().empty()) {
            throw UsageError("--out must name a file");
        }
        if (primary.has_parent_path()) {
            fs::create_directories(primary.parent_path());
        }
    }
    fs::path stem = primary.empty() ? fs::path(cmd.name) : primary.parent_path() / primary.stem();

    auto t0 = std::chrono::steady_clock::now();
    Outputs out = cmd.run(ctx, stem);
    double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    Json manifest;
    manifest["schema_version"] = kSchemaVersion;
    manifest["command"] = cmd.name;
    manifest["versions"] = GRIDCUT_VERSION;
    manifest["config"] = ctx.config;
    manifest["seeds"] = ctx.seeds;
    manifest["inputs"] = Json::object();
    for (const auto& [path, hash] : ctx.inputs) {
        manifest["inputs"][path] = {{"sha256", hash}};
    }

    if (out.report) {
        Json stamped{{"schema_version", kSchemaVersion}};
        stamped.update(*out.report);
        stamped["manifest"] = manifest;
        if (out.report_suffix.empty()) {
            out.primary = dump_json(stamped);
        } else {
            out.extras.push_back({out.report_suffix, dump_json(stamped)});
        }
    }

    if (primary.empty()) {
        std::cout << out.primary;
    } else {
        write_file_atomic(primary, out.primary);
        for (const auto& [suffix, content] : out.extras) {
            write_file_atomic(stem.string() + suffix, content);
        }
        write_file_atomic(stem.string() + ".manifest.json", dump_json(manifest));
        std::cout << cmd.name << ": " << out.summary << " -> " << primary.string() << '\n';
    }
    std::cerr << cmd.name << ": finished in " << fmt(elapsed) << " s\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gridcut: weighted MaxCut on simulated Rydberg atom arrays"};
    app.set_version_flag("--version", GRIDCUT_VERSION);
    app.require_subcommand(1);

    std::vector<Command> commands{parse_command(), oracle_command(), embed_command(),
                                  adiabatic_command(), qaoa_command(), bench_command()};
    struct Parsed {
        CLI::App* app = nullptr;
        Flags flags;
        std::string config;
        std::string out;
        std::string outdir;
        int threads = 0;
        CLI::Option* config_opt = nullptr;
        CLI::Option* out_opt = nullptr;
        CLI::Option* outdir_opt = nullptr;
        CLI::Option* threads_opt = nullptr;
    };
    std::vector<std::unique_ptr<Parsed>> parsed;
    for (auto& cmd : commands) {
        auto p = std::make_unique<Parsed>();
        p->app = app.add_subcommand(cmd.name, cmd.help);
        p->config_opt = p->app->add_option("--config", p->config, "JSON config file or a previous run's manifest");
        p->out_opt = p->app->add_option("--out", p->out, "main output file; side files share its stem");
        p->outdir_opt = p->app->add_option("--outdir", p->outdir, "directory for all outputs");
        p->threads_opt = p->app->add_option("--threads", p->threads, "worker threads (default: $GRIDCUT_THREADS or 1)");
        cmd.declare(p->app, p->flags);
        parsed.push_back(std::move(p));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    for (std::size_t i = 0; i < commands.size(); ++i) {
        Parsed& p = *parsed[i];
        if (!p.app->parsed()) {
            continue;
        }
        const Command& cmd = commands[i];
        try {
            RunContext ctx;
            ctx.config = cmd.defaults;
            ctx.config["threads"] = threads_default();
            if (p.config_opt->count() > 0) {
                merge_into(ctx.config, load_config_file(p.config, cmd.name), p.config);
            }
            p.flags.apply(ctx.config);
            if (p.threads_opt->count() > 0) {
                ctx.config["threads"] = p.threads;
            }
            std::optional<std::string> out;
            std::optional<std::string> outdir;
            if (p.out_opt->count() > 0) {
                out = p.out;
            }
            if (p.outdir_opt->count() > 0) {
                outdir = p.outdir;
            }
            return execute(cmd, ctx, out, outdir);
        } catch (const UsageError& e) {
            std::cerr << "gridcut " << cmd.name << ": " << e.what() << '\n';
            return 2;
        } catch (const std::exception& e) {
            std::cerr << "gridcut " << cmd.name << ": error: " << e.what() << '\n';
            return 1;
        }
    }
    return 2;
}
