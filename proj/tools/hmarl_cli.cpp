// hmarl command-line tool: train, evaluate, explain, render and replay.
//
// Exit codes: 0 success, 2 usage/config/input errors, 3 numerical divergence,
// 4 missing artifact or unreadable checkpoint, 1 anything else.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hmarl/checkpoint.hpp"
#include "hmarl/config.hpp"
#include "hmarl/errors.hpp"
#include "hmarl/explain.hpp"
#include "hmarl/render.hpp"
#include "hmarl/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hmarl;

namespace {

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Divergence:
            return 3;
        case ErrorKind::MissingArtifact:
        case ErrorKind::Checkpoint:
            return 4;
        case ErrorKind::InternalConsistency:
            return 1;
        default:
            return 2;
    }
}

struct Common {
    std::string config;
    std::string out;
    int workers = 0;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

void add_common(CLI::App* cmd, Common& c, bool config_required) {
    auto* opt = cmd->add_option("--config", c.config, "JSON run configuration");
    if (config_required) opt->required();
    cmd->add_option("--out", c.out, "Output directory (overrides config and HMARL_OUTPUT_DIR)");
    cmd->add_option("--workers", c.workers, "Worker threads (results do not depend on it)")->check(CLI::NonNegativeNumber);
    cmd->add_option("--seed", c.seed, "Root seed (overrides the config)");
}

RunConfig load(const Common& c) {
    RunConfig cfg = c.config.empty() ? RunConfig{} : load_run_config(c.config);
    if (c.seed_set) cfg.seed = c.seed;
    if (c.workers > 0) {
        cfg.workers = c.workers;
        cfg.ppo.workers = c.workers;
    }
    return cfg;
}

fs::path output_dir(const Common& c, const RunConfig& cfg) {
    fs::path dir;
    if (!c.out.empty()) {
        dir = c.out;
    } else if (!cfg.output_dir.empty()) {
        dir = cfg.output_dir;
    } else if (const char* env = std::getenv("HMARL_OUTPUT_DIR"); env && *env) {
        dir = env;
    } else {
        dir = "hmarl_out";
    }
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(ErrorKind::InvalidInput, "cannot write " + path.string());
    f << text;
}

std::string read_text(const fs::path& path, const std::string& what) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail(ErrorKind::MissingArtifact, what + " not found: " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Timestamps live only in the sidecar so the primary artifacts stay byte-stable.
void write_meta(const fs::path& path, const std::string& command, const RunConfig& cfg, json extra) {
    json meta = {{"command", command}, {"created_utc", utc_now()}, {"config", json::parse(to_json(cfg))}};
    for (auto& [k, v] : extra.items()) meta[k] = v;
    write_text(path, meta.dump(2) + "\n");
}

PolicyRole role_of(Mode m) { return static_cast<PolicyRole>(static_cast<int>(m)); }

int commander_m(const PolicyNet& net) {
    if (auto it = net.tags.find("m"); it != net.tags.end()) return std::stoi(it->second);
    return (net.input_width() - commander_obs_width(0)) / (commander_obs_width(1) - commander_obs_width(0));
}

LowLevelPolicySet frozen_controllers(const std::string& dir) {
    if (dir.empty()) fail(ErrorKind::InvalidConfig, "--controllers is required");
    auto set = load_controller_set(dir);
    for (auto& n : set.nets) n.frozen = true;
    return set;
}

// ---------------------------------------------------------------------------

struct TrainLowOpts {
    Common common;
    std::string mode;
    std::string trunk_from;
};

int cmd_train_low(const TrainLowOpts& o) {
    auto cfg = load(o.common);
    const Mode mode = mode_from_string(o.mode);
    const auto dir = output_dir(o.common, cfg);
    const std::string name(to_string(mode));

    LowLevelTrainConfig tc;
    tc.ppo = cfg.ppo;
    tc.league = cfg.league;
    tc.scenario = cfg.scenario;
    tc.ppo.seed = derive_seed(cfg.seed, {name_tag("train"), static_cast<std::uint64_t>(mode)});

    PolicyNet net;
    if (!o.trunk_from.empty()) {
        const auto source = load_checkpoint(o.trunk_from);
        if (source.role == PolicyRole::Commander)
            fail(ErrorKind::InvalidConfig, "--trunk-from needs a low-level controller checkpoint");
        auto trunk = std::make_shared<Trunk>(*source.trunk);
        Rng rng(derive_seed(tc.ppo.seed, {name_tag("head")}));
        net = make_policy_net(role_of(mode), trunk, cfg.net.head_hidden, kLowLevelHeads, rng);
        net.tags["trunk_digest"] = hex64(trunk_digest(*trunk));
        tc.freeze_trunk = true;
    } else {
        auto set = make_low_level_set(kLowLevelObsWidth, tc.ppo.seed, cfg.net);
        net = set[static_cast<int>(mode)];
    }

    std::ofstream metrics(dir / (name + "_metrics.csv"), std::ios::binary);
    write_metrics_header(metrics);
    const auto result = train_low_level(mode, net, tc, [&](const UpdateMetrics& m) {
        write_metrics_row(metrics, m);
        if (m.update % 10 == 0)
            std::cerr << name << " stage " << m.stage << " update " << m.update << " steps " << m.env_steps
                      << " return " << m.return_mean << "\n";
    });
    metrics.close();

    json stages = json::array();
    for (std::size_t k = 0; k < result.stage_snapshots.size(); ++k) {
        auto snap = result.stage_snapshots[k];
        snap.frozen = true;
        snap.tags["mode"] = name;
        const auto path = dir / (name + "_stage" + std::to_string(k) + ".ckpt");
        save_checkpoint(snap, path);
        stages.push_back({{"stage", k},
                          {"checkpoint", path.filename().string()},
                          {"converged", static_cast<bool>(result.stage_converged[k])}});
    }
    net.frozen = true;
    net.tags["mode"] = name;
    net.tags["stages"] = std::to_string(result.stage_snapshots.size());
    const auto final_path = dir / (name + ".ckpt");
    save_checkpoint(net, final_path);

    const std::int64_t steps = result.metrics.empty() ? 0 : result.metrics.back().env_steps;
    write_meta(dir / (name + ".meta.json"), "train-low", cfg,
               {{"mode", name},
                {"checkpoint", final_path.filename().string()},
                {"parameter_digest", hex64(parameter_digest(net))},
                {"updates", result.metrics.size()},
                {"env_steps", steps},
                {"stages", stages}});
    std::cout << final_path.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct TrainCommanderOpts {
    Common common;
    int m = 3;
    std::string composition = "homo";
    std::string controllers;
};

int cmd_train_commander(const TrainCommanderOpts& o) {
    auto cfg = load(o.common);
    const auto controllers = frozen_controllers(o.controllers);
    const auto dir = output_dir(o.common, cfg);

    CommanderTrainConfig cc;
    cc.ppo = cfg.ppo;
    cc.m = o.m;
    cc.scenario = cfg.scenario;
    cc.scenario.composition = composition_from_string(o.composition);
    cc.opponent_pool = cfg.commander.opponent_pool;
    cc.net = cfg.net;
    cc.ppo.seed = derive_seed(cfg.seed, {name_tag("commander"), static_cast<std::uint64_t>(o.m),
                                         static_cast<std::uint64_t>(cc.scenario.composition)});

    const std::string name =
        "commander_m" + std::to_string(o.m) + "_" + std::string(to_string(cc.scenario.composition));
    std::ofstream metrics(dir / (name + "_metrics.csv"), std::ios::binary);
    write_metrics_header(metrics);
    auto result = train_commander(controllers, cc, [&](const UpdateMetrics& m) {
        write_metrics_row(metrics, m);
        if (m.update % 10 == 0)
            std::cerr << name << " update " << m.update << " steps " << m.env_steps << " return " << m.return_mean
                      << "\n";
    });
    metrics.close();

    result.commander.frozen = true;
    const auto path = dir / (name + ".ckpt");
    save_checkpoint(result.commander, path);
    write_meta(dir / (name + ".meta.json"), "train-commander", cfg,
               {{"m", o.m},
                {"composition", std::string(to_string(cc.scenario.composition))},
                {"checkpoint", path.filename().string()},
                {"parameter_digest", hex64(parameter_digest(result.commander))},
                {"updates", result.metrics.size()}});
    std::cout << path.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

// Team specs: random | idle | modes:attack,engage | commander:<checkpoint>
ControllerFactory team_factory(const std::string& spec, const std::string& controllers_dir) {
    if (spec == "random") return random_opponents();
    if (spec == "idle") return [] { return std::make_unique<IdleController>(); };
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (kind == "modes") {
        std::vector<Mode> pool;
        std::stringstream ss(arg);
        for (std::string item; std::getline(ss, item, ',');) pool.push_back(mode_from_string(item));
        if (pool.empty()) fail(ErrorKind::InvalidConfig, "modes: needs at least one mode");
        auto set = std::make_shared<LowLevelPolicySet>(frozen_controllers(controllers_dir));
        return [set, pool] {
            const std::array<const PolicyNet*, kNumModes> nets = {&(*set)[0], &(*set)[1], &(*set)[2]};
            return std::make_unique<FixedModeController>(nets, pool);
        };
    }
    if (kind == "commander") {
        auto set = std::make_shared<LowLevelPolicySet>(frozen_controllers(controllers_dir));
        auto commander = std::make_shared<PolicyNet>(load_checkpoint(arg, PolicyRole::Commander));
        const int m = commander_m(*commander);
        return [set, commander, m] { return std::make_unique<CommanderController>(*commander, m, *set); };
    }
    fail(ErrorKind::InvalidConfig, "unknown team spec '" + spec + "'");
}

struct EvalOpts {
    Common common;
    std::string agents;
    std::string opponents = "random";
    std::string controllers;
    int episodes = -1;
};

int cmd_eval(const EvalOpts& o) {
    auto cfg = load(o.common);
    const int episodes = o.episodes >= 0 ? o.episodes : cfg.eval.episodes;
    if (episodes < 1) fail(ErrorKind::InvalidConfig, "--episodes must be >= 1");
    const auto agents = team_factory(o.agents, o.controllers);
    const auto opponents = team_factory(o.opponents, o.controllers);
    const auto seed = derive_seed(cfg.seed, {name_tag("eval")});
    const auto r = evaluate(agents, opponents, cfg.scenario, episodes, seed, cfg.workers);

    json out = {{"agents", o.agents},
                {"opponents", o.opponents},
                {"episodes", r.episodes},
                {"seed", seed},
                {"win", r.win},
                {"loss", r.loss},
                {"draw", r.draw},
                {"opponent_kill_fraction", r.opponent_kill_fraction},
                {"any_kill_fraction", r.any_kill_fraction},
                {"mean_ticks", r.mean_ticks}};
    const auto text = out.dump(2) + "\n";
    std::cout << text;
    if (!o.common.out.empty() || !cfg.output_dir.empty()) write_text(output_dir(o.common, cfg) / "eval.json", text);
    return 0;
}

// ---------------------------------------------------------------------------

struct ExplainOpts {
    Common common;
    std::string commanders;
    std::string commander;
    std::string controllers;
    std::string cells;
    int episodes = 0;
    bool rule = false;
};

void write_sweep(const fs::path& dir, const std::string& kind, const std::vector<ActivationRecord>& records,
                 const std::array<Axis, 3>& axes) {
    std::ofstream csv(dir / (kind + "_records.csv"), std::ios::binary);
    write_records_csv(csv, records, axes);
    csv.close();
    write_text(dir / (kind + "_grid.json"), grid_to_json(aggregate(records, axes, kind)));
}

int cmd_explain_global(const ExplainOpts& o) {
    auto cfg = load(o.common);
    auto spec = cfg.global_sweep;
    spec.seed = derive_seed(cfg.seed, {name_tag("sweep"), name_tag("global")});
    if (o.episodes > 0) spec.episodes_per_cell = o.episodes;
    spec.validate();
    if (o.commanders.empty()) fail(ErrorKind::InvalidConfig, "--commanders is required");

    const auto controllers = frozen_controllers(o.controllers);
    std::map<int, PolicyNet> commanders;
    for (int m : spec.sensing) {
        const auto path = fs::path(o.commanders) /
                          ("commander_m" + std::to_string(m) + "_" + std::string(to_string(spec.composition)) + ".ckpt");
        if (!fs::exists(path)) fail(ErrorKind::MissingArtifact, "commander checkpoint not found: " + path.string());
        commanders.emplace(m, load_checkpoint(path, PolicyRole::Commander));
    }
    const int cell_count = static_cast<int>(enumerate_cells(spec).size());
    const auto filter = o.cells.empty() ? std::vector<int>{} : parse_cell_filter(o.cells, cell_count);
    const auto result = run_global_sweep(spec, commanders, controllers, cfg.workers, filter);

    const auto dir = output_dir(o.common, cfg);
    write_sweep(dir, "global", result.records, global_axes(spec));
    std::ostringstream cells;
    cells << "cell,strategy,difference,m,episodes,max_ticks,max_high_level_steps\n";
    for (const auto& c : result.cells)
        cells << c.cell.index << ',' << to_string(c.cell.strategy) << ',' << c.cell.difference << ',' << c.cell.m
              << ',' << c.episodes << ',' << c.max_ticks << ',' << c.max_high_level_steps << '\n';
    write_text(dir / "global_cells.csv", cells.str());
    write_meta(dir / "global.meta.json", "explain global", cfg,
               {{"cells_run", result.cells.size()}, {"cell_count", cell_count}, {"records", result.records.size()}});
    std::cout << (dir / "global_grid.json").string() << "\n";
    return 0;
}

int cmd_explain_local(const ExplainOpts& o) {
    auto cfg = load(o.common);
    auto spec = cfg.local_sweep;
    spec.seed = derive_seed(cfg.seed, {name_tag("sweep"), name_tag("local")});
    if (o.episodes > 0) spec.samples_per_cell = o.episodes;
    spec.validate();

    std::vector<ActivationRecord> records;
    if (o.rule) {
        records = run_local_sweep(spec, rule_commander(), cfg.workers);
    } else {
        if (o.commander.empty()) fail(ErrorKind::InvalidConfig, "local sweep needs --commander or --rule");
        records = run_local_sweep(spec, load_checkpoint(o.commander, PolicyRole::Commander), cfg.workers);
    }
    const auto dir = output_dir(o.common, cfg);
    write_sweep(dir, "local", records, local_axes(spec));
    write_meta(dir / "local.meta.json", "explain local", cfg,
               {{"source", o.rule ? std::string("rule") : o.commander}, {"records", records.size()}});
    std::cout << (dir / "local_grid.json").string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct RenderOpts {
    std::string grid;
    std::string slice_axis;
    std::string out;
};

int cmd_render(const RenderOpts& o) {
    const auto grid = grid_from_json(read_text(o.grid, "grid"));
    const auto files = render_heatmaps(grid, o.slice_axis);
    fs::path dir = o.out.empty() ? fs::path(o.grid).parent_path() : fs::path(o.out);
    if (dir.empty()) dir = ".";
    fs::create_directories(dir);
    for (const auto& f : files) {
        write_text(dir / f.name, f.content);
        std::cout << (dir / f.name).string() << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------

json scenario_json(const ScenarioConfig& s) {
    return {{"n_agents", s.n_agents},
            {"n_opponents", s.n_opponents},
            {"composition", std::string(to_string(s.composition))},
            {"map_size", s.map_size},
            {"max_ticks", s.max_ticks},
            {"dt", s.dt},
            {"seed", s.seed}};
}

ScenarioConfig scenario_from_json(const std::string& text) {
    try {
        const auto j = json::parse(text);
        ScenarioConfig s;
        s.n_agents = j.at("n_agents").get<int>();
        s.n_opponents = j.at("n_opponents").get<int>();
        s.composition = composition_from_string(j.at("composition").get<std::string>());
        s.map_size = j.at("map_size").get<double>();
        s.max_ticks = j.at("max_ticks").get<int>();
        s.dt = j.at("dt").get<double>();
        s.seed = j.at("seed").get<std::uint64_t>();
        return s;
    } catch (const json::exception& e) {
        fail(ErrorKind::InvalidInput, std::string("malformed scenario file: ") + e.what());
    }
}

struct SimulateOpts {
    Common common;
    std::string agents = "random";
    std::string opponents = "random";
    std::string controllers;
    std::string log;
    int episode = 0;
};

int cmd_simulate(const SimulateOpts& o) {
    auto cfg = load(o.common);
    ScenarioConfig sc = cfg.scenario;
    sc.seed = derive_seed(cfg.seed, {name_tag("simulate"), static_cast<std::uint64_t>(o.episode)});
    const auto agent_factory = team_factory(o.agents, o.controllers);
    const auto opponent_factory = team_factory(o.opponents, o.controllers);
    auto agents = agent_factory();
    auto opponents = opponent_factory();
    auto world = spawn_scenario(sc);
    Rng rng(derive_seed(sc.seed, {name_tag("actions")}));
    std::ostringstream log;
    const auto r = run_episode(world, *agents, *opponents, rng,
                               [&](const WorldState& w, const JointActions& a, const StepEvents& e, const ModeTable& m) {
                                   log << format_tick_record(w, a, e, m) << '\n';
                               });
    const fs::path path = o.log.empty() ? output_dir(o.common, cfg) / "episode.jsonl" : fs::path(o.log);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_text(path, log.str());
    write_text(path.string() + ".scenario.json", scenario_json(sc).dump(2) + "\n");
    std::cout << json{{"log", path.string()},
                      {"outcome", std::string(to_string(r.outcome))},
                      {"ticks", r.ticks},
                      {"opponents_destroyed", r.opponents_destroyed},
                      {"agents_destroyed", r.agents_destroyed}}
                     .dump()
              << "\n";
    return 0;
}

struct ReplayOpts {
    std::string log;
    std::string scenario;
    bool verify = false;
};

int cmd_replay(const ReplayOpts& o) {
    const auto text = read_text(o.log, "episode log");
    std::istringstream in(text);
    const auto ticks = read_episode_log(in);
    for (const auto& line : timeline(ticks)) std::cout << line << "\n";
    if (o.verify || !o.scenario.empty()) {
        const std::string scenario_path = o.scenario.empty() ? o.log + ".scenario.json" : o.scenario;
        const auto sc = scenario_from_json(read_text(scenario_path, "scenario file"));
        if (replay_episode(sc, ticks) != text)
            fail(ErrorKind::LogIntegrity, "re-simulated log differs from " + o.log);
        std::cout << "replay: byte-identical (" << ticks.size() << " ticks)\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hierarchical multi-agent air combat: training, evaluation and explanation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "hmarl 0.1.0");

    TrainLowOpts tl;
    auto* train_low = app.add_subcommand("train-low", "Train one low-level manoeuvre controller");
    add_common(train_low, tl.common, true);
    train_low->add_option("--mode", tl.mode, "attack | engage | defend")
        ->required()
        ->check(CLI::IsMember({"attack", "engage", "defend"}));
    train_low->add_option("--trunk-from", tl.trunk_from, "Reuse and freeze the trunk of this checkpoint");

    TrainCommanderOpts tcmd;
    auto* train_cmd = app.add_subcommand("train-commander", "Train a commander over frozen controllers");
    add_common(train_cmd, tcmd.common, true);
    train_cmd->add_option("--m", tcmd.m, "Sensing range (contacts per side)")->required()->check(CLI::Range(1, 5));
    train_cmd->add_option("--composition", tcmd.composition, "homo | hetero")
        ->check(CLI::IsMember({"homo", "hetero"}));
    train_cmd->add_option("--controllers", tcmd.controllers, "Directory with attack/engage/defend checkpoints")
        ->required();

    EvalOpts ev;
    auto* eval = app.add_subcommand("eval", "Play evaluation episodes and report win/loss/draw");
    add_common(eval, ev.common, false);
    eval->add_option("--agents", ev.agents, "random | idle | modes:<m1,m2,..> | commander:<ckpt>")->required();
    eval->add_option("--opponents", ev.opponents, "Same syntax as --agents");
    eval->add_option("--controllers", ev.controllers, "Controller directory for modes:/commander: teams");
    eval->add_option("--episodes", ev.episodes, "Episode count (default: config eval.episodes)");

    ExplainOpts ex;
    auto* explain = app.add_subcommand("explain", "Run an explanation sweep");
    explain->require_subcommand(1);
    auto* ex_global = explain->add_subcommand("global", "Opponent strategy x combat difference x sensing range");
    add_common(ex_global, ex.common, false);
    ex_global->add_option("--commanders", ex.commanders, "Directory with commander_m<m>_<comp>.ckpt files");
    ex_global->add_option("--controllers", ex.controllers, "Controller directory")->required();
    ex_global->add_option("--cells", ex.cells, "Cell indices to run, e.g. 0,5,10-19");
    ex_global->add_option("--episodes", ex.episodes, "Episodes per cell (overrides config)");
    auto* ex_local = explain->add_subcommand("local", "Distance x ATA x AA of the nearest hostile");
    add_common(ex_local, ex.common, false);
    ex_local->add_option("--commander", ex.commander, "m = 3 commander checkpoint");
    ex_local->add_flag("--rule", ex.rule, "Use the scripted rule commander");
    ex_local->add_option("--samples", ex.episodes, "Samples per cell (overrides config)");

    RenderOpts rd;
    auto* render = app.add_subcommand("render", "Render a grid JSON as SVG heatmaps");
    render->add_option("--grid", rd.grid, "Grid JSON file")->required();
    render->add_option("--slice-axis", rd.slice_axis, "Axis to slice on (one SVG per value)")->required();
    render->add_option("--out", rd.out, "Output directory (default: next to the grid)");

    SimulateOpts sim;
    auto* simulate = app.add_subcommand("simulate", "Play one episode and write its log");
    add_common(simulate, sim.common, false);
    simulate->add_option("--agents", sim.agents, "Team spec as in eval");
    simulate->add_option("--opponents", sim.opponents, "Team spec as in eval");
    simulate->add_option("--controllers", sim.controllers, "Controller directory");
    simulate->add_option("--log", sim.log, "Log path (default: <out>/episode.jsonl)");
    simulate->add_option("--episode", sim.episode, "Episode index (selects the seed)")->check(CLI::NonNegativeNumber);

    ReplayOpts rp;
    auto* replay = app.add_subcommand("replay", "Print the event timeline of an episode log");
    replay->add_option("--log", rp.log, "JSON-lines episode log")->required();
    replay->add_option("--scenario", rp.scenario, "Scenario file for re-simulation");
    replay->add_flag("--verify", rp.verify, "Re-simulate and require a byte-identical log");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    for (Common* c : {&tl.common, &tcmd.common, &ev.common, &ex.common, &sim.common}) {
        for (auto* sub : {train_low, train_cmd, eval, ex_global, ex_local, simulate})
            if (sub->count("--seed") > 0) c->seed_set = true;
    }

    try {
        if (*train_low) return cmd_train_low(tl);
        if (*train_cmd) return cmd_train_commander(tcmd);
        if (*eval) return cmd_eval(ev);
        if (*ex_global) return cmd_explain_global(ex);
        if (*ex_local) return cmd_explain_local(ex);
        if (*render) return cmd_render(rd);
        if (*simulate) return cmd_simulate(sim);
        if (*replay) return cmd_replay(rp);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
