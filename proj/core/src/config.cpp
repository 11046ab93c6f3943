#include "hmarl/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "hmarl/errors.hpp"

namespace hmarl {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// Walks one JSON object, rejecting keys it was not asked about.
class Section {
public:
    Section(const json& j, std::string path, std::set<std::string> allowed) : j_(j), path_(std::move(path)) {
        if (!j.is_object()) fail(ErrorKind::InvalidConfig, "'" + path_ + "' must be an object");
        for (const auto& [key, value] : j.items())
            if (!allowed.count(key)) fail(ErrorKind::InvalidConfig, "unknown key '" + where(key) + "'");
    }

    template <typename T>
    void get(const char* key, T& out) const {
        if (!j_.contains(key)) return;
        const auto& v = j_.at(key);
        try {
            if constexpr (std::is_same_v<T, bool>) {
                if (!v.is_boolean()) throw std::invalid_argument("expected a boolean");
            } else if constexpr (std::is_integral_v<T>) {
                if (!v.is_number_integer()) throw std::invalid_argument("expected an integer");
                if constexpr (std::is_unsigned_v<T>) {
                    if (v.is_number_unsigned()) {
                        out = v.get<T>();
                        return;
                    }
                    if (v.get<std::int64_t>() < 0) throw std::invalid_argument("expected a non-negative integer");
                }
            } else if constexpr (std::is_floating_point_v<T>) {
                if (!v.is_number()) throw std::invalid_argument("expected a number");
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v.is_string()) throw std::invalid_argument("expected a string");
            }
            out = v.get<T>();
        } catch (const std::exception& e) {
            fail(ErrorKind::InvalidConfig, "'" + where(key) + "': " + e.what());
        }
    }

    bool has(const char* key) const { return j_.contains(key); }
    const json& at(const char* key) const { return j_.at(key); }
    std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    const json& j_;
    std::string path_;
};

template <typename T>
std::vector<T> read_list(const Section& s, const char* key, std::vector<T> fallback) {
    if (!s.has(key)) return fallback;
    const auto& v = s.at(key);
    if (!v.is_array()) fail(ErrorKind::InvalidConfig, "'" + s.where(key) + "' must be an array");
    std::vector<T> out;
    for (const auto& e : v) {
        if constexpr (std::is_integral_v<T>) {
            if (!e.is_number_integer()) fail(ErrorKind::InvalidConfig, "'" + s.where(key) + "' must hold integers");
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!e.is_number()) fail(ErrorKind::InvalidConfig, "'" + s.where(key) + "' must hold numbers");
        } else {
            if (!e.is_string()) fail(ErrorKind::InvalidConfig, "'" + s.where(key) + "' must hold strings");
        }
        out.push_back(e.get<T>());
    }
    return out;
}

std::vector<Mode> read_modes(const Section& s, const char* key, std::vector<Mode> fallback) {
    if (!s.has(key)) return fallback;
    std::vector<Mode> out;
    for (const auto& name : read_list<std::string>(s, key, {})) out.push_back(mode_from_string(name));
    if (out.empty()) fail(ErrorKind::InvalidConfig, "'" + s.where(key) + "' must not be empty");
    return out;
}

void read_scenario(const json& j, ScenarioConfig& sc) {
    Section s(j, "scenario", {"n_agents", "n_opponents", "composition", "map_size", "max_ticks"});
    s.get("n_agents", sc.n_agents);
    s.get("n_opponents", sc.n_opponents);
    std::string comp(to_string(sc.composition));
    s.get("composition", comp);
    sc.composition = composition_from_string(comp);
    s.get("map_size", sc.map_size);
    s.get("max_ticks", sc.max_ticks);
    if (sc.n_agents < 1 || sc.n_opponents < 1) fail(ErrorKind::InvalidConfig, "team sizes must be >= 1");
    if (!(sc.map_size > 0.0)) fail(ErrorKind::InvalidConfig, "scenario.map_size must be > 0");
    if (sc.max_ticks < 1 || sc.max_ticks > kMaxTicks)
        fail(ErrorKind::InvalidConfig, "scenario.max_ticks must be in [1, " + std::to_string(kMaxTicks) + "]");
}

void read_ppo(const json& j, PpoConfig& p) {
    Section s(j, "ppo",
              {"gamma", "gae_lambda", "clip", "learning_rate", "epochs_per_update", "minibatch_size", "entropy_coef",
               "value_coef", "max_grad_norm", "reward_scale", "rollout_ticks", "num_envs", "total_env_steps"});
    s.get("gamma", p.gamma);
    s.get("gae_lambda", p.gae_lambda);
    s.get("clip", p.clip);
    s.get("learning_rate", p.learning_rate);
    s.get("epochs_per_update", p.epochs_per_update);
    s.get("minibatch_size", p.minibatch_size);
    s.get("entropy_coef", p.entropy_coef);
    s.get("value_coef", p.value_coef);
    s.get("max_grad_norm", p.max_grad_norm);
    s.get("reward_scale", p.reward_scale);
    s.get("rollout_ticks", p.rollout_ticks);
    s.get("num_envs", p.num_envs);
    s.get("total_env_steps", p.total_env_steps);
}

void read_league(const json& j, LeagueConfig& l) {
    Section s(j, "league", {"stages", "window", "threshold", "min_updates"});
    s.get("stages", l.stages);
    s.get("window", l.window);
    s.get("threshold", l.threshold);
    s.get("min_updates", l.min_updates);
    if (l.stages < 1) fail(ErrorKind::InvalidConfig, "league.stages must be >= 1");
    if (l.window < 1) fail(ErrorKind::InvalidConfig, "league.window must be >= 1");
    if (!(l.threshold >= 0.0)) fail(ErrorKind::InvalidConfig, "league.threshold must be >= 0");
}

void read_net(const json& j, NetArchitecture& n) {
    Section s(j, "net", {"trunk_hidden", "head_hidden"});
    n.trunk_hidden = read_list<int>(s, "trunk_hidden", n.trunk_hidden);
    n.head_hidden = read_list<int>(s, "head_hidden", n.head_hidden);
    if (n.trunk_hidden.empty()) fail(ErrorKind::InvalidConfig, "net.trunk_hidden must not be empty");
    for (const auto* v : {&n.trunk_hidden, &n.head_hidden})
        for (int w : *v)
            if (w < 1) fail(ErrorKind::InvalidConfig, "layer widths must be >= 1");
}

void read_sweep(const json& j, RunConfig& c) {
    Section s(j, "sweep", {"global", "local"});
    if (s.has("global")) {
        auto& g = c.global_sweep;
        Section gs(s.at("global"), "sweep.global",
                   {"strategies", "differences", "sensing", "episodes_per_cell", "baseline_team", "composition",
                    "max_ticks"});
        if (gs.has("strategies")) {
            g.strategies.clear();
            for (const auto& name : read_list<std::string>(gs, "strategies", {}))
                g.strategies.push_back(opponent_strategy_from_string(name));
        }
        g.differences = read_list<int>(gs, "differences", g.differences);
        g.sensing = read_list<int>(gs, "sensing", g.sensing);
        gs.get("episodes_per_cell", g.episodes_per_cell);
        gs.get("baseline_team", g.baseline_team);
        std::string comp(to_string(g.composition));
        gs.get("composition", comp);
        g.composition = composition_from_string(comp);
        gs.get("max_ticks", g.max_ticks);
        g.validate();
    }
    if (s.has("local")) {
        auto& l = c.local_sweep;
        Section ls(s.at("local"), "sweep.local", {"d_bins", "ata_bins", "aa_bins", "m", "samples_per_cell"});
        l.d_bins = read_list<double>(ls, "d_bins", l.d_bins);
        l.ata_bins = read_list<double>(ls, "ata_bins", l.ata_bins);
        l.aa_bins = read_list<double>(ls, "aa_bins", l.aa_bins);
        ls.get("m", l.m);
        ls.get("samples_per_cell", l.samples_per_cell);
        l.validate();
    }
}

}  // namespace

Mode mode_from_string(std::string_view s) {
    for (auto m : {Mode::Attack, Mode::Engage, Mode::Defend})
        if (to_string(m) == s) return m;
    fail(ErrorKind::InvalidConfig, "unknown mode '" + std::string(s) + "'");
}

RunConfig parse_run_config(std::string_view json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        fail(ErrorKind::InvalidConfig, std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig c;
    Section top(j, "",
                {"seed", "output_dir", "workers", "scenario", "ppo", "league", "net", "commander", "eval", "sweep"});
    top.get("seed", c.seed);
    top.get("output_dir", c.output_dir);
    top.get("workers", c.workers);
    if (c.workers < 1) fail(ErrorKind::InvalidConfig, "workers must be >= 1");
    if (top.has("scenario")) read_scenario(top.at("scenario"), c.scenario);
    if (top.has("ppo")) read_ppo(top.at("ppo"), c.ppo);
    c.ppo.workers = c.workers;
    c.ppo.validate();
    if (top.has("league")) read_league(top.at("league"), c.league);
    if (top.has("net")) read_net(top.at("net"), c.net);
    if (top.has("commander")) {
        Section s(top.at("commander"), "commander", {"m", "opponent_pool"});
        s.get("m", c.commander.m);
        c.commander.opponent_pool = read_modes(s, "opponent_pool", c.commander.opponent_pool);
        if (c.commander.m < 1 || c.commander.m > kMaxSensing)
            fail(ErrorKind::InvalidConfig, "commander.m must be in [1, 5]");
    }
    if (top.has("eval")) {
        Section s(top.at("eval"), "eval", {"episodes"});
        s.get("episodes", c.eval.episodes);
        if (c.eval.episodes < 1) fail(ErrorKind::InvalidConfig, "eval.episodes must be >= 1");
    }
    if (top.has("sweep")) read_sweep(top.at("sweep"), c);
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::InvalidConfig, "cannot read config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

std::string to_json(const RunConfig& c) {
    ordered_json j;
    j["seed"] = c.seed;
    j["output_dir"] = c.output_dir;
    j["workers"] = c.workers;
    j["scenario"] = {{"n_agents", c.scenario.n_agents},
                     {"n_opponents", c.scenario.n_opponents},
                     {"composition", std::string(to_string(c.scenario.composition))},
                     {"map_size", c.scenario.map_size},
                     {"max_ticks", c.scenario.max_ticks}};
    const auto& p = c.ppo;
    j["ppo"] = {{"gamma", p.gamma},
                {"gae_lambda", p.gae_lambda},
                {"clip", p.clip},
                {"learning_rate", p.learning_rate},
                {"epochs_per_update", p.epochs_per_update},
                {"minibatch_size", p.minibatch_size},
                {"entropy_coef", p.entropy_coef},
                {"value_coef", p.value_coef},
                {"max_grad_norm", p.max_grad_norm},
                {"reward_scale", p.reward_scale},
                {"rollout_ticks", p.rollout_ticks},
                {"num_envs", p.num_envs},
                {"total_env_steps", p.total_env_steps}};
    j["league"] = {{"stages", c.league.stages},
                   {"window", c.league.window},
                   {"threshold", c.league.threshold},
                   {"min_updates", c.league.min_updates}};
    j["net"] = {{"trunk_hidden", c.net.trunk_hidden}, {"head_hidden", c.net.head_hidden}};
    std::vector<std::string> pool;
    for (auto m : c.commander.opponent_pool) pool.emplace_back(to_string(m));
    j["commander"] = {{"m", c.commander.m}, {"opponent_pool", pool}};
    j["eval"] = {{"episodes", c.eval.episodes}};
    std::vector<std::string> strategies;
    for (auto s : c.global_sweep.strategies) strategies.emplace_back(to_string(s));
    const auto& g = c.global_sweep;
    const auto& l = c.local_sweep;
    j["sweep"] = {{"global",
                   {{"strategies", strategies},
                    {"differences", g.differences},
                    {"sensing", g.sensing},
                    {"episodes_per_cell", g.episodes_per_cell},
                    {"baseline_team", g.baseline_team},
                    {"composition", std::string(to_string(g.composition))},
                    {"max_ticks", g.max_ticks}}},
                  {"local",
                   {{"d_bins", l.d_bins},
                    {"ata_bins", l.ata_bins},
                    {"aa_bins", l.aa_bins},
                    {"m", l.m},
                    {"samples_per_cell", l.samples_per_cell}}}};
    return j.dump(2) + "\n";
}

}  // namespace hmarl
