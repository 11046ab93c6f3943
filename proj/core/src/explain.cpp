#include "hmarl/explain.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <set>

#include "json.hpp"

#include "hmarl/errors.hpp"

namespace hmarl {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

template <typename T>
bool has_duplicates(std::vector<T> v) {
    std::sort(v.begin(), v.end());
    return std::adjacent_find(v.begin(), v.end()) != v.end();
}

bool strictly_ascending(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i - 1] < v[i])) return false;
    return true;
}

}  // namespace

std::string_view to_string(OpponentStrategy s) noexcept {
    switch (s) {
        case OpponentStrategy::Attack: return "attack";
        case OpponentStrategy::Engage: return "engage";
        case OpponentStrategy::Defend: return "defend";
        case OpponentStrategy::Mixed: return "mixed";
    }
    return "?";
}

OpponentStrategy opponent_strategy_from_string(std::string_view s) {
    for (auto v : {OpponentStrategy::Attack, OpponentStrategy::Engage, OpponentStrategy::Defend, OpponentStrategy::Mixed})
        if (to_string(v) == s) return v;
    fail(ErrorKind::InvalidConfig, "unknown opponent strategy '" + std::string(s) + "'");
}

std::vector<Mode> strategy_modes(OpponentStrategy s) {
    switch (s) {
        case OpponentStrategy::Attack: return {Mode::Attack};
        case OpponentStrategy::Engage: return {Mode::Engage};
        case OpponentStrategy::Defend: return {Mode::Defend};
        case OpponentStrategy::Mixed: return {Mode::Attack, Mode::Engage, Mode::Defend};
    }
    return {};
}

std::string Axis::label(std::size_t i) const {
    if (i < labels.size()) return labels[i];
    return format_number(values.at(i));
}

// ---------------------------------------------------------------------------
// Global sweep

void GlobalSweepSpec::validate() const {
    if (strategies.empty() || differences.empty() || sensing.empty())
        fail(ErrorKind::InvalidConfig, "global sweep axes must be non-empty");
    if (has_duplicates(strategies) || has_duplicates(differences) || has_duplicates(sensing))
        fail(ErrorKind::InvalidConfig, "global sweep axes must not repeat values");
    if (baseline_team < 1) fail(ErrorKind::InvalidConfig, "baseline team size must be >= 1");
    for (int k : differences)
        if (baseline_team + k < 1)
            fail(ErrorKind::InvalidConfig, "combat difference " + std::to_string(k) + " leaves no agents");
    for (int m : sensing)
        if (m < 1 || m > kMaxSensing) fail(ErrorKind::InvalidConfig, "sensing range m must be in [1, 5]");
    if (episodes_per_cell < 1) fail(ErrorKind::InvalidConfig, "episodes_per_cell must be >= 1");
    if (max_ticks < 1 || max_ticks > kMaxTicks)
        fail(ErrorKind::InvalidConfig, "max_ticks must be in [1, " + std::to_string(kMaxTicks) + "]");
}

std::vector<GlobalCell> enumerate_cells(const GlobalSweepSpec& spec) {
    spec.validate();
    std::vector<GlobalCell> cells;
    for (auto s : spec.strategies)
        for (int k : spec.differences)
            for (int m : spec.sensing) cells.push_back({static_cast<int>(cells.size()), s, k, m});
    return cells;
}

std::array<Axis, 3> global_axes(const GlobalSweepSpec& spec) {
    Axis strategy{"strategy", {}, {}};
    for (auto s : spec.strategies) {
        strategy.values.push_back(static_cast<double>(static_cast<int>(s)));
        strategy.labels.emplace_back(to_string(s));
    }
    Axis diff{"difference", {}, {}};
    for (int k : spec.differences) diff.values.push_back(k);
    Axis m{"m", {}, {}};
    for (int v : spec.sensing) m.values.push_back(v);
    return {strategy, diff, m};
}

ScenarioConfig cell_scenario(const GlobalSweepSpec& spec, const GlobalCell& cell, int episode) {
    ScenarioConfig sc;
    sc.n_agents = spec.baseline_team + cell.difference;
    sc.n_opponents = spec.baseline_team;
    sc.composition = spec.composition;
    sc.map_size = spec.map_size;
    sc.max_ticks = spec.max_ticks;
    sc.seed = derive_seed(spec.seed, {name_tag("cell"), static_cast<std::uint64_t>(cell.strategy),
                                      static_cast<std::uint64_t>(cell.difference + 1000),
                                      static_cast<std::uint64_t>(cell.m), static_cast<std::uint64_t>(episode)});
    return sc;
}

GlobalSweepResult run_global_sweep(const GlobalSweepSpec& spec, const std::map<int, PolicyNet>& commanders,
                                   const LowLevelPolicySet& controllers, int workers,
                                   const std::vector<int>& cell_filter) {
    const auto all = enumerate_cells(spec);
    for (int m : spec.sensing) {
        const auto it = commanders.find(m);
        if (it == commanders.end())
            fail(ErrorKind::MissingArtifact, "no commander checkpoint for m=" + std::to_string(m));
        if (it->second.input_width() != commander_obs_width(m))
            fail(ErrorKind::Shape, "commander for m=" + std::to_string(m) + " has the wrong input width");
    }
    if (controllers.nets.size() != kNumModes) fail(ErrorKind::InvalidSetup, "controller set must hold three modes");

    std::vector<GlobalCell> cells;
    if (cell_filter.empty()) {
        cells = all;
    } else {
        for (int i : cell_filter) {
            if (i < 0 || i >= static_cast<int>(all.size()))
                fail(ErrorKind::InvalidConfig, "cell index " + std::to_string(i) + " out of range");
            cells.push_back(all[static_cast<std::size_t>(i)]);
        }
    }

    const std::array<const PolicyNet*, kNumModes> nets = {&controllers[0], &controllers[1], &controllers[2]};
    std::vector<std::vector<ActivationRecord>> per_cell(cells.size());
    std::vector<CellRun> runs(cells.size());
    parallel_for(static_cast<int>(cells.size()), workers, [&](int c) {
        const auto& cell = cells[static_cast<std::size_t>(c)];
        auto& out = per_cell[static_cast<std::size_t>(c)];
        auto& run = runs[static_cast<std::size_t>(c)];
        run.cell = cell;
        const auto& commander = commanders.at(cell.m);
        const std::array<double, 3> coords = {static_cast<double>(static_cast<int>(cell.strategy)),
                                              static_cast<double>(cell.difference), static_cast<double>(cell.m)};
        for (int ep = 0; ep < spec.episodes_per_cell; ++ep) {
            const auto sc = cell_scenario(spec, cell, ep);
            auto world = spawn_scenario(sc);
            Rng rng(derive_seed(sc.seed, {name_tag("actions")}));
            CommanderController agents(commander, cell.m, controllers);
            int steps = 0;
            int last_step = -1;
            agents.set_activation_hook([&](int step, const AircraftState& a, Mode mode) {
                out.push_back({coords, ep, step, a.id, type_index(a.type), mode});
                if (step != last_step) {
                    last_step = step;
                    ++steps;
                }
            });
            FixedModeController opponents(nets, strategy_modes(cell.strategy));
            const auto result = run_episode(world, agents, opponents, rng);
            run.episodes += 1;
            run.max_ticks = std::max(run.max_ticks, result.ticks);
            run.max_high_level_steps = std::max(run.max_high_level_steps, steps);
        }
    });

    GlobalSweepResult result;
    result.cells = std::move(runs);
    for (auto& v : per_cell) result.records.insert(result.records.end(), v.begin(), v.end());
    return result;
}

std::vector<int> parse_cell_filter(std::string_view text, int cell_count) {
    std::set<int> out;
    auto parse_int = [&](std::string_view s) {
        int v = 0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size())
            fail(ErrorKind::InvalidConfig, "bad cell filter entry '" + std::string(s) + "'");
        if (v < 0 || v >= cell_count)
            fail(ErrorKind::InvalidConfig, "cell index " + std::to_string(v) + " out of range");
        return v;
    };
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = std::min(text.find(',', pos), text.size());
        const auto token = text.substr(pos, comma - pos);
        const auto dash = token.find('-');
        if (dash == std::string_view::npos) {
            out.insert(parse_int(token));
        } else {
            const int lo = parse_int(token.substr(0, dash));
            const int hi = parse_int(token.substr(dash + 1));
            if (hi < lo) fail(ErrorKind::InvalidConfig, "empty cell range '" + std::string(token) + "'");
            for (int i = lo; i <= hi; ++i) out.insert(i);
        }
        pos = comma + 1;
    }
    return {out.begin(), out.end()};
}

// ---------------------------------------------------------------------------
// Local sweep

void LocalSweepSpec::validate() const {
    if (m != 3) fail(ErrorKind::InvalidConfig, "local sweeps use the m = 3 commander");
    if (samples_per_cell < 1) fail(ErrorKind::InvalidConfig, "samples_per_cell must be >= 1");
    for (const auto* bins : {&d_bins, &ata_bins, &aa_bins})
        if (bins->empty() || !strictly_ascending(*bins))
            fail(ErrorKind::InvalidConfig, "local sweep bins must be non-empty and strictly ascending");
    if (d_bins.front() < kFillerMinDistanceKm || d_bins.back() > kFillerMaxDistanceKm)
        fail(ErrorKind::InvalidConfig, "distance bins must lie in [0.5, 30] km");
    for (const auto* bins : {&ata_bins, &aa_bins})
        if (bins->front() < 0.0 || bins->back() > 180.0)
            fail(ErrorKind::InvalidConfig, "angle bins must lie in [0, 180] degrees");
}

std::array<Axis, 3> local_axes(const LocalSweepSpec& spec) {
    return {Axis{"d", spec.d_bins, {}}, Axis{"ata", spec.ata_bins, {}}, Axis{"aa", spec.aa_bins, {}}};
}

CommanderQuery argmax_query(const PolicyNet& commander) {
    return [&commander](std::span<const double> obs) {
        const auto fr = forward(commander, obs);
        return mode_from_index(argmax_action(fr.logits, commander.head_spec, full_mask(commander.head_spec))[0]);
    };
}

Mode rule_mode(double ata_deg, double aa_deg) noexcept {
    if (aa_deg < 60.0 && ata_deg < 60.0) return Mode::Attack;
    if (aa_deg > 120.0) return Mode::Defend;
    return Mode::Engage;
}

CommanderQuery rule_commander() {
    return [](std::span<const double> obs) {
        const auto off = static_cast<std::size_t>(commander_hostile_offset(0));
        const double ata_n = obs[off + 1];
        const double aa_n = obs[off + 2];
        if (aa_n < 60.0 / 180.0 && ata_n < 60.0 / 180.0) return Mode::Attack;
        if (aa_n > 120.0 / 180.0) return Mode::Defend;
        return Mode::Engage;
    };
}

std::vector<double> synthetic_observation(int m, double d_km, double ata_deg, double aa_deg, Rng& rng) {
    CommanderObservation obs;
    obs.own.x_norm = rng.uniform();
    obs.own.y_norm = rng.uniform();
    obs.own.heading_deg = rng.uniform(0.0, 360.0);
    obs.own.speed_norm = rng.uniform();
    obs.own.ammo_frac = rng.uniform();
    obs.own.type_index = rng.uniform_int(0, 1);
    obs.own.rocket_frac = obs.own.type_index == 0 ? rng.uniform() : 0.0;

    auto contact = [&](double d) {
        return ContactBlock{d, rng.uniform(0.0, 180.0), rng.uniform(0.0, 180.0), rng.uniform_int(0, 1), true};
    };
    obs.hostiles.push_back({d_km, ata_deg, aa_deg, rng.uniform_int(0, 1), true});
    std::vector<double> far;
    for (int k = 1; k < m; ++k) far.push_back(rng.uniform(std::max(d_km, kFillerMinDistanceKm), kFillerMaxDistanceKm));
    std::sort(far.begin(), far.end());
    for (double d : far) obs.hostiles.push_back(contact(d));

    std::vector<double> friends;
    for (int k = 0; k < m; ++k) friends.push_back(rng.uniform(kFillerMinDistanceKm, kFillerMaxDistanceKm));
    std::sort(friends.begin(), friends.end());
    for (double d : friends) obs.friendlies.push_back(contact(d));
    return encode(obs);
}

void check_synthetic_observation(std::span<const double> obs, int m) {
    if (static_cast<int>(obs.size()) != commander_obs_width(m))
        fail(ErrorKind::InternalConsistency, "synthetic observation has the wrong width");
    constexpr double tol = 1e-9;
    for (int side = 0; side < 2; ++side) {
        double prev = -1.0;
        for (int k = 0; k < m; ++k) {
            const int off = side == 0 ? commander_hostile_offset(k) : commander_friendly_offset(m, k);
            const double d = obs[static_cast<std::size_t>(off)];
            const double km = d * kObsDistanceScaleKm;
            if (obs[static_cast<std::size_t>(off + 4)] != 1.0)
                fail(ErrorKind::InternalConsistency, "synthetic contact is not flagged valid");
            if (km < kFillerMinDistanceKm - tol || km > kFillerMaxDistanceKm + tol)
                fail(ErrorKind::InternalConsistency, "synthetic contact distance out of range");
            if (d < prev) fail(ErrorKind::InternalConsistency, "synthetic contacts are not nearest-first");
            prev = d;
            for (int a = 1; a <= 2; ++a) {
                const double v = obs[static_cast<std::size_t>(off + a)];
                if (v < 0.0 || v > 1.0) fail(ErrorKind::InternalConsistency, "synthetic contact angle out of range");
            }
        }
    }
}

std::vector<ActivationRecord> run_local_sweep(const LocalSweepSpec& spec, const CommanderQuery& query, int workers) {
    spec.validate();
    const std::size_t nd = spec.d_bins.size(), na = spec.ata_bins.size(), nb = spec.aa_bins.size();
    const int n_cells = static_cast<int>(nd * na * nb);
    std::vector<std::vector<ActivationRecord>> per_cell(static_cast<std::size_t>(n_cells));
    parallel_for(n_cells, workers, [&](int c) {
        const auto cu = static_cast<std::size_t>(c);
        const std::size_t i = cu / (na * nb), j = (cu / nb) % na, k = cu % nb;
        const double d = spec.d_bins[i], ata_v = spec.ata_bins[j], aa_v = spec.aa_bins[k];
        Rng rng(derive_seed(spec.seed, {name_tag("local"), i, j, k}));
        auto& out = per_cell[cu];
        out.reserve(static_cast<std::size_t>(spec.samples_per_cell));
        for (int s = 0; s < spec.samples_per_cell; ++s) {
            const auto obs = synthetic_observation(spec.m, d, ata_v, aa_v, rng);
            check_synthetic_observation(obs, spec.m);
            ActivationRecord r;
            r.cell = {d, ata_v, aa_v};
            r.episode = s;
            r.type = static_cast<int>(obs[7]);
            r.mode = query(obs);
            out.push_back(r);
        }
    });
    std::vector<ActivationRecord> records;
    records.reserve(static_cast<std::size_t>(n_cells * spec.samples_per_cell));
    for (auto& v : per_cell) records.insert(records.end(), v.begin(), v.end());
    return records;
}

std::vector<ActivationRecord> run_local_sweep(const LocalSweepSpec& spec, const PolicyNet& commander, int workers) {
    if (commander.input_width() != commander_obs_width(spec.m) || commander.head_spec != kCommanderHeads)
        fail(ErrorKind::Shape, "local sweep needs an m = " + std::to_string(spec.m) + " commander");
    return run_local_sweep(spec, argmax_query(commander), workers);
}

// ---------------------------------------------------------------------------
// Aggregation

std::int64_t ExplanationGrid::samples(std::size_t cell) const noexcept {
    const auto& c = counts[cell];
    return c[0] + c[1] + c[2];
}

std::optional<Mode> ExplanationGrid::argmax(std::size_t cell) const {
    if (samples(cell) == 0) return std::nullopt;
    const auto& c = counts.at(cell);
    int best = 0;
    for (int m = 1; m < kNumModes; ++m)
        if (c[static_cast<std::size_t>(m)] > c[static_cast<std::size_t>(best)]) best = m;
    return static_cast<Mode>(best);
}

bool ExplanationGrid::tie(std::size_t cell) const {
    if (samples(cell) == 0) return false;
    const auto& c = counts.at(cell);
    const auto top = *std::max_element(c.begin(), c.end());
    return std::count(c.begin(), c.end(), top) > 1;
}

ExplanationGrid aggregate(const std::vector<ActivationRecord>& records, const std::array<Axis, 3>& axes,
                          std::string kind) {
    ExplanationGrid grid;
    grid.kind = std::move(kind);
    grid.axes = axes;
    std::array<std::map<double, std::size_t>, 3> lookup;
    for (std::size_t a = 0; a < 3; ++a) {
        for (std::size_t i = 0; i < axes[a].size(); ++i)
            if (!lookup[a].emplace(axes[a].values[i], i).second)
                fail(ErrorKind::Aggregation, "axis '" + axes[a].name + "' repeats a value");
    }
    grid.counts.assign(axes[0].size() * axes[1].size() * axes[2].size(), {0, 0, 0});
    for (const auto& r : records) {
        std::array<std::size_t, 3> idx{};
        for (std::size_t a = 0; a < 3; ++a) {
            const auto it = lookup[a].find(r.cell[a]);
            if (it == lookup[a].end())
                fail(ErrorKind::Aggregation,
                     "record value " + format_number(r.cell[a]) + " is not on axis '" + axes[a].name + "'");
            idx[a] = it->second;
        }
        const auto m = static_cast<std::size_t>(r.mode);
        if (m >= kNumModes) fail(ErrorKind::Aggregation, "record has an invalid mode");
        grid.counts[grid.flat_index(idx[0], idx[1], idx[2])][m] += 1;
    }
    return grid;
}

std::string grid_to_json(const ExplanationGrid& grid) {
    ordered_json j;
    j["format"] = "hmarl-grid";
    j["version"] = kGridFormatVersion;
    j["kind"] = grid.kind;
    j["modes"] = {"attack", "engage", "defend"};
    j["axes"] = ordered_json::array();
    for (const auto& a : grid.axes) {
        ordered_json ax;
        ax["name"] = a.name;
        ax["values"] = a.values;
        ax["labels"] = a.labels;
        j["axes"].push_back(ax);
    }
    j["cells"] = ordered_json::array();
    for (std::size_t i = 0; i < grid.axes[0].size(); ++i)
        for (std::size_t k1 = 0; k1 < grid.axes[1].size(); ++k1)
            for (std::size_t k2 = 0; k2 < grid.axes[2].size(); ++k2) {
                const auto c = grid.flat_index(i, k1, k2);
                ordered_json cell;
                cell["index"] = {i, k1, k2};
                cell["counts"] = grid.counts[c];
                cell["samples"] = grid.samples(c);
                const auto am = grid.argmax(c);
                cell["argmax"] = am ? ordered_json(std::string(to_string(*am))) : ordered_json(nullptr);
                cell["tie"] = grid.tie(c);
                j["cells"].push_back(cell);
            }
    return j.dump(1) + "\n";
}

ExplanationGrid grid_from_json(std::string_view text) {
    auto bad = [](const std::string& what) -> void { fail(ErrorKind::InvalidInput, "malformed grid: " + what); };
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        bad(e.what());
    }
    ExplanationGrid grid;
    try {
        if (!j.is_object() || j.value("format", "") != "hmarl-grid") bad("missing format tag");
        if (j.at("version").get<int>() != kGridFormatVersion) bad("unsupported version");
        grid.kind = j.at("kind").get<std::string>();
        const auto& axes = j.at("axes");
        if (!axes.is_array() || axes.size() != 3) bad("expected three axes");
        for (std::size_t a = 0; a < 3; ++a) {
            grid.axes[a].name = axes[a].at("name").get<std::string>();
            grid.axes[a].values = axes[a].at("values").get<std::vector<double>>();
            grid.axes[a].labels = axes[a].at("labels").get<std::vector<std::string>>();
            if (!grid.axes[a].labels.empty() && grid.axes[a].labels.size() != grid.axes[a].values.size())
                bad("axis labels do not match values");
        }
        const std::size_t n = grid.axes[0].size() * grid.axes[1].size() * grid.axes[2].size();
        const auto& cells = j.at("cells");
        if (!cells.is_array() || cells.size() != n) bad("cell count does not match axes");
        grid.counts.assign(n, {0, 0, 0});
        std::vector<char> seen(n, 0);
        for (const auto& cell : cells) {
            const auto idx = cell.at("index").get<std::array<std::size_t, 3>>();
            for (std::size_t a = 0; a < 3; ++a)
                if (idx[a] >= grid.axes[a].size()) bad("cell index out of range");
            const auto c = grid.flat_index(idx[0], idx[1], idx[2]);
            if (seen[c]) bad("duplicate cell");
            seen[c] = 1;
            const auto counts = cell.at("counts").get<std::array<std::int64_t, 3>>();
            for (auto v : counts)
                if (v < 0) bad("negative count");
            grid.counts[c] = counts;
            if (cell.at("samples").get<std::int64_t>() != grid.samples(c)) bad("samples do not match counts");
            const auto am = grid.argmax(c);
            const auto& jam = cell.at("argmax");
            if (am ? jam != std::string(to_string(*am)) : !jam.is_null()) bad("argmax does not match counts");
            if (cell.at("tie").get<bool>() != grid.tie(c)) bad("tie flag does not match counts");
        }
    } catch (const nlohmann::json::exception& e) {
        bad(e.what());
    }
    return grid;
}

void write_records_csv(std::ostream& out, const std::vector<ActivationRecord>& records,
                       const std::array<Axis, 3>& axes) {
    out << axes[0].name << ',' << axes[1].name << ',' << axes[2].name << ",episode,step,agent,type,mode\n";
    std::array<std::map<double, std::size_t>, 3> lookup;
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t i = 0; i < axes[a].size(); ++i) lookup[a].emplace(axes[a].values[i], i);
    for (const auto& r : records) {
        for (std::size_t a = 0; a < 3; ++a) {
            const auto it = lookup[a].find(r.cell[a]);
            out << (it != lookup[a].end() ? axes[a].label(it->second) : format_number(r.cell[a])) << ',';
        }
        out << r.episode << ',' << r.step << ',' << r.agent << ',' << r.type << ',' << to_string(r.mode) << '\n';
    }
}

}  // namespace hmarl
