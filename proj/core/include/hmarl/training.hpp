#pragma once

#include <deque>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "hmarl/controllers.hpp"
#include "hmarl/ppo.hpp"

namespace hmarl {

/// Plateau detector on a stream of per-update mean returns. With w = window,
/// MA_t is the mean of the last w values. Once t >= max(2w, min_updates) the
/// stream is converged when MA_t - MA_{t-w} < threshold * max(|MA_{t-w}|, floor).
class ConvergenceTracker {
public:
    ConvergenceTracker(int window = 50, double threshold = 0.01, int min_updates = 100, double floor = 1e-6);

    void add(double value);
    bool converged() const;
    int count() const noexcept { return static_cast<int>(values_.size()); }
    /// Mean of the last `window` values (or of all values when fewer).
    double moving_average() const;
    void reset() { values_.clear(); }

private:
    double mean_of(std::size_t end, std::size_t len) const;

    int window_;
    double threshold_;
    int min_updates_;
    double floor_;
    std::vector<double> values_;
};

struct LeagueConfig {
    int stages = 1;            // stage 0 is always against random opponents
    int window = 50;
    double threshold = 0.01;
    int min_updates = 100;
};

/// Stage 0 plays random opponents; stage k > 0 plays a frozen copy of the
/// policy as it stood at the end of stage k - 1.
struct LeagueState {
    int stage = 0;
    std::optional<PolicyNet> snapshot;
    ConvergenceTracker tracker;

    explicit LeagueState(const LeagueConfig& config = {})
        : tracker(config.window, config.threshold, config.min_updates) {}

    bool random_opponents() const noexcept { return !snapshot.has_value(); }
};

void advance_league(LeagueState& league, const PolicyNet& current);

/// Builds a fresh opponent controller per environment instance.
using ControllerFactory = std::function<std::unique_ptr<TeamController>()>;

ControllerFactory random_opponents();
/// Every opponent flies `net` in one fixed mode.
ControllerFactory snapshot_opponents(const PolicyNet& net);
ControllerFactory league_opponents(const LeagueState& league);

struct CollectStats {
    int episodes = 0;          // agent-episodes completed in this rollout
    double return_sum = 0.0;   // summed undiscounted return of those episodes
    std::int64_t env_steps = 0;

    double return_mean() const noexcept { return episodes > 0 ? return_sum / episodes : 0.0; }
};

/// Persistent set of environment instances for one low-level mode. Episodes
/// continue across calls to collect() and restart automatically on completion.
class LowLevelCollector {
public:
    LowLevelCollector(Mode mode, const ScenarioConfig& scenario, int num_envs, std::uint64_t seed,
                      ControllerFactory opponents);

    /// Each environment advances `ticks` ticks. Every living agent contributes
    /// one transition per tick, driven by the shared `net`. Trajectory segments
    /// are contiguous per (env, agent) and end in done or truncated.
    RolloutBuffer collect(const PolicyNet& net, int ticks, int workers, CollectStats* stats = nullptr,
                          double reward_scale = 1.0);

    /// Replaces the opponents and restarts every environment.
    void set_opponents(ControllerFactory opponents);

    int num_envs() const noexcept { return static_cast<int>(envs_.size()); }

private:
    struct Env;
    void restart(Env& env);

    Mode mode_;
    ScenarioConfig scenario_;
    std::uint64_t seed_;
    ControllerFactory opponents_;
    std::vector<std::shared_ptr<Env>> envs_;
    int epoch_ = 0;
};

struct LowLevelTrainConfig {
    PpoConfig ppo;
    LeagueConfig league;
    ScenarioConfig scenario;  // n_agents, n_opponents, composition, map, caps
    bool freeze_trunk = false;  // update only the mode head
};

struct UpdateMetrics {
    int update = 0;
    int stage = 0;
    std::int64_t env_steps = 0;
    int episodes = 0;
    double return_mean = 0.0;
    PpoStats stats;
};

void write_metrics_header(std::ostream& out);
void write_metrics_row(std::ostream& out, const UpdateMetrics& m);

struct LowLevelTrainResult {
    std::vector<PolicyNet> stage_snapshots;  // policy at the end of each stage
    std::vector<UpdateMetrics> metrics;
    std::vector<bool> stage_converged;
};

using UpdateCallback = std::function<void(const UpdateMetrics&)>;

/// League training of one mode's shared policy. `ppo.total_env_steps` is the
/// budget of each stage; a stage also ends when the return plateaus.
LowLevelTrainResult train_low_level(Mode mode, PolicyNet& net, const LowLevelTrainConfig& config,
                                    const UpdateCallback& on_update = {});

/// Per-window commander experience. All agents share the commander.
class CommanderCollector {
public:
    CommanderCollector(int m, const ScenarioConfig& scenario, const LowLevelPolicySet& controllers,
                       std::vector<Mode> opponent_pool, int num_envs, std::uint64_t seed);

    /// Each environment advances whole windows until at least `ticks` ticks have
    /// elapsed. One transition per living agent per window.
    RolloutBuffer collect(const PolicyNet& commander, int ticks, int workers, CollectStats* stats = nullptr,
                          double reward_scale = 1.0);

private:
    struct Env;
    void restart(Env& env);

    int m_;
    ScenarioConfig scenario_;
    const LowLevelPolicySet& controllers_;
    std::vector<Mode> pool_;
    std::uint64_t seed_;
    std::vector<std::shared_ptr<Env>> envs_;
};

struct CommanderTrainConfig {
    PpoConfig ppo;
    int m = 3;
    ScenarioConfig scenario;  // team sizes and composition
    std::vector<Mode> opponent_pool = {Mode::Attack, Mode::Engage};
    NetArchitecture net;
};

struct CommanderTrainResult {
    PolicyNet commander;
    std::vector<UpdateMetrics> metrics;
};

/// Trains a commander for sensing range m over frozen low-level controllers.
/// Throws InvalidSetup if any controller is not frozen.
CommanderTrainResult train_commander(const LowLevelPolicySet& controllers, const CommanderTrainConfig& config,
                                     const UpdateCallback& on_update = {});

struct EvalResult {
    int episodes = 0;
    double win = 0.0;
    double loss = 0.0;
    double draw = 0.0;
    double opponent_kill_fraction = 0.0;  // opponents destroyed / opponents spawned
    double any_kill_fraction = 0.0;       // episodes with at least one opponent destroyed
    double mean_ticks = 0.0;
};

/// Plays `episodes` independent episodes of `scenario` (episode i seeded from
/// seed and i). Results do not depend on `workers`.
EvalResult evaluate(const ControllerFactory& agents, const ControllerFactory& opponents,
                    const ScenarioConfig& scenario, int episodes, std::uint64_t seed, int workers = 1);

}  // namespace hmarl
