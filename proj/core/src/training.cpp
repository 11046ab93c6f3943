#include "hmarl/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "hmarl/errors.hpp"

namespace hmarl {

ConvergenceTracker::ConvergenceTracker(int window, double threshold, int min_updates, double floor)
    : window_(window), threshold_(threshold), min_updates_(min_updates), floor_(floor) {
    if (window < 1) fail(ErrorKind::InvalidConfig, "convergence window must be >= 1");
    if (!(threshold >= 0.0)) fail(ErrorKind::InvalidConfig, "convergence threshold must be >= 0");
}

void ConvergenceTracker::add(double value) { values_.push_back(value); }

double ConvergenceTracker::mean_of(std::size_t end, std::size_t len) const {
    double s = 0.0;
    for (std::size_t i = end - len; i < end; ++i) s += values_[i];
    return s / static_cast<double>(len);
}

double ConvergenceTracker::moving_average() const {
    if (values_.empty()) return 0.0;
    const auto len = std::min(values_.size(), static_cast<std::size_t>(window_));
    return mean_of(values_.size(), len);
}

bool ConvergenceTracker::converged() const {
    const auto w = static_cast<std::size_t>(window_);
    const auto n = values_.size();
    if (n < 2 * w || n < static_cast<std::size_t>(std::max(min_updates_, 0))) return false;
    const double now = mean_of(n, w);
    const double before = mean_of(n - w, w);
    return now - before < threshold_ * std::max(std::fabs(before), floor_);
}

void advance_league(LeagueState& league, const PolicyNet& current) {
    league.snapshot = deep_copy(current);
    league.snapshot->frozen = true;
    league.snapshot->tags["league_stage"] = std::to_string(league.stage);
    ++league.stage;
    league.tracker.reset();
}

namespace {

// Every opponent flies the same frozen network.
class SnapshotController final : public TeamController {
public:
    explicit SnapshotController(std::shared_ptr<const PolicyNet> net) : net_(std::move(net)) {}

    void act(const WorldState& world, Team team, JointActions& out, Rng& rng) override {
        for (const auto& a : world.aircraft)
            if (a.alive && a.team == team) out[static_cast<std::size_t>(a.id)] = policy_action(*net_, world, a.id, rng);
    }

private:
    std::shared_ptr<const PolicyNet> net_;
};

void check_low_level_net(const PolicyNet& net) {
    if (net.input_width() != kLowLevelObsWidth)
        fail(ErrorKind::Shape, "low-level net expects width " + std::to_string(net.input_width()) + ", observation is " +
                                   std::to_string(kLowLevelObsWidth));
    if (net.head_spec != kLowLevelHeads) fail(ErrorKind::Shape, "low-level net has the wrong action heads");
}

std::uint64_t mode_tag(Mode m) { return static_cast<std::uint64_t>(m) + 1; }

}  // namespace

ControllerFactory random_opponents() {
    return [] { return std::make_unique<RandomController>(); };
}

ControllerFactory snapshot_opponents(const PolicyNet& net) {
    auto shared = std::make_shared<const PolicyNet>(deep_copy(net));
    return [shared] { return std::make_unique<SnapshotController>(shared); };
}

ControllerFactory league_opponents(const LeagueState& league) {
    return league.random_opponents() ? random_opponents() : snapshot_opponents(*league.snapshot);
}

// ---------------------------------------------------------------------------
// Low-level collection

struct LowLevelCollector::Env {
    int index = 0;
    int episode = 0;
    WorldState world;
    Rng rng;
    std::unique_ptr<TeamController> opponents;
    std::vector<double> episode_return;
    std::vector<char> friendly_kill;
};

LowLevelCollector::LowLevelCollector(Mode mode, const ScenarioConfig& scenario, int num_envs, std::uint64_t seed,
                                     ControllerFactory opponents)
    : mode_(mode), scenario_(scenario), seed_(seed), opponents_(std::move(opponents)) {
    if (num_envs < 1) fail(ErrorKind::InvalidConfig, "num_envs must be >= 1");
    for (int i = 0; i < num_envs; ++i) {
        auto env = std::make_shared<Env>();
        env->index = i;
        env->opponents = opponents_();
        restart(*env);
        envs_.push_back(std::move(env));
    }
}

void LowLevelCollector::restart(Env& env) {
    const auto base = derive_seed(seed_, {mode_tag(mode_), static_cast<std::uint64_t>(epoch_),
                                          static_cast<std::uint64_t>(env.index), static_cast<std::uint64_t>(env.episode)});
    ScenarioConfig sc = scenario_;
    sc.seed = derive_seed(base, {name_tag("scenario")});
    env.world = spawn_scenario(sc);
    env.rng = Rng(derive_seed(base, {name_tag("actions")}));
    env.episode_return.assign(env.world.aircraft.size(), 0.0);
    env.friendly_kill.assign(env.world.aircraft.size(), 0);
    env.opponents->reset(env.world, Team::Opponent, env.rng);
    ++env.episode;
}

void LowLevelCollector::set_opponents(ControllerFactory opponents) {
    opponents_ = std::move(opponents);
    ++epoch_;
    for (auto& env : envs_) {
        env->opponents = opponents_();
        env->episode = 0;
        restart(*env);
    }
}

RolloutBuffer LowLevelCollector::collect(const PolicyNet& net, int ticks, int workers, CollectStats* stats,
                                         double reward_scale) {
    check_low_level_net(net);
    if (ticks < 1) fail(ErrorKind::InvalidConfig, "rollout ticks must be >= 1");
    const int n_envs = num_envs();
    std::vector<std::vector<std::vector<Transition>>> per_env(static_cast<std::size_t>(n_envs));
    std::vector<CollectStats> per_stats(static_cast<std::size_t>(n_envs));

    parallel_for(n_envs, workers, [&](int e) {
        Env& env = *envs_[static_cast<std::size_t>(e)];
        auto& trajs = per_env[static_cast<std::size_t>(e)];
        auto& st = per_stats[static_cast<std::size_t>(e)];
        trajs.assign(static_cast<std::size_t>(scenario_.n_agents), {});
        JointActions actions;
        std::vector<int> acting;
        for (int t = 0; t < ticks; ++t) {
            auto& world = env.world;
            actions.assign(world.aircraft.size(), std::nullopt);
            acting.clear();
            for (const auto& a : world.aircraft) {
                if (!a.alive || a.team != Team::Agent) continue;
                Transition tr;
                tr.obs = low_level_observation(world, a.id);
                const auto fr = forward(net, tr.obs);
                tr.mask = low_level_mask(a);
                auto s = sample(fr.logits, net.head_spec, tr.mask, env.rng);
                tr.action = std::move(s.action);
                tr.log_prob = s.log_prob;
                tr.value = fr.value;
                tr.agent_id = a.id;
                tr.env_id = e;
                actions[static_cast<std::size_t>(a.id)] = to_low_level_action(tr.action);
                trajs[static_cast<std::size_t>(a.id)].push_back(std::move(tr));
                acting.push_back(a.id);
            }
            env.opponents->act(world, Team::Opponent, actions, env.rng);
            const auto events = step(world, actions);
            ++st.env_steps;
            for (const auto& k : events.kills)
                if (k.friendly) env.friendly_kill[static_cast<std::size_t>(k.killer)] = 1;

            const bool ended = outcome(world) != Outcome::Ongoing;
            for (int id : acting) {
                const auto& a = world.at(id);
                const bool died = !a.alive;
                const bool terminal = died || ended;
                double r = 0.0;
                switch (mode_) {
                    case Mode::Attack:
                        if (terminal) r = reward_attack(a.spec().cannon_capacity, a.cannon_remaining, died);
                        break;
                    case Mode::Engage:
                        r = reward_engage(world, id);
                        break;
                    case Mode::Defend:
                        if (terminal) r = reward_defend(died, env.friendly_kill[static_cast<std::size_t>(id)] != 0);
                        break;
                }
                auto& tr = trajs[static_cast<std::size_t>(id)].back();
                tr.reward = r * reward_scale;
                tr.done = terminal;
                env.episode_return[static_cast<std::size_t>(id)] += r;
                if (terminal) {
                    st.episodes += 1;
                    st.return_sum += env.episode_return[static_cast<std::size_t>(id)];
                    env.episode_return[static_cast<std::size_t>(id)] = 0.0;
                }
            }
            if (ended) restart(env);
        }
        for (auto& traj : trajs) {
            if (traj.empty() || traj.back().done) continue;
            auto& last = traj.back();
            last.truncated = true;
            last.bootstrap_value = forward(net, low_level_observation(env.world, last.agent_id)).value;
        }
    });

    RolloutBuffer buffer;
    CollectStats total;
    for (int e = 0; e < n_envs; ++e) {
        for (auto& traj : per_env[static_cast<std::size_t>(e)])
            for (auto& tr : traj) buffer.steps.push_back(std::move(tr));
        const auto& st = per_stats[static_cast<std::size_t>(e)];
        total.episodes += st.episodes;
        total.return_sum += st.return_sum;
        total.env_steps += st.env_steps;
    }
    if (stats) *stats = total;
    return buffer;
}

// ---------------------------------------------------------------------------

void write_metrics_header(std::ostream& out) {
    out << "update,stage,env_steps,episodes,return_mean,policy_loss,value_loss,entropy,approx_kl,clip_fraction\n";
}

void write_metrics_row(std::ostream& out, const UpdateMetrics& m) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%d,%d,%lld,%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", m.update, m.stage,
                  static_cast<long long>(m.env_steps), m.episodes, m.return_mean, m.stats.policy_loss,
                  m.stats.value_loss, m.stats.entropy, m.stats.approx_kl, m.stats.clip_fraction);
    out << buf;
}

LowLevelTrainResult train_low_level(Mode mode, PolicyNet& net, const LowLevelTrainConfig& config,
                                    const UpdateCallback& on_update) {
    config.ppo.validate();
    if (config.league.stages < 1) fail(ErrorKind::InvalidConfig, "league needs at least one stage");
    check_low_level_net(net);
    if (net.frozen) fail(ErrorKind::InvalidSetup, "cannot train a frozen network");

    const int first_block = config.freeze_trunk ? trunk_block_count(net) : 0;
    Adam optimizer(config.ppo.learning_rate);
    LeagueState league(config.league);
    LowLevelCollector collector(mode, config.scenario, config.ppo.num_envs,
                                derive_seed(config.ppo.seed, {name_tag("collect"), mode_tag(mode)}), random_opponents());
    Rng update_rng(derive_seed(config.ppo.seed, {name_tag("update"), mode_tag(mode)}));

    LowLevelTrainResult result;
    int update = 0;
    std::int64_t total_steps = 0;
    for (int stage = 0; stage < config.league.stages; ++stage) {
        if (stage > 0) {
            advance_league(league, net);
            collector.set_opponents(league_opponents(league));
        }
        std::int64_t stage_steps = 0;
        bool converged = false;
        while (stage_steps < config.ppo.total_env_steps) {
            CollectStats cs;
            auto buffer = collector.collect(net, config.ppo.rollout_ticks, config.ppo.workers, &cs, config.ppo.reward_scale);
            stage_steps += cs.env_steps;
            total_steps += cs.env_steps;
            compute_gae(buffer, config.ppo.gamma, config.ppo.gae_lambda);
            UpdateMetrics m;
            m.update = update++;
            m.stage = stage;
            m.env_steps = total_steps;
            m.episodes = cs.episodes;
            m.return_mean = cs.return_mean();
            m.stats = ppo_update(net, buffer, config.ppo, optimizer, update_rng, first_block);
            if (cs.episodes > 0) league.tracker.add(cs.return_mean());
            result.metrics.push_back(m);
            if (on_update) on_update(m);
            if (league.tracker.converged()) {
                converged = true;
                break;
            }
        }
        auto snap = deep_copy(net);
        snap.tags["league_stage"] = std::to_string(stage);
        result.stage_snapshots.push_back(std::move(snap));
        result.stage_converged.push_back(converged);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Commander collection

struct CommanderCollector::Env {
    int index = 0;
    int episode = 0;
    WorldState world;
    Rng rng;
    std::unique_ptr<FixedModeController> opponents;
    std::vector<double> episode_return;
};

CommanderCollector::CommanderCollector(int m, const ScenarioConfig& scenario, const LowLevelPolicySet& controllers,
                                       std::vector<Mode> opponent_pool, int num_envs, std::uint64_t seed)
    : m_(m), scenario_(scenario), controllers_(controllers), pool_(std::move(opponent_pool)), seed_(seed) {
    if (m < 1 || m > kMaxSensing) fail(ErrorKind::InvalidConfig, "sensing range m must be in [1, 5]");
    if (num_envs < 1) fail(ErrorKind::InvalidConfig, "num_envs must be >= 1");
    if (controllers.nets.size() != kNumModes) fail(ErrorKind::InvalidSetup, "controller set must hold three modes");
    const std::array<const PolicyNet*, kNumModes> nets = {&controllers[0], &controllers[1], &controllers[2]};
    for (int i = 0; i < num_envs; ++i) {
        auto env = std::make_shared<Env>();
        env->index = i;
        env->opponents = std::make_unique<FixedModeController>(nets, pool_);
        restart(*env);
        envs_.push_back(std::move(env));
    }
}

void CommanderCollector::restart(Env& env) {
    const auto base = derive_seed(seed_, {static_cast<std::uint64_t>(env.index), static_cast<std::uint64_t>(env.episode)});
    ScenarioConfig sc = scenario_;
    sc.seed = derive_seed(base, {name_tag("scenario")});
    env.world = spawn_scenario(sc);
    env.rng = Rng(derive_seed(base, {name_tag("actions")}));
    env.episode_return.assign(env.world.aircraft.size(), 0.0);
    env.opponents->reset(env.world, Team::Opponent, env.rng);
    ++env.episode;
}

RolloutBuffer CommanderCollector::collect(const PolicyNet& commander, int ticks, int workers, CollectStats* stats,
                                          double reward_scale) {
    if (commander.input_width() != commander_obs_width(m_))
        fail(ErrorKind::Shape, "commander width does not match sensing range m=" + std::to_string(m_));
    if (commander.head_spec != kCommanderHeads) fail(ErrorKind::Shape, "commander has the wrong action heads");
    const int n_envs = static_cast<int>(envs_.size());
    std::vector<std::vector<std::vector<Transition>>> per_env(static_cast<std::size_t>(n_envs));
    std::vector<CollectStats> per_stats(static_cast<std::size_t>(n_envs));

    parallel_for(n_envs, workers, [&](int e) {
        Env& env = *envs_[static_cast<std::size_t>(e)];
        auto& trajs = per_env[static_cast<std::size_t>(e)];
        auto& st = per_stats[static_cast<std::size_t>(e)];
        trajs.assign(static_cast<std::size_t>(scenario_.n_agents), {});
        const auto mask = full_mask(commander.head_spec);
        std::vector<Mode> modes(env.world.aircraft.size(), Mode::Attack);
        std::vector<int> acting;
        std::vector<StepEvents> window;
        JointActions actions;
        int elapsed = 0;
        while (elapsed < ticks) {
            auto& world = env.world;
            modes.assign(world.aircraft.size(), Mode::Attack);
            acting.clear();
            for (const auto& a : world.aircraft) {
                if (!a.alive || a.team != Team::Agent) continue;
                Transition tr;
                tr.obs = encode(commander_observation(world, a.id, m_));
                const auto fr = forward(commander, tr.obs);
                auto s = sample(fr.logits, commander.head_spec, mask, env.rng);
                modes[static_cast<std::size_t>(a.id)] = mode_from_index(s.action[0]);
                tr.action = std::move(s.action);
                tr.mask = mask;
                tr.log_prob = s.log_prob;
                tr.value = fr.value;
                tr.agent_id = a.id;
                tr.env_id = e;
                trajs[static_cast<std::size_t>(a.id)].push_back(std::move(tr));
                acting.push_back(a.id);
            }
            window.clear();
            for (int k = 0; k < kOptionTicks && outcome(world) == Outcome::Ongoing; ++k) {
                actions.assign(world.aircraft.size(), std::nullopt);
                for (const auto& a : world.aircraft) {
                    if (!a.alive || a.team != Team::Agent) continue;
                    const auto& net = controllers_[static_cast<int>(modes[static_cast<std::size_t>(a.id)])];
                    actions[static_cast<std::size_t>(a.id)] = policy_action(net, world, a.id, env.rng);
                }
                env.opponents->act(world, Team::Opponent, actions, env.rng);
                window.push_back(step(world, actions));
                ++elapsed;
                ++st.env_steps;
            }
            const bool ended = outcome(world) != Outcome::Ongoing;
            for (int id : acting) {
                auto& tr = trajs[static_cast<std::size_t>(id)].back();
                const double r = reward_commander(window, id);
                tr.reward = r * reward_scale;
                tr.done = ended || !world.at(id).alive;
                env.episode_return[static_cast<std::size_t>(id)] += r;
                if (tr.done) {
                    st.episodes += 1;
                    st.return_sum += env.episode_return[static_cast<std::size_t>(id)];
                    env.episode_return[static_cast<std::size_t>(id)] = 0.0;
                }
            }
            if (ended) restart(env);
        }
        for (auto& traj : trajs) {
            if (traj.empty() || traj.back().done) continue;
            auto& last = traj.back();
            last.truncated = true;
            last.bootstrap_value = forward(commander, encode(commander_observation(env.world, last.agent_id, m_))).value;
        }
    });

    RolloutBuffer buffer;
    CollectStats total;
    for (int e = 0; e < n_envs; ++e) {
        for (auto& traj : per_env[static_cast<std::size_t>(e)])
            for (auto& tr : traj) buffer.steps.push_back(std::move(tr));
        const auto& st = per_stats[static_cast<std::size_t>(e)];
        total.episodes += st.episodes;
        total.return_sum += st.return_sum;
        total.env_steps += st.env_steps;
    }
    if (stats) *stats = total;
    return buffer;
}

CommanderTrainResult train_commander(const LowLevelPolicySet& controllers, const CommanderTrainConfig& config,
                                     const UpdateCallback& on_update) {
    config.ppo.validate();
    if (config.m < 1 || config.m > kMaxSensing) fail(ErrorKind::InvalidConfig, "sensing range m must be in [1, 5]");
    if (controllers.nets.size() != kNumModes) fail(ErrorKind::InvalidSetup, "controller set must hold three modes");
    for (const auto& n : controllers.nets) {
        if (!n.frozen)
            fail(ErrorKind::InvalidSetup, "controller '" + std::string(to_string(n.role)) + "' is not frozen");
        check_low_level_net(n);
    }
    if (config.opponent_pool.empty()) fail(ErrorKind::InvalidConfig, "opponent mode pool is empty");

    CommanderTrainResult result;
    result.commander = make_commander_net(commander_obs_width(config.m), derive_seed(config.ppo.seed, {name_tag("init")}),
                                           config.net);
    result.commander.tags["m"] = std::to_string(config.m);
    result.commander.tags["composition"] = std::string(to_string(config.scenario.composition));
    auto& net = result.commander;

    Adam optimizer(config.ppo.learning_rate);
    CommanderCollector collector(config.m, config.scenario, controllers, config.opponent_pool, config.ppo.num_envs,
                                 derive_seed(config.ppo.seed, {name_tag("collect")}));
    Rng update_rng(derive_seed(config.ppo.seed, {name_tag("update")}));
    std::int64_t steps = 0;
    int update = 0;
    while (steps < config.ppo.total_env_steps) {
        CollectStats cs;
        auto buffer = collector.collect(net, config.ppo.rollout_ticks, config.ppo.workers, &cs, config.ppo.reward_scale);
        steps += cs.env_steps;
        compute_gae(buffer, config.ppo.gamma, config.ppo.gae_lambda);
        UpdateMetrics m;
        m.update = update++;
        m.env_steps = steps;
        m.episodes = cs.episodes;
        m.return_mean = cs.return_mean();
        m.stats = ppo_update(net, buffer, config.ppo, optimizer, update_rng);
        result.metrics.push_back(m);
        if (on_update) on_update(m);
    }
    return result;
}

// ---------------------------------------------------------------------------

EvalResult evaluate(const ControllerFactory& agents, const ControllerFactory& opponents,
                    const ScenarioConfig& scenario, int episodes, std::uint64_t seed, int workers) {
    if (episodes < 1) fail(ErrorKind::InvalidConfig, "episodes must be >= 1");
    std::vector<EpisodeResult> results(static_cast<std::size_t>(episodes));
    parallel_for(episodes, workers, [&](int i) {
        ScenarioConfig sc = scenario;
        sc.seed = derive_seed(seed, {name_tag("eval"), static_cast<std::uint64_t>(i)});
        auto world = spawn_scenario(sc);
        Rng rng(derive_seed(seed, {name_tag("eval-actions"), static_cast<std::uint64_t>(i)}));
        auto a = agents();
        auto o = opponents();
        results[static_cast<std::size_t>(i)] = run_episode(world, *a, *o, rng);
    });
    EvalResult r;
    r.episodes = episodes;
    int win = 0, loss = 0, draw = 0, any_kill = 0;
    long long destroyed = 0, ticks = 0;
    for (const auto& e : results) {
        win += e.outcome == Outcome::Win;
        loss += e.outcome == Outcome::Loss;
        draw += e.outcome == Outcome::Draw;
        any_kill += e.opponents_destroyed > 0;
        destroyed += e.opponents_destroyed;
        ticks += e.ticks;
    }
    const double n = episodes;
    r.win = win / n;
    r.loss = loss / n;
    r.draw = draw / n;
    r.any_kill_fraction = any_kill / n;
    r.opponent_kill_fraction = static_cast<double>(destroyed) / (n * scenario.n_opponents);
    r.mean_ticks = static_cast<double>(ticks) / n;
    return r;
}

}  // namespace hmarl
