#include "hmarl/controllers.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "hmarl/errors.hpp"

namespace hmarl {

ActionMask low_level_mask(const AircraftState& aircraft) {
    auto mask = full_mask(kLowLevelHeads);
    if (aircraft.rockets_remaining <= 0) mask.heads[3][1] = 0;
    return mask;
}

LowLevelAction to_low_level_action(std::span<const int> heads) {
    if (heads.size() != 4) fail(ErrorKind::InvalidAction, "low-level action needs 4 heads");
    return {heads[0] - 6, heads[1], heads[2], heads[3]};
}

std::vector<int> to_head_indices(const LowLevelAction& a) { return {a.h + 6, a.v, a.c_c, a.c_r}; }

LowLevelAction policy_action(const PolicyNet& net, const WorldState& world, int aircraft_id, Rng& rng,
                             bool stochastic) {
    const auto obs = low_level_observation(world, aircraft_id);
    const auto fr = forward(net, obs);
    const auto mask = low_level_mask(world.at(aircraft_id));
    if (stochastic) return to_low_level_action(sample(fr.logits, net.head_spec, mask, rng).action);
    return to_low_level_action(argmax_action(fr.logits, net.head_spec, mask));
}

OptionResult run_option(WorldState& world, int agent_id, OptionCommand& cmd, const PolicyNet& controller,
                        const ActionProvider& others, Rng& rng) {
    const ActionProvider drive = [&](const WorldState& w, int id) { return policy_action(controller, w, id, rng); };
    return run_option(world, agent_id, cmd, drive, others);
}

// ---------------------------------------------------------------------------

void RandomController::act(const WorldState& world, Team team, JointActions& out, Rng& rng) {
    for (const auto& a : world.aircraft) {
        if (!a.alive || a.team != team) continue;
        LowLevelAction act;
        act.h = rng.uniform_int(-6, 6);
        act.v = rng.uniform_int(0, 8);
        act.c_c = rng.uniform_int(0, 1);
        act.c_r = rng.uniform_int(0, 1);
        out[static_cast<std::size_t>(a.id)] = act;
    }
}

void IdleController::act(const WorldState& world, Team team, JointActions& out, Rng&) {
    for (const auto& a : world.aircraft)
        if (a.alive && a.team == team) out[static_cast<std::size_t>(a.id)] = LowLevelAction{0, 4, 0, 0};
}

void ScriptedController::act(const WorldState& world, Team team, JointActions& out, Rng&) {
    for (const auto& a : world.aircraft)
        if (a.alive && a.team == team) out[static_cast<std::size_t>(a.id)] = script_(world, a.id);
}

FixedModeController::FixedModeController(std::array<const PolicyNet*, kNumModes> nets, std::vector<Mode> mode_pool,
                                         bool stochastic)
    : nets_(nets), pool_(std::move(mode_pool)), stochastic_(stochastic) {
    if (pool_.empty()) fail(ErrorKind::InvalidSetup, "mode pool is empty");
    for (auto m : pool_)
        if (nets_[static_cast<std::size_t>(m)] == nullptr)
            fail(ErrorKind::InvalidSetup, "no controller for mode " + std::string(to_string(m)));
}

void FixedModeController::reset(const WorldState& world, Team, Rng& rng) {
    assigned_.assign(world.aircraft.size(), pool_.front());
    if (pool_.size() == 1) return;
    for (auto& m : assigned_) m = pool_[rng.uniform_index(pool_.size())];
}

void FixedModeController::act(const WorldState& world, Team team, JointActions& out, Rng& rng) {
    if (assigned_.size() != world.aircraft.size()) reset(world, team, rng);
    for (const auto& a : world.aircraft) {
        if (!a.alive || a.team != team) continue;
        const auto* net = nets_[static_cast<std::size_t>(assigned_[static_cast<std::size_t>(a.id)])];
        out[static_cast<std::size_t>(a.id)] = policy_action(*net, world, a.id, rng, stochastic_);
    }
}

CommanderController::CommanderController(const PolicyNet& commander, int m, const LowLevelPolicySet& controllers,
                                         bool stochastic_commander, bool stochastic_controllers)
    : commander_(commander), m_(m), controllers_(controllers), stochastic_commander_(stochastic_commander),
      stochastic_controllers_(stochastic_controllers) {
    if (m < 1 || m > kMaxSensing) fail(ErrorKind::InvalidConfig, "sensing range m must be in [1, 5]");
    if (commander.role != PolicyRole::Commander) fail(ErrorKind::InvalidSetup, "commander net has wrong role");
    if (commander.input_width() != commander_obs_width(m))
        fail(ErrorKind::Shape, "commander input width does not match sensing range m=" + std::to_string(m));
    if (controllers.nets.size() != kNumModes) fail(ErrorKind::InvalidSetup, "controller set must hold three modes");
}

void CommanderController::reset(const WorldState& world, Team, Rng&) { modes_.assign(world.aircraft.size(), std::nullopt); }

void CommanderController::act(const WorldState& world, Team team, JointActions& out, Rng& rng) {
    if (modes_.size() != world.aircraft.size()) modes_.assign(world.aircraft.size(), std::nullopt);
    const bool decide = world.tick % kOptionTicks == 0;
    for (const auto& a : world.aircraft) {
        auto& mode = modes_[static_cast<std::size_t>(a.id)];
        if (a.team != team) continue;
        if (!a.alive) {
            mode.reset();
            continue;
        }
        if (decide || !mode) {
            const auto obs = encode(commander_observation(world, a.id, m_));
            const auto fr = forward(commander_, obs);
            const auto mask = full_mask(commander_.head_spec);
            const int idx = stochastic_commander_ ? sample(fr.logits, commander_.head_spec, mask, rng).action[0]
                                                  : argmax_action(fr.logits, commander_.head_spec, mask)[0];
            mode = mode_from_index(idx);
            if (hook_) hook_(world.tick / kOptionTicks, a, *mode);
        }
        out[static_cast<std::size_t>(a.id)] =
            policy_action(controllers_[static_cast<int>(*mode)], world, a.id, rng, stochastic_controllers_);
    }
}

// ---------------------------------------------------------------------------

EpisodeResult run_episode(WorldState& world, TeamController& agents, TeamController& opponents, Rng& rng,
                          const TickObserver& observer) {
    agents.reset(world, Team::Agent, rng);
    opponents.reset(world, Team::Opponent, rng);
    const int agents_at_start = world.count_alive(Team::Agent);
    const int opponents_at_start = world.count_alive(Team::Opponent);
    JointActions actions(world.aircraft.size());
    while (outcome(world) == Outcome::Ongoing) {
        std::fill(actions.begin(), actions.end(), std::nullopt);
        agents.act(world, Team::Agent, actions, rng);
        opponents.act(world, Team::Opponent, actions, rng);
        const auto events = step(world, actions);
        if (observer) observer(world, actions, events, agents.modes());
    }
    EpisodeResult r;
    r.outcome = outcome(world);
    r.ticks = world.tick;
    r.agents_destroyed = agents_at_start - world.count_alive(Team::Agent);
    r.opponents_destroyed = opponents_at_start - world.count_alive(Team::Opponent);
    return r;
}

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
    if (n <= 0) return;
    workers = std::clamp(workers, 1, n);
    if (workers == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    errors[static_cast<std::size_t>(i)] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace hmarl
