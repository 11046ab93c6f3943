#pragma once

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include "hmarl/engine.hpp"
#include "hmarl/episode_log.hpp"
#include "hmarl/policy.hpp"

namespace hmarl {

/// Rocket head restricted to "hold" when the aircraft has no rockets (always for AC2).
ActionMask low_level_mask(const AircraftState& aircraft);

LowLevelAction to_low_level_action(std::span<const int> heads);
std::vector<int> to_head_indices(const LowLevelAction& a);

/// Runs a low-level controller network for one aircraft.
LowLevelAction policy_action(const PolicyNet& net, const WorldState& world, int aircraft_id, Rng& rng,
                             bool stochastic = true);

/// run_option with a controller network for the optioned agent.
OptionResult run_option(WorldState& world, int agent_id, OptionCommand& cmd, const PolicyNet& controller,
                        const ActionProvider& others, Rng& rng);

/// Chooses low-level actions for every living aircraft of one team each tick.
class TeamController {
public:
    virtual ~TeamController() = default;

    virtual void reset(const WorldState& /*world*/, Team /*team*/, Rng& /*rng*/) {}
    virtual void act(const WorldState& world, Team team, JointActions& out, Rng& rng) = 0;
    /// Active commander mode per aircraft id, or empty when the team has no commander.
    virtual ModeTable modes() const { return {}; }
};

/// Uniform random manoeuvres over the full LowLevelAction space.
class RandomController final : public TeamController {
public:
    void act(const WorldState& world, Team team, JointActions& out, Rng& rng) override;
};

/// Straight and level at cruise speed, never fires.
class IdleController final : public TeamController {
public:
    void act(const WorldState& world, Team team, JointActions& out, Rng& rng) override;
};

/// Arbitrary per-aircraft script.
class ScriptedController final : public TeamController {
public:
    explicit ScriptedController(ActionProvider script) : script_(std::move(script)) {}
    void act(const WorldState& world, Team team, JointActions& out, Rng& rng) override;

private:
    ActionProvider script_;
};

/// Each aircraft runs one low-level controller for the whole episode. The mode
/// is drawn per aircraft at reset from `mode_pool` (a single entry pins it).
class FixedModeController final : public TeamController {
public:
    FixedModeController(std::array<const PolicyNet*, kNumModes> nets, std::vector<Mode> mode_pool,
                        bool stochastic = true);

    void reset(const WorldState& world, Team team, Rng& rng) override;
    void act(const WorldState& world, Team team, JointActions& out, Rng& rng) override;
    const std::vector<Mode>& assigned() const { return assigned_; }

private:
    std::array<const PolicyNet*, kNumModes> nets_;
    std::vector<Mode> pool_;
    std::vector<Mode> assigned_;
    bool stochastic_;
};

/// Hierarchical team: every kOptionTicks ticks the commander picks a mode for
/// each living aircraft (called per aircraft on its own observation), then the
/// matching low-level controller flies it until the next decision.
class CommanderController final : public TeamController {
public:
    using ActivationHook = std::function<void(int high_level_step, const AircraftState& aircraft, Mode mode)>;

    CommanderController(const PolicyNet& commander, int m, const LowLevelPolicySet& controllers,
                        bool stochastic_commander = false, bool stochastic_controllers = true);

    void set_activation_hook(ActivationHook hook) { hook_ = std::move(hook); }
    void reset(const WorldState& world, Team team, Rng& rng) override;
    void act(const WorldState& world, Team team, JointActions& out, Rng& rng) override;
    ModeTable modes() const override { return modes_; }

private:
    const PolicyNet& commander_;
    int m_;
    const LowLevelPolicySet& controllers_;
    bool stochastic_commander_;
    bool stochastic_controllers_;
    ModeTable modes_;
    ActivationHook hook_;
};

struct EpisodeResult {
    Outcome outcome = Outcome::Ongoing;
    int ticks = 0;
    int opponents_destroyed = 0;
    int agents_destroyed = 0;
};

/// Per-tick callback: post-step world, applied actions, events, agent-team modes.
using TickObserver =
    std::function<void(const WorldState&, const JointActions&, const StepEvents&, const ModeTable&)>;

/// Plays `world` to completion. Controllers draw from `rng`; combat draws from world.rng.
EpisodeResult run_episode(WorldState& world, TeamController& agents, TeamController& opponents, Rng& rng,
                          const TickObserver& observer = {});

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Results must be written
/// to per-index slots so output does not depend on scheduling.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

}  // namespace hmarl
