#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hmarl/aircraft.hpp"
#include "hmarl/geometry.hpp"
#include "hmarl/rng.hpp"

namespace hmarl {

enum class Team { Agent = 0, Opponent = 1 };

/// Commander action space. The integer value is the commander's action index.
enum class Mode { Attack = 0, Engage = 1, Defend = 2 };
inline constexpr int kNumModes = 3;

std::string_view to_string(Mode m) noexcept;
Mode mode_from_index(int index);

inline constexpr double kDefaultMapSizeKm = 60.0;
inline constexpr int kMaxTicks = 500;
inline constexpr int kOptionTicks = 20;  // T_l; 500 / 20 = 25 commander decisions per episode
inline constexpr int kMaxCommanderSteps = kMaxTicks / kOptionTicks;

// Rocket model.
inline constexpr double kRocketSpeedKnots = 1200.0;
inline constexpr double kRocketTurnRate = 12.0;   // deg/s
inline constexpr int kRocketLifetimeTicks = 60;
inline constexpr double kRocketKillRadiusKm = 0.1;
inline constexpr double kRocketLockAta = 30.0;      // deg
inline constexpr double kRocketLockRangeFactor = 2.0;  // x d_a_max

// Discrete low-level controls. h in [-6, 6] turns the setpoint by 15 deg
// steps; v in [0, 8] picks a speed on the type's envelope.
struct LowLevelAction {
    int h = 0;
    int v = 4;
    int c_c = 0;
    int c_r = 0;

    friend bool operator==(const LowLevelAction&, const LowLevelAction&) = default;
};

inline constexpr int kHeadingChoices = 13;
inline constexpr int kVelocityChoices = 9;
inline constexpr double kHeadingStepDeg = 15.0;

struct AircraftState {
    int id = 0;
    Team team = Team::Agent;
    AircraftType type = AircraftType::AC1;
    Position pos;
    HeadingDeg heading;
    HeadingDeg heading_setpoint;
    double speed = 0.0;  // knots
    int cannon_remaining = 0;
    int rockets_remaining = 0;
    bool alive = true;

    const AircraftSpec& spec() const noexcept { return spec_for(type); }

    friend bool operator==(const AircraftState&, const AircraftState&) = default;
};

struct RocketState {
    int shooter_id = 0;
    int target_id = 0;
    Position pos;
    HeadingDeg heading;
    double speed = kRocketSpeedKnots;
    int ticks_remaining = kRocketLifetimeTicks;

    friend bool operator==(const RocketState&, const RocketState&) = default;
};

struct CannonShot {
    int shooter = 0;
    int target = 0;
    bool hit = false;
    friend bool operator==(const CannonShot&, const CannonShot&) = default;
};

struct RocketLaunch {
    int shooter = 0;
    int target = 0;
    friend bool operator==(const RocketLaunch&, const RocketLaunch&) = default;
};

struct RocketHit {
    int shooter = 0;
    int target = 0;
    friend bool operator==(const RocketHit&, const RocketHit&) = default;
};

struct Kill {
    int victim = 0;
    int killer = 0;
    bool friendly = false;  // killer and victim on the same team
    friend bool operator==(const Kill&, const Kill&) = default;
};

struct FriendlyFireHit {
    int shooter = 0;
    int target = 0;
    friend bool operator==(const FriendlyFireHit&, const FriendlyFireHit&) = default;
};

struct StepEvents {
    std::vector<CannonShot> cannon_shots;
    std::vector<RocketLaunch> rocket_launches;
    std::vector<RocketHit> rocket_hits;
    std::vector<Kill> kills;
    std::vector<FriendlyFireHit> friendly_fire_hits;

    bool empty() const noexcept;
    void append(const StepEvents& other);

    friend bool operator==(const StepEvents&, const StepEvents&) = default;
};

enum class Composition { HomogeneousAc1, Heterogeneous };

std::string_view to_string(Composition c) noexcept;
Composition composition_from_string(std::string_view s);

struct ScenarioConfig {
    int n_agents = 5;
    int n_opponents = 5;
    Composition composition = Composition::HomogeneousAc1;
    double map_size = kDefaultMapSizeKm;
    int max_ticks = kMaxTicks;
    double dt = 1.0;
    std::uint64_t seed = 0;
};

struct WorldState {
    int tick = 0;
    std::vector<AircraftState> aircraft;  // agents first, then opponents; id == index
    std::vector<RocketState> rockets;
    double map_size = kDefaultMapSizeKm;
    int max_ticks = kMaxTicks;
    double dt = 1.0;
    Rng rng;

    const AircraftState& at(int id) const;
    AircraftState& at(int id);
    int count_alive(Team team) const noexcept;

    friend bool operator==(const WorldState&, const WorldState&) = default;
};

/// Indexed by aircraft id. Living aircraft need an entry; dead ones must not have one.
using JointActions = std::vector<std::optional<LowLevelAction>>;

WorldState spawn_scenario(const ScenarioConfig& config);

/// Advances the world by one tick: setpoints and speeds from the actions,
/// kinematics, simultaneous cannon resolution, rocket flight, then launches.
StepEvents step(WorldState& world, const JointActions& actions);

HeadingDeg apply_heading_command(HeadingDeg current, int h);
double map_velocity(int v, const AircraftSpec& spec);

/// Fires one gated cannon round at the nearest aircraft (either team) inside
/// the shooter's WEZ. No aircraft in the WEZ: nothing is expended.
StepEvents resolve_cannon(WorldState& world, int shooter_id);

/// Launches a rocket if the shooter is an AC1 with rockets left and a lock.
StepEvents fire_rocket(WorldState& world, int shooter_id);

/// Moves every rocket one tick; detonations kill their targets.
StepEvents update_rockets(WorldState& world);

/// Nearest hostile satisfying the rocket lock cone, if any.
std::optional<int> rocket_lock_target(const WorldState& world, int shooter_id);

enum class Outcome { Ongoing, Win, Loss, Draw };
std::string_view to_string(Outcome o) noexcept;

/// Result from the agents' team point of view.
Outcome outcome(const WorldState& world);

// --------------------------------------------------------------------------
// Observations

/// Low-level observation layout: own block, nearest-friendly block, nearest-opponent block.
inline constexpr int kOwnBlockWidth = 7;
inline constexpr int kRelativeBlockWidth = 7;
inline constexpr int kLowLevelObsWidth = kOwnBlockWidth + 2 * kRelativeBlockWidth;
inline constexpr int kFriendlyBlockOffset = kOwnBlockWidth;
inline constexpr int kOpponentBlockOffset = kOwnBlockWidth + kRelativeBlockWidth;

/// Distance normalization used by every observation.
inline constexpr double kObsDistanceScaleKm = 30.0;

std::vector<double> low_level_observation(const WorldState& world, int agent_id);

/// Nearest living aircraft of the given side relative to `agent_id`, excluding itself.
std::optional<int> nearest_aircraft(const WorldState& world, int agent_id, bool hostile);

struct ContactBlock {
    double distance_km = 0.0;
    double ata_deg = 0.0;
    double aa_deg = 0.0;
    int type_index = 0;
    bool valid = false;

    friend bool operator==(const ContactBlock&, const ContactBlock&) = default;
};

struct CommanderOwnBlock {
    double x_norm = 0.0;
    double y_norm = 0.0;
    double heading_deg = 0.0;
    double speed_norm = 0.0;
    double ammo_frac = 0.0;
    double rocket_frac = 0.0;
    int type_index = 0;

    friend bool operator==(const CommanderOwnBlock&, const CommanderOwnBlock&) = default;
};

/// Structured commander view: own block plus m hostile and m friendly contacts,
/// each side sorted nearest-first and zero-padded.
struct CommanderObservation {
    CommanderOwnBlock own;
    std::vector<ContactBlock> hostiles;
    std::vector<ContactBlock> friendlies;

    int m() const noexcept { return static_cast<int>(hostiles.size()); }
};

inline constexpr int kMaxSensing = 5;
inline constexpr int kCommanderOwnWidth = 8;
inline constexpr int kContactWidth = 5;

constexpr int commander_obs_width(int m) noexcept { return kCommanderOwnWidth + 2 * m * kContactWidth; }
/// Offset of hostile contact k (0-based) in the encoded vector.
constexpr int commander_hostile_offset(int k) noexcept { return kCommanderOwnWidth + k * kContactWidth; }
constexpr int commander_friendly_offset(int m, int k) noexcept {
    return kCommanderOwnWidth + (m + k) * kContactWidth;
}
// Within a contact block: distance/scale, ata/180, aa/180, type index, valid flag.

CommanderObservation commander_observation(const WorldState& world, int agent_id, int m);
std::vector<double> encode(const CommanderObservation& obs);

// --------------------------------------------------------------------------
// Rewards

double reward_attack(int c_max, int c_rem, bool destroyed);
double reward_engage(const WorldState& world, int agent_id);
double reward_defend(bool destroyed, bool caused_friendly_kill);
double reward_commander(std::span<const StepEvents> window_events, int agent_id);

// --------------------------------------------------------------------------
// Options

struct OptionCommand {
    Mode mode = Mode::Attack;
    int duration = kOptionTicks;
    int elapsed = 0;
};

enum class TerminationReason { Duration, Death, EpisodeEnd };
std::string_view to_string(TerminationReason r) noexcept;

/// Produces the low-level action of one aircraft for the current tick.
using ActionProvider = std::function<LowLevelAction(const WorldState&, int aircraft_id)>;

struct OptionResult {
    StepEvents events;
    TerminationReason reason = TerminationReason::Duration;
};

/// Runs `controller` for `agent_id` until the option's duration elapses, the
/// agent dies, or the episode ends. Every other living aircraft acts via `others`.
OptionResult run_option(WorldState& world, int agent_id, OptionCommand& cmd, const ActionProvider& controller,
                        const ActionProvider& others);

}  // namespace hmarl
