#include "hmarl/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hmarl/errors.hpp"

namespace hmarl {

std::string_view to_string(Mode m) noexcept {
    switch (m) {
        case Mode::Attack: return "attack";
        case Mode::Engage: return "engage";
        case Mode::Defend: return "defend";
    }
    return "?";
}

Mode mode_from_index(int index) {
    if (index < 0 || index >= kNumModes) fail(ErrorKind::InvalidAction, "mode index " + std::to_string(index));
    return static_cast<Mode>(index);
}

std::string_view to_string(Composition c) noexcept {
    return c == Composition::HomogeneousAc1 ? "homo" : "hetero";
}

Composition composition_from_string(std::string_view s) {
    if (s == "homo" || s == "homogeneous" || s == "homogeneous_AC1") return Composition::HomogeneousAc1;
    if (s == "hetero" || s == "heterogeneous") return Composition::Heterogeneous;
    fail(ErrorKind::InvalidConfig, "unknown composition '" + std::string(s) + "'");
}

std::string_view to_string(Outcome o) noexcept {
    switch (o) {
        case Outcome::Ongoing: return "ongoing";
        case Outcome::Win: return "win";
        case Outcome::Loss: return "loss";
        case Outcome::Draw: return "draw";
    }
    return "?";
}

std::string_view to_string(TerminationReason r) noexcept {
    switch (r) {
        case TerminationReason::Duration: return "duration";
        case TerminationReason::Death: return "death";
        case TerminationReason::EpisodeEnd: return "episode_end";
    }
    return "?";
}

bool StepEvents::empty() const noexcept {
    return cannon_shots.empty() && rocket_launches.empty() && rocket_hits.empty() && kills.empty() &&
           friendly_fire_hits.empty();
}

void StepEvents::append(const StepEvents& o) {
    cannon_shots.insert(cannon_shots.end(), o.cannon_shots.begin(), o.cannon_shots.end());
    rocket_launches.insert(rocket_launches.end(), o.rocket_launches.begin(), o.rocket_launches.end());
    rocket_hits.insert(rocket_hits.end(), o.rocket_hits.begin(), o.rocket_hits.end());
    kills.insert(kills.end(), o.kills.begin(), o.kills.end());
    friendly_fire_hits.insert(friendly_fire_hits.end(), o.friendly_fire_hits.begin(), o.friendly_fire_hits.end());
}

const AircraftState& WorldState::at(int id) const {
    if (id < 0 || id >= static_cast<int>(aircraft.size()))
        fail(ErrorKind::InvalidQuery, "unknown aircraft id " + std::to_string(id));
    return aircraft[static_cast<std::size_t>(id)];
}

AircraftState& WorldState::at(int id) {
    return const_cast<AircraftState&>(static_cast<const WorldState&>(*this).at(id));
}

int WorldState::count_alive(Team team) const noexcept {
    return static_cast<int>(
        std::count_if(aircraft.begin(), aircraft.end(), [team](const auto& a) { return a.alive && a.team == team; }));
}

namespace {

std::vector<AircraftType> draw_team_types(int n, Composition composition, Rng& rng) {
    std::vector<AircraftType> types(static_cast<std::size_t>(n), AircraftType::AC1);
    if (composition == Composition::HomogeneousAc1) return types;
    for (auto& t : types) t = rng.bernoulli(0.5) ? AircraftType::AC1 : AircraftType::AC2;
    if (n >= 2 && std::all_of(types.begin(), types.end(), [&](AircraftType t) { return t == types.front(); })) {
        auto& flip = types[rng.uniform_index(static_cast<std::uint64_t>(n))];
        flip = flip == AircraftType::AC1 ? AircraftType::AC2 : AircraftType::AC1;
    }
    return types;
}

void keep_in_bounds(AircraftState& a, double map_size) {
    if (a.pos.x < 0.0 || a.pos.x > map_size) {
        a.pos.x = std::clamp(a.pos.x, 0.0, map_size);
        a.heading = wrap_heading(360.0 - a.heading.value());
        a.heading_setpoint = wrap_heading(360.0 - a.heading_setpoint.value());
    }
    if (a.pos.y < 0.0 || a.pos.y > map_size) {
        a.pos.y = std::clamp(a.pos.y, 0.0, map_size);
        a.heading = wrap_heading(180.0 - a.heading.value());
        a.heading_setpoint = wrap_heading(180.0 - a.heading_setpoint.value());
    }
}

void validate_action(const LowLevelAction& a) {
    if (a.h < -6 || a.h > 6) fail(ErrorKind::InvalidAction, "heading command out of range: " + std::to_string(a.h));
    if (a.v < 0 || a.v > 8) fail(ErrorKind::InvalidAction, "velocity command out of range: " + std::to_string(a.v));
    if ((a.c_c != 0 && a.c_c != 1) || (a.c_r != 0 && a.c_r != 1))
        fail(ErrorKind::InvalidAction, "trigger commands must be 0 or 1");
}

// Nearest aircraft inside the shooter's WEZ among `eligible`, ties to the lowest id.
std::optional<int> nearest_in_wez(const WorldState& world, const AircraftState& shooter,
                                  const std::vector<char>& eligible) {
    std::optional<int> best;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& other : world.aircraft) {
        if (other.id == shooter.id || !eligible[static_cast<std::size_t>(other.id)]) continue;
        if (other.pos == shooter.pos) continue;
        if (!in_wez(shooter.pos, shooter.heading, shooter.spec(), other.pos)) continue;
        const double d = distance_km(shooter.pos, other.pos);
        if (d < best_d) {
            best_d = d;
            best = other.id;
        }
    }
    return best;
}

// One gated cannon round. Marks the victim in `killed` without applying it, so
// a caller can resolve several shooters simultaneously.
void cannon_round(WorldState& world, int shooter_id, const std::vector<char>& eligible, std::vector<char>& killed,
                  StepEvents& ev) {
    auto& shooter = world.at(shooter_id);
    if (shooter.cannon_remaining <= 0) return;
    const auto target = nearest_in_wez(world, shooter, eligible);
    if (!target) return;
    shooter.cannon_remaining -= 1;
    const bool hit = world.rng.bernoulli(shooter.spec().hit_prob);
    ev.cannon_shots.push_back({shooter_id, *target, hit});
    if (!hit) return;
    const auto& victim = world.at(*target);
    const bool friendly = victim.team == shooter.team;
    if (friendly) ev.friendly_fire_hits.push_back({shooter_id, *target});
    auto& mark = killed[static_cast<std::size_t>(*target)];
    if (!mark) {
        mark = 1;
        ev.kills.push_back({*target, shooter_id, friendly});
    }
}

std::vector<char> alive_flags(const WorldState& world) {
    std::vector<char> flags(world.aircraft.size());
    for (const auto& a : world.aircraft) flags[static_cast<std::size_t>(a.id)] = a.alive ? 1 : 0;
    return flags;
}

// Closest distance from `p` to the segment [a, b].
double segment_distance(Position a, Position b, Position p) {
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    double t = 0.0;
    if (len2 > 0.0) t = std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / len2, 0.0, 1.0);
    return std::hypot(a.x + t * dx - p.x, a.y + t * dy - p.y);
}

void purge_stale_rockets(WorldState& world) {
    std::erase_if(world.rockets, [&](const RocketState& r) { return !world.at(r.target_id).alive; });
}

}  // namespace

WorldState spawn_scenario(const ScenarioConfig& config) {
    if (config.n_agents < 1 || config.n_opponents < 1) fail(ErrorKind::InvalidConfig, "team sizes must be >= 1");
    if (!(config.map_size > 0.0) || !(config.dt > 0.0) || config.max_ticks < 1)
        fail(ErrorKind::InvalidConfig, "map_size, dt and max_ticks must be positive");

    WorldState world;
    world.map_size = config.map_size;
    world.max_ticks = config.max_ticks;
    world.dt = config.dt;
    world.rng = Rng(derive_seed(config.seed, {name_tag("world")}));

    const double s = config.map_size;
    // Opposing 15 km bands (for the default 60 km map) separated by a 10 km gap.
    struct Band {
        Team team;
        int n;
        double y_lo, y_hi, heading;
    };
    const Band bands[2] = {{Team::Agent, config.n_agents, s / 6.0, s * 5.0 / 12.0, 0.0},
                           {Team::Opponent, config.n_opponents, s * 7.0 / 12.0, s * 5.0 / 6.0, 180.0}};
    int next_id = 0;
    for (const auto& band : bands) {
        const auto types = draw_team_types(band.n, config.composition, world.rng);
        for (int i = 0; i < band.n; ++i) {
            AircraftState a;
            a.id = next_id++;
            a.team = band.team;
            a.type = types[static_cast<std::size_t>(i)];
            a.pos.x = world.rng.uniform(s / 4.0, s * 3.0 / 4.0);
            a.pos.y = world.rng.uniform(band.y_lo, band.y_hi);
            a.heading = wrap_heading(band.heading + world.rng.uniform(-45.0, 45.0));
            a.heading_setpoint = a.heading;
            a.speed = map_velocity(4, a.spec());
            a.cannon_remaining = a.spec().cannon_capacity;
            a.rockets_remaining = a.spec().rocket_count;
            a.alive = true;
            world.aircraft.push_back(a);
        }
    }
    return world;
}

HeadingDeg apply_heading_command(HeadingDeg current, int h) {
    if (h < -6 || h > 6) fail(ErrorKind::InvalidAction, "heading command out of range: " + std::to_string(h));
    return wrap_heading(current.value() + kHeadingStepDeg * h);
}

double map_velocity(int v, const AircraftSpec& spec) {
    if (v < 0 || v > 8) fail(ErrorKind::InvalidAction, "velocity command out of range: " + std::to_string(v));
    return spec.v_min + (static_cast<double>(v) / 8.0) * (spec.v_max - spec.v_min);
}

StepEvents resolve_cannon(WorldState& world, int shooter_id) {
    const auto& shooter = world.at(shooter_id);
    if (!shooter.alive) fail(ErrorKind::InvalidAction, "dead aircraft cannot fire");
    StepEvents ev;
    const auto eligible = alive_flags(world);
    std::vector<char> killed(world.aircraft.size(), 0);
    cannon_round(world, shooter_id, eligible, killed, ev);
    for (const auto& k : ev.kills) world.at(k.victim).alive = false;
    purge_stale_rockets(world);
    return ev;
}

std::optional<int> rocket_lock_target(const WorldState& world, int shooter_id) {
    const auto& shooter = world.at(shooter_id);
    const double max_range = kRocketLockRangeFactor * shooter.spec().d_a_max;
    std::optional<int> best;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& other : world.aircraft) {
        if (!other.alive || other.team == shooter.team || other.pos == shooter.pos) continue;
        const double d = distance_km(shooter.pos, other.pos);
        if (d > max_range || ata(shooter.pos, shooter.heading, other.pos) > kRocketLockAta) continue;
        if (d < best_d) {
            best_d = d;
            best = other.id;
        }
    }
    return best;
}

StepEvents fire_rocket(WorldState& world, int shooter_id) {
    StepEvents ev;
    auto& shooter = world.at(shooter_id);
    if (!shooter.alive || shooter.rockets_remaining <= 0) return ev;
    const auto target = rocket_lock_target(world, shooter_id);
    if (!target) return ev;
    RocketState r;
    r.shooter_id = shooter_id;
    r.target_id = *target;
    r.pos = shooter.pos;
    r.heading = shooter.heading;
    world.rockets.push_back(r);
    shooter.rockets_remaining -= 1;
    ev.rocket_launches.push_back({shooter_id, *target});
    return ev;
}

StepEvents update_rockets(WorldState& world) {
    StepEvents ev;
    std::vector<RocketState> next;
    next.reserve(world.rockets.size());
    for (auto r : world.rockets) {
        auto& target = world.at(r.target_id);
        if (!target.alive) continue;
        const Position start = r.pos;
        if (!(start == target.pos)) {
            const double want = heading_difference(r.heading, bearing(start, target.pos));
            const double cap = kRocketTurnRate * world.dt;
            r.heading = wrap_heading(r.heading.value() + std::clamp(want, -cap, cap));
        }
        const double step_km = r.speed * kKnotToKmPerSec * world.dt;
        const double h = r.heading.value() * kDegToRad;
        r.pos = {start.x + step_km * std::sin(h), start.y + step_km * std::cos(h)};
        if (segment_distance(start, r.pos, target.pos) <= kRocketKillRadiusKm) {
            target.alive = false;
            ev.rocket_hits.push_back({r.shooter_id, r.target_id});
            ev.kills.push_back({r.target_id, r.shooter_id, world.at(r.shooter_id).team == target.team});
            continue;
        }
        if (--r.ticks_remaining <= 0) continue;
        next.push_back(r);
    }
    world.rockets = std::move(next);
    purge_stale_rockets(world);
    return ev;
}

StepEvents step(WorldState& world, const JointActions& actions) {
    if (actions.size() != world.aircraft.size())
        fail(ErrorKind::InvalidAction, "joint action table has " + std::to_string(actions.size()) + " entries for " +
                                           std::to_string(world.aircraft.size()) + " aircraft");
    if (world.tick >= world.max_ticks) fail(ErrorKind::InvalidState, "episode already reached max_ticks");
    for (const auto& a : world.aircraft) {
        const auto& act = actions[static_cast<std::size_t>(a.id)];
        if (a.alive && !act) fail(ErrorKind::InvalidAction, "missing action for aircraft " + std::to_string(a.id));
        if (!a.alive && act) fail(ErrorKind::InvalidAction, "action for dead aircraft " + std::to_string(a.id));
        if (act) validate_action(*act);
    }

    // Kinematics.
    for (auto& a : world.aircraft) {
        if (!a.alive) continue;
        const auto& act = *actions[static_cast<std::size_t>(a.id)];
        a.heading_setpoint = apply_heading_command(a.heading, act.h);
        a.speed = map_velocity(act.v, a.spec());
        const double cap = a.spec().omega_max * world.dt;
        const double turn = std::clamp(heading_difference(a.heading, a.heading_setpoint), -cap, cap);
        a.heading = wrap_heading(a.heading.value() + turn);
        const double step_km = a.speed * kKnotToKmPerSec * world.dt;
        const double h = a.heading.value() * kDegToRad;
        a.pos.x += step_km * std::sin(h);
        a.pos.y += step_km * std::cos(h);
        keep_in_bounds(a, world.map_size);
    }

    // Cannons fire simultaneously: everyone alive after the move may shoot and be shot.
    StepEvents ev;
    const auto eligible = alive_flags(world);
    std::vector<char> killed(world.aircraft.size(), 0);
    for (const auto& a : world.aircraft) {
        if (a.alive && actions[static_cast<std::size_t>(a.id)]->c_c == 1) cannon_round(world, a.id, eligible, killed, ev);
    }
    for (const auto& k : ev.kills) world.at(k.victim).alive = false;
    purge_stale_rockets(world);

    ev.append(update_rockets(world));

    for (const auto& a : world.aircraft) {
        if (a.alive && actions[static_cast<std::size_t>(a.id)]->c_r == 1) ev.append(fire_rocket(world, a.id));
    }

    world.tick += 1;
    return ev;
}

Outcome outcome(const WorldState& world) {
    const int agents = world.count_alive(Team::Agent);
    const int opponents = world.count_alive(Team::Opponent);
    if (agents == 0 && opponents == 0) return Outcome::Draw;
    if (opponents == 0) return Outcome::Win;
    if (agents == 0) return Outcome::Loss;
    if (world.tick >= world.max_ticks) return Outcome::Draw;
    return Outcome::Ongoing;
}

OptionResult run_option(WorldState& world, int agent_id, OptionCommand& cmd, const ActionProvider& controller,
                        const ActionProvider& others) {
    if (!world.at(agent_id).alive) fail(ErrorKind::InvalidCommand, "option issued to dead aircraft");
    if (static_cast<int>(cmd.mode) < 0 || static_cast<int>(cmd.mode) >= kNumModes)
        fail(ErrorKind::InvalidCommand, "invalid option mode");
    if (cmd.duration < 1) fail(ErrorKind::InvalidCommand, "option duration must be >= 1");

    OptionResult result;
    JointActions actions(world.aircraft.size());
    while (cmd.elapsed < cmd.duration) {
        if (outcome(world) != Outcome::Ongoing) {
            result.reason = TerminationReason::EpisodeEnd;
            return result;
        }
        for (const auto& a : world.aircraft) {
            auto& slot = actions[static_cast<std::size_t>(a.id)];
            if (!a.alive)
                slot.reset();
            else
                slot = a.id == agent_id ? controller(world, a.id) : others(world, a.id);
        }
        result.events.append(step(world, actions));
        cmd.elapsed += 1;
        if (!world.at(agent_id).alive) {
            result.reason = TerminationReason::Death;
            return result;
        }
        if (outcome(world) != Outcome::Ongoing) {
            result.reason = TerminationReason::EpisodeEnd;
            return result;
        }
    }
    result.reason = TerminationReason::Duration;
    return result;
}

}  // namespace hmarl
