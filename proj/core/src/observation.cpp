#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hmarl/engine.hpp"
#include "hmarl/errors.hpp"

namespace hmarl {
namespace {

double speed_norm(const AircraftState& a) {
    const auto& s = a.spec();
    return (a.speed - s.v_min) / (s.v_max - s.v_min);
}

double ammo_frac(const AircraftState& a) {
    return static_cast<double>(a.cannon_remaining) / static_cast<double>(a.spec().cannon_capacity);
}

double rocket_frac(const AircraftState& a) {
    const int cap = a.spec().rocket_count;
    return cap > 0 ? static_cast<double>(a.rockets_remaining) / cap : 0.0;
}

struct Relative {
    double distance = 0.0;
    double rel_bearing = 0.0;  // signed, deg, from own heading
    double ata = 0.0;
    double aa = 0.0;
};

// Coincident aircraft have no line of sight; report zero angles rather than throw.
Relative relative(const AircraftState& own, const AircraftState& other) {
    Relative r;
    r.distance = distance_km(own.pos, other.pos);
    if (r.distance == 0.0) return r;
    r.rel_bearing = heading_difference(own.heading, bearing(own.pos, other.pos));
    r.ata = ata(own.pos, own.heading, other.pos);
    r.aa = aspect_angle(own.pos, other.pos, other.heading);
    return r;
}

// Living aircraft on one side of `agent`, nearest first (ties by id).
std::vector<int> sorted_contacts(const WorldState& world, const AircraftState& agent, bool hostile) {
    std::vector<std::pair<double, int>> found;
    for (const auto& a : world.aircraft) {
        if (!a.alive || a.id == agent.id) continue;
        if ((a.team != agent.team) != hostile) continue;
        found.emplace_back(distance_km(agent.pos, a.pos), a.id);
    }
    std::sort(found.begin(), found.end());
    std::vector<int> ids;
    ids.reserve(found.size());
    for (const auto& [d, id] : found) ids.push_back(id);
    return ids;
}

void write_relative_block(std::vector<double>& out, int offset, const AircraftState& own, const AircraftState* other) {
    if (other == nullptr) return;  // zero-filled, validity flag 0
    const auto r = relative(own, *other);
    auto* b = out.data() + offset;
    b[0] = 1.0;
    b[1] = r.distance / kObsDistanceScaleKm;
    b[2] = std::sin(r.rel_bearing * kDegToRad);
    b[3] = std::cos(r.rel_bearing * kDegToRad);
    b[4] = r.ata / 180.0;
    b[5] = r.aa / 180.0;
    b[6] = ammo_frac(*other);
}

}  // namespace

std::optional<int> nearest_aircraft(const WorldState& world, int agent_id, bool hostile) {
    const auto ids = sorted_contacts(world, world.at(agent_id), hostile);
    if (ids.empty()) return std::nullopt;
    return ids.front();
}

std::vector<double> low_level_observation(const WorldState& world, int agent_id) {
    const auto& own = world.at(agent_id);
    if (!own.alive) fail(ErrorKind::InvalidQuery, "observation requested for dead aircraft " + std::to_string(agent_id));
    std::vector<double> obs(kLowLevelObsWidth, 0.0);
    const double h = own.heading.value() * kDegToRad;
    obs[0] = own.pos.x / world.map_size;
    obs[1] = own.pos.y / world.map_size;
    obs[2] = std::sin(h);
    obs[3] = std::cos(h);
    obs[4] = speed_norm(own);
    obs[5] = ammo_frac(own);
    obs[6] = own.rockets_remaining > 0 ? 1.0 : 0.0;

    const auto friendly = nearest_aircraft(world, agent_id, false);
    const auto hostile = nearest_aircraft(world, agent_id, true);
    write_relative_block(obs, kFriendlyBlockOffset, own, friendly ? &world.at(*friendly) : nullptr);
    write_relative_block(obs, kOpponentBlockOffset, own, hostile ? &world.at(*hostile) : nullptr);
    return obs;
}

CommanderObservation commander_observation(const WorldState& world, int agent_id, int m) {
    if (m < 1 || m > kMaxSensing) fail(ErrorKind::InvalidConfig, "sensing range m must be in [1, 5]");
    const auto& own = world.at(agent_id);
    if (!own.alive) fail(ErrorKind::InvalidQuery, "commander observation requested for dead aircraft");

    CommanderObservation obs;
    obs.own.x_norm = own.pos.x / world.map_size;
    obs.own.y_norm = own.pos.y / world.map_size;
    obs.own.heading_deg = own.heading.value();
    obs.own.speed_norm = speed_norm(own);
    obs.own.ammo_frac = ammo_frac(own);
    obs.own.rocket_frac = rocket_frac(own);
    obs.own.type_index = type_index(own.type);

    auto fill = [&](bool hostile, std::vector<ContactBlock>& blocks) {
        blocks.assign(static_cast<std::size_t>(m), ContactBlock{});
        const auto ids = sorted_contacts(world, own, hostile);
        for (std::size_t k = 0; k < blocks.size() && k < ids.size(); ++k) {
            const auto& other = world.at(ids[k]);
            const auto r = relative(own, other);
            blocks[k] = {r.distance, r.ata, r.aa, type_index(other.type), true};
        }
    };
    fill(true, obs.hostiles);
    fill(false, obs.friendlies);
    return obs;
}

std::vector<double> encode(const CommanderObservation& obs) {
    const int m = obs.m();
    if (static_cast<int>(obs.friendlies.size()) != m || m < 1 || m > kMaxSensing)
        fail(ErrorKind::Shape, "commander observation needs m hostile and m friendly blocks, 1 <= m <= 5");
    std::vector<double> v(static_cast<std::size_t>(commander_obs_width(m)), 0.0);
    const double h = obs.own.heading_deg * kDegToRad;
    v[0] = obs.own.x_norm;
    v[1] = obs.own.y_norm;
    v[2] = std::sin(h);
    v[3] = std::cos(h);
    v[4] = obs.own.speed_norm;
    v[5] = obs.own.ammo_frac;
    v[6] = obs.own.rocket_frac;
    v[7] = obs.own.type_index;
    auto put = [&](int offset, const ContactBlock& c) {
        if (!c.valid) return;
        auto* b = v.data() + offset;
        b[0] = c.distance_km / kObsDistanceScaleKm;
        b[1] = c.ata_deg / 180.0;
        b[2] = c.aa_deg / 180.0;
        b[3] = c.type_index;
        b[4] = 1.0;
    };
    for (int k = 0; k < m; ++k) {
        put(commander_hostile_offset(k), obs.hostiles[static_cast<std::size_t>(k)]);
        put(commander_friendly_offset(m, k), obs.friendlies[static_cast<std::size_t>(k)]);
    }
    return v;
}

}  // namespace hmarl
