#include <string>

#include "hmarl/engine.hpp"
#include "hmarl/errors.hpp"

namespace hmarl {

double reward_attack(int c_max, int c_rem, bool destroyed) {
    if (c_max <= 0 || c_rem < 0 || c_rem > c_max)
        fail(ErrorKind::InvalidState,
             "cannon state out of range: c_rem=" + std::to_string(c_rem) + " c_max=" + std::to_string(c_max));
    const double spent = static_cast<double>(c_max - c_rem) / static_cast<double>(c_max);
    return spent + (destroyed ? -1.0 : 0.0);
}

double reward_engage(const WorldState& world, int agent_id) {
    const auto& agent = world.at(agent_id);
    if (!agent.alive) return 0.0;
    const auto opp_id = nearest_aircraft(world, agent_id, true);
    if (!opp_id) return 0.0;
    const auto& opp = world.at(*opp_id);
    if (opp.pos == agent.pos) return 0.0;
    // Opponent's ATA toward the agent is 180 when the agent sits on its tail.
    const double ata_o = ata(opp.pos, opp.heading, agent.pos) / 180.0;
    const double aa_o = 1.0 - aspect_angle(agent.pos, opp.pos, opp.heading) / 180.0;
    return ata_o + aa_o;
}

double reward_defend(bool destroyed, bool caused_friendly_kill) {
    return (destroyed ? -1.0 : 0.0) + (caused_friendly_kill ? -1.0 : 0.0);
}

double reward_commander(std::span<const StepEvents> window_events, int agent_id) {
    double r = 0.0;
    for (const auto& ev : window_events) {
        for (const auto& k : ev.kills) {
            if (k.killer == agent_id && !k.friendly) r += 1.0;
            if (k.victim == agent_id) r -= 1.0;
        }
    }
    return r;
}

}  // namespace hmarl
