#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hmarl/engine.hpp"

namespace hmarl {

/// Active commander mode per aircraft id; empty when no commander is running.
using ModeTable = std::vector<std::optional<Mode>>;

/// One JSON object (single line, no trailing newline) describing a tick:
/// the actions applied, the resulting state and the events. Schema: docs/formats.md.
std::string format_tick_record(const WorldState& post, const JointActions& actions, const StepEvents& events,
                               const ModeTable& modes = {});

struct LoggedTick {
    int tick = 0;
    JointActions actions;
    ModeTable modes;
    StepEvents events;
    std::vector<AircraftState> aircraft;
};

/// Parses a JSON-lines episode log. Throws LogIntegrity on malformed input.
std::vector<LoggedTick> read_episode_log(std::istream& in);

/// Re-simulates an episode from its scenario and the logged action sequence,
/// returning the log text it produces.
std::string replay_episode(const ScenarioConfig& scenario, const std::vector<LoggedTick>& ticks);

/// Human-readable event timeline of a parsed log. First line is a header.
std::vector<std::string> timeline(const std::vector<LoggedTick>& ticks);

}  // namespace hmarl
