#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hmarl/explain.hpp"
#include "hmarl/training.hpp"

namespace hmarl {

struct CommanderSection {
    int m = 3;
    std::vector<Mode> opponent_pool = {Mode::Attack, Mode::Engage};
};

struct EvalSection {
    int episodes = 100;
};

/// Single configuration schema shared by every CLI command. Every section is
/// optional; missing keys keep their defaults, unknown keys are rejected.
struct RunConfig {
    std::uint64_t seed = 0;
    std::string output_dir;
    int workers = 1;
    ScenarioConfig scenario;
    PpoConfig ppo;
    LeagueConfig league;
    NetArchitecture net;
    CommanderSection commander;
    EvalSection eval;
    GlobalSweepSpec global_sweep;
    LocalSweepSpec local_sweep;
};

/// Throws InvalidConfig on malformed JSON, unknown keys, wrong types or values
/// outside their documented ranges.
RunConfig parse_run_config(std::string_view json_text);
/// As parse_run_config; a missing or unreadable file is an InvalidConfig error.
RunConfig load_run_config(const std::filesystem::path& path);

/// Canonical JSON of the effective configuration (stable key order).
std::string to_json(const RunConfig& config);

Mode mode_from_string(std::string_view s);

}  // namespace hmarl
