#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hmarl/controllers.hpp"

namespace hmarl {

enum class OpponentStrategy { Attack = 0, Engage = 1, Defend = 2, Mixed = 3 };

std::string_view to_string(OpponentStrategy s) noexcept;
OpponentStrategy opponent_strategy_from_string(std::string_view s);
/// Modes an opponent may be assigned under `s` (one per aircraft, drawn at spawn).
std::vector<Mode> strategy_modes(OpponentStrategy s);

/// One sweep axis. `labels` is empty for numeric axes; for categorical axes it
/// names each value.
struct Axis {
    std::string name;
    std::vector<double> values;
    std::vector<std::string> labels;

    std::size_t size() const noexcept { return values.size(); }
    std::string label(std::size_t i) const;

    friend bool operator==(const Axis&, const Axis&) = default;
};

/// One commander decision. `cell` holds the coordinates on the sweep axes:
/// (strategy index, combat difference, m) for global sweeps, (d, ata, aa) for
/// local sweeps.
struct ActivationRecord {
    std::array<double, 3> cell{};
    int episode = 0;
    int step = 0;
    int agent = 0;
    int type = 0;
    Mode mode = Mode::Attack;

    friend bool operator==(const ActivationRecord&, const ActivationRecord&) = default;
};

// ---------------------------------------------------------------------------
// Global sweep

struct GlobalSweepSpec {
    std::vector<OpponentStrategy> strategies = {OpponentStrategy::Attack, OpponentStrategy::Engage,
                                                OpponentStrategy::Defend, OpponentStrategy::Mixed};
    std::vector<int> differences = {-4, -3, -2, -1, 0, 1, 2, 3, 4, 5};
    std::vector<int> sensing = {1, 2, 3, 4, 5};
    int episodes_per_cell = 100;
    int baseline_team = 5;  // difference k spawns (baseline + k)-vs-baseline
    Composition composition = Composition::HomogeneousAc1;
    double map_size = kDefaultMapSizeKm;
    int max_ticks = kMaxTicks;
    std::uint64_t seed = 0;

    void validate() const;
};

struct GlobalCell {
    int index = 0;
    OpponentStrategy strategy = OpponentStrategy::Attack;
    int difference = 0;
    int m = 1;
};

/// Cells in strategy-major, then difference, then m order.
std::vector<GlobalCell> enumerate_cells(const GlobalSweepSpec& spec);
std::array<Axis, 3> global_axes(const GlobalSweepSpec& spec);
ScenarioConfig cell_scenario(const GlobalSweepSpec& spec, const GlobalCell& cell, int episode);

struct CellRun {
    GlobalCell cell;
    int episodes = 0;
    int max_ticks = 0;               // longest episode observed
    int max_high_level_steps = 0;    // most commander decisions in one episode
};

struct GlobalSweepResult {
    std::vector<ActivationRecord> records;
    std::vector<CellRun> cells;
};

/// Runs every cell (or only the cell indices in `cell_filter`). Commanders are
/// keyed by m. Throws MissingArtifact when some m on the axis has no commander.
GlobalSweepResult run_global_sweep(const GlobalSweepSpec& spec, const std::map<int, PolicyNet>& commanders,
                                   const LowLevelPolicySet& controllers, int workers = 1,
                                   const std::vector<int>& cell_filter = {});

/// Parses "3,7,10-19" into sorted unique cell indices.
std::vector<int> parse_cell_filter(std::string_view text, int cell_count);

// ---------------------------------------------------------------------------
// Local sweep

struct LocalSweepSpec {
    std::vector<double> d_bins = {1, 3, 5, 7, 9, 11, 13, 15};
    std::vector<double> ata_bins = {0, 30, 60, 90, 120, 150, 180};
    std::vector<double> aa_bins = {0, 30, 60, 90, 120, 150, 180};
    int m = 3;
    int samples_per_cell = 100;
    std::uint64_t seed = 0;

    void validate() const;
};

inline constexpr double kFillerMinDistanceKm = 0.5;
inline constexpr double kFillerMaxDistanceKm = 30.0;

std::array<Axis, 3> local_axes(const LocalSweepSpec& spec);

/// Maps an encoded commander observation to a mode.
using CommanderQuery = std::function<Mode(std::span<const double> obs)>;

/// Argmax action of a commander network.
CommanderQuery argmax_query(const PolicyNet& commander);

/// Scripted reference: attack iff AA < 60 and ATA < 60; defend iff AA > 120;
/// engage otherwise. Reads the nearest hostile block of an m-contact view.
CommanderQuery rule_commander();
Mode rule_mode(double ata_deg, double aa_deg) noexcept;

/// Commander observation with the nearest hostile fixed to (d, ata, aa) and
/// every other entry drawn from its valid range.
std::vector<double> synthetic_observation(int m, double d_km, double ata_deg, double aa_deg, Rng& rng);

/// Throws InternalConsistency unless each contact list is nearest-first and
/// every valid distance lies in the filler range.
void check_synthetic_observation(std::span<const double> obs, int m);

std::vector<ActivationRecord> run_local_sweep(const LocalSweepSpec& spec, const CommanderQuery& query,
                                              int workers = 1);
/// Requires an m = 3 commander (Shape error otherwise).
std::vector<ActivationRecord> run_local_sweep(const LocalSweepSpec& spec, const PolicyNet& commander,
                                              int workers = 1);

// ---------------------------------------------------------------------------
// Aggregation

struct ExplanationGrid {
    std::string kind;  // "global" or "local"
    std::array<Axis, 3> axes;
    std::vector<std::array<std::int64_t, kNumModes>> counts;  // row-major over axes

    std::size_t cell_count() const noexcept { return counts.size(); }
    std::size_t flat_index(std::size_t i, std::size_t j, std::size_t k) const noexcept {
        return (i * axes[1].size() + j) * axes[2].size() + k;
    }
    std::int64_t samples(std::size_t cell) const noexcept;
    /// Most frequent mode; ties go to the lowest mode index. Empty cells have none.
    std::optional<Mode> argmax(std::size_t cell) const;
    /// True when two or more modes share the maximum count of a non-empty cell.
    bool tie(std::size_t cell) const;

    friend bool operator==(const ExplanationGrid&, const ExplanationGrid&) = default;
};

/// Counts records per (cell, mode). Throws Aggregation for off-axis records.
ExplanationGrid aggregate(const std::vector<ActivationRecord>& records, const std::array<Axis, 3>& axes,
                          std::string kind = "local");

inline constexpr int kGridFormatVersion = 1;

std::string grid_to_json(const ExplanationGrid& grid);
/// Throws InvalidInput on malformed text.
ExplanationGrid grid_from_json(std::string_view text);

void write_records_csv(std::ostream& out, const std::vector<ActivationRecord>& records,
                       const std::array<Axis, 3>& axes);

}  // namespace hmarl
