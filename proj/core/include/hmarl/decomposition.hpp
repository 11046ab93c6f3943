#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hmarl/controllers.hpp"

namespace hmarl {

/// One commander window of one agent: the mode it ran and the commander reward
/// it earned during the window.
struct CommanderWindow {
    int episode = 0;
    int step = 0;
    int agent = 0;
    std::optional<Mode> mode;
    double reward = 0.0;
    bool done = false;         // last window of this agent in the episode
    std::vector<double> obs;   // encoded commander observation at the decision
};

inline const std::array<std::string, kNumModes> kComponentLabels = {"attack", "engage", "defend"};

struct ComponentReturns {
    int episode = 0;
    int agent = -1;  // -1 for the pooled (global) view
    std::array<double, kNumModes> components{};
    double total = 0.0;
};

struct RewardComponents {
    std::array<std::string, kNumModes> labels = kComponentLabels;
    std::vector<ComponentReturns> rows;  // sorted by (episode, agent)
};

enum class DecompositionView { Global, Local };

/// Attributes every window reward to the component of the mode that was active.
/// Global pools all agents per episode; Local keeps only `agent`.
/// Throws LogIntegrity when a window has no recorded mode.
RewardComponents decompose_returns(const std::vector<CommanderWindow>& windows, DecompositionView view,
                                   int agent = -1);

/// Plays `episodes` commander-driven episodes and logs every window.
std::vector<CommanderWindow> record_commander_windows(const PolicyNet& commander, int m,
                                                      const LowLevelPolicySet& controllers,
                                                      const ScenarioConfig& scenario,
                                                      const std::vector<Mode>& opponent_pool, int episodes,
                                                      std::uint64_t seed);

/// Regression sample: commander state, action and per-component reward.
struct QSample {
    int episode = 0;
    int agent = 0;
    int step = 0;
    bool done = false;
    std::vector<double> obs;
    int action = 0;
    std::vector<double> rewards;  // one entry per component
};

/// Splits each window reward into the component of its active mode.
std::vector<QSample> component_samples(const std::vector<CommanderWindow>& windows);

struct QConfig {
    double gamma = 0.99;
    std::vector<int> hidden = {64, 64};
    int epochs = 200;
    int minibatch = 64;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;
};

/// One value regressor per component over (state, one-hot action).
struct DecomposedQ {
    std::vector<std::string> labels;
    int obs_width = 0;
    int num_actions = kNumModes;
    std::vector<PolicyNet> nets;

    int components() const noexcept { return static_cast<int>(nets.size()); }
    double q(int component, std::span<const double> obs, int action) const;
    /// Sum over components.
    double q_total(std::span<const double> obs, int action) const;
};

/// Discounted per-component return of every sample, computed backwards along
/// each (episode, agent) trajectory in step order.
std::vector<std::vector<double>> discounted_component_returns(const std::vector<QSample>& samples, double gamma);

/// Fits one regressor per component on the discounted component returns.
/// Throws InsufficientData when `samples` is empty.
DecomposedQ train_decomposed_q(const std::vector<QSample>& samples, const std::vector<std::string>& labels,
                               const QConfig& config);

/// Q^i(s, a1) - Q^i(s, a2). Throws InvalidComponent for an unknown component
/// and InvalidAction for an unknown action.
double q_delta(const DecomposedQ& dq, std::span<const double> obs, int a1, int a2, int component);

}  // namespace hmarl
