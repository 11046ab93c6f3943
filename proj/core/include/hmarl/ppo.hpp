#pragma once

#include <cstdint>
#include <vector>

#include "hmarl/policy.hpp"

namespace hmarl {

struct PpoConfig {
    double gamma = 0.99;
    double gae_lambda = 0.95;
    double clip = 0.2;
    double learning_rate = 3e-4;
    int epochs_per_update = 4;
    int minibatch_size = 256;
    double entropy_coef = 0.01;
    double value_coef = 0.5;
    double max_grad_norm = 0.5;
    double reward_scale = 1.0;        // applied to rewards before GAE; metrics stay unscaled
    int rollout_ticks = 256;          // ticks per environment instance per update
    int num_envs = 8;                 // independent environment instances
    std::int64_t total_env_steps = 500'000;
    std::uint64_t seed = 0;
    int workers = 1;

    void validate() const;
};

struct Transition {
    std::vector<double> obs;
    std::vector<int> action;
    ActionMask mask;
    double log_prob = 0.0;
    double reward = 0.0;
    double value = 0.0;
    bool done = false;             // terminal: no bootstrap
    bool truncated = false;        // segment cut by the rollout horizon
    double bootstrap_value = 0.0;  // V(s_{t+1}) when truncated
    int agent_id = 0;
    int env_id = 0;
    double advantage = 0.0;
    double ret = 0.0;
};

/// Trajectory segments are stored contiguously; each ends with done or truncated.
struct RolloutBuffer {
    std::vector<Transition> steps;
    bool advantages_ready = false;

    std::size_t size() const noexcept { return steps.size(); }
};

/// Reverse-recursion GAE. Returns are advantage + value.
void compute_gae(RolloutBuffer& buffer, double gamma, double lambda);

/// min(ratio * A, clip(ratio, 1 - eps, 1 + eps) * A).
double clipped_surrogate(double ratio, double advantage, double eps) noexcept;

class Adam {
public:
    explicit Adam(double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

    /// Applies one step to every parameter block from `first_block` on.
    void step(PolicyNet& net, const Gradients& grads, int first_block = 0);
    double learning_rate() const noexcept { return lr_; }

private:
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

struct PpoStats {
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    double approx_kl = 0.0;
    double clip_fraction = 0.0;
    int minibatches = 0;
};

struct PpoLossTerms {
    double total = 0.0;
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    double approx_kl = 0.0;
    double clip_fraction = 0.0;
};

/// Total loss over `indices` of the buffer:
///   -mean(clipped surrogate) + value_coef * mean((V - R)^2) - entropy_coef * mean(H).
/// Uses each transition's `advantage` as is (normalise beforehand). When `grads`
/// is non-null the exact gradient of `total` is accumulated into it.
PpoLossTerms ppo_loss(const PolicyNet& net, const RolloutBuffer& buffer, const std::vector<std::size_t>& indices,
                      const PpoConfig& config, Gradients* grads);

/// Normalises advantages over the whole buffer to zero mean, unit variance.
void normalize_advantages(RolloutBuffer& buffer);

/// Clipped-surrogate PPO over minibatch epochs. Blocks before `first_block`
/// (e.g. a frozen shared trunk) are left untouched. Throws Divergence on
/// non-finite losses or parameters.
PpoStats ppo_update(PolicyNet& net, RolloutBuffer& buffer, const PpoConfig& config, Adam& optimizer, Rng& rng,
                    int first_block = 0);

}  // namespace hmarl
