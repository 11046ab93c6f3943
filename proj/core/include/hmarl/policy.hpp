#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hmarl/rng.hpp"

namespace hmarl {

enum class PolicyRole { Attack = 0, Engage = 1, Defend = 2, Commander = 3 };

std::string_view to_string(PolicyRole r) noexcept;
PolicyRole policy_role_from_string(std::string_view s);

/// Fully connected layer, weights row-major [out][in].
struct Dense {
    int in = 0;
    int out = 0;
    std::vector<double> w;
    std::vector<double> b;

    Dense() = default;
    Dense(int in_width, int out_width)
        : in(in_width), out(out_width), w(static_cast<std::size_t>(in_width * out_width), 0.0),
          b(static_cast<std::size_t>(out_width), 0.0) {}

    friend bool operator==(const Dense&, const Dense&) = default;
};

/// Stack of tanh layers. May be referenced by several PolicyNets at once.
struct Trunk {
    std::vector<Dense> layers;

    int input_width() const noexcept { return layers.empty() ? 0 : layers.front().in; }
    int output_width() const noexcept { return layers.empty() ? 0 : layers.back().out; }

    friend bool operator==(const Trunk&, const Trunk&) = default;
};

/// Policy/value network: trunk -> tanh head stack -> (categorical logits, value).
///
/// The low-level controllers (attack/engage/defend) are built on one shared
/// Trunk object, so an update applied through any of them is visible to all.
/// The commander owns its trunk.
struct PolicyNet {
    PolicyRole role = PolicyRole::Attack;
    std::vector<int> head_spec;          // categorical head cardinalities
    std::shared_ptr<Trunk> trunk;
    std::vector<Dense> head_layers;      // tanh
    Dense policy_out;                    // sum(head_spec) logits
    Dense value_out;                     // 1 output
    bool frozen = false;                 // frozen nets are rejected by trainers
    std::map<std::string, std::string> tags;

    int input_width() const noexcept { return trunk ? trunk->input_width() : 0; }
    int logit_width() const noexcept { return policy_out.out; }
};

inline const std::vector<int> kLowLevelHeads = {13, 9, 2, 2};
inline const std::vector<int> kCommanderHeads = {3};

struct NetArchitecture {
    std::vector<int> trunk_hidden = {64, 64};
    std::vector<int> head_hidden = {64};
};

/// Orthogonal init with the given gain (biases zero).
void orthogonal_init(Dense& layer, double gain, Rng& rng);

std::shared_ptr<Trunk> make_trunk(int input_width, const std::vector<int>& hidden, Rng& rng);

/// Builds a net on `trunk` (shared, not copied). Policy logits are initialised
/// with gain 0.01 so the initial policy is near uniform.
PolicyNet make_policy_net(PolicyRole role, std::shared_ptr<Trunk> trunk, const std::vector<int>& head_hidden,
                          const std::vector<int>& head_spec, Rng& rng);

/// Three low-level controllers on one shared trunk, indexed by Mode.
struct LowLevelPolicySet {
    std::shared_ptr<Trunk> trunk;
    std::vector<PolicyNet> nets;  // [attack, engage, defend]

    PolicyNet& operator[](int mode) { return nets.at(static_cast<std::size_t>(mode)); }
    const PolicyNet& operator[](int mode) const { return nets.at(static_cast<std::size_t>(mode)); }
};

LowLevelPolicySet make_low_level_set(int input_width, std::uint64_t seed, const NetArchitecture& arch = {});

/// Independent commander network for sensing range m. head_hidden is empty.
PolicyNet make_commander_net(int input_width, std::uint64_t seed, const NetArchitecture& arch = {});

/// Copy with its own trunk (no aliasing with the source).
PolicyNet deep_copy(const PolicyNet& net);

// ---------------------------------------------------------------------------
// Inference

struct ForwardResult {
    std::vector<double> logits;
    double value = 0.0;
};

/// Activations kept for backprop: input followed by every tanh layer output.
struct ForwardCache {
    std::vector<std::vector<double>> acts;
    std::vector<double> logits;
    double value = 0.0;
};

ForwardResult forward(const PolicyNet& net, std::span<const double> obs);
void forward(const PolicyNet& net, std::span<const double> obs, ForwardCache& cache);

/// Per-head permitted entries. Empty `heads` means nothing is masked.
struct ActionMask {
    std::vector<std::vector<char>> heads;
};

ActionMask full_mask(const std::vector<int>& head_spec);

struct SampledAction {
    std::vector<int> action;
    double log_prob = 0.0;
};

SampledAction sample(std::span<const double> logits, const std::vector<int>& head_spec, const ActionMask& mask,
                     Rng& rng);
std::vector<int> argmax_action(std::span<const double> logits, const std::vector<int>& head_spec,
                               const ActionMask& mask);

/// Masked softmax of each head, concatenated. Masked entries are exactly 0.
std::vector<double> head_probabilities(std::span<const double> logits, const std::vector<int>& head_spec,
                                       const ActionMask& mask);

struct LogProbEntropy {
    double log_prob = 0.0;
    double entropy = 0.0;
};

LogProbEntropy log_prob_and_entropy(std::span<const double> logits, const std::vector<int>& head_spec,
                                    std::span<const int> action, const ActionMask& mask);
LogProbEntropy log_prob_and_entropy(const PolicyNet& net, std::span<const double> obs, std::span<const int> action,
                                    const ActionMask& mask);

/// d(coef_logp * log_prob + coef_ent * entropy)/d logits, added into `dlogits`.
void log_prob_entropy_logit_grad(std::span<const double> logits, const std::vector<int>& head_spec,
                                 std::span<const int> action, const ActionMask& mask, double coef_logp,
                                 double coef_ent, std::span<double> dlogits);

// ---------------------------------------------------------------------------
// Training support

/// Flat views of every parameter array in a fixed order: trunk layers (w, b),
/// head layers (w, b), policy_out (w, b), value_out (w, b).
std::vector<std::span<double>> parameter_blocks(PolicyNet& net);
std::vector<std::span<const double>> parameter_blocks(const PolicyNet& net);
int trunk_block_count(const PolicyNet& net) noexcept;

/// Gradient storage laid out like parameter_blocks().
struct Gradients {
    std::vector<std::vector<double>> blocks;

    void zero();
    void add(const Gradients& other);
    void scale(double s);
    double norm() const;
};

Gradients zero_gradients(const PolicyNet& net);

/// Accumulates d(loss)/d(params) into `grads` given d(loss)/d(logits) and
/// d(loss)/d(value) for one forward pass.
void backward(const PolicyNet& net, const ForwardCache& cache, std::span<const double> dlogits, double dvalue,
              Gradients& grads);

/// 64-bit FNV-1a over every parameter's bit pattern.
std::uint64_t parameter_digest(const PolicyNet& net);
std::uint64_t trunk_digest(const Trunk& trunk);

}  // namespace hmarl
