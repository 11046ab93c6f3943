#include "hmarl/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "hmarl/errors.hpp"

namespace hmarl {

void PpoConfig::validate() const {
    auto bad = [](const std::string& what) { fail(ErrorKind::InvalidConfig, what); };
    if (!(gamma >= 0.0 && gamma < 1.0)) bad("gamma must be in [0, 1)");
    if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) bad("gae_lambda must be in [0, 1]");
    if (!(clip > 0.0)) bad("clip must be > 0");
    if (!(learning_rate > 0.0)) bad("learning_rate must be > 0");
    if (epochs_per_update < 1) bad("epochs_per_update must be >= 1");
    if (minibatch_size < 1) bad("minibatch_size must be >= 1");
    if (entropy_coef < 0.0 || value_coef < 0.0) bad("loss coefficients must be >= 0");
    if (!(max_grad_norm > 0.0)) bad("max_grad_norm must be > 0");
    if (!(reward_scale > 0.0)) bad("reward_scale must be > 0");
    if (rollout_ticks < 1 || num_envs < 1) bad("rollout_ticks and num_envs must be >= 1");
    if (total_env_steps < 1) bad("total_env_steps must be >= 1");
    if (workers < 1) bad("workers must be >= 1");
}

void compute_gae(RolloutBuffer& buffer, double gamma, double lambda) {
    auto& s = buffer.steps;
    double next_adv = 0.0;
    for (std::size_t i = s.size(); i-- > 0;) {
        auto& t = s[i];
        const bool segment_end = t.done || t.truncated || i + 1 == s.size();
        double next_value = 0.0;
        if (!t.done) next_value = segment_end ? t.bootstrap_value : s[i + 1].value;
        const double delta = t.reward + gamma * next_value - t.value;
        const double carry = segment_end ? 0.0 : next_adv;
        t.advantage = delta + gamma * lambda * carry;
        t.ret = t.advantage + t.value;
        next_adv = t.advantage;
    }
    buffer.advantages_ready = true;
}

double clipped_surrogate(double ratio, double advantage, double eps) noexcept {
    const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
    return std::min(ratio * advantage, clipped * advantage);
}

Adam::Adam(double learning_rate, double beta1, double beta2, double eps)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void Adam::step(PolicyNet& net, const Gradients& grads, int first_block) {
    auto params = parameter_blocks(net);
    if (m_.empty()) {
        for (auto p : params) {
            m_.emplace_back(p.size(), 0.0);
            v_.emplace_back(p.size(), 0.0);
        }
    }
    if (m_.size() != params.size() || grads.blocks.size() != params.size())
        fail(ErrorKind::Shape, "optimizer state does not match network");
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t b = static_cast<std::size_t>(first_block); b < params.size(); ++b) {
        auto p = params[b];
        const auto& g = grads.blocks[b];
        auto& m = m_[b];
        auto& v = v_[b];
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
            v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
            p[i] -= lr_ * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps_);
        }
    }
}

PpoLossTerms ppo_loss(const PolicyNet& net, const RolloutBuffer& buffer, const std::vector<std::size_t>& indices,
                      const PpoConfig& config, Gradients* grads) {
    PpoLossTerms terms;
    if (indices.empty()) return terms;
    const double inv_n = 1.0 / static_cast<double>(indices.size());
    ForwardCache cache;
    std::vector<double> dlogits;
    double surrogate_sum = 0.0, value_sum = 0.0, entropy_sum = 0.0, kl_sum = 0.0, clipped = 0.0;
    for (std::size_t idx : indices) {
        const auto& t = buffer.steps[idx];
        forward(net, t.obs, cache);
        const auto lpe = log_prob_and_entropy(cache.logits, net.head_spec, t.action, t.mask);
        const double log_ratio = lpe.log_prob - t.log_prob;
        const double ratio = std::exp(log_ratio);
        const double surrogate = clipped_surrogate(ratio, t.advantage, config.clip);
        const double verr = cache.value - t.ret;
        surrogate_sum += surrogate;
        value_sum += verr * verr;
        entropy_sum += lpe.entropy;
        kl_sum += (ratio - 1.0) - log_ratio;
        if (std::fabs(ratio - 1.0) > config.clip) clipped += 1.0;

        if (grads != nullptr) {
            const bool unclipped_active = ratio * t.advantage <= surrogate;
            const double coef_logp = unclipped_active ? -ratio * t.advantage * inv_n : 0.0;
            const double coef_ent = -config.entropy_coef * inv_n;
            dlogits.assign(cache.logits.size(), 0.0);
            log_prob_entropy_logit_grad(cache.logits, net.head_spec, t.action, t.mask, coef_logp, coef_ent, dlogits);
            const double dvalue = config.value_coef * 2.0 * verr * inv_n;
            backward(net, cache, dlogits, dvalue, *grads);
        }
    }
    terms.policy_loss = -surrogate_sum * inv_n;
    terms.value_loss = value_sum * inv_n;
    terms.entropy = entropy_sum * inv_n;
    terms.approx_kl = kl_sum * inv_n;
    terms.clip_fraction = clipped * inv_n;
    terms.total = terms.policy_loss + config.value_coef * terms.value_loss - config.entropy_coef * terms.entropy;
    return terms;
}

void normalize_advantages(RolloutBuffer& buffer) {
    auto& s = buffer.steps;
    if (s.size() < 2) return;
    double mean = 0.0;
    for (const auto& t : s) mean += t.advantage;
    mean /= static_cast<double>(s.size());
    double var = 0.0;
    for (const auto& t : s) var += (t.advantage - mean) * (t.advantage - mean);
    var /= static_cast<double>(s.size());
    const double sd = std::sqrt(var) + 1e-8;
    for (auto& t : s) t.advantage = (t.advantage - mean) / sd;
}

PpoStats ppo_update(PolicyNet& net, RolloutBuffer& buffer, const PpoConfig& config, Adam& optimizer, Rng& rng,
                    int first_block) {
    if (!buffer.advantages_ready) fail(ErrorKind::InvalidState, "advantages must be computed before a PPO update");
    if (net.frozen) fail(ErrorKind::InvalidSetup, "cannot update a frozen network");
    PpoStats stats;
    if (buffer.size() == 0) return stats;
    normalize_advantages(buffer);

    std::vector<std::size_t> order(buffer.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto grads = zero_gradients(net);
    const std::size_t mb = static_cast<std::size_t>(config.minibatch_size);
    for (int epoch = 0; epoch < config.epochs_per_update; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.uniform_index(i)]);
        for (std::size_t start = 0; start < order.size(); start += mb) {
            const std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                                 order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), start + mb)));
            grads.zero();
            const auto terms = ppo_loss(net, buffer, batch, config, &grads);
            const double gnorm = grads.norm();
            if (!std::isfinite(terms.total) || !std::isfinite(gnorm)) {
                std::ostringstream msg;
                msg << "non-finite PPO loss (policy=" << terms.policy_loss << ", value=" << terms.value_loss
                    << ", entropy=" << terms.entropy << ", grad_norm=" << gnorm << ") at epoch " << epoch;
                fail(ErrorKind::Divergence, msg.str());
            }
            if (gnorm > config.max_grad_norm) grads.scale(config.max_grad_norm / gnorm);
            optimizer.step(net, grads, first_block);
            stats.policy_loss += terms.policy_loss;
            stats.value_loss += terms.value_loss;
            stats.entropy += terms.entropy;
            stats.approx_kl += terms.approx_kl;
            stats.clip_fraction += terms.clip_fraction;
            stats.minibatches += 1;
        }
    }
    const double k = 1.0 / stats.minibatches;
    stats.policy_loss *= k;
    stats.value_loss *= k;
    stats.entropy *= k;
    stats.approx_kl *= k;
    stats.clip_fraction *= k;
    return stats;
}

}  // namespace hmarl
