#include "hmarl/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "hmarl/errors.hpp"

namespace hmarl {

std::string_view to_string(PolicyRole r) noexcept {
    switch (r) {
        case PolicyRole::Attack: return "attack";
        case PolicyRole::Engage: return "engage";
        case PolicyRole::Defend: return "defend";
        case PolicyRole::Commander: return "commander";
    }
    return "?";
}

PolicyRole policy_role_from_string(std::string_view s) {
    if (s == "attack") return PolicyRole::Attack;
    if (s == "engage") return PolicyRole::Engage;
    if (s == "defend") return PolicyRole::Defend;
    if (s == "commander") return PolicyRole::Commander;
    fail(ErrorKind::InvalidConfig, "unknown policy role '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Construction

void orthogonal_init(Dense& layer, double gain, Rng& rng) {
    // Gram-Schmidt on a Gaussian matrix, orthonormalising along the shorter side.
    const int rows = layer.out;
    const int cols = layer.in;
    const bool by_rows = rows <= cols;
    const int n_vec = by_rows ? rows : cols;
    const int dim = by_rows ? cols : rows;
    std::vector<std::vector<double>> v(static_cast<std::size_t>(n_vec), std::vector<double>(static_cast<std::size_t>(dim)));
    for (auto& vec : v)
        for (auto& x : vec) x = rng.normal();
    for (int i = 0; i < n_vec; ++i) {
        auto& vi = v[static_cast<std::size_t>(i)];
        for (int j = 0; j < i; ++j) {
            const auto& vj = v[static_cast<std::size_t>(j)];
            double dot = 0.0;
            for (int k = 0; k < dim; ++k) dot += vi[k] * vj[k];
            for (int k = 0; k < dim; ++k) vi[k] -= dot * vj[k];
        }
        double norm = 0.0;
        for (double x : vi) norm += x * x;
        norm = std::sqrt(norm);
        for (auto& x : vi) x /= norm;
    }
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const double x = by_rows ? v[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]
                                     : v[static_cast<std::size_t>(c)][static_cast<std::size_t>(r)];
            layer.w[static_cast<std::size_t>(r * cols + c)] = gain * x;
        }
    std::fill(layer.b.begin(), layer.b.end(), 0.0);
}

namespace {
const double kHiddenGain = std::sqrt(2.0);
}

std::shared_ptr<Trunk> make_trunk(int input_width, const std::vector<int>& hidden, Rng& rng) {
    if (input_width <= 0) fail(ErrorKind::Shape, "trunk input width must be positive");
    auto trunk = std::make_shared<Trunk>();
    int in = input_width;
    for (int h : hidden) {
        Dense d(in, h);
        orthogonal_init(d, kHiddenGain, rng);
        trunk->layers.push_back(std::move(d));
        in = h;
    }
    return trunk;
}

PolicyNet make_policy_net(PolicyRole role, std::shared_ptr<Trunk> trunk, const std::vector<int>& head_hidden,
                          const std::vector<int>& head_spec, Rng& rng) {
    if (!trunk || trunk->layers.empty()) fail(ErrorKind::Shape, "policy net requires a non-empty trunk");
    PolicyNet net;
    net.role = role;
    net.head_spec = head_spec;
    net.trunk = std::move(trunk);
    int in = net.trunk->output_width();
    for (int h : head_hidden) {
        Dense d(in, h);
        orthogonal_init(d, kHiddenGain, rng);
        net.head_layers.push_back(std::move(d));
        in = h;
    }
    int logits = 0;
    for (int k : head_spec) logits += k;
    net.policy_out = Dense(in, logits);
    orthogonal_init(net.policy_out, 0.01, rng);
    net.value_out = Dense(in, 1);
    orthogonal_init(net.value_out, 1.0, rng);
    return net;
}

LowLevelPolicySet make_low_level_set(int input_width, std::uint64_t seed, const NetArchitecture& arch) {
    Rng rng(derive_seed(seed, {name_tag("low_level_set")}));
    LowLevelPolicySet set;
    set.trunk = make_trunk(input_width, arch.trunk_hidden, rng);
    for (auto role : {PolicyRole::Attack, PolicyRole::Engage, PolicyRole::Defend})
        set.nets.push_back(make_policy_net(role, set.trunk, arch.head_hidden, kLowLevelHeads, rng));
    return set;
}

PolicyNet make_commander_net(int input_width, std::uint64_t seed, const NetArchitecture& arch) {
    Rng rng(derive_seed(seed, {name_tag("commander")}));
    auto trunk = make_trunk(input_width, arch.trunk_hidden, rng);
    return make_policy_net(PolicyRole::Commander, std::move(trunk), {}, kCommanderHeads, rng);
}

PolicyNet deep_copy(const PolicyNet& net) {
    PolicyNet copy = net;
    copy.trunk = std::make_shared<Trunk>(*net.trunk);
    return copy;
}

// ---------------------------------------------------------------------------
// Forward / backward

namespace {

void affine(const Dense& d, const double* x, double* y) {
    for (int o = 0; o < d.out; ++o) {
        const double* row = d.w.data() + static_cast<std::size_t>(o) * d.in;
        double acc = d.b[static_cast<std::size_t>(o)];
        for (int i = 0; i < d.in; ++i) acc += row[i] * x[i];
        y[o] = acc;
    }
}

void tanh_layer(const Dense& d, const std::vector<double>& x, std::vector<double>& y) {
    y.resize(static_cast<std::size_t>(d.out));
    affine(d, x.data(), y.data());
    for (auto& v : y) v = std::tanh(v);
}

}  // namespace

void forward(const PolicyNet& net, std::span<const double> obs, ForwardCache& cache) {
    if (static_cast<int>(obs.size()) != net.input_width())
        fail(ErrorKind::Shape, "observation width " + std::to_string(obs.size()) + " != net input width " +
                                   std::to_string(net.input_width()));
    const std::size_t n_layers = net.trunk->layers.size() + net.head_layers.size();
    cache.acts.resize(n_layers + 1);
    cache.acts[0].assign(obs.begin(), obs.end());
    std::size_t k = 0;
    for (const auto& layer : net.trunk->layers) {
        tanh_layer(layer, cache.acts[k], cache.acts[k + 1]);
        ++k;
    }
    for (const auto& layer : net.head_layers) {
        tanh_layer(layer, cache.acts[k], cache.acts[k + 1]);
        ++k;
    }
    const auto& last = cache.acts[k];
    cache.logits.resize(static_cast<std::size_t>(net.policy_out.out));
    affine(net.policy_out, last.data(), cache.logits.data());
    affine(net.value_out, last.data(), &cache.value);
}

ForwardResult forward(const PolicyNet& net, std::span<const double> obs) {
    ForwardCache cache;
    forward(net, obs, cache);
    return {std::move(cache.logits), cache.value};
}

std::vector<std::span<double>> parameter_blocks(PolicyNet& net) {
    std::vector<std::span<double>> blocks;
    auto push = [&](Dense& d) {
        blocks.emplace_back(d.w);
        blocks.emplace_back(d.b);
    };
    for (auto& l : net.trunk->layers) push(l);
    for (auto& l : net.head_layers) push(l);
    push(net.policy_out);
    push(net.value_out);
    return blocks;
}

std::vector<std::span<const double>> parameter_blocks(const PolicyNet& net) {
    std::vector<std::span<const double>> blocks;
    auto push = [&](const Dense& d) {
        blocks.emplace_back(d.w);
        blocks.emplace_back(d.b);
    };
    for (const auto& l : net.trunk->layers) push(l);
    for (const auto& l : net.head_layers) push(l);
    push(net.policy_out);
    push(net.value_out);
    return blocks;
}

int trunk_block_count(const PolicyNet& net) noexcept { return 2 * static_cast<int>(net.trunk->layers.size()); }

void Gradients::zero() {
    for (auto& b : blocks) std::fill(b.begin(), b.end(), 0.0);
}

void Gradients::add(const Gradients& other) {
    for (std::size_t i = 0; i < blocks.size(); ++i)
        for (std::size_t j = 0; j < blocks[i].size(); ++j) blocks[i][j] += other.blocks[i][j];
}

void Gradients::scale(double s) {
    for (auto& b : blocks)
        for (auto& x : b) x *= s;
}

double Gradients::norm() const {
    double acc = 0.0;
    for (const auto& b : blocks)
        for (double x : b) acc += x * x;
    return std::sqrt(acc);
}

Gradients zero_gradients(const PolicyNet& net) {
    Gradients g;
    for (auto b : parameter_blocks(net)) g.blocks.emplace_back(b.size(), 0.0);
    return g;
}

void backward(const PolicyNet& net, const ForwardCache& cache, std::span<const double> dlogits, double dvalue,
              Gradients& grads) {
    const int n_trunk = static_cast<int>(net.trunk->layers.size());
    const int n_head = static_cast<int>(net.head_layers.size());
    const int n_layers = n_trunk + n_head;
    const auto& last = cache.acts[static_cast<std::size_t>(n_layers)];
    const std::size_t out_block = static_cast<std::size_t>(2 * n_layers);

    // Output layers.
    std::vector<double> g(last.size(), 0.0);
    {
        const Dense& p = net.policy_out;
        auto& gw = grads.blocks[out_block];
        auto& gb = grads.blocks[out_block + 1];
        for (int o = 0; o < p.out; ++o) {
            const double d = dlogits[static_cast<std::size_t>(o)];
            if (d == 0.0) continue;
            gb[static_cast<std::size_t>(o)] += d;
            double* gw_row = gw.data() + static_cast<std::size_t>(o) * p.in;
            const double* w_row = p.w.data() + static_cast<std::size_t>(o) * p.in;
            for (int i = 0; i < p.in; ++i) {
                gw_row[i] += d * last[static_cast<std::size_t>(i)];
                g[static_cast<std::size_t>(i)] += d * w_row[i];
            }
        }
        const Dense& v = net.value_out;
        auto& vw = grads.blocks[out_block + 2];
        auto& vb = grads.blocks[out_block + 3];
        vb[0] += dvalue;
        for (int i = 0; i < v.in; ++i) {
            vw[static_cast<std::size_t>(i)] += dvalue * last[static_cast<std::size_t>(i)];
            g[static_cast<std::size_t>(i)] += dvalue * v.w[static_cast<std::size_t>(i)];
        }
    }

    // Hidden tanh layers, last to first.
    std::vector<double> dz;
    for (int l = n_layers - 1; l >= 0; --l) {
        const Dense& d = l < n_trunk ? net.trunk->layers[static_cast<std::size_t>(l)]
                                     : net.head_layers[static_cast<std::size_t>(l - n_trunk)];
        const auto& a_in = cache.acts[static_cast<std::size_t>(l)];
        const auto& a_out = cache.acts[static_cast<std::size_t>(l + 1)];
        dz.resize(static_cast<std::size_t>(d.out));
        for (int o = 0; o < d.out; ++o) {
            const double a = a_out[static_cast<std::size_t>(o)];
            dz[static_cast<std::size_t>(o)] = g[static_cast<std::size_t>(o)] * (1.0 - a * a);
        }
        auto& gw = grads.blocks[static_cast<std::size_t>(2 * l)];
        auto& gb = grads.blocks[static_cast<std::size_t>(2 * l + 1)];
        std::vector<double> g_in(static_cast<std::size_t>(d.in), 0.0);
        for (int o = 0; o < d.out; ++o) {
            const double dzo = dz[static_cast<std::size_t>(o)];
            gb[static_cast<std::size_t>(o)] += dzo;
            double* gw_row = gw.data() + static_cast<std::size_t>(o) * d.in;
            const double* w_row = d.w.data() + static_cast<std::size_t>(o) * d.in;
            for (int i = 0; i < d.in; ++i) {
                gw_row[i] += dzo * a_in[static_cast<std::size_t>(i)];
                g_in[static_cast<std::size_t>(i)] += dzo * w_row[i];
            }
        }
        g = std::move(g_in);
    }
}

// ---------------------------------------------------------------------------
// Categorical heads

ActionMask full_mask(const std::vector<int>& head_spec) {
    ActionMask m;
    for (int k : head_spec) m.heads.emplace_back(static_cast<std::size_t>(k), 1);
    return m;
}

namespace {

bool allowed(const ActionMask& mask, std::size_t head, int j) {
    return mask.heads.empty() || mask.heads[head][static_cast<std::size_t>(j)] != 0;
}

void check_mask(const ActionMask& mask, const std::vector<int>& head_spec) {
    if (mask.heads.empty()) return;
    if (mask.heads.size() != head_spec.size()) fail(ErrorKind::InvalidMask, "mask head count mismatch");
    for (std::size_t h = 0; h < head_spec.size(); ++h) {
        if (static_cast<int>(mask.heads[h].size()) != head_spec[h]) fail(ErrorKind::InvalidMask, "mask head width mismatch");
        if (std::none_of(mask.heads[h].begin(), mask.heads[h].end(), [](char c) { return c != 0; }))
            fail(ErrorKind::InvalidMask, "head " + std::to_string(h) + " has every action masked");
    }
}

void check_logits(std::span<const double> logits, const std::vector<int>& head_spec) {
    int total = 0;
    for (int k : head_spec) total += k;
    if (static_cast<int>(logits.size()) != total) fail(ErrorKind::Shape, "logit width does not match head spec");
}

// Log-sum-exp over the permitted entries of one head.
double head_lse(const double* z, int n, const ActionMask& mask, std::size_t head) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j)
        if (allowed(mask, head, j)) mx = std::max(mx, z[j]);
    double s = 0.0;
    for (int j = 0; j < n; ++j)
        if (allowed(mask, head, j)) s += std::exp(z[j] - mx);
    return mx + std::log(s);
}

}  // namespace

std::vector<double> head_probabilities(std::span<const double> logits, const std::vector<int>& head_spec,
                                       const ActionMask& mask) {
    check_logits(logits, head_spec);
    check_mask(mask, head_spec);
    std::vector<double> p(logits.size(), 0.0);
    std::size_t off = 0;
    for (std::size_t h = 0; h < head_spec.size(); ++h) {
        const int n = head_spec[h];
        const double lse = head_lse(logits.data() + off, n, mask, h);
        for (int j = 0; j < n; ++j)
            if (allowed(mask, h, j)) p[off + static_cast<std::size_t>(j)] = std::exp(logits[off + static_cast<std::size_t>(j)] - lse);
        off += static_cast<std::size_t>(n);
    }
    return p;
}

SampledAction sample(std::span<const double> logits, const std::vector<int>& head_spec, const ActionMask& mask,
                     Rng& rng) {
    const auto p = head_probabilities(logits, head_spec, mask);
    SampledAction out;
    std::size_t off = 0;
    for (std::size_t h = 0; h < head_spec.size(); ++h) {
        const int n = head_spec[h];
        const double u = rng.uniform();
        double cum = 0.0;
        int chosen = -1;
        for (int j = 0; j < n; ++j) {
            const double pj = p[off + static_cast<std::size_t>(j)];
            if (pj <= 0.0) continue;
            chosen = j;  // last permitted entry absorbs rounding
            cum += pj;
            if (u < cum) break;
        }
        out.action.push_back(chosen);
        out.log_prob += std::log(p[off + static_cast<std::size_t>(chosen)]);
        off += static_cast<std::size_t>(n);
    }
    return out;
}

std::vector<int> argmax_action(std::span<const double> logits, const std::vector<int>& head_spec,
                               const ActionMask& mask) {
    check_logits(logits, head_spec);
    check_mask(mask, head_spec);
    std::vector<int> action;
    std::size_t off = 0;
    for (std::size_t h = 0; h < head_spec.size(); ++h) {
        int best = -1;
        for (int j = 0; j < head_spec[h]; ++j) {
            if (!allowed(mask, h, j)) continue;
            if (best < 0 || logits[off + static_cast<std::size_t>(j)] > logits[off + static_cast<std::size_t>(best)]) best = j;
        }
        action.push_back(best);
        off += static_cast<std::size_t>(head_spec[h]);
    }
    return action;
}

LogProbEntropy log_prob_and_entropy(std::span<const double> logits, const std::vector<int>& head_spec,
                                    std::span<const int> action, const ActionMask& mask) {
    check_logits(logits, head_spec);
    check_mask(mask, head_spec);
    if (action.size() != head_spec.size()) fail(ErrorKind::InvalidAction, "action has wrong number of heads");
    LogProbEntropy r;
    std::size_t off = 0;
    for (std::size_t h = 0; h < head_spec.size(); ++h) {
        const int n = head_spec[h];
        const int a = action[h];
        if (a < 0 || a >= n) fail(ErrorKind::InvalidAction, "action outside head cardinality");
        if (!allowed(mask, h, a)) fail(ErrorKind::InvalidAction, "queried action is masked");
        const double* z = logits.data() + off;
        const double lse = head_lse(z, n, mask, h);
        r.log_prob += z[a] - lse;
        for (int j = 0; j < n; ++j) {
            if (!allowed(mask, h, j)) continue;
            const double logp = z[j] - lse;
            r.entropy -= std::exp(logp) * logp;
        }
        off += static_cast<std::size_t>(n);
    }
    return r;
}

LogProbEntropy log_prob_and_entropy(const PolicyNet& net, std::span<const double> obs, std::span<const int> action,
                                    const ActionMask& mask) {
    const auto fr = forward(net, obs);
    return log_prob_and_entropy(fr.logits, net.head_spec, action, mask);
}

void log_prob_entropy_logit_grad(std::span<const double> logits, const std::vector<int>& head_spec,
                                 std::span<const int> action, const ActionMask& mask, double coef_logp,
                                 double coef_ent, std::span<double> dlogits) {
    std::size_t off = 0;
    for (std::size_t h = 0; h < head_spec.size(); ++h) {
        const int n = head_spec[h];
        const double* z = logits.data() + off;
        const double lse = head_lse(z, n, mask, h);
        double entropy = 0.0;
        for (int j = 0; j < n; ++j) {
            if (!allowed(mask, h, j)) continue;
            const double logp = z[j] - lse;
            entropy -= std::exp(logp) * logp;
        }
        for (int j = 0; j < n; ++j) {
            if (!allowed(mask, h, j)) continue;
            const double logp = z[j] - lse;
            const double p = std::exp(logp);
            double d = coef_logp * ((j == action[h] ? 1.0 : 0.0) - p);
            d += coef_ent * (-p * (logp + entropy));
            dlogits[off + static_cast<std::size_t>(j)] += d;
        }
        off += static_cast<std::size_t>(n);
    }
}

// ---------------------------------------------------------------------------

namespace {

void fnv_doubles(std::uint64_t& h, std::span<const double> xs) {
    for (double x : xs) {
        std::uint64_t bits;
        std::memcpy(&bits, &x, sizeof bits);
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xffu;
            h *= 0x100000001b3ULL;
        }
    }
}

}  // namespace

std::uint64_t parameter_digest(const PolicyNet& net) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (auto b : parameter_blocks(net)) fnv_doubles(h, b);
    return h;
}

std::uint64_t trunk_digest(const Trunk& trunk) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& l : trunk.layers) {
        fnv_doubles(h, l.w);
        fnv_doubles(h, l.b);
    }
    return h;
}

}  // namespace hmarl
