#include "hmarl/decomposition.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "hmarl/errors.hpp"
#include "hmarl/ppo.hpp"

namespace hmarl {

RewardComponents decompose_returns(const std::vector<CommanderWindow>& windows, DecompositionView view, int agent) {
    if (view == DecompositionView::Local && agent < 0)
        fail(ErrorKind::InvalidInput, "local decomposition needs an agent id");
    std::map<std::pair<int, int>, ComponentReturns> rows;
    for (const auto& w : windows) {
        if (view == DecompositionView::Local && w.agent != agent) continue;
        if (!w.mode)
            fail(ErrorKind::LogIntegrity, "window without a recorded mode (episode " + std::to_string(w.episode) +
                                              ", step " + std::to_string(w.step) + ", agent " +
                                              std::to_string(w.agent) + ")");
        const int key_agent = view == DecompositionView::Global ? -1 : w.agent;
        auto& row = rows[{w.episode, key_agent}];
        row.episode = w.episode;
        row.agent = key_agent;
        row.components[static_cast<std::size_t>(*w.mode)] += w.reward;
        row.total += w.reward;
    }
    RewardComponents out;
    for (auto& [key, row] : rows) out.rows.push_back(row);
    return out;
}

std::vector<CommanderWindow> record_commander_windows(const PolicyNet& commander, int m,
                                                      const LowLevelPolicySet& controllers,
                                                      const ScenarioConfig& scenario,
                                                      const std::vector<Mode>& opponent_pool, int episodes,
                                                      std::uint64_t seed) {
    if (episodes < 1) fail(ErrorKind::InvalidConfig, "episodes must be >= 1");
    if (commander.input_width() != commander_obs_width(m))
        fail(ErrorKind::Shape, "commander width does not match sensing range m=" + std::to_string(m));
    const std::array<const PolicyNet*, kNumModes> nets = {&controllers[0], &controllers[1], &controllers[2]};
    const auto mask = full_mask(commander.head_spec);
    std::vector<CommanderWindow> out;
    for (int ep = 0; ep < episodes; ++ep) {
        ScenarioConfig sc = scenario;
        sc.seed = derive_seed(seed, {name_tag("windows"), static_cast<std::uint64_t>(ep)});
        auto world = spawn_scenario(sc);
        Rng rng(derive_seed(sc.seed, {name_tag("actions")}));
        FixedModeController opponents(nets, opponent_pool);
        opponents.reset(world, Team::Opponent, rng);
        std::vector<Mode> modes(world.aircraft.size(), Mode::Attack);
        std::vector<CommanderWindow> pending;
        std::vector<StepEvents> window;
        JointActions actions;
        while (outcome(world) == Outcome::Ongoing) {
            pending.clear();
            for (const auto& a : world.aircraft) {
                if (!a.alive || a.team != Team::Agent) continue;
                CommanderWindow w;
                w.episode = ep;
                w.step = world.tick / kOptionTicks;
                w.agent = a.id;
                w.obs = encode(commander_observation(world, a.id, m));
                const auto fr = forward(commander, w.obs);
                w.mode = mode_from_index(argmax_action(fr.logits, commander.head_spec, mask)[0]);
                modes[static_cast<std::size_t>(a.id)] = *w.mode;
                pending.push_back(std::move(w));
            }
            window.clear();
            for (int k = 0; k < kOptionTicks && outcome(world) == Outcome::Ongoing; ++k) {
                actions.assign(world.aircraft.size(), std::nullopt);
                for (const auto& a : world.aircraft) {
                    if (!a.alive || a.team != Team::Agent) continue;
                    actions[static_cast<std::size_t>(a.id)] = policy_action(
                        controllers[static_cast<int>(modes[static_cast<std::size_t>(a.id)])], world, a.id, rng);
                }
                opponents.act(world, Team::Opponent, actions, rng);
                window.push_back(step(world, actions));
            }
            const bool ended = outcome(world) != Outcome::Ongoing;
            for (auto& w : pending) {
                w.reward = reward_commander(window, w.agent);
                w.done = ended || !world.at(w.agent).alive;
                out.push_back(std::move(w));
            }
        }
    }
    return out;
}

std::vector<QSample> component_samples(const std::vector<CommanderWindow>& windows) {
    std::vector<QSample> out;
    out.reserve(windows.size());
    for (const auto& w : windows) {
        if (!w.mode) fail(ErrorKind::LogIntegrity, "window without a recorded mode");
        QSample s;
        s.episode = w.episode;
        s.agent = w.agent;
        s.step = w.step;
        s.done = w.done;
        s.obs = w.obs;
        s.action = static_cast<int>(*w.mode);
        s.rewards.assign(kNumModes, 0.0);
        s.rewards[static_cast<std::size_t>(s.action)] = w.reward;
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<std::vector<double>> discounted_component_returns(const std::vector<QSample>& samples, double gamma) {
    std::vector<std::vector<double>> g(samples.size());
    std::map<std::pair<int, int>, std::vector<std::size_t>> trajectories;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        trajectories[{samples[i].episode, samples[i].agent}].push_back(i);
        g[i].assign(samples[i].rewards.size(), 0.0);
    }
    for (auto& [key, idx] : trajectories) {
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) { return samples[a].step < samples[b].step; });
        std::vector<double> next;
        for (auto it = idx.rbegin(); it != idx.rend(); ++it) {
            const auto& s = samples[*it];
            if (s.done || next.size() != s.rewards.size()) next.assign(s.rewards.size(), 0.0);
            for (std::size_t c = 0; c < s.rewards.size(); ++c) g[*it][c] = s.rewards[c] + gamma * next[c];
            next = g[*it];
        }
    }
    return g;
}

namespace {

std::vector<double> q_input(std::span<const double> obs, int action, int num_actions) {
    std::vector<double> x(obs.begin(), obs.end());
    x.resize(obs.size() + static_cast<std::size_t>(num_actions), 0.0);
    x[obs.size() + static_cast<std::size_t>(action)] = 1.0;
    return x;
}

}  // namespace

double DecomposedQ::q(int component, std::span<const double> obs, int action) const {
    if (component < 0 || component >= components())
        fail(ErrorKind::InvalidComponent, "unknown reward component " + std::to_string(component));
    if (action < 0 || action >= num_actions) fail(ErrorKind::InvalidAction, "unknown action " + std::to_string(action));
    if (static_cast<int>(obs.size()) != obs_width) fail(ErrorKind::Shape, "state width does not match the estimator");
    return forward(nets[static_cast<std::size_t>(component)], q_input(obs, action, num_actions)).value;
}

double DecomposedQ::q_total(std::span<const double> obs, int action) const {
    double s = 0.0;
    for (int c = 0; c < components(); ++c) s += q(c, obs, action);
    return s;
}

DecomposedQ train_decomposed_q(const std::vector<QSample>& samples, const std::vector<std::string>& labels,
                               const QConfig& config) {
    if (samples.empty()) fail(ErrorKind::InsufficientData, "no transitions to fit");
    if (labels.empty()) fail(ErrorKind::InvalidComponent, "no reward components");
    if (config.epochs < 1 || config.minibatch < 1 || !(config.learning_rate > 0.0))
        fail(ErrorKind::InvalidConfig, "epochs, minibatch and learning_rate must be positive");
    const auto width = samples.front().obs.size();
    for (const auto& s : samples) {
        if (s.obs.size() != width) fail(ErrorKind::Shape, "transitions have inconsistent state widths");
        if (s.rewards.size() != labels.size())
            fail(ErrorKind::InvalidComponent, "transition reward count does not match the component labels");
        if (s.action < 0 || s.action >= kNumModes) fail(ErrorKind::InvalidAction, "transition action out of range");
    }

    DecomposedQ dq;
    dq.labels = labels;
    dq.obs_width = static_cast<int>(width);
    const auto targets = discounted_component_returns(samples, config.gamma);
    std::vector<std::vector<double>> inputs;
    inputs.reserve(samples.size());
    for (const auto& s : samples) inputs.push_back(q_input(s.obs, s.action, dq.num_actions));

    for (std::size_t c = 0; c < labels.size(); ++c) {
        Rng rng(derive_seed(config.seed, {name_tag("q"), c}));
        auto trunk = make_trunk(static_cast<int>(inputs.front().size()), config.hidden, rng);
        auto net = make_policy_net(PolicyRole::Commander, trunk, {}, {}, rng);
        net.tags["component"] = labels[c];
        Adam opt(config.learning_rate);
        auto grads = zero_gradients(net);
        ForwardCache cache;
        std::vector<std::size_t> order(samples.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        const auto mb = static_cast<std::size_t>(config.minibatch);
        for (int epoch = 0; epoch < config.epochs; ++epoch) {
            for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.uniform_index(i)]);
            for (std::size_t start = 0; start < order.size(); start += mb) {
                const auto end = std::min(order.size(), start + mb);
                const double inv_n = 1.0 / static_cast<double>(end - start);
                grads.zero();
                for (std::size_t b = start; b < end; ++b) {
                    const auto i = order[b];
                    forward(net, inputs[i], cache);
                    const double err = cache.value - targets[i][c];
                    backward(net, cache, {}, 2.0 * err * inv_n, grads);
                }
                if (!std::isfinite(grads.norm())) fail(ErrorKind::Divergence, "Q regression diverged");
                opt.step(net, grads);
            }
        }
        dq.nets.push_back(std::move(net));
    }
    return dq;
}

double q_delta(const DecomposedQ& dq, std::span<const double> obs, int a1, int a2, int component) {
    if (component < 0 || component >= dq.components())
        fail(ErrorKind::InvalidComponent, "unknown reward component " + std::to_string(component));
    return dq.q(component, obs, a1) - dq.q(component, obs, a2);
}

}  // namespace hmarl
