#include <benchmark/benchmark.h>

#include "hmarl/controllers.hpp"
#include "hmarl/ppo.hpp"

using namespace hmarl;

static void BM_Step(benchmark::State& state) {
    ScenarioConfig sc;
    sc.n_agents = static_cast<int>(state.range(0));
    sc.n_opponents = sc.n_agents;
    sc.seed = 7;
    auto world = spawn_scenario(sc);
    Rng rng(11);
    RandomController ctl;
    JointActions actions;
    for (auto _ : state) {
        if (outcome(world) != Outcome::Ongoing) {
            state.PauseTiming();
            world = spawn_scenario(sc);
            state.ResumeTiming();
        }
        actions.assign(world.aircraft.size(), std::nullopt);
        ctl.act(world, Team::Agent, actions, rng);
        ctl.act(world, Team::Opponent, actions, rng);
        benchmark::DoNotOptimize(step(world, actions));
    }
}
BENCHMARK(BM_Step)->Arg(1)->Arg(3)->Arg(5);

static void BM_Observation(benchmark::State& state) {
    ScenarioConfig sc;
    sc.seed = 3;
    const auto world = spawn_scenario(sc);
    for (auto _ : state) {
        benchmark::DoNotOptimize(low_level_observation(world, 0));
        benchmark::DoNotOptimize(encode(commander_observation(world, 0, 5)));
    }
}
BENCHMARK(BM_Observation);

static void BM_Forward(benchmark::State& state) {
    const auto set = make_low_level_set(kLowLevelObsWidth, 1);
    std::vector<double> obs(kLowLevelObsWidth, 0.25);
    ForwardCache cache;
    for (auto _ : state) {
        forward(set[0], obs, cache);
        benchmark::DoNotOptimize(cache.value);
    }
}
BENCHMARK(BM_Forward);

static void BM_ForwardBackward(benchmark::State& state) {
    const auto set = make_low_level_set(kLowLevelObsWidth, 1);
    std::vector<double> obs(kLowLevelObsWidth, 0.25);
    std::vector<double> dlogits(static_cast<std::size_t>(set[0].logit_width()), 0.01);
    ForwardCache cache;
    auto grads = zero_gradients(set[0]);
    for (auto _ : state) {
        forward(set[0], obs, cache);
        backward(set[0], cache, dlogits, 0.5, grads);
    }
    benchmark::DoNotOptimize(grads.norm());
}
BENCHMARK(BM_ForwardBackward);

static void BM_Gae(benchmark::State& state) {
    Rng rng(5);
    RolloutBuffer buf;
    buf.steps.resize(static_cast<std::size_t>(state.range(0)));
    for (std::size_t i = 0; i < buf.steps.size(); ++i) {
        buf.steps[i].reward = rng.uniform(-1, 1);
        buf.steps[i].value = rng.uniform(-1, 1);
        buf.steps[i].done = i % 97 == 96;
    }
    buf.steps.back().truncated = true;
    for (auto _ : state) {
        buf.advantages_ready = false;
        compute_gae(buf, 0.99, 0.95);
        benchmark::DoNotOptimize(buf.steps.front().advantage);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Gae)->Arg(2048)->Arg(16384);

BENCHMARK_MAIN();
