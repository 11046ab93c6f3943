#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hmarl/errors.hpp"
#include "hmarl/geometry.hpp"
#include "hmarl/training.hpp"

using namespace hmarl;

namespace {

ControllerFactory idle_team() {
    return [] { return std::make_unique<IdleController>(); };
}

// Turns toward the nearest hostile and keeps the trigger down.
LowLevelAction pursue(const WorldState& w, int id) {
    const auto& self = w.at(id);
    const auto target = nearest_aircraft(w, id, true);
    if (!target) return {0, 4, 0, 0};
    const double turn = heading_difference(self.heading, bearing(self.pos, w.at(*target).pos));
    const int h = std::clamp(static_cast<int>(std::lround(turn / kHeadingStepDeg)), -6, 6);
    return {h, 4, 1, self.rockets_remaining > 0 ? 1 : 0};
}

ControllerFactory pursuit_team() {
    return [] { return std::make_unique<ScriptedController>(pursue); };
}

ScenarioConfig duel() {
    ScenarioConfig sc;
    sc.n_agents = 1;
    sc.n_opponents = 1;
    return sc;
}

PpoConfig tiny_ppo(std::int64_t steps) {
    PpoConfig p;
    p.total_env_steps = steps;
    p.rollout_ticks = 50;
    p.num_envs = 2;
    p.minibatch_size = 32;
    p.epochs_per_update = 2;
    p.seed = 17;
    return p;
}

LowLevelPolicySet frozen_set(std::uint64_t seed) {
    auto set = make_low_level_set(kLowLevelObsWidth, seed, {{16}, {16}});
    for (auto& n : set.nets) n.frozen = true;
    return set;
}

}  // namespace

TEST(ConvergenceTracker, ConstantStreamConvergesAfterWarmup) {
    ConvergenceTracker t(10, 0.01, 30);
    for (int i = 0; i < 29; ++i) {
        t.add(1.0);
        EXPECT_FALSE(t.converged());
    }
    t.add(1.0);
    EXPECT_TRUE(t.converged());
}

TEST(ConvergenceTracker, RisingStreamDoesNotConverge) {
    ConvergenceTracker t(10, 0.01, 0);
    for (int i = 0; i < 200; ++i) {
        t.add(1.0 + 0.05 * i);
        if (i >= 19) EXPECT_FALSE(t.converged());
    }
}

TEST(ConvergenceTracker, ThresholdIsRelative) {
    ConvergenceTracker t(5, 0.1, 0);
    for (int i = 0; i < 5; ++i) t.add(10.0);
    for (int i = 0; i < 5; ++i) t.add(10.9);
    EXPECT_TRUE(t.converged());
    ConvergenceTracker u(5, 0.1, 0);
    for (int i = 0; i < 5; ++i) u.add(10.0);
    for (int i = 0; i < 5; ++i) u.add(11.1);
    EXPECT_FALSE(u.converged());
}

TEST(ConvergenceTracker, FloorHandlesZeroBaseline) {
    ConvergenceTracker t(3, 0.01, 0, 1.0);
    for (int i = 0; i < 3; ++i) t.add(0.0);
    for (int i = 0; i < 3; ++i) t.add(0.005);
    EXPECT_TRUE(t.converged());
    EXPECT_NEAR(t.moving_average(), 0.005, 1e-15);
    EXPECT_THROW(ConvergenceTracker(0), Error);
}

TEST(League, AdvanceSnapshotsAndFreezes) {
    auto set = make_low_level_set(kLowLevelObsWidth, 3);
    LeagueState league(LeagueConfig{});
    EXPECT_TRUE(league.random_opponents());
    league.tracker.add(1.0);
    advance_league(league, set[0]);
    EXPECT_EQ(league.stage, 1);
    ASSERT_TRUE(league.snapshot.has_value());
    EXPECT_TRUE(league.snapshot->frozen);
    EXPECT_EQ(league.tracker.count(), 0);
    EXPECT_EQ(parameter_digest(*league.snapshot), parameter_digest(set[0]));
    EXPECT_NE(league.snapshot->trunk.get(), set[0].trunk.get());
    set.trunk->layers[0].w[0] += 1.0;
    EXPECT_NE(parameter_digest(*league.snapshot), parameter_digest(set[0]));
}

TEST(LowLevelCollector, OneTransitionPerLivingAgentTick) {
    auto set = make_low_level_set(kLowLevelObsWidth, 5);
    LowLevelCollector c(Mode::Engage, duel(), 3, 9, idle_team());
    CollectStats st;
    const auto buf = c.collect(set[1], 120, 1, &st);
    EXPECT_EQ(buf.size(), 360u);
    EXPECT_EQ(st.env_steps, 360);
    for (std::size_t i = 0; i < buf.size(); ++i) {
        const auto& t = buf.steps[i];
        EXPECT_GE(t.reward, 0.0);
        EXPECT_LE(t.reward, 2.0);
        const bool segment_end = i + 1 == buf.size() || buf.steps[i + 1].env_id != t.env_id ||
                                 buf.steps[i + 1].agent_id != t.agent_id;
        if (segment_end) EXPECT_TRUE(t.done || t.truncated);
        EXPECT_FALSE(t.done && t.truncated);
    }
}

TEST(LowLevelCollector, ContinuesEpisodesAcrossCalls) {
    auto set = make_low_level_set(kLowLevelObsWidth, 5);
    LowLevelCollector a(Mode::Attack, duel(), 2, 11, random_opponents());
    LowLevelCollector b(Mode::Attack, duel(), 2, 11, random_opponents());
    const auto first = a.collect(set[0], 30, 1);
    const auto second = a.collect(set[0], 30, 1);
    const auto fresh = b.collect(set[0], 30, 1);
    ASSERT_EQ(first.size(), fresh.size());
    for (std::size_t i = 0; i < first.size(); ++i) EXPECT_EQ(first.steps[i].obs, fresh.steps[i].obs);
    EXPECT_NE(second.steps[0].obs, first.steps[0].obs);
}

TEST(LowLevelCollector, WorkerCountDoesNotChangeData) {
    auto set = make_low_level_set(kLowLevelObsWidth, 6);
    ScenarioConfig sc;
    sc.n_agents = 2;
    sc.n_opponents = 2;
    LowLevelCollector a(Mode::Defend, sc, 4, 13, random_opponents());
    LowLevelCollector b(Mode::Defend, sc, 4, 13, random_opponents());
    const auto x = a.collect(set[2], 200, 1);
    const auto y = b.collect(set[2], 200, 4);
    ASSERT_EQ(x.size(), y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        EXPECT_EQ(x.steps[i].obs, y.steps[i].obs);
        EXPECT_EQ(x.steps[i].action, y.steps[i].action);
        EXPECT_EQ(x.steps[i].reward, y.steps[i].reward);
        EXPECT_EQ(x.steps[i].done, y.steps[i].done);
    }
}

TEST(LowLevelCollector, AttackAndDefendRewardOnlyAtTerminal) {
    auto set = make_low_level_set(kLowLevelObsWidth, 7);
    for (Mode m : {Mode::Attack, Mode::Defend}) {
        LowLevelCollector c(m, duel(), 4, 21, random_opponents());
        const auto buf = c.collect(set[static_cast<int>(m)], 400, 1);
        for (const auto& t : buf.steps) {
            if (!t.done) EXPECT_EQ(t.reward, 0.0);
            if (m == Mode::Defend) EXPECT_LE(t.reward, 0.0);
            if (m == Mode::Attack) EXPECT_GE(t.reward, -1.0);
        }
    }
}

TEST(TrainLowLevel, DeterministicAndStaged) {
    LowLevelTrainConfig cfg;
    cfg.ppo = tiny_ppo(200);
    cfg.scenario = duel();
    cfg.league.stages = 2;
    auto s1 = make_low_level_set(kLowLevelObsWidth, 8, {{16}, {16}});
    auto s2 = make_low_level_set(kLowLevelObsWidth, 8, {{16}, {16}});
    int calls = 0;
    const auto r1 = train_low_level(Mode::Engage, s1[1], cfg, [&](const UpdateMetrics&) { ++calls; });
    const auto r2 = train_low_level(Mode::Engage, s2[1], cfg);
    EXPECT_EQ(parameter_digest(s1[1]), parameter_digest(s2[1]));
    ASSERT_EQ(r1.stage_snapshots.size(), 2u);
    EXPECT_EQ(r1.stage_converged.size(), 2u);
    EXPECT_EQ(r1.stage_snapshots[1].tags.at("league_stage"), "1");
    EXPECT_EQ(static_cast<int>(r1.metrics.size()), calls);
    EXPECT_EQ(r1.metrics.size(), 4u);
    EXPECT_EQ(r1.metrics.back().stage, 1);
    EXPECT_EQ(r1.metrics.back().env_steps, 400);
    EXPECT_EQ(r1.metrics.size(), r2.metrics.size());
    std::ostringstream csv;
    write_metrics_header(csv);
    for (const auto& m : r1.metrics) write_metrics_row(csv, m);
    const auto text = csv.str();
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
}

TEST(TrainLowLevel, FrozenTrunkStaysPut) {
    LowLevelTrainConfig cfg;
    cfg.ppo = tiny_ppo(100);
    cfg.scenario = duel();
    cfg.freeze_trunk = true;
    auto set = make_low_level_set(kLowLevelObsWidth, 9, {{16}, {16}});
    const auto trunk = trunk_digest(*set.trunk);
    const auto before = parameter_digest(set[0]);
    train_low_level(Mode::Attack, set[0], cfg);
    EXPECT_EQ(trunk_digest(*set.trunk), trunk);
    EXPECT_NE(parameter_digest(set[0]), before);
}

TEST(TrainLowLevel, RejectsFrozenOrMismatchedNet) {
    LowLevelTrainConfig cfg;
    cfg.ppo = tiny_ppo(100);
    cfg.scenario = duel();
    auto set = make_low_level_set(kLowLevelObsWidth, 9, {{16}, {16}});
    set[0].frozen = true;
    EXPECT_THROW(train_low_level(Mode::Attack, set[0], cfg), Error);
    auto cmd = make_commander_net(commander_obs_width(1), 1);
    EXPECT_THROW(train_low_level(Mode::Attack, cmd, cfg), Error);
}

TEST(TrainCommander, ControllersUntouchedAndTagged) {
    auto set = frozen_set(10);
    std::vector<std::uint64_t> digests;
    for (const auto& n : set.nets) digests.push_back(parameter_digest(n));
    CommanderTrainConfig cfg;
    cfg.ppo = tiny_ppo(120);
    cfg.m = 3;
    cfg.scenario.n_agents = 2;
    cfg.scenario.n_opponents = 2;
    cfg.net = {{16}, {}};
    const auto r = train_commander(set, cfg);
    for (std::size_t i = 0; i < set.nets.size(); ++i) EXPECT_EQ(parameter_digest(set.nets[i]), digests[i]);
    EXPECT_EQ(r.commander.tags.at("m"), "3");
    EXPECT_EQ(r.commander.tags.at("composition"), "homo");
    EXPECT_EQ(r.commander.input_width(), commander_obs_width(3));
    EXPECT_FALSE(r.metrics.empty());
}

TEST(TrainCommander, RequiresFrozenControllers) {
    auto set = frozen_set(11);
    set[1].frozen = false;
    CommanderTrainConfig cfg;
    cfg.ppo = tiny_ppo(60);
    try {
        train_commander(set, cfg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InvalidSetup);
    }
    set[1].frozen = true;
    cfg.m = 6;
    EXPECT_THROW(train_commander(set, cfg), Error);
}

TEST(CommanderCollector, OneTransitionPerWindowAndRewardBounds) {
    auto set = frozen_set(12);
    ScenarioConfig sc;
    sc.n_agents = 3;
    sc.n_opponents = 3;
    CommanderCollector c(2, sc, set, {Mode::Attack}, 2, 5);
    const auto cmd = make_commander_net(commander_obs_width(2), 3);
    CollectStats st;
    const auto buf = c.collect(cmd, 100, 1, &st);
    EXPECT_EQ(st.env_steps % kOptionTicks, 0);
    EXPECT_LE(buf.size(), static_cast<std::size_t>(2 * 3 * 5));
    for (const auto& t : buf.steps) {
        EXPECT_GE(t.reward, -1.0);
        EXPECT_LE(t.reward, 3.0);
        EXPECT_GE(t.action[0], 0);
        EXPECT_LT(t.action[0], kNumModes);
    }
}

TEST(Evaluate, IdleTeamsAlwaysDraw) {
    ScenarioConfig sc;
    sc.n_agents = 2;
    sc.n_opponents = 2;
    const auto r = evaluate(idle_team(), idle_team(), sc, 20, 3, 2);
    EXPECT_EQ(r.episodes, 20);
    EXPECT_EQ(r.draw, 1.0);
    EXPECT_EQ(r.opponent_kill_fraction, 0.0);
    EXPECT_EQ(r.mean_ticks, 500.0);
}

TEST(Evaluate, PursuitBeatsIdleAndFractionsAreConsistent) {
    const auto r = evaluate(pursuit_team(), idle_team(), duel(), 60, 4, 1);
    EXPECT_NEAR(r.win + r.loss + r.draw, 1.0, 1e-12);
    EXPECT_EQ(r.loss, 0.0);
    EXPECT_GT(r.win, 0.8);
    EXPECT_DOUBLE_EQ(r.any_kill_fraction, r.win);
    EXPECT_DOUBLE_EQ(r.opponent_kill_fraction, r.win);
    EXPECT_LT(r.mean_ticks, 500.0);
}

TEST(Evaluate, IndependentOfWorkers) {
    ScenarioConfig sc;
    sc.n_agents = 2;
    sc.n_opponents = 3;
    const auto a = evaluate(random_opponents(), pursuit_team(), sc, 24, 8, 1);
    const auto b = evaluate(random_opponents(), pursuit_team(), sc, 24, 8, 3);
    EXPECT_EQ(a.win, b.win);
    EXPECT_EQ(a.loss, b.loss);
    EXPECT_EQ(a.mean_ticks, b.mean_ticks);
    EXPECT_EQ(a.opponent_kill_fraction, b.opponent_kill_fraction);
    EXPECT_THROW(evaluate(idle_team(), idle_team(), sc, 0, 1), Error);
}
