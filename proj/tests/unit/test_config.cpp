#include <gtest/gtest.h>

#include <filesystem>

#include "hmarl/config.hpp"
#include "hmarl/errors.hpp"

using namespace hmarl;

namespace {

ErrorKind kind_of(std::string_view text) {
    try {
        parse_run_config(text);
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::InternalConsistency;
}

}  // namespace

TEST(RunConfig, EmptyObjectKeepsDefaults) {
    const auto c = parse_run_config("{}");
    EXPECT_EQ(c.seed, 0u);
    EXPECT_EQ(c.workers, 1);
    EXPECT_EQ(c.scenario.n_agents, 5);
    EXPECT_EQ(c.scenario.max_ticks, 500);
    EXPECT_DOUBLE_EQ(c.ppo.gamma, 0.99);
    EXPECT_DOUBLE_EQ(c.ppo.gae_lambda, 0.95);
    EXPECT_DOUBLE_EQ(c.ppo.clip, 0.2);
    EXPECT_DOUBLE_EQ(c.ppo.learning_rate, 3e-4);
    EXPECT_EQ(c.ppo.epochs_per_update, 4);
    EXPECT_EQ(c.ppo.minibatch_size, 256);
    EXPECT_EQ(c.commander.m, 3);
    EXPECT_EQ(c.global_sweep.episodes_per_cell, 100);
    EXPECT_EQ(c.local_sweep.samples_per_cell, 100);
}

TEST(RunConfig, ReadsEverySection) {
    const auto c = parse_run_config(R"({
        "seed": 42, "workers": 3, "output_dir": "runs/a",
        "scenario": {"n_agents": 3, "n_opponents": 4, "composition": "hetero", "max_ticks": 250},
        "ppo": {"learning_rate": 0.001, "gamma": 0.995, "total_env_steps": 1000, "reward_scale": 0.01},
        "league": {"stages": 3, "window": 20},
        "net": {"trunk_hidden": [32, 32], "head_hidden": [16]},
        "commander": {"m": 2, "opponent_pool": ["defend"]},
        "eval": {"episodes": 7},
        "sweep": {"global": {"strategies": ["mixed"], "differences": [0], "sensing": [1, 2], "episodes_per_cell": 3},
                  "local": {"d_bins": [2, 4], "samples_per_cell": 5}}
    })");
    EXPECT_EQ(c.seed, 42u);
    EXPECT_EQ(c.workers, 3);
    EXPECT_EQ(c.ppo.workers, 3);
    EXPECT_EQ(c.output_dir, "runs/a");
    EXPECT_EQ(c.scenario.composition, Composition::Heterogeneous);
    EXPECT_EQ(c.scenario.max_ticks, 250);
    EXPECT_DOUBLE_EQ(c.ppo.learning_rate, 1e-3);
    EXPECT_DOUBLE_EQ(c.ppo.reward_scale, 0.01);
    EXPECT_EQ(c.ppo.total_env_steps, 1000);
    EXPECT_EQ(c.league.stages, 3);
    EXPECT_EQ(c.net.trunk_hidden, (std::vector<int>{32, 32}));
    EXPECT_EQ(c.commander.opponent_pool, std::vector<Mode>{Mode::Defend});
    EXPECT_EQ(c.eval.episodes, 7);
    EXPECT_EQ(c.global_sweep.strategies, std::vector<OpponentStrategy>{OpponentStrategy::Mixed});
    EXPECT_EQ(c.global_sweep.sensing, (std::vector<int>{1, 2}));
    EXPECT_EQ(c.local_sweep.d_bins, (std::vector<double>{2, 4}));
    EXPECT_EQ(c.local_sweep.samples_per_cell, 5);
}

TEST(RunConfig, RejectsBadInput) {
    EXPECT_EQ(kind_of("{"), ErrorKind::InvalidConfig);
    EXPECT_EQ(kind_of("[]"), ErrorKind::InvalidConfig);
    EXPECT_EQ(kind_of(R"({"sed": 1})"), ErrorKind::InvalidConfig);
    EXPECT_EQ(kind_of(R"({"ppo": {"lr": 1}})"), ErrorKind::InvalidConfig);
    EXPECT_EQ(kind_of(R"({"seed": -1})"), ErrorKind::InvalidConfig);
    EXPECT_EQ(kind_of(R"({"workers": "2"})"), ErrorKind::InvalidConfig);
    EXPECT_EQ(kind_of(R"({"workers": 0})"), ErrorKind::InvalidConfig);
    EXPECT_EQ(kind_of(R"({"ppo": {"epochs_per_update": 1.5}})"), ErrorKind::InvalidConfig);
    EXPECT_EQ(kind_of(R"({"ppo": {"gamma": 1.2}})"), ErrorKind::InvalidConfig);
    EXPECT_EQ(kind_of(R"({"scenario": {"composition": "mixed"}})"), ErrorKind::InvalidConfig);
    EXPECT_EQ(kind_of(R"({"commander": {"m": 6}})"), ErrorKind::InvalidConfig);
    EXPECT_EQ(kind_of(R"({"commander": {"opponent_pool": []}})"), ErrorKind::InvalidConfig);
    EXPECT_EQ(kind_of(R"({"commander": {"opponent_pool": ["charge"]}})"), ErrorKind::InvalidConfig);
    EXPECT_EQ(kind_of(R"({"eval": {"episodes": 0}})"), ErrorKind::InvalidConfig);
    EXPECT_EQ(kind_of(R"({"sweep": {"global": {"sensing": [0]}}})"), ErrorKind::InvalidConfig);
    EXPECT_EQ(kind_of(R"({"net": {"trunk_hidden": 64}})"), ErrorKind::InvalidConfig);
}

TEST(RunConfig, CanonicalJsonRoundTrips) {
    const auto c = parse_run_config(R"({"seed": 9, "ppo": {"clip": 0.1}, "commander": {"m": 4}})");
    const auto text = to_json(c);
    EXPECT_EQ(to_json(parse_run_config(text)), text);
    EXPECT_EQ(text, to_json(parse_run_config(text)));
}

TEST(RunConfig, MissingFile) {
    EXPECT_THROW(load_run_config("/nonexistent/config.json"), Error);
}

TEST(RunConfig, ShippedConfigsParse) {
    int seen = 0;
    for (const auto& entry : std::filesystem::directory_iterator(HMARL_SOURCE_DIR "/configs")) {
        if (entry.path().extension() != ".json") continue;
        EXPECT_NO_THROW(load_run_config(entry.path())) << entry.path();
        ++seen;
    }
    EXPECT_GE(seen, 5);
}

TEST(ModeNames, RoundTrip) {
    for (auto m : {Mode::Attack, Mode::Engage, Mode::Defend}) EXPECT_EQ(mode_from_string(to_string(m)), m);
    EXPECT_THROW(mode_from_string("Attack"), Error);
}
