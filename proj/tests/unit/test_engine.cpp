#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "hmarl/controllers.hpp"
#include "hmarl/episode_log.hpp"
#include "hmarl/errors.hpp"

using namespace hmarl;

namespace {

AircraftState plane(int id, Team team, Position pos, double heading, AircraftType type = AircraftType::AC1) {
    AircraftState a;
    a.id = id;
    a.team = team;
    a.type = type;
    a.pos = pos;
    a.heading = wrap_heading(heading);
    a.heading_setpoint = a.heading;
    a.speed = map_velocity(4, a.spec());
    a.cannon_remaining = a.spec().cannon_capacity;
    a.rockets_remaining = a.spec().rocket_count;
    return a;
}

WorldState world_of(std::vector<AircraftState> aircraft, std::uint64_t seed = 1) {
    WorldState w;
    w.aircraft = std::move(aircraft);
    w.rng = Rng(seed);
    return w;
}

JointActions all(const WorldState& w, LowLevelAction a) {
    JointActions out(w.aircraft.size());
    for (const auto& p : w.aircraft)
        if (p.alive) out[static_cast<std::size_t>(p.id)] = a;
    return out;
}

const LowLevelAction kCruise{0, 4, 0, 0};

}  // namespace

TEST(Spawn, FiveVersusFiveHomogeneous) {
    ScenarioConfig sc;
    const auto w = spawn_scenario(sc);
    ASSERT_EQ(w.aircraft.size(), 10u);
    for (const auto& a : w.aircraft) {
        EXPECT_EQ(a.type, AircraftType::AC1);
        EXPECT_TRUE(a.alive);
        EXPECT_EQ(a.cannon_remaining, kCannonCapacity);
        EXPECT_EQ(a.rockets_remaining, kAc1Rockets);
        EXPECT_EQ(a.team, a.id < 5 ? Team::Agent : Team::Opponent);
    }
    EXPECT_EQ(w.tick, 0);
}

TEST(Spawn, CombatDifferenceSizes) {
    ScenarioConfig sc;
    sc.n_agents = 3;
    const auto w = spawn_scenario(sc);
    EXPECT_EQ(w.count_alive(Team::Agent), 3);
    EXPECT_EQ(w.count_alive(Team::Opponent), 5);
    sc.n_agents = 0;
    EXPECT_THROW(spawn_scenario(sc), Error);
}

TEST(Spawn, DeterministicAndBanded) {
    ScenarioConfig sc;
    sc.seed = 77;
    EXPECT_EQ(spawn_scenario(sc), spawn_scenario(sc));
    sc.seed = 78;
    const auto w = spawn_scenario(sc);
    EXPECT_NE(w, spawn_scenario(ScenarioConfig{}));
    for (const auto& a : w.aircraft) {
        if (a.team == Team::Agent) {
            EXPECT_LT(a.pos.y, sc.map_size / 2);
            EXPECT_LE(std::fabs(heading_difference(wrap_heading(0), a.heading)), 45.0);
        } else {
            EXPECT_GT(a.pos.y, sc.map_size / 2);
            EXPECT_LE(std::fabs(heading_difference(wrap_heading(180), a.heading)), 45.0);
        }
    }
}

TEST(Spawn, HeterogeneousHasBothTypesPerTeam) {
    ScenarioConfig sc;
    sc.composition = Composition::Heterogeneous;
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        sc.seed = seed;
        sc.n_agents = 2 + static_cast<int>(seed % 4);
        const auto w = spawn_scenario(sc);
        for (Team t : {Team::Agent, Team::Opponent}) {
            int ac1 = 0, ac2 = 0;
            for (const auto& a : w.aircraft)
                if (a.team == t) (a.type == AircraftType::AC1 ? ac1 : ac2)++;
            ASSERT_GE(ac1, 1);
            ASSERT_GE(ac2, 1);
        }
    }
}

TEST(Step, TurnIsRateLimited) {
    auto w = world_of({plane(0, Team::Agent, {30, 20}, 0), plane(1, Team::Opponent, {50, 50}, 180)});
    auto acts = all(w, kCruise);
    acts[0]->h = 6;
    step(w, acts);
    EXPECT_DOUBLE_EQ(w.at(0).heading.value(), 5.0);
    EXPECT_DOUBLE_EQ(w.at(0).heading_setpoint.value(), 90.0);
}

TEST(Step, DisplacementAtMaxSpeed) {
    auto w = world_of({plane(0, Team::Agent, {30, 20}, 0), plane(1, Team::Opponent, {50, 50}, 180)});
    auto acts = all(w, kCruise);
    acts[0]->v = 8;
    step(w, acts);
    EXPECT_NEAR(w.at(0).pos.y - 20.0, 900.0 * 0.000514444, 1e-6);
    EXPECT_NEAR(w.at(0).pos.y - 20.0, 0.4630, 5e-5);
    EXPECT_DOUBLE_EQ(w.at(0).pos.x, 30.0);
}

TEST(Step, QuietTickHasNoEvents) {
    ScenarioConfig sc;
    auto w = spawn_scenario(sc);
    const auto ev = step(w, all(w, kCruise));
    EXPECT_TRUE(ev.empty());
    for (const auto& a : w.aircraft) EXPECT_EQ(a.cannon_remaining, kCannonCapacity);
    EXPECT_EQ(w.tick, 1);
}

TEST(Step, RejectsBadActionTables) {
    auto w = world_of({plane(0, Team::Agent, {30, 20}, 0), plane(1, Team::Opponent, {50, 50}, 180)});
    auto acts = all(w, kCruise);
    acts[1].reset();
    EXPECT_THROW(step(w, acts), Error);
    const auto full = all(w, kCruise);
    w.at(1).alive = false;
    EXPECT_THROW(step(w, full), Error);
    acts = all(w, kCruise);
    acts[0]->h = 7;
    EXPECT_THROW(step(w, acts), Error);
}

TEST(Commands, HeadingAndVelocityMaps) {
    EXPECT_EQ(apply_heading_command(wrap_heading(33), 0).value(), 33.0);
    EXPECT_DOUBLE_EQ(apply_heading_command(wrap_heading(0), 6).value(), 90.0);
    EXPECT_DOUBLE_EQ(apply_heading_command(wrap_heading(45), -6).value(), 315.0);
    EXPECT_THROW(apply_heading_command(wrap_heading(0), 7), Error);
    EXPECT_DOUBLE_EQ(map_velocity(0, kAc1Spec), 100.0);
    EXPECT_DOUBLE_EQ(map_velocity(8, kAc1Spec), 900.0);
    EXPECT_DOUBLE_EQ(map_velocity(4, kAc2Spec), 350.0);
    EXPECT_THROW(map_velocity(9, kAc1Spec), Error);
    EXPECT_THROW(map_velocity(-1, kAc2Spec), Error);
}

TEST(Cannon, GatedWhenWezEmpty) {
    auto w = world_of({plane(0, Team::Agent, {30, 20}, 0), plane(1, Team::Opponent, {30, 25}, 180)});
    const auto ev = resolve_cannon(w, 0);
    EXPECT_TRUE(ev.cannon_shots.empty());
    EXPECT_EQ(w.at(0).cannon_remaining, kCannonCapacity);
}

TEST(Cannon, HitRateMatchesSpec) {
    for (auto type : {AircraftType::AC1, AircraftType::AC2}) {
        auto w = world_of({plane(0, Team::Agent, {30, 20}, 0, type), plane(1, Team::Opponent, {30, 21}, 0)}, 9);
        int hits = 0;
        const int n = 20000;
        for (int i = 0; i < n; ++i) {
            w.at(1).alive = true;
            w.at(0).cannon_remaining = kCannonCapacity;
            const auto ev = resolve_cannon(w, 0);
            ASSERT_EQ(ev.cannon_shots.size(), 1u);
            hits += ev.cannon_shots[0].hit;
            ASSERT_EQ(w.at(1).alive, !ev.cannon_shots[0].hit);
        }
        EXPECT_NEAR(hits / double(n), spec_for(type).hit_prob, 0.015);
    }
}

TEST(Cannon, NearestInWezMayBeFriendly) {
    auto w = world_of({plane(0, Team::Agent, {30, 20}, 0), plane(1, Team::Agent, {30, 20.5}, 0),
                       plane(2, Team::Opponent, {30, 21.5}, 0)});
    bool saw_hit = false;
    for (int i = 0; i < 50 && !saw_hit; ++i) {
        w.at(1).alive = true;
        const auto ev = resolve_cannon(w, 0);
        ASSERT_EQ(ev.cannon_shots.size(), 1u);
        EXPECT_EQ(ev.cannon_shots[0].target, 1);
        if (ev.cannon_shots[0].hit) {
            saw_hit = true;
            ASSERT_EQ(ev.friendly_fire_hits.size(), 1u);
            EXPECT_EQ(ev.friendly_fire_hits[0].target, 1);
            ASSERT_EQ(ev.kills.size(), 1u);
            EXPECT_TRUE(ev.kills[0].friendly);
        }
    }
    EXPECT_TRUE(saw_hit);
}

TEST(Rockets, Ac2CannotLaunch) {
    auto w = world_of({plane(0, Team::Agent, {30, 20}, 0, AircraftType::AC2), plane(1, Team::Opponent, {30, 21}, 0)});
    auto acts = all(w, kCruise);
    acts[0]->c_r = 1;
    const auto ev = step(w, acts);
    EXPECT_TRUE(ev.rocket_launches.empty());
    EXPECT_EQ(w.at(0).rockets_remaining, 0);
    EXPECT_TRUE(w.rockets.empty());
}

TEST(Rockets, HitsStationaryTargetAhead) {
    auto w = world_of({plane(0, Team::Agent, {30, 20}, 0), plane(1, Team::Opponent, {30, 21}, 90)});
    ASSERT_EQ(fire_rocket(w, 0).rocket_launches.size(), 1u);
    EXPECT_EQ(w.at(0).rockets_remaining, kAc1Rockets - 1);
    // 1 km at 1200 kn (0.617 km per tick) closes in two ticks.
    int ticks = 0;
    StepEvents ev;
    while (!w.rockets.empty() && ticks < kRocketLifetimeTicks) {
        ev = update_rockets(w);
        ++ticks;
    }
    EXPECT_EQ(ticks, 2);
    ASSERT_EQ(ev.rocket_hits.size(), 1u);
    EXPECT_FALSE(w.at(1).alive);
}

TEST(Rockets, NoLockOutsideCone) {
    auto w = world_of({plane(0, Team::Agent, {30, 20}, 0), plane(1, Team::Opponent, {32, 21}, 0)});
    EXPECT_FALSE(rocket_lock_target(w, 0).has_value());
    EXPECT_TRUE(fire_rocket(w, 0).empty());
    w.at(1).pos = {30, 24.1};
    EXPECT_FALSE(rocket_lock_target(w, 0).has_value());
    w.at(1).pos = {30, 23.9};
    EXPECT_EQ(rocket_lock_target(w, 0), 1);
}

TEST(Rockets, StaleTargetRemovedSilently) {
    auto w = world_of({plane(0, Team::Agent, {30, 20}, 0), plane(1, Team::Opponent, {30, 23}, 0)});
    ASSERT_FALSE(fire_rocket(w, 0).empty());
    w.at(1).alive = false;
    EXPECT_TRUE(update_rockets(w).empty());
    EXPECT_TRUE(w.rockets.empty());
}

TEST(Observation, SoleSurvivorAndFullAmmo) {
    auto w = world_of({plane(0, Team::Agent, {30, 20}, 0), plane(1, Team::Opponent, {30, 23}, 0)});
    w.at(1).alive = false;
    const auto obs = low_level_observation(w, 0);
    ASSERT_EQ(obs.size(), static_cast<std::size_t>(kLowLevelObsWidth));
    EXPECT_EQ(obs[5], 1.0);
    for (int i = kOwnBlockWidth; i < kLowLevelObsWidth; ++i) EXPECT_EQ(obs[static_cast<std::size_t>(i)], 0.0);
    EXPECT_THROW(low_level_observation(w, 1), Error);
}

TEST(Observation, RelativeBlocksInvariantUnderMirroredSetups) {
    auto a = world_of({plane(0, Team::Agent, {20, 20}, 30), plane(1, Team::Agent, {22, 19}, 100),
                       plane(2, Team::Opponent, {25, 26}, 200)});
    auto b = a;
    for (auto& p : b.aircraft) p.pos = {p.pos.x + 7.5, p.pos.y - 3.25};
    const auto oa = low_level_observation(a, 0), ob = low_level_observation(b, 0);
    for (int i = kOwnBlockWidth; i < kLowLevelObsWidth; ++i)
        EXPECT_NEAR(oa[static_cast<std::size_t>(i)], ob[static_cast<std::size_t>(i)], 1e-12);
    EXPECT_EQ(oa[kFriendlyBlockOffset], 1.0);
    EXPECT_EQ(oa[kOpponentBlockOffset], 1.0);
}

TEST(CommanderObservation, NearestFirstAndPadded) {
    std::vector<AircraftState> ac{plane(0, Team::Agent, {30, 10}, 0)};
    for (int k = 0; k < 5; ++k) ac.push_back(plane(1 + k, Team::Opponent, {30, 10.0 + 5 - k}, 180));
    auto w = world_of(ac);
    auto obs = commander_observation(w, 0, 3);
    ASSERT_EQ(obs.hostiles.size(), 3u);
    EXPECT_DOUBLE_EQ(obs.hostiles[0].distance_km, 1.0);
    EXPECT_DOUBLE_EQ(obs.hostiles[1].distance_km, 2.0);
    EXPECT_DOUBLE_EQ(obs.hostiles[2].distance_km, 3.0);
    for (const auto& f : obs.friendlies) EXPECT_FALSE(f.valid);
    for (int k = 2; k <= 5; ++k) w.at(k).alive = false;
    obs = commander_observation(w, 0, 3);
    EXPECT_TRUE(obs.hostiles[0].valid);
    EXPECT_FALSE(obs.hostiles[1].valid);
    EXPECT_FALSE(obs.hostiles[2].valid);
    const auto v = encode(obs);
    EXPECT_EQ(v.size(), static_cast<std::size_t>(commander_obs_width(3)));
    EXPECT_EQ(v[commander_hostile_offset(0) + 4], 1.0);
    EXPECT_EQ(v[commander_hostile_offset(1) + 4], 0.0);
    EXPECT_THROW(commander_observation(w, 0, 6), Error);
    EXPECT_THROW(commander_observation(w, 0, 0), Error);
}

TEST(CommanderObservation, TypeIndex) {
    auto w = world_of({plane(0, Team::Agent, {30, 10}, 0, AircraftType::AC2), plane(1, Team::Opponent, {30, 12}, 0)});
    const auto obs = commander_observation(w, 0, 1);
    EXPECT_EQ(obs.own.type_index, 1);
    EXPECT_EQ(obs.hostiles[0].type_index, 0);
}

TEST(Rewards, Attack) {
    EXPECT_EQ(reward_attack(50, 50, false), 0.0);
    EXPECT_EQ(reward_attack(50, 0, true), 0.0);
    EXPECT_EQ(reward_attack(50, 25, false), 0.5);
    EXPECT_THROW(reward_attack(50, 51, false), Error);
}

TEST(Rewards, EngageGeometry) {
    auto w = world_of({plane(0, Team::Agent, {30, 29}, 0), plane(1, Team::Opponent, {30, 30}, 0)});
    EXPECT_NEAR(reward_engage(w, 0), 2.0, 1e-12);
    w.at(1).heading = wrap_heading(180);
    EXPECT_NEAR(reward_engage(w, 0), 0.0, 1e-12);
    w.at(1).heading = wrap_heading(90);
    EXPECT_NEAR(reward_engage(w, 0), 1.0, 1e-12);
    w.at(1).alive = false;
    EXPECT_EQ(reward_engage(w, 0), 0.0);
}

TEST(Rewards, DefendAndCommander) {
    EXPECT_EQ(reward_defend(false, false), 0.0);
    EXPECT_EQ(reward_defend(true, false), -1.0);
    EXPECT_EQ(reward_defend(true, true), -2.0);

    std::vector<StepEvents> window(3);
    window[0].kills.push_back({5, 0, false});
    window[2].kills.push_back({6, 0, false});
    EXPECT_EQ(reward_commander(window, 0), 2.0);
    std::vector<StepEvents> dies(2);
    dies[1].kills.push_back({0, 7, false});
    EXPECT_EQ(reward_commander(dies, 0), -1.0);
    EXPECT_EQ(reward_commander(std::vector<StepEvents>(4), 0), 0.0);
}

TEST(Option, RunsForFullDuration) {
    ScenarioConfig sc;
    auto w = spawn_scenario(sc);
    OptionCommand cmd{Mode::Defend, kOptionTicks, 0};
    const ActionProvider cruise = [](const WorldState&, int) { return kCruise; };
    const auto r = run_option(w, 0, cmd, cruise, cruise);
    EXPECT_EQ(r.reason, TerminationReason::Duration);
    EXPECT_EQ(cmd.elapsed, 20);
    EXPECT_EQ(w.tick, 20);
}

TEST(Option, EndsOnDeath) {
    bool died = false;
    for (std::uint64_t seed = 0; seed < 20 && !died; ++seed) {
        auto w = world_of({plane(0, Team::Agent, {30, 20}, 0), plane(1, Team::Opponent, {30, 19}, 0)}, seed);
        OptionCommand cmd{Mode::Attack, kOptionTicks, 0};
        const ActionProvider agent = [](const WorldState&, int) { return kCruise; };
        const ActionProvider others = [](const WorldState& world, int) {
            return LowLevelAction{0, 4, world.tick == 6 ? 1 : 0, 0};
        };
        const auto r = run_option(w, 0, cmd, agent, others);
        if (r.reason == TerminationReason::Death) {
            died = true;
            EXPECT_EQ(cmd.elapsed, 7);
            EXPECT_EQ(w.tick, 7);
        } else {
            EXPECT_EQ(cmd.elapsed, kOptionTicks);
        }
    }
    EXPECT_TRUE(died);
}

TEST(Option, RejectsDeadAgent) {
    auto w = world_of({plane(0, Team::Agent, {30, 20}, 0), plane(1, Team::Opponent, {30, 25}, 0)});
    w.at(0).alive = false;
    OptionCommand cmd;
    const ActionProvider cruise = [](const WorldState&, int) { return kCruise; };
    EXPECT_THROW(run_option(w, 0, cmd, cruise, cruise), Error);
}

TEST(Outcome, Rules) {
    auto w = world_of({plane(0, Team::Agent, {30, 20}, 0), plane(1, Team::Opponent, {30, 25}, 0)});
    EXPECT_EQ(outcome(w), Outcome::Ongoing);
    w.tick = w.max_ticks;
    EXPECT_EQ(outcome(w), Outcome::Draw);
    w.tick = 300;
    w.at(1).alive = false;
    EXPECT_EQ(outcome(w), Outcome::Win);
    w.at(1).alive = true;
    w.at(0).alive = false;
    EXPECT_EQ(outcome(w), Outcome::Loss);
    w.at(1).alive = false;
    EXPECT_EQ(outcome(w), Outcome::Draw);
}

TEST(EngineProperties, RandomEpisodesKeepInvariants) {
    RandomController random;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        ScenarioConfig sc;
        sc.n_agents = 1 + static_cast<int>(seed % 3);
        sc.n_opponents = 1 + static_cast<int>((seed / 3) % 3);
        sc.composition = seed % 2 ? Composition::Heterogeneous : Composition::HomogeneousAc1;
        sc.seed = seed;
        auto w = spawn_scenario(sc);
        Rng rng(seed + 100);
        JointActions acts(w.aircraft.size());
        while (outcome(w) == Outcome::Ongoing) {
            const auto before = w;
            std::fill(acts.begin(), acts.end(), std::nullopt);
            random.act(w, Team::Agent, acts, rng);
            random.act(w, Team::Opponent, acts, rng);
            const auto ev = step(w, acts);
            for (std::size_t i = 0; i < w.aircraft.size(); ++i) {
                const auto& a = w.aircraft[i];
                const auto& b = before.aircraft[i];
                if (!b.alive) {
                    ASSERT_EQ(a, b);
                    continue;
                }
                ASSERT_GE(a.speed, a.spec().v_min);
                ASSERT_LE(a.speed, a.spec().v_max);
                ASSERT_GE(a.pos.x, 0.0);
                ASSERT_LE(a.pos.x, w.map_size);
                ASSERT_GE(a.pos.y, 0.0);
                ASSERT_LE(a.pos.y, w.map_size);
                int shots = 0, launches = 0;
                for (const auto& s : ev.cannon_shots) shots += s.shooter == a.id;
                for (const auto& l : ev.rocket_launches) launches += l.shooter == a.id;
                ASSERT_EQ(b.cannon_remaining - a.cannon_remaining, shots);
                ASSERT_EQ(b.rockets_remaining - a.rockets_remaining, launches);
                ASSERT_GE(a.cannon_remaining, 0);
                ASSERT_GE(a.rockets_remaining, 0);
            }
            for (const auto& k : ev.kills) ASSERT_FALSE(w.at(k.victim).alive);
        }
        ASSERT_LE(w.tick, sc.max_ticks);
    }
}

TEST(EngineProperties, HeadingChangeBoundedAwayFromWalls) {
    ScenarioConfig sc;
    sc.n_agents = 2;
    sc.n_opponents = 2;
    RandomController random;
    auto w = spawn_scenario(sc);
    Rng rng(3);
    JointActions acts(w.aircraft.size());
    for (int t = 0; t < 200 && outcome(w) == Outcome::Ongoing; ++t) {
        const auto before = w;
        std::fill(acts.begin(), acts.end(), std::nullopt);
        random.act(w, Team::Agent, acts, rng);
        random.act(w, Team::Opponent, acts, rng);
        step(w, acts);
        for (std::size_t i = 0; i < w.aircraft.size(); ++i) {
            const auto& a = w.aircraft[i];
            if (!a.alive || a.pos.x <= 0 || a.pos.y <= 0 || a.pos.x >= w.map_size || a.pos.y >= w.map_size) continue;
            ASSERT_LE(std::fabs(heading_difference(before.aircraft[i].heading, a.heading)),
                      a.spec().omega_max * w.dt + 1e-9);
        }
    }
}

TEST(EpisodeLog, RoundTripAndReplay) {
    ScenarioConfig sc;
    sc.n_agents = 2;
    sc.n_opponents = 2;
    sc.seed = 12;
    auto w = spawn_scenario(sc);
    RandomController a, b;
    Rng rng(4);
    std::ostringstream log;
    run_episode(w, a, b, rng, [&](const WorldState& post, const JointActions& acts, const StepEvents& ev,
                                  const ModeTable& modes) { log << format_tick_record(post, acts, ev, modes) << '\n'; });
    std::istringstream in(log.str());
    const auto ticks = read_episode_log(in);
    EXPECT_EQ(static_cast<int>(ticks.size()), w.tick);
    EXPECT_EQ(replay_episode(sc, ticks), log.str());
    EXPECT_EQ(ticks.back().aircraft, w.aircraft);
}

TEST(EpisodeLog, TimelineLines) {
    std::istringstream empty("");
    const auto none = timeline(read_episode_log(empty));
    ASSERT_EQ(none.size(), 2u);
    EXPECT_EQ(none[0], "tick  event");

    auto w = world_of({plane(0, Team::Agent, {30, 20}, 0), plane(1, Team::Opponent, {30, 21}, 0)});
    StepEvents ev;
    ev.cannon_shots.push_back({0, 1, true});
    ev.kills.push_back({1, 0, false});
    w.at(1).alive = false;
    w.tick = 1;
    JointActions acts{LowLevelAction{0, 4, 1, 0}, LowLevelAction{0, 4, 0, 0}};
    std::istringstream in(format_tick_record(w, acts, ev) + "\n");
    const auto lines = timeline(read_episode_log(in));
    int destroyed = 0;
    for (const auto& l : lines)
        if (l.find("destroyed by 0") != std::string::npos) ++destroyed;
    EXPECT_EQ(destroyed, 1);

    std::istringstream bad("{\"tick\": 1}\n");
    EXPECT_THROW(read_episode_log(bad), Error);
}
