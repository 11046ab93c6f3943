#include "hmarl/episode_log.hpp"

#include <istream>
#include <sstream>

#include "hmarl/errors.hpp"
#include "json.hpp"

namespace hmarl {

using ojson = nlohmann::ordered_json;

namespace {

ojson pair_list(const auto& items, auto&& fields) {
    ojson arr = ojson::array();
    for (const auto& it : items) arr.push_back(fields(it));
    return arr;
}

Team team_from(const std::string& s) {
    if (s == "agent") return Team::Agent;
    if (s == "opponent") return Team::Opponent;
    fail(ErrorKind::LogIntegrity, "unknown team '" + s + "'");
}

AircraftType type_from(const std::string& s) {
    if (s == "AC1") return AircraftType::AC1;
    if (s == "AC2") return AircraftType::AC2;
    fail(ErrorKind::LogIntegrity, "unknown aircraft type '" + s + "'");
}

}  // namespace

std::string format_tick_record(const WorldState& post, const JointActions& actions, const StepEvents& events,
                               const ModeTable& modes) {
    ojson rec;
    rec["tick"] = post.tick;
    ojson acts = ojson::array();
    for (const auto& a : actions) acts.push_back(a ? ojson::array({a->h, a->v, a->c_c, a->c_r}) : ojson(nullptr));
    rec["actions"] = std::move(acts);
    if (!modes.empty()) {
        ojson m = ojson::array();
        for (const auto& mode : modes) m.push_back(mode ? ojson(static_cast<int>(*mode)) : ojson(nullptr));
        rec["modes"] = std::move(m);
    }
    ojson craft = ojson::array();
    for (const auto& a : post.aircraft) {
        craft.push_back({{"id", a.id},
                         {"team", a.team == Team::Agent ? "agent" : "opponent"},
                         {"type", std::string(to_string(a.type))},
                         {"x", a.pos.x},
                         {"y", a.pos.y},
                         {"heading", a.heading.value()},
                         {"setpoint", a.heading_setpoint.value()},
                         {"speed", a.speed},
                         {"cannon", a.cannon_remaining},
                         {"rockets", a.rockets_remaining},
                         {"alive", a.alive}});
    }
    rec["aircraft"] = std::move(craft);
    rec["rockets"] = pair_list(post.rockets, [](const RocketState& r) {
        return ojson{{"shooter", r.shooter_id}, {"target", r.target_id}, {"x", r.pos.x},
                     {"y", r.pos.y},            {"heading", r.heading.value()}, {"ticks", r.ticks_remaining}};
    });
    ojson ev;
    ev["cannon"] = pair_list(events.cannon_shots, [](const CannonShot& s) { return ojson::array({s.shooter, s.target, s.hit}); });
    ev["launches"] = pair_list(events.rocket_launches, [](const RocketLaunch& s) { return ojson::array({s.shooter, s.target}); });
    ev["rocket_hits"] = pair_list(events.rocket_hits, [](const RocketHit& s) { return ojson::array({s.shooter, s.target}); });
    ev["kills"] = pair_list(events.kills, [](const Kill& k) { return ojson::array({k.victim, k.killer, k.friendly}); });
    ev["friendly_fire"] = pair_list(events.friendly_fire_hits, [](const FriendlyFireHit& s) { return ojson::array({s.shooter, s.target}); });
    rec["events"] = std::move(ev);
    return rec.dump();
}

std::vector<LoggedTick> read_episode_log(std::istream& in) {
    std::vector<LoggedTick> ticks;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const auto rec = ojson::parse(line);
            LoggedTick t;
            t.tick = rec.at("tick").get<int>();
            for (const auto& a : rec.at("actions")) {
                if (a.is_null())
                    t.actions.emplace_back();
                else
                    t.actions.push_back(LowLevelAction{a.at(0).get<int>(), a.at(1).get<int>(), a.at(2).get<int>(),
                                                       a.at(3).get<int>()});
            }
            if (rec.contains("modes")) {
                for (const auto& m : rec.at("modes"))
                    t.modes.push_back(m.is_null() ? std::nullopt : std::optional<Mode>(mode_from_index(m.get<int>())));
            }
            for (const auto& a : rec.at("aircraft")) {
                AircraftState s;
                s.id = a.at("id").get<int>();
                s.team = team_from(a.at("team").get<std::string>());
                s.type = type_from(a.at("type").get<std::string>());
                s.pos = {a.at("x").get<double>(), a.at("y").get<double>()};
                s.heading = wrap_heading(a.at("heading").get<double>());
                s.heading_setpoint = wrap_heading(a.at("setpoint").get<double>());
                s.speed = a.at("speed").get<double>();
                s.cannon_remaining = a.at("cannon").get<int>();
                s.rockets_remaining = a.at("rockets").get<int>();
                s.alive = a.at("alive").get<bool>();
                t.aircraft.push_back(s);
            }
            const auto& ev = rec.at("events");
            for (const auto& s : ev.at("cannon"))
                t.events.cannon_shots.push_back({s.at(0).get<int>(), s.at(1).get<int>(), s.at(2).get<bool>()});
            for (const auto& s : ev.at("launches"))
                t.events.rocket_launches.push_back({s.at(0).get<int>(), s.at(1).get<int>()});
            for (const auto& s : ev.at("rocket_hits"))
                t.events.rocket_hits.push_back({s.at(0).get<int>(), s.at(1).get<int>()});
            for (const auto& k : ev.at("kills"))
                t.events.kills.push_back({k.at(0).get<int>(), k.at(1).get<int>(), k.at(2).get<bool>()});
            for (const auto& s : ev.at("friendly_fire"))
                t.events.friendly_fire_hits.push_back({s.at(0).get<int>(), s.at(1).get<int>()});
            ticks.push_back(std::move(t));
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorKind::LogIntegrity, "line " + std::to_string(line_no) + ": " + e.what());
        } catch (const Error& e) {
            fail(ErrorKind::LogIntegrity, "line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return ticks;
}

std::string replay_episode(const ScenarioConfig& scenario, const std::vector<LoggedTick>& ticks) {
    auto world = spawn_scenario(scenario);
    std::ostringstream out;
    for (const auto& t : ticks) {
        const auto events = step(world, t.actions);
        if (world.tick != t.tick) fail(ErrorKind::LogIntegrity, "tick counter mismatch during replay");
        out << format_tick_record(world, t.actions, events, t.modes) << '\n';
    }
    return out.str();
}

std::vector<std::string> timeline(const std::vector<LoggedTick>& ticks) {
    std::vector<std::string> lines{"tick  event"};
    ModeTable previous;
    auto prefix = [](int tick) {
        std::string p = std::to_string(tick);
        p.resize(std::max<std::size_t>(p.size(), 4), ' ');
        return p + "  ";
    };
    for (const auto& t : ticks) {
        for (std::size_t id = 0; id < t.modes.size(); ++id) {
            const auto& now = t.modes[id];
            const std::optional<Mode> before = id < previous.size() ? previous[id] : std::nullopt;
            if (now && now != before)
                lines.push_back(prefix(t.tick) + "aircraft " + std::to_string(id) + " option " + std::string(to_string(*now)));
        }
        if (!t.modes.empty()) previous = t.modes;
        for (const auto& s : t.events.cannon_shots)
            lines.push_back(prefix(t.tick) + "cannon " + std::to_string(s.shooter) + " -> " + std::to_string(s.target) +
                            (s.hit ? " hit" : " miss"));
        for (const auto& l : t.events.rocket_launches)
            lines.push_back(prefix(t.tick) + "rocket " + std::to_string(l.shooter) + " -> " + std::to_string(l.target) +
                            " launched");
        for (const auto& k : t.events.kills) {
            bool by_rocket = false;
            for (const auto& h : t.events.rocket_hits) by_rocket |= h.shooter == k.killer && h.target == k.victim;
            lines.push_back(prefix(t.tick) + "aircraft " + std::to_string(k.victim) + " destroyed by " +
                            std::to_string(k.killer) + (by_rocket ? " (rocket)" : " (cannon)") +
                            (k.friendly ? " [friendly fire]" : ""));
        }
    }
    lines.push_back("ticks: " + std::to_string(ticks.size()));
    return lines;
}

}  // namespace hmarl
