#include "fieldtrack/rules.hpp"

#include <algorithm>
#include <array>
#include <map>

#include "fieldtrack/error.hpp"
#include "fieldtrack/text_io.hpp"

namespace fieldtrack {

namespace {

constexpr std::array<std::pair<EventType, std::string_view>, 6> kEventNames{{
    {EventType::Pass, "pass"},
    {EventType::Shot, "shot"},
    {EventType::ShotOnTarget, "shot_on_target"},
    {EventType::Goal, "goal"},
    {EventType::Fall, "fall"},
    {EventType::IllegalDefender, "illegal_defender"},
}};

std::string side_detail(Side s) { return "side=" + std::string(to_string(s)); }

bool in_mouth(const GoalMouth& m, double y) { return y >= m.y0 && y <= m.y1; }

}  // namespace

std::string_view to_string(EventType type) {
    for (const auto& [t, name] : kEventNames)
        if (t == type) return name;
    return "?";
}

EventType parse_event_type(std::string_view text) {
    for (const auto& [t, name] : kEventNames)
        if (name == text) return t;
    throw DataError("unknown event type '" + std::string(text) + "'");
}

void RuleParams::validate() const {
    if (!(pass_min > 0) || !(pass_min < pass_max)) throw UsageError("rules: need 0 < pass_min < pass_max");
    if (window < 1) throw UsageError("rules: window must be >= 1");
    if (refractory < 0 || illegal_count < 0 || fall_debounce < 1)
        throw UsageError("rules: refractory >= 0, illegal_count >= 0, fall_debounce >= 1 required");
}

WindowConditions window_conditions(Point2 start, Point2 end, const FieldModel& field, const RuleParams& params) {
    WindowConditions c;
    const double d = distance(start, end) * field.model_image_scale;
    c.pass = d > params.pass_min && d < params.pass_max;
    for (Side s : {Side::Left, Side::Right}) {
        const FieldRect& area = field.penalty(s);
        if (!area.contains(start) && area.contains(end)) {
            c.shot = s;
            c.on_target = in_mouth(field.mouth(s), end.y);
            break;
        }
    }
    const double len = field.length;
    if (start.x >= 0 && end.x < 0 && in_mouth(field.mouth(Side::Left), end.y))
        c.goal = Side::Left;
    else if (start.x <= len && end.x > len && in_mouth(field.mouth(Side::Right), end.y))
        c.goal = Side::Right;
    return c;
}

std::vector<GameEvent> detect_ball_events(const BallTrajectory& ball, const FieldModel& field,
                                          const RuleParams& params, const TeamLocator& locate) {
    params.validate();
    std::vector<GameEvent> events;
    const int n_frames = static_cast<int>(ball.size());
    const int w = params.window;

    // Per type: whether the condition held at the previous start frame, and last firing.
    enum { kPass, kShot, kOnTarget, kGoal, kTypes };
    std::array<bool, kTypes> prev{};
    std::array<int, kTypes> last_fired;
    last_fired.fill(-1'000'000);
    std::array<std::optional<int>, 2> last_on_target_team;

    auto fire = [&](int idx, bool cond, int n) {
        const bool ok = params.literal || (cond && !prev[idx] && n - last_fired[idx] > params.refractory);
        prev[idx] = cond;
        if (!cond || !ok) return false;
        last_fired[idx] = n;
        return true;
    };

    for (int n = 0; n + w < n_frames; ++n) {
        if (!ball[n] || !ball[n + w]) {
            prev.fill(false);
            continue;
        }
        const Point2 a = *ball[n];
        const Point2 b = *ball[n + w];
        const auto c = window_conditions(a, b, field, params);
        Attribution who;
        if (locate) who = locate(n, a);

        if (fire(kPass, c.pass, n)) events.push_back({EventType::Pass, n, who.team, who.actor, ""});
        if (fire(kShot, c.shot.has_value(), n))
            events.push_back({EventType::Shot, n, who.team, who.actor, side_detail(*c.shot)});
        if (fire(kOnTarget, c.shot.has_value() && c.on_target, n)) {
            events.push_back({EventType::ShotOnTarget, n, who.team, who.actor, side_detail(*c.shot)});
            last_on_target_team[static_cast<int>(*c.shot)] = who.team;
        }
        if (fire(kGoal, c.goal.has_value(), n)) {
            // credit the goal to whoever last shot on target at this goal
            auto team = last_on_target_team[static_cast<int>(*c.goal)];
            if (!team) team = who.team;
            events.push_back({EventType::Goal, n, team, who.actor, side_detail(*c.goal)});
        }
    }
    return events;
}

IllegalDefenderMonitor::IllegalDefenderMonitor(const FieldModel& field, const RuleParams& params)
    : field_(field), params_(params) {}

std::vector<GameEvent> IllegalDefenderMonitor::step(const RadarFrame& frame) {
    int count[2][2] = {{0, 0}, {0, 0}};
    for (const auto& p : frame.points) {
        if (p.cls != ObjectClass::Robot || !p.team || *p.team < 0 || *p.team > 1) continue;
        for (Side s : {Side::Left, Side::Right})
            if (field_.penalty(s).contains(p.position)) ++count[*p.team][static_cast<int>(s)];
    }
    std::vector<GameEvent> events;
    for (int team = 0; team < 2; ++team) {
        for (Side s : {Side::Left, Side::Right}) {
            const int si = static_cast<int>(s);
            const bool cond = count[team][si] > params_.illegal_count;
            if (cond && !active_[team][si])
                events.push_back({EventType::IllegalDefender, frame.frame, team, std::nullopt,
                                  side_detail(s) + ";count=" + std::to_string(count[team][si])});
            active_[team][si] = cond;
        }
    }
    return events;
}

std::vector<GameEvent> fall_events(std::span<const RadarFrame> frames, const RuleParams& params) {
    struct Run {
        int last_frame = -2;
        int length = 0;
    };
    std::map<int, Run> runs;
    std::vector<GameEvent> events;
    for (const auto& f : frames) {
        for (const auto& p : f.points) {
            if (p.cls != ObjectClass::Robot) continue;
            Run& r = runs[p.track_id];
            if (!p.fallen) {
                r.length = 0;
            } else {
                r.length = r.last_frame == f.frame - 1 ? r.length + 1 : 1;
                if (r.length == params.fall_debounce)
                    events.push_back({EventType::Fall, f.frame, p.team, p.track_id, ""});
            }
            r.last_frame = f.frame;
        }
    }
    return events;
}

BallTrajectory ball_trajectory(std::span<const RadarFrame> frames) {
    BallTrajectory out;
    for (const auto& f : frames) {
        if (f.frame < 0) continue;
        if (static_cast<std::size_t>(f.frame) >= out.size()) out.resize(f.frame + 1);
        if (const auto* b = f.ball()) out[f.frame] = b->position;
    }
    return out;
}

Attribution nearest_robot(const RadarFrame& frame, Point2 ball) {
    Attribution best;
    double best_d = 0;
    for (const auto& p : frame.points) {
        if (p.cls != ObjectClass::Robot || !p.team) continue;
        const double d = distance(p.position, ball);
        if (!best.team || d < best_d) {
            best = {p.team, p.track_id};
            best_d = d;
        }
    }
    return best;
}

std::vector<GameEvent> game_events(std::span<const RadarFrame> frames, const FieldModel& field,
                                   const RuleParams& params) {
    params.validate();
    std::map<int, const RadarFrame*> by_frame;
    for (const auto& f : frames) by_frame[f.frame] = &f;

    auto events = detect_ball_events(ball_trajectory(frames), field, params, [&](int n, Point2 ball) {
        auto it = by_frame.find(n);
        return it == by_frame.end() ? Attribution{} : nearest_robot(*it->second, ball);
    });
    IllegalDefenderMonitor monitor(field, params);
    for (const auto& f : frames) {
        auto ev = monitor.step(f);
        events.insert(events.end(), ev.begin(), ev.end());
    }
    auto falls = fall_events(frames, params);
    events.insert(events.end(), falls.begin(), falls.end());
    std::stable_sort(events.begin(), events.end(), [](const GameEvent& a, const GameEvent& b) {
        if (a.frame != b.frame) return a.frame < b.frame;
        return static_cast<int>(a.type) < static_cast<int>(b.type);
    });
    return events;
}

std::string write_events_csv(std::span<const GameEvent> events) {
    std::string out = "frame,type,team,actor,detail\n";
    for (const auto& e : events) {
        out += std::to_string(e.frame) + ',' + std::string(to_string(e.type)) + ',';
        if (e.team) out += std::to_string(*e.team);
        out += ',';
        if (e.actor) out += std::to_string(*e.actor);
        out += ',' + e.detail + '\n';
    }
    return out;
}

std::vector<GameEvent> parse_events_csv(std::string_view csv) {
    std::vector<GameEvent> out;
    int line_no = 0;
    for (const auto& line : text::split(csv, '\n')) {
        ++line_no;
        const auto row = text::trim(line);
        if (row.empty() || line_no == 1) continue;
        const auto cols = text::split(row, ',');
        const std::string where = "events line " + std::to_string(line_no);
        if (cols.size() != 5) throw DataError(where + ": expected 5 columns");
        GameEvent e;
        e.frame = text::require_int(cols[0], where);
        e.type = parse_event_type(cols[1]);
        if (!cols[2].empty()) e.team = text::require_int(cols[2], where);
        if (!cols[3].empty()) e.actor = text::require_int(cols[3], where);
        e.detail = std::string(cols[4]);
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace fieldtrack
