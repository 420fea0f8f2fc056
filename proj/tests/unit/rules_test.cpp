#include <gtest/gtest.h>

#include <algorithm>

#include "fieldtrack/error.hpp"
#include "fieldtrack/rng.hpp"
#include "fieldtrack/rules.hpp"
#include "oracles.hpp"

using namespace fieldtrack;

namespace {

int count_type(const std::vector<GameEvent>& ev, EventType t) {
    return static_cast<int>(std::count_if(ev.begin(), ev.end(), [&](const GameEvent& e) { return e.type == t; }));
}

// stationary, then a straight move of `dist` mm over exactly `window` frames, then stationary
BallTrajectory single_move(double dist, int window = 5) {
    BallTrajectory b;
    for (int f = 0; f < 40; ++f) {
        const double t = std::clamp((f - 10) / static_cast<double>(window), 0.0, 1.0);
        b.push_back(Point2{3000 + dist * t, 3000});
    }
    return b;
}

FieldTrackPoint robot(int id, int team, Point2 p, bool fallen = false) {
    FieldTrackPoint r;
    r.track_id = id;
    r.team = team;
    r.position = p;
    r.fallen = fallen;
    return r;
}

RadarFrame frame_with(int n, std::vector<FieldTrackPoint> pts) {
    for (auto& p : pts) p.frame = n;
    return {n, std::move(pts), {}};
}

std::vector<FieldTrackPoint> defenders(int team, int inside) {
    std::vector<FieldTrackPoint> pts;
    for (int i = 0; i < 5; ++i) {
        const Point2 p = i < inside ? Point2{500.0 + 200 * i, 3000} : Point2{4000.0 + 300 * i, 1000};
        pts.push_back(robot(team * 10 + i + 1, team, p));
    }
    return pts;
}

}  // namespace

TEST(RuleParams, Validation) {
    RuleParams p;
    p.pass_min = 80;
    EXPECT_THROW(p.validate(), UsageError);
    p = {};
    p.window = 0;
    EXPECT_THROW(p.validate(), UsageError);
    p = {};
    p.pass_min = 0;
    EXPECT_THROW(p.validate(), UsageError);
}

TEST(BallEvents, SixtyModelPixelsIsOnePass) {
    const FieldModel field = default_field_model();
    const auto ev = detect_ball_events(single_move(600), field, {});
    EXPECT_EQ(count_type(ev, EventType::Pass), 1);
    ASSERT_FALSE(ev.empty());
    EXPECT_EQ(ev[0].frame, 10);
    EXPECT_EQ(count_type(detect_ball_events(single_move(450), field, {}), EventType::Pass), 0);
}

TEST(BallEvents, PassBoundsAreStrict) {
    FieldModel field = default_field_model();
    field.model_image_scale = 1.0;
    const RuleParams p;
    EXPECT_FALSE(window_conditions({0, 0}, {50, 0}, field, p).pass);
    EXPECT_TRUE(window_conditions({0, 0}, {50.001, 0}, field, p).pass);
    EXPECT_TRUE(window_conditions({0, 0}, {69.999, 0}, field, p).pass);
    EXPECT_FALSE(window_conditions({0, 0}, {70, 0}, field, p).pass);
}

TEST(BallEvents, ShotOnTargetGoalCountedOncePerEpisode) {
    const FieldModel field = default_field_model();
    BallTrajectory b;
    // from midfield straight into the left goal, 200 mm per frame
    for (int f = 0; f < 40; ++f) b.push_back(Point2{4000.0 - 200 * f, 3000});
    const auto ev = detect_ball_events(b, field, {});
    EXPECT_EQ(count_type(ev, EventType::Shot), 1);
    EXPECT_EQ(count_type(ev, EventType::ShotOnTarget), 1);
    EXPECT_EQ(count_type(ev, EventType::Goal), 1);
    for (const auto& e : ev)
        if (e.type != EventType::Pass) EXPECT_EQ(e.detail, "side=left");
    // literal mode counts every qualifying window, as the scan does
    RuleParams lit;
    lit.literal = true;
    const auto scan = oracle::brute_force_scan(b, field, 50, 70, 5);
    EXPECT_EQ(oracle::count_events(detect_ball_events(b, field, lit)), scan);
    EXPECT_GT(scan.shots, 1);
}

TEST(BallEvents, WideShotIsNotOnTarget) {
    const FieldModel field = default_field_model();
    BallTrajectory b;
    for (int f = 0; f < 30; ++f) b.push_back(Point2{4000.0 - 150 * f, 1500 + 20.0 * f});
    const auto ev = detect_ball_events(b, field, {});
    EXPECT_EQ(count_type(ev, EventType::Shot), 1);
    EXPECT_EQ(count_type(ev, EventType::ShotOnTarget), 0);
    EXPECT_EQ(count_type(ev, EventType::Goal), 0);
}

TEST(BallEvents, RightGoal) {
    const FieldModel field = default_field_model();
    BallTrajectory b;
    for (int f = 0; f < 40; ++f) b.push_back(Point2{5000.0 + 200 * f, 2800});
    const auto ev = detect_ball_events(b, field, {});
    EXPECT_EQ(count_type(ev, EventType::Goal), 1);
    for (const auto& e : ev)
        if (e.type == EventType::Goal) EXPECT_EQ(e.detail, "side=right");
}

TEST(BallEvents, GapsSuppressWindows) {
    const FieldModel field = default_field_model();
    auto b = single_move(600);
    b[15].reset();
    EXPECT_EQ(count_type(detect_ball_events(b, field, {}), EventType::Pass), 0);
    b = single_move(600);
    b[12].reset();  // interior frame only
    EXPECT_EQ(count_type(detect_ball_events(b, field, {}), EventType::Pass), 1);
}

TEST(BallEvents, RefractorySuppressesRepeatsAndExpires) {
    const FieldModel field = default_field_model();
    // back and forth 600 mm every 5 frames: pass condition toggles frequently
    BallTrajectory b;
    for (int f = 0; f < 60; ++f) {
        const int leg = f / 5;
        const double t = (f % 5) / 5.0;
        const double from = leg % 2 ? 3600 : 3000, to = leg % 2 ? 3000 : 3600;
        b.push_back(Point2{from + (to - from) * t, 3000});
    }
    RuleParams lit;
    lit.literal = true;
    const auto literal = detect_ball_events(b, field, lit);
    const auto episodes = detect_ball_events(b, field, {});
    EXPECT_LT(count_type(episodes, EventType::Pass), count_type(literal, EventType::Pass));
    std::vector<int> frames;
    for (const auto& e : episodes)
        if (e.type == EventType::Pass) frames.push_back(e.frame);
    for (std::size_t i = 1; i < frames.size(); ++i) EXPECT_GT(frames[i] - frames[i - 1], 5);
    RuleParams zero;
    zero.refractory = 0;
    // zero refractory still needs a rising edge
    EXPECT_LE(count_type(detect_ball_events(b, field, zero), EventType::Pass), count_type(literal, EventType::Pass));
}

TEST(BallEvents, LiteralModeEqualsBruteForceOnRandomTrajectories) {
    const FieldModel field = default_field_model();
    Rng rng(91);
    RuleParams lit;
    lit.literal = true;
    for (int trial = 0; trial < 50; ++trial) {
        BallTrajectory b;
        Point2 p{rng.uniform(0, 9000), rng.uniform(0, 6000)};
        for (int f = 0; f < 200; ++f) {
            p.x += rng.normal(0, 150);
            p.y += rng.normal(0, 150);
            p.x = std::clamp(p.x, -600.0, 9600.0);
            p.y = std::clamp(p.y, -300.0, 6300.0);
            if (rng.uniform() < 0.05)
                b.push_back(std::nullopt);
            else
                b.push_back(p);
        }
        EXPECT_EQ(oracle::count_events(detect_ball_events(b, field, lit)), oracle::brute_force_scan(b, field, 50, 70, 5));
    }
}

TEST(BallEvents, MirroredTrajectoryKeepsCounts) {
    const FieldModel field = default_field_model();
    Rng rng(92);
    for (int trial = 0; trial < 20; ++trial) {
        BallTrajectory b, m;
        Point2 p{rng.uniform(0, 9000), rng.uniform(0, 6000)};
        for (int f = 0; f < 150; ++f) {
            p.x = std::clamp(p.x + rng.normal(0, 200), -500.0, 9500.0);
            p.y = std::clamp(p.y + rng.normal(0, 120), 0.0, 6000.0);
            b.push_back(p);
            m.push_back(Point2{field.length - p.x, p.y});
        }
        const auto a = detect_ball_events(b, field, {}), c = detect_ball_events(m, field, {});
        EXPECT_EQ(oracle::count_events(a), oracle::count_events(c));
    }
}

TEST(BallEvents, AttributionUsesLocatorAtWindowStart) {
    const FieldModel field = default_field_model();
    std::vector<int> asked;
    const auto ev = detect_ball_events(single_move(600), field, {}, [&](int n, Point2) {
        asked.push_back(n);
        return Attribution{n == 10 ? 1 : 0, 77};
    });
    ASSERT_EQ(count_type(ev, EventType::Pass), 1);
    EXPECT_EQ(ev[0].team, 1);
    EXPECT_EQ(ev[0].actor, 77);
}

TEST(BallEvents, GoalCreditedToLastOnTargetShooter) {
    const FieldModel field = default_field_model();
    BallTrajectory b;
    for (int f = 0; f < 40; ++f) b.push_back(Point2{4000.0 - 200 * f, 3000});
    // the nearest robot changes between the shot and the goal windows
    const auto ev = detect_ball_events(b, field, {}, [](int n, Point2) { return Attribution{n < 14 ? 0 : 1, n}; });
    std::optional<int> shot_team, goal_team;
    for (const auto& e : ev) {
        if (e.type == EventType::ShotOnTarget) shot_team = e.team;
        if (e.type == EventType::Goal) goal_team = e.team;
    }
    ASSERT_TRUE(shot_team && goal_team);
    EXPECT_EQ(*goal_team, *shot_team);
}

TEST(IllegalDefender, RisingEdgeOnly) {
    const FieldModel field = default_field_model();
    IllegalDefenderMonitor mon(field, {});
    EXPECT_TRUE(mon.step(frame_with(0, defenders(0, 3))).empty());
    const auto ev = mon.step(frame_with(1, defenders(0, 4)));
    ASSERT_EQ(ev.size(), 1u);
    EXPECT_EQ(ev[0].type, EventType::IllegalDefender);
    EXPECT_EQ(ev[0].team, 0);
    EXPECT_EQ(ev[0].detail, "side=left;count=4");
    for (int f = 2; f < 102; ++f) EXPECT_TRUE(mon.step(frame_with(f, defenders(0, 4))).empty());
    EXPECT_TRUE(mon.step(frame_with(102, defenders(0, 3))).empty());
    EXPECT_EQ(mon.step(frame_with(103, defenders(0, 5))).size(), 1u);
}

TEST(IllegalDefender, ThreeIsLegal) {
    const FieldModel field = default_field_model();
    IllegalDefenderMonitor mon(field, {});
    for (int f = 0; f < 10; ++f) EXPECT_TRUE(mon.step(frame_with(f, defenders(1, 3))).empty());
}

TEST(IllegalDefender, MatchesHandSimulatedEdges) {
    const FieldModel field = default_field_model();
    Rng rng(93);
    IllegalDefenderMonitor mon(field, {});
    bool prev = false;
    int edges = 0, events = 0;
    for (int f = 0; f < 500; ++f) {
        const int inside = static_cast<int>(rng.index(6));
        const bool cond = inside > 3;
        edges += cond && !prev;
        prev = cond;
        events += static_cast<int>(mon.step(frame_with(f, defenders(1, inside))).size());
    }
    EXPECT_EQ(events, edges);
}

TEST(FallEvents, DebounceAndEpisodes) {
    RuleParams p;
    std::vector<RadarFrame> frames;
    auto at = [&](int f, bool fallen) { frames.push_back(frame_with(f, {robot(5, 0, {1000, 1000}, fallen)})); };
    for (int f = 0; f < 5; ++f) at(f, false);
    for (int f = 5; f < 15; ++f) at(f, true);
    for (int f = 15; f < 20; ++f) at(f, false);
    for (int f = 20; f < 22; ++f) at(f, true);
    for (int f = 22; f < 25; ++f) at(f, false);
    for (int f = 25; f < 30; ++f) at(f, true);
    const auto ev = fall_events(frames, p);
    ASSERT_EQ(ev.size(), 2u);
    EXPECT_EQ(ev[0].frame, 7);
    EXPECT_EQ(ev[0].actor, 5);
    EXPECT_EQ(ev[0].team, 0);
    EXPECT_EQ(ev[1].frame, 27);
}

TEST(FallEvents, MissingFrameBreaksTheRun) {
    std::vector<RadarFrame> frames;
    for (int f : {0, 1, 3, 4}) frames.push_back(frame_with(f, {robot(2, 1, {0, 0}, true)}));
    EXPECT_TRUE(fall_events(frames, {}).empty());
}

TEST(GameEvents, SortedAndCsvRoundTrip) {
    const FieldModel field = default_field_model();
    std::vector<RadarFrame> frames;
    for (int f = 0; f < 40; ++f) {
        auto pts = defenders(0, f >= 20 ? 4 : 2);
        FieldTrackPoint ball;
        ball.cls = ObjectClass::Ball;
        ball.track_id = 99;
        ball.position = {4000.0 - 200 * f, 3000};
        pts.push_back(ball);
        pts.push_back(robot(50, 1, {7000, 500}, f >= 10));
        frames.push_back(frame_with(f, pts));
    }
    const auto ev = game_events(frames, field, {});
    EXPECT_TRUE(std::is_sorted(ev.begin(), ev.end(), [](const GameEvent& a, const GameEvent& b) {
        return a.frame < b.frame || (a.frame == b.frame && a.type < b.type);
    }));
    EXPECT_EQ(count_type(ev, EventType::IllegalDefender), 1);
    EXPECT_EQ(count_type(ev, EventType::Fall), 1);
    EXPECT_EQ(count_type(ev, EventType::Goal), 1);
    EXPECT_EQ(parse_events_csv(write_events_csv(ev)), ev);
    EXPECT_THROW(parse_events_csv("frame,type,team,actor,detail\n1,dribble,,,\n"), DataError);
    EXPECT_THROW(parse_events_csv("frame,type,team,actor,detail\nx,pass,,,\n"), DataError);
}

TEST(EventType, NamesRoundTrip) {
    for (EventType t : {EventType::Pass, EventType::Shot, EventType::ShotOnTarget, EventType::Goal, EventType::Fall,
                        EventType::IllegalDefender})
        EXPECT_EQ(parse_event_type(to_string(t)), t);
    EXPECT_EQ(to_string(EventType::ShotOnTarget), "shot_on_target");
}
