#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fieldtrack/field_model.hpp"
#include "fieldtrack/localization.hpp"

namespace fieldtrack {

enum class EventType { Pass, Shot, ShotOnTarget, Goal, Fall, IllegalDefender };
std::string_view to_string(EventType type);
EventType parse_event_type(std::string_view text);

struct GameEvent {
    EventType type = EventType::Pass;
    int frame = 0;
    std::optional<int> team;
    std::optional<int> actor;
    std::string detail;
    friend bool operator==(const GameEvent&, const GameEvent&) = default;
};

struct RuleParams {
    double pass_min = 50;  // plan-view pixels, exclusive
    double pass_max = 70;  // plan-view pixels, exclusive
    int window = 5;
    /// Frames after an event during which the same type stays silent (episode mode).
    int refractory = 5;
    /// A foul needs strictly more robots than this in one penalty area.
    int illegal_count = 3;
    int fall_debounce = 3;
    /// Literal mode: every qualifying window counts, no edge detection or refractory.
    bool literal = false;

    void validate() const;
};

/// Per-frame ball position; index is the frame, nullopt where the ball is missing.
using BallTrajectory = std::vector<std::optional<Point2>>;

struct Attribution {
    std::optional<int> team;
    std::optional<int> actor;
};
/// Resolves who had the ball at a frame.
using TeamLocator = std::function<Attribution(int frame, Point2 ball)>;

/// Window-scan conditions at start frame n (both ends present). Exposed for oracles.
struct WindowConditions {
    bool pass = false;
    std::optional<Side> shot;
    bool on_target = false;
    std::optional<Side> goal;
};
WindowConditions window_conditions(Point2 start, Point2 end, const FieldModel& field, const RuleParams& params);

std::vector<GameEvent> detect_ball_events(const BallTrajectory& ball, const FieldModel& field,
                                          const RuleParams& params, const TeamLocator& locate = {});

/// Rising-edge illegal-defender detection across frames.
class IllegalDefenderMonitor {
public:
    IllegalDefenderMonitor(const FieldModel& field, const RuleParams& params);
    std::vector<GameEvent> step(const RadarFrame& frame);

private:
    FieldModel field_;
    RuleParams params_;
    bool active_[2][2] = {{false, false}, {false, false}};  // [team][side]
};

/// Debounced rising edges of per-track fallen flags; fires at onset + debounce - 1.
std::vector<GameEvent> fall_events(std::span<const RadarFrame> frames, const RuleParams& params);

BallTrajectory ball_trajectory(std::span<const RadarFrame> frames);
/// Nearest team-labelled robot in the given frame.
Attribution nearest_robot(const RadarFrame& frame, Point2 ball);

/// All rules over a localized game (frames indexed by frame number), sorted by (frame, type).
std::vector<GameEvent> game_events(std::span<const RadarFrame> frames, const FieldModel& field,
                                   const RuleParams& params);

/// `frame,type,team,actor,detail`.
std::string write_events_csv(std::span<const GameEvent> events);
std::vector<GameEvent> parse_events_csv(std::string_view csv);

}  // namespace fieldtrack
