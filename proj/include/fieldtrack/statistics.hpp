#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "fieldtrack/field_model.hpp"
#include "fieldtrack/image.hpp"
#include "fieldtrack/localization.hpp"
#include "fieldtrack/rules.hpp"

namespace fieldtrack {

/// Statistics subject: one track id, or the ball (whatever track currently carries it).
struct Entity {
    bool ball = false;
    int track_id = 0;

    static Entity of_ball() { return {true, 0}; }
    static Entity of_track(int id) { return {false, id}; }
    /// `ball` or a track id.
    static Entity parse(std::string_view text);
    std::string to_string() const;
};

/// Positions of the entity in frame order, out-of-field points included.
std::vector<FieldTrackPoint> entity_points(std::span<const RadarFrame> frames, Entity entity);

struct HeatmapParams {
    double cell_mm = 100;
    double blur_sigma_cells = 1.5;
};

struct HeatmapGrid {
    int rows = 0;
    int cols = 0;
    double cell_mm = 100;
    FieldRect extent;
    std::vector<double> values;  // row-major, row 0 at y = extent.y0
    double points = 0;           // contributing points

    double at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
    double& at(int r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }
};

/// Raw counts per cell over the field rectangle; points outside it are skipped.
HeatmapGrid histogram(std::span<const FieldTrackPoint> points, const FieldModel& field, double cell_mm);
/// Separable, zero-padded Gaussian with a unit-sum kernel of radius ceil(3 sigma).
void gaussian_blur(HeatmapGrid& grid, double sigma_cells);
/// Histogram -> blur -> divide by the maximum. Throws DataError when the entity never appears.
HeatmapGrid heatmap(std::span<const RadarFrame> frames, Entity entity, const FieldModel& field,
                    const HeatmapParams& params = {});
std::string heatmap_csv(const HeatmapGrid& grid);
Image render_heatmap(const HeatmapGrid& grid, const FieldModel& field);

struct TrackmapPoint {
    int frame = 0;
    Point2 position;
    friend bool operator==(const TrackmapPoint&, const TrackmapPoint&) = default;
};
using Polyline = std::vector<TrackmapPoint>;

/// Polylines split where consecutive samples are more than `gap_break` frames apart.
std::vector<Polyline> trackmap(std::span<const RadarFrame> frames, Entity entity, int gap_break = 10);
Image render_trackmap(std::span<const Polyline> lines, const FieldModel& field);

struct PossessionTally {
    int frames_team0 = 0;
    int frames_team1 = 0;
    int frames_unattributed = 0;

    int attributed() const { return frames_team0 + frames_team1; }
    double percent(int team) const;
};

/// Per frame with a ball: nearest team-0 robot strictly closer than the nearest team-1 robot
/// goes to team 0, otherwise team 1; frames lacking either team are unattributed.
PossessionTally possession(std::span<const RadarFrame> frames);

struct MapSegment {
    EventType type = EventType::Pass;
    std::optional<int> team;
    int frame = 0;
    Point2 start;
    Point2 end;
};

/// Start/end ball positions of every pass, shot, shot-on-target and goal window.
std::vector<MapSegment> pass_shot_map(std::span<const GameEvent> events, const BallTrajectory& ball, int window);
Image render_pass_shot_map(std::span<const MapSegment> segments, const FieldModel& field);

struct TeamStats {
    int goals = 0;
    int attempts = 0;
    int on_target = 0;
    int passes = 0;
    double possession_pct = 0;
    int illegal_defender = 0;
    int falls = 0;
    friend bool operator==(const TeamStats&, const TeamStats&) = default;
};

struct Scoreboard {
    std::array<TeamStats, 2> teams{};
    /// Events with no team attached.
    TeamStats unattributed;
    PossessionTally possession;
};

/// Throws DataError when goals <= on-target <= attempts fails for a team.
Scoreboard scoreboard(std::span<const GameEvent> events, const PossessionTally& tally);
nlohmann::json to_json(const Scoreboard& board);
std::string scoreboard_text(const Scoreboard& board);

}  // namespace fieldtrack
