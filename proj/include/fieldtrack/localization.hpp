#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "fieldtrack/camera.hpp"
#include "fieldtrack/field_model.hpp"
#include "fieldtrack/image.hpp"
#include "fieldtrack/tracker.hpp"

namespace fieldtrack {

struct FieldTrackPoint {
    int frame = 0;
    int track_id = 0;
    ObjectClass cls = ObjectClass::Robot;
    Point2 position;  // mm
    std::optional<int> team;
    std::optional<int> jersey;
    bool fallen = false;
    bool out_of_field = false;
    friend bool operator==(const FieldTrackPoint&, const FieldTrackPoint&) = default;
};

struct RadarFrame {
    int frame = 0;
    std::vector<FieldTrackPoint> points;
    /// Tracks whose anchor had no finite projection this frame.
    std::vector<int> degenerate;
    friend bool operator==(const RadarFrame&, const RadarFrame&) = default;

    const FieldTrackPoint* ball() const;
};

/// Bottom-center for upright robots, box center for fallen robots and the ball.
Point2 anchor_point(const BBox& box, ObjectClass cls, bool fallen = false);

struct LocalizeOptions {
    double margin_mm = 500;
};

/// anchor -> undistort (when a camera is given) -> image-to-field homography.
/// Keeps at most one ball: the one with the most hits, lowest id on ties.
RadarFrame localize(int frame, std::span<const TrackReport> tracks, const Eigen::Matrix3d& H,
                    const FieldModel& field, const CameraProfile* camera = nullptr, const LocalizeOptions& options = {});

/// Groups reports by frame and localizes every frame in [0, frame_count).
std::vector<RadarFrame> localize_all(std::span<const TrackReport> reports, int frame_count, const Eigen::Matrix3d& H,
                                     const FieldModel& field, const CameraProfile* camera = nullptr,
                                     const LocalizeOptions& options = {});

namespace plan {

inline constexpr Rgb kGrass{34, 110, 52};
inline constexpr Rgb kLine{245, 245, 245};
inline constexpr Rgb kBall{255, 150, 20};
inline constexpr Rgb kUnknownTeam{170, 170, 170};
Rgb team_color(std::optional<int> team);

/// Plan-view pixel of a field point.
Point2 to_pixel(const FieldModel& field, Point2 p);
/// Field lines at model_image_scale, `round(length * scale) x round(width * scale)` pixels.
Image render_field(const FieldModel& field);

}  // namespace plan

Image render_radar(const RadarFrame& frame, const FieldModel& field);

}  // namespace fieldtrack
