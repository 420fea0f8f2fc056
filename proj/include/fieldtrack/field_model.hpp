#pragma once

#include <array>
#include <compare>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "fieldtrack/geometry.hpp"

namespace fieldtrack {

enum class LandmarkKind { TJunction, LCorner, PenaltyAreaCorner, GoalAreaCorner, CenterCircleTangent };

/// A landmark class as emitted by the detector: its kind plus a discriminating index.
/// Text form is `<kind>.<index>`, e.g. `goal_area_corner.2`.
struct LandmarkId {
    LandmarkKind kind = LandmarkKind::TJunction;
    int index = 0;

    auto operator<=>(const LandmarkId&) const = default;
    std::string to_string() const;
    static LandmarkId parse(std::string_view text);
};

std::string_view to_string(LandmarkKind kind);

enum class PitchVersion { WithGoalAreas, WithoutGoalAreas, Unknown };
std::string_view to_string(PitchVersion version);

enum class Side { Left, Right };
std::string_view to_string(Side side);
std::optional<Side> parse_side(std::string_view text);

enum class Region { PenaltyArea, GoalArea };

/// Closed axis-aligned rectangle in field millimeters.
struct FieldRect {
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    bool contains(Point2 p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
    bool contains(const FieldRect& r) const { return r.x0 >= x0 && r.x1 <= x1 && r.y0 >= y0 && r.y1 <= y1; }
    friend bool operator==(const FieldRect&, const FieldRect&) = default;
};

/// Goal opening on the goal line (x = 0 on the left, x = length on the right), as a y-range.
struct GoalMouth {
    double y0 = 0, y1 = 0;
    friend bool operator==(const GoalMouth&, const GoalMouth&) = default;
};

/// Field-plane geometry. Origin at a corner, x along the length, y along the width, millimeters.
/// The plan-view image is `model_image_scale` pixels per millimeter of the same frame.
struct FieldModel {
    double length = 9000;
    double width = 6000;
    double center_circle_radius = 750;
    double model_image_scale = 0.1;
    std::array<FieldRect, 2> penalty_area{};
    std::optional<std::array<FieldRect, 2>> goal_area;
    std::array<GoalMouth, 2> goal_mouth{};
    std::map<LandmarkId, Point2> landmarks;

    PitchVersion version() const {
        return goal_area ? PitchVersion::WithGoalAreas : PitchVersion::WithoutGoalAreas;
    }
    const FieldRect& penalty(Side s) const { return penalty_area[static_cast<int>(s)]; }
    const GoalMouth& mouth(Side s) const { return goal_mouth[static_cast<int>(s)]; }
    /// x coordinate of the goal line on side `s`.
    double goal_line_x(Side s) const { return s == Side::Left ? 0.0 : length; }
    bool inside_field(Point2 p, double margin = 0.0) const {
        return p.x >= -margin && p.x <= length + margin && p.y >= -margin && p.y <= width + margin;
    }

    friend bool operator==(const FieldModel&, const FieldModel&) = default;
};

/// SPL-style layout: 9000x6000 mm, 1650x4000 penalty areas, 600x2200 goal areas,
/// 1500 mm goal mouth, 750 mm center circle, landmarks at every line junction.
FieldModel default_field_model(bool with_goal_areas = true);

/// Validates and builds a FieldModel from the field-description document. Throws DataError.
FieldModel load_field_model(const nlohmann::json& doc);
FieldModel load_field_model_file(const std::filesystem::path& path);
nlohmann::json to_json(const FieldModel& model);

/// with_goal_areas iff at least two distinct goal-area-corner classes are present;
/// without_goal_areas iff penalty-area classes are present and no goal-area class is;
/// unknown otherwise.
PitchVersion infer_pitch_version(std::span<const LandmarkId> detected);

/// Closed-set membership. Throws DataError when the region does not exist in this model.
bool point_in_region(const FieldModel& model, Point2 p, Region region, Side side);

inline constexpr int kFieldModelSchemaVersion = 1;

}  // namespace fieldtrack
