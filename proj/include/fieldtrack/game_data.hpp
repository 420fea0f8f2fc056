#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fieldtrack/field_model.hpp"
#include "fieldtrack/localization.hpp"
#include "fieldtrack/tracker.hpp"

namespace fieldtrack {

/// One tracked object in one frame: `frame,track_id,class,x,y,w,h,field_x,field_y,team,jersey,fallen`.
/// Field, team and jersey columns are empty when unknown.
struct GameDataRow {
    int frame = 0;
    int track_id = 0;
    ObjectClass cls = ObjectClass::Robot;
    BBox bbox;
    std::optional<Point2> field;
    std::optional<int> team;
    std::optional<int> jersey;
    bool fallen = false;
    friend bool operator==(const GameDataRow&, const GameDataRow&) = default;
};

inline constexpr std::string_view kGameDataHeader = "frame,track_id,class,x,y,w,h,field_x,field_y,team,jersey,fallen";

/// One row per report, field data joined from the matching radar point.
std::vector<GameDataRow> build_game_data(std::span<const TrackReport> reports, std::span<const RadarFrame> radar);

std::string write_game_data(std::span<const GameDataRow> rows);
/// Throws DataError naming the line; rejects duplicate (frame, track_id) pairs.
std::vector<GameDataRow> parse_game_data(std::string_view csv);
std::vector<GameDataRow> load_game_data(const std::filesystem::path& path);

/// Rebuilds radar frames [0, frame_count) from rows with field positions.
std::vector<RadarFrame> radar_from_game_data(std::span<const GameDataRow> rows, const FieldModel& field,
                                             int frame_count, double margin_mm = 500);

/// `frame,track_id,class,x,y,w,h,status,fallen`.
std::string write_track_dump(std::span<const TrackReport> reports);

}  // namespace fieldtrack
