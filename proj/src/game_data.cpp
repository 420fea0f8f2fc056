#include "fieldtrack/game_data.hpp"

#include <map>
#include <set>

#include "fieldtrack/error.hpp"
#include "fieldtrack/text_io.hpp"

namespace fieldtrack {

namespace {

std::string opt_int(const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); }

ObjectClass parse_class(std::string_view s, const std::string& where) {
    if (s == "robot") return ObjectClass::Robot;
    if (s == "ball") return ObjectClass::Ball;
    throw DataError(where + ": class must be robot or ball");
}

}  // namespace

std::vector<GameDataRow> build_game_data(std::span<const TrackReport> reports, std::span<const RadarFrame> radar) {
    std::map<std::pair<int, int>, const FieldTrackPoint*> points;
    for (const auto& f : radar)
        for (const auto& p : f.points) points[{p.frame, p.track_id}] = &p;
    std::vector<GameDataRow> rows;
    rows.reserve(reports.size());
    for (const auto& r : reports) {
        GameDataRow row{r.frame, r.track_id, r.cls, r.bbox, std::nullopt, std::nullopt, std::nullopt, r.fallen};
        auto it = points.find({r.frame, r.track_id});
        if (it != points.end()) {
            row.field = it->second->position;
            row.team = it->second->team;
            row.jersey = it->second->jersey;
        }
        rows.push_back(row);
    }
    return rows;
}

std::string write_game_data(std::span<const GameDataRow> rows) {
    std::string out(kGameDataHeader);
    out += '\n';
    using text::format_double;
    for (const auto& r : rows) {
        out += std::to_string(r.frame) + ',' + std::to_string(r.track_id) + ',' + std::string(to_string(r.cls)) + ',' +
               format_double(r.bbox.x) + ',' + format_double(r.bbox.y) + ',' + format_double(r.bbox.w) + ',' +
               format_double(r.bbox.h) + ',';
        if (r.field) out += format_double(r.field->x) + ',' + format_double(r.field->y);
        else out += ',';
        out += ',' + opt_int(r.team) + ',' + opt_int(r.jersey) + ',' + (r.fallen ? "1" : "0") + '\n';
    }
    return out;
}

std::vector<GameDataRow> parse_game_data(std::string_view csv) {
    std::vector<GameDataRow> rows;
    std::set<std::pair<int, int>> seen;
    int line_no = 0;
    bool header = false;
    for (const auto& raw : text::split(csv, '\n')) {
        ++line_no;
        const auto line = text::trim(raw);
        if (line.empty()) continue;
        const std::string where = "game_data line " + std::to_string(line_no);
        if (!header) {
            if (line != kGameDataHeader) throw DataError(where + ": expected header " + std::string(kGameDataHeader));
            header = true;
            continue;
        }
        const auto c = text::split(line, ',');
        if (c.size() != 12) throw DataError(where + ": expected 12 columns");
        GameDataRow r;
        r.frame = text::require_int(c[0], where);
        r.track_id = text::require_int(c[1], where);
        r.cls = parse_class(c[2], where);
        r.bbox = {text::require_double(c[3], where), text::require_double(c[4], where),
                  text::require_double(c[5], where), text::require_double(c[6], where)};
        if (c[7].empty() != c[8].empty()) throw DataError(where + ": field_x and field_y must both be set or empty");
        if (!c[7].empty()) r.field = Point2{text::require_double(c[7], where), text::require_double(c[8], where)};
        if (!c[9].empty()) r.team = text::require_int(c[9], where);
        if (!c[10].empty()) r.jersey = text::require_int(c[10], where);
        if (c[11] != "0" && c[11] != "1") throw DataError(where + ": fallen must be 0 or 1");
        r.fallen = c[11] == "1";
        if (!seen.insert({r.frame, r.track_id}).second) throw DataError(where + ": duplicate (frame, track_id)");
        rows.push_back(r);
    }
    if (!header) throw DataError("game_data: missing header");
    return rows;
}

std::vector<GameDataRow> load_game_data(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw DataError("game_data not found: " + path.string());
    return parse_game_data(text::read_file(path));
}

std::vector<RadarFrame> radar_from_game_data(std::span<const GameDataRow> rows, const FieldModel& field,
                                             int frame_count, double margin_mm) {
    std::vector<RadarFrame> frames(frame_count);
    for (int f = 0; f < frame_count; ++f) frames[f].frame = f;
    for (const auto& r : rows) {
        if (!r.field || r.frame < 0 || r.frame >= frame_count) continue;
        FieldTrackPoint p;
        p.frame = r.frame;
        p.track_id = r.track_id;
        p.cls = r.cls;
        p.position = *r.field;
        p.team = r.team;
        p.jersey = r.jersey;
        p.fallen = r.fallen;
        p.out_of_field = !field.inside_field(p.position, margin_mm);
        frames[r.frame].points.push_back(p);
    }
    return frames;
}

std::string write_track_dump(std::span<const TrackReport> reports) {
    std::string out = "frame,track_id,class,x,y,w,h,status,fallen\n";
    using text::format_double;
    for (const auto& r : reports)
        out += std::to_string(r.frame) + ',' + std::to_string(r.track_id) + ',' + std::string(to_string(r.cls)) + ',' +
               format_double(r.bbox.x) + ',' + format_double(r.bbox.y) + ',' + format_double(r.bbox.w) + ',' +
               format_double(r.bbox.h) + ',' + std::string(to_string(r.status)) + ',' + (r.fallen ? "1" : "0") + '\n';
    return out;
}

}  // namespace fieldtrack
