#include "fieldtrack/localization.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "fieldtrack/error.hpp"
#include "fieldtrack/homography.hpp"
#include "fieldtrack/raster.hpp"

namespace fieldtrack {

const FieldTrackPoint* RadarFrame::ball() const {
    for (const auto& p : points)
        if (p.cls == ObjectClass::Ball) return &p;
    return nullptr;
}

Point2 anchor_point(const BBox& box, ObjectClass cls, bool fallen) {
    if (cls == ObjectClass::Robot && !fallen) return {box.x + box.w / 2.0, box.y + box.h};
    return box.center();
}

RadarFrame localize(int frame, std::span<const TrackReport> tracks, const Eigen::Matrix3d& H,
                    const FieldModel& field, const CameraProfile* camera, const LocalizeOptions& options) {
    RadarFrame out;
    out.frame = frame;
    const TrackReport* ball = nullptr;
    for (const auto& t : tracks) {
        if (t.cls != ObjectClass::Ball) continue;
        if (!ball || t.hits > ball->hits || (t.hits == ball->hits && t.track_id < ball->track_id)) ball = &t;
    }
    for (const auto& t : tracks) {
        if (t.cls == ObjectClass::Landmark) continue;
        if (t.cls == ObjectClass::Ball && &t != ball) continue;
        Point2 a = anchor_point(t.bbox, t.cls, t.fallen);
        try {
            if (camera && !camera->distortion.is_zero()) a = undistort_point(a, *camera);
            const Point2 p = project_to_field(a, H);
            if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw DataError("non-finite projection");
            FieldTrackPoint fp;
            fp.frame = frame;
            fp.track_id = t.track_id;
            fp.cls = t.cls;
            fp.position = p;
            fp.fallen = t.fallen;
            fp.out_of_field = !field.inside_field(p, options.margin_mm);
            out.points.push_back(fp);
        } catch (const DataError&) {
            out.degenerate.push_back(t.track_id);
        }
    }
    return out;
}

std::vector<RadarFrame> localize_all(std::span<const TrackReport> reports, int frame_count, const Eigen::Matrix3d& H,
                                     const FieldModel& field, const CameraProfile* camera,
                                     const LocalizeOptions& options) {
    std::map<int, std::vector<TrackReport>> by_frame;
    for (const auto& r : reports) by_frame[r.frame].push_back(r);
    std::vector<RadarFrame> out;
    out.reserve(frame_count);
    for (int f = 0; f < frame_count; ++f) {
        auto it = by_frame.find(f);
        if (it == by_frame.end()) {
            out.push_back({f, {}, {}});
        } else {
            out.push_back(localize(f, it->second, H, field, camera, options));
        }
    }
    return out;
}

namespace plan {

Rgb team_color(std::optional<int> team) {
    if (!team) return kUnknownTeam;
    return *team == 0 ? Rgb{40, 90, 230} : Rgb{220, 40, 40};
}

Point2 to_pixel(const FieldModel& field, Point2 p) {
    return {p.x * field.model_image_scale, p.y * field.model_image_scale};
}

namespace {

int px(double v) { return static_cast<int>(std::lround(v)); }

void rect_outline(Image& img, const FieldModel& field, const FieldRect& r) {
    const Point2 a = to_pixel(field, {r.x0, r.y0});
    const Point2 b = to_pixel(field, {r.x1, r.y1});
    raster::draw_line(img, px(a.x), px(a.y), px(b.x), px(a.y), kLine);
    raster::draw_line(img, px(b.x), px(a.y), px(b.x), px(b.y), kLine);
    raster::draw_line(img, px(b.x), px(b.y), px(a.x), px(b.y), kLine);
    raster::draw_line(img, px(a.x), px(b.y), px(a.x), px(a.y), kLine);
}

}  // namespace

Image render_field(const FieldModel& field) {
    const int w = std::max(1, px(field.length * field.model_image_scale));
    const int h = std::max(1, px(field.width * field.model_image_scale));
    Image img(w, h, kGrass);
    rect_outline(img, field, {0, 0, field.length, field.width});
    const Point2 top = to_pixel(field, {field.length / 2, 0});
    const Point2 bottom = to_pixel(field, {field.length / 2, field.width});
    raster::draw_line(img, px(top.x), px(top.y), px(bottom.x), px(bottom.y), kLine);
    const Point2 c = to_pixel(field, {field.length / 2, field.width / 2});
    raster::draw_circle(img, px(c.x), px(c.y), px(field.center_circle_radius * field.model_image_scale), kLine);
    for (const auto& r : field.penalty_area) rect_outline(img, field, r);
    if (field.goal_area)
        for (const auto& r : *field.goal_area) rect_outline(img, field, r);
    return img;
}

}  // namespace plan

Image render_radar(const RadarFrame& frame, const FieldModel& field) {
    Image img = plan::render_field(field);
    for (const auto& p : frame.points) {
        const Point2 q = plan::to_pixel(field, p.position);
        const int x = static_cast<int>(std::lround(q.x));
        const int y = static_cast<int>(std::lround(q.y));
        if (p.cls == ObjectClass::Ball) {
            raster::fill_disc(img, x, y, 4, plan::kBall);
        } else {
            raster::fill_disc(img, x, y, 8, plan::team_color(p.team));
            if (p.fallen) raster::draw_circle(img, x, y, 10, plan::kLine);
        }
    }
    return img;
}

}  // namespace fieldtrack
