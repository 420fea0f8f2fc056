#include "fieldtrack/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fieldtrack/error.hpp"
#include "fieldtrack/raster.hpp"
#include "fieldtrack/text_io.hpp"

namespace fieldtrack {

namespace {

int px(double v) { return static_cast<int>(std::lround(v)); }

Rgb blend(Rgb a, Rgb b, double t) {
    auto mix = [t](std::uint8_t x, std::uint8_t y) {
        return static_cast<std::uint8_t>(std::lround(x + (y - x) * t));
    };
    return {mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b)};
}

// black -> red -> yellow -> white
Rgb heat_color(double v) {
    v = std::clamp(v, 0.0, 1.0);
    if (v < 1.0 / 3) return blend({0, 0, 0}, {220, 30, 20}, v * 3);
    if (v < 2.0 / 3) return blend({220, 30, 20}, {255, 220, 0}, v * 3 - 1);
    return blend({255, 220, 0}, {255, 255, 255}, v * 3 - 2);
}

void overlay_lines(Image& img, const FieldModel& field) {
    const Image lines = plan::render_field(field);
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            if (lines.at(x, y) == plan::kLine) img.set(x, y, plan::kLine);
}

}  // namespace

Entity Entity::parse(std::string_view text) {
    if (text == "ball") return of_ball();
    const auto id = text::parse_int(text);
    if (!id || *id < 0) throw UsageError("entity must be 'ball' or a track id, got '" + std::string(text) + "'");
    return of_track(static_cast<int>(*id));
}

std::string Entity::to_string() const { return ball ? "ball" : std::to_string(track_id); }

std::vector<FieldTrackPoint> entity_points(std::span<const RadarFrame> frames, Entity entity) {
    std::vector<FieldTrackPoint> out;
    for (const auto& f : frames) {
        for (const auto& p : f.points) {
            const bool hit = entity.ball ? p.cls == ObjectClass::Ball
                                         : (p.cls == ObjectClass::Robot && p.track_id == entity.track_id);
            if (hit) out.push_back(p);
        }
    }
    return out;
}

HeatmapGrid histogram(std::span<const FieldTrackPoint> points, const FieldModel& field, double cell_mm) {
    if (!(cell_mm > 0)) throw UsageError("heatmap: cell size must be positive");
    HeatmapGrid g;
    g.cell_mm = cell_mm;
    g.extent = {0, 0, field.length, field.width};
    g.cols = std::max(1, static_cast<int>(std::ceil(field.length / cell_mm - 1e-9)));
    g.rows = std::max(1, static_cast<int>(std::ceil(field.width / cell_mm - 1e-9)));
    g.values.assign(static_cast<std::size_t>(g.rows) * g.cols, 0.0);
    for (const auto& p : points) {
        if (!g.extent.contains(p.position)) continue;
        const int c = std::min(g.cols - 1, static_cast<int>(p.position.x / cell_mm));
        const int r = std::min(g.rows - 1, static_cast<int>(p.position.y / cell_mm));
        g.at(r, c) += 1.0;
        g.points += 1.0;
    }
    return g;
}

void gaussian_blur(HeatmapGrid& grid, double sigma_cells) {
    if (sigma_cells < 0) throw UsageError("heatmap: blur sigma must be >= 0");
    if (sigma_cells == 0) return;
    const int radius = static_cast<int>(std::ceil(3 * sigma_cells));
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0;
    for (int i = -radius; i <= radius; ++i) sum += kernel[i + radius] = std::exp(-0.5 * i * i / (sigma_cells * sigma_cells));
    for (double& k : kernel) k /= sum;

    std::vector<double> tmp(grid.values.size(), 0.0);
    for (int r = 0; r < grid.rows; ++r)
        for (int c = 0; c < grid.cols; ++c) {
            double acc = 0;
            for (int i = -radius; i <= radius; ++i) {
                const int cc = c + i;
                if (cc >= 0 && cc < grid.cols) acc += kernel[i + radius] * grid.at(r, cc);
            }
            tmp[static_cast<std::size_t>(r) * grid.cols + c] = acc;
        }
    for (int r = 0; r < grid.rows; ++r)
        for (int c = 0; c < grid.cols; ++c) {
            double acc = 0;
            for (int i = -radius; i <= radius; ++i) {
                const int rr = r + i;
                if (rr >= 0 && rr < grid.rows) acc += kernel[i + radius] * tmp[static_cast<std::size_t>(rr) * grid.cols + c];
            }
            grid.at(r, c) = acc;
        }
}

HeatmapGrid heatmap(std::span<const RadarFrame> frames, Entity entity, const FieldModel& field,
                    const HeatmapParams& params) {
    const auto points = entity_points(frames, entity);
    if (points.empty()) throw DataError("heatmap: unknown entity " + entity.to_string());
    HeatmapGrid g = histogram(points, field, params.cell_mm);
    gaussian_blur(g, params.blur_sigma_cells);
    const double peak = *std::max_element(g.values.begin(), g.values.end());
    if (peak > 0)
        for (double& v : g.values) v /= peak;
    return g;
}

std::string heatmap_csv(const HeatmapGrid& grid) {
    std::string out;
    for (int r = 0; r < grid.rows; ++r) {
        for (int c = 0; c < grid.cols; ++c) {
            if (c) out += ',';
            out += text::format_fixed(grid.at(r, c), 6);
        }
        out += '\n';
    }
    return out;
}

Image render_heatmap(const HeatmapGrid& grid, const FieldModel& field) {
    Image img = plan::render_field(field);
    const double cell_px = grid.cell_mm * field.model_image_scale;
    for (int y = 0; y < img.height(); ++y) {
        const int r = std::min(grid.rows - 1, static_cast<int>(y / cell_px));
        for (int x = 0; x < img.width(); ++x) {
            const int c = std::min(grid.cols - 1, static_cast<int>(x / cell_px));
            const double v = grid.at(r, c);
            if (v > 0) img.set(x, y, blend(plan::kGrass, heat_color(v), std::min(1.0, 0.25 + v)));
        }
    }
    overlay_lines(img, field);
    return img;
}

std::vector<Polyline> trackmap(std::span<const RadarFrame> frames, Entity entity, int gap_break) {
    const auto points = entity_points(frames, entity);
    if (points.empty()) throw DataError("trackmap: unknown entity " + entity.to_string());
    std::vector<Polyline> out;
    for (const auto& p : points) {
        if (out.empty() || p.frame - out.back().back().frame > gap_break) out.emplace_back();
        out.back().push_back({p.frame, p.position});
    }
    return out;
}

Image render_trackmap(std::span<const Polyline> lines, const FieldModel& field) {
    Image img = plan::render_field(field);
    const Rgb color{255, 210, 40};
    for (const auto& line : lines) {
        for (std::size_t i = 0; i < line.size(); ++i) {
            const Point2 b = plan::to_pixel(field, line[i].position);
            if (i == 0) {
                raster::fill_disc(img, px(b.x), px(b.y), 3, color);
                continue;
            }
            const Point2 a = plan::to_pixel(field, line[i - 1].position);
            raster::draw_line(img, px(a.x), px(a.y), px(b.x), px(b.y), color, 2);
        }
    }
    return img;
}

double PossessionTally::percent(int team) const {
    if (attributed() == 0) return 0.0;
    return 100.0 * (team == 0 ? frames_team0 : frames_team1) / attributed();
}

PossessionTally possession(std::span<const RadarFrame> frames) {
    PossessionTally t;
    constexpr double inf = std::numeric_limits<double>::infinity();
    for (const auto& f : frames) {
        const auto* ball = f.ball();
        if (!ball) continue;
        double best[2] = {inf, inf};
        for (const auto& p : f.points) {
            if (p.cls != ObjectClass::Robot || !p.team || (*p.team != 0 && *p.team != 1)) continue;
            best[*p.team] = std::min(best[*p.team], distance(p.position, ball->position));
        }
        if (best[0] == inf || best[1] == inf)
            ++t.frames_unattributed;
        else if (best[0] < best[1])
            ++t.frames_team0;
        else
            ++t.frames_team1;
    }
    return t;
}

std::vector<MapSegment> pass_shot_map(std::span<const GameEvent> events, const BallTrajectory& ball, int window) {
    std::vector<MapSegment> out;
    auto at = [&](int f) -> std::optional<Point2> {
        if (f < 0 || static_cast<std::size_t>(f) >= ball.size()) return std::nullopt;
        return ball[f];
    };
    for (const auto& e : events) {
        if (e.type == EventType::Fall || e.type == EventType::IllegalDefender) continue;
        const auto a = at(e.frame), b = at(e.frame + window);
        if (!a || !b) continue;
        out.push_back({e.type, e.team, e.frame, *a, *b});
    }
    return out;
}

Image render_pass_shot_map(std::span<const MapSegment> segments, const FieldModel& field) {
    Image img = plan::render_field(field);
    for (const auto& s : segments) {
        Rgb c = plan::team_color(s.team);
        int thickness = 1;
        switch (s.type) {
            case EventType::Pass: break;
            case EventType::Shot: c = blend(c, {255, 255, 255}, 0.5); thickness = 2; break;
            case EventType::ShotOnTarget: c = blend(c, {255, 255, 0}, 0.5); thickness = 2; break;
            case EventType::Goal: c = {255, 230, 0}; thickness = 3; break;
            default: break;
        }
        const Point2 a = plan::to_pixel(field, s.start);
        const Point2 b = plan::to_pixel(field, s.end);
        raster::draw_line(img, px(a.x), px(a.y), px(b.x), px(b.y), c, thickness);
        raster::fill_disc(img, px(b.x), px(b.y), thickness + 1, c);
    }
    return img;
}

Scoreboard scoreboard(std::span<const GameEvent> events, const PossessionTally& tally) {
    Scoreboard b;
    b.possession = tally;
    for (const auto& e : events) {
        TeamStats& s = e.team && (*e.team == 0 || *e.team == 1) ? b.teams[*e.team] : b.unattributed;
        switch (e.type) {
            case EventType::Pass: ++s.passes; break;
            case EventType::Shot: ++s.attempts; break;
            case EventType::ShotOnTarget: ++s.on_target; break;
            case EventType::Goal: ++s.goals; break;
            case EventType::Fall: ++s.falls; break;
            case EventType::IllegalDefender: ++s.illegal_defender; break;
        }
    }
    for (int t = 0; t < 2; ++t) {
        const TeamStats& s = b.teams[t];
        if (s.goals > s.on_target || s.on_target > s.attempts)
            throw DataError("scoreboard: team " + std::to_string(t) + " has " + std::to_string(s.goals) + " goals, " +
                            std::to_string(s.on_target) + " on target, " + std::to_string(s.attempts) +
                            " attempts; events are inconsistent");
        b.teams[t].possession_pct = tally.percent(t);
    }
    return b;
}

nlohmann::json to_json(const Scoreboard& board) {
    auto team = [](const TeamStats& s) {
        return nlohmann::json{{"goals", s.goals},
                              {"attempts", s.attempts},
                              {"attempts_on_target", s.on_target},
                              {"passes", s.passes},
                              {"possession_pct", s.possession_pct},
                              {"illegal_defender", s.illegal_defender},
                              {"falls", s.falls}};
    };
    nlohmann::json unattributed = team(board.unattributed);
    unattributed.erase("possession_pct");
    return {{"teams", {team(board.teams[0]), team(board.teams[1])}},
            {"unattributed", unattributed},
            {"possession_frames",
             {{"team0", board.possession.frames_team0},
              {"team1", board.possession.frames_team1},
              {"unattributed", board.possession.frames_unattributed}}}};
}

std::string scoreboard_text(const Scoreboard& board) {
    char line[128];
    std::string out;
    std::snprintf(line, sizeof line, "%-20s %8s %8s\n", "", "team 0", "team 1");
    out += line;
    auto row = [&](const char* name, int a, int b) {
        std::snprintf(line, sizeof line, "%-20s %8d %8d\n", name, a, b);
        out += line;
    };
    const auto& t0 = board.teams[0];
    const auto& t1 = board.teams[1];
    row("goals", t0.goals, t1.goals);
    std::snprintf(line, sizeof line, "%-20s %7.2f%% %7.2f%%\n", "possession", t0.possession_pct, t1.possession_pct);
    out += line;
    row("total attempts", t0.attempts, t1.attempts);
    row("attempts on target", t0.on_target, t1.on_target);
    row("total passes", t0.passes, t1.passes);
    row("illegal defender", t0.illegal_defender, t1.illegal_defender);
    row("falls", t0.falls, t1.falls);
    return out;
}

}  // namespace fieldtrack
