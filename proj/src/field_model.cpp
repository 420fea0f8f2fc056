#include "fieldtrack/field_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "fieldtrack/error.hpp"
#include "fieldtrack/text_io.hpp"

namespace fieldtrack {

namespace {

constexpr std::array<std::pair<LandmarkKind, std::string_view>, 5> kKindNames{{
    {LandmarkKind::TJunction, "T_junction"},
    {LandmarkKind::LCorner, "L_corner"},
    {LandmarkKind::PenaltyAreaCorner, "penalty_area_corner"},
    {LandmarkKind::GoalAreaCorner, "goal_area_corner"},
    {LandmarkKind::CenterCircleTangent, "center_circle_tangent"},
}};

double cross(Point2 o, Point2 a, Point2 b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

// Collinearity tolerance relative to the squared field diagonal.
bool collinear(Point2 a, Point2 b, Point2 c, double scale2) { return std::abs(cross(a, b, c)) <= 1e-9 * scale2; }

bool has_general_position_quad(const std::vector<Point2>& pts, double scale2) {
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            for (std::size_t k = j + 1; k < n; ++k) {
                if (collinear(pts[i], pts[j], pts[k], scale2)) continue;
                for (std::size_t l = k + 1; l < n; ++l) {
                    if (!collinear(pts[i], pts[j], pts[l], scale2) && !collinear(pts[i], pts[k], pts[l], scale2) &&
                        !collinear(pts[j], pts[k], pts[l], scale2))
                        return true;
                }
            }
    return false;
}

FieldRect rect_from_json(const nlohmann::json& j, const std::string& what) {
    try {
        return {j.at("x0").get<double>(), j.at("y0").get<double>(), j.at("x1").get<double>(),
                j.at("y1").get<double>()};
    } catch (const nlohmann::json::exception& e) {
        throw DataError("field model: malformed rectangle '" + what + "': " + e.what());
    }
}

nlohmann::json rect_to_json(const FieldRect& r) {
    return {{"x0", r.x0}, {"y0", r.y0}, {"x1", r.x1}, {"y1", r.y1}};
}

void validate(const FieldModel& m) {
    if (!(m.length > 0) || !(m.width > 0)) throw DataError("field model: length and width must be positive");
    if (!(m.model_image_scale > 0)) throw DataError("field model: model_image_scale must be positive");
    if (!(m.center_circle_radius >= 0)) throw DataError("field model: negative center circle radius");
    const FieldRect bounds{0, 0, m.length, m.width};
    for (int s = 0; s < 2; ++s) {
        const auto& pa = m.penalty_area[s];
        if (!(pa.x1 > pa.x0) || !(pa.y1 > pa.y0) || !bounds.contains(pa))
            throw DataError("field model: penalty area outside field bounds or degenerate");
        if (m.goal_area) {
            const auto& ga = (*m.goal_area)[s];
            if (!(ga.x1 > ga.x0) || !(ga.y1 > ga.y0) || !bounds.contains(ga))
                throw DataError("field model: goal area outside field bounds or degenerate");
            if (!pa.contains(ga)) throw DataError("field model: goal area not contained in penalty area");
        }
        const auto& gm = m.goal_mouth[s];
        if (!(gm.y1 > gm.y0) || gm.y0 < 0 || gm.y1 > m.width)
            throw DataError("field model: goal mouth outside field width");
    }
    std::vector<Point2> pts;
    for (const auto& [id, p] : m.landmarks) {
        if (!bounds.contains(p)) throw DataError("field model: landmark " + id.to_string() + " outside field bounds");
        pts.push_back(p);
    }
    const double scale2 = m.length * m.length + m.width * m.width;
    if (pts.size() < 4 || !has_general_position_quad(pts, scale2))
        throw DataError("field model: need at least 4 landmarks with no three collinear");
}

}  // namespace

std::string_view to_string(LandmarkKind kind) {
    for (const auto& [k, name] : kKindNames)
        if (k == kind) return name;
    return "unknown";
}

std::string LandmarkId::to_string() const {
    return std::string(fieldtrack::to_string(kind)) + "." + std::to_string(index);
}

LandmarkId LandmarkId::parse(std::string_view text) {
    const auto dot = text.rfind('.');
    if (dot == std::string_view::npos) throw DataError("malformed landmark id '" + std::string(text) + "'");
    const auto kind_text = text.substr(0, dot);
    const auto index = text::parse_int(text.substr(dot + 1));
    if (!index || *index < 0) throw DataError("malformed landmark index in '" + std::string(text) + "'");
    for (const auto& [k, name] : kKindNames)
        if (name == kind_text) return {k, static_cast<int>(*index)};
    throw DataError("unknown landmark kind '" + std::string(kind_text) + "'");
}

std::string_view to_string(PitchVersion version) {
    switch (version) {
        case PitchVersion::WithGoalAreas: return "with_goal_areas";
        case PitchVersion::WithoutGoalAreas: return "without_goal_areas";
        case PitchVersion::Unknown: break;
    }
    return "unknown";
}

std::string_view to_string(Side side) { return side == Side::Left ? "left" : "right"; }

std::optional<Side> parse_side(std::string_view text) {
    if (text == "left") return Side::Left;
    if (text == "right") return Side::Right;
    return std::nullopt;
}

FieldModel default_field_model(bool with_goal_areas) {
    FieldModel m;
    const double L = m.length, W = m.width;
    const double pa_depth = 1650, pa_width = 4000;
    const double ga_depth = 600, ga_width = 2200;
    const double mouth = 1500;
    const double cy = W / 2;

    m.penalty_area = {FieldRect{0, cy - pa_width / 2, pa_depth, cy + pa_width / 2},
                      FieldRect{L - pa_depth, cy - pa_width / 2, L, cy + pa_width / 2}};
    if (with_goal_areas) {
        m.goal_area = std::array<FieldRect, 2>{FieldRect{0, cy - ga_width / 2, ga_depth, cy + ga_width / 2},
                                               FieldRect{L - ga_depth, cy - ga_width / 2, L, cy + ga_width / 2}};
    }
    m.goal_mouth = {GoalMouth{cy - mouth / 2, cy + mouth / 2}, GoalMouth{cy - mouth / 2, cy + mouth / 2}};

    auto add = [&](LandmarkKind k, int i, double x, double y) { m.landmarks[{k, i}] = {x, y}; };
    using K = LandmarkKind;
    add(K::LCorner, 0, 0, 0);
    add(K::LCorner, 1, 0, W);
    add(K::LCorner, 2, L, 0);
    add(K::LCorner, 3, L, W);
    add(K::TJunction, 0, L / 2, 0);
    add(K::TJunction, 1, L / 2, W);
    const auto& pl = m.penalty_area[0];
    const auto& pr = m.penalty_area[1];
    add(K::TJunction, 2, 0, pl.y0);
    add(K::TJunction, 3, 0, pl.y1);
    add(K::TJunction, 4, L, pr.y0);
    add(K::TJunction, 5, L, pr.y1);
    add(K::PenaltyAreaCorner, 0, pl.x1, pl.y0);
    add(K::PenaltyAreaCorner, 1, pl.x1, pl.y1);
    add(K::PenaltyAreaCorner, 2, pr.x0, pr.y0);
    add(K::PenaltyAreaCorner, 3, pr.x0, pr.y1);
    if (m.goal_area) {
        const auto& gl = (*m.goal_area)[0];
        const auto& gr = (*m.goal_area)[1];
        add(K::TJunction, 6, 0, gl.y0);
        add(K::TJunction, 7, 0, gl.y1);
        add(K::TJunction, 8, L, gr.y0);
        add(K::TJunction, 9, L, gr.y1);
        add(K::GoalAreaCorner, 0, gl.x1, gl.y0);
        add(K::GoalAreaCorner, 1, gl.x1, gl.y1);
        add(K::GoalAreaCorner, 2, gr.x0, gr.y0);
        add(K::GoalAreaCorner, 3, gr.x0, gr.y1);
    }
    add(K::CenterCircleTangent, 0, L / 2, cy - m.center_circle_radius);
    add(K::CenterCircleTangent, 1, L / 2, cy + m.center_circle_radius);
    return m;
}

FieldModel load_field_model(const nlohmann::json& doc) {
    FieldModel m;
    try {
        const int version = doc.at("schema_version").get<int>();
        if (version != kFieldModelSchemaVersion)
            throw DataError("field model: unsupported schema_version " + std::to_string(version));
        m.length = doc.at("length").get<double>();
        m.width = doc.at("width").get<double>();
        m.center_circle_radius = doc.value("center_circle_radius", 750.0);
        m.model_image_scale = doc.value("model_image_scale", 0.1);
        m.penalty_area = {rect_from_json(doc.at("penalty_area").at("left"), "penalty_area.left"),
                          rect_from_json(doc.at("penalty_area").at("right"), "penalty_area.right")};
        if (doc.contains("goal_area") && !doc.at("goal_area").is_null()) {
            m.goal_area = std::array<FieldRect, 2>{rect_from_json(doc.at("goal_area").at("left"), "goal_area.left"),
                                                   rect_from_json(doc.at("goal_area").at("right"), "goal_area.right")};
        }
        for (int s = 0; s < 2; ++s) {
            const auto& gm = doc.at("goal_mouth").at(s == 0 ? "left" : "right");
            m.goal_mouth[s] = {gm.at("y0").get<double>(), gm.at("y1").get<double>()};
        }
        for (const auto& lm : doc.at("landmarks")) {
            const LandmarkId id = LandmarkId::parse(lm.at("id").get<std::string>());
            if (!m.landmarks.emplace(id, Point2{lm.at("x").get<double>(), lm.at("y").get<double>()}).second)
                throw DataError("field model: duplicate landmark " + id.to_string());
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("field model: malformed document: ") + e.what());
    }
    validate(m);
    return m;
}

FieldModel load_field_model_file(const std::filesystem::path& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text::read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError("field model " + path.string() + ": " + e.what());
    }
    return load_field_model(doc);
}

nlohmann::json to_json(const FieldModel& m) {
    nlohmann::json doc;
    doc["schema_version"] = kFieldModelSchemaVersion;
    doc["length"] = m.length;
    doc["width"] = m.width;
    doc["center_circle_radius"] = m.center_circle_radius;
    doc["model_image_scale"] = m.model_image_scale;
    doc["penalty_area"] = {{"left", rect_to_json(m.penalty_area[0])}, {"right", rect_to_json(m.penalty_area[1])}};
    if (m.goal_area)
        doc["goal_area"] = {{"left", rect_to_json((*m.goal_area)[0])}, {"right", rect_to_json((*m.goal_area)[1])}};
    doc["goal_mouth"] = {{"left", {{"y0", m.goal_mouth[0].y0}, {"y1", m.goal_mouth[0].y1}}},
                         {"right", {{"y0", m.goal_mouth[1].y0}, {"y1", m.goal_mouth[1].y1}}}};
    nlohmann::json lms = nlohmann::json::array();
    for (const auto& [id, p] : m.landmarks) lms.push_back({{"id", id.to_string()}, {"x", p.x}, {"y", p.y}});
    doc["landmarks"] = lms;
    return doc;
}

PitchVersion infer_pitch_version(std::span<const LandmarkId> detected) {
    std::set<LandmarkId> goal_area_classes;
    bool penalty_seen = false;
    for (const auto& id : detected) {
        if (id.kind == LandmarkKind::GoalAreaCorner) goal_area_classes.insert(id);
        if (id.kind == LandmarkKind::PenaltyAreaCorner) penalty_seen = true;
    }
    if (goal_area_classes.size() >= 2) return PitchVersion::WithGoalAreas;
    if (penalty_seen && goal_area_classes.empty()) return PitchVersion::WithoutGoalAreas;
    return PitchVersion::Unknown;
}

bool point_in_region(const FieldModel& model, Point2 p, Region region, Side side) {
    const int s = static_cast<int>(side);
    if (region == Region::PenaltyArea) return model.penalty_area[s].contains(p);
    if (!model.goal_area) throw DataError("field model has no goal areas (pitch version without_goal_areas)");
    return (*model.goal_area)[s].contains(p);
}

}  // namespace fieldtrack
