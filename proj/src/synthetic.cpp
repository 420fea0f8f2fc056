#include "fieldtrack/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "fieldtrack/error.hpp"
#include "fieldtrack/raster.hpp"
#include "fieldtrack/rng.hpp"
#include "fieldtrack/text_io.hpp"

namespace fieldtrack {

namespace {

using nlohmann::json;

double quantize(double v) { return std::round(v * 1000.0) / 1000.0; }

bool in_ranges(const std::vector<FrameRange>& ranges, int frame) {
    return std::any_of(ranges.begin(), ranges.end(),
                       [frame](const FrameRange& r) { return frame >= r.first && frame <= r.second; });
}

Point2 apply(const Eigen::Matrix3d& H, Point2 p) {
    const Eigen::Vector3d q = H * Eigen::Vector3d(p.x, p.y, 1.0);
    return {q.x() / q.z(), q.y() / q.z()};
}

BBox box_at(const ScriptObject& o, Point2 anchor, bool fallen) {
    if (o.cls == ObjectClass::Robot && !fallen)
        return {anchor.x - o.width_px / 2.0, anchor.y - o.height_px, o.width_px, o.height_px};
    const double w = fallen ? o.height_px : o.width_px;
    const double h = fallen ? o.width_px : o.height_px;
    return {anchor.x - w / 2.0, anchor.y - h / 2.0, w, h};
}

std::vector<double> normalized(std::vector<double> v) {
    double n2 = 0;
    for (double x : v) n2 += x * x;
    const double n = std::sqrt(n2);
    if (!(n > 0)) throw DataError("synthetic: zero embedding");
    for (double& x : v) x /= n;
    return v;
}

std::vector<double> random_unit(Rng& rng, int dim) {
    std::vector<double> v(dim);
    for (double& x : v) x = rng.normal();
    return normalized(std::move(v));
}

// Hash-based per-pixel noise so rendering needs no sequential RNG state.
std::uint64_t mix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint8_t clamp_u8(int v) { return static_cast<std::uint8_t>(std::clamp(v, 0, 255)); }

json point_json(Point2 p) { return json::array({p.x, p.y}); }

Point2 point_from(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 2) throw DataError(std::string("script: ") + what + " must be [x, y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<FrameRange> ranges_from(const json& j) {
    std::vector<FrameRange> out;
    for (const auto& r : j) {
        if (!r.is_array() || r.size() != 2) throw DataError("script: frame ranges must be [first, last]");
        out.emplace_back(r[0].get<int>(), r[1].get<int>());
    }
    return out;
}

ObjectClass class_from(const std::string& s) {
    if (s == "robot") return ObjectClass::Robot;
    if (s == "ball") return ObjectClass::Ball;
    throw DataError("script: object class must be robot or ball, got '" + s + "'");
}

}  // namespace

std::vector<TruthBox> SyntheticScene::at(int frame) const {
    std::vector<TruthBox> out;
    for (const auto& t : truth)
        if (t.frame == frame) out.push_back(t);
    return out;
}

std::vector<std::vector<Point2>> script_positions(const SceneScript& script) {
    std::set<int> ids;
    for (const auto& o : script.objects)
        if (!ids.insert(o.id).second) throw DataError("synthetic: duplicate object id " + std::to_string(o.id));

    std::vector<std::vector<Point2>> pos(script.frames, std::vector<Point2>(script.objects.size()));
    for (std::size_t k = 0; k < script.objects.size(); ++k) {
        const auto& o = script.objects[k];
        if (!o.waypoints.empty()) {
            auto wp = o.waypoints;
            std::stable_sort(wp.begin(), wp.end(), [](const Waypoint& a, const Waypoint& b) { return a.frame < b.frame; });
            for (int f = 0; f < script.frames; ++f) {
                Point2 p;
                if (f <= wp.front().frame) {
                    p = wp.front().position;
                } else if (f >= wp.back().frame) {
                    p = wp.back().position;
                } else {
                    std::size_t i = 1;
                    while (wp[i].frame < f) ++i;
                    const auto& a = wp[i - 1];
                    const auto& b = wp[i];
                    const double t = static_cast<double>(f - a.frame) / (b.frame - a.frame);
                    p = {a.position.x + t * (b.position.x - a.position.x), a.position.y + t * (b.position.y - a.position.y)};
                }
                pos[f][k] = p;
            }
            continue;
        }
        Point2 p = o.start;
        Point2 v = o.velocity;
        for (int f = 0; f < script.frames; ++f) {
            pos[f][k] = p;
            p.x += v.x;
            p.y += v.y;
            if (o.bounds) {
                const auto& b = *o.bounds;
                if (p.x < b.x0) { p.x = 2 * b.x0 - p.x; v.x = -v.x; }
                if (p.x > b.x1) { p.x = 2 * b.x1 - p.x; v.x = -v.x; }
                if (p.y < b.y0) { p.y = 2 * b.y0 - p.y; v.y = -v.y; }
                if (p.y > b.y1) { p.y = 2 * b.y1 - p.y; v.y = -v.y; }
            }
        }
    }
    return pos;
}

SyntheticScene synthesize_scene(const SceneScript& script) {
    if (script.frames < 0 || script.image_width <= 0 || script.image_height <= 0)
        throw DataError("synthetic: frames >= 0 and a positive image size required");
    const auto positions = script_positions(script);
    const int dim = script.noise.embedding_dim;
    Rng rng(script.seed);

    std::vector<std::vector<double>> identity_features(script.objects.size());
    if (dim > 0) {
        for (std::size_t k = 0; k < script.objects.size(); ++k) {
            const auto& o = script.objects[k];
            if (!o.embedding.empty()) {
                if (static_cast<int>(o.embedding.size()) != dim)
                    throw DataError("synthetic: object " + std::to_string(o.id) + " embedding dimension mismatch");
                identity_features[k] = normalized(o.embedding);
            } else {
                identity_features[k] = random_unit(rng, dim);
            }
        }
    }
    std::vector<double> landmark_feature;
    if (dim > 0) {
        landmark_feature.assign(dim, 0.0);
        landmark_feature[0] = 1.0;
    }
    const std::set<int> landmark_frames(script.landmark_frames.begin(), script.landmark_frames.end());

    SyntheticScene scene;
    scene.stream.meta = {script.image_width, script.image_height, script.fps, dim};
    const BBox image_box{0, 0, static_cast<double>(script.image_width), static_cast<double>(script.image_height)};

    for (int f = 0; f < script.frames; ++f) {
        if (script.field_space && landmark_frames.count(f)) {
            for (const auto& [id, p] : script.field.landmarks) {
                const Point2 q = apply(script.field_to_image, p);
                if (q.x < 0 || q.y < 0 || q.x >= script.image_width || q.y >= script.image_height) continue;
                Detection d;
                d.frame = f;
                d.cls = ObjectClass::Landmark;
                d.landmark = id;
                d.bbox = {quantize(q.x - 4), quantize(q.y - 4), 8, 8};
                d.confidence = 1.0;
                d.embedding = landmark_feature;
                scene.stream.detections.push_back(std::move(d));
            }
        }
        for (std::size_t k = 0; k < script.objects.size(); ++k) {
            const auto& o = script.objects[k];
            const Point2 pos = positions[f][k];
            const Point2 anchor = script.field_space ? apply(script.field_to_image, pos) : pos;
            const bool fallen = o.cls == ObjectClass::Robot && in_ranges(o.fallen, f);
            const BBox box = box_at(o, anchor, fallen);

            TruthBox t;
            t.frame = f;
            t.object_id = o.id;
            t.cls = o.cls;
            t.bbox = box;
            t.fallen = fallen;
            t.position = pos;
            t.visible = !in_ranges(o.hidden, f) && iou(box, image_box) > 0;
            scene.truth.push_back(t);

            // fixed draw count per object and frame keeps the sequence aligned across outcomes
            const bool dropped = rng.uniform() < script.noise.dropout;
            const double jx = rng.normal() * script.noise.jitter_px;
            const double jy = rng.normal() * script.noise.jitter_px;
            std::vector<double> feature;
            if (dim > 0) {
                feature = identity_features[k];
                for (double& v : feature) v += rng.normal() * script.noise.embedding_noise;
                feature = normalized(std::move(feature));
            }
            if (!t.visible || dropped) continue;
            Detection d;
            d.frame = f;
            d.cls = o.cls;
            d.bbox = {quantize(box.x + jx), quantize(box.y + jy), quantize(box.w), quantize(box.h)};
            d.confidence = script.noise.confidence;
            d.embedding = std::move(feature);
            scene.stream.detections.push_back(std::move(d));
        }
    }
    validate(scene.stream);
    return scene;
}

SceneScript scene_script_from_json(const json& doc) {
    try {
        if (doc.value("schema_version", 0) != 1) throw DataError("script: schema_version must be 1");
        SceneScript s;
        s.frames = doc.at("frames").get<int>();
        s.image_width = doc.at("image_width").get<int>();
        s.image_height = doc.at("image_height").get<int>();
        s.fps = doc.value("fps", 25.0);
        s.seed = doc.value("seed", std::uint64_t{1});
        const std::string space = doc.value("space", std::string("image"));
        if (space != "image" && space != "field") throw DataError("script: space must be image or field");
        s.field_space = space == "field";
        if (s.field_space) {
            const auto& h = doc.at("field_to_image");
            if (!h.is_array() || h.size() != 9) throw DataError("script: field_to_image must hold 9 numbers");
            for (int i = 0; i < 9; ++i) s.field_to_image(i / 3, i % 3) = h[i].get<double>();
        }
        if (doc.contains("field")) s.field = load_field_model(doc.at("field"));
        if (doc.contains("noise")) {
            const auto& n = doc.at("noise");
            s.noise.dropout = n.value("dropout", 0.0);
            s.noise.jitter_px = n.value("jitter_px", 0.0);
            s.noise.embedding_dim = n.value("embedding_dim", 0);
            s.noise.embedding_noise = n.value("embedding_noise", 0.0);
            s.noise.confidence = n.value("confidence", 0.9);
        }
        s.landmark_frames = doc.value("landmark_frames", std::vector<int>{});
        for (const auto& jo : doc.at("objects")) {
            ScriptObject o;
            o.id = jo.at("id").get<int>();
            o.cls = class_from(jo.value("class", std::string("robot")));
            const auto size = jo.value("size", std::vector<double>{20.0, 40.0});
            if (size.size() != 2) throw DataError("script: size must be [w, h]");
            o.width_px = size[0];
            o.height_px = size[1];
            if (jo.contains("waypoints"))
                for (const auto& w : jo.at("waypoints"))
                    o.waypoints.push_back({w.at(0).get<int>(), {w.at(1).get<double>(), w.at(2).get<double>()}});
            if (jo.contains("start")) o.start = point_from(jo.at("start"), "start");
            if (jo.contains("velocity")) o.velocity = point_from(jo.at("velocity"), "velocity");
            if (jo.contains("bounds")) {
                const auto b = jo.at("bounds").get<std::vector<double>>();
                if (b.size() != 4) throw DataError("script: bounds must be [x0, y0, x1, y1]");
                o.bounds = FieldRect{b[0], b[1], b[2], b[3]};
            }
            if (jo.contains("hidden")) o.hidden = ranges_from(jo.at("hidden"));
            if (jo.contains("fallen")) o.fallen = ranges_from(jo.at("fallen"));
            if (jo.contains("team")) o.team = jo.at("team").get<int>();
            if (jo.contains("jersey")) o.jersey = jo.at("jersey").get<int>();
            if (jo.contains("color")) {
                const auto c = jo.at("color").get<std::vector<int>>();
                if (c.size() != 3) throw DataError("script: color must be [r, g, b]");
                o.color = {clamp_u8(c[0]), clamp_u8(c[1]), clamp_u8(c[2])};
            }
            if (jo.contains("embedding")) o.embedding = jo.at("embedding").get<std::vector<double>>();
            if (!(o.width_px > 0) || !(o.height_px > 0)) throw DataError("script: object size must be positive");
            s.objects.push_back(std::move(o));
        }
        return s;
    } catch (const json::exception& e) {
        throw DataError(std::string("script: ") + e.what());
    }
}

SceneScript load_scene_script(const std::filesystem::path& path) {
    try {
        return scene_script_from_json(json::parse(text::read_file(path)));
    } catch (const json::parse_error& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

json to_json(const SceneScript& s) {
    json doc = {{"schema_version", 1},
                {"frames", s.frames},
                {"image_width", s.image_width},
                {"image_height", s.image_height},
                {"fps", s.fps},
                {"seed", s.seed},
                {"space", s.field_space ? "field" : "image"},
                {"noise",
                 {{"dropout", s.noise.dropout},
                  {"jitter_px", s.noise.jitter_px},
                  {"embedding_dim", s.noise.embedding_dim},
                  {"embedding_noise", s.noise.embedding_noise},
                  {"confidence", s.noise.confidence}}},
                {"landmark_frames", s.landmark_frames},
                {"field", to_json(s.field)}};
    if (s.field_space) {
        json h = json::array();
        for (int i = 0; i < 9; ++i) h.push_back(s.field_to_image(i / 3, i % 3));
        doc["field_to_image"] = h;
    }
    json objects = json::array();
    for (const auto& o : s.objects) {
        json jo = {{"id", o.id},
                   {"class", std::string(to_string(o.cls))},
                   {"size", {o.width_px, o.height_px}},
                   {"color", {o.color.r, o.color.g, o.color.b}}};
        if (!o.waypoints.empty()) {
            json w = json::array();
            for (const auto& p : o.waypoints) w.push_back({p.frame, p.position.x, p.position.y});
            jo["waypoints"] = w;
        } else {
            jo["start"] = point_json(o.start);
            jo["velocity"] = point_json(o.velocity);
        }
        if (o.bounds) jo["bounds"] = {o.bounds->x0, o.bounds->y0, o.bounds->x1, o.bounds->y1};
        auto ranges = [](const std::vector<FrameRange>& r) {
            json a = json::array();
            for (const auto& [x, y] : r) a.push_back({x, y});
            return a;
        };
        if (!o.hidden.empty()) jo["hidden"] = ranges(o.hidden);
        if (!o.fallen.empty()) jo["fallen"] = ranges(o.fallen);
        if (o.team) jo["team"] = *o.team;
        if (o.jersey) jo["jersey"] = *o.jersey;
        if (!o.embedding.empty()) jo["embedding"] = o.embedding;
        objects.push_back(jo);
    }
    doc["objects"] = objects;
    return doc;
}

bool FlickerRegion::shows_b(int frame) const { return (mix(0xF11C4E5ull ^ static_cast<std::uint64_t>(frame)) & 1u) != 0; }

Image render_background(const RenderSpec& spec) {
    Image img(spec.width, spec.height);
    for (int y = 0; y < spec.height; ++y) {
        for (int x = 0; x < spec.width; ++x) {
            // 8-px tiles of varying green plus a gentle gradient
            const std::uint64_t h = mix(spec.texture_seed * 0x100000001B3ull ^ ((x / 8) * 7919u + (y / 8) * 104729u));
            const int base = static_cast<int>(h % 60);
            img.set(x, y,
                    {clamp_u8(30 + base / 2 + x * 40 / std::max(1, spec.width)), clamp_u8(90 + base),
                     clamp_u8(40 + base / 3 + y * 30 / std::max(1, spec.height))});
        }
    }
    return img;
}

RenderedFrame render_frame(const Image& background, const RenderSpec& spec, int frame,
                           std::span<const TruthBox> boxes, std::span<const ScriptObject> objects) {
    RenderedFrame out{background, ForegroundMask(background.width(), background.height(), 0)};
    if (spec.flicker) {
        const auto& fl = *spec.flicker;
        raster::fill_rect(out.image, fl.x0, fl.y0, fl.x1 - 1, fl.y1 - 1, fl.shows_b(frame) ? fl.b : fl.a);
    }
    for (const auto& t : boxes) {
        if (!t.visible || t.frame != frame) continue;
        Rgb color{200, 200, 200};
        for (const auto& o : objects)
            if (o.id == t.object_id) color = o.color;
        // pixel (x, y) is covered when its center lies inside the box
        const int x0 = std::max(0, static_cast<int>(std::ceil(t.bbox.x - 0.5)));
        const int y0 = std::max(0, static_cast<int>(std::ceil(t.bbox.y - 0.5)));
        const int x1 = std::min(out.image.width() - 1, static_cast<int>(std::ceil(t.bbox.x + t.bbox.w - 0.5)) - 1);
        const int y1 = std::min(out.image.height() - 1, static_cast<int>(std::ceil(t.bbox.y + t.bbox.h - 0.5)) - 1);
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) {
                out.image.set(x, y, color);
                out.truth.at(x, y) = 255;
            }
    }
    if (spec.noise > 0) {
        const int span = 2 * spec.noise + 1;
        auto& bytes = out.image.bytes();
        const std::uint64_t fseed = mix(spec.texture_seed ^ (static_cast<std::uint64_t>(frame) << 20));
        for (std::size_t i = 0; i < bytes.size(); ++i) {
            const int delta = static_cast<int>(mix(fseed + i) % span) - spec.noise;
            bytes[i] = clamp_u8(bytes[i] + delta);
        }
    }
    return out;
}

std::vector<GcRecord> synthesize_gc(const SceneScript& script, double sigma_mm, std::uint64_t seed) {
    const auto positions = script_positions(script);
    Rng rng(seed);
    std::vector<GcRecord> out;
    for (int f = 0; f < script.frames; ++f) {
        for (std::size_t k = 0; k < script.objects.size(); ++k) {
            const auto& o = script.objects[k];
            if (o.cls != ObjectClass::Robot || !o.team || !o.jersey) continue;
            const double nx = rng.normal() * sigma_mm;
            const double ny = rng.normal() * sigma_mm;
            GcRecord r;
            r.frame = f;
            r.team = *o.team;
            r.jersey = *o.jersey;
            r.position = {quantize(positions[f][k].x + nx), quantize(positions[f][k].y + ny)};
            r.flags.fallen = in_ranges(o.fallen, f);
            out.push_back(r);
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const GcRecord& a, const GcRecord& b) { return a.frame < b.frame; });
    return out;
}

}  // namespace fieldtrack
