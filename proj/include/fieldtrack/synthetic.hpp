#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"

#include "fieldtrack/detections.hpp"
#include "fieldtrack/field_model.hpp"
#include "fieldtrack/identity.hpp"
#include "fieldtrack/image.hpp"

namespace fieldtrack {

using FrameRange = std::pair<int, int>;  // inclusive

struct Waypoint {
    int frame = 0;
    Point2 position;
};

/// One scripted object. `position` is the ground anchor: bottom-center of an upright robot,
/// box center of a fallen robot or the ball; pixels in image-space scripts, millimeters in
/// field-space scripts.
struct ScriptObject {
    int id = 0;
    ObjectClass cls = ObjectClass::Robot;
    double width_px = 20;
    double height_px = 40;
    /// Linear interpolation between waypoints, held constant outside them. When empty,
    /// the object starts at `start` and moves by `velocity` per frame, reflecting off `bounds`.
    std::vector<Waypoint> waypoints;
    Point2 start;
    Point2 velocity;
    std::optional<FieldRect> bounds;
    std::vector<FrameRange> hidden;
    std::vector<FrameRange> fallen;
    std::optional<int> team;
    std::optional<int> jersey;
    Rgb color{200, 200, 200};
    /// Identity feature; drawn at random when empty and the stream carries embeddings.
    std::vector<double> embedding;
};

struct NoiseSpec {
    double dropout = 0;
    double jitter_px = 0;
    int embedding_dim = 0;
    double embedding_noise = 0;
    double confidence = 0.9;
};

struct SceneScript {
    int frames = 100;
    int image_width = 640;
    int image_height = 480;
    double fps = 25;
    std::uint64_t seed = 1;
    bool field_space = false;
    Eigen::Matrix3d field_to_image = Eigen::Matrix3d::Identity();
    FieldModel field = default_field_model();
    NoiseSpec noise;
    /// Frames at which every field landmark inside the image is emitted as a detection.
    std::vector<int> landmark_frames;
    std::vector<ScriptObject> objects;
};

struct TruthBox {
    int frame = 0;
    int object_id = 0;
    ObjectClass cls = ObjectClass::Robot;
    BBox bbox;
    bool visible = true;
    bool fallen = false;
    Point2 position;  // script units
    friend bool operator==(const TruthBox&, const TruthBox&) = default;
};

struct SyntheticScene {
    DetectionStream stream;
    std::vector<TruthBox> truth;  // frame-major, script order within a frame

    /// Truth boxes of one frame.
    std::vector<TruthBox> at(int frame) const;
};

/// Anchor position of every object at every frame (frame-major). Throws DataError on duplicate ids.
std::vector<std::vector<Point2>> script_positions(const SceneScript& script);

/// Deterministic in `script.seed`. Box coordinates are quantized to 1e-3 px.
SyntheticScene synthesize_scene(const SceneScript& script);

SceneScript scene_script_from_json(const nlohmann::json& doc);
SceneScript load_scene_script(const std::filesystem::path& path);
nlohmann::json to_json(const SceneScript& script);

struct FlickerRegion {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // half-open pixel rectangle
    Rgb a{90, 90, 200};
    Rgb b{200, 200, 90};
    /// Which color a frame shows.
    bool shows_b(int frame) const;
};

struct RenderSpec {
    int width = 320;
    int height = 240;
    std::uint64_t texture_seed = 7;
    /// Per-pixel, per-frame sensor noise amplitude (uniform integer in [-noise, noise]).
    int noise = 2;
    std::optional<FlickerRegion> flicker;
};

/// Static textured background, no noise.
Image render_background(const RenderSpec& spec);

struct RenderedFrame {
    Image image;
    ForegroundMask truth;
};

/// Background plus flicker plus visible truth boxes as filled rectangles in their object color.
RenderedFrame render_frame(const Image& background, const RenderSpec& spec, int frame,
                           std::span<const TruthBox> boxes, std::span<const ScriptObject> objects);

/// GameController log for the robots with team and jersey: truth field position plus
/// isotropic Gaussian noise, one record per robot per frame (hidden robots included).
/// Positions are quantized to 1e-3 mm.
std::vector<GcRecord> synthesize_gc(const SceneScript& script, double sigma_mm, std::uint64_t seed);

}  // namespace fieldtrack
