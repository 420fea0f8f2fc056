#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "fieldtrack/calibration.hpp"
#include "fieldtrack/detections.hpp"
#include "fieldtrack/field_model.hpp"
#include "fieldtrack/homography.hpp"
#include "fieldtrack/identity.hpp"
#include "fieldtrack/imbs.hpp"
#include "fieldtrack/localization.hpp"
#include "fieldtrack/rules.hpp"
#include "fieldtrack/statistics.hpp"
#include "fieldtrack/tracker.hpp"

namespace fieldtrack {

namespace fs = std::filesystem;

/// Input and output locations; empty means "not configured".
struct PipelinePaths {
    fs::path frames_dir;
    fs::path detections;
    fs::path gc_log;
    fs::path calibration;
    fs::path calibration_views;
    fs::path homography;
    fs::path field_model;
    fs::path script;
    fs::path output_dir = "out";
};

struct SynthSettings {
    double gc_sigma_mm = 200;
    std::uint64_t gc_seed = 11;
    bool render_frames = false;
    int render_noise = 2;
    std::uint64_t texture_seed = 7;
};

struct PipelineConfig {
    PipelinePaths paths;
    BgParams bgs;
    int workers = 1;
    DetectionFilter filter;
    bool use_masks = false;
    TrackerParams tracker;
    LocalizeOptions localization;
    RuleParams rules;
    IdentityParams identity;
    HeatmapParams heatmap;
    int gap_break = 10;
    AutoHomographyOptions homography;
    CalibrationOptions calibration;
    bool radar_png = true;
    int radar_every = 1;
    SynthSettings synth;

    /// Every parameter block with defaults filled in; recorded in manifests.
    nlohmann::json parameters() const;
};

/// The full configuration document with default values.
nlohmann::json default_config_json();

/// Builds a config from a (partial) document. Unknown keys are a UsageError; relative paths
/// are resolved against `base_dir`.
PipelineConfig config_from_json(const nlohmann::json& doc, const fs::path& base_dir);

/// Applies `dotted.key=value`; the value is read as JSON when it parses, else as a string.
void apply_override(nlohmann::json& doc, std::string_view assignment);

/// Reads the config file (if given), applies overrides in order, then builds the config.
PipelineConfig load_config(const std::optional<fs::path>& file, std::span<const std::string> overrides);

/// `<dir>/%06d.png` or `.ppm`; nullopt when neither exists.
std::optional<fs::path> frame_path(const fs::path& dir, int frame);
/// Frame indices present in a frame directory, ascending.
std::vector<int> list_frames(const fs::path& dir);

FieldModel config_field_model(const PipelineConfig& config);

/// Frame with the most landmark detections (lowest index on ties); nullopt without landmarks.
std::optional<int> best_landmark_frame(const DetectionStream& stream);

struct TrackOptions {
    bool no_gc = false;
    bool literal_counters = false;
};

struct StatsOptions {
    std::optional<std::string> entity;
    bool heatmap = false;
    bool trackmap = false;
    bool literal_counters = false;
};

void cmd_calibrate(const PipelineConfig& config, std::ostream& log);
void cmd_bgsub(const PipelineConfig& config, std::ostream& log);
void cmd_homography(const PipelineConfig& config, std::ostream& log);
void cmd_track(const PipelineConfig& config, const TrackOptions& options, std::ostream& log);
void cmd_stats(const PipelineConfig& config, const StatsOptions& options, std::ostream& log);
/// Renders a scene script into detections, truth, GameController log and optional frames.
void cmd_synth(const PipelineConfig& config, std::ostream& log);

}  // namespace fieldtrack
