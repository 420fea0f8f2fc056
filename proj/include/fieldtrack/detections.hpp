#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fieldtrack/field_model.hpp"
#include "fieldtrack/geometry.hpp"
#include "fieldtrack/homography.hpp"
#include "fieldtrack/imbs.hpp"

namespace fieldtrack {

enum class ObjectClass { Robot, Ball, Landmark };
std::string_view to_string(ObjectClass cls);

struct Detection {
    int frame = 0;
    ObjectClass cls = ObjectClass::Robot;
    std::optional<LandmarkId> landmark;  // set iff cls == Landmark
    BBox bbox;
    double confidence = 1.0;
    std::vector<double> embedding;  // empty, or unit-norm with the stream's dimension

    /// `robot`, `ball` or `landmark:<id>`.
    std::string class_label() const;
    friend bool operator==(const Detection&, const Detection&) = default;
};

struct StreamMetadata {
    int image_width = 0;
    int image_height = 0;
    double fps = 0;
    int embedding_dim = 0;
    friend bool operator==(const StreamMetadata&, const StreamMetadata&) = default;
};

/// Detections in non-decreasing frame order.
struct DetectionStream {
    StreamMetadata meta;
    std::vector<Detection> detections;

    /// Highest frame index present, or -1 for an empty stream.
    int last_frame() const { return detections.empty() ? -1 : detections.back().frame; }
    /// Contiguous slice of detections for `frame`.
    std::span<const Detection> frame(int frame) const;

    friend bool operator==(const DetectionStream&, const DetectionStream&) = default;
};

/// Checks box, confidence and embedding invariants plus frame ordering. Throws DataError.
void validate(const DetectionStream& stream);

/// Reads the detection CSV:
///   # schema_version=1 image_width=W image_height=H fps=F embedding_dim=D
///   frame,class,x,y,w,h,conf[,e0..e{D-1}]
/// Errors name the offending line.
DetectionStream parse_detections(std::string_view csv);
DetectionStream load_detections(const std::filesystem::path& path);
/// Canonical form: fixed column order, shortest round-trip number formatting.
std::string write_detections(const DetectionStream& stream);
void save_detections(const std::filesystem::path& path, const DetectionStream& stream);

struct DetectionFilter {
    double min_confidence = 0.0;
    std::optional<double> min_confidence_robot;
    std::optional<double> min_confidence_ball;
    /// Minimum foreground fraction of the box area when masks are supplied.
    double min_foreground_overlap = 0.2;
};

/// Fraction of the box area covered by foreground pixels (pixel centers inside the box).
double foreground_overlap(const BBox& box, const ForegroundMask& mask);

/// Keeps detections passing the confidence gate and, when `masks` is non-empty, the
/// foreground-overlap gate. `masks[f]` is the mask of frame f; landmarks are exempt from
/// mask gating because field lines belong to the background. Throws DataError when masks
/// do not cover every frame or differ from the stream image size.
DetectionStream filter_detections(const DetectionStream& stream, const DetectionFilter& filter,
                                  std::span<const ForegroundMask> masks = {});

/// Landmark detections as homography observations (bbox centroid).
std::vector<LandmarkObservation> landmark_observations(std::span<const Detection> detections);

inline constexpr int kDetectionSchemaVersion = 1;

}  // namespace fieldtrack
