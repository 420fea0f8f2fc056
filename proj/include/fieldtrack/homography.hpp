#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"

#include "fieldtrack/camera.hpp"
#include "fieldtrack/field_model.hpp"
#include "fieldtrack/geometry.hpp"

namespace fieldtrack {

/// Undistorted image point paired with the field-plane point it shows.
struct Correspondence {
    Point2 image;
    Point2 field;
    std::optional<LandmarkId> landmark;
};

enum class HomographySource { Automatic, Manual };
std::string_view to_string(HomographySource source);

/// Image -> field-plane projective map, canonically normalized: unit Frobenius norm and
/// non-negative bottom-right entry. The reprojection error is measured in image pixels by
/// mapping field points back through H^-1.
struct Homography {
    Eigen::Matrix3d H = Eigen::Matrix3d::Identity();
    double rms_reprojection_error = 0;
    HomographySource source = HomographySource::Automatic;
    /// Correspondences the estimate was fitted on (the inlier set).
    std::vector<Correspondence> correspondences;
};

struct RansacOptions {
    bool enabled = true;
    /// RANSAC runs only when more than this many correspondences are given.
    std::size_t min_correspondences_exclusive = 6;
    double threshold_px = 3.0;
    int iterations = 500;
    std::uint64_t seed = 42;
};

Eigen::Matrix3d normalize_homography(const Eigen::Matrix3d& H);

/// Normalized DLT mapping `from` onto `to`. Throws DataError on rank-deficient systems.
Eigen::Matrix3d dlt_homography(std::span<const Point2> from, std::span<const Point2> to);

Homography estimate_homography(std::span<const Correspondence> correspondences,
                               HomographySource source = HomographySource::Automatic,
                               const RansacOptions& ransac = {});

/// RMS image-space distance between each image point and its field point mapped through H^-1.
double reprojection_error(const Eigen::Matrix3d& H, std::span<const Correspondence> correspondences);

/// Throws DataError when the homogeneous coordinate vanishes (|w| < 1e-12).
Point2 project_to_field(Point2 image_point, const Eigen::Matrix3d& H);
Point2 project_to_image(Point2 field_point, const Eigen::Matrix3d& H);

/// A detected landmark: its class and the bbox centroid in the (distorted) frame.
struct LandmarkObservation {
    LandmarkId id;
    Point2 image;
    double confidence = 1.0;
};

struct NeedsManual {
    std::string reason;
    /// The automatic estimate rejected by the gate, when one could be computed.
    std::optional<Homography> rejected;
};

struct AutoHomographyOptions {
    double gate_px = 5.0;
    RansacOptions ransac;
};

/// Matches observations to the field model's landmark table and fits a homography.
/// Observations are undistorted with `profile` when given. Duplicate classes keep the
/// highest-confidence observation.
std::variant<Homography, NeedsManual> auto_homography(std::span<const LandmarkObservation> observations,
                                                      const FieldModel& field,
                                                      const CameraProfile* profile = nullptr,
                                                      const AutoHomographyOptions& options = {});

nlohmann::json to_json(const Homography& h);
Homography homography_from_json(const nlohmann::json& doc);
Homography load_homography(const std::filesystem::path& path);
void save_homography(const std::filesystem::path& path, const Homography& h);

inline constexpr int kHomographySchemaVersion = 1;

}  // namespace fieldtrack
