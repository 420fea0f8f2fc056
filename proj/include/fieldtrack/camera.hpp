#pragma once

#include <array>
#include <filesystem>

#include <Eigen/Core>

#include "json.hpp"

#include "fieldtrack/geometry.hpp"
#include "fieldtrack/image.hpp"

namespace fieldtrack {

/// Brown-Conrady radial (k1, k2, k3) and tangential (p1, p2) coefficients.
struct Distortion {
    double k1 = 0, k2 = 0, k3 = 0, p1 = 0, p2 = 0;
    bool is_zero() const { return k1 == 0 && k2 == 0 && k3 == 0 && p1 == 0 && p2 == 0; }
    friend bool operator==(const Distortion&, const Distortion&) = default;
};

struct CameraProfile {
    double fx = 1, fy = 1;  // focal lengths, pixels
    double ox = 0, oy = 0;  // principal point, pixels
    Distortion distortion;
    std::array<double, 3> rotation{};     // axis-angle, radians
    std::array<double, 3> translation{};  // millimeters
    int image_width = 0;
    int image_height = 0;
    /// RMS reprojection error of the calibration that produced this profile, pixels.
    double rms_reprojection_error = 0;

    Eigen::Matrix3d intrinsic_matrix() const;
    /// Throws DataError if focal lengths or principal point are out of range.
    void validate() const;

    friend bool operator==(const CameraProfile&, const CameraProfile&) = default;
};

/// Applies the forward lens model to an ideal (undistorted) pixel.
Point2 distort_point(Point2 undistorted, const CameraProfile& profile);

/// Inverts the lens model by Newton iteration. Exact identity when all coefficients are zero.
/// Throws DataError if the iteration does not reach a residual below 1e-8 normalized units.
Point2 undistort_point(Point2 distorted, const CameraProfile& profile);

/// Resamples `frame` into the ideal pinhole image. Each output pixel is mapped through the
/// forward model and bilinearly sampled; samples falling outside the source are black.
/// `bands` row bands are processed concurrently; output does not depend on `bands`.
Image undistort_image(const Image& frame, const CameraProfile& profile, int bands = 1);

nlohmann::json to_json(const CameraProfile& profile);
CameraProfile camera_profile_from_json(const nlohmann::json& doc);
CameraProfile load_camera_profile(const std::filesystem::path& path);
void save_camera_profile(const std::filesystem::path& path, const CameraProfile& profile);

inline constexpr int kCalibrationSchemaVersion = 1;

}  // namespace fieldtrack
