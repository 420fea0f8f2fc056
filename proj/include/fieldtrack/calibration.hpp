#pragma once

#include <array>
#include <span>
#include <vector>

#include "fieldtrack/camera.hpp"
#include "fieldtrack/error.hpp"

namespace fieldtrack {

/// An observed image point and the field-plane point (z = 0) it images.
struct PlanarCorrespondence {
    Point2 image;
    Point2 field;
};

using CalibrationView = std::vector<PlanarCorrespondence>;

struct ViewPose {
    std::array<double, 3> rotation{};
    std::array<double, 3> translation{};
};

struct CalibrationOptions {
    bool fix_k3 = false;
    bool fix_tangential = false;
    /// Forced on for single-view input, where distortion is not separable from the pose.
    bool fix_distortion = false;
    int max_iterations = 200;
};

struct CalibrationResult {
    CameraProfile profile;
    std::vector<ViewPose> poses;
    double rms = 0;
    /// Half sum of squared residuals after initialization and after every accepted step.
    std::vector<double> cost_history;
    int iterations = 0;
};

/// Carries the residual reached when refinement fails.
class CalibrationError : public DataError {
public:
    CalibrationError(const std::string& what, double rms) : DataError(what), rms_(rms) {}
    double rms() const { return rms_; }

private:
    double rms_;
};

/// Planar calibration: per-view homographies give a closed-form intrinsic estimate, then
/// Levenberg-Marquardt refines intrinsics, distortion and per-view poses jointly.
///
/// With a single view the intrinsics are not identifiable from one plane, so the
/// principal point is pinned to the image center, fx = fy, and distortion is held at zero.
/// Each view needs at least 6 correspondences, not all collinear.
CalibrationResult calibrate_planar(std::span<const CalibrationView> views, int image_width, int image_height,
                                   const CalibrationOptions& options = {});

/// Pinhole + lens projection of a field point (z = 0) under `pose`.
Point2 project_field_point(const CameraProfile& profile, const ViewPose& pose, Point2 field);

}  // namespace fieldtrack
