#pragma once

#include <Eigen/Core>

#include "fieldtrack/geometry.hpp"

namespace fieldtrack {

using KalmanVector = Eigen::Matrix<double, 7, 1>;
using KalmanMatrix = Eigen::Matrix<double, 7, 7>;

struct KalmanParams {
    double process_noise_scale = 1.0;
    double measurement_noise_scale = 1.0;
    /// Measurement noise is inflated by (1 + kappa * (1 - confidence)).
    double confidence_kappa = 1.0;
};

/// Constant-velocity box state [cx, cy, s, r, vcx, vcy, vs]: center (px), area s (px^2),
/// aspect r = w / h held constant, and velocities per frame.
struct KalmanState {
    KalmanVector x = KalmanVector::Zero();
    KalmanMatrix P = KalmanMatrix::Identity();

    static KalmanState from_bbox(const BBox& box);
    BBox bbox() const;
};

/// Transition for a unit frame step.
KalmanMatrix kalman_transition();
KalmanMatrix kalman_process_noise(const KalmanParams& params);

KalmanState kalman_predict(const KalmanState& state, const KalmanParams& params = {});

/// Corrects with a measured box (observes the first four state components).
/// Throws DataError on non-finite or non-positive measurements.
KalmanState kalman_update(const KalmanState& state, const BBox& measurement, const KalmanParams& params = {},
                          double confidence = 1.0);

}  // namespace fieldtrack
