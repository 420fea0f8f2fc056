#include "fieldtrack/kalman.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "fieldtrack/error.hpp"

namespace fieldtrack {

namespace {

using Measurement = Eigen::Matrix<double, 4, 1>;
using ObsMatrix = Eigen::Matrix<double, 4, 7>;

constexpr double kMinScale = 1e-6;
constexpr double kMinAspect = 1e-6;

ObsMatrix observation() {
    ObsMatrix H = ObsMatrix::Zero();
    for (int i = 0; i < 4; ++i) H(i, i) = 1.0;
    return H;
}

Measurement to_measurement(const BBox& b) {
    Measurement z;
    z << b.x + b.w / 2.0, b.y + b.h / 2.0, b.w * b.h, b.w / b.h;
    return z;
}

void symmetrize(KalmanMatrix& P) { P = 0.5 * (P + P.transpose()).eval(); }

}  // namespace

KalmanState KalmanState::from_bbox(const BBox& box) {
    KalmanState s;
    s.x.head<4>() = to_measurement(box);
    s.P = KalmanMatrix::Identity() * 10.0;
    // unobserved velocities start highly uncertain
    s.P(4, 4) = s.P(5, 5) = s.P(6, 6) = 1e4;
    return s;
}

BBox KalmanState::bbox() const {
    const double s = std::max(x(2), kMinScale);
    const double r = std::max(x(3), kMinAspect);
    const double w = std::sqrt(s * r);
    const double h = s / w;
    return {x(0) - w / 2.0, x(1) - h / 2.0, w, h};
}

KalmanMatrix kalman_transition() {
    KalmanMatrix F = KalmanMatrix::Identity();
    F(0, 4) = F(1, 5) = F(2, 6) = 1.0;
    return F;
}

KalmanMatrix kalman_process_noise(const KalmanParams& params) {
    KalmanVector q;
    q << 1, 1, 1, 1, 0.01, 0.01, 1e-4;
    return (q * params.process_noise_scale).asDiagonal();
}

KalmanState kalman_predict(const KalmanState& state, const KalmanParams& params) {
    KalmanState out = state;
    // area may not shrink through zero
    if (out.x(2) + out.x(6) <= 0) out.x(6) = 0.0;
    const KalmanMatrix F = kalman_transition();
    out.x = F * out.x;
    out.P = F * out.P * F.transpose() + kalman_process_noise(params);
    symmetrize(out.P);
    return out;
}

KalmanState kalman_update(const KalmanState& state, const BBox& measurement, const KalmanParams& params,
                          double confidence) {
    const Measurement z = to_measurement(measurement);
    if (!z.allFinite() || !(z(2) > 0) || !(z(3) > 0))
        throw DataError("kalman_update: measurement must be finite with positive size");
    Eigen::Matrix<double, 4, 1> rdiag;
    rdiag << 1, 1, 10, 10;
    const double inflate = 1.0 + params.confidence_kappa * (1.0 - std::clamp(confidence, 0.0, 1.0));
    const Eigen::Matrix4d R = (rdiag * params.measurement_noise_scale * inflate).asDiagonal();
    const ObsMatrix H = observation();

    KalmanState out = state;
    const Measurement innovation = z - H * state.x;
    const Eigen::Matrix4d S = H * state.P * H.transpose() + R;
    const Eigen::Matrix<double, 7, 4> K = state.P * H.transpose() * S.inverse();
    out.x = state.x + K * innovation;
    // Joseph form keeps P symmetric positive semidefinite under rounding
    const KalmanMatrix IKH = KalmanMatrix::Identity() - K * H;
    out.P = IKH * state.P * IKH.transpose() + K * R * K.transpose();
    symmetrize(out.P);
    out.x(2) = std::max(out.x(2), kMinScale);
    out.x(3) = std::max(out.x(3), kMinAspect);
    return out;
}

}  // namespace fieldtrack
