#include "fieldtrack/calibration.hpp"

#include <cmath>

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "fieldtrack/homography.hpp"
#include "fieldtrack/text_io.hpp"

namespace fieldtrack {

namespace {

// Parameter layout: intrinsics block followed by (rotation, translation) per view.
enum Intrinsic { kFx, kFy, kOx, kOy, kK1, kK2, kP1, kP2, kK3, kIntrinsicCount };
constexpr int kPoseSize = 6;

Eigen::Matrix3d rotation_matrix(const double* rvec) {
    const Eigen::Vector3d r(rvec[0], rvec[1], rvec[2]);
    const double angle = r.norm();
    if (angle < 1e-300) return Eigen::Matrix3d::Identity();
    return Eigen::AngleAxisd(angle, r / angle).toRotationMatrix();
}

std::array<double, 3> rotation_vector(const Eigen::Matrix3d& R) {
    const Eigen::AngleAxisd aa(R);
    const Eigen::Vector3d v = aa.axis() * aa.angle();
    return {v.x(), v.y(), v.z()};
}

Point2 project(const double* intr, const double* pose, Point2 field) {
    const Eigen::Matrix3d R = rotation_matrix(pose);
    const Eigen::Vector3d Xc = R * Eigen::Vector3d(field.x, field.y, 0.0) + Eigen::Vector3d(pose[3], pose[4], pose[5]);
    if (!(Xc.z() > 0)) return {1e9, 1e9};  // behind the camera; huge residual steers LM away
    const double x = Xc.x() / Xc.z(), y = Xc.y() / Xc.z();
    const double r2 = x * x + y * y;
    const double radial = 1.0 + r2 * (intr[kK1] + r2 * (intr[kK2] + r2 * intr[kK3]));
    const double xd = x * radial + 2.0 * intr[kP1] * x * y + intr[kP2] * (r2 + 2.0 * x * x);
    const double yd = y * radial + intr[kP1] * (r2 + 2.0 * y * y) + 2.0 * intr[kP2] * x * y;
    return {intr[kFx] * xd + intr[kOx], intr[kFy] * yd + intr[kOy]};
}

struct Problem {
    std::span<const CalibrationView> views;
    std::vector<bool> free;
    bool tie_focal = false;
    std::size_t residual_count = 0;

    void expand(Eigen::VectorXd& theta) const {
        if (tie_focal) theta[kFy] = theta[kFx];
    }

    Eigen::VectorXd residuals(const Eigen::VectorXd& theta) const {
        Eigen::VectorXd r(static_cast<Eigen::Index>(residual_count));
        Eigen::Index k = 0;
        for (std::size_t v = 0; v < views.size(); ++v) {
            const double* pose = theta.data() + kIntrinsicCount + kPoseSize * v;
            for (const auto& c : views[v]) {
                const Point2 p = project(theta.data(), pose, c.field);
                r[k++] = p.x - c.image.x;
                r[k++] = p.y - c.image.y;
            }
        }
        return r;
    }
};

Eigen::Matrix<double, 6, 1> zhang_row(const Eigen::Matrix3d& H, int i, int j) {
    const Eigen::Vector3d hi = H.col(i), hj = H.col(j);
    Eigen::Matrix<double, 6, 1> v;
    v << hi(0) * hj(0), hi(0) * hj(1) + hi(1) * hj(0), hi(1) * hj(1), hi(2) * hj(0) + hi(0) * hj(2),
        hi(2) * hj(1) + hi(1) * hj(2), hi(2) * hj(2);
    return v;
}

// Focal length of a camera with square pixels and the principal point at the origin of the
// normalized frame, least squares over every view:
//   h1' W h2 = 0,  h1' W h1 - h2' W h2 = 0,  W = diag(1/f^2, 1/f^2, 1).
Eigen::Matrix3d square_pixel_intrinsics(const std::vector<Eigen::Matrix3d>& Hs) {
    double num = 0, denom = 0;
    for (const Eigen::Matrix3d& H : Hs) {
        const double a1 = H(0, 0) * H(0, 1) + H(1, 0) * H(1, 1), b1 = H(2, 0) * H(2, 1);
        const double a2 = H(0, 0) * H(0, 0) + H(1, 0) * H(1, 0) - H(0, 1) * H(0, 1) - H(1, 1) * H(1, 1);
        const double b2 = H(2, 0) * H(2, 0) - H(2, 1) * H(2, 1);
        num -= a1 * b1 + a2 * b2;
        denom += a1 * a1 + a2 * a2;
    }
    const double inv_f2 = denom > 0 ? num / denom : 0.0;
    if (!(inv_f2 > 0) || !std::isfinite(inv_f2))
        throw CalibrationError("calibration: views are degenerate (fronto-parallel or ill-posed)", 0.0);
    const double f = 1.0 / std::sqrt(inv_f2);
    Eigen::Matrix3d K;
    K << f, 0, 0, 0, f, 0, 0, 0, 1;
    return K;
}

// Closed-form intrinsics from plane homographies expressed in normalized pixel coordinates.
// Views that leave the general solution ill-posed fall back to the square-pixel estimate.
Eigen::Matrix3d closed_form_intrinsics(const std::vector<Eigen::Matrix3d>& Hs) {
    if (Hs.size() == 1) return square_pixel_intrinsics(Hs);

    const Eigen::Index rows = static_cast<Eigen::Index>(2 * Hs.size() + (Hs.size() == 2 ? 1 : 0));
    Eigen::MatrixXd V = Eigen::MatrixXd::Zero(std::max<Eigen::Index>(rows, 6), 6);
    Eigen::Index r = 0;
    for (const auto& H : Hs) {
        V.row(r++) = zhang_row(H, 0, 1).transpose();
        V.row(r++) = (zhang_row(H, 0, 0) - zhang_row(H, 1, 1)).transpose();
    }
    if (Hs.size() == 2) V(r++, 1) = 1.0;  // zero skew
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(V, Eigen::ComputeFullV);
    Eigen::VectorXd b = svd.matrixV().col(5);
    if (b(0) < 0) b = -b;
    const double B11 = b(0), B12 = b(1), B22 = b(2), B13 = b(3), B23 = b(4), B33 = b(5);
    const double den = B11 * B22 - B12 * B12;
    if (!(B11 > 0) || !(den > 0)) return square_pixel_intrinsics(Hs);
    const double v0 = (B12 * B13 - B11 * B23) / den;
    const double lambda = B33 - (B13 * B13 + v0 * (B12 * B13 - B11 * B23)) / B11;
    if (!(lambda / B11 > 0)) return square_pixel_intrinsics(Hs);
    const double alpha = std::sqrt(lambda / B11);
    const double beta = std::sqrt(lambda * B11 / den);
    const double gamma = -B12 * alpha * alpha * beta / lambda;
    const double u0 = gamma * v0 / beta - B13 * alpha * alpha / lambda;
    Eigen::Matrix3d K;
    K << alpha, 0, u0, 0, beta, v0, 0, 0, 1;  // skew dropped; refinement assumes none
    return K;
}

void pose_from_homography(const Eigen::Matrix3d& K, const Eigen::Matrix3d& H, double* pose) {
    const Eigen::Matrix3d A = K.inverse() * H;
    double scale = 1.0 / A.col(0).norm();
    if ((scale * A(2, 2)) < 0) scale = -scale;  // plane in front of the camera
    const Eigen::Vector3d r1 = scale * A.col(0);
    const Eigen::Vector3d r2 = scale * A.col(1);
    const Eigen::Vector3d t = scale * A.col(2);
    Eigen::Matrix3d R;
    R.col(0) = r1;
    R.col(1) = r2;
    R.col(2) = r1.cross(r2);
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(R, Eigen::ComputeFullU | Eigen::ComputeFullV);
    R = svd.matrixU() * svd.matrixV().transpose();
    if (R.determinant() < 0) R = -R;
    const auto rv = rotation_vector(R);
    pose[0] = rv[0];
    pose[1] = rv[1];
    pose[2] = rv[2];
    pose[3] = t.x();
    pose[4] = t.y();
    pose[5] = t.z();
}

void check_view(const CalibrationView& view, std::size_t index) {
    if (view.size() < 6)
        throw DataError("calibration: view " + std::to_string(index) + " has " + std::to_string(view.size()) +
                        " correspondences (need at least 6)");
    double span2 = 0;
    for (const auto& c : view)
        span2 = std::max(span2, std::pow(c.field.x - view[0].field.x, 2) + std::pow(c.field.y - view[0].field.y, 2));
    for (std::size_t i = 1; i < view.size(); ++i)
        for (std::size_t j = i + 1; j < view.size(); ++j) {
            const auto& a = view[0].field;
            const auto& b = view[i].field;
            const auto& c = view[j].field;
            if (std::abs((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)) > 1e-9 * span2) return;
        }
    throw DataError("calibration: view " + std::to_string(index) + " has collinear field points");
}

}  // namespace

Point2 project_field_point(const CameraProfile& c, const ViewPose& pose, Point2 field) {
    const double intr[kIntrinsicCount] = {c.fx, c.fy, c.ox, c.oy, c.distortion.k1, c.distortion.k2,
                                          c.distortion.p1, c.distortion.p2, c.distortion.k3};
    const double p[kPoseSize] = {pose.rotation[0], pose.rotation[1], pose.rotation[2],
                                 pose.translation[0], pose.translation[1], pose.translation[2]};
    return project(intr, p, field);
}

CalibrationResult calibrate_planar(std::span<const CalibrationView> views, int image_width, int image_height,
                                   const CalibrationOptions& options) {
    if (views.empty()) throw DataError("calibration: no views");
    if (image_width <= 0 || image_height <= 0) throw UsageError("calibration: image size must be positive");
    for (std::size_t v = 0; v < views.size(); ++v) check_view(views[v], v);

    // Condition the closed-form step with a pixel normalization N.
    const double s = 0.5 * (image_width + image_height);
    Eigen::Matrix3d N;
    N << 1 / s, 0, -0.5 * image_width / s, 0, 1 / s, -0.5 * image_height / s, 0, 0, 1;

    std::vector<Eigen::Matrix3d> H_pixel, H_norm;
    for (const auto& view : views) {
        std::vector<Point2> field, image;
        for (const auto& c : view) {
            field.push_back(c.field);
            image.push_back(c.image);
        }
        const Eigen::Matrix3d H = dlt_homography(field, image);
        H_pixel.push_back(H);
        Eigen::Matrix3d Hn = N * H;
        H_norm.push_back(Hn / Hn.norm());
    }
    const Eigen::Matrix3d K = N.inverse() * closed_form_intrinsics(H_norm);

    const bool single_view = views.size() == 1;
    const std::size_t nparams = kIntrinsicCount + kPoseSize * views.size();
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nparams));
    theta[kFx] = K(0, 0);
    theta[kFy] = K(1, 1);
    theta[kOx] = K(0, 2);
    theta[kOy] = K(1, 2);
    for (std::size_t v = 0; v < views.size(); ++v)
        pose_from_homography(K, H_pixel[v], theta.data() + kIntrinsicCount + kPoseSize * v);

    Problem problem;
    problem.views = views;
    problem.tie_focal = single_view;
    problem.free.assign(nparams, true);
    for (const auto& view : views) problem.residual_count += 2 * view.size();
    if (single_view) {
        problem.free[kFy] = problem.free[kOx] = problem.free[kOy] = false;
    }
    if (single_view || options.fix_distortion)
        for (int i : {kK1, kK2, kP1, kP2, kK3}) problem.free[i] = false;
    if (options.fix_k3) problem.free[kK3] = false;
    if (options.fix_tangential) problem.free[kP1] = problem.free[kP2] = false;

    std::vector<Eigen::Index> free_idx;
    for (std::size_t i = 0; i < nparams; ++i)
        if (problem.free[i]) free_idx.push_back(static_cast<Eigen::Index>(i));
    const Eigen::Index nf = static_cast<Eigen::Index>(free_idx.size());
    if (problem.residual_count < free_idx.size())
        throw DataError("calibration: fewer residuals than free parameters");

    CalibrationResult result;
    problem.expand(theta);
    Eigen::VectorXd r = problem.residuals(theta);
    double cost = 0.5 * r.squaredNorm();
    result.cost_history.push_back(cost);

    auto jacobian = [&](const Eigen::VectorXd& at) {
        Eigen::MatrixXd J(r.size(), nf);
        for (Eigen::Index k = 0; k < nf; ++k) {
            const Eigen::Index i = free_idx[k];
            const double h = 1e-6 * std::max(std::abs(at[i]), 1.0);
            Eigen::VectorXd plus = at, minus = at;
            plus[i] += h;
            minus[i] -= h;
            problem.expand(plus);
            problem.expand(minus);
            J.col(k) = (problem.residuals(plus) - problem.residuals(minus)) / (2 * h);
        }
        return J;
    };

    double mu = -1;
    int it = 0;
    for (; it < options.max_iterations; ++it) {
        if (cost < 1e-26) break;
        const Eigen::MatrixXd J = jacobian(theta);
        const Eigen::MatrixXd A = J.transpose() * J;
        const Eigen::VectorXd g = J.transpose() * r;
        if (g.lpNorm<Eigen::Infinity>() < 1e-18) break;
        Eigen::VectorXd diag = A.diagonal();
        const double dmax = diag.maxCoeff();
        for (Eigen::Index k = 0; k < nf; ++k) diag[k] = std::max(diag[k], 1e-12 * dmax);
        if (mu < 0) mu = 1e-3;

        bool accepted = false;
        double decrease = 0;
        while (mu < 1e20) {
            Eigen::MatrixXd M = A;
            M.diagonal() += mu * diag;
            const Eigen::VectorXd delta = M.ldlt().solve(-g);
            Eigen::VectorXd candidate = theta;
            for (Eigen::Index k = 0; k < nf; ++k) candidate[free_idx[k]] += delta[k];
            problem.expand(candidate);
            const Eigen::VectorXd rc = problem.residuals(candidate);
            const double cc = 0.5 * rc.squaredNorm();
            if (std::isfinite(cc) && cc < cost) {
                decrease = cost - cc;
                theta = candidate;
                r = rc;
                cost = cc;
                result.cost_history.push_back(cost);
                mu = std::max(mu / 3.0, 1e-15);
                accepted = true;
                break;
            }
            mu *= 4.0;
        }
        if (!accepted) break;
        if (decrease <= 1e-15 * (cost + decrease)) break;
    }
    result.iterations = it;

    const double rms = std::sqrt(2.0 * cost / static_cast<double>(problem.residual_count / 2));
    if (!theta.allFinite() || !std::isfinite(rms))
        throw CalibrationError("calibration: refinement diverged (non-finite parameters)", rms);

    CameraProfile& p = result.profile;
    p.fx = theta[kFx];
    p.fy = theta[kFy];
    p.ox = theta[kOx];
    p.oy = theta[kOy];
    p.distortion = {theta[kK1], theta[kK2], theta[kK3], theta[kP1], theta[kP2]};
    p.image_width = image_width;
    p.image_height = image_height;
    p.rms_reprojection_error = rms;
    for (std::size_t v = 0; v < views.size(); ++v) {
        const double* pose = theta.data() + kIntrinsicCount + kPoseSize * v;
        result.poses.push_back({{pose[0], pose[1], pose[2]}, {pose[3], pose[4], pose[5]}});
    }
    p.rotation = result.poses.front().rotation;
    p.translation = result.poses.front().translation;
    result.rms = rms;
    try {
        p.validate();
    } catch (const DataError& e) {
        throw CalibrationError(std::string("calibration: refinement diverged: ") + e.what() + " (rms " +
                                   text::format_fixed(rms, 4) + " px)",
                               rms);
    }
    return result;
}

}  // namespace fieldtrack
