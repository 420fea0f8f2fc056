#include "fieldtrack/camera.hpp"

#include <cmath>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "fieldtrack/error.hpp"
#include "fieldtrack/text_io.hpp"

namespace fieldtrack {

namespace {

struct Normalized {
    double x, y;
};

Normalized apply_lens(double x, double y, const Distortion& d) {
    const double r2 = x * x + y * y;
    const double radial = 1.0 + r2 * (d.k1 + r2 * (d.k2 + r2 * d.k3));
    return {x * radial + 2.0 * d.p1 * x * y + d.p2 * (r2 + 2.0 * x * x),
            y * radial + d.p1 * (r2 + 2.0 * y * y) + 2.0 * d.p2 * x * y};
}

constexpr int kMaxNewtonIterations = 50;
constexpr double kUndistortTolerance = 1e-8;

}  // namespace

Eigen::Matrix3d CameraProfile::intrinsic_matrix() const {
    Eigen::Matrix3d K;
    K << fx, 0, ox, 0, fy, oy, 0, 0, 1;
    return K;
}

void CameraProfile::validate() const {
    if (!(fx > 0) || !(fy > 0)) throw DataError("camera profile: focal lengths must be positive");
    if (image_width <= 0 || image_height <= 0) throw DataError("camera profile: image size must be positive");
    if (!(ox >= 0 && ox < image_width && oy >= 0 && oy < image_height))
        throw DataError("camera profile: principal point outside the image");
}

Point2 distort_point(Point2 p, const CameraProfile& c) {
    if (c.distortion.is_zero()) return p;
    const double x = (p.x - c.ox) / c.fx;
    const double y = (p.y - c.oy) / c.fy;
    const auto d = apply_lens(x, y, c.distortion);
    return {d.x * c.fx + c.ox, d.y * c.fy + c.oy};
}

Point2 undistort_point(Point2 p, const CameraProfile& c) {
    if (c.distortion.is_zero()) return p;
    const auto& d = c.distortion;
    const double xd = (p.x - c.ox) / c.fx;
    const double yd = (p.y - c.oy) / c.fy;
    double x = xd, y = yd;
    double residual = 0;
    for (int it = 0; it < kMaxNewtonIterations; ++it) {
        const auto f = apply_lens(x, y, d);
        const double ex = f.x - xd, ey = f.y - yd;
        residual = std::hypot(ex, ey);
        if (residual < 1e-15) break;
        const double r2 = x * x + y * y;
        const double radial = 1.0 + r2 * (d.k1 + r2 * (d.k2 + r2 * d.k3));
        const double dradial = d.k1 + r2 * (2.0 * d.k2 + 3.0 * d.k3 * r2);
        const double j00 = radial + 2.0 * x * x * dradial + 2.0 * d.p1 * y + 6.0 * d.p2 * x;
        const double j01 = 2.0 * x * y * dradial + 2.0 * d.p1 * x + 2.0 * d.p2 * y;
        const double j10 = 2.0 * x * y * dradial + 2.0 * d.p1 * x + 2.0 * d.p2 * y;
        const double j11 = radial + 2.0 * y * y * dradial + 6.0 * d.p1 * y + 2.0 * d.p2 * x;
        const double det = j00 * j11 - j01 * j10;
        if (!std::isfinite(det) || std::abs(det) < 1e-300) break;
        x -= (j11 * ex - j01 * ey) / det;
        y -= (-j10 * ex + j00 * ey) / det;
    }
    const auto f = apply_lens(x, y, d);
    residual = std::hypot(f.x - xd, f.y - yd);
    if (!(residual < kUndistortTolerance))
        throw DataError("undistort_point: no convergence (residual " + text::format_double(residual) + ")");
    return {x * c.fx + c.ox, y * c.fy + c.oy};
}

Image undistort_image(const Image& frame, const CameraProfile& profile, int bands) {
    if (frame.width() != profile.image_width || frame.height() != profile.image_height)
        throw DataError("undistort_image: frame size does not match the calibration image size");
    if (profile.distortion.is_zero()) return frame;

    Image out(frame.width(), frame.height());
    const int w = frame.width(), h = frame.height();
    auto process_rows = [&](int y_begin, int y_end) {
        for (int y = y_begin; y < y_end; ++y) {
            std::uint8_t* dst = out.row(y);
            for (int x = 0; x < w; ++x) {
                const Point2 s = distort_point({static_cast<double>(x), static_cast<double>(y)}, profile);
                if (!(s.x >= 0.0 && s.y >= 0.0 && s.x <= w - 1 && s.y <= h - 1)) continue;
                const int x0 = static_cast<int>(s.x), y0 = static_cast<int>(s.y);
                const double ax = s.x - x0, ay = s.y - y0;
                const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
                const std::uint8_t* r0 = frame.row(y0);
                const std::uint8_t* r1 = frame.row(y1);
                for (int ch = 0; ch < 3; ++ch) {
                    const double top = (1 - ax) * r0[x0 * 3 + ch] + ax * r0[x1 * 3 + ch];
                    const double bot = (1 - ax) * r1[x0 * 3 + ch] + ax * r1[x1 * 3 + ch];
                    dst[x * 3 + ch] = static_cast<std::uint8_t>(std::lround((1 - ay) * top + ay * bot));
                }
            }
        }
    };

    bands = std::clamp(bands, 1, h);
    if (bands == 1) {
        process_rows(0, h);
        return out;
    }
    std::vector<std::jthread> workers;
    for (int b = 0; b < bands; ++b) {
        const int y0 = h * b / bands, y1 = h * (b + 1) / bands;
        workers.emplace_back(process_rows, y0, y1);
    }
    workers.clear();
    return out;
}

nlohmann::json to_json(const CameraProfile& c) {
    return {{"schema_version", kCalibrationSchemaVersion},
            {"fx", c.fx},
            {"fy", c.fy},
            {"ox", c.ox},
            {"oy", c.oy},
            {"k1", c.distortion.k1},
            {"k2", c.distortion.k2},
            {"k3", c.distortion.k3},
            {"p1", c.distortion.p1},
            {"p2", c.distortion.p2},
            {"rotation", c.rotation},
            {"translation", c.translation},
            {"image_width", c.image_width},
            {"image_height", c.image_height},
            {"rms_reprojection_error", c.rms_reprojection_error}};
}

CameraProfile camera_profile_from_json(const nlohmann::json& doc) {
    CameraProfile c;
    try {
        const int version = doc.at("schema_version").get<int>();
        if (version != kCalibrationSchemaVersion)
            throw DataError("calibration file: unsupported schema_version " + std::to_string(version));
        c.fx = doc.at("fx").get<double>();
        c.fy = doc.at("fy").get<double>();
        c.ox = doc.at("ox").get<double>();
        c.oy = doc.at("oy").get<double>();
        c.distortion = {doc.at("k1").get<double>(), doc.at("k2").get<double>(), doc.at("k3").get<double>(),
                        doc.at("p1").get<double>(), doc.at("p2").get<double>()};
        c.rotation = doc.at("rotation").get<std::array<double, 3>>();
        c.translation = doc.at("translation").get<std::array<double, 3>>();
        c.image_width = doc.at("image_width").get<int>();
        c.image_height = doc.at("image_height").get<int>();
        c.rms_reprojection_error = doc.value("rms_reprojection_error", 0.0);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("calibration file: ") + e.what());
    }
    c.validate();
    return c;
}

CameraProfile load_camera_profile(const std::filesystem::path& path) {
    try {
        return camera_profile_from_json(nlohmann::json::parse(text::read_file(path)));
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError("calibration file " + path.string() + ": " + e.what());
    }
}

void save_camera_profile(const std::filesystem::path& path, const CameraProfile& profile) {
    text::write_file(path, to_json(profile).dump(2) + "\n");
}

}  // namespace fieldtrack
