#include "fieldtrack/homography.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "fieldtrack/error.hpp"
#include "fieldtrack/rng.hpp"
#include "fieldtrack/text_io.hpp"

namespace fieldtrack {

namespace {

// Translates the centroid to the origin and scales the mean distance to sqrt(2).
Eigen::Matrix3d hartley_transform(std::span<const Point2> pts) {
    double cx = 0, cy = 0;
    for (const auto& p : pts) {
        cx += p.x;
        cy += p.y;
    }
    cx /= static_cast<double>(pts.size());
    cy /= static_cast<double>(pts.size());
    double mean_dist = 0;
    for (const auto& p : pts) mean_dist += std::hypot(p.x - cx, p.y - cy);
    mean_dist /= static_cast<double>(pts.size());
    if (!(mean_dist > 0)) throw DataError("homography: all points coincide");
    const double s = std::sqrt(2.0) / mean_dist;
    Eigen::Matrix3d T;
    T << s, 0, -s * cx, 0, s, -s * cy, 0, 0, 1;
    return T;
}

Point2 apply(const Eigen::Matrix3d& M, Point2 p) {
    const Eigen::Vector3d v = M * Eigen::Vector3d(p.x, p.y, 1.0);
    return {v.x() / v.z(), v.y() / v.z()};
}

double area2(Point2 a, Point2 b, Point2 c) { return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x); }

bool sample_has_collinear_triple(const std::array<Point2, 4>& p) {
    double scale = 0;
    for (const auto& q : p) scale = std::max({scale, std::abs(q.x - p[0].x), std::abs(q.y - p[0].y)});
    const double tol = 1e-9 * scale * scale;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            for (int k = j + 1; k < 4; ++k)
                if (std::abs(area2(p[i], p[j], p[k])) <= tol) return true;
    return false;
}

// Field -> image fit on a subset; the image-space residual is what RANSAC scores.
Eigen::Matrix3d fit_field_to_image(std::span<const Correspondence> corr, std::span<const std::size_t> idx) {
    std::vector<Point2> from, to;
    from.reserve(idx.size());
    to.reserve(idx.size());
    for (auto i : idx) {
        from.push_back(corr[i].field);
        to.push_back(corr[i].image);
    }
    return dlt_homography(from, to);
}

double image_error(const Eigen::Matrix3d& field_to_image, const Correspondence& c) {
    const Eigen::Vector3d v = field_to_image * Eigen::Vector3d(c.field.x, c.field.y, 1.0);
    if (!(std::abs(v.z()) > 0)) return std::numeric_limits<double>::infinity();
    return std::hypot(v.x() / v.z() - c.image.x, v.y() / v.z() - c.image.y);
}

std::vector<std::size_t> inliers_of(const Eigen::Matrix3d& G, std::span<const Correspondence> corr, double threshold,
                                    double* sq_sum) {
    std::vector<std::size_t> in;
    double s = 0;
    for (std::size_t i = 0; i < corr.size(); ++i) {
        const double e = image_error(G, corr[i]);
        if (e <= threshold) {
            in.push_back(i);
            s += e * e;
        }
    }
    if (sq_sum) *sq_sum = s;
    return in;
}

}  // namespace

std::string_view to_string(HomographySource source) {
    return source == HomographySource::Automatic ? "automatic" : "manual";
}

Eigen::Matrix3d normalize_homography(const Eigen::Matrix3d& H) {
    const double norm = H.norm();
    if (!(norm > 0) || !std::isfinite(norm)) throw DataError("homography: cannot normalize a zero matrix");
    Eigen::Matrix3d out = H / norm;
    // Sign convention: bottom-right entry non-negative; if it is zero, the first nonzero
    // entry in row-major order is made positive.
    double pivot = out(2, 2);
    if (pivot == 0.0) {
        for (int i = 0; i < 9 && pivot == 0.0; ++i) pivot = out(i / 3, i % 3);
    }
    if (pivot < 0) out = -out;
    return out;
}

Eigen::Matrix3d dlt_homography(std::span<const Point2> from, std::span<const Point2> to) {
    if (from.size() != to.size()) throw UsageError("dlt_homography: point sets differ in size");
    if (from.size() < 4) throw DataError("homography: need at least 4 correspondences");
    const Eigen::Matrix3d Tf = hartley_transform(from);
    const Eigen::Matrix3d Tt = hartley_transform(to);

    const Eigen::Index n = static_cast<Eigen::Index>(from.size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(std::max<Eigen::Index>(2 * n, 9), 9);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Point2 a = apply(Tf, from[i]);
        const Point2 b = apply(Tt, to[i]);
        A.row(2 * i) << -a.x, -a.y, -1, 0, 0, 0, b.x * a.x, b.x * a.y, b.x;
        A.row(2 * i + 1) << 0, 0, 0, -a.x, -a.y, -1, b.y * a.x, b.y * a.y, b.y;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    // A one-dimensional null space is required; a second vanishing singular value means
    // the configuration does not determine H.
    if (!(sv(7) > 1e-10 * sv(0))) throw DataError("homography: degenerate configuration (rank-deficient system)");
    const Eigen::VectorXd h = svd.matrixV().col(8);
    Eigen::Matrix3d Hn;
    Hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
    return Tt.inverse() * Hn * Tf;
}

Homography estimate_homography(std::span<const Correspondence> corr, HomographySource source,
                               const RansacOptions& ransac) {
    if (corr.size() < 4) throw DataError("homography: need at least 4 correspondences");

    std::vector<std::size_t> inliers(corr.size());
    std::iota(inliers.begin(), inliers.end(), 0);

    if (ransac.enabled && corr.size() > ransac.min_correspondences_exclusive) {
        Rng rng(ransac.seed);
        std::vector<std::size_t> best;
        double best_sq = std::numeric_limits<double>::infinity();
        const std::size_t n = corr.size();
        for (int it = 0; it < ransac.iterations; ++it) {
            std::array<std::size_t, 4> s{};
            for (int k = 0; k < 4; ++k) {
                std::size_t cand;
                do {
                    cand = rng.index(n);
                } while (std::find(s.begin(), s.begin() + k, cand) != s.begin() + k);
                s[k] = cand;
            }
            const std::array<Point2, 4> fp{corr[s[0]].field, corr[s[1]].field, corr[s[2]].field, corr[s[3]].field};
            const std::array<Point2, 4> ip{corr[s[0]].image, corr[s[1]].image, corr[s[2]].image, corr[s[3]].image};
            if (sample_has_collinear_triple(fp) || sample_has_collinear_triple(ip)) continue;
            Eigen::Matrix3d G;
            try {
                G = fit_field_to_image(corr, s);
            } catch (const DataError&) {
                continue;
            }
            double sq = 0;
            auto in = inliers_of(G, corr, ransac.threshold_px, &sq);
            if (in.size() > best.size() || (in.size() == best.size() && sq < best_sq)) {
                best = std::move(in);
                best_sq = sq;
            }
        }
        if (best.size() < 4) throw DataError("homography: RANSAC found no consensus set of 4 or more inliers");
        // One refit-and-rescore pass on the consensus set.
        const Eigen::Matrix3d G = fit_field_to_image(corr, best);
        auto refined = inliers_of(G, corr, ransac.threshold_px, nullptr);
        inliers = refined.size() >= best.size() ? std::move(refined) : std::move(best);
    }

    const Eigen::Matrix3d G = fit_field_to_image(corr, inliers);
    const double det = G.determinant();
    if (!std::isfinite(det) || std::abs(det) < 1e-300) throw DataError("homography: singular estimate");

    Homography out;
    out.H = normalize_homography(G.inverse());
    out.source = source;
    out.correspondences.reserve(inliers.size());
    for (auto i : inliers) out.correspondences.push_back(corr[i]);
    out.rms_reprojection_error = reprojection_error(out.H, out.correspondences);
    return out;
}

double reprojection_error(const Eigen::Matrix3d& H, std::span<const Correspondence> corr) {
    if (corr.empty()) return 0.0;
    const Eigen::Matrix3d Hinv = H.inverse();
    double sum = 0;
    for (const auto& c : corr) {
        const Point2 p = apply(Hinv, c.field);
        const double dx = p.x - c.image.x, dy = p.y - c.image.y;
        sum += dx * dx + dy * dy;
    }
    return std::sqrt(sum / static_cast<double>(corr.size()));
}

Point2 project_to_field(Point2 p, const Eigen::Matrix3d& H) {
    const Eigen::Vector3d v = H * Eigen::Vector3d(p.x, p.y, 1.0);
    if (!(std::abs(v.z()) >= 1e-12)) throw DataError("project_to_field: point maps to infinity");
    return {v.x() / v.z(), v.y() / v.z()};
}

Point2 project_to_image(Point2 p, const Eigen::Matrix3d& H) {
    const Eigen::Vector3d v = H.inverse() * Eigen::Vector3d(p.x, p.y, 1.0);
    if (!(std::abs(v.z()) >= 1e-12)) throw DataError("project_to_image: point maps to infinity");
    return {v.x() / v.z(), v.y() / v.z()};
}

std::variant<Homography, NeedsManual> auto_homography(std::span<const LandmarkObservation> observations,
                                                      const FieldModel& field, const CameraProfile* profile,
                                                      const AutoHomographyOptions& options) {
    std::map<LandmarkId, const LandmarkObservation*> best;
    for (const auto& obs : observations) {
        auto [it, inserted] = best.emplace(obs.id, &obs);
        if (!inserted && obs.confidence > it->second->confidence) it->second = &obs;
    }
    std::vector<Correspondence> corr;
    for (const auto& [id, obs] : best) {
        const auto lm = field.landmarks.find(id);
        if (lm == field.landmarks.end()) continue;
        Point2 image = obs->image;
        if (profile) {
            try {
                image = undistort_point(image, *profile);
            } catch (const DataError&) {
                continue;
            }
        }
        corr.push_back({image, lm->second, id});
    }
    if (corr.size() < 4)
        return NeedsManual{"only " + std::to_string(corr.size()) + " usable landmarks (need 4)", std::nullopt};

    Homography h;
    try {
        h = estimate_homography(corr, HomographySource::Automatic, options.ransac);
    } catch (const DataError& e) {
        return NeedsManual{e.what(), std::nullopt};
    }
    if (h.rms_reprojection_error > options.gate_px) {
        std::string reason = "reprojection error " + text::format_fixed(h.rms_reprojection_error, 3) +
                             " px above gate " + text::format_fixed(options.gate_px, 3) + " px";
        return NeedsManual{std::move(reason), std::move(h)};
    }
    return h;
}

nlohmann::json to_json(const Homography& h) {
    std::vector<double> entries;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) entries.push_back(h.H(r, c));
    nlohmann::json corr = nlohmann::json::array();
    for (const auto& c : h.correspondences) {
        nlohmann::json j = {{"image", {c.image.x, c.image.y}}, {"field", {c.field.x, c.field.y}}};
        if (c.landmark) j["landmark"] = c.landmark->to_string();
        corr.push_back(std::move(j));
    }
    return {{"schema_version", kHomographySchemaVersion},
            {"H", entries},
            {"rms_reprojection_error", h.rms_reprojection_error},
            {"source", std::string(to_string(h.source))},
            {"correspondences", corr}};
}

Homography homography_from_json(const nlohmann::json& doc) {
    Homography h;
    try {
        const int version = doc.at("schema_version").get<int>();
        if (version != kHomographySchemaVersion)
            throw DataError("homography file: unsupported schema_version " + std::to_string(version));
        const auto entries = doc.at("H").get<std::vector<double>>();
        if (entries.size() != 9) throw DataError("homography file: H must have 9 entries");
        for (int i = 0; i < 9; ++i) h.H(i / 3, i % 3) = entries[i];
        h.rms_reprojection_error = doc.at("rms_reprojection_error").get<double>();
        const auto source = doc.at("source").get<std::string>();
        if (source == "automatic") {
            h.source = HomographySource::Automatic;
        } else if (source == "manual") {
            h.source = HomographySource::Manual;
        } else {
            throw DataError("homography file: unknown source '" + source + "'");
        }
        if (doc.contains("correspondences")) {
            for (const auto& j : doc.at("correspondences")) {
                Correspondence c;
                c.image = {j.at("image").at(0).get<double>(), j.at("image").at(1).get<double>()};
                c.field = {j.at("field").at(0).get<double>(), j.at("field").at(1).get<double>()};
                if (j.contains("landmark")) c.landmark = LandmarkId::parse(j.at("landmark").get<std::string>());
                h.correspondences.push_back(c);
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("homography file: ") + e.what());
    }
    const double det = h.H.determinant();
    if (!std::isfinite(det) || det == 0.0) throw DataError("homography file: singular matrix");
    return h;
}

Homography load_homography(const std::filesystem::path& path) {
    try {
        return homography_from_json(nlohmann::json::parse(text::read_file(path)));
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError("homography file " + path.string() + ": " + e.what());
    }
}

void save_homography(const std::filesystem::path& path, const Homography& h) {
    text::write_file(path, to_json(h).dump(2) + "\n");
}

}  // namespace fieldtrack
