#include "fieldtrack/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fieldtrack/assignment.hpp"
#include "fieldtrack/error.hpp"

namespace fieldtrack {

double iou(const BBox& a, const BBox& b) {
    const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
    const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    return uni > 0 ? inter / uni : 0.0;
}

double cosine_distance(std::span<const double> a, std::span<const double> b) {
    const double dot = std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
    return 1.0 - std::clamp(dot, -1.0, 1.0);
}

void TrackerParams::validate() const {
    auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!unit(iou_threshold) || !unit(lambda_app) || !unit(ema_alpha))
        throw UsageError("tracker: iou_threshold, lambda_app and ema_alpha must lie in [0, 1]");
    if (max_age < 0 || min_hits < 1 || max_coast < 0)
        throw UsageError("tracker: max_age >= 0, min_hits >= 1, max_coast >= 0 required");
    if (!(fall_threshold > 0)) throw UsageError("tracker: fall_threshold must be positive");
    if (!(kalman.process_noise_scale > 0) || !(kalman.measurement_noise_scale > 0) || kalman.confidence_kappa < 0)
        throw UsageError("tracker: noise scales must be positive");
}

std::string_view to_string(TrackStatus status) {
    switch (status) {
        case TrackStatus::Tentative: return "tentative";
        case TrackStatus::Confirmed: return "confirmed";
        case TrackStatus::Deleted: return "deleted";
    }
    return "?";
}

Eigen::MatrixXd cost_matrix(std::span<const CostInput> tracks, std::span<const CostInput> detections,
                            double iou_threshold, double lambda_app) {
    Eigen::MatrixXd cost(tracks.size(), detections.size());
    for (std::size_t i = 0; i < tracks.size(); ++i) {
        for (std::size_t j = 0; j < detections.size(); ++j) {
            const double overlap = iou(tracks[i].box, detections[j].box);
            if (overlap < iou_threshold) {
                cost(i, j) = kInfeasible;
                continue;
            }
            const auto& ft = tracks[i].feature;
            const auto& fd = detections[j].feature;
            if (!ft.empty() && !fd.empty()) {
                if (ft.size() != fd.size()) throw DataError("cost_matrix: embedding dimension mismatch");
                cost(i, j) = (1.0 - lambda_app) * (1.0 - overlap) + lambda_app * cosine_distance(ft, fd);
            } else {
                cost(i, j) = 1.0 - overlap;
            }
        }
    }
    return cost;
}

EmaResult ema_feature_update(std::span<const double> e, std::span<const double> f, double alpha) {
    if (e.size() != f.size()) throw DataError("ema_feature_update: dimension mismatch");
    std::vector<double> blend(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) blend[i] = alpha * e[i] + (1.0 - alpha) * f[i];
    const double norm = std::sqrt(std::inner_product(blend.begin(), blend.end(), blend.begin(), 0.0));
    if (!(norm > 1e-12)) return {std::vector<double>(e.begin(), e.end()), true};
    for (double& v : blend) v /= norm;
    return {std::move(blend), false};
}

bool detect_fall(const BBox& box, double threshold) { return box.h / box.w < threshold; }

Tracker::Tracker(TrackerParams params) : params_(params) { params_.validate(); }

void Tracker::associate(ObjectClass cls, int frame, std::span<const Detection> detections, TrackEvents& events) {
    std::vector<std::size_t> track_idx;
    std::vector<CostInput> track_in;
    for (std::size_t i = 0; i < tracks_.size(); ++i) {
        if (tracks_[i].cls != cls) continue;
        track_idx.push_back(i);
        const auto& feat = tracks_[i].feature;
        track_in.push_back({tracks_[i].bbox(), feat ? std::span<const double>(*feat) : std::span<const double>()});
    }
    std::vector<const Detection*> dets;
    std::vector<CostInput> det_in;
    for (const auto& d : detections) {
        if (d.cls != cls) continue;
        dets.push_back(&d);
        det_in.push_back({d.bbox, d.embedding});
    }

    const auto cost = cost_matrix(track_in, det_in, params_.iou_threshold, params_.lambda_app);
    const auto assignment = hungarian_assign(cost);

    for (const auto& [r, c] : assignment.matches) {
        Track& t = tracks_[track_idx[r]];
        const Detection& d = *dets[c];
        t.kalman = kalman_update(t.kalman, d.bbox, params_.kalman, d.confidence);
        if (t.hits == 1) {
            // two-point start: tentative tracks never miss, so the previous box is one frame old
            const KalmanVector z = KalmanState::from_bbox(d.bbox).x;
            const KalmanVector z0 = KalmanState::from_bbox(t.last_measurement).x;
            t.kalman.x.head<4>() = z.head<4>();
            t.kalman.x.segment<3>(4) = z.head<3>() - z0.head<3>();
        }
        t.hits += 1;
        t.age_since_update = 0;
        t.last_measurement = d.bbox;
        t.last_confidence = d.confidence;
        if (cls == ObjectClass::Robot) t.fallen = detect_fall(d.bbox, params_.fall_threshold);
        if (!d.embedding.empty()) {
            if (t.feature)
                t.feature = ema_feature_update(*t.feature, d.embedding, params_.ema_alpha).feature;
            else
                t.feature = d.embedding;
        }
        t.history.push_back({frame, t.bbox(), true});
    }

    for (int c : assignment.unmatched_cols) {
        const Detection& d = *dets[c];
        Track t;
        t.id = next_id_++;
        t.cls = cls;
        t.kalman = KalmanState::from_bbox(d.bbox);
        t.hits = 1;
        t.first_frame = frame;
        t.last_measurement = d.bbox;
        t.last_confidence = d.confidence;
        if (cls == ObjectClass::Robot) t.fallen = detect_fall(d.bbox, params_.fall_threshold);
        if (!d.embedding.empty()) t.feature = d.embedding;
        t.history.push_back({frame, t.bbox(), true});
        events.created.push_back(t.id);
        tracks_.push_back(std::move(t));
    }
}

StepResult Tracker::step(int frame, std::span<const Detection> detections) {
    if (frame <= last_frame_)
        throw DataError("tracker: frame " + std::to_string(frame) + " does not follow frame " +
                        std::to_string(last_frame_));
    for (const auto& d : detections)
        if (d.frame != frame)
            throw DataError("tracker: detection of frame " + std::to_string(d.frame) + " passed for frame " +
                            std::to_string(frame));
    const int steps = last_frame_ < 0 ? 1 : frame - last_frame_;
    last_frame_ = frame;

    for (auto& t : tracks_) {
        for (int s = 0; s < steps; ++s) t.kalman = kalman_predict(t.kalman, params_.kalman);
        t.age_since_update += steps;
    }

    StepResult result;
    associate(ObjectClass::Robot, frame, detections, result.events);
    associate(ObjectClass::Ball, frame, detections, result.events);

    for (auto& t : tracks_) {
        if (t.age_since_update > 0) t.history.push_back({frame, t.bbox(), false});
        if (t.status == TrackStatus::Tentative) {
            if (t.age_since_update > 0) {
                t.status = TrackStatus::Deleted;
            } else if (t.hits >= params_.min_hits) {
                t.status = TrackStatus::Confirmed;
                result.events.confirmed.push_back(t.id);
            }
        } else if (t.status == TrackStatus::Confirmed && t.age_since_update > params_.max_age) {
            t.status = TrackStatus::Deleted;
        }
        if (t.status == TrackStatus::Deleted) result.events.deleted.push_back(t.id);
    }
    std::erase_if(tracks_, [](const Track& t) { return t.status == TrackStatus::Deleted; });

    for (const auto& t : tracks_) {
        if (t.status != TrackStatus::Confirmed || t.age_since_update > params_.max_coast) continue;
        result.active.push_back({frame, t.id, t.cls, t.bbox(), t.status, t.age_since_update, t.hits, t.fallen});
    }
    std::sort(result.active.begin(), result.active.end(),
              [](const TrackReport& a, const TrackReport& b) { return a.track_id < b.track_id; });
    std::sort(result.events.deleted.begin(), result.events.deleted.end());
    return result;
}

std::vector<TrackReport> track_stream(const DetectionStream& stream, const TrackerParams& params) {
    Tracker tracker(params);
    std::vector<TrackReport> out;
    for (int f = 0; f <= stream.last_frame(); ++f) {
        auto step = tracker.step(f, stream.frame(f));
        out.insert(out.end(), step.active.begin(), step.active.end());
    }
    return out;
}

}  // namespace fieldtrack
