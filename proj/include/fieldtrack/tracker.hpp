#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "fieldtrack/detections.hpp"
#include "fieldtrack/geometry.hpp"
#include "fieldtrack/kalman.hpp"

namespace fieldtrack {

double iou(const BBox& a, const BBox& b);
/// 1 - cos(angle); both vectors assumed unit-norm.
double cosine_distance(std::span<const double> a, std::span<const double> b);

struct TrackerParams {
    double iou_threshold = 0.3;
    int max_age = 30;
    int min_hits = 3;
    double lambda_app = 0.5;
    double ema_alpha = 0.9;
    double fall_threshold = 1.0;
    /// Confirmed tracks keep being reported for this many frames without a match.
    int max_coast = 3;
    KalmanParams kalman;

    void validate() const;
};

enum class TrackStatus { Tentative, Confirmed, Deleted };
std::string_view to_string(TrackStatus status);

struct TrackHistoryEntry {
    int frame = 0;
    BBox bbox;
    bool measured = false;
};

struct Track {
    int id = 0;
    ObjectClass cls = ObjectClass::Robot;
    KalmanState kalman;
    int hits = 0;
    int age_since_update = 0;
    TrackStatus status = TrackStatus::Tentative;
    std::optional<std::vector<double>> feature;
    int first_frame = 0;
    BBox last_measurement;
    double last_confidence = 1.0;
    bool fallen = false;
    std::vector<TrackHistoryEntry> history;

    BBox bbox() const { return kalman.bbox(); }
};

/// Association input: a box plus an optional unit feature (empty span when absent).
struct CostInput {
    BBox box;
    std::span<const double> feature;
};

/// cost = (1-lambda)(1-iou) + lambda * cosine_distance when both features exist, else 1-iou;
/// pairs with iou below the gate become kInfeasible. Throws DataError on dimension mismatch.
Eigen::MatrixXd cost_matrix(std::span<const CostInput> tracks, std::span<const CostInput> detections,
                            double iou_threshold, double lambda_app);

struct EmaResult {
    std::vector<double> feature;
    bool degenerate = false;  // blend cancelled out; previous feature kept
};
EmaResult ema_feature_update(std::span<const double> e, std::span<const double> f, double alpha);

/// Fallen iff h / w < threshold.
bool detect_fall(const BBox& box, double threshold = 1.0);

struct TrackReport {
    int frame = 0;
    int track_id = 0;
    ObjectClass cls = ObjectClass::Robot;
    BBox bbox;
    TrackStatus status = TrackStatus::Confirmed;
    int age_since_update = 0;
    int hits = 0;
    bool fallen = false;
    friend bool operator==(const TrackReport&, const TrackReport&) = default;
};

struct TrackEvents {
    std::vector<int> created;
    std::vector<int> confirmed;
    std::vector<int> deleted;
};

struct StepResult {
    std::vector<TrackReport> active;  // ascending track id
    TrackEvents events;
};

/// SORT-style tracker with appearance fusion. Single-threaded; frames must strictly increase.
class Tracker {
public:
    explicit Tracker(TrackerParams params = {});

    /// Advances to `frame` (skipped frames count as missed) and associates `detections`.
    /// Landmark detections are ignored. Throws DataError on frame regression.
    StepResult step(int frame, std::span<const Detection> detections);

    const std::vector<Track>& tracks() const { return tracks_; }
    const TrackerParams& params() const { return params_; }
    int last_frame() const { return last_frame_; }

private:
    void associate(ObjectClass cls, int frame, std::span<const Detection> detections, TrackEvents& events);

    TrackerParams params_;
    std::vector<Track> tracks_;
    int next_id_ = 1;
    int last_frame_ = -1;
};

/// Runs the tracker over a whole stream, returning the reports of every frame in order.
std::vector<TrackReport> track_stream(const DetectionStream& stream, const TrackerParams& params);

}  // namespace fieldtrack
