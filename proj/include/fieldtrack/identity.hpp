#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "fieldtrack/geometry.hpp"
#include "fieldtrack/localization.hpp"

namespace fieldtrack {

struct GcFlags {
    bool active = true;
    bool penalized = false;
    bool fallen = false;
    friend bool operator==(const GcFlags&, const GcFlags&) = default;
};

/// One robot as reported by the GameController log.
struct GcRecord {
    int frame = 0;
    int team = 0;    // 0 or 1
    int jersey = 1;  // >= 1
    Point2 position;  // mm, self-reported
    GcFlags flags;
    friend bool operator==(const GcRecord&, const GcRecord&) = default;
};

/// CSV `frame,team,jersey,x,y,flags`; flags is a `|`-separated subset of
/// {active, penalized, fallen}. Frames must be non-decreasing and (team, jersey) unique per frame.
std::vector<GcRecord> parse_gc_log(std::string_view csv);
std::vector<GcRecord> load_gc_log(const std::filesystem::path& path);
std::string write_gc_log(std::span<const GcRecord> records);

struct Identity {
    int team = 0;
    int jersey = 0;
    auto operator<=>(const Identity&) const = default;
};

struct IdentityParams {
    int window_frames = 60;
    double reject_mm = 1000;
    int kmeans_iterations = 100;
};

struct IdentityAssignment {
    Identity identity;
    double distance_mm = 0;  // track mean to identity mean
};

struct IdentityMap {
    std::map<int, IdentityAssignment> assignments;  // track id -> identity
    std::vector<int> unassigned;                    // tracks seen but not mapped, ascending
    double residual_mm = 0;                         // mean assigned cluster-to-identity distance
    int window_first = 0;
    int window_last = -1;

    std::optional<Identity> find(int track_id) const;
};

/// Lloyd iterations from the given seeds; ties go to the lower center index and empty
/// clusters keep their center. Returns the cluster index of every point.
std::vector<int> kmeans(std::span<const Point2> points, std::vector<Point2>& centers, int max_iterations);

/// Minimum-total-distance matching of `from` onto `to`; entry i is the matched index or -1.
std::vector<int> match_points(std::span<const Point2> from, std::span<const Point2> to);

/// Associates robot tracks with GC identities over the opening window. Throws DataError when
/// no frame has both sources reporting at least half the GC identities.
IdentityMap associate_identities(std::span<const RadarFrame> frames, std::span<const GcRecord> gc,
                                 const IdentityParams& params = {});

/// Annotates every robot point with its identity. Tracks unknown to the map are given the nearest
/// GC identity not held by another visible track at their first frame, within reject_mm.
/// The map is extended with those late assignments.
std::vector<RadarFrame> propagate_identities(IdentityMap& map, std::span<const RadarFrame> frames,
                                             std::span<const GcRecord> gc, const IdentityParams& params = {});

nlohmann::json to_json(const IdentityMap& map);

}  // namespace fieldtrack
