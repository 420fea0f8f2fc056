#include "fieldtrack/identity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <Eigen/Core>

#include "fieldtrack/assignment.hpp"
#include "fieldtrack/error.hpp"
#include "fieldtrack/text_io.hpp"

namespace fieldtrack {

namespace {

std::string flags_text(const GcFlags& f) {
    std::string out;
    auto add = [&](bool on, std::string_view name) {
        if (!on) return;
        if (!out.empty()) out += '|';
        out += name;
    };
    add(f.active, "active");
    add(f.penalized, "penalized");
    add(f.fallen, "fallen");
    return out;
}

GcFlags parse_flags(std::string_view text, const std::string& where) {
    GcFlags f{false, false, false};
    if (text::trim(text).empty()) return f;
    for (auto tok : text::split(text, '|')) {
        tok = text::trim(tok);
        if (tok == "active") f.active = true;
        else if (tok == "penalized") f.penalized = true;
        else if (tok == "fallen") f.fallen = true;
        else throw DataError(where + ": unknown flag '" + std::string(tok) + "'");
    }
    return f;
}

struct Accum {
    double x = 0, y = 0;
    int n = 0;
    Point2 mean() const { return {x / n, y / n}; }
};

}  // namespace

std::vector<GcRecord> parse_gc_log(std::string_view csv) {
    std::vector<GcRecord> out;
    std::set<std::pair<int, int>> seen;
    int current_frame = std::numeric_limits<int>::min();
    int line_no = 0;
    bool header = false;
    for (const auto& raw : text::split(csv, '\n')) {
        ++line_no;
        const auto line = text::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        if (!header) {
            if (line != "frame,team,jersey,x,y,flags")
                throw DataError("gc line " + std::to_string(line_no) + ": expected header frame,team,jersey,x,y,flags");
            header = true;
            continue;
        }
        const std::string where = "gc line " + std::to_string(line_no);
        const auto cols = text::split(line, ',');
        if (cols.size() != 6) throw DataError(where + ": expected 6 columns");
        GcRecord r;
        r.frame = text::require_int(cols[0], where);
        r.team = text::require_int(cols[1], where);
        r.jersey = text::require_int(cols[2], where);
        r.position = {text::require_double(cols[3], where), text::require_double(cols[4], where)};
        r.flags = parse_flags(cols[5], where);
        if (r.team != 0 && r.team != 1) throw DataError(where + ": team must be 0 or 1");
        if (r.jersey < 1) throw DataError(where + ": jersey must be >= 1");
        if (r.frame < current_frame) throw DataError(where + ": frames must be non-decreasing");
        if (r.frame != current_frame) {
            seen.clear();
            current_frame = r.frame;
        }
        if (!seen.insert({r.team, r.jersey}).second)
            throw DataError(where + ": duplicate team " + std::to_string(r.team) + " jersey " +
                            std::to_string(r.jersey) + " in frame " + std::to_string(r.frame));
        out.push_back(r);
    }
    if (!header) throw DataError("gc log: missing header");
    return out;
}

std::vector<GcRecord> load_gc_log(const std::filesystem::path& path) { return parse_gc_log(text::read_file(path)); }

std::string write_gc_log(std::span<const GcRecord> records) {
    std::string out = "frame,team,jersey,x,y,flags\n";
    for (const auto& r : records) {
        out += std::to_string(r.frame) + ',' + std::to_string(r.team) + ',' + std::to_string(r.jersey) + ',' +
               text::format_double(r.position.x) + ',' + text::format_double(r.position.y) + ',' +
               flags_text(r.flags) + '\n';
    }
    return out;
}

std::optional<Identity> IdentityMap::find(int track_id) const {
    auto it = assignments.find(track_id);
    if (it == assignments.end()) return std::nullopt;
    return it->second.identity;
}

std::vector<int> kmeans(std::span<const Point2> points, std::vector<Point2>& centers, int max_iterations) {
    std::vector<int> label(points.size(), -1);
    if (centers.empty()) return label;
    for (int it = 0; it < max_iterations; ++it) {
        bool changed = false;
        for (std::size_t i = 0; i < points.size(); ++i) {
            int best = 0;
            double best_d = distance(points[i], centers[0]);
            for (std::size_t k = 1; k < centers.size(); ++k) {
                const double d = distance(points[i], centers[k]);
                if (d < best_d) {
                    best_d = d;
                    best = static_cast<int>(k);
                }
            }
            if (label[i] != best) {
                label[i] = best;
                changed = true;
            }
        }
        if (!changed) break;
        std::vector<Accum> acc(centers.size());
        for (std::size_t i = 0; i < points.size(); ++i) {
            acc[label[i]].x += points[i].x;
            acc[label[i]].y += points[i].y;
            ++acc[label[i]].n;
        }
        for (std::size_t k = 0; k < centers.size(); ++k)
            if (acc[k].n > 0) centers[k] = acc[k].mean();
    }
    return label;
}

std::vector<int> match_points(std::span<const Point2> from, std::span<const Point2> to) {
    Eigen::MatrixXd cost(from.size(), to.size());
    for (std::size_t i = 0; i < from.size(); ++i)
        for (std::size_t j = 0; j < to.size(); ++j) cost(i, j) = distance(from[i], to[j]);
    const auto a = hungarian_assign(cost);
    std::vector<int> out(from.size(), -1);
    for (const auto& [r, c] : a.matches) out[r] = c;
    return out;
}

IdentityMap associate_identities(std::span<const RadarFrame> frames, std::span<const GcRecord> gc,
                                 const IdentityParams& params) {
    IdentityMap map;
    if (frames.empty()) return map;
    int first = frames.front().frame;
    for (const auto& f : frames) first = std::min(first, f.frame);
    map.window_first = first;
    map.window_last = first + params.window_frames - 1;
    auto in_window = [&](int f) { return f >= map.window_first && f <= map.window_last; };

    std::map<int, Accum> track_acc;
    std::map<int, std::pair<int, int>> track_span;  // first, last frame in window
    std::map<int, int> track_count_per_frame;
    std::set<int> all_tracks;
    for (const auto& f : frames) {
        for (const auto& p : f.points) {
            if (p.cls != ObjectClass::Robot) continue;
            all_tracks.insert(p.track_id);
            if (!in_window(f.frame)) continue;
            auto& a = track_acc[p.track_id];
            a.x += p.position.x;
            a.y += p.position.y;
            ++a.n;
            auto [it, fresh] = track_span.try_emplace(p.track_id, f.frame, f.frame);
            if (!fresh) it->second.second = f.frame;
            ++track_count_per_frame[f.frame];
        }
    }
    std::map<Identity, Accum> gc_acc;
    std::map<int, int> gc_count_per_frame;
    for (const auto& r : gc) {
        if (!in_window(r.frame)) continue;
        auto& a = gc_acc[{r.team, r.jersey}];
        a.x += r.position.x;
        a.y += r.position.y;
        ++a.n;
        ++gc_count_per_frame[r.frame];
    }

    const int k = static_cast<int>(gc_acc.size());
    bool overlap = false;
    for (const auto& [frame, n] : gc_count_per_frame) {
        auto it = track_count_per_frame.find(frame);
        if (it != track_count_per_frame.end() && 2 * n >= k && 2 * it->second >= k) {
            overlap = true;
            break;
        }
    }
    if (k == 0 || !overlap)
        throw DataError("identity association: no frame in the window where tracks and GameController both "
                        "report at least half of the robots");

    std::vector<int> track_ids;
    std::vector<Point2> track_means;
    for (const auto& [id, a] : track_acc) {
        track_ids.push_back(id);
        track_means.push_back(a.mean());
    }
    std::vector<Identity> gc_ids;
    std::vector<Point2> gc_means;
    for (const auto& [id, a] : gc_acc) {
        gc_ids.push_back(id);
        gc_means.push_back(a.mean());
    }

    // Seed each cluster at the unclaimed track mean closest to one GC identity.
    std::vector<Point2> centers;
    std::vector<char> claimed(track_means.size(), 0);
    for (const auto& g : gc_means) {
        int best = -1;
        for (std::size_t t = 0; t < track_means.size(); ++t) {
            if (claimed[t]) continue;
            if (best < 0 || distance(track_means[t], g) < distance(track_means[best], g)) best = static_cast<int>(t);
        }
        if (best < 0) break;
        claimed[best] = 1;
        centers.push_back(track_means[best]);
    }
    const auto label = kmeans(track_means, centers, params.kmeans_iterations);
    const auto cluster_to_gc = match_points(centers, gc_means);

    double residual = 0;
    int residual_n = 0;
    for (std::size_t c = 0; c < centers.size(); ++c) {
        if (cluster_to_gc[c] < 0) continue;
        const double d = distance(centers[c], gc_means[cluster_to_gc[c]]);
        if (d > params.reject_mm) continue;
        residual += d;
        ++residual_n;
    }
    map.residual_mm = residual_n ? residual / residual_n : 0.0;

    // Candidates per identity; co-alive tracks in one cluster keep only the closest.
    std::map<Identity, std::vector<std::size_t>> claimants;
    for (std::size_t t = 0; t < track_ids.size(); ++t) {
        const int g = cluster_to_gc[label[t]];
        if (g < 0) continue;
        const double d = distance(track_means[t], gc_means[g]);
        if (d > params.reject_mm) continue;
        claimants[gc_ids[g]].push_back(t);
    }
    for (auto& [identity, members] : claimants) {
        std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
            const Point2 g = gc_acc.at(identity).mean();
            const double da = distance(track_means[a], g), db = distance(track_means[b], g);
            return da != db ? da < db : track_ids[a] < track_ids[b];
        });
        std::vector<std::size_t> kept;
        for (std::size_t t : members) {
            const auto [f0, f1] = track_span.at(track_ids[t]);
            const bool clash = std::any_of(kept.begin(), kept.end(), [&](std::size_t o) {
                const auto [g0, g1] = track_span.at(track_ids[o]);
                return f0 <= g1 && g0 <= f1;
            });
            if (clash) continue;
            kept.push_back(t);
            map.assignments[track_ids[t]] = {identity, distance(track_means[t], gc_acc.at(identity).mean())};
        }
    }
    for (int id : all_tracks)
        if (!map.assignments.count(id)) map.unassigned.push_back(id);
    return map;
}

std::vector<RadarFrame> propagate_identities(IdentityMap& map, std::span<const RadarFrame> frames,
                                             std::span<const GcRecord> gc, const IdentityParams& params) {
    std::map<int, std::vector<const GcRecord*>> gc_by_frame;
    for (const auto& r : gc) gc_by_frame[r.frame].push_back(&r);
    std::set<int> decided;
    for (const auto& [id, a] : map.assignments) decided.insert(id);
    std::set<int> seen_in_window;
    for (const auto& f : frames)
        if (f.frame <= map.window_last)
            for (const auto& p : f.points)
                if (p.cls == ObjectClass::Robot) seen_in_window.insert(p.track_id);
    // window tracks left unassigned stay unassigned
    decided.insert(seen_in_window.begin(), seen_in_window.end());

    std::vector<RadarFrame> out(frames.begin(), frames.end());
    for (auto& f : out) {
        for (auto& p : f.points) {
            if (p.cls != ObjectClass::Robot || decided.count(p.track_id)) continue;
            decided.insert(p.track_id);
            // latest GC snapshot at or before the birth frame
            auto it = gc_by_frame.upper_bound(f.frame);
            if (it == gc_by_frame.begin()) continue;
            --it;
            std::set<Identity> held;
            for (const auto& q : f.points) {
                if (q.cls != ObjectClass::Robot || q.track_id == p.track_id) continue;
                if (auto id = map.find(q.track_id)) held.insert(*id);
            }
            const GcRecord* best = nullptr;
            for (const GcRecord* r : it->second) {
                if (held.count({r->team, r->jersey})) continue;
                if (!best || distance(r->position, p.position) < distance(best->position, p.position)) best = r;
            }
            if (best && distance(best->position, p.position) <= params.reject_mm)
                map.assignments[p.track_id] = {{best->team, best->jersey}, distance(best->position, p.position)};
        }
        for (auto& p : f.points) {
            if (p.cls != ObjectClass::Robot) continue;
            if (auto id = map.find(p.track_id)) {
                p.team = id->team;
                p.jersey = id->jersey;
            }
        }
    }
    map.unassigned.clear();
    for (int id : decided)
        if (!map.assignments.count(id)) map.unassigned.push_back(id);
    return out;
}

nlohmann::json to_json(const IdentityMap& map) {
    nlohmann::json assignments = nlohmann::json::array();
    for (const auto& [id, a] : map.assignments)
        assignments.push_back({{"track_id", id},
                               {"team", a.identity.team},
                               {"jersey", a.identity.jersey},
                               {"distance_mm", a.distance_mm}});
    return {{"assignments", assignments},
            {"unassigned", map.unassigned},
            {"residual_mm", map.residual_mm},
            {"window", {map.window_first, map.window_last}}};
}

}  // namespace fieldtrack
