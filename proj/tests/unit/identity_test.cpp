#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <tuple>

#include "fieldtrack/error.hpp"
#include "fieldtrack/identity.hpp"
#include "fieldtrack/rng.hpp"
#include "oracles.hpp"

using namespace fieldtrack;

namespace {

struct Layout {
    std::vector<RadarFrame> frames;
    std::vector<GcRecord> gc;
    std::map<int, Identity> truth;  // track id -> identity
};

// Robots wander around well separated anchors; tracks carry noise, GC carries its own noise.
Layout random_layout(Rng& rng, int per_team, int frames, double track_sd, double gc_sd) {
    Layout out;
    std::vector<Point2> anchors;
    while (static_cast<int>(anchors.size()) < 2 * per_team) {
        const Point2 p{rng.uniform(500, 8500), rng.uniform(500, 5500)};
        if (std::all_of(anchors.begin(), anchors.end(), [&](Point2 q) { return distance(p, q) > 1200; }))
            anchors.push_back(p);
    }
    std::vector<int> ids(anchors.size());
    std::iota(ids.begin(), ids.end(), 1);
    for (std::size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[rng.index(i)]);
    for (std::size_t i = 0; i < anchors.size(); ++i)
        out.truth[ids[i]] = {static_cast<int>(i) / per_team, static_cast<int>(i) % per_team + 1};

    for (int f = 0; f < frames; ++f) {
        RadarFrame rf;
        rf.frame = f;
        for (std::size_t i = 0; i < anchors.size(); ++i) {
            const Point2 p{anchors[i].x + 100 * std::sin(0.1 * f + i), anchors[i].y + 100 * std::cos(0.07 * f + i)};
            FieldTrackPoint tp;
            tp.frame = f;
            tp.track_id = ids[i];
            tp.position = {p.x + rng.normal(0, track_sd), p.y + rng.normal(0, track_sd)};
            rf.points.push_back(tp);
            const Identity id = out.truth[ids[i]];
            out.gc.push_back({f, id.team, id.jersey, {p.x + rng.normal(0, gc_sd), p.y + rng.normal(0, gc_sd)}, {}});
        }
        std::sort(out.gc.end() - static_cast<long>(anchors.size()), out.gc.end(),
                  [](const GcRecord& a, const GcRecord& b) { return std::tie(a.team, a.jersey) < std::tie(b.team, b.jersey); });
        out.frames.push_back(std::move(rf));
    }
    return out;
}

FieldTrackPoint robot_at(int frame, int id, Point2 p) {
    FieldTrackPoint tp;
    tp.frame = frame;
    tp.track_id = id;
    tp.position = p;
    return tp;
}

}  // namespace

TEST(GcLog, ParseAndRoundTrip) {
    const std::string csv =
        "frame,team,jersey,x,y,flags\n"
        "0,0,1,100,200,active\n"
        "0,1,1,300.5,400,active|penalized\n"
        "1,0,1,110,200,fallen\n"
        "1,1,1,300,400,\n";
    const auto gc = parse_gc_log(csv);
    ASSERT_EQ(gc.size(), 4u);
    EXPECT_TRUE(gc[1].flags.penalized);
    EXPECT_TRUE(gc[1].flags.active);
    EXPECT_FALSE(gc[2].flags.active);
    EXPECT_TRUE(gc[2].flags.fallen);
    EXPECT_EQ(gc[3].flags, (GcFlags{false, false, false}));
    EXPECT_DOUBLE_EQ(gc[1].position.x, 300.5);
    EXPECT_EQ(parse_gc_log(write_gc_log(gc)), gc);
}

TEST(GcLog, RejectsMalformedInput) {
    EXPECT_THROW(parse_gc_log(""), DataError);
    EXPECT_THROW(parse_gc_log("frame,team,jersey,x,y\n"), DataError);
    EXPECT_THROW(parse_gc_log("frame,team,jersey,x,y,flags\n0,0,1,0,0,active\n0,0,1,5,5,active\n"), DataError);
    EXPECT_THROW(parse_gc_log("frame,team,jersey,x,y,flags\n0,2,1,0,0,active\n"), DataError);
    EXPECT_THROW(parse_gc_log("frame,team,jersey,x,y,flags\n0,0,0,0,0,active\n"), DataError);
    EXPECT_THROW(parse_gc_log("frame,team,jersey,x,y,flags\n1,0,1,0,0,\n0,0,2,0,0,\n"), DataError);
    EXPECT_THROW(parse_gc_log("frame,team,jersey,x,y,flags\n0,0,1,0,0,sleeping\n"), DataError);
    try {
        parse_gc_log("frame,team,jersey,x,y,flags\n0,0,1,0,0,\n0,0,1,0,0,\n");
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    }
    // same jersey in a later frame is fine
    EXPECT_EQ(parse_gc_log("frame,team,jersey,x,y,flags\n0,0,1,0,0,\n1,0,1,0,0,\n").size(), 2u);
}

TEST(Kmeans, SeparatedClustersAndTies) {
    const std::vector<Point2> pts{{0, 0}, {1, 0}, {0, 1}, {100, 100}, {101, 100}, {100, 101}};
    std::vector<Point2> centers{{0, 0}, {100, 100}};
    const auto label = kmeans(pts, centers, 50);
    EXPECT_EQ(label, (std::vector<int>{0, 0, 0, 1, 1, 1}));
    EXPECT_NEAR(centers[0].x, 1.0 / 3, 1e-12);
    EXPECT_NEAR(centers[1].y, 100 + 1.0 / 3, 1e-12);
    // equidistant point goes to the lower index
    std::vector<Point2> c2{{-1, 0}, {1, 0}};
    const std::vector<Point2> mid{{0, 0}};
    EXPECT_EQ(kmeans(mid, c2, 1)[0], 0);
    // empty cluster keeps its center
    std::vector<Point2> c3{{0, 0}, {1000, 1000}};
    const std::vector<Point2> near{{1, 1}, {2, 2}};
    kmeans(near, c3, 10);
    EXPECT_EQ(c3[1], (Point2{1000, 1000}));
}

TEST(MatchPoints, OptimalAgainstBruteForce) {
    Rng rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + static_cast<int>(rng.index(7)), m = 1 + static_cast<int>(rng.index(7));
        std::vector<Point2> a(n), b(m);
        for (auto& p : a) p = {rng.uniform(0, 9000), rng.uniform(0, 6000)};
        for (auto& p : b) p = {rng.uniform(0, 9000), rng.uniform(0, 6000)};
        const auto match = match_points(a, b);
        Eigen::MatrixXd cost(n, m);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) cost(i, j) = distance(a[i], b[j]);
        const auto oracle = oracle::brute_force_assignment(cost);
        double total = 0;
        int count = 0;
        std::vector<int> used;
        for (int i = 0; i < n; ++i) {
            if (match[i] < 0) continue;
            total += cost(i, match[i]);
            ++count;
            used.push_back(match[i]);
        }
        std::sort(used.begin(), used.end());
        EXPECT_EQ(std::adjacent_find(used.begin(), used.end()), used.end());
        EXPECT_EQ(count, oracle.cardinality);
        EXPECT_NEAR(total, oracle.cost, 1e-9);
    }
}

TEST(AssociateIdentities, PerfectLayouts) {
    Rng rng(32);
    for (int trial = 0; trial < 20; ++trial) {
        const auto layout = random_layout(rng, 5, 80, 0.0, 0.0);
        const auto map = associate_identities(layout.frames, layout.gc);
        EXPECT_TRUE(map.unassigned.empty());
        ASSERT_EQ(map.assignments.size(), 10u);
        for (const auto& [id, a] : map.assignments) EXPECT_EQ(a.identity, layout.truth.at(id));
        EXPECT_LT(map.residual_mm, 10);
        EXPECT_EQ(map.window_first, 0);
        EXPECT_EQ(map.window_last, 59);
    }
}

TEST(AssociateIdentities, NoisyGc) {
    Rng rng(33);
    for (int trial = 0; trial < 20; ++trial) {
        const auto layout = random_layout(rng, 5, 80, 30, 200);
        const auto map = associate_identities(layout.frames, layout.gc);
        for (const auto& [id, truth] : layout.truth) {
            ASSERT_TRUE(map.find(id)) << "track " << id;
            EXPECT_EQ(*map.find(id), truth);
        }
    }
}

TEST(AssociateIdentities, IsInjective) {
    Rng rng(34);
    for (int trial = 0; trial < 20; ++trial) {
        auto layout = random_layout(rng, 3 + static_cast<int>(rng.index(3)), 60, 50, 300);
        const auto map = associate_identities(layout.frames, layout.gc);
        std::set<Identity> seen;
        for (const auto& [id, a] : map.assignments) EXPECT_TRUE(seen.insert(a.identity).second);
    }
}

TEST(AssociateIdentities, SingleTeamGcLeavesOtherTeamUnassigned) {
    Rng rng(35);
    auto layout = random_layout(rng, 5, 60, 0, 0);
    std::erase_if(layout.gc, [](const GcRecord& r) { return r.team == 1; });
    const auto map = associate_identities(layout.frames, layout.gc);
    for (const auto& [id, truth] : layout.truth) {
        if (truth.team == 0) {
            ASSERT_TRUE(map.find(id));
            EXPECT_EQ(*map.find(id), truth);
        } else {
            EXPECT_FALSE(map.find(id));
            EXPECT_TRUE(std::binary_search(map.unassigned.begin(), map.unassigned.end(), id));
        }
    }
}

TEST(AssociateIdentities, ThrowsWithoutOverlap) {
    Rng rng(36);
    auto layout = random_layout(rng, 2, 60, 0, 0);
    EXPECT_THROW(associate_identities(layout.frames, std::vector<GcRecord>{}), DataError);
    for (auto& r : layout.gc) r.frame += 1000;
    EXPECT_THROW(associate_identities(layout.frames, layout.gc), DataError);
}

TEST(AssociateIdentities, FragmentedTrackPiecesShareIdentity) {
    // one robot whose track breaks into ids 7 then 8 inside the window, another steady robot as id 3
    std::vector<RadarFrame> frames;
    std::vector<GcRecord> gc;
    for (int f = 0; f < 60; ++f) {
        RadarFrame rf{f, {}, {}};
        rf.points.push_back(robot_at(f, f < 30 ? 7 : 8, {2000, 2000}));
        rf.points.push_back(robot_at(f, 3, {7000, 4000}));
        frames.push_back(rf);
        gc.push_back({f, 0, 1, {2010, 2000}, {}});
        gc.push_back({f, 1, 4, {7000, 4010}, {}});
    }
    const auto map = associate_identities(frames, gc);
    EXPECT_EQ(map.find(7), (Identity{0, 1}));
    EXPECT_EQ(map.find(8), (Identity{0, 1}));
    EXPECT_EQ(map.find(3), (Identity{1, 4}));
}

TEST(PropagateIdentities, RebornTrackInheritsVacatedIdentity) {
    std::vector<RadarFrame> frames;
    std::vector<GcRecord> gc;
    for (int f = 0; f < 120; ++f) {
        RadarFrame rf{f, {}, {}};
        const double x = 1000 + 20.0 * f;
        // track 1 lost at frame 80, reborn as 9; track 5 far away throughout
        if (f < 80) rf.points.push_back(robot_at(f, 1, {x, 2000}));
        if (f > 85) rf.points.push_back(robot_at(f, 9, {x, 2000}));
        rf.points.push_back(robot_at(f, 5, {8000, 5000}));
        if (f == 100) rf.points.push_back(robot_at(f, 11, {4500, 500}));
        frames.push_back(rf);
        gc.push_back({f, 0, 2, {x, 2000}, {}});
        gc.push_back({f, 1, 3, {8000, 5000}, {}});
    }
    auto map = associate_identities(frames, gc);
    EXPECT_EQ(map.find(1), (Identity{0, 2}));
    EXPECT_FALSE(map.find(9));
    const auto out = propagate_identities(map, frames, gc);
    EXPECT_EQ(map.find(9), (Identity{0, 2}));
    EXPECT_FALSE(map.find(11));  // every GC identity is held by a visible track
    EXPECT_EQ(map.unassigned, std::vector<int>{11});
    for (const auto& f : out) {
        for (const auto& p : f.points) {
            if (p.track_id == 11) {
                EXPECT_FALSE(p.team);
            } else {
                ASSERT_TRUE(p.team);
                EXPECT_EQ(*p.team, p.track_id == 5 ? 1 : 0);
                EXPECT_EQ(*p.jersey, p.track_id == 5 ? 3 : 2);
            }
        }
    }
}

TEST(PropagateIdentities, HeldIdentityIsNotReassigned) {
    std::vector<RadarFrame> frames;
    std::vector<GcRecord> gc;
    for (int f = 0; f < 80; ++f) {
        RadarFrame rf{f, {}, {}};
        rf.points.push_back(robot_at(f, 1, {3000, 3000}));
        if (f >= 70) rf.points.push_back(robot_at(f, 2, {3100, 3000}));  // spurious duplicate
        frames.push_back(rf);
        gc.push_back({f, 0, 1, {3000, 3000}, {}});
    }
    auto map = associate_identities(frames, gc);
    propagate_identities(map, frames, gc);
    EXPECT_EQ(map.find(1), (Identity{0, 1}));
    EXPECT_FALSE(map.find(2));
}

TEST(PropagateIdentities, WithoutGcEverythingIsUnassigned) {
    std::vector<RadarFrame> frames;
    for (int f = 0; f < 10; ++f) frames.push_back({f, {robot_at(f, 4, {100, 100}), robot_at(f, 6, {900, 900})}, {}});
    IdentityMap map;
    const auto out = propagate_identities(map, frames, std::vector<GcRecord>{});
    EXPECT_TRUE(map.assignments.empty());
    EXPECT_EQ(map.unassigned, (std::vector<int>{4, 6}));
    for (const auto& f : out)
        for (const auto& p : f.points) EXPECT_FALSE(p.team);
}

TEST(IdentityMap, Json) {
    IdentityMap map;
    map.assignments[4] = {{1, 3}, 12.5};
    map.unassigned = {7};
    map.window_last = 59;
    const auto j = to_json(map);
    EXPECT_EQ(j.at("assignments").at(0).at("track_id"), 4);
    EXPECT_EQ(j.at("assignments").at(0).at("jersey"), 3);
    EXPECT_EQ(j.at("unassigned").at(0), 7);
    EXPECT_EQ(j.at("window").at(1), 59);
}
