#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "streetcrime/geo/join.hpp"
#include "streetcrime/geo/sampling.hpp"
#include "test_support.hpp"

using namespace streetcrime;
using namespace streetcrime::geo;
using namespace testing_support;

namespace {

constexpr double kMetersPerDegLat = 6'371'000.0 * std::numbers::pi / 180.0;

Polyline meridian_line(double meters) {
    return Polyline("m", {kManhattan, {kManhattan.lon, kManhattan.lat + meters / kMetersPerDegLat}});
}

CommunityDistrict square_district(const std::string& id, double x0, double y0, double side = 1.0) {
    return make_district(id, {Polygon(square_ring(x0, y0, side))});
}

} // namespace

TEST(Projection, OriginMapsToZero) {
    const auto q = project_local(kManhattan, kManhattan);
    EXPECT_EQ(q.x, 0.0);
    EXPECT_EQ(q.y, 0.0);
}

TEST(Projection, MilliDegreeOfLatitude) {
    const auto q = project_local({0, 0.001}, {0, 0});
    EXPECT_EQ(q.x, 0.0);
    EXPECT_NEAR(q.y, 111.19492664455873, 1e-9);
}

TEST(Projection, RoundTrip) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> off(-0.5, 0.5);
    for (int i = 0; i < 1000; ++i) {
        const GeoPoint p{kManhattan.lon + off(rng), kManhattan.lat + off(rng)};
        const auto back = unproject_local(project_local(p, kManhattan), kManhattan);
        EXPECT_NEAR(back.lon, p.lon, 1e-9);
        EXPECT_NEAR(back.lat, p.lat, 1e-9);
    }
}

TEST(Projection, RejectsFarPoints) {
    EXPECT_THROW(project_local({0, 1.5}, {0, 0}), ValidationError);
    EXPECT_THROW(project_local({0, 91}, {0, 0}), ValidationError);
}

TEST(Polyline, RejectsDegenerateInput) {
    EXPECT_THROW(Polyline("a", {kManhattan}), ValidationError);
    EXPECT_THROW(Polyline("a", {kManhattan, kManhattan}), ValidationError);
}

TEST(Polyline, MeridianSegment) {
    EXPECT_NEAR(polyline_length(meridian_line(100)), 100.0, 0.01);
    const Polyline tiny("t", {{-74, 40.7}, {-74, 40.7009}});
    EXPECT_NEAR(polyline_length(tiny), 6'371'000.0 * 0.0009 * std::numbers::pi / 180.0, 1e-6);
}

TEST(Polyline, LShape) {
    const GeoPoint origin{-73.95, 40.75};
    std::vector<GeoPoint> v{unproject_local({0, 0}, origin), unproject_local({50, 0}, origin),
                            unproject_local({50, 50}, origin)};
    EXPECT_NEAR(polyline_length(Polyline("L", v)), 100.0, 0.01);
}

TEST(Sampling, ExactMultiples) {
    const auto pts = sample_equidistant(meridian_line(150), 50);
    ASSERT_EQ(pts.size(), 4u);
    for (std::size_t k = 0; k < pts.size(); ++k) {
        EXPECT_NEAR(pts[k].chainage_m, 50.0 * static_cast<double>(k), kChainageSlackM);
        EXPECT_EQ(pts[k].point_id, "m#" + std::to_string(k));
        EXPECT_EQ(pts[k].source_polyline, "m");
    }
}

TEST(Sampling, FloorRuleDropsPartialStep) {
    const auto pts = sample_equidistant(meridian_line(149), 50);
    ASSERT_EQ(pts.size(), 3u);
    EXPECT_DOUBLE_EQ(pts.back().chainage_m, 100.0);
}

TEST(Sampling, RejectsNonPositiveSpacing) {
    EXPECT_THROW(sample_equidistant(meridian_line(100), 0), ValidationError);
    EXPECT_THROW(sample_equidistant(meridian_line(100), -5), ValidationError);
}

TEST(Sampling, SpacingAlongRandomWalks) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const auto v = random_walk(rng, 20);
        const Polyline line("w", v);
        const auto pts = sample_equidistant(line, 50);
        EXPECT_EQ(pts.size(), static_cast<std::size_t>(std::floor(line.length_m() / 50)) + 1);
        // Haversine arc-length walk to each sample.
        std::vector<double> seg_start{0};
        for (std::size_t i = 1; i < v.size(); ++i) seg_start.push_back(seg_start.back() + haversine_m(v[i - 1], v[i]));
        double prev = -1;
        for (const auto& p : pts) {
            double best = 1e18, along = 0;
            for (std::size_t i = 0; i + 1 < v.size(); ++i) {
                const double a = haversine_m(v[i], p.location), b = haversine_m(p.location, v[i + 1]);
                const double slack = a + b - haversine_m(v[i], v[i + 1]);
                if (slack < best) best = slack, along = seg_start[i] + a;
            }
            if (prev >= 0) EXPECT_NEAR(along - prev, 50.0, 0.1);
            prev = along;
        }
    }
}

TEST(Containment, UnitSquare) {
    const Polygon sq(square_ring(0, 0, 1));
    EXPECT_TRUE(point_in_polygon({0.5, 0.5}, sq));
    EXPECT_FALSE(point_in_polygon({2, 2}, sq));
    EXPECT_TRUE(point_in_polygon({1, 0.5}, sq));  // edge
    EXPECT_TRUE(point_in_polygon({0, 0}, sq));    // vertex
}

TEST(Containment, HolesSubtractButEdgesCount) {
    const Polygon donut(square_ring(0, 0, 4), {square_ring(1, 1, 2)});
    EXPECT_TRUE(point_in_polygon({0.5, 0.5}, donut));
    EXPECT_FALSE(point_in_polygon({2, 2}, donut));
    EXPECT_TRUE(point_in_polygon({1, 2}, donut));
}

TEST(Containment, ConvexOracle) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.2, 1.2);
    for (int poly = 0; poly < 20; ++poly) {
        const auto ring = random_convex_ring(rng, {0, 0}, 1.0, 0.7, 3 + poly % 12);
        const Polygon p(ring);
        for (int i = 0; i < 500; ++i) {
            const GeoPoint q{u(rng), u(rng)};
            ASSERT_EQ(point_in_polygon(q, p), convex_contains(ring, q)) << to_string(q);
        }
    }
}

TEST(Polygon, RejectsSelfIntersection) {
    EXPECT_THROW(Polygon({{0, 0}, {1, 1}, {1, 0}, {0, 1}, {0, 0}}), ValidationError);  // bow tie
    EXPECT_THROW(Polygon({{0, 0}, {1, 0}, {1, 1}, {0, 0.9}}), ValidationError);          // open
    EXPECT_THROW(Polygon({{0, 0}, {1, 0}, {0, 0}}), ValidationError);                    // too short
    EXPECT_THROW(Polygon({{0, 0}, {2, 0}, {1, 0}, {1, 1}, {0, 0}}), ValidationError);    // folds back
}

TEST(Polygon, AreaOfSmallSquare) {
    const GeoPoint o{-73.95, 40.75};
    const Ring ring{offset_m(o, 0, 0), offset_m(o, 1000, 0), offset_m(o, 1000, 1000), offset_m(o, 0, 1000),
                    offset_m(o, 0, 0)};
    EXPECT_NEAR(polygon_area_km2(Polygon(ring)), 1.0, 1e-3);
}

TEST(Join, GridOfSquares) {
    const std::vector<CommunityDistrict> d{square_district("a", 0, 0), square_district("b", 1, 0),
                                           square_district("c", 0, 1), square_district("d", 1, 1)};
    const std::vector<GeoPoint> pts{{0.5, 0.5}, {1.5, 1.5}, {5, 5}, {1, 0.5}};
    const auto r = spatial_join(pts, d, [](const GeoPoint& p) { return p; });
    EXPECT_EQ(r.total, 4u);
    ASSERT_EQ(r.buckets.at("a").size(), 2u);  // (1, 0.5) sits on the a|b edge: smallest id wins
    EXPECT_EQ(r.buckets.at("d").size(), 1u);
    EXPECT_EQ(r.unassigned_count(), 1u);
    EXPECT_DOUBLE_EQ(r.unassigned_fraction(), 0.25);
    EXPECT_EQ(r.buckets.count("b"), 0u);
}

TEST(Join, ReservedAndDuplicateIds) {
    std::vector<CommunityDistrict> d{square_district(kUnassigned, 0, 0)};
    EXPECT_THROW(validate_districts(d), ValidationError);
    d = {square_district("x", 0, 0), square_district("x", 2, 0)};
    EXPECT_THROW(validate_districts(d), ValidationError);
}

TEST(Join, BruteForceAgreement) {
    std::mt19937_64 rng(5);
    std::vector<CommunityDistrict> d;
    std::vector<std::vector<GeoPoint>> rings;
    for (int i = 0; i < 9; ++i) {
        const GeoPoint c{-74.0 + 0.02 * (i % 3), 40.7 + 0.02 * (i / 3)};
        rings.push_back(random_convex_ring(rng, c, 0.0099, 0.0099, 8));
        d.push_back(make_district("cd" + std::to_string(8 - i), {Polygon(rings.back())}));
    }
    std::uniform_real_distribution<double> ux(-74.012, -73.948), uy(40.688, 40.752);
    std::vector<GeoPoint> pts(2000);
    for (auto& p : pts) p = {ux(rng), uy(rng)};
    const auto r = spatial_join(pts, d, [](const GeoPoint& p) { return p; }, 4);
    std::map<std::string, std::vector<GeoPoint>> expect;
    for (const auto& p : pts) {
        std::string best = kUnassigned;
        for (std::size_t i = 0; i < rings.size(); ++i)
            if (convex_contains(rings[i], p) && (best == kUnassigned || d[i].community_id < best))
                best = d[i].community_id;
        expect[best].push_back(p);
    }
    ASSERT_EQ(r.buckets.size(), expect.size());
    for (const auto& [id, members] : expect) {
        ASSERT_EQ(r.buckets.at(id).size(), members.size()) << id;
        for (std::size_t k = 0; k < members.size(); ++k) EXPECT_EQ(r.buckets.at(id)[k], members[k]);
    }
}

TEST(Subsample, FewerThanRequestedKeepsAll) {
    std::vector<SamplePoint> pts;
    for (int i = 0; i < 120; ++i) pts.push_back({"p" + std::to_string(i), kManhattan, "l", 0, "c1"});
    pts.push_back({"orphan", kManhattan, "l", 0, std::nullopt});
    const auto out = subsample_per_community(pts, 200, 1);
    EXPECT_EQ(out.size(), 120u);
    EXPECT_TRUE(std::is_sorted(out.begin(), out.end(),
                               [](const auto& a, const auto& b) { return a.point_id < b.point_id; }));
}

TEST(Subsample, DeterministicAcrossOrderAndThreads) {
    std::vector<SamplePoint> pts;
    for (int c = 0; c < 6; ++c)
        for (int i = 0; i < 500; ++i)
            pts.push_back({"c" + std::to_string(c) + "#" + std::to_string(i), kManhattan, "l", 0,
                           "c" + std::to_string(c)});
    const auto a = subsample_per_community(pts, 200, 42, 1);
    std::mt19937_64 rng(1);
    auto shuffled = pts;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto b = subsample_per_community(shuffled, 200, 42, 8);
    EXPECT_EQ(a.size(), 1200u);
    EXPECT_EQ(a, b);
    const auto c = subsample_per_community(pts, 200, 43, 1);
    EXPECT_NE(a, c);
    // Selection within a community is a proper subset without repeats.
    std::set<std::string> ids;
    for (const auto& p : a) ids.insert(p.point_id);
    EXPECT_EQ(ids.size(), a.size());
}

TEST(RoadLength, SplitsAcrossDistricts) {
    const GeoPoint o{-73.95, 40.75};
    const auto west = make_district("w", {Polygon({offset_m(o, -1000, -500), offset_m(o, 0, -500),
                                                   offset_m(o, 0, 500), offset_m(o, -1000, 500),
                                                   offset_m(o, -1000, -500)})});
    const auto east = make_district("e", {Polygon({offset_m(o, 0, -500), offset_m(o, 1000, -500),
                                                   offset_m(o, 1000, 500), offset_m(o, 0, 500),
                                                   offset_m(o, 0, -500)})});
    const Polyline road("r", {offset_m(o, -600, 0), offset_m(o, 400, 0)});
    const auto km = road_length_by_district({road}, {west, east});
    EXPECT_NEAR(km.at("w"), 0.6, 0.011);
    EXPECT_NEAR(km.at("e"), 0.4, 0.011);
    EXPECT_NEAR(km.at("w") + km.at("e"), road.length_m() / 1000, 1e-9);
}
