#include "knaster/geom.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace knaster;

namespace {

Point2 P(const char* x, const char* y) { return {Q(x), Q(y)}; }
Polyline square() { return {{P("0", "0"), P("1", "0"), P("1", "1"), P("0", "1"), P("0", "0")}}; }

}  // namespace

TEST(Rational, ParseAndPrint) {
    EXPECT_EQ(Q("6/8").str(), "3/4");
    EXPECT_EQ(Q("-4/2").str(), "-2");
    EXPECT_EQ(Q("7").str(), "7");
    EXPECT_THROW(Q("1/0"), std::invalid_argument);
    EXPECT_THROW(Q("1/-3"), std::invalid_argument);
    EXPECT_THROW(Q("abc"), std::invalid_argument);
    EXPECT_THROW(Rational(1) / Rational(0), std::domain_error);
}

TEST(SegIntersection, Crossing) {
    auto x = seg_intersection({P("0", "0"), P("1", "1")}, {P("0", "1"), P("1", "0")});
    ASSERT_TRUE(std::holds_alternative<PointIntersection>(x));
    EXPECT_EQ(std::get<PointIntersection>(x).p, P("1/2", "1/2"));
}

TEST(SegIntersection, ParallelDisjoint) {
    auto x = seg_intersection({P("0", "0"), P("1", "0")}, {P("0", "1"), P("1", "1")});
    EXPECT_TRUE(std::holds_alternative<NoIntersection>(x));
}

TEST(SegIntersection, CollinearOverlap) {
    auto x = seg_intersection({P("0", "0"), P("1", "0")}, {P("1/2", "0"), P("2", "0")});
    ASSERT_TRUE(std::holds_alternative<OverlapIntersection>(x));
    EXPECT_EQ(std::get<OverlapIntersection>(x).s, (Segment{P("1/2", "0"), P("1", "0")}));
}

TEST(SegIntersection, SymmetricOnRandomSegments) {
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> d(0, 4);
    auto rp = [&] { return Point2{Rational(d(rng), 4), Rational(d(rng), 4)}; };
    for (int it = 0; it < 2000; ++it) {
        Segment s1{rp(), rp()}, s2{rp(), rp()};
        if (s1.a == s1.b || s2.a == s2.b) continue;
        auto x = seg_intersection(s1, s2);
        auto y = seg_intersection(s2, s1);
        ASSERT_EQ(x.index(), y.index());
        if (auto* p = std::get_if<PointIntersection>(&x)) {
            EXPECT_EQ(p->p, std::get<PointIntersection>(y).p);
        }
    }
}

TEST(PolylineSimple, Examples) {
    EXPECT_TRUE(polyline_simple({{P("0", "0"), P("1", "0"), P("1", "1")}}));
    EXPECT_FALSE(polyline_simple({{P("0", "0"), P("1", "1"), P("1", "0"), P("0", "1")}}));
    EXPECT_FALSE(polyline_simple({{P("0", "0"), P("1", "0"), P("1/2", "0")}}));
}

TEST(MinClearance, Examples) {
    auto c1 = min_clearance_sq({{P("0", "0"), P("1", "0"), P("1", "1"), P("0", "1")}});
    ASSERT_FALSE(c1.infinite);
    EXPECT_EQ(c1.value, 1);
    auto c2 = min_clearance_sq(
        {{P("0", "0"), P("2", "0"), P("2", "1"), P("0", "1"), P("0", "1/2"), P("1", "1/2")}});
    ASSERT_FALSE(c2.infinite);
    EXPECT_EQ(c2.value, Q("1/4"));
    EXPECT_TRUE(min_clearance_sq({{P("0", "0"), P("1", "0")}}).infinite);
}

TEST(MinClearance, PositiveForSimpleRandomPolylines) {
    std::mt19937 rng(11);
    std::uniform_int_distribution<int> d(0, 8);
    int checked = 0;
    for (int it = 0; it < 400; ++it) {
        Polyline p;
        for (int k = 0; k < 5; ++k) p.vertices.push_back({Rational(d(rng), 8), Rational(d(rng), 8)});
        if (!polyline_simple(p)) continue;
        ++checked;
        auto c = min_clearance_sq(p);
        ASSERT_FALSE(c.infinite);
        EXPECT_GT(c.value, 0);
    }
    EXPECT_GT(checked, 10);
}

TEST(PointVsClosedCurve, Square) {
    EXPECT_EQ(point_vs_closed_curve(P("1/2", "1/2"), square()), Location::Inside);
    EXPECT_EQ(point_vs_closed_curve(P("2", "0"), square()), Location::Outside);
    EXPECT_EQ(point_vs_closed_curve(P("1", "1/2"), square()), Location::OnBoundary);
}

TEST(PointVsClosedCurve, RejectsNonSimpleLoop) {
    Polyline bow{{P("0", "0"), P("1", "1"), P("1", "0"), P("0", "1")}};
    EXPECT_THROW(point_vs_closed_curve(P("0", "0"), bow), Error);
}

TEST(PointVsClosedCurve, TranslationInvariant) {
    Polyline l{{P("0", "0"), P("3", "0"), P("3", "3"), P("2", "1"), P("1", "3"), P("0", "3")}};
    std::mt19937 rng(3);
    std::uniform_int_distribution<int> d(-8, 32);
    for (int it = 0; it < 300; ++it) {
        Point2 pt{Rational(d(rng), 8), Rational(d(rng), 8)};
        Point2 shift{Rational(d(rng), 5), Rational(d(rng), 7)};
        Polyline moved;
        for (const auto& v : l.vertices) moved.vertices.push_back(v + shift);
        EXPECT_EQ(point_vs_closed_curve(pt, l), point_vs_closed_curve(pt + shift, moved));
    }
}

TEST(Polyline, SimpleAgreesWithAllPairsScan) {
    auto brute = [](const Polyline& p) {
        const std::size_t n = p.segment_count();
        for (std::size_t i = 0; i + 1 < p.vertices.size(); ++i)
            if (p.vertices[i] == p.vertices[i + 1]) return false;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                Intersection x = seg_intersection(p.segment(i), p.segment(j));
                if (std::holds_alternative<NoIntersection>(x)) continue;
                auto* pt = std::get_if<PointIntersection>(&x);
                if (j == i + 1 && pt != nullptr && pt->p == p.segment(i).b) continue;
                return false;
            }
        return n > 0;
    };
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> coord(0, 6), len(2, 7);
    int simple = 0;
    for (int trial = 0; trial < 3000; ++trial) {
        Polyline p;
        const int n = len(rng);
        for (int k = 0; k < n; ++k) p.vertices.push_back({Rational(coord(rng), 6), Rational(coord(rng), 6)});
        ASSERT_EQ(polyline_simple(p), brute(p)) << "trial " << trial;
        simple += brute(p);
    }
    EXPECT_GT(simple, 100);
}
