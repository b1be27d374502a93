#include "knaster/knaster.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace knaster;

namespace {

// Extrema of T_m strictly inside (lo,hi): every interior j/m.
long tent_extrema_oracle(long m, const Rational& lo, const Rational& hi) {
    long c = 0;
    for (long j = 1; j < m; ++j)
        if (lo < Rational(j, m) && Rational(j, m) < hi) ++c;
    return c;
}

}  // namespace

TEST(Coordinate, Examples) {
    auto t2 = InverseSystem::constant(tent(2));
    EXPECT_EQ(checked_coordinate(t2, ILPoint::constant(Q("2/3")), 7), Q("2/3"));
    auto p = ILPoint::explicit_prefix({Q("1/2"), Q("3/4")});
    EXPECT_EQ(checked_coordinate(t2, p, 2), Q("3/4"));
    EXPECT_EQ(coordinate(p, 1), Q("1/2"));
    EXPECT_THROW(coordinate(p, 3), Error);
    auto t16 = InverseSystem::constant(tent(16));
    EXPECT_EQ(checked_coordinate(t16, ILPoint::constant(Q("2/15")), 12), Q("2/15"));
    EXPECT_THROW(check_thread(t2, ILPoint::explicit_prefix({Q("1/2"), Q("1/3")}), 2), Error);
}

TEST(Coordinate, PeriodicThreadConsistency) {
    // 2/5 -> 4/5 under T_2, and T_2(2/5) = 4/5, T_2(4/5) = 2/5: period-2 orbit.
    auto t2 = InverseSystem::constant(tent(2));
    ILPoint p{{}, {Q("2/5"), Q("4/5")}};
    for (long i = 1; i < 20; ++i) EXPECT_EQ(coordinate(p, i), t2.map(i)(coordinate(p, i + 1)));
}

TEST(System, KnasterSemantics) {
    EXPECT_TRUE(InverseSystem::constant(tent(3)).knaster());
    EXPECT_FALSE(InverseSystem::constant(PLMap::identity()).knaster());
    InverseSystem mixed{{tent(2), tent(3)}, {tent(4)}};
    EXPECT_EQ(mixed.map(2), tent(3));
    EXPECT_EQ(mixed.map(9), tent(4));
}

TEST(Evidence, Examples) {
    auto t16 = InverseSystem::constant(tent(16));
    auto a = ILPoint::constant(Q("2/15")), b = ILPoint::constant(Q("2/5"));
    EXPECT_EQ(composant_evidence(t16, a, b, 8), 8);
    EXPECT_EQ(composant_evidence(t16, a, a, 8), 0);
    // Same arc component under T_2: 0 and the thread 1/4, 1/8, ... via 0-branch.
    auto t2 = InverseSystem::constant(tent(2));
    std::vector<Rational> xs;
    for (long i = 0; i < 12; ++i) xs.push_back(Rational(1, 4) / Rational(1L << i));
    EXPECT_EQ(composant_evidence(t2, ILPoint::constant(Q("0")), ILPoint::explicit_prefix(xs), 10), 0);
}

TEST(Evidence, MonotoneAndSymmetric) {
    auto t2 = InverseSystem::constant(tent(2));
    ILPoint p{{}, {Q("2/5"), Q("4/5")}}, q = ILPoint::constant(Q("2/3"));
    long prev = 0;
    for (long h = 1; h <= 10; ++h) {
        long e = composant_evidence(t2, p, q, h);
        EXPECT_GE(e, prev);
        EXPECT_EQ(e, composant_evidence(t2, q, p, h));
        prev = e;
    }
    EXPECT_THROW(composant_evidence(t2, ILPoint::explicit_prefix({Q("1/2"), Q("1/3")}), q, 1), Error);
}

TEST(ComposedExtrema, TentSystemMatchesClosedForm) {
    auto t2 = InverseSystem::constant(tent(2));
    EXPECT_EQ(extrema_between_composed(t2, 1, 5, Q("2/3"), Q("1/3")), 5u);  // T_16: j = 6..10
    EXPECT_EQ(extrema_between_composed(t2, 1, 2, Q("0"), Q("1")), 1u);
    EXPECT_EQ(extrema_between_composed(t2, 3, 4, Q("1/3"), Q("1/3")), 0u);
    for (long i = 1; i <= 3; ++i)
        for (long k = i + 1; k <= 8; ++k)
            for (auto [lo, hi] : {std::pair{Q("1/7"), Q("5/6")}, {Q("0"), Q("1")}, {Q("2/9"), Q("1/3")}}) {
                long m = 1L << (k - i);
                EXPECT_EQ(static_cast<long>(extrema_between_composed(t2, i, k, lo, hi)), tent_extrema_oracle(m, lo, hi));
            }
}

TEST(ComposedExtrema, AgreesWithMaterializedComposition) {
    InverseSystem sys{{tent(3), compose(tent(2), tent(3))}, {tent(2), tent(5)}};
    for (long i = 1; i <= 3; ++i)
        for (long k = i + 1; k <= 5; ++k) {
            PLMap g = sys.map(k - 1);
            for (long j = k - 2; j >= i; --j) g = compose(sys.map(j), g);
            Rational lo = Q("3/17"), hi = Q("13/14");
            EXPECT_EQ(extrema_between_composed(sys, i, k, lo, hi), interior_extrema(g, lo, hi).size());
            auto ch = chain(sys, i, k);
            for (auto x : {Q("1/11"), Q("1/2"), Q("7/9")}) {
                EXPECT_EQ(eval_chain(ch, x), g(x));
                EXPECT_EQ(chain_increasing_at(ch, x), branch_at(g, x) == Branch::Increasing);
            }
        }
}

TEST(IndexSets, SinglePointTent2) {
    auto t2 = InverseSystem::constant(tent(2));
    std::vector<ILPoint> pts{ILPoint::constant(Q("2/3"))};
    auto sets = find_index_sets(t2, pts, 1, 8);
    ASSERT_EQ(sets.J.size(), 1u);
    EXPECT_EQ(sets.J[0], (std::vector<long>{2, 6, 8}));
    EXPECT_TRUE(index_sets_valid(t2, pts, sets));
}

TEST(IndexSets, TwoPointsTent16) {
    auto t16 = InverseSystem::constant(tent(16));
    std::vector<ILPoint> pts{ILPoint::constant(Q("2/15")), ILPoint::constant(Q("2/5"))};
    auto sets = find_index_sets(t16, pts, 2, 10);
    ASSERT_EQ(sets.J.size(), 2u);
    EXPECT_GE(sets.J[1].size(), 2u);
    EXPECT_TRUE(index_sets_valid(t16, pts, sets));
    // Between 2/15 and 2/5 a single T_16 has only 4 extrema, below 4i = 8.
    EXPECT_NE(sets.J[1][1], sets.J[1][0] + 1);
}

TEST(IndexSets, HorizonTooShort) {
    auto t2 = InverseSystem::constant(tent(2));
    EXPECT_THROW(find_index_sets(t2, {ILPoint::constant(Q("2/3"))}, 1, 1), Error);
}

TEST(Example, NEqualsOne) {
    auto ex = build_example_instance(1);
    EXPECT_EQ(ex.k, 2);
    EXPECT_EQ(ex.m, 4);
    EXPECT_EQ(ex.factor.plan.patterns[0].lo, Q("1/2"));
    EXPECT_EQ(ex.factor.plan.patterns[0].hi, 1);
    EXPECT_EQ(strs(ex.z), (std::vector<std::string>{"2/3"}));
    EXPECT_EQ(ex.factor.s, tent(4));
    EXPECT_EQ(ex.f, tent(4));
    EXPECT_EQ(strs(ex.zprime), (std::vector<std::string>{"2/3"}));
    EXPECT_TRUE(ex.removability.all_removable);
}

TEST(Example, NEqualsTwo) {
    auto ex = build_example_instance(2);
    EXPECT_EQ(ex.k, 4);
    EXPECT_EQ(ex.m, 16);
    EXPECT_EQ(strs(ex.z), (std::vector<std::string>{"2/15", "2/5"}));
    EXPECT_EQ(strs(ex.zprime), (std::vector<std::string>{"2/45", "4/5"}));
    EXPECT_EQ(ex.f(Q("2/45")), Q("2/45"));
    EXPECT_EQ(ex.f(Q("4/5")), Q("4/5"));
    EXPECT_TRUE(canonical_equal(compose(tent(3), ex.factor.s), tent(16)));
    EXPECT_TRUE(ex.removability.all_removable);
}

TEST(Example, NEqualsThree) {
    auto ex = build_example_instance(3);
    EXPECT_EQ(ex.k, 5);
    EXPECT_EQ(ex.m, 32);
    EXPECT_TRUE(factor_invariant_failures(ex.factor).empty());
    EXPECT_TRUE(ex.removability.all_removable);
}

TEST(Example, MarkedThreadsHaveFullEvidence) {
    for (long n = 1; n <= 3; ++n) {
        auto ex = build_example_instance(n);
        auto sys = InverseSystem::constant(tent(ex.m));
        for (std::size_t a = 0; a < ex.z.size(); ++a)
            for (std::size_t b = a + 1; b < ex.z.size(); ++b)
                for (long h : {1L, 4L, 8L})
                    EXPECT_EQ(composant_evidence(sys, ILPoint::constant(ex.z[a]), ILPoint::constant(ex.z[b]), h), h);
    }
}
