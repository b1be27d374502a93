#include "knaster/tentfactor.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace knaster;

namespace {

MarkedSet Zs(std::initializer_list<const char*> xs) {
    std::vector<Rational> v;
    for (auto x : xs) v.push_back(Q(x));
    return MarkedSet(v);
}

// Fixed point of T_m on its increasing branch [j/m,(j+1)/m], j even: m x - j = x.
Rational fixed_point_oracle(long m, long j) { return Rational(j, m - 1); }

}  // namespace

TEST(ChoosePatterns, Examples) {
    auto p = choose_patterns(16, 2);
    EXPECT_EQ(strs(p.a), (std::vector<std::string>{"1/8", "1/4", "5/8"}));
    ASSERT_EQ(p.patterns.size(), 2u);
    EXPECT_EQ(p.patterns[0].teeth, 1);
    EXPECT_EQ(p.patterns[1].teeth, 3);
    auto q = choose_patterns(4, 1);
    EXPECT_EQ(q.patterns[0].lo, Q("1/2"));
    EXPECT_EQ(q.patterns[0].hi, 1);
    EXPECT_THROW(choose_patterns(4, 3), Error);
}

TEST(BranchFixedPoint, Examples) {
    EXPECT_EQ(branch_fixed_point(16, Q("1/8"), Q("3/16")), Q("2/15"));
    EXPECT_EQ(branch_fixed_point(16, Q("3/8"), Q("7/16")), Q("2/5"));
    EXPECT_EQ(branch_fixed_point(2, Q("0"), Q("1/2")), 0);
    EXPECT_THROW(branch_fixed_point(16, Q("3/16"), Q("1/4")), Error);  // decreasing
    EXPECT_THROW(branch_fixed_point(16, Q("1/8"), Q("1/4")), Error);   // not linear
}

TEST(BranchFixedPoint, MatchesClosedForm) {
    for (long m : {4L, 8L, 16L, 32L})
        for (long j = 0; j < m; j += 2) {
            Rational x = branch_fixed_point(m, Rational(j, m), Rational(j + 1, m));
            EXPECT_EQ(x, fixed_point_oracle(m, j));
            EXPECT_EQ(tent(m)(x), x);
        }
}

TEST(BuildS, NEqualsOneIsTent) {
    auto fi = build_s(4, Zs({"2/3"}), choose_patterns(4, 1));
    EXPECT_EQ(fi.s, tent(4));
}

TEST(BuildS, Example16) {
    auto fi = build_s(16, Zs({"2/15", "2/5"}), choose_patterns(16, 2));
    EXPECT_EQ(fi.s(Q("2/15")), Q("2/45"));
    EXPECT_EQ(fi.s(Q("2/5")), Q("4/5"));
    EXPECT_TRUE(canonical_equal(compose(tent(3), fi.s), tent(16)));
    EXPECT_TRUE(factor_invariant_failures(fi).empty());
    // Off the patterns s is T_16/3, e.g. at 1/16.
    EXPECT_EQ(fi.s(Q("1/16")), Q("1/3"));
}

TEST(BuildS, RejectsZOutsideFirstHalf) {
    try {
        build_s(16, Zs({"1/5", "2/5"}), choose_patterns(16, 2));
        FAIL() << "expected HypothesisViolated";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::HypothesisViolated);
        EXPECT_NE(std::string(e.what()).find("first half"), std::string::npos);
    }
}

TEST(BuildS, CaseBHalfTooth) {
    // m=9, n=2: P_1 = [2/9,4/9] (one tooth), P_2 = [2/3,1] with 3/2 teeth.
    PatternPlan plan;
    plan.a = {Q("2/9"), Q("4/9"), Q("1")};
    plan.patterns = {{Q("2/9"), Q("4/9"), Q("1"), PatternCase::A}, {Q("2/3"), Q("1"), Q("3/2"), PatternCase::B}};
    auto fi = build_s(9, MarkedSet({Q("1/4"), Q("17/18")}), plan);
    EXPECT_TRUE(factor_invariant_failures(fi).empty());
    EXPECT_EQ(fi.s(Q("1")), 1);
    EXPECT_EQ(fi.s(Q("2/3")), 0);
    EXPECT_EQ(fi.s(Q("17/18")), Q("5/6"));
    EXPECT_THROW(build_s(9, MarkedSet({Q("1/4"), Q("5/6")}), plan), Error);  // not in the half-tooth
}

TEST(BuildS, RandomPlansSatisfyInvariants) {
    std::mt19937 rng(8);
    for (int it = 0; it < 40; ++it) {
        long n = 1 + static_cast<long>(rng() % 3);
        long m = 2 * (1 + n * n) + 2 * static_cast<long>(rng() % 6);
        PatternPlan plan = choose_patterns(m, n);
        std::vector<Rational> z;
        for (long i = 1; i <= n; ++i) {
            const auto& P = plan.patterns[i - 1];
            Rational w = (P.hi - P.lo) / Rational(2 * i - 1);
            Rational lo = P.lo + Rational(i - 1) * w;
            // Any strictly interior point of the rising half.
            Rational t(1 + static_cast<long>(rng() % 7), 8);
            z.push_back(lo + t * w / Rational(2));
        }
        auto fi = build_s(m, MarkedSet(z), plan);
        EXPECT_TRUE(factor_invariant_failures(fi).empty()) << "m=" << m << " n=" << n;
    }
}

TEST(ShiftRemovability, Examples) {
    auto fi = build_s(16, Zs({"2/15", "2/5"}), choose_patterns(16, 2));
    EXPECT_TRUE(check_shift_removability(fi, 3, Zs({"2/45", "4/5"})));
    auto one = build_s(4, Zs({"2/3"}), choose_patterns(4, 1));
    EXPECT_TRUE(check_shift_removability(one, 1, Zs({"2/3"})));
    // 8/45 maps to 2/15 under T_3, but on the decreasing branch [1/3,2/3]... (T_3(x) = 2 - 3x).
    EXPECT_THROW(check_shift_removability(fi, 3, Zs({"28/45", "4/5"})), Error);
}

TEST(ShiftRemovability, RandomEll) {
    // z'_i = preimage of z_i on an increasing branch of T_ell.
    auto fi = build_s(16, Zs({"2/15", "2/5"}), choose_patterns(16, 2));
    for (long ell = 1; ell <= 5; ++ell) {
        for (long branch = 0; branch < ell; branch += 2) {
            std::vector<Rational> zp;
            for (const auto& z : fi.Z.points) zp.push_back((z + Rational(branch)) / Rational(ell));
            EXPECT_TRUE(check_shift_removability(fi, ell, MarkedSet(zp))) << ell << " " << branch;
        }
    }
}
