#ifndef KNASTER_TENTFACTOR_HPP
#define KNASTER_TENTFACTOR_HPP

#include "knaster/error.hpp"
#include "knaster/plmap.hpp"
#include "knaster/visor.hpp"

#include <string>
#include <vector>

namespace knaster {

enum class PatternCase { A, B };

inline const char* to_string(PatternCase c) { return c == PatternCase::A ? "A" : "B"; }

struct Pattern {
    Rational lo;
    Rational hi;
    Rational teeth;  // 2i-1 in case A, n-1/2 in case B
    PatternCase kind = PatternCase::A;
    friend bool operator==(const Pattern&, const Pattern&) = default;
};

struct PatternPlan {
    std::vector<Rational> a;  // a_0 < ... < a_n; packed plans have P_i = [a_{i-1}, a_i]
    std::vector<Pattern> patterns;
    friend bool operator==(const PatternPlan&, const PatternPlan&) = default;
};

/// Leftmost packing: skip the first tooth of T_m, then lay P_i with 2i-1
/// whole teeth end to end. Every P_i is case A.
inline PatternPlan choose_patterns(long m, long n) {
    if (m < 1 || n < 1) throw Error(ErrorKind::PreconditionViolated, "choose_patterns needs m, n >= 1");
    const long needed = 1 + n * n;  // skipped tooth + sum of (2i-1)
    if (2 * needed > m)
        throw Error(ErrorKind::InsufficientTeeth, "T_" + std::to_string(m) + " has " + Rational(m, 2).str() +
                                                      " teeth, need " + std::to_string(needed));
    PatternPlan plan;
    plan.a.push_back(Rational(2, m));
    for (long i = 1; i <= n; ++i) {
        Rational next = plan.a.back() + Rational(2 * (2 * i - 1), m);
        plan.patterns.push_back({plan.a.back(), next, Rational(2 * i - 1), PatternCase::A});
        plan.a.push_back(next);
    }
    return plan;
}

/// Exact solution of T_m(x) = x on [lo,hi], where T_m must be linear and
/// increasing.
inline Rational branch_fixed_point(long m, const Rational& lo, const Rational& hi) {
    const PLMap t = tent(m);
    if (!(lo < hi)) throw Error(ErrorKind::NoFixedPointOnBranch, "empty branch");
    for (const auto& p : t.breakpoints())
        if (lo < p.x && p.x < hi) throw Error(ErrorKind::NoFixedPointOnBranch, "T_m is not linear on the branch");
    const Rational k = (t(hi) - t(lo)) / (hi - lo);
    if (k.sign() <= 0) throw Error(ErrorKind::NoFixedPointOnBranch, "branch is not increasing");
    if (k == 1) {
        if (t(lo) == lo) return lo;
        throw Error(ErrorKind::NoFixedPointOnBranch, "parallel to the diagonal");
    }
    Rational x = (t(lo) - k * lo) / (Rational(1) - k);
    if (x < lo || hi < x) throw Error(ErrorKind::NoFixedPointOnBranch, "fixed point " + x.str() + " off the branch");
    return x;
}

struct FactorInstance {
    long m = 0;
    long n = 0;
    MarkedSet Z;
    PatternPlan plan;
    PLMap s;
    friend bool operator==(const FactorInstance&, const FactorInstance&) = default;
};

namespace detail {

inline Error hypothesis(const std::string& clause, std::size_t i, const std::string& what) {
    return Error(ErrorKind::HypothesisViolated, "clause " + clause + ", i=" + std::to_string(i) + ": " + what);
}

}  // namespace detail

/// Failed invariants of a factor instance, empty when all hold:
/// T_{2n-1} o s = T_m, the position bounds on s(z_i), and the increasing
/// branches at z_i and s(z_i).
inline std::vector<std::string> factor_invariant_failures(const FactorInstance& fi) {
    std::vector<std::string> out;
    const long q = 2 * fi.n - 1;
    const PLMap tq = tent(q);
    if (!canonical_equal(compose(tq, fi.s), tent(fi.m))) out.push_back("T_{2n-1} o s != T_m");
    for (std::size_t i = 1; i <= fi.Z.size(); ++i) {
        const Rational& z = fi.Z[i - 1];
        const Rational sz = fi.s(z);
        const long ii = static_cast<long>(i);
        if (sz < Rational(2 * ii - 2, q) || Rational(2 * ii - 1, q) < sz)
            out.push_back("s(z_" + std::to_string(i) + ") = " + sz.str() + " outside its bound");
        if (i > 1 && !(fi.s(fi.Z[i - 2]) < sz)) out.push_back("s not order-preserving at " + std::to_string(i));
        if (branch_at(fi.s, z) != Branch::Increasing) out.push_back("s not increasing at z_" + std::to_string(i));
        if (branch_at(tq, sz) != Branch::Increasing)
            out.push_back("T_{2n-1} not increasing at s(z_" + std::to_string(i) + ")");
    }
    return out;
}

/// Builds s_{m,Z}: T_m/(2n-1) off the patterns, a symmetric tooth of height
/// (2i-1)/(2n-1) on each case-A pattern, and the increasing line onto I on
/// a case-B pattern.
inline FactorInstance build_s(long m, const MarkedSet& Z, const PatternPlan& plan) {
    const long n = static_cast<long>(Z.size());
    if (n < 1 || plan.patterns.size() != Z.size())
        throw Error(ErrorKind::HypothesisViolated, "need one pattern per marked point");
    const PLMap tm = tent(m);
    const long q = 2 * n - 1;
    for (std::size_t k = 0; k < plan.patterns.size(); ++k) {
        const Pattern& P = plan.patterns[k];
        const std::size_t i = k + 1;
        const long ii = static_cast<long>(i);
        if (k > 0 && plan.patterns[k - 1].hi > P.lo) throw detail::hypothesis("disjoint", i, "patterns overlap");
        auto info = is_sawtooth(tm, P.lo, P.hi);
        if (!info || info->height != 1) throw detail::hypothesis("1", i, "not a height-1 sawtooth pattern of T_m");
        const Rational& z = Z[k];
        if (P.kind == PatternCase::A) {
            if (info->half_teeth != 2 * (2 * ii - 1))
                throw detail::hypothesis(i < Z.size() ? "1" : "2a", i, "pattern does not have 2i-1 teeth");
            const auto& bd = info->boundaries;
            if (z < bd[2 * i - 2] || bd[2 * i - 1] < z)
                throw detail::hypothesis(i < Z.size() ? "1" : "2a", i,
                                         "z_i not in the first half of tooth i of P_i");
        } else {
            if (i != Z.size()) throw detail::hypothesis("2b", i, "only P_n may be a case-B pattern");
            if (P.hi != 1) throw detail::hypothesis("2b", i, "1 is not in P_n");
            if (info->half_teeth != 2 * n - 1) throw detail::hypothesis("2b", i, "pattern does not have n-1/2 teeth");
            if (z < info->boundaries[info->boundaries.size() - 2])
                throw detail::hypothesis("2b", i, "z_n not in the half-tooth of P_n");
        }
    }

    auto inside = [&](const Rational& x) {
        for (const auto& P : plan.patterns)
            if (P.lo < x && x < P.hi) return true;
        return false;
    };
    std::vector<Breakpoint> pts;
    for (long j = 0; j <= m; ++j) {
        const Rational x(j, m);
        if (!inside(x)) pts.push_back({x, tm(x) / Rational(q)});
    }
    for (std::size_t k = 0; k < plan.patterns.size(); ++k) {
        const Pattern& P = plan.patterns[k];
        if (P.kind == PatternCase::A) {
            const long ii = static_cast<long>(k) + 1;
            pts.push_back({(P.lo + P.hi) / Rational(2), Rational(2 * ii - 1, q)});
        }
    }
    std::sort(pts.begin(), pts.end(), [](const Breakpoint& x, const Breakpoint& y) { return x.x < y.x; });
    // Case B ends at (1,1) rather than T_m(1)/(2n-1).
    if (!plan.patterns.empty() && plan.patterns.back().kind == PatternCase::B) pts.back().y = Rational(1);

    FactorInstance fi{m, n, Z, plan, PLMap(std::move(pts))};
    auto bad = factor_invariant_failures(fi);
    if (!bad.empty()) throw Error(ErrorKind::HypothesisViolated, bad.front());
    return fi;
}

/// Checks that every Z'-visor under s o T_ell is removable, after checking
/// T_ell(z_i') = z_i with T_ell increasing at z_i'.
inline bool check_shift_removability(const FactorInstance& fi, long ell, const MarkedSet& Zp) {
    if (Zp.size() != fi.Z.size()) throw Error(ErrorKind::HypothesisViolated, "|Z'| != |Z|");
    const PLMap tl = tent(ell);
    for (std::size_t i = 0; i < Zp.size(); ++i) {
        if (tl(Zp[i]) != fi.Z[i]) throw detail::hypothesis("T_l(z'_i) = z_i", i + 1, "fails");
        if (branch_at(tl, Zp[i]) != Branch::Increasing)
            throw detail::hypothesis("T_l increasing at z'_i", i + 1, "fails");
    }
    const PLMap f = compose(fi.s, tl);
    return all_visors_removable(f, Zp).all_removable;
}

}  // namespace knaster

#endif  // KNASTER_TENTFACTOR_HPP
