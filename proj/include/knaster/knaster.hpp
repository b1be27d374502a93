#ifndef KNASTER_KNASTER_HPP
#define KNASTER_KNASTER_HPP

#include "knaster/error.hpp"
#include "knaster/plmap.hpp"
#include "knaster/tentfactor.hpp"
#include "knaster/visor.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace knaster {

/// Bonding maps f_1, f_2, ...: an explicit prefix followed by a repeating
/// period (a single-map period gives a constant system).
struct InverseSystem {
    std::vector<PLMap> prefix;
    std::vector<PLMap> period;

    static InverseSystem constant(PLMap f) { return {{}, {std::move(f)}}; }

    const PLMap& map(long i) const {
        if (i < 1) throw Error(ErrorKind::DepthUnavailable, "bonding maps are indexed from 1");
        const auto k = static_cast<std::size_t>(i - 1);
        if (k < prefix.size()) return prefix[k];
        if (period.empty()) throw Error(ErrorKind::DepthUnavailable, "no map f_" + std::to_string(i));
        return period[(k - prefix.size()) % period.size()];
    }

    /// Open, non-homeomorphic bonding maps throughout (checked over prefix and period).
    bool knaster() const {
        auto ok = [](const PLMap& f) {
            auto r = is_open_interval_map(f);
            return r.open && !r.homeomorphism;
        };
        for (const auto& f : prefix)
            if (!ok(f)) return false;
        for (const auto& f : period)
            if (!ok(f)) return false;
        return !period.empty() || !prefix.empty();
    }
};

/// A thread <x_1, x_2, ...> given by an explicit prefix and a repeating tail.
struct ILPoint {
    std::vector<Rational> prefix;
    std::vector<Rational> cycle;

    static ILPoint constant(Rational c) { return {{}, {std::move(c)}}; }
    static ILPoint explicit_prefix(std::vector<Rational> xs) { return {std::move(xs), {}}; }

    bool available(long i) const { return i >= 1 && (static_cast<std::size_t>(i) <= prefix.size() || !cycle.empty()); }
    friend bool operator==(const ILPoint&, const ILPoint&) = default;
};

inline Rational coordinate(const ILPoint& p, long i) {
    if (!p.available(i)) throw Error(ErrorKind::DepthUnavailable, "coordinate " + std::to_string(i) + " not available");
    const auto k = static_cast<std::size_t>(i - 1);
    if (k < p.prefix.size()) return p.prefix[k];
    return p.cycle[(k - p.prefix.size()) % p.cycle.size()];
}

/// Checks f_i(x_{i+1}) = x_i for i = 1..depth-1.
inline void check_thread(const InverseSystem& sys, const ILPoint& p, long depth) {
    for (long i = 1; i < depth; ++i) {
        if (coordinate(p, i) != sys.map(i)(coordinate(p, i + 1)))
            throw Error(ErrorKind::InconsistentThread, "f_" + std::to_string(i) + "(x_" + std::to_string(i + 1) +
                                                           ") != x_" + std::to_string(i));
    }
}

/// Coordinate i after verifying the thread condition up to i.
inline Rational checked_coordinate(const InverseSystem& sys, const ILPoint& p, long i) {
    check_thread(sys, p, i);
    return coordinate(p, i);
}

/// Number of levels i <= horizon with an extremum of f_i strictly between
/// x_{i+1} and y_{i+1}. Growth with the horizon is evidence (never proof)
/// that the threads lie in different composants.
inline long composant_evidence(const InverseSystem& sys, const ILPoint& p, const ILPoint& q, long horizon) {
    check_thread(sys, p, horizon + 1);
    check_thread(sys, q, horizon + 1);
    long count = 0;
    for (long i = 1; i <= horizon; ++i) {
        const Rational x = coordinate(p, i + 1), y = coordinate(q, i + 1);
        if (x == y) continue;
        if (!interior_extrema(sys.map(i), min(x, y), max(x, y)).empty()) ++count;
    }
    return count;
}

/// The chain f_i o f_{i+1} o ... o f_{k-1}, outermost first.
inline std::vector<PLMap> chain(const InverseSystem& sys, long i, long k) {
    std::vector<PLMap> out;
    for (long j = i; j < k; ++j) out.push_back(sys.map(j));
    return out;
}

inline Rational eval_chain(const std::vector<PLMap>& ch, Rational x) {
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) x = (*it)(x);
    return x;
}

namespace detail {

inline std::uint64_t count_chain_extrema(const std::vector<PLMap>& ch, std::size_t depth, const Rational& lo,
                                         const Rational& hi, std::uint64_t cap) {
    if (depth == 0 || !(lo < hi)) return 0;
    const PLMap& h = ch[depth - 1];
    for (std::size_t i = 0; i < h.piece_count(); ++i)
        if (h.slope(i).is_zero()) throw Error(ErrorKind::PreconditionViolated, "bonding map has a plateau");
    const auto ext = interior_extrema(h, lo, hi);
    std::uint64_t total = ext.size();
    if (total >= cap) return total;
    std::vector<Rational> cuts{lo};
    cuts.insert(cuts.end(), ext.begin(), ext.end());
    cuts.push_back(hi);
    for (std::size_t k = 0; k + 1 < cuts.size() && total < cap; ++k) {
        const Rational a = h(cuts[k]), b = h(cuts[k + 1]);
        total += count_chain_extrema(ch, depth - 1, min(a, b), max(a, b), cap - total);
    }
    return total;
}

}  // namespace detail

/// Extrema of the composed chain strictly between lo and hi, counted lap by
/// lap so large compositions are never materialized. Saturates at `cap`.
/// Requires nowhere-constant maps.
inline std::uint64_t chain_extrema_between(const std::vector<PLMap>& ch, const Rational& x, const Rational& y,
                                           std::uint64_t cap = std::numeric_limits<std::uint64_t>::max()) {
    return detail::count_chain_extrema(ch, ch.size(), min(x, y), max(x, y), cap);
}

/// Chain rule on one-sided branches: true iff the composition is increasing at x.
inline bool chain_increasing_at(const std::vector<PLMap>& ch, Rational x) {
    bool up = true;
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) {
        Branch b = branch_at(*it, x);
        if (b == Branch::Decreasing)
            up = !up;
        else if (b != Branch::Increasing)
            return false;
        x = (*it)(x);
    }
    return up;
}

/// Interior extrema of f_i^k = f_i o ... o f_{k-1} between x_k and y_k.
inline std::uint64_t extrema_between_composed(const InverseSystem& sys, long i, long k, const Rational& xk,
                                              const Rational& yk) {
    if (!(i < k)) throw Error(ErrorKind::PreconditionViolated, "need i < k");
    return chain_extrema_between(chain(sys, i, k), xk, yk);
}

struct IndexSets {
    std::vector<std::vector<long>> J;  // J[i-1] is the certified prefix of J_i
    friend bool operator==(const IndexSets&, const IndexSets&) = default;
};

namespace detail {

struct IndexCheck {
    const InverseSystem& sys;
    const std::vector<ILPoint>& pts;
    std::size_t count;  // |Z_i|

    std::vector<Rational> level(long j) const {
        std::vector<Rational> out;
        for (std::size_t k = 0; k < count; ++k) out.push_back(coordinate(pts[k], j));
        return out;
    }

    // (2): pi_j one-to-one on Z_i.
    bool injective(long j) const {
        auto v = level(j);
        for (std::size_t a = 0; a < v.size(); ++a)
            for (std::size_t b = a + 1; b < v.size(); ++b)
                if (v[a] == v[b]) return false;
        return true;
    }

    // (3) and (4) for a pair j < j2.
    bool pair_ok(long j, long j2) const {
        auto lo = level(j), hi = level(j2);
        for (std::size_t a = 0; a < count; ++a)
            for (std::size_t b = 0; b < count; ++b)
                if (hi[a] < hi[b] && !(lo[a] < lo[b])) return false;
        auto ch = chain(sys, j, j2);
        for (const auto& z : hi)
            if (!chain_increasing_at(ch, z)) return false;
        return true;
    }

    // (5) and (6) for j relative to the first index j1 of J_i, with i = count.
    bool spread_ok(long j1, long j) const {
        auto ch = chain(sys, j1, j);
        auto v = level(j);
        const std::uint64_t four_i = 4 * count, two_i = 2 * count;
        for (std::size_t a = 0; a < v.size(); ++a)
            for (std::size_t b = a + 1; b < v.size(); ++b)
                if (chain_extrema_between(ch, v[a], v[b], four_i) < four_i) return false;
        for (const auto& z : v) {
            if (chain_extrema_between(ch, z, Rational(1), two_i) >= two_i) continue;
            const bool monotone = z == 1 || chain_extrema_between(ch, z, Rational(1), 1) == 0;
            if (!(monotone && eval_chain(ch, z) < eval_chain(ch, Rational(1)))) return false;
        }
        return true;
    }
};

}  // namespace detail

/// Bounded-horizon search for prefixes J_1 ⊇ J_2 ⊇ ... ⊇ J_{i_max} (each of
/// length >= 2) meeting the six index-set conditions on indices <= horizon.
/// First indices are tried in ascending order and each prefix is extended
/// greedily. Failure within the horizon is not a refutation.
inline IndexSets find_index_sets(const InverseSystem& sys, const std::vector<ILPoint>& points, long i_max,
                                 long horizon) {
    if (i_max < 1 || static_cast<std::size_t>(i_max) > points.size())
        throw Error(ErrorKind::PreconditionViolated, "need 1 <= i_max <= number of points");
    for (const auto& p : points) check_thread(sys, p, horizon);
    IndexSets out;
    std::vector<long> prev;
    for (long j = 2; j <= horizon; ++j) prev.push_back(j);  // J_0 minus its first index 1
    for (long i = 1; i <= i_max; ++i) {
        detail::IndexCheck chk{sys, points, static_cast<std::size_t>(i)};
        std::vector<long> cand;
        for (long j : prev)
            if (chk.injective(j)) cand.push_back(j);
        std::optional<std::vector<long>> found;
        for (std::size_t s = 0; s < cand.size() && !found; ++s) {
            std::vector<long> J{cand[s]};
            for (std::size_t t = s + 1; t < cand.size(); ++t) {
                const long j = cand[t];
                bool ok = chk.spread_ok(J.front(), j);
                for (std::size_t u = 0; ok && u < J.size(); ++u) ok = chk.pair_ok(J[u], j);
                if (ok) J.push_back(j);
            }
            if (J.size() >= 2) found = J;
        }
        if (!found)
            throw Error(ErrorKind::NotFoundWithinHorizon,
                        "no J_" + std::to_string(i) + " prefix within horizon " + std::to_string(horizon));
        out.J.push_back(*found);
        prev.assign(found->begin() + 1, found->end());
    }
    return out;
}

/// Independent re-check of conditions (1)-(6) on certified prefixes.
inline bool index_sets_valid(const InverseSystem& sys, const std::vector<ILPoint>& points, const IndexSets& sets) {
    for (std::size_t i = 1; i <= sets.J.size(); ++i) {
        const auto& J = sets.J[i - 1];
        if (J.size() < 2) return false;
        if (i > 1) {
            const auto& P = sets.J[i - 2];
            for (long j : J)
                if (j == P.front() || std::find(P.begin(), P.end(), j) == P.end()) return false;
        }
        detail::IndexCheck chk{sys, points, i};
        for (std::size_t a = 0; a < J.size(); ++a) {
            if (!chk.injective(J[a])) return false;
            for (std::size_t b = a + 1; b < J.size(); ++b)
                if (!chk.pair_ok(J[a], J[b])) return false;
            if (a > 0 && !chk.spread_ok(J.front(), J[a])) return false;
        }
    }
    return true;
}

struct ExampleInstance {
    long n = 0;
    long k = 0;
    long m = 0;
    FactorInstance factor;
    std::vector<Rational> z;
    PLMap f;
    std::vector<Rational> zprime;
    RemovabilityReport removability;
};

/// Smallest k with 2^{k-1} >= 1 + sum_{i<=n} (2i-1) = 1 + n^2.
inline long example_k(long n) {
    long k = 1;
    while ((1L << (k - 1)) < 1 + n * n) ++k;
    return k;
}

/// The marked-point instance: z_i is the fixed point of T_m on the rising
/// half of tooth i of P_i, s = s_{m,Z}, f = s o T_{2n-1}, z'_i = s(z_i).
inline ExampleInstance build_example_instance(long n) {
    if (n < 1) throw Error(ErrorKind::PreconditionViolated, "n >= 1 required");
    ExampleInstance ex;
    ex.n = n;
    ex.k = example_k(n);
    ex.m = 1L << ex.k;
    PatternPlan plan = choose_patterns(ex.m, n);
    for (long i = 1; i <= n; ++i) {
        const Rational lo = plan.patterns[static_cast<std::size_t>(i - 1)].lo + Rational(2 * (i - 1), ex.m);
        ex.z.push_back(branch_fixed_point(ex.m, lo, lo + Rational(1, ex.m)));
    }
    ex.factor = build_s(ex.m, MarkedSet(ex.z), plan);
    ex.f = compose(ex.factor.s, tent(2 * n - 1));
    for (const auto& z : ex.z) ex.zprime.push_back(ex.factor.s(z));
    for (const auto& zp : ex.zprime)
        if (ex.f(zp) != zp) throw Error(ErrorKind::HypothesisViolated, "z' = " + zp.str() + " is not fixed by f");
    ex.removability = all_visors_removable(ex.f, MarkedSet(ex.zprime));
    return ex;
}

}  // namespace knaster

#endif  // KNASTER_KNASTER_HPP
