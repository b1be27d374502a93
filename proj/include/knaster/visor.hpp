#ifndef KNASTER_VISOR_HPP
#define KNASTER_VISOR_HPP

#include "knaster/error.hpp"
#include "knaster/plmap.hpp"
#include "knaster/rational.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace knaster {

/// Strictly increasing marked points z_1 < ... < z_n in [0,1].
struct MarkedSet {
    std::vector<Rational> points;

    MarkedSet() = default;
    explicit MarkedSet(std::vector<Rational> pts) : points(std::move(pts)) {
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (points[i].sign() < 0 || points[i] > 1)
                throw Error(ErrorKind::PreconditionViolated, "marked point " + points[i].str() + " outside [0,1]");
            if (i > 0 && !(points[i - 1] < points[i]))
                throw Error(ErrorKind::PreconditionViolated, "marked points must be strictly increasing");
        }
    }

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    const Rational& operator[](std::size_t i) const { return points[i]; }
    bool contains(const Rational& x) const { return std::binary_search(points.begin(), points.end(), x); }
    friend bool operator==(const MarkedSet&, const MarkedSet&) = default;
};

/// f(z_1) < ... < f(z_n), the standing hypothesis of the visor calculus.
inline bool order_hypothesis_holds(const PLMap& f, const MarkedSet& Z) {
    for (std::size_t i = 1; i < Z.size(); ++i)
        if (!(f(Z[i - 1]) < f(Z[i]))) return false;
    return true;
}

inline void require_order_hypothesis(const PLMap& f, const MarkedSet& Z) {
    for (std::size_t i = 1; i < Z.size(); ++i)
        if (!(f(Z[i - 1]) < f(Z[i])))
            throw Error(ErrorKind::OrderHypothesisViolated,
                        "f(z_" + std::to_string(i) + ") >= f(z_" + std::to_string(i + 1) + ")");
}

/// An interval of visor points for z_j (1-based). The right end is always
/// open; the left end is closed only at 0 when 0 is itself a visor.
struct VisorInterval {
    std::size_t j = 0;
    Rational lo;
    Rational hi;
    bool lo_closed = false;
    bool hi_closed = false;

    bool contains(const Rational& x) const {
        return (lo_closed ? lo <= x : lo < x) && (hi_closed ? x <= hi : x < hi);
    }
    std::string str() const {
        return std::string(lo_closed ? "[" : "(") + lo.str() + "," + hi.str() + (hi_closed ? "]" : ")");
    }
    friend bool operator==(const VisorInterval&, const VisorInterval&) = default;
};

struct RemovalTriple {
    Rational a;
    Rational b;
    Rational c;
    friend bool operator==(const RemovalTriple&, const RemovalTriple&) = default;
};

struct MinimalInterval {
    Rational a_v;
    Rational b_v;
    Rational witness_c;
    friend bool operator==(const MinimalInterval&, const MinimalInterval&) = default;
};

/// Index j (1-based) with v a Z-visor for z_j, if any. j is unique: it
/// belongs to the first marked point strictly right of v.
inline std::optional<std::size_t> classify_visor(const PLMap& f, const MarkedSet& Z, const Rational& v) {
    require_order_hypothesis(f, Z);
    auto it = std::upper_bound(Z.points.begin(), Z.points.end(), v);
    if (it == Z.points.end()) return std::nullopt;
    if (Z.contains(v)) return std::nullopt;
    if (f(v) > f(*it)) return static_cast<std::size_t>(it - Z.points.begin()) + 1;
    return std::nullopt;
}

/// Maximal intervals of visor points, by j then position.
inline std::vector<VisorInterval> visor_components(const PLMap& f, const MarkedSet& Z) {
    require_order_hypothesis(f, Z);
    std::vector<VisorInterval> out;
    for (std::size_t j = 0; j < Z.size(); ++j) {
        const Rational& z = Z[j];
        const Rational lo = j == 0 ? Rational(0) : Z[j - 1];
        if (!(lo < z)) continue;
        const Rational level = f(z);
        std::vector<Rational> cuts{lo};
        for (const auto& x : level_crossings(f, level, lo, z))
            if (lo < x && x < z) cuts.push_back(x);
        cuts.push_back(z);
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
            const Rational mid = (cuts[k] + cuts[k + 1]) / Rational(2);
            if (!(f(mid) > level)) continue;
            VisorInterval vi{j + 1, cuts[k], cuts[k + 1], false, false};
            vi.lo_closed = (j == 0 && k == 0 && !Z.contains(Rational(0)) && f(Rational(0)) > level);
            out.push_back(vi);
        }
    }
    return out;
}

/// Per-condition verdicts for "<a,b,c> removes v"; index 0 is condition (1).
struct RemovalConditions {
    std::array<bool, 5> holds{};
    bool all() const { return std::all_of(holds.begin(), holds.end(), [](bool b) { return b; }); }
};

inline RemovalConditions removal_conditions(const PLMap& f, const MarkedSet& Z, const Rational& v,
                                            const RemovalTriple& t) {
    RemovalConditions r;
    auto j = classify_visor(f, Z, v);
    if (!j) throw Error(ErrorKind::NotAVisor, v.str() + " is not a visor");
    const Rational& zj = Z[*j - 1];
    const auto& [a, b, c] = t;
    r.holds[0] = a < v && v < b && zj < c;
    bool no_z = true;
    for (const auto& z : Z.points)
        if (a < z && z < b) no_z = false;
    r.holds[1] = no_z;
    const bool ordered = a <= b;
    r.holds[2] = (a.is_zero() && !Z.contains(Rational(0))) || (ordered && f(a) <= f.min_on(a, b));
    r.holds[3] = c == 1 || (ordered && f(c) >= f.max_on(a, b));
    r.holds[4] = b <= c && f(b) <= f.min_on(b, c);
    return r;
}

inline bool removes(const PLMap& f, const MarkedSet& Z, const Rational& v, const RemovalTriple& t) {
    return removal_conditions(f, Z, v, t).all();
}

/// The r, s, t of the minimal-interval argument: any removing triple has
/// a <= r, s <= b and t <= c. `s` is absent when f never returns to f(z_j)
/// after v, in which case nothing removes v.
struct RemovalBounds {
    std::size_t j = 0;
    Rational r;
    std::optional<Rational> s;
    Rational t;
};

inline RemovalBounds removal_bounds(const PLMap& f, const MarkedSet& Z, const Rational& v) {
    auto j = classify_visor(f, Z, v);
    if (!j) throw Error(ErrorKind::NotAVisor, v.str() + " is not a visor");
    RemovalBounds out;
    out.j = *j;
    const Rational& zj = Z[*j - 1];
    const Rational lz = f(zj), lv = f(v);
    out.r = Rational(0);
    for (const auto& x : level_crossings(f, lz, Rational(0), v))
        if (x < v) out.r = max(out.r, x);
    for (const auto& x : level_crossings(f, lz, v, Rational(1)))
        if (v < x) {
            out.s = x;
            break;
        }
    out.t = Rational(1);
    for (const auto& x : level_crossings(f, lv, zj, Rational(1)))
        if (zj < x) {
            out.t = x;
            break;
        }
    return out;
}

namespace detail {

// Sup of c >= b with min f on [b,c] >= f(b).
inline Rational stay_above_until(const PLMap& f, const Rational& b) {
    const Rational lb = f(b);
    Rational x0 = b, y0 = lb;
    for (const auto& p : f.breakpoints()) {
        if (!(b < p.x)) continue;
        if (p.y < lb) return x0 + (lb - y0) * (p.x - x0) / (p.y - y0);
        x0 = p.x;
        y0 = p.y;
    }
    return Rational(1);
}

}  // namespace detail

/// Largest c completing <a,b,c> to a removing triple for a visor of z_j,
/// assuming conditions (1)-(3) already hold for a and b.
inline std::optional<Rational> best_target(const PLMap& f, const MarkedSet& Z, std::size_t j, const Rational& a,
                                           const Rational& b) {
    const Rational& zj = Z[j - 1];
    if (zj == 1) return std::nullopt;
    const Rational cstar = detail::stay_above_until(f, b);
    if (cstar == 1) return Rational(1);
    if (!(zj < cstar)) return std::nullopt;
    const Rational M = f.max_on(a, b);
    const auto hits = level_crossings(f, M, zj, cstar);
    if (hits.empty() || !(zj < hits.back())) return std::nullopt;
    return hits.back();
}

/// Finite candidate set: breakpoints, marked points, {0,1} and the level
/// crossings at f(z), f(v) and every breakpoint value.
inline std::vector<Rational> candidate_points(const PLMap& f, const MarkedSet& Z, const Rational& v) {
    std::set<Rational> levels{f(v)};
    for (const auto& z : Z.points) levels.insert(f(z));
    for (const auto& p : f.breakpoints()) levels.insert(p.y);
    std::set<Rational> pts{Rational(0), Rational(1)};
    for (const auto& p : f.breakpoints()) pts.insert(p.x);
    for (const auto& z : Z.points) pts.insert(z);
    for (const auto& L : levels)
        for (const auto& x : level_crossings(f, L, Rational(0), Rational(1))) pts.insert(x);
    return {pts.begin(), pts.end()};
}

namespace detail {

inline bool pair_ok_before_target(const PLMap& f, const MarkedSet& Z, const Rational& v, const Rational& a,
                                  const Rational& b) {
    if (!(a < v && v < b)) return false;
    for (const auto& z : Z.points)
        if (a < z && z < b) return false;
    return (a.is_zero() && !Z.contains(Rational(0))) || f(a) <= f.min_on(a, b);
}

}  // namespace detail

enum class SearchOrder { LevelDescent, PairScan };

/// Minimal removal interval with a witness target, or nullopt when v is not
/// removable. Both orders must agree; the pair scan is the slower reference.
inline std::optional<MinimalInterval> find_minimal_interval(const PLMap& f, const MarkedSet& Z, const Rational& v,
                                                            SearchOrder order = SearchOrder::LevelDescent) {
    const RemovalBounds rb = removal_bounds(f, Z, v);
    if (!rb.s) return std::nullopt;
    const Rational& zj = Z[rb.j - 1];
    auto feasible = [&](const Rational& a, const Rational& b) -> std::optional<Rational> {
        if (!detail::pair_ok_before_target(f, Z, v, a, b)) return std::nullopt;
        return best_target(f, Z, rb.j, a, b);
    };

    if (order == SearchOrder::PairScan) {
        const auto C = candidate_points(f, Z, v);
        std::optional<Rational> amax, bmin;
        for (const auto& a : C) {
            if (!(a <= rb.r && a < v)) continue;
            for (const auto& b : C) {
                if (!(*rb.s <= b && b <= zj)) continue;
                if (feasible(a, b)) {
                    if (!amax || *amax < a) amax = a;
                    if (!bmin || b < *bmin) bmin = b;
                }
            }
        }
        if (!amax) return std::nullopt;
        auto c = feasible(*amax, *bmin);
        if (!c) throw Error(ErrorKind::NotRemovable, "removal pairs are not directed at v = " + v.str());
        return MinimalInterval{*amax, *bmin, *c};
    }

    // Level descent: minimal intervals have f(a_v) = f(b_v) = L (or a_v = 0)
    // with f > L inside, so try the critical levels from the top down.
    std::set<Rational, std::greater<>> levels;
    const Rational top = f(zj);
    for (const auto& p : f.breakpoints())
        if (p.y <= top) levels.insert(p.y);
    for (const auto& z : Z.points)
        if (f(z) <= top) levels.insert(f(z));
    for (const auto& L : levels) {
        std::optional<Rational> a, b;
        for (const auto& x : level_crossings(f, L, Rational(0), v))
            if (x < v) a = x;
        for (const auto& x : level_crossings(f, L, v, Rational(1)))
            if (v < x) {
                b = x;
                break;
            }
        if (!b) continue;
        if (!a) a = Rational(0);
        if (auto c = feasible(*a, *b)) return MinimalInterval{*a, *b, *c};
    }
    return std::nullopt;
}

/// Some removing triple for v (the minimal interval with its largest target).
inline std::optional<RemovalTriple> removal_search(const PLMap& f, const MarkedSet& Z, const Rational& v) {
    auto mi = find_minimal_interval(f, Z, v);
    if (!mi) return std::nullopt;
    return RemovalTriple{mi->a_v, mi->b_v, mi->witness_c};
}

inline MinimalInterval minimal_removal_interval(const PLMap& f, const MarkedSet& Z, const Rational& v) {
    auto mi = find_minimal_interval(f, Z, v);
    if (!mi) throw Error(ErrorKind::NotRemovable, "visor " + v.str() + " is not removable");
    return *mi;
}


struct RemovabilityReport {
    bool all_removable = true;
    std::vector<VisorInterval> failing;  // cells (or single points) with a non-removable visor
    std::size_t cells_tested = 0;
};

namespace detail {

// Representatives of the cells cut out of a component by the candidate set:
// every cut point inside the component and every midpoint between cuts.
inline std::vector<std::pair<Rational, VisorInterval>> component_cells(const PLMap& f, const MarkedSet& Z,
                                                                       const VisorInterval& comp) {
    std::set<Rational> cuts{comp.lo, comp.hi};
    const Rational probe = (comp.lo + comp.hi) / Rational(2);
    for (const auto& x : candidate_points(f, Z, probe))
        if (comp.lo < x && x < comp.hi) cuts.insert(x);
    std::vector<Rational> c(cuts.begin(), cuts.end());
    std::vector<std::pair<Rational, VisorInterval>> out;
    for (std::size_t k = 0; k < c.size(); ++k) {
        if (comp.contains(c[k])) out.push_back({c[k], {comp.j, c[k], c[k], true, true}});
        if (k + 1 < c.size())
            out.push_back({(c[k] + c[k + 1]) / Rational(2), {comp.j, c[k], c[k + 1], false, false}});
    }
    return out;
}

}  // namespace detail

/// Decides removability of every visor. Removability can only change where a
/// or b of a witness triple crosses v, i.e. at candidate points, so one
/// representative per cell and per cut point is exhaustive.
inline RemovabilityReport all_visors_removable(const PLMap& f, const MarkedSet& Z) {
    RemovabilityReport rep;
    for (const auto& comp : visor_components(f, Z)) {
        for (const auto& [v, cell] : detail::component_cells(f, Z, comp)) {
            ++rep.cells_tested;
            if (!find_minimal_interval(f, Z, v)) {
                rep.all_removable = false;
                rep.failing.push_back(cell);
            }
        }
    }
    return rep;
}

struct VisorMember {
    Rational v;
    std::size_t j = 0;
    MinimalInterval interval;
    std::optional<Rational> target;
    friend bool operator==(const VisorMember&, const VisorMember&) = default;
};

struct VisorFamily {
    std::vector<VisorMember> members;  // ascending in v
    friend bool operator==(const VisorFamily&, const VisorFamily&) = default;
};

/// One member per distinct minimal interval, represented by the leftmost
/// point where f attains its maximum on that interval.
inline VisorFamily choose_visor_family(const PLMap& f, const MarkedSet& Z) {
    std::vector<std::pair<Rational, Rational>> seen;
    VisorFamily fam;
    for (const auto& comp : visor_components(f, Z)) {
        std::vector<std::pair<Rational, Rational>> covered;
        for (const auto& [v, cell] : detail::component_cells(f, Z, comp)) {
            auto mi = find_minimal_interval(f, Z, v);
            if (!mi) throw Error(ErrorKind::NonRemovableVisor, "visor set " + cell.str() + " is not removable");
            covered.push_back({mi->a_v, mi->b_v});
            std::pair<Rational, Rational> key{mi->a_v, mi->b_v};
            if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
            seen.push_back(key);
            const Rational top = f.max_on(mi->a_v, mi->b_v);
            std::optional<Rational> peak;
            for (const auto& p : f.breakpoints())
                if (mi->a_v < p.x && p.x < mi->b_v && p.y == top) {
                    peak = p.x;
                    break;
                }
            if (!peak) throw Error(ErrorKind::NonRemovableVisor, "no interior maximum on the minimal interval");
            auto pj = classify_visor(f, Z, *peak);
            auto pmi = pj ? find_minimal_interval(f, Z, *peak) : std::nullopt;
            if (!pmi || pmi->a_v != mi->a_v || pmi->b_v != mi->b_v)
                throw Error(ErrorKind::NonRemovableVisor, "peak " + peak->str() + " has a different minimal interval");
            fam.members.push_back({*peak, *pj, *pmi, std::nullopt});
        }
        // Every visor of the component must lie in the union of intervals.
        std::sort(covered.begin(), covered.end());
        Rational reach = comp.lo;
        bool ok = !comp.lo_closed || (!covered.empty() && covered.front().first <= comp.lo);
        for (const auto& [a, b] : covered) {
            if (reach < a) ok = false;
            reach = max(reach, b);
        }
        if (!ok || reach < comp.hi)
            throw Error(ErrorKind::NonRemovableVisor, "minimal intervals do not cover " + comp.str());
    }
    std::sort(fam.members.begin(), fam.members.end(), [](const auto& x, const auto& y) { return x.v < y.v; });
    return fam;
}

/// c is a target for v: <a_v,b_v,c> removes v and c > z_{j'} whenever f(v) > f(z_{j'}).
inline bool is_target(const PLMap& f, const MarkedSet& Z, const VisorMember& m, const Rational& c) {
    if (!removes(f, Z, m.v, {m.interval.a_v, m.interval.b_v, c})) return false;
    const Rational fv = f(m.v);
    // c = 1 parks the block past the end of the arc, clear of every mark,
    // so it qualifies even when 1 is itself marked.
    for (const auto& z : Z.points)
        if (fv > f(z) && !(z < c) && c != 1) return false;
    return true;
}

/// The maximal c with <a_v,b_v,c> removing v; asserted to be a target.
inline Rational max_target(const PLMap& f, const MarkedSet& Z, const Rational& v, const MinimalInterval& iv) {
    auto j = classify_visor(f, Z, v);
    if (!j) throw Error(ErrorKind::NotAVisor, v.str() + " is not a visor");
    if (!detail::pair_ok_before_target(f, Z, v, iv.a_v, iv.b_v))
        throw Error(ErrorKind::NotRemovable, "interval does not satisfy conditions (1)-(3) for " + v.str());
    auto c = best_target(f, Z, *j, iv.a_v, iv.b_v);
    if (!c) throw Error(ErrorKind::NotRemovable, "no c completes the interval for " + v.str());
    if (!is_target(f, Z, {v, *j, iv, std::nullopt}, *c))
        throw Error(ErrorKind::TargetSelectionFailed, "maximal c = " + c->str() + " is not a target");
    return *c;
}

inline bool targets_coherent(const VisorFamily& fam) {
    for (std::size_t i = 0; i < fam.members.size(); ++i)
        for (std::size_t k = i + 1; k < fam.members.size(); ++k) {
            const auto& u = fam.members[i];
            const auto& v = fam.members[k];
            if (!u.target || !v.target) return false;
            if (!(*u.target < v.interval.a_v || *v.target <= *u.target)) return false;
        }
    return true;
}

/// Recursive target choice in order of descending f(v) (ties: ascending v).
/// Case 1 caps the new target by the nearest earlier member on the left;
/// Case 2 keeps it below the nearest earlier member on the right or copies
/// that member's target.
inline VisorFamily assign_targets(const PLMap& f, const MarkedSet& Z, VisorFamily fam) {
    auto& ms = fam.members;
    std::vector<std::size_t> order(ms.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        const Rational fx = f(ms[x].v), fy = f(ms[y].v);
        if (fx != fy) return fx > fy;
        return ms[x].v < ms[y].v;
    });
    std::vector<std::size_t> done;
    for (std::size_t idx : order) {
        VisorMember& w = ms[idx];
        Rational c = max_target(f, Z, w.v, w.interval);
        std::optional<std::size_t> u0, v0;
        for (std::size_t d : done) {
            if (ms[d].v < w.v && (!u0 || ms[*u0].v < ms[d].v)) u0 = d;
            if (w.v < ms[d].v && (!v0 || ms[d].v < ms[*v0].v)) v0 = d;
        }
        bool case1 = u0.has_value();
        if (case1)
            for (std::size_t d : done)
                if (w.v < ms[d].v && !(*ms[*u0].target < ms[d].interval.a_v)) case1 = false;
        if (case1) {
            if (*ms[*u0].target < c) c = *ms[*u0].target;
        } else if (v0) {
            if (!(c < ms[*v0].interval.a_v)) c = *ms[*v0].target;
        }
        if (!is_target(f, Z, w, c))
            throw Error(ErrorKind::TargetSelectionFailed, "chosen c = " + c.str() + " is not a target for " + w.v.str());
        w.target = c;
        done.push_back(idx);
    }
    if (!targets_coherent(fam)) throw Error(ErrorKind::TargetSelectionFailed, "targets are not coherent");
    return fam;
}

}  // namespace knaster

#endif  // KNASTER_VISOR_HPP
