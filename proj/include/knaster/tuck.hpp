#ifndef KNASTER_TUCK_HPP
#define KNASTER_TUCK_HPP

#include "knaster/error.hpp"
#include "knaster/geom.hpp"
#include "knaster/plmap.hpp"
#include "knaster/visor.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace knaster {

struct PerturbedMap {
    PLMap fprime;
    Rational delta;
    friend bool operator==(const PerturbedMap&, const PerturbedMap&) = default;
};

namespace detail {

inline Rational lipschitz(const PLMap& f) {
    Rational L(0);
    for (std::size_t i = 0; i < f.piece_count(); ++i) L = max(L, abs(f.slope(i)));
    return L;
}

inline void require_no_plateaus(const PLMap& f) {
    for (std::size_t i = 0; i < f.piece_count(); ++i)
        if (f.slope(i).is_zero())
            throw Error(ErrorKind::PreconditionViolated,
                        "map is constant on [" + f.breakpoints()[i].x.str() + "," + f.breakpoints()[i + 1].x.str() + "]");
}

// g(x) > L for x in [lo,hi], or (lo,hi] when lo_open.
inline bool above_on(const PLMap& g, const Rational& L, const Rational& lo, bool lo_open, const Rational& hi) {
    if (hi < lo || (lo_open && hi == lo)) return true;
    if (!(g(hi) > L)) return false;
    for (const auto& p : g.breakpoints())
        if (lo < p.x && p.x < hi && !(p.y > L)) return false;
    const Rational glo = g(lo);
    if (glo > L) return true;
    if (!lo_open || glo < L) return false;
    return g.slope(g.piece_index(lo)) > 0;
}

// g(x) < L for x in [lo,hi], or [lo,hi) when hi_open.
inline bool below_on(const PLMap& g, const Rational& L, const Rational& lo, const Rational& hi, bool hi_open) {
    if (hi < lo || (hi_open && hi == lo)) return true;
    if (!(g(lo) < L)) return false;
    for (const auto& p : g.breakpoints())
        if (lo < p.x && p.x < hi && !(p.y < L)) return false;
    const Rational ghi = g(hi);
    if (ghi < L) return true;
    if (!hi_open || ghi > L) return false;
    // Left slope at hi must be positive.
    std::size_t k = g.piece_index(hi);
    if (k > 0 && g.breakpoints()[k].x == hi) --k;
    return g.slope(k) > 0;
}

inline bool needs_left_connector(const VisorMember& m, const MarkedSet& Z) {
    return m.interval.a_v != 0 || Z.contains(Rational(0));
}

// Inside a block that leaves its place on the arc: (a_v,b_v), plus a_v
// itself when a_v = 0 has no connector.
inline bool in_moved_block(const VisorFamily& fam, const MarkedSet& Z, const Rational& x) {
    for (const auto& m : fam.members) {
        if (m.interval.a_v < x && x < m.interval.b_v) return true;
        if (x == m.interval.a_v && !needs_left_connector(m, Z)) return true;
    }
    return false;
}

// The part of [z_{j-1}, z_j) outside every open block, as closed pieces;
// the last piece may end at z_j, which is then excluded.
inline std::vector<std::pair<Rational, Rational>> free_pieces(const VisorFamily& fam, const MarkedSet& Z,
                                                              const Rational& lo, const Rational& hi) {
    std::vector<const VisorMember*> blocks;
    for (const auto& m : fam.members)
        if (lo <= m.interval.a_v && m.interval.b_v <= hi) blocks.push_back(&m);
    std::sort(blocks.begin(), blocks.end(),
              [](const VisorMember* x, const VisorMember* y) { return x->interval.a_v < y->interval.a_v; });
    std::vector<std::pair<Rational, Rational>> out;
    Rational cur = lo;
    for (const auto* m : blocks) {
        if (needs_left_connector(*m, Z)) out.push_back({cur, m->interval.a_v});
        cur = m->interval.b_v;
    }
    out.push_back({cur, hi});
    return out;
}

}  // namespace detail

/// Failed properties of a candidate perturbation g of f, empty when all hold:
/// closeness within eps/8, the strict order relations around every family
/// member, g = f on Z, and g below g(z_j) off the blocks before z_j.
inline std::vector<std::string> perturbation_failures(const PLMap& f, const MarkedSet& Z, const VisorFamily& fam,
                                                      const Rational& eps, const PLMap& g) {
    std::vector<std::string> out;
    std::set<Rational> xs;
    for (const auto& p : f.breakpoints()) xs.insert(p.x);
    for (const auto& p : g.breakpoints()) xs.insert(p.x);
    for (const auto& x : xs)
        if (!(abs(g(x) - f(x)) * 8 <= eps)) {
            out.push_back("(1) |f'-f| too large at " + x.str());
            break;
        }
    for (const auto& m : fam.members) {
        const Rational &a = m.interval.a_v, &b = m.interval.b_v;
        if (!m.target) {
            out.push_back("(2) v=" + m.v.str() + " has no target");
            continue;
        }
        const Rational& c = *m.target;
        if (detail::needs_left_connector(m, Z) && !detail::above_on(g, g(a), a, true, b))
            out.push_back("(2) f'(a_v) not below (a_v,b_v] for v=" + m.v.str());
        if (!detail::above_on(g, g(b), b, true, c)) out.push_back("(2) f'(b_v) not below (b_v,c_v] for v=" + m.v.str());
        if (c < 1 && !(g.max_on(a, b) < g(c))) out.push_back("(2) [a_v,b_v] not below f'(c_v) for v=" + m.v.str());
    }
    for (std::size_t j = 0; j < Z.size(); ++j)
        if (g(Z[j]) != f(Z[j])) out.push_back("(3) f'(z_" + std::to_string(j + 1) + ") != f(z_" + std::to_string(j + 1) + ")");
    for (std::size_t j = 0; j < Z.size(); ++j) {
        const Rational lo = j == 0 ? Rational(0) : Z[j - 1];
        const Rational& z = Z[j];
        for (const auto& [p, q] : detail::free_pieces(fam, Z, lo, z)) {
            if (!detail::below_on(g, f(z), p, q, q == z)) {
                out.push_back("(4) f' reaches f(z_" + std::to_string(j + 1) + ") on [" + p.str() + "," + q.str() + "]");
                break;
            }
        }
    }
    return out;
}

namespace detail {

// Orders (p, q) meaning f'(p) < f'(q) must hold although f(p) = f(q).
inline std::vector<std::pair<Rational, Rational>> tie_breaks(const PLMap& f, const MarkedSet& Z, const VisorFamily& fam) {
    std::vector<std::pair<Rational, Rational>> out;
    for (const auto& m : fam.members) {
        const Rational &a = m.interval.a_v, &b = m.interval.b_v, &c = *m.target;
        if (needs_left_connector(m, Z))
            for (const auto& x : level_crossings(f, f(a), a, b))
                if (a < x) out.push_back({a, x});
        for (const auto& x : level_crossings(f, f(b), b, c))
            if (b < x) out.push_back({b, x});
        if (c < 1)
            for (const auto& x : level_crossings(f, f(c), a, b)) out.push_back({x, c});
    }
    for (std::size_t j = 0; j < Z.size(); ++j) {
        const Rational lo = j == 0 ? Rational(0) : Z[j - 1];
        for (const auto& x : level_crossings(f, f(Z[j]), lo, Z[j]))
            if (x < Z[j] && !in_moved_block(fam, Z, x)) out.push_back({x, Z[j]});
    }
    return out;
}

// Integer depths h with h_p >= h_q + 1 for every tie (p,q), h = 0 on Z,
// h <= 0 at level 0 and h >= 0 at level 1. Bellman-Ford on difference
// constraints; nullopt on a negative cycle.
inline std::optional<std::map<Rational, long>> solve_depths(const PLMap& f, const MarkedSet& Z,
                                                            const std::vector<std::pair<Rational, Rational>>& ties) {
    std::map<Rational, std::size_t> id;
    auto node = [&](const Rational& x) {
        auto it = id.find(x);
        if (it != id.end()) return it->second;
        const std::size_t k = id.size() + 1;  // 0 is the reference
        id.emplace(x, k);
        return k;
    };
    struct Edge {
        std::size_t from, to;
        long w;
    };
    std::vector<Edge> edges;  // x_to <= x_from + w
    for (const auto& [p, q] : ties) edges.push_back({node(p), node(q), -1});
    for (const auto& z : Z.points) {
        const std::size_t k = node(z);
        edges.push_back({0, k, 0});
        edges.push_back({k, 0, 0});
    }
    for (const auto& [x, k] : id) {
        const Rational y = f(x);
        if (y == 0) edges.push_back({0, k, 0});
        if (y == 1) edges.push_back({k, 0, 0});
    }
    std::vector<long> d(id.size() + 1, 0);
    for (std::size_t round = 0; round <= d.size(); ++round) {
        bool changed = false;
        for (const auto& e : edges)
            if (d[e.from] + e.w < d[e.to]) {
                d[e.to] = d[e.from] + e.w;
                changed = true;
            }
        if (!changed) {
            std::map<Rational, long> h;
            for (const auto& [x, k] : id) h[x] = d[k] - d[0];
            return h;
        }
    }
    return std::nullopt;
}

inline PLMap apply_spikes(const PLMap& f, const std::map<Rational, long>& h, const Rational& kappa,
                          const Rational& delta) {
    std::set<Rational> xs;
    for (const auto& p : f.breakpoints()) xs.insert(p.x);
    for (const auto& [c, w] : h) {
        if (w == 0) continue;
        xs.insert(c);
        if (c - kappa > 0) xs.insert(c - kappa);
        if (c + kappa < 1) xs.insert(c + kappa);
    }
    std::vector<Breakpoint> pts;
    for (const auto& x : xs) {
        Rational y = f(x);
        for (const auto& [c, w] : h) {
            if (w == 0) continue;
            const Rational t = Rational(1) - abs(x - c) / kappa;
            if (t.sign() > 0) y -= delta * Rational(w) * t;
        }
        pts.push_back({x, y});
    }
    return PLMap(std::move(pts));
}

}  // namespace detail

/// A small perturbation f' of f meeting the strict order properties that the
/// half-plane construction relies on. Only ties of f are broken, by narrow
/// triangular spikes whose relative depths come from a difference system.
inline PerturbedMap perturb_map(const PLMap& f, const MarkedSet& Z, const VisorFamily& fam, const Rational& eps) {
    if (eps.sign() <= 0) throw Error(ErrorKind::InfeasiblePerturbation, "eps must be positive");
    detail::require_no_plateaus(f);
    for (const auto& m : fam.members)
        if (!m.target) throw Error(ErrorKind::PreconditionViolated, "family member v=" + m.v.str() + " has no target");
    const auto ties = detail::tie_breaks(f, Z, fam);
    const auto depths = detail::solve_depths(f, Z, ties);
    if (!depths) throw Error(ErrorKind::InfeasiblePerturbation, "tie-breaking constraints are cyclic");

    std::set<Rational> fixed;
    for (const auto& p : f.breakpoints()) fixed.insert(p.x);
    for (const auto& z : Z.points) fixed.insert(z);
    long H = 0;
    for (const auto& [c, w] : *depths) {
        if (w != 0) fixed.insert(c);
        H = std::max(H, std::labs(w));
    }
    if (H == 0) {
        if (!perturbation_failures(f, Z, fam, eps, f).empty())
            throw Error(ErrorKind::InfeasiblePerturbation, perturbation_failures(f, Z, fam, eps, f).front());
        return {f, Rational(0)};
    }
    // Spikes stay clear of each other, of Z and of the other corners of f.
    Rational kappa(1, 2);
    for (const auto& [c, w] : *depths) {
        if (w == 0) continue;
        for (const auto& x : fixed)
            if (x != c) kappa = min(kappa, abs(x - c) / Rational(2));
    }
    Rational delta = eps / Rational(8 * H);
    for (int round = 0; round < 64; ++round, delta = delta / Rational(2)) {
        std::optional<PLMap> g;
        try {
            g = detail::apply_spikes(f, *depths, kappa, delta);
        } catch (const Error&) {
            continue;  // left [0,1]; shrink
        }
        if (perturbation_failures(f, Z, fam, eps, *g).empty()) return {*g, delta};
    }
    throw Error(ErrorKind::InfeasiblePerturbation, "no admissible spike scale found");
}

/// An arc in the closed right half-plane: vertices, their parameters in
/// [0,1], and the vertex index of each marked point (j counted from 1).
struct HalfPlaneArc {
    Polyline path;
    std::vector<Rational> params;
    std::vector<std::pair<std::size_t, std::size_t>> marks;
    friend bool operator==(const HalfPlaneArc&, const HalfPlaneArc&) = default;
};

namespace detail {

inline Rational dyadic_floor(const Rational& x) {
    Rational d(1);
    while (d > x) d = d / Rational(2);
    return d;
}

inline Point2 lerp(const Point2& a, const Point2& b, const Rational& s) { return a + s * (b - a); }

// Segment k (vertices k, k+1) meets no other segment except at shared vertices.
inline bool segment_clear(const std::vector<Point2>& v, std::size_t k) {
    const Segment s{v[k], v[k + 1]};
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        if (i == k) continue;
        const Segment o{v[i], v[i + 1]};
        const Intersection x = seg_intersection(s, o);
        if (std::holds_alternative<NoIntersection>(x)) continue;
        const auto* pt = std::get_if<PointIntersection>(&x);
        if (pt == nullptr) return false;
        if (i + 1 == k && pt->p == v[k]) continue;
        if (i == k + 1 && pt->p == v[k + 1]) continue;
        return false;
    }
    return true;
}

// Closed triangle membership.
inline bool in_triangle(const Point2& p, const Point2& a, const Point2& b, const Point2& c) {
    const int s1 = orient(a, b, p), s2 = orient(b, c, p), s3 = orient(c, a, p);
    const bool neg = s1 < 0 || s2 < 0 || s3 < 0;
    const bool pos = s1 > 0 || s2 > 0 || s3 > 0;
    return !(neg && pos);
}

class ArcBuilder {
public:
    ArcBuilder(const PLMap& f, const MarkedSet& Z, const VisorFamily& fam, const PLMap& g, const Rational& eps)
        : f_(f), Z_(Z), g_(g) {
        const Rational W = eps / Rational(2);
        x0_ = W / Rational(4);
        spread_ = W / Rational(4);
        std::map<Rational, std::vector<const VisorMember*>> by_target;
        for (const auto& m : fam.members) {
            by_a_[m.interval.a_v] = &m;
            by_b_[m.interval.b_v] = &m;
            by_target[*m.target].push_back(&m);
            if (*m.target < 1) cs_.push_back(*m.target);
        }
        std::sort(cs_.begin(), cs_.end());
        cs_.erase(std::unique(cs_.begin(), cs_.end()), cs_.end());
        w_ = dyadic_floor((W / Rational(2)) / Rational(static_cast<long>(std::max<std::size_t>(1, by_target.size()))));
        for (auto& [c, ms] : by_target) {
            // Later visors sit further left: a'_{v2} < b'_{v1} when v1 < v2.
            std::sort(ms.begin(), ms.end(), [](const VisorMember* x, const VisorMember* y) { return x->v > y->v; });
            const Rational start = c < 1 ? xbase(c, false) : x0_ + spread_ + w_ * Rational(static_cast<long>(cs_.size()));
            const Rational step = w_ / Rational(static_cast<long>(2 * ms.size() + 1));
            for (std::size_t k = 0; k < ms.size(); ++k)
                slot_[ms[k]->v] = {start + step * Rational(static_cast<long>(2 * k + 1)),
                                   start + step * Rational(static_cast<long>(2 * k + 2))};
        }
        std::set<Rational> pts{Rational(0), Rational(1)};
        for (const auto& z : Z.points) pts.insert(z);
        for (const auto& m : fam.members) pts.insert({m.interval.a_v, m.interval.b_v});
        for (const auto& c : cs_) pts.insert(c);
        parts_.assign(pts.begin(), pts.end());
        Rational gap(1);
        for (std::size_t i = 0; i + 1 < parts_.size(); ++i) gap = min(gap, parts_[i + 1] - parts_[i]);
        Rational eta = gap / Rational(4);
        const Rational L = lipschitz(f);
        if (L.sign() > 0) eta = min(eta, eps / (Rational(8) * L));
        eta_ = dyadic_floor(eta);
    }

    HalfPlaneArc build() {
        for (std::size_t i = 0; i < parts_.size(); ++i) {
            const Rational& p = parts_[i];
            const Rational s0 = emit_point(p);
            if (i + 1 < parts_.size()) emit_interval(p, s0, parts_[i + 1]);
        }
        for (std::size_t j = 0; j < Z_.size(); ++j) dip(Z_[j]);
        HalfPlaneArc arc;
        for (const auto& [t, p] : verts_) {
            arc.params.push_back(t);
            arc.path.vertices.push_back(p);
        }
        for (std::size_t j = 0; j < Z_.size(); ++j)
            for (std::size_t k = 0; k < arc.params.size(); ++k)
                if (arc.params[k] == Z_[j]) arc.marks.push_back({j + 1, k});
        return arc;
    }

private:
    // Base x-coordinate of domain point s; slots at targets c < s shift it right.
    Rational xbase(const Rational& s, bool right_limit) const {
        Rational x = x0_ + spread_ * s;
        for (const auto& c : cs_)
            if (c < s || (right_limit && c == s)) x += w_;
        return x;
    }

    bool in_a(const Rational& p) const { return by_a_.count(p) != 0; }
    bool in_b(const Rational& p) const { return by_b_.count(p) != 0; }
    bool in_c(const Rational& p) const { return std::binary_search(cs_.begin(), cs_.end(), p); }
    bool connector(const Rational& p) const { return in_a(p) && needs_left_connector(*by_a_.at(p), Z_); }

    Rational param_in(const Rational& p) const { return in_b(p) ? p - eta_ : p; }
    Rational param_out(const Rational& p) const { return (connector(p) || in_c(p)) ? p + eta_ : p; }

    void push(const Rational& t, Point2 p) { verts_.push_back({t, std::move(p)}); }

    // Vertices at partition point p; returns the domain point where the
    // following piece starts.
    Rational emit_point(const Rational& p) {
        const bool z = Z_.contains(p);
        const Rational y = g_(p);
        if (in_b(p)) push(p - eta_, {slot_.at(by_b_.at(p)->v).first, y});
        if (in_a(p) && in_b(p)) {
            const Rational a_out = slot_.at(by_a_.at(p)->v).second;
            if (!z) {
                push(p + eta_, {a_out, y});
                return p;
            }
            // Leave the boundary on a slight rise rather than retracing the
            // horizontal, staying under the block's own return at f'(b_v).
            const Rational yb = g_(by_a_.at(p)->interval.b_v);
            Rational xi = eta_ / Rational(2);
            while (!(g_(p + xi) < yb)) xi = xi / Rational(2);
            push(p, {Rational(0), y});
            push(p + eta_, {a_out, g_(p + xi)});
            return p + xi;
        }
        if (in_a(p)) {
            const Rational a_out = slot_.at(by_a_.at(p)->v).second;
            if (connector(p)) {
                push(p, {xbase(p, false), y});
                push(p + eta_, {a_out, y});
            } else {
                push(p, {a_out, y});
            }
            return p;
        }
        if (in_b(p)) {
            push(p, {xbase(p, false), y});
            return p;
        }
        if (in_c(p)) {
            push(p, {xbase(p, false), y});
            push(p + eta_, {xbase(p, true), y});
            return p;
        }
        push(p, {xbase(p, false), y});
        return p;
    }

    void emit_interval(const Rational& p, const Rational& s0, const Rational& q) {
        const Rational t0 = param_out(p), t1 = param_in(q);
        const VisorMember* block = in_a(p) && by_a_.at(p)->interval.b_v == q ? by_a_.at(p) : nullptr;
        for (const auto& bp : g_.breakpoints()) {
            if (!(s0 < bp.x && bp.x < q)) continue;
            const Rational t = t0 + (bp.x - s0) * (t1 - t0) / (q - s0);
            if (block != nullptr) {
                const auto& [b_in, a_out] = slot_.at(block->v);
                push(t, {a_out + (t - t0) * (b_in - a_out) / (t1 - t0), bp.y});
            } else {
                push(t, {xbase(bp.x, false), bp.y});
            }
        }
    }

    // Pull the mark at z onto the boundary with short legs along the original
    // curve. At a peak the outgoing leg must stay above the incoming one, so
    // the right leg is also tried much shorter than the left.
    void dip(const Rational& z) {
        std::size_t k = 0;
        while (verts_[k].first != z) ++k;
        const bool left = z > 0 && !in_b(z);
        const bool right = z < 1 && !in_a(z) && !in_c(z);
        const Point2 orig = verts_[k].second;
        verts_[k].second.x = Rational(0);
        if (!left && !right) return;
        Rational lam_l(1, 2);
        for (int rl = 0; rl < 48; ++rl, lam_l = lam_l / Rational(2)) {
            Rational lam_r = lam_l;
            for (int rr = 0; rr < (right ? 48 : 1); ++rr, lam_r = lam_r / Rational(2)) {
                auto trial = verts_;
                std::size_t kk = k;
                if (left) {
                    const auto& [tp, pp] = verts_[k - 1];
                    trial.insert(trial.begin() + static_cast<std::ptrdiff_t>(k),
                                 {z - lam_l * (z - tp), lerp(orig, pp, lam_l)});
                    ++kk;
                }
                if (right) {
                    const auto& [tn, pn] = verts_[k + 1];
                    trial.insert(trial.begin() + static_cast<std::ptrdiff_t>(kk + 1),
                                 {z + lam_r * (tn - z), lerp(orig, pn, lam_r)});
                }
                std::vector<Point2> pts;
                for (const auto& v : trial) pts.push_back(v.second);
                if ((!left || segment_clear(pts, kk - 1)) && (!right || segment_clear(pts, kk)) &&
                    sweep_clear(pts, kk, orig, left, right)) {
                    verts_ = std::move(trial);
                    return;
                }
            }
        }
        throw Error(ErrorKind::InfeasiblePerturbation, "no clear approach to the boundary at z=" + z.str());
    }

    // The legs replace the collapsed ray from (0, f(z)) to the original
    // mark; the triangles between ray and legs must hold nothing else, so
    // the picture is only pinched, never rearranged.
    static bool sweep_clear(const std::vector<Point2>& pts, std::size_t kk, const Point2& orig, bool left,
                            bool right) {
        const Point2& d = pts[kk];
        const std::size_t lo = left ? kk - 1 : kk, hi = right ? kk + 1 : kk;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (lo <= i && i <= hi) continue;
            if (left && in_triangle(pts[i], d, orig, pts[kk - 1])) return false;
            if (right && in_triangle(pts[i], d, orig, pts[kk + 1])) return false;
        }
        if (left && right) {
            const Segment ray{d, orig};
            for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
                if (i == kk - 1 || i == kk) continue;
                if (segments_touch(ray, {pts[i], pts[i + 1]})) return false;
            }
        }
        return true;
    }

    const PLMap& f_;
    const MarkedSet& Z_;
    const PLMap& g_;
    Rational x0_, spread_, w_, eta_;
    std::vector<Rational> cs_;
    std::vector<Rational> parts_;
    std::map<Rational, const VisorMember*> by_a_, by_b_;
    std::map<Rational, std::pair<Rational, Rational>> slot_;  // v -> (b', a')
    std::vector<std::pair<Rational, Point2>> verts_;
};

}  // namespace detail

/// Embeds the graph of f in the half-plane x >= 0 within eps of {0} x f,
/// touching the boundary exactly at the marked points, with every visor
/// block tucked into a slot at its target.
inline HalfPlaneArc build_half_plane_arc(const PLMap& f, const MarkedSet& Z, const Rational& eps) {
    if (eps.sign() <= 0) throw Error(ErrorKind::PreconditionViolated, "eps must be positive");
    require_order_hypothesis(f, Z);
    detail::require_no_plateaus(f);
    const VisorFamily fam = assign_targets(f, Z, choose_visor_family(f, Z));
    const PerturbedMap pm = perturb_map(f, Z, fam, eps);
    return detail::ArcBuilder(f, Z, fam, pm.fprime, eps).build();
}

struct ArcReport {
    bool well_formed = true;
    bool conclusion1 = true;  // within eps of {0} x f
    bool conclusion2 = true;  // boundary contact exactly at marks
    bool conclusion3 = true;  // rest of the arc outside each mark-to-mark loop
    bool injective = true;
    std::vector<std::string> witnesses;
    bool all() const { return well_formed && conclusion1 && conclusion2 && conclusion3 && injective; }
};

/// Independent exact check of a half-plane arc against (f, Z, eps).
inline ArcReport verify_half_plane_arc(const PLMap& f, const MarkedSet& Z, const Rational& eps,
                                       const HalfPlaneArc& arc) {
    ArcReport r;
    const auto& v = arc.path.vertices;
    const auto& t = arc.params;
    auto fail = [&](bool& flag, std::string why) {
        flag = false;
        r.witnesses.push_back(std::move(why));
    };
    if (v.size() < 2 || v.size() != t.size() || t.front() != 0 || t.back() != 1) {
        fail(r.well_formed, "params must run from 0 to 1, one per vertex");
        return r;
    }
    for (std::size_t i = 0; i + 1 < t.size(); ++i)
        if (!(t[i] < t[i + 1])) {
            fail(r.well_formed, "params not increasing at vertex " + std::to_string(i + 1));
            return r;
        }

    // (1): the offset from (0, f(t)) is linear between consecutive knots of
    // either map, so checking the knots bounds everything.
    std::set<Rational> knots(t.begin(), t.end());
    for (const auto& p : f.breakpoints()) knots.insert(p.x);
    std::size_t seg = 0;
    for (const auto& s : knots) {
        while (seg + 2 < t.size() && t[seg + 1] < s) ++seg;
        const Rational lam = (s - t[seg]) / (t[seg + 1] - t[seg]);
        const Point2 p = detail::lerp(v[seg], v[seg + 1], lam);
        const Rational d = dist_sq(p, Point2{Rational(0), f(s)});
        if (!(d < eps * eps)) {
            fail(r.conclusion1, "(1) t=" + s.str() + " at (" + p.x.str() + "," + p.y.str() + "), distance^2 " + d.str());
            break;
        }
    }

    // (2)
    std::vector<std::size_t> mark_at(Z.size(), v.size());
    for (const auto& [j, k] : arc.marks)
        if (j >= 1 && j <= Z.size() && k < v.size()) mark_at[j - 1] = k;
    for (std::size_t j = 0; j < Z.size(); ++j) {
        const std::size_t k = mark_at[j];
        if (k == v.size() || t[k] != Z[j] || v[k] != Point2{Rational(0), f(Z[j])})
            fail(r.conclusion2, "(2) z_" + std::to_string(j + 1) + " is not marked at (0, f(z))");
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
        const bool marked = std::find(mark_at.begin(), mark_at.end(), i) != mark_at.end();
        if (v[i].x.sign() < 0 || (v[i].x.sign() == 0 && !marked) || (marked && v[i].x.sign() != 0)) {
            fail(r.conclusion2, "(2) vertex " + std::to_string(i) + " at x=" + v[i].x.str());
            break;
        }
        if (i + 1 < v.size() && v[i].x.sign() == 0 && v[i + 1].x.sign() == 0) {
            fail(r.conclusion2, "(2) segment " + std::to_string(i) + " runs along the boundary");
            break;
        }
    }

    if (!polyline_simple(arc.path)) fail(r.injective, "polyline is not simple");

    // (3)
    if (r.conclusion2) {
        for (std::size_t j = 0; j + 1 < Z.size(); ++j) {
            const std::size_t k1 = mark_at[j], k2 = mark_at[j + 1];
            std::vector<Point2> loop(v.begin() + static_cast<std::ptrdiff_t>(k1),
                                     v.begin() + static_cast<std::ptrdiff_t>(k2) + 1);
            if (!closed_loop_simple(loop)) {
                fail(r.conclusion3, "(3) loop " + std::to_string(j + 1) + " is not simple");
                continue;
            }
            const Segment wall{v[k2], v[k1]};
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (k1 <= i && i <= k2) continue;
                if (point_vs_loop_unchecked(v[i], loop) != Location::Outside) {
                    fail(r.conclusion3, "(3) vertex " + std::to_string(i) + " inside loop " + std::to_string(j + 1));
                    break;
                }
                if (i + 1 < v.size() && !(k1 <= i + 1 && i + 1 <= k2) && segments_touch({v[i], v[i + 1]}, wall)) {
                    fail(r.conclusion3, "(3) segment " + std::to_string(i) + " meets the boundary of loop " +
                                            std::to_string(j + 1));
                    break;
                }
            }
        }
    }
    return r;
}

}  // namespace knaster

#endif  // KNASTER_TUCK_HPP
