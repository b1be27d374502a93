#ifndef KNASTER_EMBED_HPP
#define KNASTER_EMBED_HPP

#include "knaster/geom.hpp"
#include "knaster/plmap.hpp"
#include "knaster/tuck.hpp"
#include "knaster/visor.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

// Stagewise plane embeddings. Every level draws its arc in a picture strip
// [0,1] x [0,1] whose first coordinate is a transverse offset and whose
// second is the parameter of the previous level's arc. A tube maps that
// strip piecewise affinely onto a one-sided neighbourhood of the previous
// arc; level 1 maps it onto a thin rectangle beside {0} x [0,1]. The plane
// curve of stage i is the image of its arc under the composite of tubes.

namespace knaster {

/// One-sided corridor around a spine with strictly increasing parameters
/// t_0 = 0 < ... < t_n = 1. Column k of the strip, [0,1] x [t_k, t_{k+1}],
/// is cut along its diagonal into two triangles mapped affinely onto the
/// quad P_k, P_{k+1}, P_{k+1} + m_{k+1}, P_k + m_k.
struct Tube {
    Polyline spine;
    std::vector<Rational> params;
    std::vector<Point2> transversals;
    std::vector<Rational> halfwidth;  // per spine segment
    int side = 1;                     // +1 left of the spine, -1 right
    friend bool operator==(const Tube&, const Tube&) = default;
};

struct AffinePiece {
    std::array<Point2, 3> src;  // triangle of the strip
    std::array<Point2, 3> dst;  // its image
};

namespace detail {

inline Point2 affine_apply(const std::array<Point2, 3>& from, const std::array<Point2, 3>& to, const Point2& p) {
    const Point2 e1 = from[1] - from[0];
    const Point2 e2 = from[2] - from[0];
    const Rational area = cross(e1, e2);
    const Point2 r = p - from[0];
    const Rational l1 = cross(r, e2) / area;
    const Rational l2 = cross(e1, r) / area;
    return to[0] + l1 * (to[1] - to[0]) + l2 * (to[2] - to[0]);
}

inline Rational linf(const Point2& v) { return max(abs(v.x), abs(v.y)); }

inline Point2 linf_normalized(const Point2& v) {
    const Rational n = linf(v);
    return {v.x / n, v.y / n};
}

inline Point2 side_normal(const Point2& d, int side) {
    return linf_normalized(side > 0 ? Point2{-d.y, d.x} : Point2{d.y, -d.x});
}

inline bool in_unit_square(const Point2& p) {
    return p.x.sign() >= 0 && p.x <= 1 && p.y.sign() >= 0 && p.y <= 1;
}

inline std::array<Point2, 3> column_triangle(const Rational& t0, const Rational& t1, int which) {
    const Point2 a{Rational(0), t0}, b{Rational(0), t1}, c{Rational(1), t1}, d{Rational(1), t0};
    if (which == 0) return {a, b, c};
    return {a, c, d};
}

inline void require_params(const std::vector<Rational>& params, std::size_t n) {
    if (params.size() != n || n < 2) throw Error(ErrorKind::PreconditionViolated, "spine needs one parameter per vertex");
    if (!params.front().is_zero() || params.back() != 1)
        throw Error(ErrorKind::PreconditionViolated, "spine parameters must run from 0 to 1");
    for (std::size_t i = 1; i < n; ++i)
        if (!(params[i - 1] < params[i]))
            throw Error(ErrorKind::PreconditionViolated, "spine parameters must increase strictly");
}

}  // namespace detail

/// Tube around `spine` with transversals h * b_k, where b_k is the
/// sup-normalised sum of the unit-ish normals on `side` of the adjacent
/// segments.
inline Tube build_tube(const Polyline& spine, const std::vector<Rational>& params, int side, const Rational& h) {
    const auto& v = spine.vertices;
    detail::require_params(params, v.size());
    if (h.sign() <= 0) throw Error(ErrorKind::TubeTooNarrow, "halfwidth must be positive");
    Tube t{spine, params, {}, std::vector<Rational>(v.size() - 1, h), side > 0 ? 1 : -1};
    const std::size_t n = v.size();
    for (std::size_t k = 0; k < n; ++k) {
        Point2 b;
        if (k == 0) {
            b = detail::side_normal(v[1] - v[0], t.side);
        } else if (k + 1 == n) {
            b = detail::side_normal(v[k] - v[k - 1], t.side);
        } else {
            b = detail::side_normal(v[k] - v[k - 1], t.side) + detail::side_normal(v[k + 1] - v[k], t.side);
            if (b.x.is_zero() && b.y.is_zero()) b = detail::side_normal(v[k] - v[k - 1], t.side);
            b = detail::linf_normalized(b);
        }
        t.transversals.push_back(h * b);
    }
    return t;
}

inline std::vector<AffinePiece> tube_pieces(const Tube& t) {
    std::vector<AffinePiece> out;
    const auto& P = t.spine.vertices;
    const auto& m = t.transversals;
    for (std::size_t k = 0; k + 1 < P.size(); ++k) {
        out.push_back({detail::column_triangle(t.params[k], t.params[k + 1], 0), {P[k], P[k + 1], P[k + 1] + m[k + 1]}});
        out.push_back({detail::column_triangle(t.params[k], t.params[k + 1], 1), {P[k], P[k + 1] + m[k + 1], P[k] + m[k]}});
    }
    return out;
}

namespace detail {

inline bool boxes_apart(const std::array<Point2, 3>& a, const std::array<Point2, 3>& b) {
    auto lo = [](const std::array<Point2, 3>& t, auto get) { return min(min(get(t[0]), get(t[1])), get(t[2])); };
    auto hi = [](const std::array<Point2, 3>& t, auto get) { return max(max(get(t[0]), get(t[1])), get(t[2])); };
    auto gx = [](const Point2& p) { return p.x; };
    auto gy = [](const Point2& p) { return p.y; };
    return hi(a, gx) < lo(b, gx) || hi(b, gx) < lo(a, gx) || hi(a, gy) < lo(b, gy) || hi(b, gy) < lo(a, gy);
}

// Images of two strip triangles may meet only in the image of their common face.
inline bool pieces_compatible(const AffinePiece& p, const AffinePiece& q) {
    std::vector<std::pair<int, int>> shared;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (p.src[i] == q.src[j]) shared.push_back({i, j});
    if (shared.empty() && boxes_apart(p.dst, q.dst)) return true;
    if (shared.size() == 2) {
        const Point2& u = p.dst[shared[0].first];
        const Point2& v = p.dst[shared[1].first];
        const int a = 3 - shared[0].first - shared[1].first;
        const int b = 3 - shared[0].second - shared[1].second;
        return orient(u, v, p.dst[a]) * orient(u, v, q.dst[b]) < 0;
    }
    std::optional<Point2> common;
    if (shared.size() == 1) common = p.dst[shared[0].first];
    for (int i = 0; i < 3; ++i) {
        const Segment e{p.dst[i], p.dst[(i + 1) % 3]};
        for (int j = 0; j < 3; ++j) {
            const Intersection x = seg_intersection(e, Segment{q.dst[j], q.dst[(j + 1) % 3]});
            if (std::holds_alternative<NoIntersection>(x)) continue;
            const auto* pt = std::get_if<PointIntersection>(&x);
            if (pt == nullptr || !common || !(pt->p == *common)) return false;
        }
    }
    for (int i = 0; i < 3; ++i) {
        if (!(common && p.dst[i] == *common) && in_triangle(p.dst[i], q.dst[0], q.dst[1], q.dst[2])) return false;
        if (!(common && q.dst[i] == *common) && in_triangle(q.dst[i], p.dst[0], p.dst[1], p.dst[2])) return false;
    }
    return true;
}

}  // namespace detail

/// Failed tube invariants, empty when the tube is a valid piecewise-affine
/// embedding of the strip. `nested` also demands the image lie in the unit
/// square of the previous picture.
inline std::vector<std::string> tube_failures(const Tube& t, bool nested) {
    std::vector<std::string> out;
    const std::size_t n = t.spine.vertices.size();
    if (n < 2 || t.params.size() != n || t.transversals.size() != n || t.halfwidth.size() + 1 != n) {
        out.push_back("tube arrays have inconsistent sizes");
        return out;
    }
    if (t.side != 1 && t.side != -1) out.push_back("side flag must be +1 or -1");
    if (!t.params.front().is_zero() || t.params.back() != 1) out.push_back("spine parameters do not run from 0 to 1");
    for (std::size_t i = 1; i < n; ++i)
        if (!(t.params[i - 1] < t.params[i])) out.push_back("spine parameters not increasing at " + std::to_string(i));
    if (!out.empty()) return out;
    const Clearance cl = min_clearance_sq(t.spine);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const Rational& h = t.halfwidth[k];
        if (h.sign() <= 0) out.push_back("non-positive halfwidth on segment " + std::to_string(k));
        if (!cl.infinite && cl.value < Rational(4) * h * h)
            out.push_back("halfwidth on segment " + std::to_string(k) + " exceeds the clearance bound");
        for (std::size_t e : {k, k + 1})
            if (Rational(2) * h * h < dot(t.transversals[e], t.transversals[e]))
                out.push_back("transversal " + std::to_string(e) + " longer than its halfwidth allows");
    }
    const auto pieces = tube_pieces(t);
    for (std::size_t i = 0; i < pieces.size(); ++i)
        if (orient(pieces[i].dst[0], pieces[i].dst[1], pieces[i].dst[2]) != t.side)
            out.push_back("triangle " + std::to_string(i) + " degenerate or folded");
    if (!out.empty()) return out;
    for (std::size_t i = 0; i < pieces.size(); ++i)
        for (std::size_t j = i + 1; j < pieces.size(); ++j)
            if (!detail::pieces_compatible(pieces[i], pieces[j])) {
                out.push_back("triangles " + std::to_string(i) + " and " + std::to_string(j) + " overlap");
                return out;
            }
    if (nested)
        for (const auto& p : pieces)
            for (const auto& q : p.dst)
                if (!detail::in_unit_square(q)) {
                    out.push_back("tube leaves the previous strip");
                    return out;
                }
    return out;
}

/// Squared bounds on the derivative of the strip map over all pieces:
/// transverse column, along-spine column, and Frobenius norm.
struct TubeBounds {
    Rational transverse_sq;
    Rational along_sq;
    Rational frobenius_sq;
    friend bool operator==(const TubeBounds&, const TubeBounds&) = default;
};

inline TubeBounds tube_bounds(const Tube& t) {
    TubeBounds b;
    for (const auto& p : tube_pieces(t)) {
        // Columns of the linear part: images of the unit X and Y steps.
        const Point2 o = detail::affine_apply(p.src, p.dst, p.src[0]);
        const Point2 ux = detail::affine_apply(p.src, p.dst, p.src[0] + Point2{Rational(1), Rational(0)}) - o;
        const Point2 uy = detail::affine_apply(p.src, p.dst, p.src[0] + Point2{Rational(0), Rational(1)}) - o;
        b.transverse_sq = max(b.transverse_sq, dot(ux, ux));
        b.along_sq = max(b.along_sq, dot(uy, uy));
        b.frobenius_sq = max(b.frobenius_sq, dot(ux, ux) + dot(uy, uy));
    }
    return b;
}

namespace detail {

inline std::size_t column_of(const Tube& t, const Rational& y) {
    auto it = std::upper_bound(t.params.begin(), t.params.end(), y);
    std::size_t k = static_cast<std::size_t>(it - t.params.begin());
    if (k == 0) return 0;
    return std::min(k - 1, t.params.size() - 2);
}

inline AffinePiece column_piece(const Tube& t, std::size_t k, int which) {
    const auto& P = t.spine.vertices;
    const auto& m = t.transversals;
    if (which == 0)
        return {column_triangle(t.params[k], t.params[k + 1], 0), {P[k], P[k + 1], P[k + 1] + m[k + 1]}};
    return {column_triangle(t.params[k], t.params[k + 1], 1), {P[k], P[k + 1] + m[k + 1], P[k] + m[k]}};
}

}  // namespace detail

/// Image of a strip point. Points with X < 0 use the affine extension of
/// the spine-side triangle of their column.
inline Point2 tube_map(const Tube& t, const Point2& p) {
    if (p.y.sign() < 0 || p.y > 1 || p.x > 1) throw Error(ErrorKind::OutOfDomain, "point outside the strip");
    const std::size_t k = detail::column_of(t, p.y);
    for (int which : {0, 1}) {
        const AffinePiece piece = detail::column_piece(t, k, which);
        if (p.x.sign() < 0 || detail::in_triangle(p, piece.src[0], piece.src[1], piece.src[2]))
            return detail::affine_apply(piece.src, piece.dst, p);
    }
    throw Error(ErrorKind::OutOfDomain, "point outside the strip");
}

/// Image of the strip segment a-b as (position along a-b, image point)
/// samples; the map is affine between consecutive samples.
inline std::vector<std::pair<Rational, Point2>> tube_map_segment(const Tube& t, const Point2& a, const Point2& b) {
    std::vector<Rational> s{Rational(0), Rational(1)};
    const Point2 d = b - a;
    const Rational ylo = min(a.y, b.y), yhi = max(a.y, b.y);
    auto add = [&](const Rational& x) {
        if (x.sign() > 0 && x < 1) s.push_back(x);
    };
    const std::size_t last = t.params.size() - 2;
    for (std::size_t k = detail::column_of(t, ylo); k <= last && t.params[k] <= yhi; ++k) {
        const Rational& t0 = t.params[k];
        const Rational& t1 = t.params[k + 1];
        if (!d.y.is_zero()) {
            add((t0 - a.y) / d.y);
            add((t1 - a.y) / d.y);
        }
        // Diagonal of column k: (t1 - t0) X - Y + t0 = 0.
        const Rational w = t1 - t0;
        const Rational den = w * d.x - d.y;
        if (!den.is_zero()) {
            const Rational x = (a.y - t0 - w * a.x) / den;
            const Rational y = a.y + x * d.y;
            if (t0 <= y && y <= t1) add(x);
        }
    }
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    std::vector<std::pair<Rational, Point2>> out;
    out.reserve(s.size());
    for (const auto& x : s) out.push_back({x, tube_map(t, a + x * d)});
    return out;
}

/// Image of a parameterised strip polyline, parameters carried linearly.
inline std::pair<Polyline, std::vector<Rational>> tube_map_polyline(const Tube& t, const Polyline& p,
                                                                    const std::vector<Rational>& params) {
    std::pair<Polyline, std::vector<Rational>> out;
    for (std::size_t i = 0; i + 1 < p.vertices.size(); ++i) {
        const auto samples = tube_map_segment(t, p.vertices[i], p.vertices[i + 1]);
        for (std::size_t j = i == 0 ? 0 : 1; j < samples.size(); ++j) {
            out.first.vertices.push_back(samples[j].second);
            out.second.push_back(params[i] + samples[j].first * (params[i + 1] - params[i]));
        }
    }
    return out;
}

/// Sub-interval of [0,1] on which a + s(b - a) lies in the closed triangle.
inline std::optional<std::pair<Rational, Rational>> clip_to_triangle(const Point2& a, const Point2& b,
                                                                     const std::array<Point2, 3>& tri) {
    const int o = orient(tri[0], tri[1], tri[2]);
    if (o == 0) return std::nullopt;
    Rational lo(0), hi(1);
    for (int i = 0; i < 3; ++i) {
        const Point2& u = tri[i];
        const Point2 e = tri[(i + 1) % 3] - u;
        const Rational g0 = Rational(o) * cross(e, a - u);
        const Rational g1 = Rational(o) * cross(e, b - u);
        if (g0 == g1) {
            if (g0.sign() < 0) return std::nullopt;
        } else if (g0 < g1) {
            lo = max(lo, -g0 / (g1 - g0));
        } else {
            hi = min(hi, g0 / (g0 - g1));
        }
        if (hi < lo) return std::nullopt;
    }
    return std::make_pair(lo, hi);
}


// ---------------------------------------------------------------------------
// Stages

/// One level of the pipeline: the bonding map and marked set, the arc drawn
/// for them, and the tube carrying this level's strip into the previous
/// picture (into the plane for level 1).
struct EmbeddingLevel {
    PLMap map;
    MarkedSet marks;
    Rational eps;          // stage tolerance
    Rational picture_eps;  // tolerance handed to the arc construction
    HalfPlaneArc arc;      // as built
    PLMap squeeze;         // heights -> strip heights; fixes mark heights, avoids 0 and 1 elsewhere
    Tube tube;
    friend bool operator==(const EmbeddingLevel&, const EmbeddingLevel&) = default;
};

/// Access probe for one scheduled point. `param` is the point's parameter
/// on the newest arc; the probe ends at its mark in the plane.
struct Whisker {
    std::size_t owner = 0;
    std::size_t created = 0;
    Rational param;
    Polyline probe;
    friend bool operator==(const Whisker&, const Whisker&) = default;
};

struct EmbeddingStage {
    std::vector<EmbeddingLevel> levels;
    std::vector<Whisker> whiskers;

    std::size_t index() const { return levels.size(); }
    const EmbeddingLevel& top() const { return levels.back(); }
    friend bool operator==(const EmbeddingStage&, const EmbeddingStage&) = default;
};

struct TubeContact {
    std::size_t probe_segment = 0;
    std::size_t piece = 0;  // triangle of the stage's own tube
    Segment where;          // plane part of the probe inside that triangle
    friend bool operator==(const TubeContact&, const TubeContact&) = default;
};

struct AccessibilityCertificate {
    std::size_t stage = 0;
    std::size_t owner = 0;
    Polyline probe;
    bool pass = false;
    std::vector<TubeContact> witnesses;
    std::string reason;
};

/// The stage arc in strip coordinates: heights pass through the squeeze.
inline Polyline picture_arc(const EmbeddingLevel& level) {
    Polyline p;
    p.vertices.reserve(level.arc.path.vertices.size());
    for (const auto& v : level.arc.path.vertices) p.vertices.push_back({v.x, level.squeeze(v.y)});
    return p;
}

/// Strip height of the mark for parameter z on this level's arc.
inline Rational mark_height(const EmbeddingLevel& level, const Rational& z) { return level.squeeze(level.map(z)); }

namespace detail {

inline Polyline base_spine() { return Polyline{{{Rational(0), Rational(0)}, {Rational(0), Rational(1)}}}; }

inline Tube base_tube() { return build_tube(base_spine(), {Rational(0), Rational(1)}, -1, Rational(1)); }

// Increasing PL map fixing every mark height and pulling 0 and 1 (when not
// mark heights) in by delta.
inline PLMap make_squeeze(const std::vector<Rational>& heights, Rational delta) {
    for (const auto& h : heights) {
        if (h.sign() > 0) delta = min(delta, h / Rational(2));
        if (h < 1) delta = min(delta, (Rational(1) - h) / Rational(2));
    }
    std::vector<Breakpoint> pts;
    const bool has0 = std::find(heights.begin(), heights.end(), Rational(0)) != heights.end();
    const bool has1 = std::find(heights.begin(), heights.end(), Rational(1)) != heights.end();
    pts.push_back({Rational(0), has0 ? Rational(0) : delta});
    std::vector<Rational> inner;
    for (const auto& h : heights)
        if (h.sign() > 0 && h < 1) inner.push_back(h);
    std::sort(inner.begin(), inner.end());
    inner.erase(std::unique(inner.begin(), inner.end()), inner.end());
    for (const auto& h : inner) pts.push_back({h, h});
    pts.push_back({Rational(1), has1 ? Rational(1) : Rational(1) - delta});
    return PLMap(std::move(pts));
}

inline std::vector<Rational> mark_heights(const PLMap& f, const MarkedSet& Z) {
    std::vector<Rational> out;
    for (const auto& z : Z.points) out.push_back(f(z));
    return out;
}

inline Rational squeeze_deviation(const PLMap& rho) {
    Rational d(0);
    for (const auto& b : rho.breakpoints()) d = max(d, abs(b.y - b.x));
    return d;
}

// Product of squared Frobenius bounds of the tubes of levels [0, upto).
inline Rational lipschitz_sq(const std::vector<EmbeddingLevel>& levels, std::size_t upto) {
    Rational l(1);
    for (std::size_t k = 0; k < upto; ++k) l *= tube_bounds(levels[k].tube).frobenius_sq;
    return l;
}

inline Rational pow2(std::size_t k) {
    Rational r(1);
    for (std::size_t i = 0; i < k; ++i) r *= Rational(2);
    return r;
}

inline Error clause(const std::string& which, const std::string& what) {
    return Error(ErrorKind::PreconditionViolated, "clause " + which + ": " + what);
}

// Side of the spine on which the arc's interior marks open up, or 0 when
// there are none.
inline int opening_side(const HalfPlaneArc& arc, const Polyline& spine) {
    int side = 0;
    const auto& v = spine.vertices;
    for (const auto& [j, k] : arc.marks) {
        if (k == 0 || k + 1 == v.size()) continue;
        const int o = orient(v[k - 1], v[k], v[k + 1]);
        if (o == 0) continue;
        if (side != 0 && side != o)
            throw clause("side", "marked points are crossed in opposite directions; no one-sided tube fits");
        side = o;
    }
    return side;
}

inline Point2 polyline_at(const Polyline& p, const std::vector<Rational>& params, const Rational& t) {
    auto it = std::upper_bound(params.begin(), params.end(), t);
    std::size_t k = static_cast<std::size_t>(it - params.begin());
    if (k == 0) return p.vertices.front();
    if (k >= params.size()) return p.vertices.back();
    --k;
    if (t == params[k]) return p.vertices[k];
    const Rational s = (t - params[k]) / (params[k + 1] - params[k]);
    return p.vertices[k] + s * (p.vertices[k + 1] - p.vertices[k]);
}

}  // namespace detail

/// Plane image of a point of the top level's strip.
inline Point2 materialize_point(const EmbeddingStage& st, Point2 p) {
    for (std::size_t k = st.levels.size(); k-- > 0;) p = tube_map(st.levels[k].tube, p);
    return p;
}

/// Plane curve of the stage with its parameters. Sizes grow by roughly the
/// lap count of the bonding map per level; `max_vertices` caps the work.
inline std::pair<Polyline, std::vector<Rational>> materialize_curve(const EmbeddingStage& st,
                                                                    std::size_t max_vertices = 2000000) {
    std::pair<Polyline, std::vector<Rational>> cur{picture_arc(st.top()), st.top().arc.params};
    for (std::size_t k = st.levels.size(); k-- > 0;) {
        cur = tube_map_polyline(st.levels[k].tube, cur.first, cur.second);
        if (cur.first.vertices.size() > max_vertices)
            throw Error(ErrorKind::PreconditionViolated,
                        "stage curve exceeds " + std::to_string(max_vertices) + " vertices");
    }
    return cur;
}

/// Plane outline of the stage's tube: spine side, then the far side back.
inline Polyline materialize_tube_outline(const EmbeddingStage& st, std::size_t max_vertices = 2000000) {
    Polyline strip{{{Rational(0), Rational(0)}, {Rational(0), Rational(1)}, {Rational(1), Rational(1)},
                    {Rational(1), Rational(0)}, {Rational(0), Rational(0)}}};
    const std::vector<Rational> idx{Rational(0), Rational(1), Rational(2), Rational(3), Rational(4)};
    // The strip outline lives in the top level's own strip coordinates.
    std::pair<Polyline, std::vector<Rational>> cur{strip, idx};
    for (std::size_t k = st.levels.size(); k-- > 0;) {
        cur = tube_map_polyline(st.levels[k].tube, cur.first, cur.second);
        if (cur.first.vertices.size() > max_vertices)
            throw Error(ErrorKind::PreconditionViolated, "tube outline exceeds the vertex cap");
    }
    return cur.first;
}

/// Pulls the probe back through every tube of the stage and reports whether
/// it meets the stage's tube exactly in its terminal vertex.
inline AccessibilityCertificate certify_whisker(const EmbeddingStage& st, const Whisker& w) {
    AccessibilityCertificate c{st.index(), w.owner, w.probe, false, {}, {}};
    struct Piece {
        std::size_t seg;
        Rational s0, s1;
        Point2 a, b;
        std::size_t tri;
    };
    std::vector<Piece> pieces;
    const auto& pv = w.probe.vertices;
    if (pv.size() < 2) {
        c.reason = "probe has no segments";
        return c;
    }
    for (std::size_t i = 0; i + 1 < pv.size(); ++i) pieces.push_back({i, Rational(0), Rational(1), pv[i], pv[i + 1], 0});
    for (const auto& level : st.levels) {
        const auto tris = tube_pieces(level.tube);
        std::vector<Piece> next;
        for (const auto& p : pieces) {
            for (std::size_t ti = 0; ti < tris.size(); ++ti) {
                const auto clip = clip_to_triangle(p.a, p.b, tris[ti].dst);
                if (!clip) continue;
                const auto& [u0, u1] = *clip;
                const Point2 a = detail::affine_apply(tris[ti].dst, tris[ti].src, p.a + u0 * (p.b - p.a));
                const Point2 b = detail::affine_apply(tris[ti].dst, tris[ti].src, p.a + u1 * (p.b - p.a));
                Piece q{p.seg, p.s0 + u0 * (p.s1 - p.s0), p.s0 + u1 * (p.s1 - p.s0), a, b, ti};
                bool dup = false;
                for (const auto& r : next)
                    if (r.a == q.a && r.b == q.b) dup = true;
                if (!dup) next.push_back(std::move(q));
            }
        }
        pieces = std::move(next);
        if (pieces.empty()) break;
    }
    if (pieces.empty()) {
        c.reason = "probe does not reach the tube";
        return c;
    }
    const Point2 terminal{Rational(0), mark_height(st.top(), w.param)};
    for (const auto& p : pieces) {
        if (p.a == terminal && p.b == terminal) continue;
        const Point2 d = pv[p.seg + 1] - pv[p.seg];
        c.witnesses.push_back({p.seg, p.tri, Segment{pv[p.seg] + p.s0 * d, pv[p.seg] + p.s1 * d}});
    }
    if (!c.witnesses.empty()) {
        c.reason = "probe meets the tube away from its terminal vertex";
        return c;
    }
    if (!(pv.back() == materialize_point(st, terminal))) {
        c.reason = "probe does not end at its mark";
        return c;
    }
    c.pass = true;
    return c;
}

inline std::vector<AccessibilityCertificate> access_certificates(const EmbeddingStage& st) {
    std::vector<AccessibilityCertificate> out;
    for (const auto& w : st.whiskers) out.push_back(certify_whisker(st, w));
    return out;
}


/// Squared-form step certificate for level k >= 1 (0-based): the plane curve
/// of that stage stays within eps_k of the previous curve composed with f_k.
/// With L^2 the product of the lower tubes' Frobenius bounds, it demands
/// L^2 Ux^2 < eps^2 and 4 L^2 Uy^2 (eps' + squeeze deviation)^2 < eps^2.
inline std::vector<std::string> step_certificate_failures(const std::vector<EmbeddingLevel>& levels, std::size_t k) {
    std::vector<std::string> out;
    const EmbeddingLevel& lv = levels[k];
    const Rational lam = detail::lipschitz_sq(levels, k);
    const TubeBounds b = tube_bounds(lv.tube);
    const Rational e2 = lv.eps * lv.eps;
    Rational xmax(0);
    for (const auto& v : lv.arc.path.vertices) xmax = max(xmax, v.x);
    if (!(Rational(4) * lam * b.transverse_sq * xmax * xmax < e2))
        out.push_back("level " + std::to_string(k + 1) + ": transverse term of the step bound too large");
    const Rational dy = lv.picture_eps + detail::squeeze_deviation(lv.squeeze);
    if (!(Rational(4) * lam * b.along_sq * dy * dy < e2))
        out.push_back("level " + std::to_string(k + 1) + ": along-spine term of the step bound too large");
    return out;
}

namespace detail {

inline Polyline new_whisker(const std::vector<EmbeddingLevel>& levels, const Rational& height, const Rational& reach) {
    std::pair<Polyline, std::vector<Rational>> cur{Polyline{{{-reach, height}, {Rational(0), height}}},
                                                   {Rational(0), Rational(1)}};
    for (std::size_t k = levels.size(); k-- > 0;) cur = tube_map_polyline(levels[k].tube, cur.first, cur.second);
    return cur.first;
}

inline HalfPlaneArc checked_arc(const PLMap& f, const MarkedSet& Z, const Rational& eps) {
    HalfPlaneArc arc = build_half_plane_arc(f, Z, eps);
    for (const auto& v : arc.path.vertices)
        if (!(v.x < 1)) throw Error(ErrorKind::TubeTooNarrow, "arc leaves the strip");
    return arc;
}

}  // namespace detail

/// Stage 1: the arc for (f_1, Z_1) drawn beside {0} x [0,1], with a
/// horizontal whisker from x = -1 to each mark.
inline EmbeddingStage init_stage(const PLMap& f, const MarkedSet& Z, const Rational& eps) {
    if (eps.sign() <= 0) throw Error(ErrorKind::PreconditionViolated, "eps must be positive");
    EmbeddingLevel lv{f, Z, eps, eps, detail::checked_arc(f, Z, eps), PLMap::identity(), detail::base_tube()};
    lv.squeeze = detail::make_squeeze(detail::mark_heights(f, Z), eps);
    EmbeddingStage st{{std::move(lv)}, {}};
    for (std::size_t j = 0; j < Z.size(); ++j) {
        const Rational y = mark_height(st.top(), Z[j]);
        st.whiskers.push_back({j, 1, Z[j], Polyline{{{Rational(-1), y}, {Rational(0), y}}}});
    }
    return st;
}

/// Next stage inside a one-sided tube around the current arc. Marks of
/// Z_next over existing marks keep their whiskers; the rest get short new
/// whiskers of reach eps'.
inline EmbeddingStage refine_stage(const EmbeddingStage& prev, const PLMap& f, const MarkedSet& Z,
                                   const Rational& eps) {
    if (prev.levels.empty()) throw Error(ErrorKind::PreconditionViolated, "previous stage is empty");
    const std::size_t k = prev.index();  // 0-based index of the new level
    const Rational& eps1 = prev.levels.front().eps;
    if (eps.sign() <= 0 || eps1 < eps * detail::pow2(k)) throw detail::clause("budget", "eps exceeds eps_1 / 2^(i-1)");
    for (std::size_t a = 0; a < Z.size(); ++a)
        for (std::size_t b = a + 1; b < Z.size(); ++b)
            if (f(Z[a]) == f(Z[b])) throw detail::clause("1", "images of marked points are not distinct");
    if (!order_hypothesis_holds(f, Z)) throw detail::clause("2", "map is not order-preserving on the marked points");
    if (!all_visors_removable(f, Z).all_removable) throw detail::clause("3", "some visor is not removable");
    std::vector<std::optional<std::size_t>> continues(Z.size());
    for (std::size_t w = 0; w < prev.whiskers.size(); ++w) {
        bool found = false;
        for (std::size_t j = 0; j < Z.size(); ++j)
            if (f(Z[j]) == prev.whiskers[w].param) {
                continues[j] = w;
                found = true;
            }
        if (!found)
            throw detail::clause("4", "no marked point lies over the mark of point " +
                                          std::to_string(prev.whiskers[w].owner));
    }
    if (!tube_failures(prev.top().tube, k >= 2).empty()) throw detail::clause("5", "previous tube is invalid");

    const EmbeddingLevel& below = prev.top();
    const Polyline spine = picture_arc(below);
    const Rational lam = detail::lipschitz_sq(prev.levels, k);
    const Clearance cl = min_clearance_sq(spine);
    Rational h(1, 4);
    while ((!cl.infinite && cl.value < Rational(4) * h * h) || !(Rational(2) * lam * h * h < eps * eps))
        h /= Rational(2);
    const int opening = detail::opening_side(below.arc, spine);
    std::vector<int> sides = opening != 0 ? std::vector<int>{opening} : std::vector<int>{-1, 1};
    std::optional<Tube> tube;
    for (int side : sides) {
        Rational hh = h;
        for (int tries = 0; tries < 24 && !tube; ++tries, hh /= Rational(2)) {
            Tube t = build_tube(spine, below.arc.params, side, hh);
            if (tube_failures(t, true).empty()) tube = std::move(t);
        }
        if (tube) break;
    }
    if (!tube) throw Error(ErrorKind::TubeTooNarrow, "no valid tube around the level " + std::to_string(k) + " arc");

    const TubeBounds bounds = tube_bounds(*tube);
    Rational pe(1, 4);
    while (pe > eps || !(Rational(16) * lam * bounds.along_sq * pe * pe < eps * eps)) pe /= Rational(2);
    EmbeddingLevel lv{f, Z, eps, pe, detail::checked_arc(f, Z, pe), PLMap::identity(), std::move(*tube)};
    lv.squeeze = detail::make_squeeze(detail::mark_heights(f, Z), pe);

    EmbeddingStage st{prev.levels, {}};
    st.levels.push_back(std::move(lv));
    if (!step_certificate_failures(st.levels, k).empty())
        throw Error(ErrorKind::TubeTooNarrow, step_certificate_failures(st.levels, k).front());
    for (std::size_t j = 0; j < Z.size(); ++j) {
        if (!continues[j]) continue;
        Whisker w = prev.whiskers[*continues[j]];
        w.param = Z[j];
        st.whiskers.push_back(std::move(w));
    }
    std::sort(st.whiskers.begin(), st.whiskers.end(),
              [](const Whisker& a, const Whisker& b) { return a.owner < b.owner; });
    std::size_t owner = prev.whiskers.empty() ? 0 : prev.whiskers.back().owner + 1;
    for (const auto& w : prev.whiskers) owner = std::max(owner, w.owner + 1);
    for (std::size_t j = 0; j < Z.size(); ++j) {
        if (continues[j]) continue;
        const Rational y = mark_height(st.top(), Z[j]);
        std::optional<Whisker> made;
        Rational reach = pe;
        for (int tries = 0; tries < 24 && !made; ++tries, reach /= Rational(2)) {
            try {
                Whisker w{owner, k + 1, Z[j], detail::new_whisker(st.levels, y, reach)};
                if (certify_whisker(st, w).pass) made = std::move(w);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::OutOfDomain) throw;
            }
        }
        if (!made) throw Error(ErrorKind::TubeTooNarrow, "no clear whisker for a new marked point");
        st.whiskers.push_back(std::move(*made));
        ++owner;
    }
    for (const auto& c : access_certificates(st))
        if (!c.pass) throw Error(ErrorKind::TubeTooNarrow, "whisker " + std::to_string(c.owner) + ": " + c.reason);
    return st;
}

/// Every invariant of a stage, re-checked from its stored data.
inline std::vector<std::string> stage_failures(const EmbeddingStage& st) {
    std::vector<std::string> out;
    if (st.levels.empty()) {
        out.push_back("stage has no levels");
        return out;
    }
    const Rational& eps1 = st.levels.front().eps;
    for (std::size_t k = 0; k < st.levels.size(); ++k) {
        const EmbeddingLevel& lv = st.levels[k];
        const std::string at = "level " + std::to_string(k + 1) + ": ";
        if (lv.eps.sign() <= 0 || eps1 < lv.eps * detail::pow2(k)) out.push_back(at + "eps outside the budget");
        if (lv.picture_eps.sign() <= 0 || (k == 0 && lv.picture_eps != lv.eps))
            out.push_back(at + "bad arc tolerance");
        const ArcReport r = verify_half_plane_arc(lv.map, lv.marks, lv.picture_eps, lv.arc);
        if (!r.all()) out.push_back(at + "arc fails: " + (r.witnesses.empty() ? "" : r.witnesses.front()));
        for (std::size_t i = 1; i < lv.squeeze.size(); ++i)
            if (lv.squeeze.slope(i - 1).sign() <= 0) out.push_back(at + "squeeze is not increasing");
        for (const auto& h : detail::mark_heights(lv.map, lv.marks))
            if (lv.squeeze(h) != h) out.push_back(at + "squeeze moves a mark height");
        if (detail::squeeze_deviation(lv.squeeze) > lv.picture_eps) out.push_back(at + "squeeze too strong");
        const Polyline pic = picture_arc(lv);
        const auto heights = detail::mark_heights(lv.map, lv.marks);
        for (const auto& v : pic.vertices) {
            const bool edge = v.y.is_zero() || v.y == 1;
            if (!(v.x < 1) || (edge && std::find(heights.begin(), heights.end(), v.y) == heights.end()))
                out.push_back(at + "arc touches the far side or an end of its strip");
        }
        if (k == 0) {
            if (lv.tube.spine != detail::base_spine()) out.push_back(at + "base spine altered");
            for (const auto& f : tube_failures(lv.tube, false)) out.push_back(at + f);
        } else {
            const EmbeddingLevel& below = st.levels[k - 1];
            if (lv.tube.spine != picture_arc(below) || lv.tube.params != below.arc.params)
                out.push_back(at + "tube spine is not the previous arc");
            for (const auto& f : tube_failures(lv.tube, true)) out.push_back(at + f);
            for (const auto& f : step_certificate_failures(st.levels, k)) out.push_back(f);
        }
    }
    for (const auto& w : st.whiskers)
        if (!st.top().marks.contains(w.param)) out.push_back("whisker " + std::to_string(w.owner) + " lost its mark");
    for (const auto& c : access_certificates(st))
        if (!c.pass) out.push_back("whisker " + std::to_string(c.owner) + ": " + c.reason);
    return out;
}

/// Direct sampled form of the step bound on materialised curves: every
/// vertex of `cur`, every breakpoint of f, and every preimage under f of a
/// vertex parameter of `prev`. Both sides are linear between samples.
inline std::vector<std::string> sampled_step_failures(const std::pair<Polyline, std::vector<Rational>>& cur,
                                                      const std::pair<Polyline, std::vector<Rational>>& prev,
                                                      const PLMap& f, const Rational& eps) {
    std::vector<Rational> ts = cur.second;
    for (const auto& b : f.breakpoints()) ts.push_back(b.x);
    const auto& bp = f.breakpoints();
    for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
        const Rational lo = min(bp[i].y, bp[i + 1].y), hi = max(bp[i].y, bp[i + 1].y);
        if (lo == hi) continue;
        auto it = std::lower_bound(prev.second.begin(), prev.second.end(), lo);
        for (; it != prev.second.end() && *it <= hi; ++it)
            ts.push_back(bp[i].x + (*it - bp[i].y) * (bp[i + 1].x - bp[i].x) / (bp[i + 1].y - bp[i].y));
    }
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    std::vector<std::string> out;
    const Rational e2 = eps * eps;
    for (const auto& t : ts) {
        const Point2 p = detail::polyline_at(cur.first, cur.second, t);
        const Point2 q = detail::polyline_at(prev.first, prev.second, f(t));
        if (!(dist_sq(p, q) < e2)) {
            out.push_back("step bound fails at t = " + t.str());
            if (out.size() >= 5) break;
        }
    }
    return out;
}


/// Re-runs the pipeline from the inputs stored in the stage's levels.
inline EmbeddingStage rebuild_stage(const EmbeddingStage& st) {
    if (st.levels.empty()) throw Error(ErrorKind::PreconditionViolated, "stage has no levels");
    const auto& first = st.levels.front();
    EmbeddingStage out = init_stage(first.map, first.marks, first.eps);
    for (std::size_t k = 1; k < st.levels.size(); ++k)
        out = refine_stage(out, st.levels[k].map, st.levels[k].marks, st.levels[k].eps);
    return out;
}

/// Full check of a stored stage: its own invariants plus agreement with a
/// fresh rebuild from its inputs.
inline std::vector<std::string> verify_stage(const EmbeddingStage& st) {
    std::vector<std::string> out = stage_failures(st);
    try {
        if (rebuild_stage(st) != st) out.push_back("stage differs from its rebuild");
    } catch (const Error& e) {
        out.push_back(std::string("rebuild failed: ") + e.what());
    }
    return out;
}

}  // namespace knaster

#endif  // KNASTER_EMBED_HPP
