#ifndef KNASTER_GEOM_HPP
#define KNASTER_GEOM_HPP

#include "knaster/error.hpp"
#include "knaster/rational.hpp"

#include <algorithm>
#include <optional>
#include <variant>
#include <vector>

// Exact planar predicates over Rational. No tolerances anywhere: every
// distance is squared so it stays in the rational field.

namespace knaster {

struct Point2 {
    Rational x;
    Rational y;
    friend bool operator==(const Point2&, const Point2&) = default;
};

inline Point2 operator+(const Point2& a, const Point2& b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(const Point2& a, const Point2& b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(const Rational& s, const Point2& p) { return {s * p.x, s * p.y}; }

inline Rational dot(const Point2& a, const Point2& b) { return a.x * b.x + a.y * b.y; }
inline Rational cross(const Point2& a, const Point2& b) { return a.x * b.y - a.y * b.x; }
inline Rational dist_sq(const Point2& a, const Point2& b) {
    Point2 d = a - b;
    return dot(d, d);
}

/// Sign of the turn a -> b -> c: +1 left, -1 right, 0 collinear.
inline int orient(const Point2& a, const Point2& b, const Point2& c) {
    return cross(b - a, c - a).sign();
}

struct Segment {
    Point2 a;
    Point2 b;
    friend bool operator==(const Segment&, const Segment&) = default;
};

struct NoIntersection {
    friend bool operator==(const NoIntersection&, const NoIntersection&) = default;
};
struct PointIntersection {
    Point2 p;
    friend bool operator==(const PointIntersection&, const PointIntersection&) = default;
};
struct OverlapIntersection {
    Segment s;
    friend bool operator==(const OverlapIntersection&, const OverlapIntersection&) = default;
};
using Intersection = std::variant<NoIntersection, PointIntersection, OverlapIntersection>;

namespace detail {

// Lexicographic order on points, used to orient collinear overlaps.
inline bool lex_less(const Point2& p, const Point2& q) {
    return p.x < q.x || (p.x == q.x && p.y < q.y);
}

inline bool on_segment(const Point2& p, const Segment& s) {
    if (orient(s.a, s.b, p) != 0) return false;
    return min(s.a.x, s.b.x) <= p.x && p.x <= max(s.a.x, s.b.x) &&
           min(s.a.y, s.b.y) <= p.y && p.y <= max(s.a.y, s.b.y);
}

}  // namespace detail

inline Intersection seg_intersection(const Segment& s1, const Segment& s2) {
    const Point2 r = s1.b - s1.a;
    const Point2 s = s2.b - s2.a;
    const Rational denom = cross(r, s);
    const Point2 qp = s2.a - s1.a;
    if (!denom.is_zero()) {
        Rational t = cross(qp, s) / denom;
        Rational u = cross(qp, r) / denom;
        if (t.sign() < 0 || t > 1 || u.sign() < 0 || u > 1) return NoIntersection{};
        return PointIntersection{s1.a + t * r};
    }
    if (!cross(qp, r).is_zero()) return NoIntersection{};
    // Collinear: intersect the two ranges along the line.
    Point2 lo1 = s1.a, hi1 = s1.b, lo2 = s2.a, hi2 = s2.b;
    if (detail::lex_less(hi1, lo1)) std::swap(lo1, hi1);
    if (detail::lex_less(hi2, lo2)) std::swap(lo2, hi2);
    Point2 lo = detail::lex_less(lo1, lo2) ? lo2 : lo1;
    Point2 hi = detail::lex_less(hi1, hi2) ? hi1 : hi2;
    if (detail::lex_less(hi, lo)) return NoIntersection{};
    if (lo == hi) return PointIntersection{lo};
    return OverlapIntersection{Segment{lo, hi}};
}

inline bool segments_touch(const Segment& s1, const Segment& s2) {
    return !std::holds_alternative<NoIntersection>(seg_intersection(s1, s2));
}

/// Squared distance from p to the closed segment s.
inline Rational point_segment_dist_sq(const Point2& p, const Segment& s) {
    const Point2 d = s.b - s.a;
    const Rational len = dot(d, d);
    if (len.is_zero()) return dist_sq(p, s.a);
    Rational t = dot(p - s.a, d) / len;
    if (t.sign() < 0) t = 0;
    if (t > 1) t = 1;
    return dist_sq(p, s.a + t * d);
}

inline Rational segment_dist_sq(const Segment& s1, const Segment& s2) {
    if (segments_touch(s1, s2)) return Rational(0);
    Rational best = point_segment_dist_sq(s1.a, s2);
    best = min(best, point_segment_dist_sq(s1.b, s2));
    best = min(best, point_segment_dist_sq(s2.a, s1));
    best = min(best, point_segment_dist_sq(s2.b, s1));
    return best;
}

struct Polyline {
    std::vector<Point2> vertices;

    std::size_t segment_count() const { return vertices.size() < 2 ? 0 : vertices.size() - 1; }
    Segment segment(std::size_t i) const { return {vertices[i], vertices[i + 1]}; }
    friend bool operator==(const Polyline&, const Polyline&) = default;
};

/// True iff no two non-adjacent segments meet and adjacent segments share
/// only their common vertex.
inline bool polyline_simple(const Polyline& p) {
    const std::size_t n = p.segment_count();
    if (n == 0) return false;
    for (std::size_t i = 0; i + 1 < p.vertices.size(); ++i)
        if (p.vertices[i] == p.vertices[i + 1]) return false;
    // Sweep over x-extents; only pairs whose exact bounding boxes meet are tested.
    struct Box {
        Rational x0, x1, y0, y1;
    };
    std::vector<Box> box(n);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 &a = p.vertices[i], &b = p.vertices[i + 1];
        box[i] = {min(a.x, b.x), max(a.x, b.x), min(a.y, b.y), max(a.y, b.y)};
        order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return box[a].x0 < box[b].x0 || (box[a].x0 == box[b].x0 && a < b);
    });
    for (std::size_t u = 0; u < n; ++u) {
        const std::size_t i0 = order[u];
        for (std::size_t w = u + 1; w < n && box[order[w]].x0 <= box[i0].x1; ++w) {
            const std::size_t j0 = order[w];
            if (box[j0].y1 < box[i0].y0 || box[i0].y1 < box[j0].y0) continue;
            const std::size_t i = std::min(i0, j0), j = std::max(i0, j0);
            const Segment si = p.segment(i);
            Intersection x = seg_intersection(si, p.segment(j));
            if (std::holds_alternative<NoIntersection>(x)) continue;
            if (j == i + 1) {
                auto* pt = std::get_if<PointIntersection>(&x);
                if (pt != nullptr && pt->p == si.b) continue;
            }
            return false;
        }
    }
    return true;
}

/// Sentinel-aware squared clearance. `infinite` is set for polylines with
/// fewer than three segments (no non-adjacent pairs).
struct Clearance {
    bool infinite = true;
    Rational value;
    friend bool operator==(const Clearance&, const Clearance&) = default;
};

inline Clearance min_clearance_sq(const Polyline& p) {
    Clearance out;
    const std::size_t n = p.segment_count();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 2; j < n; ++j) {
            Rational d = segment_dist_sq(p.segment(i), p.segment(j));
            if (out.infinite || d < out.value) {
                out.infinite = false;
                out.value = d;
            }
        }
    }
    return out;
}

enum class Location { Inside, OnBoundary, Outside };

namespace detail {

inline std::vector<Point2> loop_vertices(const Polyline& loop) {
    std::vector<Point2> v = loop.vertices;
    if (v.size() >= 2 && v.front() == v.back()) v.pop_back();
    return v;
}

}  // namespace detail

/// True iff the closed loop through `v` (implicitly closed) is simple.
inline bool closed_loop_simple(const std::vector<Point2>& v) {
    const std::size_t n = v.size();
    if (n < 3) return false;
    auto edge = [&](std::size_t i) { return Segment{v[i], v[(i + 1) % n]}; };
    for (std::size_t i = 0; i < n; ++i)
        if (v[i] == v[(i + 1) % n]) return false;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            Intersection x = seg_intersection(edge(i), edge(j));
            if (std::holds_alternative<NoIntersection>(x)) continue;
            auto* pt = std::get_if<PointIntersection>(&x);
            if (pt != nullptr) {
                if (j == i + 1 && pt->p == v[j]) continue;
                if (i == 0 && j == n - 1 && pt->p == v[0]) continue;
            }
            return false;
        }
    }
    return true;
}

/// Point location against a simple closed polyline (a repeated closing
/// vertex is optional). Crossing parity with a half-open rule, exact.
inline Location point_vs_closed_curve(const Point2& pt, const Polyline& loop) {
    const std::vector<Point2> v = detail::loop_vertices(loop);
    if (!closed_loop_simple(v)) throw Error(ErrorKind::InvalidLoop, "loop is not a simple closed polyline");
    const std::size_t n = v.size();
    bool inside = false;
    for (std::size_t i = 0; i < n; ++i) {
        const Point2& a = v[i];
        const Point2& b = v[(i + 1) % n];
        if (detail::on_segment(pt, Segment{a, b})) return Location::OnBoundary;
        if ((a.y > pt.y) != (b.y > pt.y)) {
            // x-coordinate of the edge at height pt.y, compared exactly.
            Rational xint = a.x + (pt.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (pt.x < xint) inside = !inside;
        }
    }
    return inside ? Location::Inside : Location::Outside;
}

/// Same classification without the simplicity precheck; for hot loops where
/// the caller has already validated the loop.
inline Location point_vs_loop_unchecked(const Point2& pt, const std::vector<Point2>& v) {
    const std::size_t n = v.size();
    bool inside = false;
    for (std::size_t i = 0; i < n; ++i) {
        const Point2& a = v[i];
        const Point2& b = v[(i + 1) % n];
        if (detail::on_segment(pt, Segment{a, b})) return Location::OnBoundary;
        if ((a.y > pt.y) != (b.y > pt.y)) {
            Rational xint = a.x + (pt.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (pt.x < xint) inside = !inside;
        }
    }
    return inside ? Location::Inside : Location::Outside;
}

/// Does the closed segment meet the closed region bounded by the simple loop?
inline bool segment_meets_region(const Segment& s, const std::vector<Point2>& loop) {
    const std::size_t n = loop.size();
    for (std::size_t i = 0; i < n; ++i)
        if (segments_touch(s, Segment{loop[i], loop[(i + 1) % n]})) return true;
    return point_vs_loop_unchecked(s.a, loop) != Location::Outside;
}

}  // namespace knaster

#endif  // KNASTER_GEOM_HPP
