#ifndef KNASTER_PLMAP_HPP
#define KNASTER_PLMAP_HPP

#include "knaster/error.hpp"
#include "knaster/rational.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <utility>
#include <vector>

namespace knaster {

struct Breakpoint {
    Rational x;
    Rational y;
    friend bool operator==(const Breakpoint&, const Breakpoint&) = default;
};

/// Piecewise-linear self-map of [0,1], stored canonically: strictly
/// increasing x from 0 to 1, values in [0,1], and no interior breakpoint
/// collinear with its neighbours. Equality of maps is equality of lists.
class PLMap {
public:
    PLMap() : PLMap(identity()) {}

    explicit PLMap(std::vector<Breakpoint> pts) : pts_(std::move(pts)) {
        validate();
        canonicalize();
    }

    static PLMap identity() {
        PLMap f(Unchecked{});
        f.pts_ = {{Rational(0), Rational(0)}, {Rational(1), Rational(1)}};
        return f;
    }

    const std::vector<Breakpoint>& breakpoints() const { return pts_; }
    std::size_t size() const { return pts_.size(); }
    std::size_t piece_count() const { return pts_.size() - 1; }

    /// Index of the piece [x_i, x_{i+1}] containing x (the left one at a breakpoint).
    std::size_t piece_index(const Rational& x) const {
        auto it = std::upper_bound(pts_.begin(), pts_.end(), x,
                                   [](const Rational& v, const Breakpoint& b) { return v < b.x; });
        std::size_t i = static_cast<std::size_t>(it - pts_.begin());
        if (i == 0) return 0;
        if (i >= pts_.size()) return pts_.size() - 2;
        return i - 1;
    }

    Rational slope(std::size_t piece) const {
        const Breakpoint& a = pts_[piece];
        const Breakpoint& b = pts_[piece + 1];
        return (b.y - a.y) / (b.x - a.x);
    }

    Rational operator()(const Rational& x) const { return eval(x); }

    Rational eval(const Rational& x) const {
        if (x.sign() < 0 || x > 1) throw Error(ErrorKind::OutOfDomain, "x = " + x.str() + " outside [0,1]");
        std::size_t i = piece_index(x);
        const Breakpoint& a = pts_[i];
        const Breakpoint& b = pts_[i + 1];
        if (x == a.x) return a.y;
        if (x == b.x) return b.y;
        return a.y + (x - a.x) * (b.y - a.y) / (b.x - a.x);
    }

    /// Minimum of f over [lo, hi]; attained at lo, hi or a breakpoint between.
    Rational min_on(const Rational& lo, const Rational& hi) const {
        Rational best = min(eval(lo), eval(hi));
        for (const auto& p : pts_)
            if (lo < p.x && p.x < hi) best = min(best, p.y);
        return best;
    }

    Rational max_on(const Rational& lo, const Rational& hi) const {
        Rational best = max(eval(lo), eval(hi));
        for (const auto& p : pts_)
            if (lo < p.x && p.x < hi) best = max(best, p.y);
        return best;
    }

    friend bool operator==(const PLMap&, const PLMap&) = default;

private:
    struct Unchecked {};
    explicit PLMap(Unchecked) {}

    void validate() const {
        if (pts_.size() < 2) throw Error(ErrorKind::InvalidMap, "need at least two breakpoints");
        if (pts_.front().x != 0 || pts_.back().x != 1)
            throw Error(ErrorKind::InvalidMap, "domain must be exactly [0,1]");
        for (std::size_t i = 0; i < pts_.size(); ++i) {
            if (pts_[i].y.sign() < 0 || pts_[i].y > 1)
                throw Error(ErrorKind::InvalidMap, "value " + pts_[i].y.str() + " outside [0,1]");
            if (i > 0 && !(pts_[i - 1].x < pts_[i].x))
                throw Error(ErrorKind::InvalidMap, "breakpoints not strictly increasing at " + pts_[i].x.str());
        }
    }

    void canonicalize() {
        std::vector<Breakpoint> out;
        out.reserve(pts_.size());
        for (const auto& p : pts_) {
            while (out.size() >= 2) {
                const Breakpoint& a = out[out.size() - 2];
                const Breakpoint& b = out.back();
                if ((b.y - a.y) * (p.x - b.x) == (p.y - b.y) * (b.x - a.x))
                    out.pop_back();
                else
                    break;
            }
            out.push_back(p);
        }
        pts_ = std::move(out);
    }

    std::vector<Breakpoint> pts_;
};

inline Rational eval(const PLMap& f, const Rational& x) { return f.eval(x); }

/// The m-tent map: 0 at even multiples of 1/m, 1 at odd ones, linear between.
inline PLMap tent(long m) {
    if (m < 1) throw Error(ErrorKind::InvalidMap, "tent(m) requires m >= 1");
    std::vector<Breakpoint> pts;
    pts.reserve(static_cast<std::size_t>(m) + 1);
    for (long j = 0; j <= m; ++j) pts.push_back({Rational(j, m), Rational(j % 2)});
    return PLMap(std::move(pts));
}

/// f o g. Breakpoints are those of g plus g-preimages of f's breakpoints.
inline PLMap compose(const PLMap& f, const PLMap& g) {
    const auto& gp = g.breakpoints();
    const auto& fp = f.breakpoints();
    std::vector<Rational> xs;
    for (std::size_t i = 0; i + 1 < gp.size(); ++i) {
        xs.push_back(gp[i].x);
        const Rational& y0 = gp[i].y;
        const Rational& y1 = gp[i + 1].y;
        if (y0 == y1) continue;
        const Rational lo = min(y0, y1), hi = max(y0, y1);
        std::vector<Rational> inner;
        for (const auto& b : fp) {
            if (lo < b.x && b.x < hi) {
                inner.push_back(gp[i].x + (b.x - y0) * (gp[i + 1].x - gp[i].x) / (y1 - y0));
            }
        }
        if (y1 < y0) std::reverse(inner.begin(), inner.end());
        xs.insert(xs.end(), inner.begin(), inner.end());
    }
    xs.push_back(gp.back().x);
    std::vector<Breakpoint> pts;
    pts.reserve(xs.size());
    for (const auto& x : xs) pts.push_back({x, f.eval(g.eval(x))});
    return PLMap(std::move(pts));
}

inline bool canonical_equal(const PLMap& f, const PLMap& g) { return f == g; }

/// Strict local extrema of f in the open interval (lo, hi), ascending.
/// Endpoints of [0,1] are never counted.
inline std::vector<Rational> interior_extrema(const PLMap& f, const Rational& lo, const Rational& hi) {
    std::vector<Rational> out;
    const auto& p = f.breakpoints();
    for (std::size_t i = 1; i + 1 < p.size(); ++i) {
        if (!(lo < p[i].x && p[i].x < hi)) continue;
        int sl = f.slope(i - 1).sign();
        int sr = f.slope(i).sign();
        if (sl * sr < 0) out.push_back(p[i].x);
    }
    return out;
}

enum class Branch { Increasing, Decreasing, LocalMax, LocalMin, Constant, ConstantLeft, ConstantRight };

inline const char* to_string(Branch b) {
    switch (b) {
        case Branch::Increasing: return "Increasing";
        case Branch::Decreasing: return "Decreasing";
        case Branch::LocalMax: return "LocalMax";
        case Branch::LocalMin: return "LocalMin";
        case Branch::Constant: return "Constant";
        case Branch::ConstantLeft: return "ConstantLeft";
        case Branch::ConstantRight: return "ConstantRight";
    }
    return "?";
}

/// Classification from one-sided slopes. At 0 and 1 only one side exists.
/// ConstantLeft / ConstantRight mark the edge of a plateau (flat on that side).
inline Branch branch_at(const PLMap& f, const Rational& x) {
    if (x.sign() < 0 || x > 1) throw Error(ErrorKind::OutOfDomain, "x = " + x.str());
    const auto& p = f.breakpoints();
    auto sign_to_branch = [](int s) {
        return s > 0 ? Branch::Increasing : s < 0 ? Branch::Decreasing : Branch::Constant;
    };
    if (x.is_zero()) return sign_to_branch(f.slope(0).sign());
    if (x == 1) return sign_to_branch(f.slope(f.piece_count() - 1).sign());
    std::size_t i = f.piece_index(x);
    int sl = 0, sr = 0;
    if (x == p[i + 1].x) {
        sl = f.slope(i).sign();
        sr = f.slope(i + 1).sign();
    } else if (x == p[i].x) {
        sl = f.slope(i - 1).sign();
        sr = f.slope(i).sign();
    } else {
        sl = sr = f.slope(i).sign();
    }
    if (sl > 0 && sr > 0) return Branch::Increasing;
    if (sl < 0 && sr < 0) return Branch::Decreasing;
    if (sl > 0 && sr < 0) return Branch::LocalMax;
    if (sl < 0 && sr > 0) return Branch::LocalMin;
    if (sl == 0 && sr == 0) return Branch::Constant;
    return sl == 0 ? Branch::ConstantLeft : Branch::ConstantRight;
}

struct OpenMapReport {
    bool open = false;
    bool homeomorphism = false;
};

/// Open interval maps: surjective, nowhere constant, f({0,1}) in {0,1}, and
/// every interior extremum valued in {0,1}. `homeomorphism` flags monotone
/// open maps, which do not qualify as Knaster bonding maps.
inline OpenMapReport is_open_interval_map(const PLMap& f) {
    OpenMapReport r;
    const auto& p = f.breakpoints();
    auto in01 = [](const Rational& y) { return y.is_zero() || y == 1; };
    bool ok = in01(p.front().y) && in01(p.back().y);
    Rational lo = p.front().y, hi = p.front().y;
    for (std::size_t i = 0; i < f.piece_count(); ++i)
        if (f.slope(i).is_zero()) ok = false;
    for (const auto& b : p) {
        lo = min(lo, b.y);
        hi = max(hi, b.y);
    }
    if (!lo.is_zero() || hi != 1) ok = false;
    const auto ext = interior_extrema(f, Rational(0), Rational(1));
    for (const auto& x : ext)
        if (!in01(f.eval(x))) ok = false;
    r.open = ok;
    r.homeomorphism = ok && ext.empty();
    return r;
}

/// All x in [lo, hi] with f(x) = y. Plateaus at level y contribute their
/// (clipped) endpoints.
inline std::vector<Rational> level_crossings(const PLMap& f, const Rational& y, const Rational& lo,
                                             const Rational& hi) {
    std::set<Rational> out;
    const auto& p = f.breakpoints();
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        const Breakpoint& a = p[i];
        const Breakpoint& b = p[i + 1];
        if (b.x < lo || a.x > hi) continue;
        if (a.y == b.y) {
            if (a.y == y) {
                out.insert(max(a.x, lo));
                out.insert(min(b.x, hi));
            }
            continue;
        }
        if (y < min(a.y, b.y) || y > max(a.y, b.y)) continue;
        Rational x = a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y);
        if (lo <= x && x <= hi) out.insert(x);
    }
    return {out.begin(), out.end()};
}

struct SawtoothInfo {
    long half_teeth = 0;  // m: the pattern has m/2 teeth
    Rational height;
    std::vector<Rational> boundaries;  // a + j(b-a)/m for j = 0..m

    Rational teeth() const { return Rational(half_teeth, 2); }
    friend bool operator==(const SawtoothInfo&, const SawtoothInfo&) = default;
};

/// Recognizes [a,b] as a sawtooth pattern: equispaced alternation 0, h, 0, ...
/// with f linear on each cell. In canonical form every interior cell boundary
/// is a breakpoint, which pins m.
inline std::optional<SawtoothInfo> is_sawtooth(const PLMap& f, const Rational& a, const Rational& b) {
    if (!(a < b)) return std::nullopt;
    long inner = 0;
    for (const auto& p : f.breakpoints())
        if (a < p.x && p.x < b) ++inner;
    const long m = inner + 1;
    const Rational w = (b - a) / Rational(m);
    const Rational h = f.eval(a + w);
    if (h.sign() <= 0 || h > 1) return std::nullopt;
    SawtoothInfo info{m, h, {}};
    for (long j = 0; j <= m; ++j) {
        Rational x = a + Rational(j) * w;
        Rational want = (j % 2 == 0) ? Rational(0) : h;
        if (f.eval(x) != want) return std::nullopt;
        info.boundaries.push_back(x);
    }
    // Remaining breakpoints must sit exactly on the grid.
    for (const auto& p : f.breakpoints()) {
        if (!(a < p.x && p.x < b)) continue;
        Rational k = (p.x - a) / w;
        if (k.den() != 1) return std::nullopt;
    }
    return info;
}

}  // namespace knaster

#endif  // KNASTER_PLMAP_HPP
