#ifndef KNASTER_IO_HPP
#define KNASTER_IO_HPP

// JSON artifacts (exact "p/q" strings, versioned by "schema") and SVG export.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "embed.hpp"
#include "geom.hpp"
#include "knaster.hpp"
#include "plmap.hpp"
#include "tentfactor.hpp"
#include "tuck.hpp"
#include "visor.hpp"

namespace knaster {

using json = nlohmann::json;

namespace schema {
inline constexpr const char* map = "knaster.map/1";
inline constexpr const char* factor = "knaster.factor/1";
inline constexpr const char* visors = "knaster.visors/1";
inline constexpr const char* arc = "knaster.arc/1";
inline constexpr const char* example = "knaster.example/1";
inline constexpr const char* composants = "knaster.composants/1";
inline constexpr const char* stage = "knaster.stage/1";
inline constexpr const char* verify = "knaster.verify/1";
}  // namespace schema

// ---------------------------------------------------------------------------
// Scalars and small types

inline json to_json(const Rational& r) { return r.str(); }

/// Only canonical lowest-terms text is accepted, so every value has exactly
/// one spelling.
inline Rational rational_from_json(const json& j) {
    if (!j.is_string()) throw Error(ErrorKind::Format, "rational must be a \"p/q\" string");
    const std::string s = j.get<std::string>();
    Rational r;
    try {
        r = Rational::parse(s);
    } catch (const std::invalid_argument& e) {
        throw Error(ErrorKind::Format, e.what());
    }
    if (r.str() != s) throw Error(ErrorKind::Format, "rational '" + s + "' is not in lowest terms");
    return r;
}

inline json to_json(const std::vector<Rational>& xs) {
    json a = json::array();
    for (const auto& x : xs) a.push_back(to_json(x));
    return a;
}

inline std::vector<Rational> rationals_from_json(const json& j) {
    if (!j.is_array()) throw Error(ErrorKind::Format, "expected an array of rationals");
    std::vector<Rational> out;
    for (const auto& e : j) out.push_back(rational_from_json(e));
    return out;
}

inline json to_json(const Point2& p) { return json::array({to_json(p.x), to_json(p.y)}); }

inline Point2 point_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) throw Error(ErrorKind::Format, "point must be [x, y]");
    return {rational_from_json(j[0]), rational_from_json(j[1])};
}

inline json to_json(const Polyline& p) {
    json a = json::array();
    for (const auto& v : p.vertices) a.push_back(to_json(v));
    return a;
}

inline Polyline polyline_from_json(const json& j) {
    if (!j.is_array()) throw Error(ErrorKind::Format, "polyline must be an array of points");
    Polyline p;
    for (const auto& e : j) p.vertices.push_back(point_from_json(e));
    return p;
}

namespace detail {

inline const json& field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw Error(ErrorKind::Format, std::string("missing field '") + key + "'");
    return j.at(key);
}

inline void require_schema(const json& j, const char* expected) {
    const json& s = field(j, "schema");
    if (!s.is_string() || s.get<std::string>() != expected)
        throw Error(ErrorKind::Format, std::string("expected schema ") + expected);
}

inline void require_keys(const json& j, std::initializer_list<const char*> keys) {
    for (const auto& [k, v] : j.items())
        if (std::find_if(keys.begin(), keys.end(), [&](const char* s) { return k == s; }) == keys.end())
            throw Error(ErrorKind::Format, "unknown field '" + k + "'");
}

inline long long_from_json(const json& j) {
    if (!j.is_number_integer()) throw Error(ErrorKind::Format, "expected an integer");
    return j.get<long>();
}

inline std::size_t size_from_json(const json& j) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long>() >= 0))
        throw Error(ErrorKind::Format, "expected a non-negative integer");
    return j.get<std::size_t>();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Maps and marked sets

inline json map_body(const PLMap& f) {
    json a = json::array();
    for (const auto& b : f.breakpoints()) a.push_back(json::array({to_json(b.x), to_json(b.y)}));
    return a;
}

inline PLMap map_from_body(const json& j) {
    if (!j.is_array()) throw Error(ErrorKind::Format, "breakpoints must be an array of [x, y]");
    std::vector<Breakpoint> pts;
    for (const auto& e : j) {
        const Point2 p = point_from_json(e);
        pts.push_back({p.x, p.y});
    }
    return PLMap(std::move(pts));
}

inline json to_json(const PLMap& f) { return {{"schema", schema::map}, {"breakpoints", map_body(f)}}; }

inline PLMap map_from_json(const json& j) {
    detail::require_schema(j, schema::map);
    detail::require_keys(j, {"schema", "breakpoints"});
    return map_from_body(detail::field(j, "breakpoints"));
}

inline json to_json(const MarkedSet& Z) { return to_json(Z.points); }

inline MarkedSet marks_from_json(const json& j) { return MarkedSet(rationals_from_json(j)); }

// ---------------------------------------------------------------------------
// Factorization

/// s(z_i) for each marked point: the marked set of s o T_{2n-1}.
inline std::vector<Rational> factor_images(const FactorInstance& fi) {
    std::vector<Rational> out;
    for (const auto& z : fi.Z.points) out.push_back(fi.s(z));
    return out;
}

inline json to_json(const FactorInstance& fi) {
    json pats = json::array();
    for (const auto& p : fi.plan.patterns)
        pats.push_back({{"lo", to_json(p.lo)}, {"hi", to_json(p.hi)}, {"teeth", to_json(p.teeth)},
                        {"case", to_string(p.kind)}});
    return {{"schema", schema::factor},
            {"m", fi.m},
            {"n", fi.n},
            {"z", to_json(fi.Z)},
            {"zprime", to_json(factor_images(fi))},
            {"plan", {{"a", to_json(fi.plan.a)}, {"patterns", pats}}},
            {"s", map_body(fi.s)}};
}

inline FactorInstance factor_from_json(const json& j) {
    using detail::field;
    detail::require_schema(j, schema::factor);
    detail::require_keys(j, {"schema", "m", "n", "z", "zprime", "plan", "s"});
    FactorInstance fi;
    fi.m = detail::long_from_json(field(j, "m"));
    fi.n = detail::long_from_json(field(j, "n"));
    fi.Z = marks_from_json(field(j, "z"));
    const json& plan = field(j, "plan");
    fi.plan.a = rationals_from_json(field(plan, "a"));
    for (const auto& p : field(plan, "patterns")) {
        const std::string c = field(p, "case").get<std::string>();
        if (c != "A" && c != "B") throw Error(ErrorKind::Format, "pattern case must be A or B");
        fi.plan.patterns.push_back({rational_from_json(field(p, "lo")), rational_from_json(field(p, "hi")),
                                    rational_from_json(field(p, "teeth")),
                                    c == "A" ? PatternCase::A : PatternCase::B});
    }
    fi.s = map_from_body(field(j, "s"));
    if (rationals_from_json(field(j, "zprime")) != factor_images(fi))
        throw Error(ErrorKind::Format, "zprime does not match s(z)");
    return fi;
}

// ---------------------------------------------------------------------------
// Visor reports

inline json to_json(const VisorInterval& v) {
    return {{"j", v.j}, {"lo", to_json(v.lo)}, {"hi", to_json(v.hi)}, {"lo_closed", v.lo_closed},
            {"hi_closed", v.hi_closed}};
}

inline json to_json(const MinimalInterval& m) {
    return {{"a", to_json(m.a_v)}, {"b", to_json(m.b_v)}, {"c", to_json(m.witness_c)}};
}

/// Components of the visor set, the minimal interval and largest target of
/// each component's representative, and the overall removability verdict.
inline json visor_report(const PLMap& f, const MarkedSet& Z) {
    json comps = json::array();
    for (const auto& c : visor_components(f, Z)) {
        json e = to_json(c);
        e["interval"] = c.str();
        // The representative is the leftmost point of maximal height.
        Rational v = c.lo_closed ? c.lo : c.hi;
        for (const auto& b : f.breakpoints())
            if (c.contains(b.x) && (!c.contains(v) || f(v) < b.y)) v = b.x;
        if (!c.contains(v)) v = (c.lo + c.hi) / Rational(2);
        e["representative"] = to_json(v);
        if (auto mi = find_minimal_interval(f, Z, v)) {
            e["minimal_interval"] = to_json(*mi);
            e["max_target"] = to_json(max_target(f, Z, v, *mi));
            e["removable"] = true;
        } else {
            e["minimal_interval"] = nullptr;
            e["max_target"] = nullptr;
            e["removable"] = false;
        }
        comps.push_back(std::move(e));
    }
    const RemovabilityReport r = all_visors_removable(f, Z);
    json failing = json::array();
    for (const auto& c : r.failing) failing.push_back(to_json(c));
    return {{"schema", schema::visors},
            {"map", map_body(f)},
            {"z", to_json(Z)},
            {"components", comps},
            {"all_removable", r.all_removable},
            {"failing", failing},
            {"cells_tested", r.cells_tested}};
}

// ---------------------------------------------------------------------------
// Half-plane arcs

inline json arc_body(const HalfPlaneArc& a) {
    json marks = json::array();
    for (const auto& [j, k] : a.marks) marks.push_back(json::array({j, k}));
    return {{"vertices", to_json(a.path)}, {"params", to_json(a.params)}, {"marks", marks}};
}

inline HalfPlaneArc arc_from_body(const json& j) {
    using detail::field;
    HalfPlaneArc a;
    a.path = polyline_from_json(field(j, "vertices"));
    a.params = rationals_from_json(field(j, "params"));
    const json& m = field(j, "marks");
    if (!m.is_array()) throw Error(ErrorKind::Format, "marks must be an array of [j, k]");
    for (const auto& e : m) {
        if (!e.is_array() || e.size() != 2) throw Error(ErrorKind::Format, "mark must be [j, k]");
        a.marks.push_back({detail::size_from_json(e[0]), detail::size_from_json(e[1])});
    }
    return a;
}

struct ArcDocument {
    PLMap map;
    MarkedSet marks;
    Rational eps;
    HalfPlaneArc arc;
    friend bool operator==(const ArcDocument&, const ArcDocument&) = default;
};

inline json to_json(const ArcDocument& d) {
    json j = arc_body(d.arc);
    j["schema"] = schema::arc;
    j["map"] = map_body(d.map);
    j["z"] = to_json(d.marks);
    j["eps"] = to_json(d.eps);
    return j;
}

inline ArcDocument arc_document_from_json(const json& j) {
    using detail::field;
    detail::require_schema(j, schema::arc);
    detail::require_keys(j, {"schema", "map", "z", "eps", "vertices", "params", "marks"});
    return {map_from_body(field(j, "map")), marks_from_json(field(j, "z")), rational_from_json(field(j, "eps")),
            arc_from_body(j)};
}

// ---------------------------------------------------------------------------
// Example instance

inline json to_json(const ExampleInstance& ex) {
    return {{"schema", schema::example},
            {"n", ex.n},
            {"k", ex.k},
            {"m", ex.m},
            {"z", to_json(ex.z)},
            {"zprime", to_json(ex.zprime)},
            {"s", map_body(ex.factor.s)},
            {"f", map_body(ex.f)},
            {"all_removable", ex.removability.all_removable}};
}

// ---------------------------------------------------------------------------
// Embedding stages

inline json to_json(const Tube& t) {
    return {{"spine", to_json(t.spine)},
            {"params", to_json(t.params)},
            {"transversals", to_json(Polyline{t.transversals})},
            {"halfwidth", to_json(t.halfwidth)},
            {"side", t.side}};
}

inline Tube tube_from_json(const json& j) {
    using detail::field;
    detail::require_keys(j, {"spine", "params", "transversals", "halfwidth", "side"});
    Tube t;
    t.spine = polyline_from_json(field(j, "spine"));
    t.params = rationals_from_json(field(j, "params"));
    t.transversals = polyline_from_json(field(j, "transversals")).vertices;
    t.halfwidth = rationals_from_json(field(j, "halfwidth"));
    const long side = detail::long_from_json(field(j, "side"));
    if (side != 1 && side != -1) throw Error(ErrorKind::Format, "tube side must be 1 or -1");
    t.side = static_cast<int>(side);
    return t;
}

inline json to_json(const EmbeddingLevel& lv) {
    return {{"map", map_body(lv.map)},
            {"z", to_json(lv.marks)},
            {"eps", to_json(lv.eps)},
            {"picture_eps", to_json(lv.picture_eps)},
            {"arc", arc_body(lv.arc)},
            {"squeeze", map_body(lv.squeeze)},
            {"tube", to_json(lv.tube)}};
}

inline EmbeddingLevel level_from_json(const json& j) {
    using detail::field;
    detail::require_keys(j, {"map", "z", "eps", "picture_eps", "arc", "squeeze", "tube"});
    return {map_from_body(field(j, "map")),           marks_from_json(field(j, "z")),
            rational_from_json(field(j, "eps")),      rational_from_json(field(j, "picture_eps")),
            arc_from_body(field(j, "arc")),           map_from_body(field(j, "squeeze")),
            tube_from_json(field(j, "tube"))};
}

inline json to_json(const Whisker& w) {
    return {{"owner", w.owner}, {"created", w.created}, {"param", to_json(w.param)}, {"probe", to_json(w.probe)}};
}

inline Whisker whisker_from_json(const json& j) {
    using detail::field;
    detail::require_keys(j, {"owner", "created", "param", "probe"});
    return {detail::size_from_json(field(j, "owner")), detail::size_from_json(field(j, "created")),
            rational_from_json(field(j, "param")), polyline_from_json(field(j, "probe"))};
}

inline json to_json(const EmbeddingStage& st) {
    json levels = json::array();
    for (const auto& lv : st.levels) levels.push_back(to_json(lv));
    json whiskers = json::array();
    for (const auto& w : st.whiskers) whiskers.push_back(to_json(w));
    return {{"schema", schema::stage},
            {"index", st.index()},
            {"eps", st.levels.empty() ? json(nullptr) : to_json(st.top().eps)},
            {"levels", levels},
            {"whiskers", whiskers}};
}

inline EmbeddingStage stage_from_json(const json& j) {
    using detail::field;
    detail::require_schema(j, schema::stage);
    detail::require_keys(j, {"schema", "index", "eps", "levels", "whiskers"});
    EmbeddingStage st;
    for (const auto& e : field(j, "levels")) st.levels.push_back(level_from_json(e));
    for (const auto& e : field(j, "whiskers")) st.whiskers.push_back(whisker_from_json(e));
    if (detail::size_from_json(field(j, "index")) != st.index())
        throw Error(ErrorKind::Format, "index does not match the number of levels");
    if (st.levels.empty() || rational_from_json(field(j, "eps")) != st.top().eps)
        throw Error(ErrorKind::Format, "eps does not match the top level");
    return st;
}

// ---------------------------------------------------------------------------
// Text and files

/// Two-space indented JSON with sorted keys and a trailing newline.
inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Format, e.what());
    }
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IO, "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::IO, "cannot write " + path);
    out << text;
    if (!out) throw Error(ErrorKind::IO, "write failed for " + path);
}

// ---------------------------------------------------------------------------
// SVG

struct SvgOptions {
    int precision = 12;   // significant digits
    double width = 800;   // pixels
    double margin = 0.05;  // fraction of the larger extent
};

using DPoint = std::array<double, 2>;

/// Collects shapes in model coordinates and writes them with y pointing up.
class SvgCanvas {
public:
    void polyline(std::vector<DPoint> pts, std::string style) { add(std::move(pts), std::move(style), false); }
    void polygon(std::vector<DPoint> pts, std::string style) { add(std::move(pts), std::move(style), true); }
    void dot(DPoint p, double radius_px, std::string style) {
        grow(p);
        dots_.push_back({p, radius_px, std::move(style)});
    }
    void label(DPoint p, std::string text) {
        grow(p);
        labels_.push_back({p, std::move(text)});
    }

    std::string render(const SvgOptions& o = {}) const {
        double x0 = lo_[0], y0 = lo_[1], x1 = hi_[0], y1 = hi_[1];
        if (!(x0 <= x1)) x0 = y0 = 0, x1 = y1 = 1;
        const double ext = std::max({x1 - x0, y1 - y0, 1e-300});
        x0 -= o.margin * ext, x1 += o.margin * ext, y0 -= o.margin * ext, y1 += o.margin * ext;
        const double scale = o.width / (x1 - x0);
        const double height = (y1 - y0) * scale;
        auto num = [&](double v) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.*g", o.precision, v == 0 ? 0.0 : v);
            return std::string(buf);
        };
        auto xy = [&](const DPoint& p) { return num((p[0] - x0) * scale) + "," + num((y1 - p[1]) * scale); };
        std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
        s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + num(o.width) + "\" height=\"" +
             num(height) + "\" viewBox=\"0 0 " + num(o.width) + " " + num(height) + "\">\n";
        for (const auto& sh : shapes_) {
            if (sh.pts.empty()) continue;
            std::string d = "M" + xy(sh.pts[0]);
            for (std::size_t i = 1; i < sh.pts.size(); ++i) d += " L" + xy(sh.pts[i]);
            if (sh.closed) d += " Z";
            s += "<path d=\"" + d + "\" " + sh.style + "/>\n";
        }
        for (const auto& dt : dots_) {
            const std::string c = xy(dt.p);
            const auto comma = c.find(',');
            s += "<circle cx=\"" + c.substr(0, comma) + "\" cy=\"" + c.substr(comma + 1) + "\" r=\"" +
                 num(dt.r) + "\" " + dt.style + "/>\n";
        }
        for (const auto& l : labels_) {
            const std::string c = xy(l.p);
            const auto comma = c.find(',');
            s += "<text x=\"" + c.substr(0, comma) + "\" y=\"" + c.substr(comma + 1) +
                 "\" font-family=\"sans-serif\" font-size=\"14\">" + l.text + "</text>\n";
        }
        return s + "</svg>\n";
    }

private:
    struct Shape {
        std::vector<DPoint> pts;
        std::string style;
        bool closed;
    };
    struct Dot {
        DPoint p;
        double r;
        std::string style;
    };
    struct Label {
        DPoint p;
        std::string text;
    };

    void add(std::vector<DPoint> pts, std::string style, bool closed) {
        for (const auto& p : pts) grow(p);
        shapes_.push_back({std::move(pts), std::move(style), closed});
    }
    void grow(const DPoint& p) {
        lo_ = {std::min(lo_[0], p[0]), std::min(lo_[1], p[1])};
        hi_ = {std::max(hi_[0], p[0]), std::max(hi_[1], p[1])};
    }

    std::vector<Shape> shapes_;
    std::vector<Dot> dots_;
    std::vector<Label> labels_;
    DPoint lo_{HUGE_VAL, HUGE_VAL}, hi_{-HUGE_VAL, -HUGE_VAL};
};

inline DPoint to_dpoint(const Point2& p) { return {p.x.to_double(), p.y.to_double()}; }

inline std::vector<DPoint> to_dpoints(const Polyline& p) {
    std::vector<DPoint> out;
    out.reserve(p.vertices.size());
    for (const auto& v : p.vertices) out.push_back(to_dpoint(v));
    return out;
}

namespace detail {

// Floating copy of a tube, used only for drawing deep stages whose exact
// plane curves are too large to build.
struct DrawTube {
    std::vector<double> t;
    std::vector<DPoint> P, m;

    explicit DrawTube(const Tube& tube) {
        for (const auto& x : tube.params) t.push_back(x.to_double());
        for (const auto& v : tube.spine.vertices) P.push_back(to_dpoint(v));
        for (const auto& v : tube.transversals) m.push_back(to_dpoint(v));
    }

    std::size_t column(double y) const {
        auto it = std::upper_bound(t.begin(), t.end(), y);
        std::size_t k = static_cast<std::size_t>(it - t.begin());
        return k == 0 ? 0 : std::min(k - 1, t.size() - 2);
    }

    DPoint map(const DPoint& q, std::size_t k) const {
        const double w = t[k + 1] - t[k];
        const double u = q[0], s = (q[1] - t[k]) / w;
        const DPoint &a = P[k], &b = P[k + 1], &ma = m[k], &mb = m[k + 1];
        if (u < 0 || s >= u)
            return {a[0] + s * (b[0] - a[0]) + u * mb[0], a[1] + s * (b[1] - a[1]) + u * mb[1]};
        return {a[0] + u * ma[0] + s * (b[0] + mb[0] - a[0] - ma[0]),
                a[1] + u * ma[1] + s * (b[1] + mb[1] - a[1] - ma[1])};
    }

    std::vector<DPoint> map_polyline(const std::vector<DPoint>& in) const {
        std::vector<DPoint> out;
        for (std::size_t i = 0; i + 1 < in.size(); ++i) {
            const DPoint a = in[i], b = in[i + 1];
            const double dx = b[0] - a[0], dy = b[1] - a[1];
            std::vector<double> ss{0, 1};
            const std::size_t k0 = column(std::min(a[1], b[1])), k1 = column(std::max(a[1], b[1]));
            for (std::size_t k = k0; k <= k1; ++k) {
                if (dy != 0)
                    for (double edge : {t[k], t[k + 1]}) ss.push_back((edge - a[1]) / dy);
                const double w = t[k + 1] - t[k], den = w * dx - dy;
                if (den != 0) ss.push_back((a[1] - t[k] - w * a[0]) / den);
            }
            std::sort(ss.begin(), ss.end());
            for (std::size_t j = 0; j < ss.size(); ++j) {
                const double s = ss[j];
                if (s < 0 || s > 1 || (j > 0 && s == ss[j - 1]) || (i > 0 && s == 0)) continue;
                const DPoint q{a[0] + s * dx, a[1] + s * dy};
                out.push_back(map(q, column(std::clamp(q[1], t.front(), t.back()))));
            }
        }
        return out;
    }
};

inline std::vector<DPoint> draw_through(const EmbeddingStage& st, std::vector<DPoint> pts) {
    for (std::size_t k = st.levels.size(); k-- > 0;) pts = DrawTube(st.levels[k].tube).map_polyline(pts);
    return pts;
}

/// Drops vertices closer than `tol` to the last kept one.
inline std::vector<DPoint> thin(const std::vector<DPoint>& pts, double tol) {
    std::vector<DPoint> out;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (!out.empty() && i + 1 < pts.size() && std::hypot(pts[i][0] - out.back()[0], pts[i][1] - out.back()[1]) < tol)
            continue;
        out.push_back(pts[i]);
    }
    return out;
}

}  // namespace detail

/// Stage picture: shaded tube, curve, whiskers and mark dots. Geometry is
/// exact up to the final conversion to floats, thinned to `resolution`
/// (a fraction of the unit square) to keep deep stages readable.
inline std::string stage_svg(const EmbeddingStage& st, const SvgOptions& o = {}, double resolution = 1e-4) {
    SvgCanvas c;
    const std::vector<DPoint> strip{{0, 0}, {0, 1}, {1, 1}, {1, 0}, {0, 0}};
    c.polygon(detail::thin(detail::draw_through(st, strip), resolution),
              "fill=\"#9ecae1\" fill-opacity=\"0.35\" stroke=\"none\"");
    std::vector<DPoint> pic;
    for (const auto& v : picture_arc(st.top()).vertices) pic.push_back(to_dpoint(v));
    c.polyline(detail::thin(detail::draw_through(st, pic), resolution),
               "fill=\"none\" stroke=\"#08306b\" stroke-width=\"0.8\"");
    for (const auto& w : st.whiskers) {
        c.polyline(to_dpoints(w.probe), "fill=\"none\" stroke=\"#cb181d\" stroke-width=\"1.2\"");
        c.dot(to_dpoint(w.probe.vertices.back()), 3, "fill=\"#cb181d\"");
    }
    return c.render(o);
}

/// Stage document in the named format, "json" or "svg".
inline std::string export_stage(const EmbeddingStage& st, const std::string& format, const SvgOptions& o = {}) {
    if (format == "json") return dump(to_json(st));
    if (format == "svg") return stage_svg(st, o);
    throw Error(ErrorKind::Format, "unknown export format '" + format + "'");
}

/// Graph of f over [0,1] with optional marked points, offset by `origin`.
inline void draw_map(SvgCanvas& c, const PLMap& f, const std::vector<Rational>& marks, DPoint origin,
                     const std::string& title) {
    auto at = [&](double x, double y) { return DPoint{origin[0] + x, origin[1] + y}; };
    c.polygon({at(0, 0), at(1, 0), at(1, 1), at(0, 1)}, "fill=\"none\" stroke=\"#999999\" stroke-width=\"0.5\"");
    c.polyline({at(0, 0), at(1, 1)}, "fill=\"none\" stroke=\"#cccccc\" stroke-width=\"0.5\"");
    std::vector<DPoint> g;
    for (const auto& b : f.breakpoints()) g.push_back(at(b.x.to_double(), b.y.to_double()));
    c.polyline(std::move(g), "fill=\"none\" stroke=\"#08306b\" stroke-width=\"1\"");
    for (const auto& z : marks) c.dot(at(z.to_double(), f(z).to_double()), 3, "fill=\"#cb181d\"");
    if (!title.empty()) c.label(at(0, 1.08), title);
}

inline std::string map_svg(const PLMap& f, const std::vector<Rational>& marks, const std::string& title,
                           const SvgOptions& o = {}) {
    SvgCanvas c;
    draw_map(c, f, marks, {0, 0}, title);
    return c.render(o);
}

/// Three panels: T_m, s beside T_{2n-1}, and s o T_{2n-1} with Z' marked.
inline std::string factor_svg(const FactorInstance& fi, const SvgOptions& o = {}) {
    SvgCanvas c;
    draw_map(c, tent(fi.m), fi.Z.points, {0, 0}, "T_" + std::to_string(fi.m));
    draw_map(c, fi.s, fi.Z.points, {1.25, 0}, "s");
    const PLMap t = tent(2 * fi.n - 1);
    std::vector<DPoint> g;
    for (const auto& b : t.breakpoints()) g.push_back({1.25 + b.x.to_double(), b.y.to_double()});
    c.polyline(std::move(g), "fill=\"none\" stroke=\"#74c476\" stroke-width=\"0.8\"");
    std::vector<Rational> zp;
    for (const auto& z : fi.Z.points) zp.push_back(fi.s(z));
    draw_map(c, compose(fi.s, t), zp, {2.5, 0}, "s o T_" + std::to_string(2 * fi.n - 1));
    return c.render(o);
}

/// The arc in its half-plane, with the vertical axis and the marks.
inline std::string arc_svg(const HalfPlaneArc& a, const SvgOptions& o = {}) {
    SvgCanvas c;
    c.polyline({{0, 0}, {0, 1}}, "fill=\"none\" stroke=\"#999999\" stroke-width=\"0.5\"");
    c.polyline(to_dpoints(a.path), "fill=\"none\" stroke=\"#08306b\" stroke-width=\"1\"");
    for (const auto& [j, k] : a.marks) c.dot(to_dpoint(a.path.vertices[k]), 3, "fill=\"#cb181d\"");
    return c.render(o);
}

}  // namespace knaster

#endif  // KNASTER_IO_HPP
