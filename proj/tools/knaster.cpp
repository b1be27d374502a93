// Command-line front end. Exit codes: 0 success, 1 failed check or
// construction, 2 usage error.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "knaster/io.hpp"

namespace fs = std::filesystem;
using namespace knaster;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Output {
    std::string out;  // JSON path, stdout when empty
    std::string svg;
    int precision = 12;

    void add(CLI::App* sub) {
        sub->add_option("--out", out, "JSON output file (default: stdout)");
        sub->add_option("--svg", svg, "SVG output file");
        sub->add_option("--precision", precision, "significant digits in SVG output")->check(CLI::Range(1, 17));
    }
    SvgOptions svg_options() const {
        SvgOptions o;
        o.precision = precision;
        return o;
    }
    void emit(const json& j, const std::function<std::string()>& svg_text = {}) const {
        if (out.empty())
            std::cout << dump(j);
        else
            write_file(out, dump(j));
        if (!svg.empty()) {
            if (!svg_text) throw UsageError("this artifact has no SVG form");
            write_file(svg, svg_text());
        }
    }
};

Rational parse_rational(const std::string& s) {
    try {
        return Rational::parse(s);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

std::vector<Rational> parse_rationals(const std::vector<std::string>& xs) {
    std::vector<Rational> out;
    for (const auto& x : xs) out.push_back(parse_rational(x));
    return out;
}

PLMap load_map(const std::string& path) { return map_from_json(parse_json(read_file(path))); }

/// `--map FILE` or `--tent M` or `--example N` (the example's f).
struct MapSource {
    std::string file;
    long tent_m = 0;
    long example_n = 0;

    void add(CLI::App* sub) {
        auto* a = sub->add_option("--map", file, "PL map JSON file");
        auto* b = sub->add_option("--tent", tent_m, "use the tent map T_m")->check(CLI::PositiveNumber);
        auto* c = sub->add_option("--example", example_n, "use f of the worked example with this n")
                      ->check(CLI::PositiveNumber);
        a->excludes(b)->excludes(c);
        b->excludes(c);
    }
    bool given() const { return !file.empty() || tent_m > 0 || example_n > 0; }
    PLMap load() const {
        if (!file.empty()) return load_map(file);
        if (tent_m > 0) return tent(tent_m);
        if (example_n > 0) return build_example_instance(example_n).f;
        throw UsageError("one of --map, --tent, --example is required");
    }
};

// ---------------------------------------------------------------------------

json verify_document(const json& j, bool& ok) {
    json failures = json::array();
    auto note = [&](const std::vector<std::string>& fs) {
        for (const auto& f : fs) failures.push_back(f);
    };
    std::string kind = j.is_object() && j.contains("schema") && j["schema"].is_string() ? j["schema"].get<std::string>()
                                                                                        : "";
    try {
        if (kind == schema::stage) {
            note(verify_stage(stage_from_json(j)));
        } else if (kind == schema::arc) {
            const ArcDocument d = arc_document_from_json(j);
            const ArcReport r = verify_half_plane_arc(d.map, d.marks, d.eps, d.arc);
            note(r.witnesses);
            if (r.all() && build_half_plane_arc(d.map, d.marks, d.eps) != d.arc)
                failures.push_back("arc differs from its rebuild");
        } else if (kind == schema::factor) {
            const FactorInstance fi = factor_from_json(j);
            note(factor_invariant_failures(fi));
            if (build_s(fi.m, fi.Z, fi.plan) != fi) failures.push_back("factor differs from its rebuild");
        } else if (kind == schema::map) {
            map_from_json(j);
        } else {
            failures.push_back("no check available for schema '" + kind + "'");
        }
    } catch (const Error& e) {
        failures.push_back(e.what());
    }
    ok = failures.empty();
    return {{"schema", schema::verify}, {"artifact", kind}, {"ok", ok}, {"failures", failures}};
}

std::string svg_for(const json& j, const SvgOptions& o) {
    const std::string kind = j.value("schema", "");
    if (kind == schema::stage) return stage_svg(stage_from_json(j), o);
    if (kind == schema::arc) return arc_svg(arc_document_from_json(j).arc, o);
    if (kind == schema::factor) return factor_svg(factor_from_json(j), o);
    if (kind == schema::map) return map_svg(map_from_json(j), {}, "", o);
    throw UsageError("no SVG form for schema '" + kind + "'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Piecewise-linear interval maps, visors, tent factorizations, Knaster continua and plane embeddings"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    // tent
    auto* tent_cmd = app.add_subcommand("tent", "tent map T_m as a PL map");
    long tent_m = 0;
    Output tent_out;
    tent_cmd->add_option("--m", tent_m, "tent parameter")->required()->check(CLI::PositiveNumber);
    tent_out.add(tent_cmd);

    // factor
    auto* factor_cmd = app.add_subcommand("factor", "factorization map s with T_{2n-1} o s = T_m");
    long factor_n = 0, factor_m = 0;
    std::vector<std::string> factor_z;
    Output factor_out;
    factor_cmd->add_option("--n", factor_n, "number of marked points (worked example when --m is absent)")
        ->check(CLI::PositiveNumber);
    factor_cmd->add_option("--m", factor_m, "tent parameter m")->check(CLI::PositiveNumber);
    factor_cmd->add_option("--z", factor_z, "marked points (with --m)")->delimiter(',');
    factor_out.add(factor_cmd);

    // visors
    auto* visors_cmd = app.add_subcommand("visors", "visor components, minimal intervals and removability");
    MapSource visors_map;
    std::vector<std::string> visors_z;
    Output visors_out;
    visors_map.add(visors_cmd);
    visors_cmd->add_option("--z", visors_z, "marked points")->required()->delimiter(',');
    visors_out.add(visors_cmd);

    // tuck
    auto* tuck_cmd = app.add_subcommand("tuck", "half-plane arc for (f, Z, eps)");
    MapSource tuck_map;
    std::vector<std::string> tuck_z;
    std::string tuck_eps;
    Output tuck_out;
    tuck_map.add(tuck_cmd);
    tuck_cmd->add_option("--z", tuck_z, "marked points")->required()->delimiter(',');
    tuck_cmd->add_option("--eps", tuck_eps, "tolerance p/q")->required();
    tuck_out.add(tuck_cmd);

    // knaster-example
    auto* ex_cmd = app.add_subcommand("knaster-example", "the worked marked-point instance for n");
    long ex_n = 0;
    Output ex_out;
    ex_cmd->add_option("--n", ex_n, "number of points")->required()->check(CLI::PositiveNumber);
    ex_out.add(ex_cmd);

    // composants
    auto* comp_cmd = app.add_subcommand("composants", "composant evidence for constant threads under T_m");
    long comp_m = 0, comp_h = 0;
    std::string comp_x, comp_y;
    Output comp_out;
    comp_cmd->add_option("--m", comp_m, "tent parameter")->required()->check(CLI::PositiveNumber);
    comp_cmd->add_option("--x", comp_x, "first thread's constant value")->required();
    comp_cmd->add_option("--y", comp_y, "second thread's constant value")->required();
    comp_cmd->add_option("--horizon", comp_h, "levels to inspect")->required()->check(CLI::NonNegativeNumber);
    comp_out.add(comp_cmd);

    // embed
    auto* embed_cmd = app.add_subcommand("embed", "stagewise plane embedding with access whiskers");
    MapSource embed_map;
    std::vector<std::string> embed_z;
    std::string embed_eps = "1/4", embed_dir;
    long embed_depth = 0;
    bool embed_countable = false, embed_no_svg = false;
    int embed_precision = 12;
    embed_map.add(embed_cmd);
    embed_cmd->add_option("--z", embed_z, "scheduled points, fixed by the map (default: the example's z')")
        ->delimiter(',');
    embed_cmd->add_option("--depth", embed_depth, "number of stages")->required()->check(CLI::PositiveNumber);
    embed_cmd->add_option("--eps", embed_eps, "eps_1; stage i uses eps_1 / 2^(i-1)");
    embed_cmd->add_option("--out-dir", embed_dir, "directory for stageN.json and stageN.svg")->required();
    embed_cmd->add_flag("--countable", embed_countable, "stage i marks only the first i scheduled points");
    embed_cmd->add_flag("--no-svg", embed_no_svg, "skip the SVG files");
    embed_cmd->add_option("--precision", embed_precision, "significant digits in SVG output")
        ->check(CLI::Range(1, 17));

    // verify
    auto* verify_cmd = app.add_subcommand("verify", "re-run every check on a stored artifact");
    std::string verify_path;
    Output verify_out;
    verify_cmd->add_option("--stage,--in", verify_path, "artifact JSON file")->required();
    verify_out.add(verify_cmd);

    // svg
    auto* svg_cmd = app.add_subcommand("svg", "render a stored artifact");
    std::string svg_in, svg_path;
    int svg_precision = 12;
    svg_cmd->add_option("--in", svg_in, "artifact JSON file")->required();
    svg_cmd->add_option("--out", svg_path, "SVG file")->required();
    svg_cmd->add_option("--precision", svg_precision, "significant digits")->check(CLI::Range(1, 17));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*tent_cmd) {
            const PLMap t = tent(tent_m);
            tent_out.emit(to_json(t), [&] { return map_svg(t, {}, "T_" + std::to_string(tent_m), tent_out.svg_options()); });
        } else if (*factor_cmd) {
            FactorInstance fi;
            if (factor_m > 0) {
                if (factor_z.empty()) throw UsageError("--m needs --z");
                const MarkedSet Z(parse_rationals(factor_z));
                if (factor_n > 0 && static_cast<std::size_t>(factor_n) != Z.size())
                    throw UsageError("--n disagrees with the number of --z points");
                fi = build_s(factor_m, Z, choose_patterns(factor_m, static_cast<long>(Z.size())));
            } else {
                if (factor_n <= 0 || !factor_z.empty()) throw UsageError("give --n, or --m with --z");
                fi = build_example_instance(factor_n).factor;
            }
            factor_out.emit(to_json(fi), [&] { return factor_svg(fi, factor_out.svg_options()); });
        } else if (*visors_cmd) {
            const PLMap f = visors_map.load();
            const MarkedSet Z(parse_rationals(visors_z));
            visors_out.emit(visor_report(f, Z), [&] { return map_svg(f, Z.points, "", visors_out.svg_options()); });
        } else if (*tuck_cmd) {
            ArcDocument d{tuck_map.load(), MarkedSet(parse_rationals(tuck_z)), parse_rational(tuck_eps), {}};
            d.arc = build_half_plane_arc(d.map, d.marks, d.eps);
            tuck_out.emit(to_json(d), [&] { return arc_svg(d.arc, tuck_out.svg_options()); });
        } else if (*ex_cmd) {
            const ExampleInstance ex = build_example_instance(ex_n);
            ex_out.emit(to_json(ex), [&] {
                return map_svg(ex.f, ex.zprime, "f = s o T_" + std::to_string(2 * ex_n - 1), ex_out.svg_options());
            });
        } else if (*comp_cmd) {
            const Rational x = parse_rational(comp_x), y = parse_rational(comp_y);
            const InverseSystem sys = InverseSystem::constant(tent(comp_m));
            const long ev = composant_evidence(sys, ILPoint::constant(x), ILPoint::constant(y), comp_h);
            comp_out.emit({{"schema", schema::composants},
                           {"m", comp_m},
                           {"x", to_json(x)},
                           {"y", to_json(y)},
                           {"horizon", comp_h},
                           {"evidence", ev}});
        } else if (*embed_cmd) {
            PLMap f;
            std::vector<Rational> pts;
            if (embed_map.given()) {
                f = embed_map.load();
                if (embed_z.empty() && embed_map.example_n > 0) pts = build_example_instance(embed_map.example_n).zprime;
            } else {
                const ExampleInstance ex = build_example_instance(2);
                f = ex.f;
                pts = ex.zprime;
            }
            if (!embed_z.empty()) pts = parse_rationals(embed_z);
            if (pts.empty()) throw UsageError("no scheduled points");
            for (const auto& z : pts)
                if (f(z) != z) throw UsageError("scheduled point " + z.str() + " is not fixed by the map");
            const Rational eps1 = parse_rational(embed_eps);
            auto marks_at = [&](long i) {
                std::vector<Rational> z(pts.begin(),
                                        embed_countable ? pts.begin() + std::min<long>(i, static_cast<long>(pts.size()))
                                                        : pts.end());
                std::sort(z.begin(), z.end());
                return MarkedSet(std::move(z));
            };
            fs::create_directories(embed_dir);
            SvgOptions o;
            o.precision = embed_precision;
            EmbeddingStage st = init_stage(f, marks_at(1), eps1);
            Rational eps = eps1;
            for (long i = 1; i <= embed_depth; ++i) {
                if (i > 1) {
                    eps /= Rational(2);
                    st = refine_stage(st, f, marks_at(i), eps);
                }
                const std::string base = (fs::path(embed_dir) / ("stage" + std::to_string(i))).string();
                write_file(base + ".json", dump(to_json(st)));
                if (!embed_no_svg) write_file(base + ".svg", stage_svg(st, o));
                std::cerr << "stage " << i << ": " << st.whiskers.size() << " whiskers\n";
            }
        } else if (*verify_cmd) {
            bool ok = false;
            json report;
            try {
                report = verify_document(parse_json(read_file(verify_path)), ok);
            } catch (const Error& e) {
                if (e.kind() == ErrorKind::IO) throw;
                report = {{"schema", schema::verify}, {"artifact", ""}, {"ok", false}, {"failures", {e.what()}}};
            }
            verify_out.emit(report);
            return ok ? 0 : 1;
        } else if (*svg_cmd) {
            SvgOptions o;
            o.precision = svg_precision;
            write_file(svg_path, svg_for(parse_json(read_file(svg_in)), o));
        }
    } catch (const UsageError& e) {
        std::cerr << "usage: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return e.kind() == ErrorKind::IO || e.kind() == ErrorKind::Format ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    return 0;
}
