// Acceptance suite: one PASS/FAIL line per criterion; exits 1 if any fail.

#include "knaster/io.hpp"
#include "oracles.hpp"
#include "random_maps.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace knaster;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

struct Check {
    Outcome out;
    void expect(bool ok, const std::string& what) {
        if (!ok && out.pass) out.detail = what;
        out.pass = out.pass && ok;
    }
};

Rational R(const char* s) { return Rational::parse(s); }

// 1
Outcome tent_composition() {
    Check c;
    for (long a = 1; a <= 8; ++a)
        for (long b = 1; b <= 8; ++b)
            c.expect(canonical_equal(compose(tent(a), tent(b)), tent(a * b)),
                     "T_" + std::to_string(a) + " o T_" + std::to_string(b));
    if (c.out.pass) c.out.detail = "64 pairs equal";
    return c.out;
}

// 2
Outcome example_instance() {
    Check c;
    const auto ex = build_example_instance(2);
    c.expect(ex.k == 4 && ex.m == 16, "k, m");
    c.expect(ex.z == std::vector<Rational>{R("2/15"), R("2/5")}, "z");
    c.expect(ex.zprime == std::vector<Rational>{R("2/45"), R("4/5")}, "z'");
    c.expect(canonical_equal(compose(tent(3), ex.factor.s), tent(16)), "T_3 o s = T_16");
    for (std::size_t i = 1; i <= ex.z.size(); ++i) {
        const Rational s = ex.factor.s(ex.z[i - 1]);
        c.expect(Rational(2 * static_cast<long>(i) - 2, 3) <= s && s <= Rational(2 * static_cast<long>(i) - 1, 3),
                 "s(z_" + std::to_string(i) + ") bound");
    }
    for (const auto& z : ex.zprime) c.expect(ex.f(z) == z, "f(z') = z'");
    if (c.out.pass) c.out.detail = "k=4 m=16 z=(2/15,2/5) z'=(2/45,4/5)";
    return c.out;
}

// 3
Outcome example_removability() {
    Check c;
    std::size_t cells = 0;
    for (long n = 1; n <= 3; ++n) {
        const auto ex = build_example_instance(n);
        const MarkedSet Z(ex.zprime);
        c.expect(all_visors_removable(ex.f, Z).all_removable, "candidate search, n=" + std::to_string(n));
        const long D = oracle::grid_denominator(ex.f, ex.zprime);
        for (const auto& comp : visor_components(ex.f, Z))
            for (const auto& [v, cell] : detail::component_cells(ex.f, Z, comp)) {
                ++cells;
                c.expect(removal_search(ex.f, Z, v).has_value(), "search at v=" + v.str());
                c.expect(oracle::grid_removable(ex.f, ex.zprime, v, D),
                         "grid oracle at v=" + v.str() + ", D=" + std::to_string(D));
            }
    }
    if (c.out.pass) c.out.detail = std::to_string(cells) + " visor cells removable, grid-confirmed";
    return c.out;
}

// 4
Outcome visor_calculus() {
    Check c;
    const MarkedSet Z({R("5/8")});
    const auto comps = visor_components(tent(4), Z);
    c.expect(comps.size() == 1 && comps[0].str() == "(1/8,3/8)", "component");
    const auto mi = find_minimal_interval(tent(4), Z, R("1/4"));
    c.expect(mi && mi->a_v == 0 && mi->b_v == R("1/2"), "minimal interval");
    if (mi) c.expect(max_target(tent(4), Z, R("1/4"), *mi) == 1, "max target");
    const PLMap fstar({{R("0"), R("1/2")}, {R("1/4"), R("1")}, {R("1/2"), R("1/4")},
                       {R("5/8"), R("3/8")}, {R("3/4"), R("0")}, {R("1"), R("1")}});
    c.expect(!all_visors_removable(fstar, MarkedSet({R("1/2")})).all_removable, "f* verdict");
    if (c.out.pass) c.out.detail = "(1/8,3/8), [0,1/2], target 1; f* non-removable";
    return c.out;
}

// 5
Outcome minimal_interval_structure() {
    Check c;
    std::mt19937 rng(20261018);
    int maps = 0, intervals = 0, violations = 0;
    while (maps < 500) {
        const PLMap f = random_map(rng, 8, 64);
        const auto z = oracle::random_marked(rng, f, 3, 64);
        if (z.empty()) continue;
        ++maps;
        const MarkedSet Z(z);
        std::vector<MinimalInterval> found;
        for (const auto& comp : visor_components(f, Z))
            for (const auto& [v, cell] : detail::component_cells(f, Z, comp)) {
                const auto m1 = find_minimal_interval(f, Z, v, SearchOrder::LevelDescent);
                const auto m2 = find_minimal_interval(f, Z, v, SearchOrder::PairScan);
                if (m1.has_value() != m2.has_value()) ++violations;
                if (!m1 || !m2) continue;
                ++intervals;
                if (m1->a_v != m2->a_v || m1->b_v != m2->b_v) ++violations;
                if (!(m1->a_v.is_zero() || f(m1->a_v) == f(m1->b_v))) ++violations;
                for (const auto& p : f.breakpoints())
                    if (m1->a_v < p.x && p.x < m1->b_v && !(p.y > f(m1->b_v))) ++violations;
                for (const auto& x : level_crossings(f, f(m1->b_v), m1->a_v, m1->b_v))
                    if (x != m1->a_v && x != m1->b_v) ++violations;
                found.push_back(*m1);
            }
        for (const auto& a : found)
            for (const auto& b : found)
                if (max(a.a_v, b.a_v) < min(a.b_v, b.b_v) && (a.a_v != b.a_v || a.b_v != b.b_v)) ++violations;
    }
    c.expect(violations == 0, std::to_string(violations) + " violations");
    c.expect(intervals > 0, "no minimal intervals exercised");
    if (c.out.pass)
        c.out.detail = std::to_string(maps) + " maps, " + std::to_string(intervals) + " minimal intervals, 0 violations";
    return c.out;
}

// 6
Outcome oracle_equivalence() {
    Check c;
    std::mt19937 rng(6);
    int checked = 0, removable = 0, disagree = 0;
    while (checked < 200) {
        const PLMap f = random_map(rng, 6, 8);
        const auto z = oracle::random_marked(rng, f, 3, 8);
        if (z.empty()) continue;
        const Rational v(static_cast<long>(rng() % 49), 48);
        if (!oracle::visor_index(f, z, v)) continue;
        ++checked;
        const bool want = oracle::grid_removable(f, z, v, oracle::grid_denominator(f, z));
        removable += want;
        if (removal_search(f, MarkedSet(z), v).has_value() != want) ++disagree;
    }
    c.expect(disagree == 0, std::to_string(disagree) + " disagreements");
    if (c.out.pass)
        c.out.detail = "200 instances (" + std::to_string(removable) + " removable), 0 disagreements";
    return c.out;
}

// 7
Outcome tuck_conclusions() {
    Check c;
    const auto ex = build_example_instance(2);
    const std::vector<std::pair<PLMap, MarkedSet>> cases{
        {PLMap::identity(), MarkedSet({R("1/2")})}, {tent(4), MarkedSet({R("5/8")})}, {ex.f, MarkedSet(ex.zprime)}};
    int arcs = 0;
    for (const auto& [f, Z] : cases)
        for (const char* e : {"1/4", "1/16"}) {
            const ArcReport r = verify_half_plane_arc(f, Z, R(e), build_half_plane_arc(f, Z, R(e)));
            c.expect(r.all(), r.witnesses.empty() ? "arc check" : r.witnesses.front());
            ++arcs;
        }
    if (c.out.pass) c.out.detail = std::to_string(arcs) + " arcs pass (1)-(3) and injectivity";
    return c.out;
}

// 8
Outcome pipeline() {
    Check c;
    const auto ex = build_example_instance(2);
    const MarkedSet Z(ex.zprime);
    std::vector<EmbeddingStage> st;
    try {
        st.push_back(init_stage(ex.f, Z, R("1/4")));
        Rational eps = R("1/4");
        for (int i = 2; i <= 4; ++i) {
            eps /= Rational(2);
            st.push_back(refine_stage(st.back(), ex.f, Z, eps));
        }
    } catch (const Error& e) {
        c.expect(false, e.what());
        return c.out;
    }
    for (std::size_t i = 0; i < st.size(); ++i) {
        const std::string at = "stage " + std::to_string(i + 1) + ": ";
        // Tube validity, nesting, arc checks and the step certificate.
        const auto fails = stage_failures(st[i]);
        c.expect(fails.empty(), at + (fails.empty() ? "" : fails.front()));
        const auto certs = access_certificates(st[i]);
        c.expect(certs.size() == 2, at + "expected two certificates");
        for (const auto& cert : certs) c.expect(cert.pass, at + cert.reason);
        for (std::size_t j = 0; j < st[i].whiskers.size() && j < st[0].whiskers.size(); ++j)
            c.expect(st[i].whiskers[j].probe == st[0].whiskers[j].probe, at + "whisker changed");
    }
    // Direct cross-checks on the materialised curves where they are small.
    const auto c1 = materialize_curve(st[0]), c2 = materialize_curve(st[1]), c3 = materialize_curve(st[2]);
    c.expect(polyline_simple(c1.first), "stage 1 curve not simple");
    c.expect(polyline_simple(c2.first), "stage 2 curve not simple");
    c.expect(sampled_step_failures(c2, c1, ex.f, R("1/8")).empty(), "sampled step bound, stage 2");
    c.expect(sampled_step_failures(c3, c2, ex.f, R("1/16")).empty(), "sampled step bound, stage 3");
    if (c.out.pass)
        c.out.detail = "4 stages certified, 2 whiskers persist; direct simplicity on stages 1-2 (" +
                       std::to_string(c2.first.vertices.size()) + " vertices), sampled step on stages 2-3";
    return c.out;
}

// 9
Outcome composants() {
    Check c;
    const InverseSystem sys = InverseSystem::constant(tent(16));
    const long e = composant_evidence(sys, ILPoint::constant(R("2/15")), ILPoint::constant(R("2/5")), 8);
    const long same = composant_evidence(sys, ILPoint::constant(R("2/15")), ILPoint::constant(R("2/15")), 8);
    c.expect(e == 8, "evidence " + std::to_string(e));
    c.expect(same == 0, "equal threads " + std::to_string(same));
    if (c.out.pass) c.out.detail = "evidence 8, equal threads 0";
    return c.out;
}

// 10
int run(const std::string& cmd) {
    const int rc = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) { return read_file(p.string()); }

/// Typed re-parse of an artifact, re-serialised.
std::string reserialize(const std::string& text) {
    const json j = parse_json(text);
    const std::string kind = j.value("schema", "");
    if (kind == schema::map) return dump(to_json(map_from_json(j)));
    if (kind == schema::factor) return dump(to_json(factor_from_json(j)));
    if (kind == schema::arc) return dump(to_json(arc_document_from_json(j)));
    if (kind == schema::stage) return dump(to_json(stage_from_json(j)));
    return dump(j);  // reports: plain JSON values
}

Outcome determinism(const std::string& cli) {
    Check c;
    const fs::path root = fs::temp_directory_path() / "knaster_acceptance";
    fs::remove_all(root);
    const std::vector<std::pair<std::string, std::string>> cmds{
        {"tent", "tent --m 4 --out {}/tent.json --svg {}/tent.svg"},
        {"factor", "factor --n 2 --out {}/factor.json --svg {}/factor.svg"},
        {"visors", "visors --tent 4 --z 5/8 --out {}/visors.json"},
        {"tuck", "tuck --example 2 --z 2/45,4/5 --eps 1/16 --out {}/tuck.json --svg {}/tuck.svg"},
        {"knaster-example", "knaster-example --n 2 --out {}/example.json"},
        {"composants", "composants --m 16 --x 2/15 --y 2/5 --horizon 8 --out {}/composants.json"},
        {"embed", "embed --example 2 --depth 3 --eps 1/4 --out-dir {}/embed"},
    };
    for (const char* run_name : {"a", "b"}) {
        const fs::path dir = root / run_name;
        fs::create_directories(dir);
        for (const auto& [name, args] : cmds) {
            std::string a = args;
            for (auto at = a.find("{}"); at != std::string::npos; at = a.find("{}")) a.replace(at, 2, dir.string());
            c.expect(run(cli + " " + a) == 0, name + " failed");
        }
    }
    int files = 0, jsons = 0;
    for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
        if (!e.is_regular_file()) continue;
        ++files;
        const fs::path other = root / "b" / fs::relative(e.path(), root / "a");
        c.expect(fs::exists(other) && slurp(e.path()) == slurp(other), "differs: " + e.path().filename().string());
        if (e.path().extension() == ".json") {
            ++jsons;
            try {
                c.expect(reserialize(slurp(e.path())) == slurp(e.path()),
                         "round trip: " + e.path().filename().string());
            } catch (const Error& err) {
                c.expect(false, e.path().filename().string() + ": " + err.what());
            }
        }
    }
    // verify: intact stage passes, a tampered coordinate fails, bad usage is 2.
    const fs::path stage = root / "a" / "embed" / "stage3.json";
    c.expect(run(cli + " verify --stage " + stage.string()) == 0, "verify rejects an intact stage");
    std::string text = slurp(stage);
    const auto at = text.find("\"vertices\"");
    const auto digit = text.find_first_of("123456789", at);
    text[digit] = text[digit] == '9' ? '8' : static_cast<char>(text[digit] + 1);
    write_file((root / "tampered.json").string(), text);
    c.expect(run(cli + " verify --stage " + (root / "tampered.json").string()) == 1, "tampered stage not rejected");
    c.expect(run(cli + " factor --n") == 2, "usage error exit code");
    if (c.out.pass)
        c.out.detail = std::to_string(files) + " artifacts byte-identical, " + std::to_string(jsons) +
                       " JSON round-trips, verify exit codes 0/1/2";
    fs::remove_all(root);
    return c.out;
}

}  // namespace

int main(int argc, char** argv) {
    const std::string cli = argc > 1 ? argv[1] : "knaster";
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"tent composition law", tent_composition},
        {"example instance n=2", example_instance},
        {"example removability n=1..3", example_removability},
        {"visor calculus", visor_calculus},
        {"minimal interval structure", minimal_interval_structure},
        {"oracle equivalence", oracle_equivalence},
        {"tuck conclusions", tuck_conclusions},
        {"pipeline depth 4", pipeline},
        {"composant evidence", composants},
        {"determinism and round-trip", [&] { return determinism(cli); }},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::ostringstream line;
        line.setf(std::ios::fixed);
        line.precision(2);
        line << (o.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << " (" << secs
             << " s): " << o.detail;
        std::cout << line.str() << std::endl;
        failed += !o.pass;
    }
    return failed == 0 ? 0 : 1;
}
