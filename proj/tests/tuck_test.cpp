#include "knaster/knaster.hpp"
#include "knaster/tuck.hpp"
#include "random_maps.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>

using namespace knaster;

namespace {

MarkedSet Zs(std::initializer_list<const char*> xs) {
    std::vector<Rational> v;
    for (auto x : xs) v.push_back(Q(x));
    return MarkedSet(v);
}

PLMap fstar() {
    return PLMap({{Q("0"), Q("1/2")}, {Q("1/4"), Q("1")}, {Q("1/2"), Q("1/4")},
                  {Q("5/8"), Q("3/8")}, {Q("3/4"), Q("0")}, {Q("1"), Q("1")}});
}

VisorFamily family(const PLMap& f, const MarkedSet& Z) { return assign_targets(f, Z, choose_visor_family(f, Z)); }

struct Instance {
    PLMap f;
    MarkedSet Z;
};

std::vector<Instance> fixed_instances() {
    auto ex = build_example_instance(2);
    return {{PLMap::identity(), Zs({"1/2"})}, {tent(4), Zs({"5/8"})}, {ex.f, MarkedSet(ex.zprime)}};
}

std::string describe(const PLMap& f) {
    std::string out;
    for (const auto& p : f.breakpoints()) out += "(" + p.x.str() + "," + p.y.str() + ")";
    return out;
}

bool has_plateau(const PLMap& f) {
    for (std::size_t i = 0; i < f.piece_count(); ++i)
        if (f.slope(i).is_zero()) return true;
    return false;
}

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorKind::PreconditionViolated;
}

}  // namespace

TEST(Perturb, IdentityHasNothingToBreak) {
    const MarkedSet Z = Zs({"1/2"});
    auto pm = perturb_map(PLMap::identity(), Z, family(PLMap::identity(), Z), Q("1/4"));
    EXPECT_TRUE(canonical_equal(pm.fprime, PLMap::identity()));
}

TEST(Perturb, TentSatisfiesAllProperties) {
    const PLMap f = tent(4);
    const MarkedSet Z = Zs({"5/8"});
    const auto fam = family(f, Z);
    ASSERT_FALSE(fam.members.empty());
    for (const char* e : {"1/4", "1/16"}) {
        auto pm = perturb_map(f, Z, fam, Q(e));
        EXPECT_TRUE(perturbation_failures(f, Z, fam, Q(e), pm.fprime).empty()) << e;
        EXPECT_EQ(pm.fprime(Q("5/8")), f(Q("5/8")));
        EXPECT_GT(pm.delta, Rational(0));
    }
}

TEST(Perturb, NonPositiveEpsilon) {
    const MarkedSet Z = Zs({"5/8"});
    const auto fam = family(tent(4), Z);
    EXPECT_EQ(kind_of([&] { perturb_map(tent(4), Z, fam, Q("0")); }), ErrorKind::InfeasiblePerturbation);
    EXPECT_THROW(build_half_plane_arc(tent(4), Z, Q("-1/4")), Error);
}

TEST(Perturb, FailuresDetectTheUnperturbedMap) {
    // tent(4) has ties at the visor's levels, so f itself breaks strictness.
    const PLMap f = tent(4);
    const MarkedSet Z = Zs({"5/8"});
    EXPECT_FALSE(perturbation_failures(f, Z, family(f, Z), Q("1/4"), f).empty());
    const PLMap far = PLMap({{Q("0"), Q("1/2")}, {Q("1"), Q("1/2")}});
    EXPECT_FALSE(perturbation_failures(f, Z, family(f, Z), Q("1/4"), far).empty());
}

TEST(Arc, FixedInstancesVerify) {
    for (const auto& in : fixed_instances()) {
        for (const char* e : {"1/4", "1/16"}) {
            auto arc = build_half_plane_arc(in.f, in.Z, Q(e));
            auto r = verify_half_plane_arc(in.f, in.Z, Q(e), arc);
            EXPECT_TRUE(r.all()) << e << " " << (r.witnesses.empty() ? "" : r.witnesses.front());
            EXPECT_EQ(arc.marks.size(), in.Z.size());
            EXPECT_EQ(arc.params.front(), Rational(0));
            EXPECT_EQ(arc.params.back(), Rational(1));
        }
    }
}

TEST(Arc, MarksSitOnTheBoundary) {
    const PLMap f = tent(4);
    const MarkedSet Z = Zs({"5/8"});
    auto arc = build_half_plane_arc(f, Z, Q("1/16"));
    ASSERT_EQ(arc.marks.size(), 1u);
    const auto [j, k] = arc.marks.front();
    EXPECT_EQ(j, 1u);
    EXPECT_EQ(arc.params[k], Q("5/8"));
    EXPECT_EQ(arc.path.vertices[k], (Point2{Rational(0), f(Q("5/8"))}));
    std::size_t on_wall = 0;
    for (const auto& v : arc.path.vertices) on_wall += v.x.is_zero() ? 1 : 0;
    EXPECT_EQ(on_wall, 1u);
}

TEST(Arc, NonRemovableVisorRejected) {
    EXPECT_EQ(kind_of([] { build_half_plane_arc(fstar(), Zs({"1/2"}), Q("1/4")); }), ErrorKind::NonRemovableVisor);
}

TEST(Arc, PlateauRejected) {
    const PLMap f({{Q("0"), Q("0")}, {Q("1/4"), Q("1/2")}, {Q("3/4"), Q("1/2")}, {Q("1"), Q("1")}});
    EXPECT_EQ(kind_of([&] { build_half_plane_arc(f, Zs({"1/8"}), Q("1/4")); }), ErrorKind::PreconditionViolated);
}

TEST(Verify, TamperedArcsFail) {
    const PLMap f = tent(4);
    const MarkedSet Z = Zs({"5/8"});
    const Rational eps = Q("1/16");
    const auto arc = build_half_plane_arc(f, Z, eps);

    auto pushed = arc;
    const std::size_t k = arc.marks.front().second == 1 ? 2 : 1;
    pushed.path.vertices[k].x = Q("-1/64");
    auto r2 = verify_half_plane_arc(f, Z, eps, pushed);
    EXPECT_FALSE(r2.conclusion2);
    EXPECT_FALSE(r2.all());

    auto lifted = arc;
    for (auto& v : lifted.path.vertices) v.y = v.y + Rational(2) * eps;
    auto r1 = verify_half_plane_arc(f, Z, eps, lifted);
    EXPECT_FALSE(r1.conclusion1);
    EXPECT_FALSE(r1.witnesses.empty());

    auto reversed = arc;
    std::swap(reversed.params[1], reversed.params[2]);
    EXPECT_FALSE(verify_half_plane_arc(f, Z, eps, reversed).well_formed);
}

TEST(Arc, Deterministic) {
    auto ex = build_example_instance(2);
    const MarkedSet Z(ex.zprime);
    EXPECT_EQ(build_half_plane_arc(ex.f, Z, Q("1/16")), build_half_plane_arc(ex.f, Z, Q("1/16")));
}

TEST(Arc, RandomRemovableInstances) {
    std::mt19937 rng(20261018);
    int done = 0, with_visors = 0;
    for (int it = 0; it < 6000 && done < 200; ++it) {
        const long den = it % 2 ? 16 : 64;
        const PLMap f = random_map(rng, 8, den);
        if (has_plateau(f)) continue;
        std::uniform_int_distribution<long> d(0, den);
        std::uniform_int_distribution<int> k(1, 3);
        std::set<Rational> zs;
        const int want = k(rng);
        while (static_cast<int>(zs.size()) < want) zs.insert(Rational(d(rng), den));
        const MarkedSet Z(std::vector<Rational>(zs.begin(), zs.end()));
        if (!order_hypothesis_holds(f, Z) || !all_visors_removable(f, Z).all_removable) continue;
        const auto fam = family(f, Z);
        ++done;
        with_visors += fam.members.empty() ? 0 : 1;
        for (const char* e : {"1/4", "1/16"}) {
            auto pm = perturb_map(f, Z, fam, Q(e));
            ASSERT_TRUE(perturbation_failures(f, Z, fam, Q(e), pm.fprime).empty()) << describe(f);
            auto r = verify_half_plane_arc(f, Z, Q(e), build_half_plane_arc(f, Z, Q(e)));
            ASSERT_TRUE(r.all()) << describe(f) << " eps=" << e << " " << (r.witnesses.empty() ? "" : r.witnesses.front());
        }
    }
    EXPECT_GE(done, 100);
    EXPECT_GE(with_visors, 20);
}
