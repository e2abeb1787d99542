#include <doctest.h>

#include "ymlab/compactification.hpp"

#include <cmath>

using namespace ym;

namespace {
// magnitudes where sin(log(1+r)) locks at +1 (even j) or -1 (odd j)
double ring_mag(int j) { return std::expm1(std::acos(-1.0) * (0.5 + j)); }
} // namespace

TEST_CASE("sphere spec has no generators and the plain ball metric") {
    CompactificationSpec s = CompactificationSpec::sphere(1);
    CHECK(s.generator_count() == 0);
    CHECK(s.metric(Vec{0.5}, Vec{-0.25}) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(s.metric(Vec{0.5}, Vec{0.5}) == 0.0);
    CHECK(s.signature(Vec{0.5}).empty());
}

TEST_CASE("generators are normalized to unit sampled sup and Lipschitz") {
    CompactificationSpec s(1, {catalog("logsin")});
    REQUIRE(s.generator_count() == 1);
    CHECK(s.sampled_sup(0) <= 1.0 + 1e-9);
    CHECK(s.sampled_lip(0) <= 1.0 + 1e-9);
    CHECK(s.weight(0) == 0.5);
    CHECK(s.generator_scale(0) > 0);
    CHECK(s.generator_index(s.generator_label(0)) == 0);
    CHECK(s.generator_index("not-here") == -1);
}

TEST_CASE("metric axioms hold on random ball points") {
    CompactificationSpec s(2, {catalog("logsin"), catalog("dist:1")});
    Rng rng(31);
    for (int i = 0; i < 60; ++i) {
        Vec a = rng.ball(2), b = rng.ball(2), c = rng.ball(2);
        double ab = s.metric(a, b);
        CHECK(ab >= 0);
        CHECK(ab == s.metric(b, a));
        CHECK(ab <= s.metric(a, c) + s.metric(c, b) + 1e-12);
    }
}

TEST_CASE("stacking keeps old indices and dominates the old metric") {
    CompactificationSpec base(1, {catalog("logsin")});
    CompactificationSpec wide = stack(base, {catalog("dist:1")});
    REQUIRE(wide.generator_count() == 2);
    CHECK(wide.generator_label(0) == base.generator_label(0));
    CHECK(wide.generator_scale(0) == base.generator_scale(0));
    Rng rng(32);
    for (int i = 0; i < 40; ++i) {
        Vec a = rng.ball(1), b = rng.ball(1);
        CHECK(wide.metric(a, b) >= base.metric(a, b) - 1e-14);
    }
}

TEST_CASE("classification glues directions on the sphere") {
    CompactificationSpec s = CompactificationSpec::sphere(2);
    AtomRegistry reg;
    int a = reg.classify({2e3, 0.0}, s);
    int b = reg.classify({5e4, 1.0}, s); // nearly the same direction
    int c = reg.classify({0.0, -3e3}, s);
    CHECK(a == b);
    CHECK(a != c);
    CHECK(reg.size() == 2);
    CHECK(reg.atom(a).dir[0] == doctest::Approx(1.0).epsilon(1e-3));
    CHECK_THROWS(reg.classify({1.0, 0.0}, s)); // below mag_min

    AtomValidation v = validate_atom(reg.atom(a), s);
    CHECK(v.ok);
    CHECK(norm(sphere_project(reg.atom(a))) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("a logsin generator separates magnitude rings of one direction") {
    // the normalization scale shrinks the raw signature gap, so probe it and
    // classify with an equivalence tolerance safely inside the gap
    CompactificationSpec probe(1, {catalog("logsin")});
    auto sig2 = probe.signature(hat({ring_mag(2)}));
    auto sig3 = probe.signature(hat({ring_mag(3)}));
    double gap = probe.weight(0) * std::abs(sig2[0] - sig3[0]);
    CHECK(gap > 1e-4);

    SpecParams prm;
    prm.tol_equiv = std::min(5e-2, gap / 4);
    CompactificationSpec s(1, {catalog("logsin")}, prm);
    AtomRegistry reg;
    int even2 = reg.classify({ring_mag(2)}, s);
    int odd3 = reg.classify({ring_mag(3)}, s);
    int even4 = reg.classify({ring_mag(4)}, s);
    CHECK(even2 != odd3);   // sin log locks at +1 vs -1
    CHECK(even2 == even4);  // same lock, same class
    CHECK(reg.size() == 2);

    // the sphere glues all of them back together
    CompactificationSpec sphere = CompactificationSpec::sphere(1);
    AtomRegistry flat;
    CHECK(flat.classify({ring_mag(2)}, sphere) == flat.classify({ring_mag(3)}, sphere));
}

TEST_CASE("match is read only and mirrors classify") {
    CompactificationSpec s = CompactificationSpec::sphere(2);
    AtomRegistry reg;
    int id = reg.classify({3e3, 4e3}, s);
    Vec dir = {0.6, 0.8};
    CHECK(reg.match(dir, {}, s) == id);
    CHECK(reg.match({-0.6, -0.8}, {}, s) == -1);
    CHECK(reg.size() == 1);
}

TEST_CASE("upper recession dominates the witness tail") {
    CompactificationSpec s(1, {catalog("logsin")});
    AtomRegistry reg;
    const double pi = std::acos(-1.0);
    int id = reg.classify({ring_mag(2)}, s);
    for (int k = 1; k < 10; ++k) // more witnesses in the same lock
        CHECK(reg.classify({std::expm1(pi * 2.5 + 0.02 * k)}, s) == id);
    UpperRecessionResult u = upper_recession(catalog("abs"), reg.atom(id), s);
    CHECK(u.value >= u.witness_limsup);
    CHECK(u.witness_limsup > 0.9); // T abs tends to 1 along any diverging witness
    CHECK(u.accepted > 0);
}
