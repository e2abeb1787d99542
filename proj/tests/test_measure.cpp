#include <doctest.h>

#include "ymlab/measure.hpp"

using namespace ym;

TEST_CASE("atoms within dedup_tol merge") {
    DiscreteMeasure m(1, 1e-9);
    m.add({0.25}, 0.5);
    m.add({0.25 + 1e-10}, 0.25);
    m.add({0.75}, 0.25);
    CHECK(m.size() == 2);
    CHECK(m.weight(0) == 0.75);
    CHECK(m.mass() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(m.find({0.75}) == 1);
    CHECK(m.find({0.5}) == -1);
}

TEST_CASE("prune drops light atoms only") {
    DiscreteMeasure m(1);
    m.add({0.0}, 1e-14);
    m.add({1.0}, 0.5);
    m.prune(1e-12);
    REQUIRE(m.size() == 1);
    CHECK(m.point(0)[0] == 1.0);
}

TEST_CASE("pushforward maps atoms and merges collisions") {
    DiscreteMeasure m(1);
    m.add({-1.0}, 0.25);
    m.add({1.0}, 0.5);
    DiscreteMeasure sq = pushforward(
        m, [](const Vec& z) { return Vec{z[0] * z[0]}; }, 1);
    REQUIRE(sq.size() == 1); // both atoms land on 1
    CHECK(sq.point(0)[0] == 1.0);
    CHECK(sq.weight(0) == 0.75);
}

TEST_CASE("restrict keeps the predicate support") {
    DiscreteMeasure m(1);
    m.add({0.25}, 0.5);
    m.add({0.75}, 0.5);
    DiscreteMeasure r = restrict_measure(m, [](const Vec& z) { return z[0] < 0.5; });
    REQUIRE(r.size() == 1);
    CHECK(r.point(0)[0] == 0.25);
}

TEST_CASE("disintegrate and assemble invert each other") {
    ProductMeasure p;
    p.x_dim = 1;
    p.z_dim = 1;
    p.joint = DiscreteMeasure(2);
    p.joint.add({0.25, -1.0}, 0.125);
    p.joint.add({0.25, 1.0}, 0.375);
    p.joint.add({0.75, 2.0}, 0.5);

    ParametrizedMeasure pm = disintegrate(p);
    REQUIRE(pm.marginal.size() == 2);
    int c0 = pm.marginal.find({0.25});
    REQUIRE(c0 >= 0);
    CHECK(pm.marginal.weight(c0) == 0.5);
    REQUIRE(pm.fiber[c0].has_value());
    // fibers are probabilities with the joint's conditional weights
    CHECK(pm.fiber[c0]->mass() == doctest::Approx(1.0).epsilon(1e-15));
    int a = pm.fiber[c0]->find({1.0});
    REQUIRE(a >= 0);
    CHECK(pm.fiber[c0]->weight(a) == 0.75);

    ProductMeasure back = assemble(pm, 1, 1);
    REQUIRE(back.joint.size() == 3);
    int k = back.joint.find({0.25, -1.0});
    REQUIRE(k >= 0);
    CHECK(back.joint.weight(k) == doctest::Approx(0.125).epsilon(1e-15));
}

TEST_CASE("disintegration round trip preserves random products") {
    Rng rng(207);
    ProductMeasure p;
    p.x_dim = 2;
    p.z_dim = 1;
    p.joint = DiscreteMeasure(3);
    for (int i = 0; i < 40; ++i) {
        Vec pt = {rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(-2, 2)};
        p.joint.add(pt, rng.uniform(0.01, 1.0));
    }
    ProductMeasure back = assemble(disintegrate(p), 2, 1);
    CHECK(back.joint.mass() == doctest::Approx(p.joint.mass()).epsilon(1e-13));
    for (size_t i = 0; i < p.joint.size(); ++i) {
        int k = back.joint.find(p.joint.point(i));
        REQUIRE(k >= 0);
        CHECK(back.joint.weight(k) == doctest::Approx(p.joint.weight(i)).epsilon(1e-12));
    }
}

TEST_CASE("radon_nikodym splits density from singular part") {
    DiscreteMeasure mu(1);
    mu.add({0.25}, 0.5);
    mu.add({0.75}, 0.5);
    VectorDiscreteMeasure l(1, 1);
    l.add({0.25}, {0.2});  // density 0.4 against weight 0.5
    l.add({0.9}, {0.3});   // off the mu support

    RadonNikodymResult rn = radon_nikodym(l, mu);
    REQUIRE(rn.density.size() == 2);
    CHECK(rn.density[0][0] == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(rn.density[1][0] == 0.0);
    REQUIRE(rn.singular.size() == 1);
    CHECK(rn.singular.point(0)[0] == 0.9);
    CHECK(rn.singular.vweight(0)[0] == 0.3);

    // reconstruction is atom by atom exact
    for (size_t i = 0; i < l.size(); ++i) {
        int j = mu.find(l.point(i));
        double rebuilt = (j >= 0 ? rn.density[j][0] * mu.weight(j) : 0.0);
        int s = rn.singular.find(l.point(i));
        if (s >= 0) rebuilt += rn.singular.vweight(s)[0];
        CHECK(rebuilt == doctest::Approx(l.vweight(i)[0]).epsilon(1e-14));
    }
}

TEST_CASE("atomic_split partitions by threshold") {
    DiscreteMeasure m(1);
    m.add({0.0}, 0.9);
    m.add({1.0}, 0.05);
    AtomicSplit s = atomic_split(m, 0.1);
    REQUIRE(s.atoms.size() == 1);
    REQUIRE(s.diffuse.size() == 1);
    CHECK(s.atoms.point(0)[0] == 0.0);
    CHECK(s.atoms.mass() + s.diffuse.mass() == doctest::Approx(m.mass()).epsilon(1e-15));
}

TEST_CASE("pair total variation: area of the graph plus singular mass") {
    DiscreteMeasure mu(1);
    mu.add({0.25}, 0.5);
    mu.add({0.75}, 0.5);
    VectorDiscreteMeasure eta(1, 1);
    eta.add({0.25}, {0.375}); // density 3/4: sqrt(1 + 9/16) = 5/4
    eta.add({0.9}, {0.3});    // pure singular

    // 0.5 * 5/4 + 0.5 * 1 + 0.3
    CHECK(tv_pair(eta, mu) == doctest::Approx(1.425).epsilon(1e-14));

    // dominated pair has no singular part
    VectorDiscreteMeasure flat(1, 1);
    CHECK(tv_pair(flat, mu) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("vector measure total variation sums atom norms") {
    VectorDiscreteMeasure v(1, 2);
    v.add({0.0}, {0.3, 0.4});
    v.add({1.0}, {1.0, 0.0});
    CHECK(v.total_variation() == doctest::Approx(1.5).epsilon(1e-15));
    // adding on an existing atom accumulates the vector weight
    v.add({0.0}, {0.3, 0.4});
    CHECK(v.total_variation() == doctest::Approx(2.0).epsilon(1e-15));
}
