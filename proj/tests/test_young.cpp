#include <doctest.h>

#include "ymlab/scenario.hpp" // line_grid and the sequence builders
#include "ymlab/young.hpp"

#include <cmath>

using namespace ym;

namespace {
std::shared_ptr<const CompactificationSpec> sphere1(double mag_min = 1e3) {
    SpecParams prm;
    prm.mag_min = mag_min;
    return std::make_shared<CompactificationSpec>(CompactificationSpec::sphere(1, prm));
}
} // namespace

TEST_CASE("grid descriptor geometry") {
    GridDescriptor g = line_grid(8);
    CHECK(g.cell_count() == 8);
    CHECK(g.cell_volume() == 0.125);
    CHECK(g.spacing(0) == 0.125);
    CHECK(g.center(0)[0] == 0.0625);
    CHECK(g.center(7)[0] == doctest::Approx(0.9375).epsilon(1e-16));
    CHECK(g.locate(Vec{0.3}) == 2);
    CHECK(g.on_boundary(Vec{0.0}));
    CHECK(g.on_boundary(Vec{1.0}));
    CHECK_FALSE(g.on_boundary(Vec{0.5}));

    DiscreteMeasure lm = grid_measure(g);
    CHECK(lm.size() == 8);
    CHECK(lm.mass() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("elementary embedding pairs exactly") {
    SampledSequence seq = seq_oscillation(8, 64, {2});
    auto spec = sphere1();
    auto reg = std::make_shared<AtomRegistry>();
    YoungTriple nu = elementary(seq, 0, spec, reg);
    CHECK(nu.undefined_fibers() == 0);
    CHECK(nu.conc.size() == 0);
    CHECK(nu.mu_mass() == doctest::Approx(1.0).epsilon(1e-15));
    // integral of |sign wave| is 1, and the embedding reproduces it exactly
    CHECK(pair_integral(nu, catalog("abs")) == 1.0);
    CHECK(field_integral(seq, 0, catalog("abs")) == 1.0);
}

TEST_CASE("histogram estimator splits bounded and diverging samples") {
    SampledSequence seq;
    seq.grid = line_grid(2);
    seq.zdim = 1;
    seq.jvalues = {1};
    seq.mu = DiscreteMeasure(1);
    seq.mu.add({0.125}, 0.25);
    seq.mu.add({0.375}, 0.25);
    seq.mu.add({0.625}, 0.25);
    seq.mu.add({0.875}, 0.25);
    seq.fields = {{{0.5}, {-0.5}, {3000.0}, {0.25}}};

    auto spec = sphere1();
    auto reg = std::make_shared<AtomRegistry>();
    YoungTriple nu = estimate(seq, spec, reg);

    CHECK(nu.cell_mass[0] == 0.5);
    CHECK(nu.cell_mass[1] == 0.5);
    REQUIRE(nu.osc[0].has_value());
    CHECK(nu.osc[0]->size() == 2);
    CHECK(nu.osc[0]->mass() == doctest::Approx(1.0).epsilon(1e-15));
    REQUIRE(nu.osc[1].has_value());
    REQUIRE(nu.osc[1]->size() == 1);
    CHECK(nu.osc[1]->point(0)[0] == 0.25); // the diverging sample left the fiber

    REQUIRE(nu.conc.size() == 1);
    CHECK(nu.conc.point(0)[0] == 0.75);
    CHECK(nu.conc.weight(0) == doctest::Approx(750.0).epsilon(1e-15));
    CHECK(reg->size() == 1);

    // 0.5 * 0.5 + 0.5 * 0.25 + 750
    CHECK(pair_integral(nu, catalog("abs")) == doctest::Approx(750.375).epsilon(1e-15));
    CHECK(nu.boundary_conc_mass() == 0.0);
}

TEST_CASE("estimate refuses a cutoff below the classification threshold") {
    SampledSequence seq = seq_oscillation(4, 32, {2});
    EstimateParams prm;
    prm.R_cut = 10.0; // spec mag_min stays at 1e3
    CHECK_THROWS(estimate(seq, sphere1(), std::make_shared<AtomRegistry>(), prm));
}

TEST_CASE("pairing weights cells by eta and honors recession overrides") {
    SampledSequence seq = seq_constant(4, 32, 2.0, 1);
    auto spec = sphere1();
    auto reg = std::make_shared<AtomRegistry>();
    YoungTriple nu = elementary(seq, 0, spec, reg);

    PairOptions opt;
    opt.eta = [](std::span<const double> x) { return x[0]; };
    // sum over centers: (1/8 + 3/8 + 5/8 + 7/8)/4 * 2 = 1
    CHECK(pair_integral(nu, catalog("abs"), opt) == doctest::Approx(1.0).epsilon(1e-15));

    // add concentration by hand and pair against an overridden recession
    nu.conc.add({0.5}, 0.25);
    DiscreteMeasure ang(1);
    int id = reg->classify({5e3}, *spec);
    ang.add({static_cast<double>(id)}, 1.0);
    nu.angle.push_back(ang);
    CHECK(pair_integral(nu, catalog("abs")) == doctest::Approx(2.25).epsilon(1e-14));
    PairOptions over;
    over.atom_recession[id] = 10.0;
    CHECK(pair_integral(nu, catalog("abs"), over) == doctest::Approx(4.5).epsilon(1e-14));
    // an integrand with no recession cannot extend to the boundary
    CHECK_THROWS(pair_integral(nu, catalog("logsin")));
}

TEST_CASE("barycentre integrates z against fibers and keeps polar mass") {
    SampledSequence seq = seq_constant(4, 32, -0.5, 1);
    auto spec = sphere1();
    auto reg = std::make_shared<AtomRegistry>();
    YoungTriple nu = elementary(seq, 0, spec, reg);
    VectorDiscreteMeasure b = barycentre(nu);
    REQUIRE(b.size() == 4);
    StableSum total;
    for (size_t i = 0; i < b.size(); ++i) total.add(b.vweight(i)[0]);
    CHECK(total.value() == doctest::Approx(-0.5).epsilon(1e-15));
}

TEST_CASE("tolerance matched total variation distance") {
    DiscreteMeasure a(1), b(1);
    a.add({1.0}, 0.5);
    a.add({-1.0}, 0.5);
    b.add({1.0 + 1e-12}, 0.25);
    b.add({-1.0}, 0.75);
    CHECK(tv_distance(a, b, 1e-9) == doctest::Approx(0.5).epsilon(1e-12));
    DiscreteMeasure far(1);
    far.add({5.0}, 1.0);
    CHECK(tv_distance(a, far, 1e-9) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("battery distance vanishes only on equal triples") {
    SampledSequence seq = seq_oscillation(8, 64, {2, 4});
    auto spec = sphere1();
    auto reg = std::make_shared<AtomRegistry>();
    YoungTriple a = elementary(seq, 0, spec, reg);
    YoungTriple b = elementary(seq, 1, spec, reg);
    auto battery = default_battery(1, 1);
    CHECK(!battery.empty());
    CHECK(ym_distance(a, a, battery) == 0.0);
    double dab = ym_distance(a, b, battery);
    CHECK(dab >= 0);
    CHECK(ym_distance(b, a, battery) == doctest::Approx(dab).epsilon(1e-12));
    // different frequencies share all moments; a shifted copy must separate
    SampledSequence shifted = seq_constant(8, 64, 0.25, 1);
    YoungTriple c = elementary(shifted, 0, spec, reg);
    CHECK(ym_distance(a, c, battery) > 0.05);
}

TEST_CASE("equiintegrability flags oscillation but not concentration") {
    EquiProfile eo = is_equiintegrable(seq_oscillation(16, 128, {2, 4, 8}));
    CHECK(eo.flag);
    CHECK(eo.profile.back() == doctest::Approx(0.0).epsilon(1e-12));

    // escaping mass shows only below the top rung; a finite family always
    // passes once the thresholds overtake its largest value
    SampledSequence conc = seq_concentration(16, {128, 256});
    EquiProfile ec = is_equiintegrable(conc, {2, 8, 32, 64});
    CHECK_FALSE(ec.flag);
    REQUIRE(!ec.profile.empty());
    CHECK(ec.profile.back() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(is_equiintegrable(conc).flag);
}

TEST_CASE("decompose splits at the cut and preserves the fields") {
    SampledSequence seq = seq_mixed(16, 1024, {64});
    Decomposition d = decompose(seq, 40.0);
    REQUIRE(d.oscillation.fields.size() == 1);
    for (size_t i = 0; i < seq.mu.size(); ++i) {
        double v = seq.fields[0][i][0];
        double vo = d.oscillation.fields[0][i][0];
        double vc = d.concentration.fields[0][i][0];
        CHECK(vo + vc == doctest::Approx(v).epsilon(1e-15));
        CHECK(std::abs(vo) <= 40.0 + 1e-12);
    }
}

TEST_CASE("join translates fibers by the strong limit and adds spikes") {
    // strongly convergent part: constant 1 plus a vanishing perturbation
    SampledSequence vseq = seq_constant(8, 256, 1.0, 2);
    SampledSequence wseq = seq_oscillation(8, 256, {8, 16});
    auto spec = sphere1();
    auto reg = std::make_shared<AtomRegistry>();
    JoinResult jr = join(vseq, wseq, spec, reg);
    YoungTriple sum = estimate(jr.sum, spec, reg);
    auto battery = default_battery(1, 1);
    CHECK(ym_distance(sum, jr.predicted, battery) <= 0.05);
    // fibers of the prediction sit at 1 +- 1
    REQUIRE(jr.predicted.osc[0].has_value());
    CHECK(jr.predicted.osc[0]->find({2.0}) >= 0);
    CHECK(jr.predicted.osc[0]->find({0.0}) >= 0);
}

TEST_CASE("vector measure embedding keeps density and polar parts apart") {
    GridDescriptor g = line_grid(4);
    DiscreteMeasure mu = grid_measure(g);
    VectorDiscreteMeasure l(1, 1);
    for (int c = 0; c < 4; ++c) l.add(g.center(c), {0.25 * 0.5}); // slope 0.5
    l.add({0.5}, {0.375}); // singular jump on a cell wall

    auto spec = sphere1();
    auto reg = std::make_shared<AtomRegistry>();
    YoungTriple nu = elementary_measure(l, mu, g, spec, reg);
    CHECK(nu.undefined_fibers() == 0);
    for (int c = 0; c < 4; ++c) {
        REQUIRE(nu.osc[c].has_value());
        CHECK(nu.osc[c]->point(0)[0] == doctest::Approx(0.5).epsilon(1e-15));
    }
    REQUIRE(nu.conc.size() == 1);
    CHECK(nu.conc.weight(0) == doctest::Approx(0.375).epsilon(1e-15));
    // graph area: int sqrt(1 + 1/4) + |jump|
    double want = std::sqrt(1.25) + 0.375;
    CHECK(pair_integral(nu, catalog("area")) == doctest::Approx(want).epsilon(1e-13));

    // a spec finer than the sphere cannot classify the polar without witnesses
    auto fine = std::make_shared<CompactificationSpec>(
        CompactificationSpec(1, {catalog("logsin")}));
    auto reg2 = std::make_shared<AtomRegistry>();
    CHECK_THROWS(elementary_measure(l, mu, g, fine, reg2));
    std::vector<Vec> witness = {{2e3}};
    CHECK_NOTHROW(elementary_measure(l, mu, g, fine, reg2, &witness));
}

TEST_CASE("rescaling by a constant is an exact symmetry") {
    SampledSequence seq = seq_oscillation(8, 128, {4, 8});
    auto spec = sphere1();
    RescaleReport one = rescale_compare(
        seq, [](std::span<const double>) { return 1.0; }, spec);
    CHECK(one.fiber_tv_max == 0.0);
    CHECK(one.conc_mass_diff == 0.0);
    CHECK(one.conc_matched_tv == 0.0);
    CHECK(one.angle_dir_diff == 0.0);
    CHECK(one.cells_compared == 8);

    RescaleReport two = rescale_compare(
        seq, [](std::span<const double>) { return 2.0; }, spec);
    CHECK(two.fiber_tv_max <= 1e-12);
    CHECK(two.conc_mass_diff == 0.0);
}

TEST_CASE("sampled sequence validation") {
    SampledSequence seq = seq_oscillation(8, 64, {2});
    seq.fields[0].pop_back();
    CHECK_THROWS(seq.check());
    CHECK_THROWS(seq_oscillation(8, 64, {3}));  // frequency not dyadic-aligned
    CHECK_THROWS(seq_oscillation(8, 63, {2}));  // quadrature not a power of two
}
