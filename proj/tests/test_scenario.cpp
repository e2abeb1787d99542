#include <doctest.h>

#include "ymlab/scenario.hpp"

#include <cmath>
#include <stdexcept>

using namespace ym;

TEST_CASE("scenario registry dispatches by id and rejects strangers") {
    auto ids = scenario_ids();
    CHECK(ids.size() == 10);
    ScenarioConfig cfg;
    cfg.id = "no-such-scenario";
    CHECK_THROWS_AS(run_scenario(cfg), std::invalid_argument);
    CHECK_THROWS_AS(make_named_spec("moebius", 1), std::invalid_argument);
}

TEST_CASE("constant scenario passes and reruns bit-identically") {
    ScenarioConfig cfg;
    cfg.id = "constant";
    cfg.resolution = 32;
    cfg.quad_res = 256;
    ScenarioReport a = run_scenario(cfg);
    CHECK(a.pass);
    REQUIRE(!a.checks.empty());
    for (const auto& row : a.checks) CHECK(row.pass);
    ScenarioReport b = scenario_constant(cfg);
    REQUIRE(b.checks.size() == a.checks.size());
    for (size_t i = 0; i < a.checks.size(); ++i) {
        CHECK(a.checks[i].name == b.checks[i].name);
        CHECK(a.checks[i].measured == b.checks[i].measured);
    }
}

TEST_CASE("sequence builders reject malformed requests") {
    CHECK_THROWS(seq_oscillation(12, 1024, {2}));   // cells not a power of two
    CHECK_THROWS(seq_oscillation(8, 1024, {}));     // no frequencies
    CHECK_THROWS(seq_oscillation(8, 1024, {3}));    // 1024 not divisible by 6
    CHECK_THROWS(seq_concentration(8, {3}));        // spike width not dyadic
    CHECK_THROWS(seq_concentration(8, {1}));        // spike as wide as the domain
    CHECK_THROWS(seq_counterexample(8, 4));         // ladder too deep
    SampledSequence seq = seq_oscillation(8, 1024, {4});
    CHECK_THROWS(subsequence(seq, {}));
    CHECK_THROWS(subsequence(seq, {5}));
    CHECK_THROWS(field_integral(seq, 3, catalog("abs")));
}

TEST_CASE("sign waves integrate exactly on dyadic quadrature") {
    SampledSequence seq = seq_oscillation(8, 1024, {4, 16});
    CHECK(field_integral(seq, 0, catalog("abs")) == 1.0);
    CHECK(field_integral(seq, 1, catalog("affine:0:1")) == 0.0); // odd wave, zero mean
    SampledSequence one = subsequence(seq, {1});
    CHECK(one.fields.size() == 1);
    CHECK(field_integral(one, 0, catalog("abs")) == 1.0);
}

TEST_CASE("staircase rounds the weight down by at most 1/n") {
    auto a = [](std::span<const double> x) { return 1.0 + x[0]; };
    Vec x = {0.3};
    CHECK(staircase(a, 10, x) == 1.3);
    CHECK(staircase(a, 7, x) == doctest::Approx(9.0 / 7.0).epsilon(1e-15));
    for (int n : {1, 3, 10, 64, 1000}) {
        double s = staircase(a, n, x);
        CHECK(s <= a(x));
        CHECK(s > a(x) - 1.0 / n);
    }
    CHECK_THROWS(staircase(a, 0, x));
}

TEST_CASE("error budget totals absolute terms") {
    ErrorBudget b;
    b.terms = {1.0, -2.0, 3.0, 0.0, 0.0, 0.0, 0.5};
    b.settle();
    CHECK(b.total == 6.5);
}

TEST_CASE("default test pairs are Lipschitz weights with recessive integrands") {
    for (int zdim : {1, 2}) {
        auto pairs = default_test_pairs(zdim);
        CHECK(pairs.size() == 7);
        for (const auto& p : pairs) {
            CHECK(static_cast<bool>(p.phi.recession));
            Vec x0 = {0.3}, x1 = {0.7};
            CHECK(std::abs(p.eta(x0) - p.eta(x1)) <= 0.4 + 1e-12);
        }
    }
    CHECK_THROWS(default_test_pairs(0));
}

namespace {
struct Rig {
    std::shared_ptr<const CompactificationSpec> spec;
    std::shared_ptr<AtomRegistry> reg;
    Rig() : spec(make_named_spec("sphere", 1)), reg(std::make_shared<AtomRegistry>()) {}
};

YoungTriple delta_triple(const Rig& rig, int cells, double fiber_at, double slope_mass) {
    YoungTriple nu;
    nu.grid = line_grid(cells);
    nu.zdim = 1;
    nu.cell_mass = Vec(cells, 1.0 / cells);
    DiscreteMeasure d(1);
    d.add({fiber_at}, 1.0);
    nu.osc.assign(cells, d);
    nu.conc = DiscreteMeasure(1);
    nu.spec = rig.spec;
    nu.registry = rig.reg;
    (void)slope_mass;
    return nu;
}
} // namespace

TEST_CASE("characterisation verifier accepts an exact elementary field") {
    Rig rig;
    YoungTriple nu = delta_triple(rig, 4, 0.5, 0);
    nu.conc.add({0.375}, 0.75);
    int id = rig.reg->classify({1e6}, *rig.spec);
    DiscreteMeasure ang(1);
    ang.add({static_cast<double>(id)}, 1.0);
    nu.angle.push_back(ang);

    PiecewiseAffineField u;
    u.grid = nu.grid;
    u.zdim = 1;
    u.slope.assign(4, Vec{0.5});
    u.jumps.push_back({0.375, {0.75}});

    std::vector<Integrand> battery = {catalog("abs"), catalog("area"), catalog("dist:1")};
    CharacterisationReport rep = verify_characterisation(nu, u, battery);
    CHECK(rep.finite);
    CHECK(rep.pass);
    CHECK(rep.min_cell_slack >= -1e-9);
    CHECK(rep.min_singular_slack >= -1e-9);
    CHECK(rep.barycentre_gap <= 1e-12);
    for (const auto& row : rep.per_integrand) CHECK(row.pass);
}

TEST_CASE("characterisation verifier flags a slope the fiber cannot dominate") {
    Rig rig;
    YoungTriple nu = delta_triple(rig, 4, 0.0, 0);
    PiecewiseAffineField u;
    u.grid = nu.grid;
    u.zdim = 1;
    u.slope.assign(4, Vec{1.0}); // fibers sit at 0, |Du| says 1
    CharacterisationReport rep = verify_characterisation(nu, u, {catalog("abs")});
    CHECK_FALSE(rep.pass);
    CHECK(rep.min_cell_slack == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("characterisation verifier rejects boundary concentration and recession-free members") {
    Rig rig;
    YoungTriple nu = delta_triple(rig, 4, 0.5, 0);
    nu.conc.add({1.0}, 0.25); // on the domain boundary
    int id = rig.reg->classify({1e6}, *rig.spec);
    DiscreteMeasure ang(1);
    ang.add({static_cast<double>(id)}, 1.0);
    nu.angle.push_back(ang);
    PiecewiseAffineField u;
    u.grid = nu.grid;
    u.zdim = 1;
    u.slope.assign(4, Vec{0.5});
    CHECK_THROWS_AS(verify_characterisation(nu, u, {catalog("abs")}), std::invalid_argument);

    YoungTriple plain = delta_triple(rig, 4, 0.5, 0);
    PiecewiseAffineField v = u;
    v.jumps.push_back({0.375, {1.0}});
    CHECK_THROWS_WITH(verify_characterisation(plain, v, {catalog("logsin")}),
                      doctest::Contains("has no recession"));
}

TEST_CASE("singular construction with zero mass is exactly free") {
    Rig rig;
    SingularTarget t;
    t.cells = 16;
    t.mass = 0.0;
    t.direction = {1.0};
    InhomogResult r = inhomogenize_singular(t, 3, 2, rig.spec, rig.reg);
    CHECK(r.budget.total == 0.0);
    CHECK(r.max_discrepancy == 0.0);
    CHECK(r.target.conc.mass() == 0.0);
    for (const auto& row : r.checks) CHECK(row.pass);
}

TEST_CASE("singular construction realizes its target within the certified budget") {
    Rig rig;
    SingularTarget t;
    t.cells = 16;
    t.point = 0.5;
    t.mass = 0.25;
    t.direction = {1.0};
    InhomogResult r = inhomogenize_singular(t, 3, 2, rig.spec, rig.reg);
    CHECK(r.budget.total > 0.0);
    CHECK(r.budget.total <= 0.1);
    CHECK(r.max_discrepancy <= r.budget.total);
    CHECK(r.target.conc.mass() == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(r.target.conc.point(0)[0] == 0.5);
    for (int c = 0; c < 16; ++c) {
        REQUIRE(r.target.osc[c].has_value());
        CHECK(r.target.osc[c]->size() == 1);
        CHECK(r.target.osc[c]->point(0)[0] == 0.0);
    }
    for (const auto& row : r.checks) CHECK(row.pass);

    CHECK_THROWS_AS(inhomogenize_singular(t, 1, 0, rig.spec, rig.reg), std::invalid_argument);
    SingularTarget bad = t;
    bad.point = 0.3; // not dyadic at generation a+b
    CHECK_THROWS(inhomogenize_singular(bad, 3, 0, rig.spec, rig.reg));
}

TEST_CASE("oscillation-with-density construction stays within its budget") {
    Rig rig;
    AcTarget t;
    t.cells = 32;
    t.lambda_density = [](double) { return 0.3; };
    t.amplitude = [](double) { return 1.0; };
    t.direction = {1.0};
    t.lip_bound = 0.0; // constants: the fiber drift bound is tight at zero
    InhomogResult r = inhomogenize_ac(t, 0.125, 0.0, rig.spec, rig.reg);
    CHECK(r.budget.total > 0.0);
    CHECK(r.budget.total <= 0.2);
    CHECK(r.max_discrepancy <= r.budget.total);
    CHECK(r.target.conc.mass() == doctest::Approx(0.3).epsilon(1e-12));
    for (const auto& row : r.checks) CHECK(row.pass);
    // every fiber is the requested two-point mixture
    for (int c = 0; c < t.cells; ++c) {
        REQUIRE(r.target.osc[c].has_value());
        CHECK(r.target.osc[c]->size() == 2);
        CHECK(r.target.osc[c]->mass() == doctest::Approx(1.0).epsilon(1e-15));
    }

    CHECK_THROWS(inhomogenize_ac(t, 1.0 / 64.0, 0.0, rig.spec, rig.reg)); // cube inside a cell
    AcTarget heavy = t;
    heavy.lambda_density = [](double) { return 20.0; };
    CHECK_THROWS(inhomogenize_ac(heavy, 0.125, 0.0, rig.spec, rig.reg)); // spike outgrows its cell
}
