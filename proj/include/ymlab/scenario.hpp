#pragma once

// End-to-end scenario gallery: closed-form sampled sequences (oscillation,
// concentration, mixed, constant), the non-embedding counterexample, strict
// and area-strict convergence checks, a characterisation-inequality verifier
// for piecewise affine fields, and the two inhomogenization constructions
// with explicit error budgets.

#include "ymlab/convexity.hpp"
#include "ymlab/transport.hpp"
#include "ymlab/young.hpp"

namespace ym {

struct CheckRow {
    std::string name;
    double measured = 0;
    double tolerance = 0;
    bool pass = false;
};

struct ScenarioConfig {
    std::string id;
    int resolution = 128;  // spatial cells, power of two
    int quad_res = 1024;   // quadrature atoms per unit length, power of two
    std::vector<double> jvalues; // scenario default when empty
    std::string spec_id = "sphere";
    double tol = 5e-2;
    uint64_t seed = 20260815; // reruns with equal config are bit-identical
    std::string out_dir;      // empty: no files written
};

struct ScenarioReport {
    std::string id;
    bool pass = true;
    std::vector<CheckRow> checks;
    std::vector<std::string> notes;
    // convergence table, first row is the header
    std::vector<std::string> table_header;
    std::vector<Vec> table_rows;

    void add(const std::string& name, double measured, double tolerance, bool ok);
    // pass iff |measured| <= tolerance
    void add_abs(const std::string& name, double measured, double tolerance);
    // pass iff measured is within rel of target
    void add_near(const std::string& name, double measured, double target, double rel);
};

// named compactifications: "sphere", "logsin" (sphere + the oscillating
// generator), "sphere-fine" (tight tol_equiv)
std::shared_ptr<const CompactificationSpec> make_named_spec(const std::string& name, int zdim,
                                                            SpecParams params = {});

// ------------------------------------------------------------ sequences

// uniform Lebesgue quadrature on (0,1): quad_res atoms, cells spatial cells
GridDescriptor line_grid(int cells);

// v_j(x) = sign(sin(2 pi j x)), exact on dyadic quadrature
SampledSequence seq_oscillation(int cells, int quad_res, std::vector<double> jvalues);

// two-scale variant v(x) = sign(sin(2 pi j x)) + s2 * sign(sin(2 pi j^2 x))
SampledSequence seq_two_scale(int cells, int quad_res, double j, double s2);

// v_j = j on (0, 1/j), else 0; quadrature atoms aligned to every breakpoint
SampledSequence seq_concentration(int cells, std::vector<double> jvalues);

// oscillation plus a concentrating spike, for decompose/join runs
SampledSequence seq_mixed(int cells, int quad_res, std::vector<double> jvalues);

SampledSequence seq_constant(int cells, int quad_res, double value, int count);

// Interleaved bump ladder at x0 = 1/2: field 2i has plateau magnitude
// e^{pi/2 + 2 pi i} - 1 (integrals of the oscillating integrand near 2),
// field 2i+1 uses e^{3 pi/2 + 2 pi i} - 1 (near 0). Plateau widths shrink
// like 1/M; quadrature atoms are nested rings whose weights are carried
// exactly, so every field integrates exactly.
SampledSequence seq_counterexample(int cells, int i_max);

// keep the fields at the given indices
SampledSequence subsequence(const SampledSequence& seq, const std::vector<size_t>& keep);

// exact quadrature of f along field j: sum_k f(v_j(x_k)) w_k
double field_integral(const SampledSequence& seq, size_t j, const Integrand& f);

// lower staircase a_n = floor(n a) / n, a rational-valued approximation
double staircase(const std::function<double(std::span<const double>)>& a, int n, const Vec& x);

// ------------------------------------------------------------ scenarios

ScenarioReport scenario_oscillation(const ScenarioConfig& cfg);
ScenarioReport scenario_concentration(const ScenarioConfig& cfg);
ScenarioReport scenario_mixed(const ScenarioConfig& cfg);
ScenarioReport scenario_constant(const ScenarioConfig& cfg);
ScenarioReport scenario_counterexample(const ScenarioConfig& cfg);
ScenarioReport scenario_area_strict(const ScenarioConfig& cfg);
ScenarioReport scenario_reshetnyak(const ScenarioConfig& cfg);
ScenarioReport scenario_characterisation(const ScenarioConfig& cfg);
ScenarioReport scenario_inhomog_singular(const ScenarioConfig& cfg);
ScenarioReport scenario_inhomog_ac(const ScenarioConfig& cfg);

std::vector<std::string> scenario_ids();
ScenarioReport run_scenario(const ScenarioConfig& cfg); // dispatch on cfg.id

// ------------------------------------------------------------ characterisation

// u piecewise affine on the grid: one slope per cell, plus jump atoms; Du
// and its singular part are exact.
struct PiecewiseAffineField {
    GridDescriptor grid;
    int zdim = 1;
    std::vector<Vec> slope; // per cell
    struct Jump {
        double x;
        Vec v;
    };
    std::vector<Jump> jumps;
};

struct CharacterisationReport {
    bool finite = true;              // <<1 (x) |.|, nu>> finite
    double min_cell_slack = 0;       // f(grad u) <= <nu_x,f> + <nu_x^inf,f#> dlam/dx
    double min_singular_slack = 0;   // f^inf(polar)|D^s u| <= <nu^inf,f#> lam^s
    double barycentre_gap = 0;       // TV gap between Du and the triple barycentre
    std::vector<CheckRow> per_integrand;
    bool pass = false;
};

// battery members must be convex with a regular recession (then f# = f^inf)
CharacterisationReport verify_characterisation(const YoungTriple& nu,
                                               const PiecewiseAffineField& u,
                                               const std::vector<Integrand>& battery,
                                               double tol = 1e-9);

// ------------------------------------------------------------ inhomogenization

struct ErrorBudget {
    // E1 restriction, E2 boundary margin, E3 spatial transport, E4 recession
    // gap at the spike magnitude, E5 quadrature/mass leakage, E6 dropped
    // cubes, E7 mean-field flattening
    Vec terms = Vec(7, 0.0);
    double total = 0;
    std::map<std::string, double> params;

    void settle(); // total = sum of terms
};

// one (eta, Phi) test pair; Phi must carry a regular recession
struct TestPair {
    std::string name;
    std::function<double(std::span<const double>)> eta; // |eta|_Lip <= 1
    Integrand phi;
};

std::vector<TestPair> default_test_pairs(int zdim);

struct InhomogResult {
    DiscreteMeasure mu;      // quadrature atoms of the constructed field
    std::vector<Vec> field;  // per-atom values
    YoungTriple target;      // the triple the construction realizes
    ErrorBudget budget;      // worst-case over the test battery
    double max_discrepancy = 0;
    std::vector<CheckRow> checks; // |pairing difference| <= budget.total each
};

// lambda^s = mass * delta_{point}, angle delta at direction; dyadic cubes of
// generation a+b inside the mollification window 2^-a around the point; per
// cube a spike of magnitude S' + r_Q over the exact fraction that carries
// r_Q, base value exactly 0.
struct SingularTarget {
    int cells = 128;
    double point = 0.5;
    double mass = 1.0;
    Vec direction; // unit, sets zdim
};
InhomogResult inhomogenize_singular(const SingularTarget& t, int a, int b,
                                    std::shared_ptr<const CompactificationSpec> spec,
                                    std::shared_ptr<AtomRegistry> registry,
                                    double spike = 1e6);

// lambda = lambda_density dx, fibers (w delta_{+g} + (1-w) delta_{-g}) at
// amplitude g(x), angle delta at direction; cubes of side t, spike magnitude
// 1/t^2, per-cube stripes in fiber proportions.
struct AcTarget {
    int cells = 128;
    std::function<double(double)> lambda_density;
    std::function<double(double)> amplitude;
    double plus_weight = 0.5;
    Vec direction;
    double lip_bound = 1.0; // Lipschitz bound for amplitude and density
};
InhomogResult inhomogenize_ac(const AcTarget& t, double tside, double select_s,
                              std::shared_ptr<const CompactificationSpec> spec,
                              std::shared_ptr<AtomRegistry> registry);

} // namespace ym
