#pragma once

// Generalised Young measure triples (oscillation fibers, concentration
// measure on the closed domain, angle measures on the compactification
// boundary), estimation from sampled sequences, elementary embeddings of
// fields and of vector measures, pairings, decomposition, joining and
// rescaling comparisons, and a test-battery distance.

#include "ymlab/compactification.hpp"
#include "ymlab/measure.hpp"

#include <map>
#include <memory>

namespace ym {

// Uniform cell grid over a box; concentration may additionally sit on the
// topological boundary of the box (the closed grid).
struct GridDescriptor {
    int n = 1;
    Vec lo, hi;
    std::vector<int> cells;

    static GridDescriptor unit(int n, int cells_per_axis);

    int cell_count() const;
    int locate(std::span<const double> x) const; // -1 outside the closed box
    Vec center(int idx) const;
    double cell_volume() const;
    double spacing(int axis) const { return (hi[axis] - lo[axis]) / cells[axis]; }
    bool on_boundary(std::span<const double> x, double tol = 1e-12) const;
};

// Lebesgue measure on the grid: one atom per cell center.
DiscreteMeasure grid_measure(const GridDescriptor& g);

struct SampledSequence {
    GridDescriptor grid;
    DiscreteMeasure mu; // quadrature atoms (may be finer than the fiber grid)
    int zdim = 1;
    std::vector<double> jvalues;
    std::vector<std::vector<Vec>> fields; // [j][atom]

    void check() const;
};

struct YoungTriple {
    GridDescriptor grid;
    int zdim = 1;
    Vec cell_mass;                                   // mu mass per cell
    std::vector<std::optional<DiscreteMeasure>> osc; // per-cell probability fiber
    DiscreteMeasure conc;                            // lambda on the closed grid
    std::vector<DiscreteMeasure> angle;              // per conc atom, over atom ids
    std::shared_ptr<const CompactificationSpec> spec;
    std::shared_ptr<AtomRegistry> registry;

    double mu_mass() const { return stable_sum(cell_mass); }
    double conc_mass() const { return conc.mass(); }
    double boundary_conc_mass(double tol = 1e-12) const;
    int undefined_fibers() const;
};

struct EstimateParams {
    double R_cut = 1e3;     // couples to the spec's mag_min by default
    int bins_per_axis = 0;  // 0: 64 in d=1, 32 in d=2, 8 beyond
    bool parallel = true;
};

// Histogram estimator: per spatial cell, values below R_cut feed the
// oscillation fiber (binned in ball coordinates, atom at the bin's weighted
// mean raw value); values above contribute |v| * w to the concentration at
// the cell center and vote for their boundary atom. Votes average over the
// provided fields.
YoungTriple estimate(const SampledSequence& seq,
                     std::shared_ptr<const CompactificationSpec> spec,
                     std::shared_ptr<AtomRegistry> registry,
                     EstimateParams params = {});

// exact embedding of a single field: fiber delta_{v(x)}, no concentration
YoungTriple elementary(const SampledSequence& seq, size_t field_index,
                       std::shared_ptr<const CompactificationSpec> spec,
                       std::shared_ptr<AtomRegistry> registry);

// Embedding of a vector measure l against mu: density part becomes delta
// fibers, the singular part becomes concentration with angle at the polar
// direction. Specs strictly finer than the sphere cannot infer magnitudes
// from the polar alone, so they are refused unless explicit witness points
// (one diverging representative per singular atom) are supplied.
YoungTriple elementary_measure(const VectorDiscreteMeasure& l, const DiscreteMeasure& mu,
                               const GridDescriptor& grid,
                               std::shared_ptr<const CompactificationSpec> spec,
                               std::shared_ptr<AtomRegistry> registry,
                               const std::vector<Vec>* singular_witness = nullptr,
                               double witness_mag = 1e6);

struct PairOptions {
    // spatial weight eta(x); defaults to 1
    std::function<double(std::span<const double>)> eta;
    // explicit recession values per boundary atom id (overrides resolution)
    std::map<int, double> atom_recession;
};

// <<eta x f, nu>> = sum_c mass_c eta(x_c) <fiber_c, f(x_c,.)>
//                 + sum_s lambda_s eta(x_s) <angle_s, f^rec>
// The recession per atom resolves: explicit value, then recorded generator
// limit when f is a generator of the spec, then the integrand's own regular
// recession; anything else throws (the integrand does not extend
// continuously to this compactification).
double pair_integral(const YoungTriple& nu, const Integrand& f, PairOptions opt = {});

VectorDiscreteMeasure barycentre(const YoungTriple& nu);

struct EquiProfile {
    bool flag = false;
    std::vector<double> k_grid;
    std::vector<double> profile; // sup_j int_{|v_j|>k} |v_j| dmu
};
EquiProfile is_equiintegrable(const SampledSequence& seq, std::vector<double> k_grid = {},
                              double tol_ei = 0.05);

struct Decomposition {
    SampledSequence oscillation;   // v 1_{|v| <= k}
    SampledSequence concentration; // the remainder
    std::vector<double> k_j;
};
Decomposition decompose(const SampledSequence& seq, double k_cut);

struct JoinResult {
    SampledSequence sum;
    YoungTriple predicted;
};

// Joins a strongly convergent sequence (delta fibers) with an arbitrary one
// whose concentration is singular to it: predicted triple translates the
// second oscillation by the first limit, adds concentrations, glues angles.
JoinResult join(const SampledSequence& vseq, const SampledSequence& wseq,
                std::shared_ptr<const CompactificationSpec> spec,
                std::shared_ptr<AtomRegistry> registry, EstimateParams params = {},
                double tol_delta = 0.05);

struct RescaleReport {
    double fiber_tv_max = 0;     // pushforward-matched fiber discrepancy
    double conc_mass_diff = 0;   // | |lambda_1| - |lambda_2| |
    double conc_matched_tv = 0;  // atomwise matched concentration difference
    double angle_dir_diff = 0;   // sphere-projected mean direction gap
    int cells_compared = 0;
};

// Compares estimate(v_j wrt mu) against estimate(v_j/a wrt a mu): fibers
// should match after pushforward by z -> z/a(x), concentrations and
// sphere-projected angles should agree. The pushforward evaluates a at cell
// centers while the estimator sees a across the whole cell, so fibers are
// coarsened at the relative scale match_scale before matching; widen it by
// the relative sup oscillation of a within cells (e.g. sup |a/a_n - 1| for a
// staircase a_n).
RescaleReport rescale_compare(const SampledSequence& seq,
                              const std::function<double(std::span<const double>)>& a,
                              std::shared_ptr<const CompactificationSpec> spec,
                              EstimateParams params = {}, double match_scale = 2e-2);

// total variation distance between discrete measures with tolerance-matched
// atoms (relative match tolerance on the points)
double tv_distance(const DiscreteMeasure& m1, const DiscreteMeasure& m2,
                   double match_tol = 1e-9);

struct BatteryMember {
    std::string name;
    std::function<double(std::span<const double>)> eta; // 1-bounded-Lipschitz
    Integrand psi;                                      // scaled: |T psi|_Lip <= 1
    double psi_scale = 1.0;
};

// default battery: constants, scaled abs/area/homdir integrands, localized
// spatial hats of width 1/4 and amplitude 1/5
std::vector<BatteryMember> default_battery(int spatial_dim, int zdim);

double ym_distance(const YoungTriple& a, const YoungTriple& b,
                   const std::vector<BatteryMember>& battery);

} // namespace ym
