#pragma once

// Quasiconvexity numerics on 2x2 matrices (flattened row-major to R^4):
// rank-one lamination envelopes on a grid, the index-set separation
// experiment, the diagonal incomparability construction, and a Jensen
// inequality verifier for homogeneous measure inputs.

#include "ymlab/compactification.hpp"
#include "ymlab/integrand.hpp"
#include "ymlab/measure.hpp"

namespace ym {

// Uniform node grid on the box origin + [-H, H]^4; n odd keeps the origin a
// node.
struct MatrixGrid {
    double H = 4.0;
    int n = 33;
    Vec origin = {0, 0, 0, 0};
    Vec values; // n^4 node values, row-major over the 4 axes

    double spacing() const { return 2.0 * H / (n - 1); }
    size_t node_count() const;
    size_t flat(int i0, int i1, int i2, int i3) const;
    Vec node(size_t flat_idx) const;
    double center_value() const; // value at the origin node

    static MatrixGrid sample(const Integrand& f, double H, int n, Vec origin = {0, 0, 0, 0});
};

// multilinear interpolation; throws outside the closed box
double interpolate(const MatrixGrid& g, const Vec& F);

struct RankOnePair {
    Vec a, b; // unit vectors in R^2
    Vec w;    // a (x) b flattened, unit Frobenius norm
};

// the symmetric axis/diagonal design first, then seeded random unit pairs up
// to the requested count
std::vector<RankOnePair> rank_one_directions(int count = 40, uint64_t seed = 4242);

struct EnvelopeParams {
    std::vector<int> steps = {1, 2, 4}; // displacement sizes in node spacings
    int max_iters = 64;
    double tol_change = 1e-4; // absolute sweep-change threshold; scale by k
    bool parallel = true;
    double clamp_warn_rate = 0.20;
};

struct EnvelopeResult {
    MatrixGrid grid;
    int iters = 0;
    bool converged = false;
    double final_change = 0;
    double clamp_rate = 0; // fraction of node updates won by a clamped candidate
    bool clamp_warning = false;
    std::vector<double> change_history;
};

// Iterated rank-one midpoint relaxation: each sweep replaces every node value
// u(z) by min over directions w and steps h of (u(z+hw) + u(z-hw))/2, read by
// interpolation from the previous sweep (double buffered; the parallel and
// serial paths are bitwise identical). References outside the box fall back
// to f's own value, which keeps the iterate above the true rank-one convex
// envelope. Decreasing in every sweep, bounded below by 0 for f >= 0.
EnvelopeResult lamination_envelope(const Integrand& f, const MatrixGrid& start,
                                   const std::vector<RankOnePair>& dirs,
                                   EnvelopeParams params = {});

// largest violation of envelope(z) <= t envelope(z+(1-t)hw) + (1-t) envelope(z-thw)
// over interior sample nodes, t in {1/4, 1/2, 3/4}, the given dirs and steps
double midpoint_violation(const MatrixGrid& g, const std::vector<RankOnePair>& dirs,
                          const std::vector<int>& steps);

struct IndexSet {
    std::vector<int> members; // sorted, unique, within [0, N_max)
    int N_max = 33;

    static IndexSet of(std::vector<int> members, int N_max = 33);
    bool contains(int j) const;
    std::vector<int> complement() const;
    std::vector<int> symmetric_difference(const IndexSet& other) const;
};

struct SeparationResult {
    double value = 0; // max over evaluated j of |env_L - env_G|(3^j 1) / 3^j
    int best_j = -1;
    double tgap_lower = 0; // ball-side gap |diff| / (1 + sqrt(2) 3^j) at best_j
    std::vector<int> evaluated_j;
    double clamp_rate_max = 0;
};

// Localized envelope comparison of the two index-set integrands at the
// matrices 3^j I for j in the symmetric difference intersected with j_range.
// On the side whose set contains j the integrand vanishes at the center, so
// its envelope there is exactly 0 and only the other side needs a run.
SeparationResult separation(const IndexSet& L, const IndexSet& G, int j_lo, int j_hi,
                            EnvelopeParams params = {}, int local_nodes = 13);

// A set that is frequently inside and frequently outside every family
// member: round-robin over (member, complement) demands, scanning j upward
// from scan_from. Guarantees |S ∩ A| and |S ∩ A^c| >= floor(|S| / (2 F)).
IndexSet diagonal_incomparable(const std::vector<IndexSet>& family, int N_max = 33,
                               int scan_from = 2);

struct JensenMember {
    std::string name;
    Integrand f;
    std::string tag; // "convex" | "rank-one-exact" | "numeric"
    double tol = 1e-9;
};

// convex catalog members plus the raw k-gap integrands; every member carries
// a regular recession
std::vector<JensenMember> default_jensen_battery();

// envelope-backed member; interpolated values, tagged numeric
JensenMember envelope_member(std::string name, const MatrixGrid& env, Integrand recession_of,
                             double tol = 1e-5);

struct JensenEntry {
    std::string name;
    std::string tag;
    double slack = 0;
    double tol = 0;
    bool pass = false;
};

struct JensenReport {
    std::vector<JensenEntry> entries;
    double min_slack = 0;
    bool pass = false;
};

// slack_f = <nu0, f> + <nu_inf, f recession> - f(z); nu_inf lives over
// boundary atom ids and may be empty (then no registry is needed)
JensenReport jensen_verify(const DiscreteMeasure& nu0, const DiscreteMeasure& nu_inf,
                           const Vec& z, const std::vector<JensenMember>& battery,
                           const AtomRegistry* registry = nullptr);

} // namespace ym
