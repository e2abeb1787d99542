#pragma once

// Bounded-Lipschitz (Kantorovich-type) distance between discrete measures on
// a finite metric space, solved exactly as a linear program via its min-cost
// flow dual.

#include "ymlab/compactification.hpp"
#include "ymlab/measure.hpp"

namespace ym {

struct FiniteMetricSpace {
    std::vector<Vec> points;
    std::vector<std::vector<double>> dist;

    size_t size() const { return points.size(); }
    // symmetry and zero diagonal exact, triangle inequality to tol
    void validate(double tol = 1e-9) const;
    // index of the point within tol of p, or -1
    int locate(const Vec& p, double tol = 1e-9) const;

    static FiniteMetricSpace euclidean(const std::vector<Vec>& pts);
};

// pairwise metric_d matrix on ball-coordinate samples; a triangle violation
// beyond 1e-9 indicates a generator normalization bug and throws
FiniteMetricSpace metric_space_from_spec(const std::vector<Vec>& ball_points,
                                         const CompactificationSpec& spec);

struct TransportDiagnostics {
    int augmentations = 0;
    int scan_iters = 0;
    double best_L = 0;
    double duality_gap = 0;
};

// sup of integral of phi d(m1 - m2) over sup|phi| + Lip(phi) <= 1.
// Linear program in (phi, s, L): |phi_i| <= s, |phi_i - phi_j| <= L dist_ij,
// s + L <= 1. For fixed L the inner maximum is a min-cost flow (ground node
// absorbs mass at cost s = 1 - L); the value is concave in L, so an outer
// ternary scan locates the optimum. Two-point closed form: 2t/(2+t).
double lip_dual_distance(const DiscreteMeasure& m1, const DiscreteMeasure& m2,
                         const FiniteMetricSpace& space,
                         TransportDiagnostics* diag = nullptr);

} // namespace ym
