#pragma once

// Metrizable compactifications of the target space, described by a finite
// list of generator integrands. Points map into the open unit ball; the
// metric
//   d(z, w) = |z - w| + sum_i 2^{-i} |T f_i(z) - T f_i(w)|
// (ball coordinates) separates boundary directions and, beyond the sphere,
// the recorded generator limits. Boundary atoms are equivalence classes of
// diverging sequences, represented by finite witness lists.

#include "ymlab/integrand.hpp"

#include <limits>

namespace ym {

struct SpecParams {
    double p = 1.0;
    double mag_min = 1e3;
    double tol_equiv = 5e-2;
    int witness_cap = 64;
};

class CompactificationSpec {
public:
    // raw generators are rescaled so that the sampled sup and Lipschitz
    // constant of T f_i on the ball stay <= 1 (seeded 10^4-point sample)
    CompactificationSpec(int zdim, const std::vector<Integrand>& raw_generators,
                         SpecParams params = {});

    static CompactificationSpec sphere(int zdim, SpecParams params = {});

    int zdim() const { return zdim_; }
    double p() const { return params_.p; }
    double mag_min() const { return params_.mag_min; }
    double tol_equiv() const { return params_.tol_equiv; }
    int witness_cap() const { return params_.witness_cap; }
    const SpecParams& params() const { return params_; }

    size_t generator_count() const { return gens_.size(); }
    const Integrand& generator(size_t i) const { return gens_[i]; }
    const BallFunction& generator_ball(size_t i) const { return gen_balls_[i]; }
    double generator_scale(size_t i) const { return scales_[i]; }
    const std::string& generator_label(size_t i) const { return raw_labels_[i]; }
    int generator_index(const std::string& raw_label) const;
    // metric weight 2^{-i} with generators indexed from 1
    double weight(size_t i) const { return std::pow(2.0, -static_cast<double>(i) - 1.0); }

    // sampled normalization certificates, recorded at construction
    double sampled_sup(size_t i) const { return sampled_sup_[i]; }
    double sampled_lip(size_t i) const { return sampled_lip_[i]; }

    // metric on ball coordinates; radii are clamped just inside the open
    // ball before generator evaluation
    double metric(std::span<const double> zh, std::span<const double> wh) const;

    // generator values T f_i at a ball point (normalized scale)
    std::vector<double> signature(std::span<const double> zh) const;

private:
    int zdim_;
    SpecParams params_;
    std::vector<Integrand> gens_;        // normalized
    std::vector<BallFunction> gen_balls_;
    std::vector<double> scales_;
    std::vector<std::string> raw_labels_;
    std::vector<double> sampled_sup_, sampled_lip_;

    friend CompactificationSpec stack(const CompactificationSpec&,
                                      const std::vector<Integrand>&);
};

// stacked spec: old generators keep their indices/weights, extras appended.
// Every pair separated by the old metric stays separated (the new metric
// dominates the old one term by term).
CompactificationSpec stack(const CompactificationSpec& spec,
                           const std::vector<Integrand>& extra);

struct WitnessPoint {
    Vec z;       // raw coordinates
    double mag;  // |z|
    Vec dir;     // z/|z|
    std::vector<double> gen_values; // T f_i at hat(z)
};

struct BoundaryAtom {
    int id = -1;
    Vec dir;                        // tail-averaged unit direction
    std::vector<double> gen_limits; // tail-averaged generator values
    std::vector<WitnessPoint> witness; // sorted by magnitude, capped
};

struct AtomValidation {
    bool ok = true;
    std::string why;
};
AtomValidation validate_atom(const BoundaryAtom& atom, const CompactificationSpec& spec);

Vec sphere_project(const BoundaryAtom& atom);

// Atom registry: single writer, deterministic given insertion order.
class AtomRegistry {
public:
    // classifies a diverging sample point (|z| >= mag_min required), adding a
    // new atom when no existing one matches within tol_equiv
    int classify(const Vec& z_raw, const CompactificationSpec& spec);
    // read-only nearest match, -1 when none is within tol_equiv
    int match(const Vec& dir, const std::vector<double>& gen_values,
              const CompactificationSpec& spec) const;

    size_t size() const { return atoms_.size(); }
    const BoundaryAtom& atom(size_t id) const { return atoms_.at(id); }
    const std::vector<BoundaryAtom>& atoms() const { return atoms_; }

private:
    std::vector<BoundaryAtom> atoms_;
    void refresh(BoundaryAtom& a) const;
};

struct UpperRecessionParams {
    int trials_per_witness = 32;
    double mag_lo = -1;  // default: spec.mag_min
    double mag_hi = 1e12;
    double dir_jitter = 0.05;
    uint64_t seed = 7771;
};

struct UpperRecessionResult {
    double value = 0;          // heuristic upper recession estimate
    double witness_limsup = 0; // plain tail max of T f along the witness
    int accepted = 0;          // perturbations that stayed in the class
};

// Heuristic estimator of the upper recession f^sharp on an atom's class:
// local search over magnitude/direction perturbations of the witness points,
// constrained to keep the weighted signature within tol_equiv of the atom.
// A lower bound reporter for the true (uncomputable) sup; always >= the
// witness tail limsup.
UpperRecessionResult upper_recession(const Integrand& f, const BoundaryAtom& atom,
                                     const CompactificationSpec& spec,
                                     UpperRecessionParams params = {});

} // namespace ym
