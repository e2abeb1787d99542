#pragma once

// Discrete measures with tolerance-based atom identity, disintegration of
// products into marginal + fibers, vector measures with Radon-Nikodym
// splitting against a reference weight, and the pairing-total-variation
// functional used to certify strict convergence.

#include "ymlab/common.hpp"

#include <functional>
#include <optional>
#include <unordered_map>

namespace ym {

// Nonnegative atomic measure on R^dim. Points closer than dedup_tol are the
// same atom; construction and insertion merge weights.
class DiscreteMeasure {
public:
    DiscreteMeasure() = default;
    DiscreteMeasure(int dim, double dedup_tol = 1e-12);

    static DiscreteMeasure create(int dim, const std::vector<Vec>& pts,
                                  const std::vector<double>& w,
                                  double dedup_tol = 1e-12);

    void add(const Vec& p, double w);
    // index of the atom matching p within dedup_tol, or -1
    int find(const Vec& p) const;

    int dim() const { return dim_; }
    double dedup_tol() const { return tol_; }
    size_t size() const { return points_.size(); }
    const std::vector<Vec>& points() const { return points_; }
    const std::vector<double>& weights() const { return weights_; }
    const Vec& point(size_t i) const { return points_[i]; }
    double weight(size_t i) const { return weights_[i]; }

    double mass() const;
    // drops atoms with weight below threshold; used after scaling passes
    void prune(double min_weight);

private:
    int dim_ = 0;
    double tol_ = 1e-12;
    std::vector<Vec> points_;
    std::vector<double> weights_;
    std::unordered_map<uint64_t, std::vector<int>> buckets_;

    void insert_raw(const Vec& p, double w);
    friend class VectorDiscreteMeasure;
};

// Vector-valued atomic measure (a discrete R^vdim-valued measure on R^dim).
class VectorDiscreteMeasure {
public:
    VectorDiscreteMeasure() = default;
    VectorDiscreteMeasure(int dim, int vdim, double dedup_tol = 1e-12);

    static VectorDiscreteMeasure create(int dim, int vdim,
                                        const std::vector<Vec>& pts,
                                        const std::vector<Vec>& vw,
                                        double dedup_tol = 1e-12);

    void add(const Vec& p, const Vec& vw);
    int find(const Vec& p) const;

    int dim() const { return dim_; }
    int vdim() const { return vdim_; }
    double dedup_tol() const { return tol_; }
    size_t size() const { return points_.size(); }
    const std::vector<Vec>& points() const { return points_; }
    const std::vector<Vec>& vweights() const { return vweights_; }
    const Vec& point(size_t i) const { return points_[i]; }
    const Vec& vweight(size_t i) const { return vweights_[i]; }

    // sum of Euclidean norms of the atom weights
    double total_variation() const;

private:
    int dim_ = 0, vdim_ = 0;
    double tol_ = 1e-12;
    std::vector<Vec> points_;
    std::vector<Vec> vweights_;
    std::unordered_map<uint64_t, std::vector<int>> buckets_;
};

// Marginal over cells plus one probability fiber per marginal atom.
// A fiber may be absent (empty optional) when its cell got zero marginal
// mass; such fibers are undefined and excluded from every pairing.
struct ParametrizedMeasure {
    DiscreteMeasure marginal;
    std::vector<std::optional<DiscreteMeasure>> fiber;
    bool sub_probability = false;
};

// Measure on a product X x Z with an explicit split of coordinates.
struct ProductMeasure {
    int x_dim = 0;
    int z_dim = 0;
    DiscreteMeasure joint; // dim == x_dim + z_dim
};

ParametrizedMeasure disintegrate(const ProductMeasure& p);
ProductMeasure assemble(const ParametrizedMeasure& pm, int x_dim, int z_dim);

DiscreteMeasure pushforward(const DiscreteMeasure& m,
                            const std::function<Vec(const Vec&)>& map,
                            int out_dim);

DiscreteMeasure restrict_measure(const DiscreteMeasure& m,
                                 const std::function<bool(const Vec&)>& keep);

// density field is aligned with mu's atoms; reconstruction
//   sum_i density[i] * mu.weight(i) at mu.point(i)  +  singular
// reproduces l atom by atom.
struct RadonNikodymResult {
    std::vector<Vec> density;
    VectorDiscreteMeasure singular;
};

// eps_sing < 0 selects the default 1e-3 * median(mu cell weight).
RadonNikodymResult radon_nikodym(const VectorDiscreteMeasure& l,
                                 const DiscreteMeasure& mu,
                                 double eps_sing = -1.0);

double default_eps_sing(const DiscreteMeasure& mu);

struct AtomicSplit {
    DiscreteMeasure atoms;
    DiscreteMeasure diffuse;
};
AtomicSplit atomic_split(const DiscreteMeasure& m, double threshold);

// |(eta, mu)|(domain) = integral of sqrt(1 + |deta/dmu|^2) dmu + |eta^s|,
// the area-type total variation of the pair. Certifies strict convergence.
double tv_pair(const VectorDiscreteMeasure& eta, const DiscreteMeasure& mu,
               double eps_sing = -1.0);

} // namespace ym
