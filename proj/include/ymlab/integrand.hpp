#pragma once

// Integrands with p-growth certificates, the ball transform
//   (T f)(x, zh) = (1-|zh|)^p f(x, zh/(1-|zh|)),  zh = z/(1+|z|),
// its inverse, recession profiling along rays, the perspective function,
// and sampled weighted-Lipschitz norms. The transform is an isometry between
// the p-growth class and bounded continuous functions on the open unit ball,
// which is why every norm here is computed through T.

#include "ymlab/common.hpp"

#include <functional>
#include <optional>

namespace ym {

struct Integrand {
    std::string label;
    double p = 1.0;
    double growth_C = 1.0;
    int zdim = 0; // 0 = any dimension
    std::function<double(std::span<const double> x, std::span<const double> z)> eval;
    // exact recession f^inf(x, e) for unit e when the integrand is known
    // regular; empty otherwise
    std::function<double(std::span<const double> x, std::span<const double> e)> recession;

    double operator()(std::span<const double> x, std::span<const double> z) const {
        return eval(x, z);
    }
    double operator()(std::span<const double> z) const { return eval({}, z); }
};

// Verifies |f| <= growth_C (1+|z|)^p on a seeded sample; throws on violation.
Integrand make_integrand(std::string label, double p, double growth_C, int zdim,
                         std::function<double(std::span<const double>, std::span<const double>)> eval,
                         std::function<double(std::span<const double>, std::span<const double>)> recession = {});

// String-addressable integrand catalog:
//   abs | area | logsin | sq | const:<c> | affine:<b>:<a1,a2,...> |
//   homdir:<c> | dist:<r> | muller_gk:<k> | glambda:<i1,i2,...> |
//   gkblock:<k>:<m>:<n>
Integrand catalog(const std::string& id);

Vec hat(const Vec& z);   // z / (1+|z|)
Vec unhat(const Vec& zh); // zh / (1-|zh|), domain error if |zh| >= 1

struct BallFunction {
    double p = 1.0;
    int zdim = 0;
    std::function<double(std::span<const double> x, std::span<const double> zh)> eval;
    double operator()(std::span<const double> x, std::span<const double> zh) const {
        return eval(x, zh);
    }
    double operator()(std::span<const double> zh) const { return eval({}, zh); }
};

BallFunction to_ball(const Integrand& f);
// growth_C < 0 means: certify from a sampled sup of |g|
Integrand from_ball(const BallFunction& g, double growth_C = -1.0);

// sup |T f| over the mapped sample: the sampled p-growth norm. Computed
// through the transform so that it agrees bit for bit with the ball-side sup
// over the same mapped points.
double gp_norm_sampled(const Integrand& f, const std::vector<Vec>& zs);
double ball_sup_sampled(const BallFunction& g, const std::vector<Vec>& zhs);

struct DirectionProfile {
    Vec dir;
    double limsup_est = 0;
    double liminf_est = 0;
    double f_inf = 0; // tail estimate of f(te)/t^p, exact on homogeneous f
    bool regular = false;
};

struct RecessionProfile {
    bool regular = false;
    double limsup_est = 0;
    double liminf_est = 0;
    std::vector<DirectionProfile> directions;
};

// evaluates T f along zh = t e/(1+t); a direction is regular when the
// oscillation of T f over the last two decades of magnitudes stays below
// tol_rec (relative). Magnitudes must span at least four decades.
RecessionProfile recession_profile(const Integrand& f, const std::vector<Vec>& dirs,
                                   const std::vector<double>& magnitudes,
                                   double tol_rec = 1e-3);

std::vector<double> default_magnitudes(); // 10^1..10^6, 8 per decade
std::vector<Vec> default_directions(int zdim, int extra = 8, uint64_t seed = 2026);

// f~(x, z, t) = |t|^p f(x, z/t) for t != 0, radial recession estimate at t=0.
// Construction requires a regular recession profile.
class Perspective {
public:
    explicit Perspective(const Integrand& f, double big_R = 1e8);
    double operator()(std::span<const double> x, std::span<const double> z, double t) const;
    const Integrand& integrand() const { return f_; }

private:
    Integrand f_;
    double big_R_;
};

struct LipNorms {
    double sup_T = 0;       // sampled sup |T f|
    double lip_T = 0;       // sampled Lipschitz constant of T f in ball coords
    double lip_raw = 0;     // sampled Lipschitz constant of f itself
    double weighted_lip = 0; // sup_T + lip_raw
};

using BallMetric = std::function<double(std::span<const double>, std::span<const double>)>;

LipNorms lipschitz_norms(const Integrand& f,
                         const std::vector<std::pair<Vec, Vec>>& sample_pairs,
                         const BallMetric& metric = {});

} // namespace ym
