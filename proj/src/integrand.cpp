#include "ymlab/integrand.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

namespace ym {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    size_t pos = 0;
    while (true) {
        size_t nxt = s.find(sep, pos);
        out.push_back(s.substr(pos, nxt == std::string::npos ? nxt : nxt - pos));
        if (nxt == std::string::npos) break;
        pos = nxt + 1;
    }
    return out;
}

double parse_num(const std::string& s) {
    try {
        size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (...) {
        throw std::invalid_argument("bad number in catalog id: '" + s + "'");
    }
}

void growth_check(const Integrand& f) {
    Rng rng(0x9f0a5c3ull);
    const int dims_any[] = {1, 2, 4};
    int n_dims = f.zdim > 0 ? 1 : 3;
    const int samples = 10000;
    for (int s = 0; s < samples; ++s) {
        int d = f.zdim > 0 ? f.zdim : dims_any[s % n_dims];
        double mag = std::pow(10.0, rng.uniform(-1.0, 6.0));
        Vec z = rng.sphere(d);
        for (auto& c : z) c *= mag;
        double bound = f.growth_C * std::pow(1.0 + norm(z), f.p);
        double v = f.eval({}, z);
        if (!(std::abs(v) <= bound * (1.0 + 1e-9)))
            throw std::runtime_error("growth certificate violated for '" + f.label +
                                     "' at |z|=" + std::to_string(mag));
    }
}

double muller_gk_eval(double k, std::span<const double> F) {
    // F row-major [F11 F12 F21 F22]
    double a = std::abs(F[0] - F[3]);
    double b = std::abs(F[1] + F[2]);
    double c = std::max(2.0 * k - std::abs(F[0] + F[3]), 0.0);
    return a + b + c;
}

} // namespace

Integrand make_integrand(std::string label, double p, double growth_C, int zdim,
                         std::function<double(std::span<const double>, std::span<const double>)> eval,
                         std::function<double(std::span<const double>, std::span<const double>)> recession) {
    require(p >= 1.0, "growth exponent must be >= 1");
    require(growth_C >= 0, "growth constant must be nonnegative");
    Integrand f;
    f.label = std::move(label);
    f.p = p;
    f.growth_C = growth_C;
    f.zdim = zdim;
    f.eval = std::move(eval);
    f.recession = std::move(recession);
    growth_check(f);
    return f;
}

Integrand catalog(const std::string& id) {
    auto parts = split(id, ':');
    const std::string& kind = parts[0];

    if (kind == "abs") {
        return make_integrand("abs", 1.0, 1.0, 0,
                              [](auto, auto z) { return norm(z); },
                              [](auto, auto e) { return norm(e); });
    }
    if (kind == "area") {
        return make_integrand("area", 1.0, 1.0, 0,
                              [](auto, auto z) { return std::sqrt(1.0 + dot(z, z)); },
                              [](auto, auto e) { return norm(e); });
    }
    if (kind == "logsin") {
        // |z|(1 + sin log(1+|z|)): linear growth, no recession (the angular
        // limit along rays oscillates between 0 and 2 forever).
        return make_integrand("logsin", 1.0, 2.0, 0, [](auto, auto z) {
            double r = norm(z);
            return r * (1.0 + std::sin(std::log1p(r)));
        });
    }
    if (kind == "sq") {
        return make_integrand("sq", 2.0, 1.0, 0,
                              [](auto, auto z) { return dot(z, z); },
                              [](auto, auto e) { return dot(e, e); });
    }
    if (kind == "const") {
        require(parts.size() == 2, "const:<c>");
        double c = parse_num(parts[1]);
        return make_integrand(id, 1.0, std::abs(c), 0,
                              [c](auto, auto) { return c; },
                              [](auto, auto) { return 0.0; });
    }
    if (kind == "affine") {
        require(parts.size() == 3, "affine:<b>:<a1,a2,...>");
        double b = parse_num(parts[1]);
        Vec a;
        for (auto& t : split(parts[2], ',')) a.push_back(parse_num(t));
        double C = std::abs(b) + norm(a);
        return make_integrand(id, 1.0, std::max(C, 1e-300), static_cast<int>(a.size()),
                              [b, a](auto, auto z) { return b + dot(a, z); },
                              [a](auto, auto e) { return dot(a, e); });
    }
    if (kind == "homdir") {
        require(parts.size() == 2, "homdir:<c>");
        double c = parse_num(parts[1]);
        auto h = [c](std::span<const double>, std::span<const double> z) {
            return norm(z) + c * z[0];
        };
        return make_integrand(id, 1.0, 1.0 + std::abs(c), 0, h, h);
    }
    if (kind == "dist") {
        require(parts.size() == 2, "dist:<r>");
        double r = parse_num(parts[1]);
        require(r >= 0, "dist radius must be nonnegative");
        return make_integrand(id, 1.0, 1.0, 0,
                              [r](auto, auto z) { return std::max(norm(z) - r, 0.0); },
                              [](auto, auto e) { return norm(e); });
    }
    if (kind == "muller_gk") {
        require(parts.size() == 2, "muller_gk:<k>");
        double k = parse_num(parts[1]);
        require(k > 0, "muller_gk needs k > 0");
        return make_integrand(id, 1.0, 2.0 * k + 2.0, 4,
                              [k](auto, auto F) { return muller_gk_eval(k, F); },
                              [](auto, auto e) {
                                  return std::abs(e[0] - e[3]) + std::abs(e[1] + e[2]);
                              });
    }
    if (kind == "glambda") {
        require(parts.size() == 2, "glambda:<i1,i2,...>");
        std::vector<int> members;
        for (auto& t : split(parts[1], ',')) {
            int i = static_cast<int>(parse_num(t));
            require(i >= 0 && i <= 32, "glambda index out of the exact-power range [0,32]");
            members.push_back(i);
        }
        require(!members.empty(), "glambda needs at least one index");
        std::vector<double> targets;
        for (int i : members) targets.push_back(2.0 * std::pow(3.0, i));
        double C = *std::min_element(targets.begin(), targets.end()) + 4.0;
        return make_integrand(
            id, 1.0, C, 4,
            [targets](auto, auto F) {
                double a = std::abs(F[0] - F[3]);
                double b = std::abs(F[1] + F[2]);
                double tr = F[0] + F[3];
                double best = std::abs(tr - targets[0]);
                for (size_t i = 1; i < targets.size(); ++i)
                    best = std::min(best, std::abs(tr - targets[i]));
                return a + b + best;
            },
            // the target list is finite, so the trace term grows like |tr e|
            [](auto, auto e) {
                return std::abs(e[0] - e[3]) + std::abs(e[1] + e[2]) + std::abs(e[0] + e[3]);
            });
    }
    if (kind == "gkblock") {
        require(parts.size() == 4, "gkblock:<k>:<m>:<n>");
        double k = parse_num(parts[1]);
        int m = static_cast<int>(parse_num(parts[2]));
        int n = static_cast<int>(parse_num(parts[3]));
        require(k > 0 && m >= 2 && n >= 2, "gkblock needs k > 0 and m,n >= 2");
        // g_k composed with the projection onto the leading 2x2 block of a
        // row-major m x n matrix
        auto block = [n](std::span<const double> F) {
            return std::array<double, 4>{F[0], F[1], F[static_cast<size_t>(n)],
                                         F[static_cast<size_t>(n) + 1]};
        };
        return make_integrand(id, 1.0, 2.0 * k + 2.0, m * n,
                              [k, block](auto, auto F) {
                                  auto B = block(F);
                                  return muller_gk_eval(k, B);
                              },
                              [block](auto, auto e) {
                                  auto B = block(e);
                                  return std::abs(B[0] - B[3]) + std::abs(B[1] + B[2]);
                              });
    }
    throw std::invalid_argument("unknown integrand id: '" + id + "'");
}

Vec hat(const Vec& z) {
    double r = norm(z);
    return scaled(z, 1.0 / (1.0 + r));
}

Vec unhat(const Vec& zh) {
    double r = norm(zh);
    if (r >= 1.0) throw std::domain_error("unhat: |zh| >= 1");
    return scaled(zh, 1.0 / (1.0 - r));
}

BallFunction to_ball(const Integrand& f) {
    BallFunction g;
    g.p = f.p;
    g.zdim = f.zdim;
    double p = f.p;
    auto eval = f.eval;
    g.eval = [p, eval](std::span<const double> x, std::span<const double> zh) {
        double r = norm(zh);
        if (r >= 1.0) throw std::domain_error("ball transform evaluated at |zh| >= 1");
        double s = 1.0 - r;
        Vec z(zh.size());
        for (size_t i = 0; i < zh.size(); ++i) z[i] = zh[i] / s;
        return std::pow(s, p) * eval(x, z);
    };
    return g;
}

Integrand from_ball(const BallFunction& g, double growth_C) {
    double C = growth_C;
    if (C < 0) {
        // certify growth from a sampled sup of |g| over the ball
        Rng rng(0x51aab2ull);
        double sup = 0;
        int d = g.zdim > 0 ? g.zdim : 2;
        for (int i = 0; i < 4000; ++i) {
            Vec zh = rng.ball(d);
            sup = std::max(sup, std::abs(g.eval({}, zh)));
        }
        C = sup * (1.0 + 1e-6) + 1e-12;
    }
    double p = g.p;
    auto eval = g.eval;
    Integrand f;
    f.label = "from_ball";
    f.p = p;
    f.growth_C = C;
    f.zdim = g.zdim;
    f.eval = [p, eval](std::span<const double> x, std::span<const double> z) {
        double t = norm(z);
        double s = 1.0 + t;
        Vec zh(z.size());
        for (size_t i = 0; i < z.size(); ++i) zh[i] = z[i] / s;
        return std::pow(s, p) * eval(x, zh);
    };
    return f;
}

double gp_norm_sampled(const Integrand& f, const std::vector<Vec>& zs) {
    BallFunction g = to_ball(f);
    double sup = 0;
    for (const auto& z : zs) sup = std::max(sup, std::abs(g.eval({}, hat(z))));
    return sup;
}

double ball_sup_sampled(const BallFunction& g, const std::vector<Vec>& zhs) {
    double sup = 0;
    for (const auto& zh : zhs) sup = std::max(sup, std::abs(g.eval({}, zh)));
    return sup;
}

std::vector<double> default_magnitudes() {
    std::vector<double> mags;
    for (int dec = 1; dec < 6; ++dec)
        for (int k = 0; k < 8; ++k)
            mags.push_back(std::pow(10.0, dec + k / 8.0));
    mags.push_back(1e6);
    return mags;
}

std::vector<Vec> default_directions(int zdim, int extra, uint64_t seed) {
    std::vector<Vec> dirs;
    for (int i = 0; i < zdim; ++i) {
        Vec e(zdim, 0.0);
        e[i] = 1.0;
        dirs.push_back(e);
        e[i] = -1.0;
        dirs.push_back(e);
    }
    Rng rng(seed);
    for (int i = 0; i < extra; ++i) dirs.push_back(rng.sphere(zdim));
    return dirs;
}

RecessionProfile recession_profile(const Integrand& f, const std::vector<Vec>& dirs,
                                   const std::vector<double>& magnitudes,
                                   double tol_rec) {
    require(!dirs.empty(), "recession profile needs directions");
    require(magnitudes.size() >= 2, "recession profile needs magnitudes");
    std::vector<double> mags(magnitudes);
    std::sort(mags.begin(), mags.end());
    require(mags.front() > 0, "magnitudes must be positive");
    require(mags.back() / mags.front() >= 1e4 * (1.0 - 1e-12),
            "magnitudes must span at least four decades");

    double win2 = mags.back() / 100.0;  // last two decades: regularity window
    double win1 = mags.back() / 10.0;   // last decade: f_inf estimate window

    RecessionProfile out;
    out.regular = true;
    out.limsup_est = -1e300;
    out.liminf_est = 1e300;
    for (const auto& d : dirs) {
        Vec e = normalized(d);
        DirectionProfile dp;
        dp.dir = e;
        dp.limsup_est = -1e300;
        dp.liminf_est = 1e300;
        StableSum tail;
        int tail_n = 0;
        for (double t : mags) {
            Vec z = scaled(e, t);
            double fv = f.eval({}, z);
            double growth = f.growth_C * std::pow(1.0 + t, f.p);
            if (!(std::abs(fv) <= growth * (1.0 + 1e-9)))
                throw std::runtime_error("growth violation along recession ray of '" +
                                         f.label + "'");
            double tf = fv / std::pow(1.0 + t, f.p);
            if (t >= win2) {
                dp.limsup_est = std::max(dp.limsup_est, tf);
                dp.liminf_est = std::min(dp.liminf_est, tf);
            }
            if (t >= win1) {
                tail.add(fv / std::pow(t, f.p));
                ++tail_n;
            }
        }
        dp.f_inf = tail.value() / tail_n;
        double scale = std::max({1.0, std::abs(dp.limsup_est), std::abs(dp.liminf_est)});
        dp.regular = (dp.limsup_est - dp.liminf_est) < tol_rec * scale;
        out.regular = out.regular && dp.regular;
        out.limsup_est = std::max(out.limsup_est, dp.limsup_est);
        out.liminf_est = std::min(out.liminf_est, dp.liminf_est);
        out.directions.push_back(std::move(dp));
    }
    return out;
}

Perspective::Perspective(const Integrand& f, double big_R) : f_(f), big_R_(big_R) {
    int d = f.zdim > 0 ? f.zdim : 2;
    auto prof = recession_profile(f, default_directions(d), default_magnitudes());
    if (!prof.regular)
        throw std::runtime_error("no recession: '" + f.label +
                                 "' has no regular recession profile");
}

double Perspective::operator()(std::span<const double> x, std::span<const double> z,
                               double t) const {
    if (t != 0.0) {
        Vec w(z.size());
        for (size_t i = 0; i < z.size(); ++i) w[i] = z[i] / t;
        return std::pow(std::abs(t), f_.p) * f_.eval(x, w);
    }
    double r = norm(z);
    if (r == 0.0) return 0.0;
    Vec w(z.size());
    for (size_t i = 0; i < z.size(); ++i) w[i] = z[i] / r * big_R_;
    return f_.eval(x, w) / std::pow(big_R_, f_.p) * std::pow(r, f_.p);
}

LipNorms lipschitz_norms(const Integrand& f,
                         const std::vector<std::pair<Vec, Vec>>& sample_pairs,
                         const BallMetric& metric) {
    require(!sample_pairs.empty(), "lipschitz_norms needs sample pairs");
    BallFunction g = to_ball(f);
    LipNorms out;
    for (const auto& [z, w] : sample_pairs) {
        Vec zh = hat(z), wh = hat(w);
        double gz = g.eval({}, zh), gw = g.eval({}, wh);
        out.sup_T = std::max({out.sup_T, std::abs(gz), std::abs(gw)});
        double db = metric ? metric(zh, wh) : dist(zh, wh);
        if (db > 1e-15)
            out.lip_T = std::max(out.lip_T, std::abs(gz - gw) / db);
        double dr = dist(z, w);
        if (dr > 1e-15)
            out.lip_raw = std::max(out.lip_raw,
                                   std::abs(f.eval({}, z) - f.eval({}, w)) / dr);
    }
    out.weighted_lip = out.sup_T + out.lip_raw;
    return out;
}

} // namespace ym
