#include "ymlab/convexity.hpp"

#include <algorithm>
#include <array>
#include <climits>
#include <cmath>
#include <limits>
#include <set>

namespace ym {

// ---------------------------------------------------------------- grid

size_t MatrixGrid::node_count() const {
    size_t m = static_cast<size_t>(n);
    return m * m * m * m;
}

size_t MatrixGrid::flat(int i0, int i1, int i2, int i3) const {
    return ((static_cast<size_t>(i0) * n + i1) * n + i2) * n + i3;
}

Vec MatrixGrid::node(size_t flat_idx) const {
    Vec x(4);
    double h = spacing();
    for (int c = 3; c >= 0; --c) {
        int i = static_cast<int>(flat_idx % n);
        flat_idx /= n;
        x[c] = origin[c] - H + i * h;
    }
    return x;
}

double MatrixGrid::center_value() const {
    require(n % 2 == 1, "grid needs an odd node count per axis");
    int c = n / 2;
    return values[flat(c, c, c, c)];
}

MatrixGrid MatrixGrid::sample(const Integrand& f, double H, int n, Vec origin) {
    require(n >= 3 && n % 2 == 1, "grid needs an odd node count >= 3");
    require(H > 0, "grid half-width must be positive");
    require(origin.size() == 4, "origin must be a flattened 2x2 matrix");
    require(f.zdim == 0 || f.zdim == 4, "integrand is not a 2x2 matrix function");
    MatrixGrid g;
    g.H = H;
    g.n = n;
    g.origin = std::move(origin);
    g.values.resize(g.node_count());
    for (size_t i = 0; i < g.values.size(); ++i) {
        Vec x = g.node(i);
        g.values[i] = f.eval({}, x);
        require(std::isfinite(g.values[i]), "integrand not finite on the grid");
    }
    return g;
}

namespace {

double interp_values(const Vec& vals, int n, const Vec& origin, double H, double h,
                     std::span<const double> F) {
    std::array<int, 4> base;
    std::array<double, 4> frac;
    for (int c = 0; c < 4; ++c) {
        double t = (F[c] - (origin[c] - H)) / h;
        double tol = 1e-9 * (1.0 + std::abs(t));
        require(t >= -tol && t <= (n - 1) + tol, "interpolation point outside the grid box");
        t = std::clamp(t, 0.0, static_cast<double>(n - 1));
        int i = std::min(static_cast<int>(std::floor(t)), n - 2);
        base[c] = i;
        frac[c] = t - i;
    }
    double acc = 0;
    for (int mask = 0; mask < 16; ++mask) {
        double w = 1;
        size_t idx = 0;
        for (int c = 0; c < 4; ++c) {
            int i = base[c];
            if (mask & (1 << c)) {
                w *= frac[c];
                ++i;
            } else {
                w *= 1.0 - frac[c];
            }
            idx = idx * n + i;
        }
        if (w != 0.0) acc += w * vals[idx];
    }
    return acc;
}

} // namespace

double interpolate(const MatrixGrid& g, const Vec& F) {
    require(F.size() == 4, "interpolation point must be a flattened 2x2 matrix");
    return interp_values(g.values, g.n, g.origin, g.H, g.spacing(), F);
}

// ---------------------------------------------------------------- dirs

std::vector<RankOnePair> rank_one_directions(int count, uint64_t seed) {
    require(count >= 1, "need at least one direction");
    const double s = 1.0 / std::sqrt(2.0);
    std::vector<Vec> canon = {{1, 0}, {0, 1}, {s, s}, {s, -s}};
    std::vector<RankOnePair> out;
    auto push = [&](Vec a, Vec b) {
        RankOnePair d;
        d.w = {a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]};
        d.a = std::move(a);
        d.b = std::move(b);
        out.push_back(std::move(d));
    };
    for (const auto& a : canon)
        for (const auto& b : canon) {
            if (static_cast<int>(out.size()) >= count) return out;
            push(a, b);
        }
    Rng rng(seed);
    while (static_cast<int>(out.size()) < count) push(rng.sphere(2), rng.sphere(2));
    return out;
}

// ---------------------------------------------------------------- envelope

namespace {

struct Side {
    std::vector<long long> flat_off;
    std::vector<std::array<int, 4>> coord_off;
    std::vector<double> wgt;
    std::array<int, 4> lo{}, hi{}; // node index range where every corner is in-grid
    std::array<double, 4> delta{}; // real displacement
};

Side make_side(const Vec& w4, double sgn, int step, double h, int n) {
    Side s;
    std::array<int, 4> base;
    std::array<double, 4> frac;
    for (int c = 0; c < 4; ++c) {
        double t = sgn * step * w4[c]; // in node units
        s.delta[c] = t * h;
        double fl = std::floor(t);
        base[c] = static_cast<int>(fl);
        frac[c] = t - fl;
        if (frac[c] < 1e-12) {
            frac[c] = 0.0;
        } else if (frac[c] > 1.0 - 1e-12) {
            frac[c] = 0.0;
            base[c] += 1;
        }
    }
    for (int mask = 0; mask < 16; ++mask) {
        double w = 1;
        std::array<int, 4> off;
        for (int c = 0; c < 4; ++c) {
            if (mask & (1 << c)) {
                w *= frac[c];
                off[c] = base[c] + 1;
            } else {
                w *= 1.0 - frac[c];
                off[c] = base[c];
            }
        }
        if (w <= 1e-14) continue;
        s.coord_off.push_back(off);
        s.wgt.push_back(w);
    }
    long long sn = n;
    for (int c = 0; c < 4; ++c) {
        int mn = INT_MAX, mx = INT_MIN;
        for (const auto& off : s.coord_off) {
            mn = std::min(mn, off[c]);
            mx = std::max(mx, off[c]);
        }
        s.lo[c] = std::max(0, -mn);
        s.hi[c] = n - std::max(0, mx);
    }
    for (const auto& off : s.coord_off)
        s.flat_off.push_back(((off[0] * sn + off[1]) * sn + off[2]) * sn + off[3]);
    return s;
}

inline bool in_safe_box(const Side& s, int i0, int i1, int i2, int i3) {
    return i0 >= s.lo[0] && i0 < s.hi[0] && i1 >= s.lo[1] && i1 < s.hi[1] && i2 >= s.lo[2] &&
           i2 < s.hi[2] && i3 >= s.lo[3] && i3 < s.hi[3];
}

} // namespace

EnvelopeResult lamination_envelope(const Integrand& f, const MatrixGrid& start,
                                   const std::vector<RankOnePair>& dirs,
                                   EnvelopeParams params) {
    require(!dirs.empty() && !params.steps.empty(), "envelope needs directions and steps");
    require(start.values.size() == start.node_count(), "start grid not sampled");
    const int n = start.n;
    const double h = start.spacing();

    std::vector<std::pair<Side, Side>> cand;
    for (const auto& d : dirs)
        for (int st : params.steps)
            cand.emplace_back(make_side(d.w, +1.0, st, h, n), make_side(d.w, -1.0, st, h, n));

    EnvelopeResult res;
    res.grid = start;
    Vec next(start.values.size());
    std::vector<Vec> axis_coord(4, Vec(n));
    for (int c = 0; c < 4; ++c)
        for (int i = 0; i < n; ++i) axis_coord[c][i] = start.origin[c] - start.H + i * h;

    long long clamp_wins = 0, decreases = 0;
    for (int iter = 1; iter <= params.max_iters; ++iter) {
        const Vec& cur = res.grid.values;
        double change = 0;
        long long sweep_clamp = 0, sweep_dec = 0;
#pragma omp parallel for collapse(2) schedule(static) reduction(max : change) \
    reduction(+ : sweep_clamp, sweep_dec) if (params.parallel)
        for (int i0 = 0; i0 < n; ++i0) {
            for (int i1 = 0; i1 < n; ++i1) {
                Vec q(4);
                for (int i2 = 0; i2 < n; ++i2) {
                    for (int i3 = 0; i3 < n; ++i3) {
                        size_t fl = ((static_cast<size_t>(i0) * n + i1) * n + i2) * n + i3;
                        double v = cur[fl];
                        double best = v;
                        bool best_clamped = false;
                        for (const auto& [ps, ms] : cand) {
                            bool clamped = false;
                            double vp, vm;
                            if (in_safe_box(ps, i0, i1, i2, i3)) {
                                double acc = 0;
                                for (size_t k = 0; k < ps.flat_off.size(); ++k)
                                    acc += ps.wgt[k] * cur[fl + ps.flat_off[k]];
                                vp = acc;
                            } else {
                                q[0] = axis_coord[0][i0] + ps.delta[0];
                                q[1] = axis_coord[1][i1] + ps.delta[1];
                                q[2] = axis_coord[2][i2] + ps.delta[2];
                                q[3] = axis_coord[3][i3] + ps.delta[3];
                                bool inside = true;
                                for (int c = 0; c < 4; ++c)
                                    if (std::abs(q[c] - start.origin[c]) >
                                        start.H + 1e-12 * (1.0 + start.H))
                                        inside = false;
                                if (inside) {
                                    vp = interp_values(cur, n, start.origin, start.H, h, q);
                                } else {
                                    vp = f.eval({}, q);
                                    clamped = true;
                                }
                            }
                            if (in_safe_box(ms, i0, i1, i2, i3)) {
                                double acc = 0;
                                for (size_t k = 0; k < ms.flat_off.size(); ++k)
                                    acc += ms.wgt[k] * cur[fl + ms.flat_off[k]];
                                vm = acc;
                            } else {
                                q[0] = axis_coord[0][i0] + ms.delta[0];
                                q[1] = axis_coord[1][i1] + ms.delta[1];
                                q[2] = axis_coord[2][i2] + ms.delta[2];
                                q[3] = axis_coord[3][i3] + ms.delta[3];
                                bool inside = true;
                                for (int c = 0; c < 4; ++c)
                                    if (std::abs(q[c] - start.origin[c]) >
                                        start.H + 1e-12 * (1.0 + start.H))
                                        inside = false;
                                if (inside) {
                                    vm = interp_values(cur, n, start.origin, start.H, h, q);
                                } else {
                                    vm = f.eval({}, q);
                                    clamped = true;
                                }
                            }
                            double c = 0.5 * (vp + vm);
                            if (c < best) {
                                best = c;
                                best_clamped = clamped;
                            }
                        }
                        next[fl] = best;
                        if (best < v) {
                            ++sweep_dec;
                            if (best_clamped) ++sweep_clamp;
                            change = std::max(change, v - best);
                        }
                    }
                }
            }
        }
        std::swap(res.grid.values, next);
        res.iters = iter;
        res.final_change = change;
        res.change_history.push_back(change);
        clamp_wins += sweep_clamp;
        decreases += sweep_dec;
        if (change <= params.tol_change) {
            res.converged = true;
            break;
        }
    }
    res.clamp_rate = decreases > 0 ? static_cast<double>(clamp_wins) / decreases : 0.0;
    res.clamp_warning = res.clamp_rate > params.clamp_warn_rate;
    return res;
}

double midpoint_violation(const MatrixGrid& g, const std::vector<RankOnePair>& dirs,
                          const std::vector<int>& steps) {
    const int n = g.n;
    const double h = g.spacing();
    const int stride = std::max(1, (n - 1) / 8);
    const double ts[3] = {0.25, 0.5, 0.75};
    double worst = 0;
    Vec zp(4), zm(4);
    for (int i0 = 0; i0 < n; i0 += stride)
        for (int i1 = 0; i1 < n; i1 += stride)
            for (int i2 = 0; i2 < n; i2 += stride)
                for (int i3 = 0; i3 < n; i3 += stride) {
                    size_t fl = g.flat(i0, i1, i2, i3);
                    Vec z = g.node(fl);
                    double uz = g.values[fl];
                    for (const auto& d : dirs)
                        for (int st : steps)
                            for (double t : ts) {
                                bool inside = true;
                                for (int c = 0; c < 4; ++c) {
                                    zp[c] = z[c] + (1.0 - t) * st * h * d.w[c];
                                    zm[c] = z[c] - t * st * h * d.w[c];
                                    if (std::abs(zp[c] - g.origin[c]) > g.H ||
                                        std::abs(zm[c] - g.origin[c]) > g.H)
                                        inside = false;
                                }
                                if (!inside) continue;
                                double rhs = t * interpolate(g, zp) + (1.0 - t) * interpolate(g, zm);
                                worst = std::max(worst, uz - rhs);
                            }
                }
    return worst;
}

// ---------------------------------------------------------------- index sets

IndexSet IndexSet::of(std::vector<int> members, int N_max) {
    require(N_max >= 2, "horizon too small");
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    require(!members.empty(), "index set must be nonempty below the horizon");
    require(members.front() >= 0 && members.back() < N_max, "index outside [0, N_max)");
    require(members.size() < static_cast<size_t>(N_max),
            "complement must be nonempty below the horizon");
    IndexSet s;
    s.members = std::move(members);
    s.N_max = N_max;
    return s;
}

bool IndexSet::contains(int j) const {
    return std::binary_search(members.begin(), members.end(), j);
}

std::vector<int> IndexSet::complement() const {
    std::vector<int> out;
    for (int j = 0; j < N_max; ++j)
        if (!contains(j)) out.push_back(j);
    return out;
}

std::vector<int> IndexSet::symmetric_difference(const IndexSet& other) const {
    std::vector<int> out;
    int hi = std::max(N_max, other.N_max);
    for (int j = 0; j < hi; ++j)
        if (contains(j) != other.contains(j)) out.push_back(j);
    return out;
}

namespace {

std::string glambda_id(const IndexSet& s) {
    std::string id = "glambda:";
    for (size_t i = 0; i < s.members.size(); ++i) {
        if (i) id += ',';
        id += std::to_string(s.members[i]);
    }
    return id;
}

} // namespace

SeparationResult separation(const IndexSet& L, const IndexSet& G, int j_lo, int j_hi,
                            EnvelopeParams params, int local_nodes) {
    require(0 <= j_lo && j_lo <= j_hi, "empty j range");
    require(j_hi <= 32, "3^j overflow guard: j must stay <= 32");
    auto dirs = rank_one_directions();
    SeparationResult res;
    for (int j : L.symmetric_difference(G)) {
        if (j < j_lo || j > j_hi) continue;
        res.evaluated_j.push_back(j);
        double pj = std::pow(3.0, j); // exact integer below 2^51
        // the set containing j vanishes at 3^j I, and its envelope is pinched
        // between 0 and that value, so only the other side needs a run
        const IndexSet& other = L.contains(j) ? G : L;
        Integrand g = catalog(glambda_id(other));
        MatrixGrid start = MatrixGrid::sample(g, pj / 2.0, local_nodes, {pj, 0, 0, pj});
        EnvelopeParams p = params;
        p.tol_change = params.tol_change * pj;
        EnvelopeResult env = lamination_envelope(g, start, dirs, p);
        double gap = env.grid.center_value();
        res.clamp_rate_max = std::max(res.clamp_rate_max, env.clamp_rate);
        if (gap / pj > res.value) {
            res.value = gap / pj;
            res.best_j = j;
            res.tgap_lower = gap / (1.0 + std::sqrt(2.0) * pj);
        }
    }
    return res;
}

IndexSet diagonal_incomparable(const std::vector<IndexSet>& family, int N_max, int scan_from) {
    require(N_max >= 4, "horizon too small");
    require(scan_from >= 0 && scan_from < N_max, "scan start outside the horizon");
    if (family.empty()) {
        std::vector<int> evens;
        for (int j = 0; j + 1 < N_max; j += 2) evens.push_back(j);
        return IndexSet::of(std::move(evens), N_max);
    }
    std::set<int> used;
    std::vector<int> picked;
    int fcount = static_cast<int>(family.size());
    int rounds_cap = std::max(1, (N_max - scan_from - 1) / (2 * fcount));
    for (int round = 0; round < rounds_cap; ++round) {
        std::vector<int> this_round;
        bool ok = true;
        for (const IndexSet& a : family) {
            for (int side = 0; side < 2 && ok; ++side) {
                int found = -1;
                for (int j = scan_from; j < N_max; ++j) {
                    if (used.count(j)) continue;
                    bool in = a.contains(j);
                    if ((side == 0 && in) || (side == 1 && !in)) {
                        found = j;
                        break;
                    }
                }
                if (found < 0) {
                    ok = false;
                    break;
                }
                used.insert(found);
                this_round.push_back(found);
            }
            if (!ok) break;
        }
        if (!ok) {
            for (int j : this_round) used.erase(j); // drop the incomplete round
            require(round > 0, "increase N_max: cannot interleave the family");
            break;
        }
        picked.insert(picked.end(), this_round.begin(), this_round.end());
    }
    return IndexSet::of(std::move(picked), N_max);
}

// ---------------------------------------------------------------- jensen

std::vector<JensenMember> default_jensen_battery() {
    std::vector<JensenMember> out;
    auto cvx = [&](const std::string& id) {
        out.push_back({id, catalog(id), "convex", 1e-9});
    };
    cvx("const:1");
    cvx("abs");
    cvx("area");
    cvx("dist:1");
    cvx("affine:0.25:0.5,-0.25,0.125,0.0625");
    // the k-gap integrands are convex along every rank-one segment, which is
    // the exact regime of the laminate inputs this battery certifies
    out.push_back({"muller_gk:8", catalog("muller_gk:8"), "rank-one-exact", 1e-9});
    out.push_back({"muller_gk:16", catalog("muller_gk:16"), "rank-one-exact", 1e-9});
    return out;
}

JensenMember envelope_member(std::string name, const MatrixGrid& env, Integrand recession_of,
                             double tol) {
    Integrand g;
    g.label = name;
    g.p = 1.0;
    g.growth_C = 0.0; // interpolant, valid only inside the sampled box
    g.zdim = 4;
    MatrixGrid grid = env;
    g.eval = [grid](std::span<const double>, std::span<const double> F) {
        return interp_values(grid.values, grid.n, grid.origin, grid.H, grid.spacing(), F);
    };
    g.recession = recession_of.recession;
    return {std::move(name), std::move(g), "numeric", tol};
}

JensenReport jensen_verify(const DiscreteMeasure& nu0, const DiscreteMeasure& nu_inf,
                           const Vec& z, const std::vector<JensenMember>& battery,
                           const AtomRegistry* registry) {
    require(z.size() == 4, "barycentre must be a flattened 2x2 matrix");
    require(nu_inf.size() == 0 || registry != nullptr,
            "concentration input needs an atom registry");
    JensenReport rep;
    rep.min_slack = std::numeric_limits<double>::infinity();
    rep.pass = true;
    for (const auto& m : battery) {
        StableSum lhs;
        for (size_t i = 0; i < nu0.size(); ++i)
            lhs.add(nu0.weight(i) * m.f.eval({}, nu0.point(i)));
        for (size_t i = 0; i < nu_inf.size(); ++i) {
            int id = static_cast<int>(std::llround(nu_inf.point(i)[0]));
            require(static_cast<bool>(m.f.recession),
                    "battery member '" + m.name + "' lacks a recession");
            lhs.add(nu_inf.weight(i) * m.f.recession({}, registry->atom(id).dir));
        }
        double slack = lhs.value() - m.f.eval({}, z);
        bool ok = slack >= -m.tol;
        rep.entries.push_back({m.name, m.tag, slack, m.tol, ok});
        rep.min_slack = std::min(rep.min_slack, slack);
        rep.pass = rep.pass && ok;
    }
    return rep;
}

} // namespace ym
