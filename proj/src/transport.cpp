#include "ymlab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace ym {

void FiniteMetricSpace::validate(double tol) const {
    size_t n = points.size();
    require(dist.size() == n, "distance matrix size mismatch");
    for (size_t i = 0; i < n; ++i) {
        require(dist[i].size() == n, "distance matrix not square");
        require(dist[i][i] == 0.0, "nonzero diagonal in distance matrix");
        for (size_t j = 0; j < n; ++j) {
            require(dist[i][j] == dist[j][i], "asymmetric distance matrix");
            require(dist[i][j] >= 0.0, "negative distance");
        }
    }
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j)
            for (size_t k = 0; k < n; ++k)
                if (dist[i][j] > dist[i][k] + dist[k][j] + tol)
                    throw std::invalid_argument("triangle inequality violated in metric space");
}

int FiniteMetricSpace::locate(const Vec& p, double tol) const {
    for (size_t i = 0; i < points.size(); ++i)
        if (ym::dist(points[i], p) <= tol) return static_cast<int>(i);
    return -1;
}

FiniteMetricSpace FiniteMetricSpace::euclidean(const std::vector<Vec>& pts) {
    FiniteMetricSpace s;
    s.points = pts;
    size_t n = pts.size();
    s.dist.assign(n, std::vector<double>(n, 0.0));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j)
            s.dist[i][j] = s.dist[j][i] = ym::dist(pts[i], pts[j]);
    return s;
}

FiniteMetricSpace metric_space_from_spec(const std::vector<Vec>& ball_points,
                                         const CompactificationSpec& spec) {
    FiniteMetricSpace s;
    s.points = ball_points;
    size_t n = ball_points.size();
    s.dist.assign(n, std::vector<double>(n, 0.0));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j)
            s.dist[i][j] = s.dist[j][i] = spec.metric(ball_points[i], ball_points[j]);
    s.validate(1e-9);
    return s;
}

namespace {

// min-cost flow, successive shortest paths with potentials (all arc costs
// are nonnegative, so plain Dijkstra seeds the potentials)
class MinCostFlow {
public:
    explicit MinCostFlow(int n) : adj_(n), n_(n) {}

    void add_arc(int u, int v, double cap, double cost) {
        adj_[u].push_back(static_cast<int>(arcs_.size()));
        arcs_.push_back({v, cap, cost, 0.0});
        adj_[v].push_back(static_cast<int>(arcs_.size()));
        arcs_.push_back({u, 0.0, -cost, 0.0});
    }

    // routes as much s->t flow as possible; returns {flow, cost}
    std::pair<double, double> run(int s, int t, int* augmentations) {
        const double inf = std::numeric_limits<double>::infinity();
        std::vector<double> pot(n_, 0.0), dist(n_);
        std::vector<int> pre_arc(n_);
        double flow = 0, cost = 0;
        int augs = 0;
        while (true) {
            std::fill(dist.begin(), dist.end(), inf);
            dist[s] = 0;
            using QE = std::pair<double, int>;
            std::priority_queue<QE, std::vector<QE>, std::greater<QE>> q;
            q.push({0.0, s});
            while (!q.empty()) {
                auto [d, u] = q.top();
                q.pop();
                if (d > dist[u] + 1e-18) continue;
                for (int ai : adj_[u]) {
                    const Arc& a = arcs_[ai];
                    if (a.cap - a.flow <= kResidualEps) continue;
                    // clamp: rounding in the potentials must not produce
                    // negative reduced costs, or the search can cycle
                    double nd = dist[u] + std::max(0.0, a.cost + pot[u] - pot[a.to]);
                    if (nd < dist[a.to] - 1e-18) {
                        dist[a.to] = nd;
                        pre_arc[a.to] = ai;
                        q.push({nd, a.to});
                    }
                }
            }
            if (dist[t] == inf) break;
            for (int v = 0; v < n_; ++v)
                if (dist[v] < inf) pot[v] += dist[v];
            double push = inf;
            for (int v = t; v != s;) {
                const Arc& a = arcs_[pre_arc[v]];
                push = std::min(push, a.cap - a.flow);
                v = arcs_[pre_arc[v] ^ 1].to;
            }
            if (!(push > 0) || push == inf) break;
            for (int v = t; v != s;) {
                Arc& a = arcs_[pre_arc[v]];
                a.flow += push;
                arcs_[pre_arc[v] ^ 1].flow -= push;
                cost += push * a.cost;
                v = arcs_[pre_arc[v] ^ 1].to;
            }
            flow += push;
            ++augs;
            require(augs < 100000, "transport augmentation budget exhausted");
        }
        if (augmentations) *augmentations = augs;
        potentials_ = pot;
        return {flow, cost};
    }

    const std::vector<double>& potentials() const { return potentials_; }

private:
    struct Arc {
        int to;
        double cap, cost, flow;
    };
    static constexpr double kResidualEps = 1e-12;
    std::vector<Arc> arcs_;
    std::vector<std::vector<int>> adj_;
    std::vector<double> potentials_;
    int n_ = 0;
};

struct Instance {
    std::vector<double> delta; // m1 - m2 aggregated on space points
    const FiniteMetricSpace* space = nullptr;
};

// inner maximum over phi for fixed L: |phi_i| <= 1-L, |phi_i - phi_j| <= L d_ij.
// By LP duality this equals the cheapest routing of delta where edge (i,j)
// charges L d_ij per unit and the ground node absorbs or emits at 1-L per unit.
double inner_value(const Instance& inst, double L, int* augs, double* gap) {
    int n = static_cast<int>(inst.delta.size());
    double s0 = 1.0 - L;
    int ground = n, S = n + 1, T = n + 2;
    MinCostFlow flow(n + 3);
    double total_pos = 0, total_neg = 0;
    for (int i = 0; i < n; ++i) {
        if (inst.delta[i] > 0) total_pos += inst.delta[i];
        if (inst.delta[i] < 0) total_neg -= inst.delta[i];
    }
    double big = total_pos + total_neg + 1.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j)
            if (i != j) flow.add_arc(i, j, big, L * inst.space->dist[i][j]);
        flow.add_arc(i, ground, big, s0);
        flow.add_arc(ground, i, big, s0);
        if (inst.delta[i] > 0) flow.add_arc(S, i, inst.delta[i], 0.0);
        if (inst.delta[i] < 0) flow.add_arc(i, T, -inst.delta[i], 0.0);
    }
    double imbalance = total_pos - total_neg;
    if (imbalance > 0) flow.add_arc(ground, T, imbalance, 0.0);
    if (imbalance < 0) flow.add_arc(S, ground, -imbalance, 0.0);

    int a = 0;
    auto [routed, cost] = flow.run(S, T, &a);
    if (augs) *augs += a;
    require(routed >= std::max(total_pos, total_neg) - 1e-9,
            "transport solver failed to route the full mass");

    if (gap) {
        // recover a feasible phi from the ground-relative potentials and
        // report the gap between the two LP sides as a certificate
        const auto& pot = flow.potentials();
        StableSum lower;
        for (int i = 0; i < n; ++i) {
            double phi = std::clamp(pot[ground] - pot[i], -s0, s0);
            lower.add(phi * inst.delta[i]);
        }
        *gap = std::max(*gap, std::abs(cost - lower.value()));
    }
    return cost;
}

} // namespace

double lip_dual_distance(const DiscreteMeasure& m1, const DiscreteMeasure& m2,
                         const FiniteMetricSpace& space, TransportDiagnostics* diag) {
    require(space.size() > 0, "empty metric space");
    require(space.size() <= 512, "instance above the 512-point support cap");
    Instance inst;
    inst.space = &space;
    inst.delta.assign(space.size(), 0.0);
    auto embed = [&](const DiscreteMeasure& m, double sign) {
        for (size_t i = 0; i < m.size(); ++i) {
            int k = space.locate(m.point(i), 1e-9);
            require(k >= 0, "measure support not embedded in the metric space");
            inst.delta[k] += sign * m.weight(i);
        }
    };
    embed(m1, +1.0);
    embed(m2, -1.0);

    bool all_zero = true;
    for (double d : inst.delta)
        if (d != 0.0) all_zero = false;
    if (all_zero) {
        if (diag) *diag = {};
        return 0.0;
    }

    TransportDiagnostics local;
    TransportDiagnostics& dg = diag ? *diag : local;
    dg = {};

    // value(L) is concave on [0,1]: feasible phi interpolate linearly in L
    double lo = 0.0, hi = 1.0;
    auto eval = [&](double L) { return inner_value(inst, L, &dg.augmentations, nullptr); };
    for (int it = 0; it < 96; ++it) {
        double m1p = lo + (hi - lo) / 3.0, m2p = hi - (hi - lo) / 3.0;
        if (eval(m1p) < eval(m2p))
            lo = m1p;
        else
            hi = m2p;
        ++dg.scan_iters;
    }
    dg.best_L = 0.5 * (lo + hi);
    double value = inner_value(inst, dg.best_L, &dg.augmentations, &dg.duality_gap);
    return value;
}

} // namespace ym
