#include <doctest.h>

#include "ymlab/transport.hpp"

#include <cmath>

using namespace ym;

namespace {

// Exact LP oracle for the dual
//   max sum_i c_i phi_i  s.t.  |phi_i| <= s,  phi_i - phi_j <= L d_ij,
//                              s + L <= 1,  s, L >= 0
// by enumerating vertices of the feasible polytope (tiny n only).
double lp_oracle(const FiniteMetricSpace& space, const Vec& c) {
    const int n = static_cast<int>(space.points.size());
    const int m = n + 2; // variables: phi_1..phi_n, s, L
    std::vector<Vec> A;
    Vec b;
    auto row = [&](const Vec& a, double rhs) {
        A.push_back(a);
        b.push_back(rhs);
    };
    for (int i = 0; i < n; ++i) {
        Vec up(m, 0.0), dn(m, 0.0);
        up[i] = 1.0;
        up[n] = -1.0;
        row(up, 0.0); // phi_i - s <= 0
        dn[i] = -1.0;
        dn[n] = -1.0;
        row(dn, 0.0); // -phi_i - s <= 0
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            Vec a(m, 0.0);
            a[i] = 1.0;
            a[j] = -1.0;
            a[n + 1] = -space.dist[i][j];
            row(a, 0.0); // phi_i - phi_j - L d_ij <= 0
        }
    {
        Vec a(m, 0.0);
        a[n] = 1.0;
        a[n + 1] = 1.0;
        row(a, 1.0); // s + L <= 1
        Vec sn(m, 0.0), ln(m, 0.0);
        sn[n] = -1.0;
        row(sn, 0.0);
        ln[n + 1] = -1.0;
        row(ln, 0.0);
    }

    const int K = static_cast<int>(A.size());
    std::vector<int> pick(m);
    double best = 0.0; // phi = 0 is feasible
    std::function<void(int, int)> rec = [&](int start, int depth) {
        if (depth == m) {
            // solve the square system A[pick] x = b[pick]
            std::vector<Vec> M(m, Vec(m + 1, 0.0));
            for (int r = 0; r < m; ++r) {
                for (int q = 0; q < m; ++q) M[r][q] = A[pick[r]][q];
                M[r][m] = b[pick[r]];
            }
            for (int col = 0; col < m; ++col) {
                int piv = col;
                for (int r = col + 1; r < m; ++r)
                    if (std::abs(M[r][col]) > std::abs(M[piv][col])) piv = r;
                if (std::abs(M[piv][col]) < 1e-11) return;
                std::swap(M[piv], M[col]);
                for (int r = 0; r < m; ++r) {
                    if (r == col) continue;
                    double f = M[r][col] / M[col][col];
                    for (int q = col; q <= m; ++q) M[r][q] -= f * M[col][q];
                }
            }
            Vec x(m);
            for (int r = 0; r < m; ++r) x[r] = M[r][m] / M[r][r];
            for (int r = 0; r < K; ++r)
                if (dot(A[r], x) > b[r] + 1e-9) return;
            double val = 0;
            for (int i = 0; i < n; ++i) val += c[i] * x[i];
            best = std::max(best, val);
            return;
        }
        for (int k = start; k <= K - (m - depth); ++k) {
            pick[depth] = k;
            rec(k + 1, depth + 1);
        }
    };
    rec(0, 0);
    return best;
}

Vec signed_weights(const FiniteMetricSpace& space, const DiscreteMeasure& m1,
                   const DiscreteMeasure& m2) {
    Vec c(space.points.size(), 0.0);
    for (size_t i = 0; i < m1.size(); ++i) c[space.locate(m1.point(i))] += m1.weight(i);
    for (size_t i = 0; i < m2.size(); ++i) c[space.locate(m2.point(i))] -= m2.weight(i);
    return c;
}

} // namespace

TEST_CASE("two point distance has the closed form 2t/(2+t)") {
    for (double t : {0.125, 1.0, 5.0, 100.0}) {
        FiniteMetricSpace space = FiniteMetricSpace::euclidean({{0.0}, {t}});
        DiscreteMeasure m1(1), m2(1);
        m1.add({0.0}, 1.0);
        m2.add({t}, 1.0);
        TransportDiagnostics diag;
        double d = lip_dual_distance(m1, m2, space, &diag);
        CHECK(d == doctest::Approx(2 * t / (2 + t)).epsilon(1e-9));
        CHECK(d == doctest::Approx(lp_oracle(space, signed_weights(space, m1, m2)))
                       .epsilon(1e-7));
        CHECK(diag.duality_gap <= 1e-7);
        CHECK(diag.best_L >= 0);
        CHECK(diag.best_L <= 1);
    }
}

TEST_CASE("identical measures are at distance zero") {
    FiniteMetricSpace space = FiniteMetricSpace::euclidean({{0.0, 0.0}, {1.0, 2.0}});
    DiscreteMeasure m(2);
    m.add({0.0, 0.0}, 0.5);
    m.add({1.0, 2.0}, 0.5);
    CHECK(lip_dual_distance(m, m, space) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("pure mass deficit pays the sup part") {
    FiniteMetricSpace space = FiniteMetricSpace::euclidean({{0.5}});
    DiscreteMeasure m1(1), m2(1);
    m1.add({0.5}, 1.0);
    m2.add({0.5}, 0.25);
    CHECK(lip_dual_distance(m1, m2, space) == doctest::Approx(0.75).epsilon(1e-9));
}

TEST_CASE("solver matches the LP oracle on random small spaces") {
    Rng rng(41);
    for (int trial = 0; trial < 12; ++trial) {
        int n = 3 + trial % 2;
        std::vector<Vec> pts;
        for (int i = 0; i < n; ++i) pts.push_back({rng.uniform(-2, 2), rng.uniform(-2, 2)});
        FiniteMetricSpace space = FiniteMetricSpace::euclidean(pts);
        DiscreteMeasure m1(2), m2(2);
        for (int i = 0; i < n; ++i) {
            double w1 = rng.uniform(0, 1), w2 = rng.uniform(0, 1);
            if (w1 > 0.2) m1.add(pts[i], w1);
            if (w2 > 0.2) m2.add(pts[i], w2);
        }
        double got = lip_dual_distance(m1, m2, space);
        double want = lp_oracle(space, signed_weights(space, m1, m2));
        CHECK(got == doctest::Approx(want).epsilon(1e-6));
    }
}

TEST_CASE("solver matches the oracle under a compactification metric") {
    auto spec = CompactificationSpec::sphere(2);
    Rng rng(42);
    std::vector<Vec> pts;
    for (int i = 0; i < 4; ++i) pts.push_back(rng.ball(2));
    FiniteMetricSpace space = metric_space_from_spec(pts, spec);
    DiscreteMeasure m1(2), m2(2);
    m1.add(pts[0], 0.5);
    m1.add(pts[2], 0.5);
    m2.add(pts[1], 0.25);
    m2.add(pts[3], 0.75);
    double got = lip_dual_distance(m1, m2, space);
    CHECK(got == doctest::Approx(lp_oracle(space, signed_weights(space, m1, m2)))
                     .epsilon(1e-6));
}

TEST_CASE("distance is symmetric and satisfies the triangle inequality") {
    Rng rng(43);
    std::vector<Vec> pts = {{0.0}, {0.4}, {1.1}, {2.3}};
    FiniteMetricSpace space = FiniteMetricSpace::euclidean(pts);
    for (int trial = 0; trial < 6; ++trial) {
        DiscreteMeasure a(1), b(1), c(1);
        for (const Vec& p : pts) {
            a.add(p, rng.uniform(0, 1));
            b.add(p, rng.uniform(0, 1));
            c.add(p, rng.uniform(0, 1));
        }
        double ab = lip_dual_distance(a, b, space);
        double ba = lip_dual_distance(b, a, space);
        double ac = lip_dual_distance(a, c, space);
        double cb = lip_dual_distance(c, b, space);
        CHECK(ab == doctest::Approx(ba).epsilon(1e-9));
        CHECK(ab <= ac + cb + 1e-9);
    }
}

TEST_CASE("metric validation rejects broken matrices") {
    FiniteMetricSpace bad;
    bad.points = {{0.0}, {1.0}};
    bad.dist = {{0.0, 1.0}, {2.0, 0.0}};
    CHECK_THROWS(bad.validate());

    FiniteMetricSpace tri;
    tri.points = {{0.0}, {1.0}, {2.0}};
    tri.dist = {{0, 1, 9}, {1, 0, 1}, {9, 1, 0}};
    CHECK_THROWS(tri.validate());

    FiniteMetricSpace ok = FiniteMetricSpace::euclidean({{0.0}, {1.0}, {2.0}});
    CHECK_NOTHROW(ok.validate());
    CHECK(ok.locate({1.0}) == 1);
    CHECK(ok.locate({1.5}) == -1);
}
