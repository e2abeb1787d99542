// Timing harness for the two parallel kernels (envelope sweeps, triple
// estimation) against their serial reference paths. The parallel result must
// be bitwise identical to the serial one; any drift is a bug, not noise.

#include "ymlab/convexity.hpp"
#include "ymlab/scenario.hpp"
#include "ymlab/young.hpp"

#include <chrono>
#include <cstdio>
#include <functional>

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace ym;

namespace {

double best_ms(const std::function<void()>& fn, int reps) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        auto t0 = std::chrono::steady_clock::now();
        fn();
        auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return best;
}

bool same_measure(const DiscreteMeasure& a, const DiscreteMeasure& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (a.point(i) != b.point(i) || a.weight(i) != b.weight(i)) return false;
    return true;
}

bool same_triple(const YoungTriple& a, const YoungTriple& b) {
    if (a.cell_mass != b.cell_mass) return false;
    if (a.osc.size() != b.osc.size()) return false;
    for (size_t c = 0; c < a.osc.size(); ++c) {
        if (a.osc[c].has_value() != b.osc[c].has_value()) return false;
        if (a.osc[c] && !same_measure(*a.osc[c], *b.osc[c])) return false;
    }
    if (!same_measure(a.conc, b.conc)) return false;
    if (a.angle.size() != b.angle.size()) return false;
    for (size_t s = 0; s < a.angle.size(); ++s)
        if (!same_measure(a.angle[s], b.angle[s])) return false;
    return true;
}

void row(const char* name, double serial, double parallel, bool equal) {
    std::printf("%-28s %12.2f %14.2f %9.2fx   %s\n", name, serial, parallel,
                serial / parallel, equal ? "equal" : "MISMATCH");
}

} // namespace

int main() {
    int threads = 1;
#ifdef _OPENMP
    threads = omp_get_max_threads();
#endif
    std::printf("kernel benchmark, %d thread%s\n", threads, threads == 1 ? "" : "s");
    std::printf("%-28s %12s %14s %10s\n", "kernel", "serial [ms]", "parallel [ms]", "speedup");

    bool all_equal = true;

    {
        Integrand f = catalog("muller_gk:1");
        MatrixGrid start = MatrixGrid::sample(f, 2.0, 17);
        auto dirs = rank_one_directions(12);
        EnvelopeParams prm;
        prm.max_iters = 3;
        prm.tol_change = 0.0; // fixed sweep count so both paths do identical work
        EnvelopeResult rs, rp;
        prm.parallel = false;
        double ts = best_ms([&] { rs = lamination_envelope(f, start, dirs, prm); }, 2);
        prm.parallel = true;
        double tp = best_ms([&] { rp = lamination_envelope(f, start, dirs, prm); }, 2);
        bool eq = rs.grid.values == rp.grid.values && rs.iters == rp.iters;
        all_equal = all_equal && eq;
        row("envelope 17^4, 12 dirs", ts, tp, eq);
    }

    {
        std::vector<double> js;
        for (int j = 2; j <= 256; j *= 2) js.push_back(j);
        SampledSequence seq = seq_oscillation(256, 1 << 16, js);
        auto spec = make_named_spec("sphere", 1);
        EstimateParams prm;
        YoungTriple rs, rp;
        prm.parallel = false;
        double ts = best_ms(
            [&] { rs = estimate(seq, spec, std::make_shared<AtomRegistry>(), prm); }, 3);
        prm.parallel = true;
        double tp = best_ms(
            [&] { rp = estimate(seq, spec, std::make_shared<AtomRegistry>(), prm); }, 3);
        bool eq = same_triple(rs, rp);
        all_equal = all_equal && eq;
        row("estimate 512k samples", ts, tp, eq);
    }

    if (!all_equal) {
        std::printf("parallel kernels diverged from the serial reference\n");
        return 1;
    }
    return 0;
}
