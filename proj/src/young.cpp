#include "ymlab/young.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace ym {

// ---------------------------------------------------------------- grid

GridDescriptor GridDescriptor::unit(int n, int cells_per_axis) {
    require(n >= 1 && cells_per_axis >= 1, "grid needs positive dimensions");
    GridDescriptor g;
    g.n = n;
    g.lo.assign(n, 0.0);
    g.hi.assign(n, 1.0);
    g.cells.assign(n, cells_per_axis);
    return g;
}

int GridDescriptor::cell_count() const {
    int c = 1;
    for (int a = 0; a < n; ++a) c *= cells[a];
    return c;
}

int GridDescriptor::locate(std::span<const double> x) const {
    require(static_cast<int>(x.size()) == n, "grid point dimension mismatch");
    int idx = 0;
    for (int a = 0; a < n; ++a) {
        double tol = 1e-12 * std::max(1.0, std::abs(lo[a]) + std::abs(hi[a]));
        if (x[a] < lo[a] - tol || x[a] > hi[a] + tol) return -1;
        int i = static_cast<int>(std::floor((x[a] - lo[a]) / spacing(a)));
        i = std::clamp(i, 0, cells[a] - 1);
        idx = idx * cells[a] + i;
    }
    return idx;
}

Vec GridDescriptor::center(int idx) const {
    Vec c(n);
    for (int a = n - 1; a >= 0; --a) {
        int i = idx % cells[a];
        idx /= cells[a];
        c[a] = lo[a] + (i + 0.5) * spacing(a);
    }
    return c;
}

double GridDescriptor::cell_volume() const {
    double v = 1;
    for (int a = 0; a < n; ++a) v *= spacing(a);
    return v;
}

bool GridDescriptor::on_boundary(std::span<const double> x, double tol) const {
    for (int a = 0; a < n; ++a) {
        double s = tol * std::max(1.0, std::abs(lo[a]) + std::abs(hi[a]));
        if (std::abs(x[a] - lo[a]) <= s || std::abs(x[a] - hi[a]) <= s) return true;
    }
    return false;
}

DiscreteMeasure grid_measure(const GridDescriptor& g) {
    DiscreteMeasure m(g.n);
    double vol = g.cell_volume();
    for (int c = 0; c < g.cell_count(); ++c) m.add(g.center(c), vol);
    return m;
}

void SampledSequence::check() const {
    require(grid.n == mu.dim(), "quadrature measure dimension must match the grid");
    require(mu.size() > 0, "empty quadrature measure");
    require(!fields.empty(), "sequence carries no fields");
    require(fields.size() == jvalues.size(), "one j label per field");
    for (const auto& fj : fields) {
        require(fj.size() == mu.size(), "field not aligned with quadrature atoms");
        for (const auto& v : fj)
            require(static_cast<int>(v.size()) == zdim, "field value dimension mismatch");
    }
}

double YoungTriple::boundary_conc_mass(double tol) const {
    StableSum s;
    for (size_t i = 0; i < conc.size(); ++i)
        if (grid.on_boundary(conc.point(i), tol)) s.add(conc.weight(i));
    return s.value();
}

int YoungTriple::undefined_fibers() const {
    int c = 0;
    for (size_t i = 0; i < osc.size(); ++i)
        if (!osc[i] && cell_mass[i] > 0) ++c;
    return c;
}

// ---------------------------------------------------------------- estimate

namespace {

struct CellIndex {
    std::vector<int> cell_of;           // mu atom -> cell
    std::vector<std::vector<int>> in;   // cell -> mu atoms
    Vec mass;                           // cell -> mu mass
};

CellIndex index_cells(const GridDescriptor& grid, const DiscreteMeasure& mu) {
    CellIndex ci;
    int C = grid.cell_count();
    ci.cell_of.resize(mu.size());
    ci.in.resize(C);
    for (size_t i = 0; i < mu.size(); ++i) {
        int c = grid.locate(mu.point(i));
        require(c >= 0, "quadrature atom outside the grid");
        ci.cell_of[i] = c;
        ci.in[c].push_back(static_cast<int>(i));
    }
    ci.mass.assign(C, 0.0);
    for (int c = 0; c < C; ++c) {
        StableSum s;
        for (int i : ci.in[c]) s.add(mu.weight(i));
        ci.mass[c] = s.value();
    }
    return ci;
}

int default_bins(int zdim) {
    if (zdim == 1) return 64;
    if (zdim == 2) return 32;
    return 8;
}

long long bin_key(std::span<const double> v, int bins) {
    double r = norm(v);
    long long key = 0;
    for (double c : v) {
        double zh = c / (1.0 + r); // componentwise ball coordinate, in (-1,1)
        int b = static_cast<int>(std::floor((zh + 1.0) * 0.5 * bins));
        b = std::clamp(b, 0, bins - 1);
        key = key * bins + b;
    }
    return key;
}

struct Bin {
    double w = 0;
    Vec vsum;
};

double conc_weight(double mag, double p) {
    return p == 1.0 ? mag : std::pow(mag, p);
}

} // namespace

YoungTriple estimate(const SampledSequence& seq,
                     std::shared_ptr<const CompactificationSpec> spec,
                     std::shared_ptr<AtomRegistry> registry, EstimateParams params) {
    seq.check();
    require(spec && registry, "estimate needs a compactification spec and a registry");
    require(seq.zdim == spec->zdim(), "sequence and compactification dimension differ");
    require(params.R_cut + 1e-9 >= spec->mag_min(),
            "R_cut below the classification threshold mag_min");

    const int C = seq.grid.cell_count();
    const int J = static_cast<int>(seq.fields.size());
    const int bins = params.bins_per_axis > 0 ? params.bins_per_axis : default_bins(seq.zdim);
    CellIndex ci = index_cells(seq.grid, seq.mu);

    // binning pass: per-cell histograms of the bounded samples, independent
    // across cells, so the parallel result matches the serial one exactly
    std::vector<std::map<long long, Bin>> hist(C);
#pragma omp parallel for schedule(dynamic, 8) if (params.parallel)
    for (int c = 0; c < C; ++c) {
        auto& h = hist[c];
        for (int j = 0; j < J; ++j) {
            for (int i : ci.in[c]) {
                const Vec& v = seq.fields[j][i];
                if (norm(v) > params.R_cut) continue;
                Bin& b = h[bin_key(v, bins)];
                if (b.vsum.empty()) b.vsum.assign(seq.zdim, 0.0);
                double w = seq.mu.weight(i);
                b.w += w;
                for (int k = 0; k < seq.zdim; ++k) b.vsum[k] += w * v[k];
            }
        }
    }

    // classification pass: serial, the registry mutates in a fixed order
    const double p = spec->p();
    std::map<int, double> conc_w;
    std::map<int, std::map<int, double>> votes;
    for (int c = 0; c < C; ++c) {
        for (int j = 0; j < J; ++j) {
            for (int i : ci.in[c]) {
                const Vec& v = seq.fields[j][i];
                double m = norm(v);
                if (m <= params.R_cut) continue;
                double lam = conc_weight(m, p) * seq.mu.weight(i) / J;
                int id = registry->classify(v, *spec);
                conc_w[c] += lam;
                votes[c][id] += lam;
            }
        }
    }

    YoungTriple out;
    out.grid = seq.grid;
    out.zdim = seq.zdim;
    out.cell_mass = ci.mass;
    out.spec = spec;
    out.registry = registry;
    out.osc.resize(C);
    for (int c = 0; c < C; ++c) {
        if (hist[c].empty()) continue;
        StableSum tot;
        for (const auto& [key, b] : hist[c]) tot.add(b.w);
        double total = tot.value();
        if (total <= 0) continue;
        DiscreteMeasure fiber(seq.zdim);
        for (const auto& [key, b] : hist[c]) {
            Vec pt(seq.zdim);
            for (int k = 0; k < seq.zdim; ++k) pt[k] = b.vsum[k] / b.w;
            fiber.add(pt, b.w / total);
        }
        out.osc[c] = std::move(fiber);
    }
    out.conc = DiscreteMeasure(seq.grid.n);
    for (const auto& [c, w] : conc_w) {
        out.conc.add(seq.grid.center(c), w);
        DiscreteMeasure ang(1);
        for (const auto& [id, vw] : votes[c]) ang.add({static_cast<double>(id)}, vw / w);
        out.angle.push_back(std::move(ang));
    }
    return out;
}

YoungTriple elementary(const SampledSequence& seq, size_t field_index,
                       std::shared_ptr<const CompactificationSpec> spec,
                       std::shared_ptr<AtomRegistry> registry) {
    seq.check();
    require(field_index < seq.fields.size(), "field index out of range");
    require(spec && registry, "elementary embedding needs a spec and a registry");
    const auto& v = seq.fields[field_index];
    CellIndex ci = index_cells(seq.grid, seq.mu);
    const int C = seq.grid.cell_count();

    YoungTriple out;
    out.grid = seq.grid;
    out.zdim = seq.zdim;
    out.cell_mass = ci.mass;
    out.spec = std::move(spec);
    out.registry = std::move(registry);
    out.osc.resize(C);
    out.conc = DiscreteMeasure(seq.grid.n);
    for (int c = 0; c < C; ++c) {
        if (ci.in[c].empty() || ci.mass[c] <= 0) continue;
        DiscreteMeasure fiber(seq.zdim);
        for (int i : ci.in[c]) fiber.add(v[i], seq.mu.weight(i) / ci.mass[c]);
        out.osc[c] = std::move(fiber);
    }
    return out;
}

YoungTriple elementary_measure(const VectorDiscreteMeasure& l, const DiscreteMeasure& mu,
                               const GridDescriptor& grid,
                               std::shared_ptr<const CompactificationSpec> spec,
                               std::shared_ptr<AtomRegistry> registry,
                               const std::vector<Vec>* singular_witness, double witness_mag) {
    require(spec && registry, "measure embedding needs a spec and a registry");
    require(l.dim() == grid.n && mu.dim() == grid.n, "measure dimension mismatch");
    require(l.vdim() == spec->zdim(), "vector dimension and compactification differ");
    require(spec->p() == 1.0, "measure embedding needs p = 1");

    auto rn = radon_nikodym(l, mu);
    CellIndex ci = index_cells(grid, mu);
    const int C = grid.cell_count();

    YoungTriple out;
    out.grid = grid;
    out.zdim = l.vdim();
    out.cell_mass = ci.mass;
    out.spec = spec;
    out.registry = registry;
    out.osc.resize(C);
    for (int c = 0; c < C; ++c) {
        if (ci.in[c].empty() || ci.mass[c] <= 0) continue;
        DiscreteMeasure fiber(l.vdim());
        for (int i : ci.in[c]) fiber.add(rn.density[i], mu.weight(i) / ci.mass[c]);
        out.osc[c] = std::move(fiber);
    }

    const auto& sing = rn.singular;
    if (sing.size() > 0 && spec->generator_count() > 0 && !singular_witness)
        throw std::invalid_argument(
            "compactification is finer than the sphere: singular atoms need explicit "
            "witness points to determine their boundary class");
    if (singular_witness)
        require(singular_witness->size() == sing.size(), "one witness per singular atom");

    out.conc = DiscreteMeasure(grid.n);
    std::vector<std::map<int, double>> votes;
    for (size_t s = 0; s < sing.size(); ++s) {
        const Vec& u = sing.vweight(s);
        double m = norm(u);
        if (m <= 0) continue;
        require(grid.locate(sing.point(s)) >= 0, "singular atom outside the closed grid");
        Vec e = scaled(u, 1.0 / m);
        Vec zrep = singular_witness ? (*singular_witness)[s] : scaled(e, witness_mag);
        double zm = norm(zrep);
        require(zm >= spec->mag_min(), "witness magnitude below the classification threshold");
        if (singular_witness) {
            Vec wd = scaled(zrep, 1.0 / zm);
            require(dist(wd, e) <= spec->tol_equiv() + 1e-9,
                    "witness direction does not match the singular polar");
        }
        int id = registry->classify(zrep, *spec);
        out.conc.add(sing.point(s), m);
        size_t idx = static_cast<size_t>(out.conc.find(sing.point(s)));
        if (idx >= votes.size()) votes.resize(idx + 1);
        votes[idx][id] += m;
    }
    for (size_t i = 0; i < out.conc.size(); ++i) {
        DiscreteMeasure ang(1);
        for (const auto& [id, vw] : votes[i])
            ang.add({static_cast<double>(id)}, vw / out.conc.weight(i));
        out.angle.push_back(std::move(ang));
    }
    return out;
}

// ---------------------------------------------------------------- pairing

namespace {

double resolve_recession(const YoungTriple& nu, const Integrand& f, const PairOptions& opt,
                         int atom_id, std::span<const double> x) {
    if (auto it = opt.atom_recession.find(atom_id); it != opt.atom_recession.end())
        return it->second;
    const BoundaryAtom& atom = nu.registry->atom(atom_id);
    int gi = nu.spec->generator_index(f.label);
    if (gi >= 0) return atom.gen_limits[gi] / nu.spec->generator_scale(gi);
    if (f.recession) return f.recession(x, atom.dir);
    throw std::domain_error("integrand '" + f.label +
                            "' does not extend continuously to this compactification "
                            "(no recession available on boundary atoms)");
}

} // namespace

double pair_integral(const YoungTriple& nu, const Integrand& f, PairOptions opt) {
    require(f.zdim == 0 || f.zdim == nu.zdim, "integrand dimension mismatch");
    require(nu.angle.size() == nu.conc.size(), "angle measures not aligned with lambda");
    StableSum total;
    for (int c = 0; c < nu.grid.cell_count(); ++c) {
        if (!nu.osc[c] || nu.cell_mass[c] <= 0) continue;
        Vec x = nu.grid.center(c);
        double e = opt.eta ? opt.eta(x) : 1.0;
        if (e == 0) continue;
        const DiscreteMeasure& fiber = *nu.osc[c];
        StableSum fs;
        for (size_t a = 0; a < fiber.size(); ++a)
            fs.add(fiber.weight(a) * f.eval(x, fiber.point(a)));
        total.add(nu.cell_mass[c] * e * fs.value());
    }
    for (size_t s = 0; s < nu.conc.size(); ++s) {
        const Vec& x = nu.conc.point(s);
        double e = opt.eta ? opt.eta(x) : 1.0;
        if (e == 0) continue;
        const DiscreteMeasure& ang = nu.angle[s];
        StableSum as;
        for (size_t k = 0; k < ang.size(); ++k) {
            int id = static_cast<int>(std::llround(ang.point(k)[0]));
            as.add(ang.weight(k) * resolve_recession(nu, f, opt, id, x));
        }
        total.add(nu.conc.weight(s) * e * as.value());
    }
    return total.value();
}

VectorDiscreteMeasure barycentre(const YoungTriple& nu) {
    require(static_cast<bool>(nu.spec), "triple carries no compactification spec");
    VectorDiscreteMeasure out(nu.grid.n, nu.zdim);
    for (int c = 0; c < nu.grid.cell_count(); ++c) {
        if (!nu.osc[c] || nu.cell_mass[c] <= 0) continue;
        const DiscreteMeasure& fiber = *nu.osc[c];
        Vec mean(nu.zdim, 0.0);
        for (size_t a = 0; a < fiber.size(); ++a)
            for (int k = 0; k < nu.zdim; ++k) mean[k] += fiber.weight(a) * fiber.point(a)[k];
        out.add(nu.grid.center(c), scaled(mean, nu.cell_mass[c]));
    }
    // the concentration term pairs the identity with the angle measure; the
    // identity has a recession only when p = 1, beyond that the density part
    // alone is the barycentre
    if (nu.spec->p() != 1.0) return out;
    for (size_t s = 0; s < nu.conc.size(); ++s) {
        const DiscreteMeasure& ang = nu.angle[s];
        Vec mean(nu.zdim, 0.0);
        for (size_t k = 0; k < ang.size(); ++k) {
            int id = static_cast<int>(std::llround(ang.point(k)[0]));
            const Vec& d = nu.registry->atom(id).dir;
            for (int t = 0; t < nu.zdim; ++t) mean[t] += ang.weight(k) * d[t];
        }
        out.add(nu.conc.point(s), scaled(mean, nu.conc.weight(s)));
    }
    return out;
}

// ---------------------------------------------------------------- sequences

EquiProfile is_equiintegrable(const SampledSequence& seq, std::vector<double> k_grid,
                              double tol_ei) {
    seq.check();
    EquiProfile out;
    if (k_grid.empty())
        for (int e = 0; e <= 20; ++e) k_grid.push_back(std::pow(2.0, e));
    out.k_grid = k_grid;
    double l1max = 0;
    for (const auto& fj : seq.fields) {
        StableSum s;
        for (size_t i = 0; i < seq.mu.size(); ++i) s.add(norm(fj[i]) * seq.mu.weight(i));
        l1max = std::max(l1max, s.value());
    }
    for (double k : k_grid) {
        double worst = 0;
        for (const auto& fj : seq.fields) {
            StableSum s;
            for (size_t i = 0; i < seq.mu.size(); ++i) {
                double m = norm(fj[i]);
                if (m > k) s.add(m * seq.mu.weight(i));
            }
            worst = std::max(worst, s.value());
        }
        out.profile.push_back(worst);
    }
    out.flag = l1max == 0 || out.profile.back() <= tol_ei * l1max;
    return out;
}

Decomposition decompose(const SampledSequence& seq, double k_cut) {
    seq.check();
    require(k_cut > 0, "truncation level must be positive");
    Decomposition d;
    d.oscillation = seq;
    d.concentration = seq;
    d.k_j.assign(seq.fields.size(), k_cut);
    for (size_t j = 0; j < seq.fields.size(); ++j) {
        for (size_t i = 0; i < seq.mu.size(); ++i) {
            Vec& o = d.oscillation.fields[j][i];
            Vec& c = d.concentration.fields[j][i];
            if (norm(o) <= k_cut) {
                std::fill(c.begin(), c.end(), 0.0);
            } else {
                std::fill(o.begin(), o.end(), 0.0);
            }
        }
    }
    return d;
}

JoinResult join(const SampledSequence& vseq, const SampledSequence& wseq,
                std::shared_ptr<const CompactificationSpec> spec,
                std::shared_ptr<AtomRegistry> registry, EstimateParams params,
                double tol_delta) {
    vseq.check();
    wseq.check();
    require(vseq.zdim == wseq.zdim, "sequences live in different target spaces");
    require(vseq.fields.size() == wseq.fields.size(), "sequences have different lengths");
    require(vseq.mu.size() == wseq.mu.size(), "sequences use different quadratures");
    for (size_t i = 0; i < vseq.mu.size(); ++i)
        require(dist(vseq.mu.point(i), wseq.mu.point(i)) <= 1e-12 &&
                    std::abs(vseq.mu.weight(i) - wseq.mu.weight(i)) <= 1e-12,
                "sequences use different quadratures");

    YoungTriple nv = estimate(vseq, spec, registry, params);
    const int C = vseq.grid.cell_count();
    std::vector<Vec> shift(C);
    for (int c = 0; c < C; ++c) {
        if (!nv.osc[c]) continue;
        const DiscreteMeasure& fiber = *nv.osc[c];
        Vec bary(vseq.zdim, 0.0);
        for (size_t a = 0; a < fiber.size(); ++a)
            for (int k = 0; k < vseq.zdim; ++k) bary[k] += fiber.weight(a) * fiber.point(a)[k];
        StableSum spread;
        for (size_t a = 0; a < fiber.size(); ++a)
            spread.add(fiber.weight(a) * dist(fiber.point(a), bary));
        require(spread.value() <= tol_delta * (1.0 + norm(bary)),
                "first sequence does not converge in measure (fiber spread too large)");
        shift[c] = std::move(bary);
    }

    YoungTriple nw = estimate(wseq, spec, registry, params);
    double overlap = 0;
    for (size_t s = 0; s < nv.conc.size(); ++s) {
        int t = nw.conc.find(nv.conc.point(s));
        if (t >= 0) overlap += std::min(nv.conc.weight(s), nw.conc.weight(t));
    }
    if (overlap > tol_delta) throw std::invalid_argument("concentrations not mutually singular");

    JoinResult out;
    out.sum = wseq;
    for (size_t j = 0; j < wseq.fields.size(); ++j)
        for (size_t i = 0; i < wseq.mu.size(); ++i)
            for (int k = 0; k < wseq.zdim; ++k)
                out.sum.fields[j][i][k] += vseq.fields[j][i][k];

    // fibers of the sum: w-fibers translated by the strong limit of v
    out.predicted = nw;
    for (int c = 0; c < C; ++c) {
        if (!out.predicted.osc[c] || shift[c].empty()) continue;
        const DiscreteMeasure& fiber = *out.predicted.osc[c];
        DiscreteMeasure moved(wseq.zdim);
        for (size_t a = 0; a < fiber.size(); ++a) {
            Vec pt = fiber.point(a);
            for (int k = 0; k < wseq.zdim; ++k) pt[k] += shift[c][k];
            moved.add(pt, fiber.weight(a));
        }
        out.predicted.osc[c] = std::move(moved);
    }

    // concentrations add, angle measures glue along the disjoint supports
    DiscreteMeasure conc(wseq.grid.n);
    std::vector<std::map<int, double>> votes;
    auto absorb = [&](const YoungTriple& t) {
        for (size_t s = 0; s < t.conc.size(); ++s) {
            conc.add(t.conc.point(s), t.conc.weight(s));
            size_t idx = static_cast<size_t>(conc.find(t.conc.point(s)));
            if (idx >= votes.size()) votes.resize(idx + 1);
            const DiscreteMeasure& ang = t.angle[s];
            for (size_t k = 0; k < ang.size(); ++k)
                votes[idx][static_cast<int>(std::llround(ang.point(k)[0]))] +=
                    t.conc.weight(s) * ang.weight(k);
        }
    };
    absorb(out.predicted);
    absorb(nv);
    out.predicted.conc = std::move(conc);
    out.predicted.angle.clear();
    for (size_t i = 0; i < out.predicted.conc.size(); ++i) {
        DiscreteMeasure ang(1);
        for (const auto& [id, vw] : votes[i])
            ang.add({static_cast<double>(id)}, vw / out.predicted.conc.weight(i));
        out.predicted.angle.push_back(std::move(ang));
    }
    return out;
}

namespace {

// merge atoms closer than scale * (1 + |mean|) into their weighted mean, so
// fibers are compared at the resolution the weight field supports
DiscreteMeasure coarsen(const DiscreteMeasure& m, double scale) {
    std::vector<Vec> pts;
    std::vector<double> ws;
    for (size_t i = 0; i < m.size(); ++i) {
        const Vec& p = m.point(i);
        double w = m.weight(i);
        int hit = -1;
        for (size_t k = 0; k < pts.size(); ++k)
            if (dist(p, pts[k]) <= scale * (1.0 + norm(pts[k]))) {
                hit = static_cast<int>(k);
                break;
            }
        if (hit < 0) {
            pts.push_back(p);
            ws.push_back(w);
        } else {
            double tot = ws[hit] + w;
            for (size_t t = 0; t < p.size(); ++t)
                pts[hit][t] = (ws[hit] * pts[hit][t] + w * p[t]) / tot;
            ws[hit] = tot;
        }
    }
    DiscreteMeasure out(m.dim(), m.dedup_tol());
    for (size_t k = 0; k < pts.size(); ++k) out.add(pts[k], ws[k]);
    return out;
}

} // namespace

RescaleReport rescale_compare(const SampledSequence& seq,
                              const std::function<double(std::span<const double>)>& a,
                              std::shared_ptr<const CompactificationSpec> spec,
                              EstimateParams params, double match_scale) {
    seq.check();
    require(static_cast<bool>(a), "rescale_compare needs a weight function");
    require(match_scale > 0, "match_scale must be positive");
    require(spec && spec->p() == 1.0, "rescaling invariance is a p = 1 statement");

    SampledSequence scaled_seq = seq;
    scaled_seq.mu = DiscreteMeasure(seq.mu.dim(), seq.mu.dedup_tol());
    for (size_t i = 0; i < seq.mu.size(); ++i) {
        double ai = a(seq.mu.point(i));
        require(ai > 0, "weight function must be positive");
        scaled_seq.mu.add(seq.mu.point(i), ai * seq.mu.weight(i));
        for (size_t j = 0; j < seq.fields.size(); ++j)
            for (int k = 0; k < seq.zdim; ++k) scaled_seq.fields[j][i][k] /= ai;
    }

    auto reg1 = std::make_shared<AtomRegistry>();
    auto reg2 = std::make_shared<AtomRegistry>();
    YoungTriple n1 = estimate(seq, spec, reg1, params);
    YoungTriple n2 = estimate(scaled_seq, spec, reg2, params);

    RescaleReport rep;
    const int C = seq.grid.cell_count();
    for (int c = 0; c < C; ++c) {
        if (!n1.osc[c] || !n2.osc[c]) continue;
        double ac = a(seq.grid.center(c));
        DiscreteMeasure pushed = pushforward(
            *n1.osc[c], [ac](const Vec& z) { return scaled(z, 1.0 / ac); }, seq.zdim);
        rep.fiber_tv_max = std::max(
            rep.fiber_tv_max, tv_distance(coarsen(pushed, match_scale),
                                          coarsen(*n2.osc[c], match_scale), match_scale));
        ++rep.cells_compared;
    }
    rep.conc_mass_diff = std::abs(n1.conc.mass() - n2.conc.mass());
    rep.conc_matched_tv = tv_distance(n1.conc, n2.conc, 1e-9);

    auto mean_dir = [](const YoungTriple& nu, size_t s) {
        Vec m(nu.zdim, 0.0);
        const DiscreteMeasure& ang = nu.angle[s];
        for (size_t k = 0; k < ang.size(); ++k) {
            int id = static_cast<int>(std::llround(ang.point(k)[0]));
            const Vec& d = nu.registry->atom(id).dir;
            for (int t = 0; t < nu.zdim; ++t) m[t] += ang.weight(k) * d[t];
        }
        return m;
    };
    for (size_t s = 0; s < n1.conc.size(); ++s) {
        int t = n2.conc.find(n1.conc.point(s));
        if (t < 0) continue;
        rep.angle_dir_diff =
            std::max(rep.angle_dir_diff, dist(mean_dir(n1, s), mean_dir(n2, t)));
    }
    return rep;
}

double tv_distance(const DiscreteMeasure& m1, const DiscreteMeasure& m2, double match_tol) {
    require(m1.dim() == m2.dim() || m1.size() == 0 || m2.size() == 0,
            "measures live on different spaces");
    std::vector<char> used(m2.size(), 0);
    StableSum acc;
    for (size_t i = 0; i < m1.size(); ++i) {
        const Vec& p = m1.point(i);
        double tol = match_tol * (1.0 + norm(p));
        int best = -1;
        double bd = tol;
        for (size_t j = 0; j < m2.size(); ++j) {
            if (used[j]) continue;
            double d = dist(p, m2.point(j));
            if (d <= bd) {
                bd = d;
                best = static_cast<int>(j);
            }
        }
        if (best >= 0) {
            used[best] = 1;
            acc.add(std::abs(m1.weight(i) - m2.weight(best)));
        } else {
            acc.add(m1.weight(i));
        }
    }
    for (size_t j = 0; j < m2.size(); ++j)
        if (!used[j]) acc.add(m2.weight(j));
    return acc.value();
}

// ---------------------------------------------------------------- battery

std::vector<BatteryMember> default_battery(int spatial_dim, int zdim) {
    require(spatial_dim >= 1 && zdim >= 1, "battery needs positive dimensions");
    std::vector<BatteryMember> out;

    // sampled pairs for the Lipschitz normalization, one fixed draw
    Rng rng(0x0badf00dull);
    std::vector<std::pair<Vec, Vec>> pairs;
    for (int i = 0; i < 1500; ++i) pairs.emplace_back(rng.ball(zdim), rng.ball(zdim));

    auto scaled_member = [&](std::string name, const std::string& id) {
        Integrand f = catalog(id);
        LipNorms ln = lipschitz_norms(f, pairs);
        double denom = std::max(1.0, ln.sup_T + ln.lip_T);
        return BatteryMember{std::move(name), nullptr, std::move(f), 1.0 / denom};
    };

    out.push_back({"const", nullptr, catalog("const:1"), 1.0});
    out.push_back(scaled_member("abs", "abs"));
    out.push_back(scaled_member("area", "area"));
    out.push_back(scaled_member("homdir+", "homdir:0.5"));
    out.push_back(scaled_member("homdir-", "homdir:-0.5"));
    out.push_back(scaled_member("dist1", "dist:1"));

    // spatial hats of width 1/4 along the first coordinate, amplitude 1/5:
    // sup 0.2, Lipschitz constant 0.8
    for (int m = 0; m < 4; ++m) {
        double cm = (2.0 * m + 1.0) / 8.0;
        auto hatfun = [cm](std::span<const double> x) {
            return 0.2 * std::max(0.0, 1.0 - 4.0 * std::abs(x[0] - cm));
        };
        BatteryMember bc{"hat" + std::to_string(m) + "*const", hatfun, catalog("const:1"), 1.0};
        out.push_back(std::move(bc));
        BatteryMember ba = scaled_member("hat" + std::to_string(m) + "*abs", "abs");
        ba.eta = hatfun;
        out.push_back(std::move(ba));
    }
    return out;
}

double ym_distance(const YoungTriple& a, const YoungTriple& b,
                   const std::vector<BatteryMember>& battery) {
    require(!battery.empty(), "empty test battery");
    double worst = 0;
    for (const auto& m : battery) {
        PairOptions opt;
        opt.eta = m.eta;
        // the pairing is linear in the integrand, so the normalization scale
        // multiplies outside
        double va = m.psi_scale * pair_integral(a, m.psi, opt);
        double vb = m.psi_scale * pair_integral(b, m.psi, opt);
        worst = std::max(worst, std::abs(va - vb));
    }
    return worst;
}

} // namespace ym
