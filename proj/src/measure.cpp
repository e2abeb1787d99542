#include "ymlab/measure.hpp"

#include <algorithm>
#include <cstring>

namespace ym {

namespace {

// Atom identity is tolerance-based. Coordinates are quantized at dedup_tol
// for hashing; once |x|/tol overflows the quantization range the spacing of
// representable doubles exceeds tol, so exact bit equality is the correct
// identity there and we hash the bit pattern instead.
struct QuantCoord {
    bool exact;
    int64_t q;
};

QuantCoord quant(double x, double tol) {
    double s = x / tol;
    if (std::isfinite(s) && std::abs(s) < 4.0e18)
        return {false, static_cast<int64_t>(std::llround(s))};
    int64_t b;
    std::memcpy(&b, &x, sizeof b);
    return {true, b};
}

uint64_t mix(uint64_t h, uint64_t v) {
    return h ^ (v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2));
}

uint64_t key_of(std::span<const int64_t> qs) {
    uint64_t h = 1469598103934665603ull;
    for (int64_t q : qs) h = mix(h, static_cast<uint64_t>(q));
    return h;
}

// Visits the hash keys of every quantization cell that could hold a point
// within tol of p (the +-1 neighborhood per quantized coordinate).
template <typename F>
void for_candidate_keys(const Vec& p, double tol, F&& fn) {
    const int d = static_cast<int>(p.size());
    std::vector<QuantCoord> qc(d);
    for (int i = 0; i < d; ++i) qc[i] = quant(p[i], tol);
    std::vector<int> off(d, -1);
    std::vector<int64_t> qs(d);
    while (true) {
        bool valid = true;
        for (int i = 0; i < d; ++i) {
            if (qc[i].exact) {
                if (off[i] != 0) { valid = false; break; }
                qs[i] = qc[i].q;
            } else {
                qs[i] = qc[i].q + off[i];
            }
        }
        if (valid) fn(key_of(qs));
        int i = 0;
        for (; i < d; ++i) {
            if (off[i] < 1) {
                ++off[i];
                break;
            }
            off[i] = -1;
        }
        if (i == d) break;
    }
}

uint64_t home_key(const Vec& p, double tol) {
    const int d = static_cast<int>(p.size());
    std::vector<int64_t> qs(d);
    for (int i = 0; i < d; ++i) qs[i] = quant(p[i], tol).q;
    return key_of(qs);
}

template <typename Buckets, typename Points>
int find_in(const Buckets& buckets, const Points& pts, const Vec& p, double tol) {
    int found = -1;
    for_candidate_keys(p, tol, [&](uint64_t k) {
        if (found >= 0) return;
        auto it = buckets.find(k);
        if (it == buckets.end()) return;
        for (int idx : it->second) {
            if (dist(pts[idx], p) < tol) {
                found = idx;
                return;
            }
        }
    });
    return found;
}

} // namespace

DiscreteMeasure::DiscreteMeasure(int dim, double dedup_tol)
    : dim_(dim), tol_(dedup_tol) {
    require(dim > 0, "measure dimension must be positive");
    require(dedup_tol > 0, "dedup_tol must be positive");
}

DiscreteMeasure DiscreteMeasure::create(int dim, const std::vector<Vec>& pts,
                                        const std::vector<double>& w,
                                        double dedup_tol) {
    require(pts.size() == w.size(), "points/weights length mismatch");
    DiscreteMeasure m(dim, dedup_tol);
    for (size_t i = 0; i < pts.size(); ++i) m.add(pts[i], w[i]);
    return m;
}

void DiscreteMeasure::insert_raw(const Vec& p, double w) {
    int idx = static_cast<int>(points_.size());
    points_.push_back(p);
    weights_.push_back(w);
    buckets_[home_key(p, tol_)].push_back(idx);
}

void DiscreteMeasure::add(const Vec& p, double w) {
    require(static_cast<int>(p.size()) == dim_, "point dimension mismatch");
    if (w < 0) throw std::invalid_argument("negative weight");
    if (w == 0) return;
    int idx = find(p);
    if (idx >= 0)
        weights_[idx] += w;
    else
        insert_raw(p, w);
}

int DiscreteMeasure::find(const Vec& p) const {
    return find_in(buckets_, points_, p, tol_);
}

double DiscreteMeasure::mass() const {
    return stable_sum(weights_);
}

void DiscreteMeasure::prune(double min_weight) {
    std::vector<Vec> pts;
    std::vector<double> ws;
    for (size_t i = 0; i < points_.size(); ++i) {
        if (weights_[i] >= min_weight) {
            pts.push_back(points_[i]);
            ws.push_back(weights_[i]);
        }
    }
    points_.clear();
    weights_.clear();
    buckets_.clear();
    for (size_t i = 0; i < pts.size(); ++i) insert_raw(pts[i], ws[i]);
}

VectorDiscreteMeasure::VectorDiscreteMeasure(int dim, int vdim, double dedup_tol)
    : dim_(dim), vdim_(vdim), tol_(dedup_tol) {
    require(dim > 0 && vdim > 0, "vector measure dimensions must be positive");
    require(dedup_tol > 0, "dedup_tol must be positive");
}

VectorDiscreteMeasure VectorDiscreteMeasure::create(int dim, int vdim,
                                                    const std::vector<Vec>& pts,
                                                    const std::vector<Vec>& vw,
                                                    double dedup_tol) {
    require(pts.size() == vw.size(), "points/weights length mismatch");
    VectorDiscreteMeasure m(dim, vdim, dedup_tol);
    for (size_t i = 0; i < pts.size(); ++i) m.add(pts[i], vw[i]);
    return m;
}

void VectorDiscreteMeasure::add(const Vec& p, const Vec& vw) {
    require(static_cast<int>(p.size()) == dim_, "point dimension mismatch");
    require(static_cast<int>(vw.size()) == vdim_, "vector weight dimension mismatch");
    int idx = find(p);
    if (idx >= 0) {
        for (int i = 0; i < vdim_; ++i) vweights_[idx][i] += vw[i];
        return;
    }
    idx = static_cast<int>(points_.size());
    points_.push_back(p);
    vweights_.push_back(vw);
    buckets_[home_key(p, tol_)].push_back(idx);
}

int VectorDiscreteMeasure::find(const Vec& p) const {
    return find_in(buckets_, points_, p, tol_);
}

double VectorDiscreteMeasure::total_variation() const {
    StableSum s;
    for (const auto& vw : vweights_) s.add(norm(vw));
    return s.value();
}

ParametrizedMeasure disintegrate(const ProductMeasure& p) {
    require(p.x_dim > 0 && p.z_dim > 0, "product split must be positive");
    require(p.joint.dim() == p.x_dim + p.z_dim, "product dimension mismatch");
    if (p.joint.size() == 0) throw std::runtime_error("empty measure");

    ParametrizedMeasure out;
    out.marginal = DiscreteMeasure(p.x_dim, p.joint.dedup_tol());
    std::vector<std::vector<std::pair<Vec, double>>> groups;
    for (size_t i = 0; i < p.joint.size(); ++i) {
        const Vec& pt = p.joint.point(i);
        Vec x(pt.begin(), pt.begin() + p.x_dim);
        Vec z(pt.begin() + p.x_dim, pt.end());
        int idx = out.marginal.find(x);
        if (idx < 0) {
            idx = static_cast<int>(out.marginal.size());
            groups.emplace_back();
        }
        out.marginal.add(x, p.joint.weight(i));
        groups[idx].emplace_back(std::move(z), p.joint.weight(i));
    }
    for (size_t i = 0; i < groups.size(); ++i) {
        double mi = out.marginal.weight(i);
        DiscreteMeasure f(p.z_dim, p.joint.dedup_tol());
        for (auto& [z, w] : groups[i]) f.add(z, w / mi);
        out.fiber.emplace_back(std::move(f));
    }
    return out;
}

ProductMeasure assemble(const ParametrizedMeasure& pm, int x_dim, int z_dim) {
    require(pm.marginal.dim() == x_dim, "marginal dimension mismatch");
    ProductMeasure out;
    out.x_dim = x_dim;
    out.z_dim = z_dim;
    out.joint = DiscreteMeasure(x_dim + z_dim, pm.marginal.dedup_tol());
    require(pm.fiber.size() == pm.marginal.size(), "fiber table length mismatch");
    for (size_t i = 0; i < pm.marginal.size(); ++i) {
        if (!pm.fiber[i].has_value()) throw std::runtime_error("missing fiber");
        const DiscreteMeasure& f = *pm.fiber[i];
        require(f.dim() == z_dim, "fiber dimension mismatch");
        if (!pm.sub_probability)
            require(std::abs(f.mass() - 1.0) < 1e-9, "fiber is not a probability");
        const Vec& x = pm.marginal.point(i);
        double wx = pm.marginal.weight(i);
        for (size_t k = 0; k < f.size(); ++k) {
            Vec pt(x);
            pt.insert(pt.end(), f.point(k).begin(), f.point(k).end());
            out.joint.add(pt, wx * f.weight(k));
        }
    }
    return out;
}

DiscreteMeasure pushforward(const DiscreteMeasure& m,
                            const std::function<Vec(const Vec&)>& map,
                            int out_dim) {
    DiscreteMeasure out(out_dim, m.dedup_tol());
    for (size_t i = 0; i < m.size(); ++i) out.add(map(m.point(i)), m.weight(i));
    return out;
}

DiscreteMeasure restrict_measure(const DiscreteMeasure& m,
                                 const std::function<bool(const Vec&)>& keep) {
    DiscreteMeasure out(m.dim(), m.dedup_tol());
    for (size_t i = 0; i < m.size(); ++i)
        if (keep(m.point(i))) out.add(m.point(i), m.weight(i));
    return out;
}

double default_eps_sing(const DiscreteMeasure& mu) {
    require(mu.size() > 0, "empty measure");
    std::vector<double> w(mu.weights());
    size_t mid = w.size() / 2;
    std::nth_element(w.begin(), w.begin() + mid, w.end());
    return 1e-3 * w[mid];
}

RadonNikodymResult radon_nikodym(const VectorDiscreteMeasure& l,
                                 const DiscreteMeasure& mu,
                                 double eps_sing) {
    require(l.dim() == mu.dim(), "domain dimension mismatch");
    double eps = eps_sing < 0 ? default_eps_sing(mu) : eps_sing;
    RadonNikodymResult out;
    out.density.assign(mu.size(), Vec(l.vdim(), 0.0));
    out.singular = VectorDiscreteMeasure(l.dim(), l.vdim(), l.dedup_tol());
    for (size_t i = 0; i < l.size(); ++i) {
        int idx = mu.find(l.point(i));
        if (idx >= 0 && mu.weight(idx) > eps) {
            double w = mu.weight(idx);
            for (int c = 0; c < l.vdim(); ++c)
                out.density[idx][c] = l.vweight(i)[c] / w;
        } else {
            out.singular.add(l.point(i), l.vweight(i));
        }
    }
    return out;
}

AtomicSplit atomic_split(const DiscreteMeasure& m, double threshold) {
    AtomicSplit out;
    out.atoms = DiscreteMeasure(m.dim(), m.dedup_tol());
    out.diffuse = DiscreteMeasure(m.dim(), m.dedup_tol());
    for (size_t i = 0; i < m.size(); ++i) {
        (m.weight(i) >= threshold ? out.atoms : out.diffuse)
            .add(m.point(i), m.weight(i));
    }
    return out;
}

double tv_pair(const VectorDiscreteMeasure& eta, const DiscreteMeasure& mu,
               double eps_sing) {
    RadonNikodymResult rn = radon_nikodym(eta, mu, eps_sing);
    StableSum s;
    for (size_t i = 0; i < mu.size(); ++i) {
        double d2 = 0;
        for (double c : rn.density[i]) d2 += c * c;
        s.add(std::sqrt(1.0 + d2) * mu.weight(i));
    }
    s.add(rn.singular.total_variation());
    return s.value();
}

} // namespace ym
