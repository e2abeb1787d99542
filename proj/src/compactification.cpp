#include "ymlab/compactification.hpp"

#include <algorithm>

namespace ym {

namespace {

constexpr double kRimGuard = 1e-12;

Vec clamp_into_ball(std::span<const double> zh) {
    Vec z(zh.begin(), zh.end());
    double r = norm(z);
    if (r > 1.0 + 1e-9) throw std::domain_error("metric point outside the closed ball");
    double rim = 1.0 - kRimGuard;
    if (r >= rim) {
        double s = rim / r;
        for (auto& c : z) c *= s;
    }
    return z;
}

// sampled sup and Lipschitz constant of a ball function, deterministic seed
void sample_norms(const BallFunction& g, int zdim, uint64_t seed, double& sup,
                  double& lip) {
    Rng rng(seed);
    sup = 0;
    lip = 0;
    const int n_pts = 10000, n_pairs = 5000;
    Vec prev;
    for (int i = 0; i < n_pts; ++i) {
        Vec zh = rng.ball(zdim);
        sup = std::max(sup, std::abs(g.eval({}, zh)));
    }
    for (int i = 0; i < n_pairs; ++i) {
        Vec a = rng.ball(zdim);
        Vec b;
        if (i % 2 == 0) {
            b = rng.ball(zdim);
        } else {
            // short displacement to probe local slopes
            b = a;
            double eps = std::pow(10.0, rng.uniform(-6.0, -1.0));
            for (auto& c : b) c += eps * rng.gauss();
            if (norm(b) >= 1.0) continue;
        }
        double d = dist(a, b);
        if (d < 1e-15) continue;
        lip = std::max(lip, std::abs(g.eval({}, a) - g.eval({}, b)) / d);
    }
}

} // namespace

CompactificationSpec::CompactificationSpec(int zdim,
                                           const std::vector<Integrand>& raw_generators,
                                           SpecParams params)
    : zdim_(zdim), params_(params) {
    require(zdim >= 1, "compactification needs a positive dimension");
    require(raw_generators.size() <= 16, "at most 16 generators are supported");
    require(params.mag_min > 0 && params.tol_equiv > 0, "bad spec parameters");
    for (const auto& raw : raw_generators) {
        require(raw.zdim == 0 || raw.zdim == zdim, "generator dimension mismatch");
        double sup = 0, lip = 0;
        // fixed seed: normalization depends on the generator alone, so
        // stacking in any grouping yields identical scales
        sample_norms(to_ball(raw), zdim, 0xc0ffee11ull, sup, lip);
        // leave generators that already satisfy the bounds untouched so
        // that simple metrics stay exact; otherwise rescale with headroom
        double worst = std::max(sup, lip);
        double scale = worst <= 1.0 ? 1.0 : 1.0 / (worst * 1.02);
        Integrand g = raw;
        if (scale != 1.0) {
            auto inner = raw.eval;
            g.eval = [inner, scale](std::span<const double> x, std::span<const double> z) {
                return scale * inner(x, z);
            };
            if (raw.recession) {
                auto rin = raw.recession;
                g.recession = [rin, scale](std::span<const double> x,
                                           std::span<const double> e) {
                    return scale * rin(x, e);
                };
            }
            g.growth_C = raw.growth_C * scale;
            g.label = raw.label + "~normalized";
        }
        gens_.push_back(g);
        gen_balls_.push_back(to_ball(g));
        scales_.push_back(scale);
        raw_labels_.push_back(raw.label);
        sampled_sup_.push_back(sup * scale);
        sampled_lip_.push_back(lip * scale);
    }
}

CompactificationSpec CompactificationSpec::sphere(int zdim, SpecParams params) {
    return CompactificationSpec(zdim, {}, params);
}

int CompactificationSpec::generator_index(const std::string& raw_label) const {
    for (size_t i = 0; i < raw_labels_.size(); ++i)
        if (raw_labels_[i] == raw_label) return static_cast<int>(i);
    return -1;
}

double CompactificationSpec::metric(std::span<const double> zh,
                                    std::span<const double> wh) const {
    double d = dist(zh, wh);
    if (!gens_.empty()) {
        Vec a = clamp_into_ball(zh), b = clamp_into_ball(wh);
        for (size_t i = 0; i < gens_.size(); ++i)
            d += weight(i) * std::abs(gen_balls_[i].eval({}, a) - gen_balls_[i].eval({}, b));
    }
    return d;
}

std::vector<double> CompactificationSpec::signature(std::span<const double> zh) const {
    Vec z = clamp_into_ball(zh);
    std::vector<double> out(gens_.size());
    for (size_t i = 0; i < gens_.size(); ++i) out[i] = gen_balls_[i].eval({}, z);
    return out;
}

CompactificationSpec stack(const CompactificationSpec& spec,
                           const std::vector<Integrand>& extra) {
    require(spec.generator_count() + extra.size() <= 16,
            "at most 16 generators are supported");
    // old generators keep their indices, weights and normalization; the
    // extras are normalized exactly as a fresh construction would at their
    // new index, so stacking twice equals stacking a concatenated list
    CompactificationSpec out = spec;
    CompactificationSpec tail(spec.zdim(), extra, spec.params());
    for (size_t i = 0; i < tail.gens_.size(); ++i) {
        out.gens_.push_back(tail.gens_[i]);
        out.gen_balls_.push_back(tail.gen_balls_[i]);
        out.scales_.push_back(tail.scales_[i]);
        out.raw_labels_.push_back(tail.raw_labels_[i]);
        out.sampled_sup_.push_back(tail.sampled_sup_[i]);
        out.sampled_lip_.push_back(tail.sampled_lip_[i]);
    }
    return out;
}

AtomValidation validate_atom(const BoundaryAtom& atom, const CompactificationSpec& spec) {
    AtomValidation v;
    auto fail = [&](const std::string& why) {
        v.ok = false;
        v.why = why;
        return v;
    };
    if (atom.witness.empty()) return fail("no witness points");
    for (size_t i = 0; i + 1 < atom.witness.size(); ++i)
        if (!(atom.witness[i].mag < atom.witness[i + 1].mag))
            return fail("witness magnitudes are not strictly increasing");
    if (atom.witness.back().mag < spec.mag_min())
        return fail("largest witness magnitude below mag_min");
    if (std::abs(norm(atom.dir) - 1.0) > 1e-9) return fail("direction is not unit");
    size_t half = atom.witness.size() / 2;
    for (size_t g = 0; g < spec.generator_count(); ++g) {
        double lo = 1e300, hi = -1e300;
        for (size_t i = half; i < atom.witness.size(); ++i) {
            lo = std::min(lo, atom.witness[i].gen_values[g]);
            hi = std::max(hi, atom.witness[i].gen_values[g]);
        }
        if (hi - lo > spec.tol_equiv())
            return fail("generator values are not Cauchy over the witness tail");
    }
    return v;
}

Vec sphere_project(const BoundaryAtom& atom) { return atom.dir; }

void AtomRegistry::refresh(BoundaryAtom& a) const {
    size_t half = a.witness.size() / 2;
    size_t n = a.witness.size() - half;
    Vec dir(a.witness[0].dir.size(), 0.0);
    std::vector<double> lims(a.witness[0].gen_values.size(), 0.0);
    for (size_t i = half; i < a.witness.size(); ++i) {
        for (size_t c = 0; c < dir.size(); ++c) dir[c] += a.witness[i].dir[c];
        for (size_t g = 0; g < lims.size(); ++g) lims[g] += a.witness[i].gen_values[g];
    }
    for (auto& c : dir) c /= static_cast<double>(n);
    for (auto& l : lims) l /= static_cast<double>(n);
    a.dir = normalized(dir);
    a.gen_limits = lims;
}

int AtomRegistry::match(const Vec& dir, const std::vector<double>& gen_values,
                        const CompactificationSpec& spec) const {
    int best = -1;
    double best_d = spec.tol_equiv();
    for (const auto& a : atoms_) {
        double d = dist(dir, a.dir);
        for (size_t g = 0; g < gen_values.size(); ++g)
            d += spec.weight(g) * std::abs(gen_values[g] - a.gen_limits[g]);
        if (d <= best_d) {
            best_d = d;
            best = a.id;
        }
    }
    return best;
}

int AtomRegistry::classify(const Vec& z_raw, const CompactificationSpec& spec) {
    double mag = norm(z_raw);
    if (mag < spec.mag_min())
        throw std::domain_error("classify: |z| below mag_min, not a diverging sample");

    WitnessPoint wp;
    wp.z = z_raw;
    wp.mag = mag;
    wp.dir = scaled(z_raw, 1.0 / mag);
    wp.gen_values = spec.signature(hat(z_raw));

    int id = match(wp.dir, wp.gen_values, spec);
    if (id < 0) {
        BoundaryAtom a;
        a.id = static_cast<int>(atoms_.size());
        a.dir = wp.dir;
        a.gen_limits = wp.gen_values;
        a.witness.push_back(std::move(wp));
        atoms_.push_back(std::move(a));
        return atoms_.back().id;
    }

    BoundaryAtom& a = atoms_[id];
    auto pos = std::lower_bound(a.witness.begin(), a.witness.end(), wp.mag,
                                [](const WitnessPoint& w, double m) { return w.mag < m; });
    // keep magnitudes strictly increasing: drop duplicates
    if (pos != a.witness.end() && pos->mag == wp.mag) return id;
    a.witness.insert(pos, std::move(wp));
    if (static_cast<int>(a.witness.size()) > spec.witness_cap())
        a.witness.erase(a.witness.begin()); // ring buffer keeps the largest
    refresh(a);
    return id;
}

UpperRecessionResult upper_recession(const Integrand& f, const BoundaryAtom& atom,
                                     const CompactificationSpec& spec,
                                     UpperRecessionParams params) {
    require(atom.witness.size() >= 8, "upper_recession needs at least 8 witness points");
    double mag_lo = params.mag_lo > 0 ? params.mag_lo : spec.mag_min();
    require(params.mag_hi > mag_lo, "bad magnitude search range");

    BallFunction tf = to_ball(f);
    UpperRecessionResult out;

    size_t half = atom.witness.size() / 2;
    out.witness_limsup = -1e300;
    for (size_t i = half; i < atom.witness.size(); ++i)
        out.witness_limsup = std::max(out.witness_limsup,
                                      tf.eval({}, hat(atom.witness[i].z)));
    out.value = out.witness_limsup;

    Rng rng(params.seed);
    double llo = std::log(mag_lo), lhi = std::log(params.mag_hi);
    for (const auto& w : atom.witness) {
        (void)w;
        for (int t = 0; t < params.trials_per_witness; ++t) {
            double m = std::exp(rng.uniform(llo, lhi));
            Vec dir = atom.dir;
            for (auto& c : dir) c += params.dir_jitter * rng.gauss();
            double n = norm(dir);
            if (n == 0) continue;
            for (auto& c : dir) c /= n;
            Vec cand = scaled(dir, m);
            // stay in the equivalence class: weighted signature distance
            auto sig = spec.signature(hat(cand));
            double d = dist(dir, atom.dir);
            for (size_t g = 0; g < sig.size(); ++g)
                d += spec.weight(g) * std::abs(sig[g] - atom.gen_limits[g]);
            if (d > spec.tol_equiv()) continue;
            ++out.accepted;
            out.value = std::max(out.value, tf.eval({}, hat(cand)));
        }
    }
    return out;
}

} // namespace ym
