// Command-line front end: scenario gallery runs, lamination envelopes,
// bounded-Lipschitz distances, triple estimation and characterisation
// verification. Exit 0 when every asserted tolerance passes, 1 on a
// tolerance failure (with a per-check report), 2 on usage errors.

#include "ymlab/convexity.hpp"
#include "ymlab/io.hpp"
#include "ymlab/scenario.hpp"
#include "ymlab/transport.hpp"
#include "ymlab/young.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

using nlohmann::json;
using namespace ym;

namespace {

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    json j;
    in >> j;
    return j;
}

Vec to_vec(const json& j) { return j.get<Vec>(); }

DiscreteMeasure load_measure(const json& j) {
    require(j.contains("points") && j.contains("weights"), "measure needs points and weights");
    auto pts = j["points"];
    auto ws = j["weights"];
    require(pts.size() == ws.size() && !pts.empty(), "points and weights must align");
    DiscreteMeasure m(static_cast<int>(pts[0].size()));
    for (size_t i = 0; i < pts.size(); ++i) m.add(to_vec(pts[i]), ws[i].get<double>());
    return m;
}

void print_checks(const std::vector<CheckRow>& checks) {
    for (const CheckRow& c : checks)
        std::printf("  [%s] %-52s measured=% .6e tol=% .6e\n", c.pass ? "ok" : "FAIL",
                    c.name.c_str(), c.measured, c.tolerance);
}

int run_scenario_cmd(const std::string& id, const std::string& config_path,
                     const std::string& out_dir) {
    ScenarioConfig cfg;
    cfg.id = id;
    if (!config_path.empty()) {
        json j = load_json(config_path);
        if (j.contains("resolution")) cfg.resolution = j["resolution"].get<int>();
        if (j.contains("quad_res")) cfg.quad_res = j["quad_res"].get<int>();
        if (j.contains("jvalues")) cfg.jvalues = j["jvalues"].get<std::vector<double>>();
        if (j.contains("spec_id")) cfg.spec_id = j["spec_id"].get<std::string>();
        if (j.contains("tol")) cfg.tol = j["tol"].get<double>();
        if (j.contains("seed")) cfg.seed = j["seed"].get<uint64_t>();
        if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
    }
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    ScenarioReport rep = run_scenario(cfg);
    std::printf("scenario %s: %s\n", rep.id.c_str(), rep.pass ? "PASS" : "FAIL");
    print_checks(rep.checks);
    for (const std::string& n : rep.notes) std::printf("  note: %s\n", n.c_str());
    if (!cfg.out_dir.empty()) std::printf("  reports written to %s\n", cfg.out_dir.c_str());
    return rep.pass ? 0 : 1;
}

int run_envelope_cmd(double k, double H, int nodes, int dirs, int iters, double tol_change,
                     const std::string& out_path) {
    Integrand f = catalog("muller_gk:" + std::to_string(k));
    MatrixGrid start = MatrixGrid::sample(f, H, nodes);
    EnvelopeParams prm;
    prm.max_iters = iters;
    prm.tol_change = tol_change;
    EnvelopeResult res = lamination_envelope(f, start, rank_one_directions(dirs), prm);
    std::printf("envelope muller_gk:%g  H=%g nodes=%d dirs=%d\n", k, H, nodes, dirs);
    std::printf("  center value   % .10e\n", res.grid.center_value());
    std::printf("  f(center)      % .10e\n", start.center_value());
    std::printf("  iterations     %d (%s)\n", res.iters, res.converged ? "converged" : "cap hit");
    std::printf("  final change   % .3e\n", res.final_change);
    std::printf("  clamp rate     %.3f%s\n", res.clamp_rate,
                res.clamp_warning ? "  (boundary-dominated: widen the box)" : "");
    if (!out_path.empty()) {
        json j = {{"k", k},
                  {"H", H},
                  {"nodes", nodes},
                  {"center_value", res.grid.center_value()},
                  {"iters", res.iters},
                  {"converged", res.converged},
                  {"final_change", res.final_change},
                  {"clamp_rate", res.clamp_rate},
                  {"change_history", res.change_history}};
        std::ofstream out(out_path);
        out << j.dump(2) << "\n";
        std::printf("  wrote %s\n", out_path.c_str());
    }
    return res.converged ? 0 : 1;
}

int run_distance_cmd(const std::string& m1_path, const std::string& m2_path,
                     const std::string& metric) {
    DiscreteMeasure m1 = load_measure(load_json(m1_path));
    DiscreteMeasure m2 = load_measure(load_json(m2_path));
    FiniteMetricSpace space;
    if (metric.empty() || metric == "euclid") {
        std::vector<Vec> pts;
        for (size_t i = 0; i < m1.size(); ++i) pts.push_back(m1.point(i));
        for (size_t i = 0; i < m2.size(); ++i)
            if (space.locate(m2.point(i)) < 0) pts.push_back(m2.point(i));
        space = FiniteMetricSpace::euclidean(pts);
    } else {
        json j = load_json(metric);
        for (const auto& p : j["points"]) space.points.push_back(to_vec(p));
        for (const auto& row : j["dist"])
            space.dist.push_back(row.get<std::vector<double>>());
        space.validate();
    }
    TransportDiagnostics diag;
    double d = lip_dual_distance(m1, m2, space, &diag);
    std::printf("distance = %.12f\n", d);
    std::printf("  L* = %.6f, augmentations = %d, duality gap = %.3e\n", diag.best_L,
                diag.augmentations, diag.duality_gap);
    if (m1.size() == 1 && m2.size() == 1 && m1.weight(0) == 1.0 && m2.weight(0) == 1.0) {
        double t = dist(m1.point(0), m2.point(0));
        std::printf("  two-point closed form 2t/(2+t) = %.12f  (t = %.6f)\n",
                    2.0 * t / (2.0 + t), t);
    }
    return diag.duality_gap <= 1e-7 ? 0 : 1;
}

SampledSequence load_sequence(const json& j) {
    SampledSequence seq;
    seq.grid = line_grid(j.at("cells").get<int>());
    seq.zdim = j.at("zdim").get<int>();
    auto pts = j.at("points");
    auto ws = j.at("weights");
    require(pts.size() == ws.size(), "points and weights must align");
    seq.mu = DiscreteMeasure(1);
    for (size_t i = 0; i < pts.size(); ++i) seq.mu.add(to_vec(pts[i]), ws[i].get<double>());
    seq.jvalues = j.at("jvalues").get<std::vector<double>>();
    for (const auto& fj : j.at("fields")) {
        std::vector<Vec> f;
        for (const auto& v : fj) f.push_back(to_vec(v));
        seq.fields.push_back(std::move(f));
    }
    seq.check();
    return seq;
}

int run_estimate_cmd(const std::string& seq_path, const std::string& spec_name, double r_cut) {
    SampledSequence seq = load_sequence(load_json(seq_path));
    SpecParams sp;
    sp.mag_min = r_cut;
    auto spec = make_named_spec(spec_name, seq.zdim, sp);
    auto registry = std::make_shared<AtomRegistry>();
    EstimateParams prm;
    prm.R_cut = r_cut;
    YoungTriple nu = estimate(seq, spec, registry, prm);
    std::printf("estimate: %zu fields on %d cells (spec %s, cut %g)\n", seq.fields.size(),
                nu.grid.cell_count(), spec_name.c_str(), r_cut);
    std::printf("  oscillation mass  %.12f\n", nu.mu_mass());
    std::printf("  concentration     %.12f over %zu atoms\n", nu.conc_mass(), nu.conc.size());
    std::printf("  boundary atoms    %zu\n", registry->size());
    std::printf("  pair with |z|     %.12f\n", pair_integral(nu, catalog("abs")));
    return nu.undefined_fibers() == 0 ? 0 : 1;
}

int run_verify_cmd(const std::string& triple_path, const std::string& u_path) {
    json tj = load_json(triple_path);
    auto spec = make_named_spec(tj.value("spec", "sphere"), tj.at("zdim").get<int>(),
                                SpecParams{});
    auto registry = std::make_shared<AtomRegistry>();

    YoungTriple nu;
    nu.grid = line_grid(tj.at("cells").get<int>());
    nu.zdim = tj.at("zdim").get<int>();
    nu.cell_mass = tj.at("cell_mass").get<Vec>();
    for (const auto& oj : tj.at("osc")) {
        DiscreteMeasure fib(nu.zdim);
        auto pts = oj.at("points");
        auto ws = oj.at("weights");
        for (size_t i = 0; i < pts.size(); ++i) fib.add(to_vec(pts[i]), ws[i].get<double>());
        nu.osc.emplace_back(std::move(fib));
    }
    nu.conc = DiscreteMeasure(1);
    if (tj.contains("conc")) {
        for (const auto& cj : tj["conc"]) {
            nu.conc.add({cj.at("x").get<double>()}, cj.at("mass").get<double>());
            Vec witness = cj.contains("witness") ? to_vec(cj["witness"])
                                                 : scaled(Vec(nu.zdim, 1.0), 1e6);
            int id = registry->classify(witness, *spec);
            DiscreteMeasure ang(1);
            ang.add({static_cast<double>(id)}, 1.0);
            nu.angle.push_back(ang);
        }
    }
    nu.spec = spec;
    nu.registry = registry;

    json uj = load_json(u_path);
    PiecewiseAffineField u;
    u.grid = nu.grid;
    u.zdim = nu.zdim;
    for (const auto& s : uj.at("slopes")) u.slope.push_back(to_vec(s));
    if (uj.contains("jumps"))
        for (const auto& jp : uj["jumps"])
            u.jumps.push_back({jp.at("x").get<double>(), to_vec(jp.at("v"))});

    std::vector<Integrand> battery = {catalog("abs"), catalog("area"), catalog("dist:1")};
    CharacterisationReport rep = verify_characterisation(nu, u, battery);
    std::printf("characterisation: %s\n", rep.pass ? "PASS" : "FAIL");
    std::printf("  finite            %s\n", rep.finite ? "yes" : "no");
    std::printf("  min cell slack    % .6e\n", rep.min_cell_slack);
    std::printf("  min singular slack% .6e\n", rep.min_singular_slack);
    std::printf("  barycentre gap    % .6e\n", rep.barycentre_gap);
    print_checks(rep.per_integrand);
    return rep.pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"generalised Young measure laboratory"};
    app.require_subcommand(1);

    auto* sc = app.add_subcommand("scenario", "run a gallery scenario");
    std::string sc_id, sc_config, sc_out;
    sc->add_option("id", sc_id, "scenario id")->required();
    sc->add_option("--config", sc_config, "config JSON path");
    sc->add_option("--out", sc_out, "report output directory");

    auto* env = app.add_subcommand("envelope", "iterate a rank-one lamination envelope");
    double env_k = 1.0, env_H = 2.0, env_tol = 1e-4;
    int env_nodes = 21, env_dirs = 24, env_iters = 64;
    std::string env_out;
    env->add_option("--k", env_k, "coupling constant of the target integrand");
    env->add_option("--grid", env_H, "box half-width");
    env->add_option("--nodes", env_nodes, "nodes per axis (odd)");
    env->add_option("--dirs", env_dirs, "rank-one direction count");
    env->add_option("--iters", env_iters, "sweep cap");
    env->add_option("--tol-change", env_tol, "sweep-change stop threshold");
    env->add_option("--out", env_out, "write a JSON summary here");

    auto* dc = app.add_subcommand("distance", "bounded-Lipschitz distance of two measures");
    std::string dc_m1, dc_m2, dc_metric;
    dc->add_option("--m1", dc_m1, "first measure JSON")->required();
    dc->add_option("--m2", dc_m2, "second measure JSON")->required();
    dc->add_option("--metric", dc_metric, "metric space JSON, or 'euclid'");

    auto* es = app.add_subcommand("estimate", "histogram triple of a sampled sequence");
    std::string es_seq, es_spec = "sphere";
    double es_cut = 1e3;
    es->add_option("--seq", es_seq, "sequence JSON")->required();
    es->add_option("--spec", es_spec, "compactification name");
    es->add_option("--cut", es_cut, "concentration cutoff (and spec mag_min)");

    auto* vc = app.add_subcommand("verify-characterisation",
                                  "inequality battery for a triple against a field");
    std::string vc_triple, vc_u;
    vc->add_option("--triple", vc_triple, "triple JSON")->required();
    vc->add_option("--u", vc_u, "piecewise affine field JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 2;
    }

    try {
        if (sc->parsed()) return run_scenario_cmd(sc_id, sc_config, sc_out);
        if (env->parsed())
            return run_envelope_cmd(env_k, env_H, env_nodes, env_dirs, env_iters, env_tol,
                                    env_out);
        if (dc->parsed()) return run_distance_cmd(dc_m1, dc_m2, dc_metric);
        if (es->parsed()) return run_estimate_cmd(es_seq, es_spec, es_cut);
        if (vc->parsed()) return run_verify_cmd(vc_triple, vc_u);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
