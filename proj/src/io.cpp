#include "ymlab/io.hpp"

#include <fstream>

namespace ym {

json json_of(const DiscreteMeasure& m) {
    return {{"dim", m.dim()}, {"points", m.points()}, {"weights", m.weights()}};
}

json json_of(const VectorDiscreteMeasure& m) {
    return {{"dim", m.dim()},
            {"vdim", m.vdim()},
            {"points", m.points()},
            {"vweights", m.vweights()}};
}

json json_of(const GridDescriptor& g) {
    return {{"n", g.n}, {"lo", g.lo}, {"hi", g.hi}, {"cells", g.cells}};
}

json json_of(const SampledSequence& s) {
    return {{"grid", json_of(s.grid)},
            {"mu", json_of(s.mu)},
            {"zdim", s.zdim},
            {"jvalues", s.jvalues},
            {"fields", s.fields}};
}

json json_of(const SpecParams& p) {
    return {{"p", p.p},
            {"mag_min", p.mag_min},
            {"tol_equiv", p.tol_equiv},
            {"witness_cap", p.witness_cap}};
}

json json_of(const CompactificationSpec& spec, const std::string& name) {
    return {{"name", name}, {"zdim", spec.zdim()}, {"params", json_of(spec.params())}};
}

json json_of(const BoundaryAtom& a) {
    json w = json::array();
    for (const auto& wp : a.witness) w.push_back(wp.z);
    return {{"id", a.id}, {"dir", a.dir}, {"gen_limits", a.gen_limits}, {"witness", w}};
}

json json_of(const YoungTriple& nu, const std::string& spec_name) {
    json fibers = json::array();
    for (const auto& f : nu.osc)
        fibers.push_back(f ? json_of(*f) : json(nullptr));
    json angles = json::array();
    for (const auto& a : nu.angle) angles.push_back(json_of(a));
    json atoms = json::array();
    if (nu.registry)
        for (const auto& a : nu.registry->atoms()) atoms.push_back(json_of(a));
    json spec = nu.spec ? json_of(*nu.spec, spec_name) : json(nullptr);
    return {{"grid", json_of(nu.grid)}, {"zdim", nu.zdim},   {"cell_mass", nu.cell_mass},
            {"osc", fibers},            {"conc", json_of(nu.conc)}, {"angle", angles},
            {"spec", spec},             {"atoms", atoms}};
}

json json_of(const PiecewiseAffineField& u) {
    json jumps = json::array();
    for (const auto& jm : u.jumps) jumps.push_back({{"x", jm.x}, {"v", jm.v}});
    return {{"grid", json_of(u.grid)}, {"zdim", u.zdim}, {"slope", u.slope}, {"jumps", jumps}};
}

json json_of(const MatrixGrid& g) {
    return {{"H", g.H}, {"n", g.n}, {"origin", g.origin}, {"values", g.values}};
}

json json_of(const ErrorBudget& b) {
    json terms;
    for (size_t i = 0; i < b.terms.size(); ++i) terms["E" + std::to_string(i + 1)] = b.terms[i];
    return {{"terms", terms}, {"total", b.total}, {"params", b.params}};
}

json json_of(const ScenarioReport& r) {
    json checks = json::array();
    for (const auto& c : r.checks)
        checks.push_back({{"name", c.name},
                          {"measured", c.measured},
                          {"tolerance", c.tolerance},
                          {"pass", c.pass}});
    return {{"id", r.id},
            {"pass", r.pass},
            {"checks", checks},
            {"notes", r.notes},
            {"table_header", r.table_header},
            {"table", r.table_rows}};
}

DiscreteMeasure measure_from_json(const json& j) {
    DiscreteMeasure m(j.at("dim").get<int>());
    auto pts = j.at("points").get<std::vector<Vec>>();
    auto ws = j.at("weights").get<Vec>();
    require(pts.size() == ws.size(), "points/weights size mismatch");
    for (size_t i = 0; i < pts.size(); ++i) m.add(pts[i], ws[i]);
    return m;
}

VectorDiscreteMeasure vmeasure_from_json(const json& j) {
    VectorDiscreteMeasure m(j.at("dim").get<int>(), j.at("vdim").get<int>());
    auto pts = j.at("points").get<std::vector<Vec>>();
    auto ws = j.at("vweights").get<std::vector<Vec>>();
    require(pts.size() == ws.size(), "points/vweights size mismatch");
    for (size_t i = 0; i < pts.size(); ++i) m.add(pts[i], ws[i]);
    return m;
}

GridDescriptor grid_from_json(const json& j) {
    GridDescriptor g;
    g.n = j.at("n").get<int>();
    g.lo = j.at("lo").get<Vec>();
    g.hi = j.at("hi").get<Vec>();
    g.cells = j.at("cells").get<std::vector<int>>();
    return g;
}

SampledSequence sequence_from_json(const json& j) {
    SampledSequence s;
    s.grid = grid_from_json(j.at("grid"));
    s.mu = measure_from_json(j.at("mu"));
    s.zdim = j.at("zdim").get<int>();
    s.jvalues = j.at("jvalues").get<Vec>();
    s.fields = j.at("fields").get<std::vector<std::vector<Vec>>>();
    s.check();
    return s;
}

SpecParams spec_params_from_json(const json& j) {
    SpecParams p;
    p.p = j.value("p", p.p);
    p.mag_min = j.value("mag_min", p.mag_min);
    p.tol_equiv = j.value("tol_equiv", p.tol_equiv);
    p.witness_cap = j.value("witness_cap", p.witness_cap);
    return p;
}

PiecewiseAffineField field_from_json(const json& j) {
    PiecewiseAffineField u;
    u.grid = grid_from_json(j.at("grid"));
    u.zdim = j.at("zdim").get<int>();
    u.slope = j.at("slope").get<std::vector<Vec>>();
    if (j.contains("jumps"))
        for (const auto& jm : j.at("jumps"))
            u.jumps.push_back({jm.at("x").get<double>(), jm.at("v").get<Vec>()});
    return u;
}

MatrixGrid matrix_grid_from_json(const json& j) {
    MatrixGrid g;
    g.H = j.at("H").get<double>();
    g.n = j.at("n").get<int>();
    g.origin = j.at("origin").get<Vec>();
    g.values = j.at("values").get<Vec>();
    require(g.values.size() == g.node_count(), "grid value count mismatch");
    return g;
}

SpecBundle spec_from_json(const json& j) {
    SpecBundle b;
    b.name = j.at("name").get<std::string>();
    SpecParams p = j.contains("params") ? spec_params_from_json(j.at("params")) : SpecParams{};
    b.spec = make_named_spec(b.name, j.at("zdim").get<int>(), p);
    b.registry = std::make_shared<AtomRegistry>();
    return b;
}

YoungTriple triple_from_json(const json& j) {
    YoungTriple nu;
    nu.grid = grid_from_json(j.at("grid"));
    nu.zdim = j.at("zdim").get<int>();
    nu.cell_mass = j.at("cell_mass").get<Vec>();
    for (const auto& f : j.at("osc"))
        nu.osc.push_back(f.is_null() ? std::optional<DiscreteMeasure>{}
                                     : std::optional<DiscreteMeasure>{measure_from_json(f)});
    nu.conc = measure_from_json(j.at("conc"));
    for (const auto& a : j.at("angle")) nu.angle.push_back(measure_from_json(a));
    if (!j.at("spec").is_null()) {
        SpecBundle b = spec_from_json(j.at("spec"));
        nu.spec = b.spec;
        nu.registry = b.registry;
        // replay witnesses in id order so stored angle ids stay valid
        for (const auto& a : j.at("atoms")) {
            auto wit = a.at("witness").get<std::vector<Vec>>();
            require(!wit.empty(), "stored atom without witness points");
            int id = -1;
            for (const auto& z : wit) id = nu.registry->classify(z, *nu.spec);
            require(id == a.at("id").get<int>(), "atom ids changed on reload");
        }
    }
    return nu;
}

json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(in.good(), "cannot open " + path.string());
    json j;
    in >> j;
    return j;
}

void save_json(const std::filesystem::path& path, const json& j) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    require(out.good(), "cannot write " + path.string());
    out << j.dump(2) << '\n';
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<Vec>& rows) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    require(out.good(), "cannot write " + path.string());
    for (size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    out.precision(17);
    for (const auto& r : rows) {
        for (size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
        out << '\n';
    }
}

void write_svg_polyline(const std::filesystem::path& path, const std::string& title,
                        const Vec& xs, const std::vector<std::pair<std::string, Vec>>& series) {
    if (xs.empty() || series.empty()) return;
    const double W = 640, H = 420, ml = 60, mr = 20, mt = 40, mb = 40;
    double xmin = xs[0], xmax = xs[0];
    for (double x : xs) {
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
    }
    bool logy = true;
    double ymin = std::numeric_limits<double>::infinity(), ymax = -ymin;
    for (const auto& [name, ys] : series)
        for (double y : ys) {
            if (y <= 0) logy = false;
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    logy = logy && ymin > 0 && ymax / ymin >= 1e3;
    auto ty = [&](double y) { return logy ? std::log10(y) : y; };
    double tymin = ty(ymin), tymax = ty(ymax);
    if (xmax == xmin) xmax = xmin + 1;
    if (tymax == tymin) tymax = tymin + 1;
    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
    auto py = [&](double y) { return H - mb - (ty(y) - tymin) / (tymax - tymin) * (H - mt - mb); };
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    require(out.good(), "cannot write " + path.string());
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
    out << "<rect width='100%' height='100%' fill='white'/>\n";
    out << "<text x='" << W / 2 << "' y='24' text-anchor='middle' font-size='15'>" << title
        << (logy ? " (log y)" : "") << "</text>\n";
    out << "<line x1='" << ml << "' y1='" << H - mb << "' x2='" << W - mr << "' y2='" << H - mb
        << "' stroke='black'/>\n";
    out << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << H - mb
        << "' stroke='black'/>\n";
    size_t si = 0;
    for (const auto& [name, ys] : series) {
        const char* col = colors[si % 6];
        out << "<polyline fill='none' stroke='" << col << "' stroke-width='1.5' points='";
        for (size_t i = 0; i < xs.size() && i < ys.size(); ++i)
            out << px(xs[i]) << ',' << py(ys[i]) << ' ';
        out << "'/>\n";
        out << "<text x='" << W - mr - 5 << "' y='" << mt + 16 * (si + 1)
            << "' text-anchor='end' font-size='12' fill='" << col << "'>" << name << "</text>\n";
        ++si;
    }
    out << "</svg>\n";
}

void write_report(const std::filesystem::path& dir, const ScenarioReport& rep) {
    std::filesystem::create_directories(dir);
    save_json(dir / "report.json", json_of(rep));
    if (!rep.table_header.empty()) {
        write_csv(dir / "report.csv", rep.table_header, rep.table_rows);
        if (rep.table_rows.size() >= 2 && rep.table_header.size() >= 2) {
            Vec xs;
            std::vector<std::pair<std::string, Vec>> series(rep.table_header.size() - 1);
            for (size_t c = 1; c < rep.table_header.size(); ++c)
                series[c - 1].first = rep.table_header[c];
            for (const auto& r : rep.table_rows) {
                xs.push_back(r.at(0));
                for (size_t c = 1; c < r.size() && c < rep.table_header.size(); ++c)
                    series[c - 1].second.push_back(r[c]);
            }
            write_svg_polyline(dir / "convergence.svg", rep.id, xs, series);
        }
    } else {
        std::vector<Vec> rows;
        for (const auto& c : rep.checks) rows.push_back({c.measured, c.tolerance, double(c.pass)});
        write_csv(dir / "report.csv", {"measured", "tolerance", "pass"}, rows);
    }
}

} // namespace ym
