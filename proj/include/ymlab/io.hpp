#pragma once

// JSON round trips for the core types, CSV/SVG report writers, and the
// named-spec plumbing used by the command line tool.

#include "ymlab/scenario.hpp"

#include "json.hpp"

#include <filesystem>

namespace ym {

using json = nlohmann::json;

json json_of(const DiscreteMeasure& m);
json json_of(const VectorDiscreteMeasure& m);
json json_of(const GridDescriptor& g);
json json_of(const SampledSequence& s);
json json_of(const SpecParams& p);
json json_of(const CompactificationSpec& spec, const std::string& name);
json json_of(const BoundaryAtom& a);
json json_of(const YoungTriple& nu, const std::string& spec_name);
json json_of(const PiecewiseAffineField& u);
json json_of(const MatrixGrid& g);
json json_of(const ErrorBudget& b);
json json_of(const ScenarioReport& r);

DiscreteMeasure measure_from_json(const json& j);
VectorDiscreteMeasure vmeasure_from_json(const json& j);
GridDescriptor grid_from_json(const json& j);
SampledSequence sequence_from_json(const json& j);
SpecParams spec_params_from_json(const json& j);
PiecewiseAffineField field_from_json(const json& j);
MatrixGrid matrix_grid_from_json(const json& j);

// rebuilds the named spec and replays atom witnesses through a fresh
// registry, so ids come out in the stored order
struct SpecBundle {
    std::shared_ptr<const CompactificationSpec> spec;
    std::shared_ptr<AtomRegistry> registry;
    std::string name;
};
SpecBundle spec_from_json(const json& j);
YoungTriple triple_from_json(const json& j);

json load_json(const std::filesystem::path& path);
void save_json(const std::filesystem::path& path, const json& j);

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<Vec>& rows);

// one polyline per series over a shared x column; log-scaled y when all
// values are positive and spread over 3+ decades
void write_svg_polyline(const std::filesystem::path& path, const std::string& title,
                        const Vec& xs, const std::vector<std::pair<std::string, Vec>>& series);

// report.json + report.csv (+ convergence.svg when the table is nonempty)
void write_report(const std::filesystem::path& dir, const ScenarioReport& rep);

} // namespace ym
