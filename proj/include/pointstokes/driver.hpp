#pragma once

#include "pointstokes/assembly.hpp"
#include "pointstokes/error.hpp"
#include "pointstokes/estimator.hpp"
#include "pointstokes/mesh.hpp"

#include <json.hpp>

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pointstokes {

enum class BoundaryMode
{
  homogeneous,     ///< u = 0 on the boundary
  exact_stokeslet, ///< u = Stokeslet superposition on the boundary
};

enum class RefinementMode
{
  adaptive,
  uniform,
};

struct ProblemConfig
{
  DomainShape domain = DomainShape::unit_square;
  /// When set, the initial mesh is read from this file instead.
  std::optional<std::filesystem::path> mesh_file;
  std::vector<Source> sources;
  double p = 1.4;
  /// Accept p in (1, 4/3], below the range where the continuous problem is
  /// known to be well posed.
  bool extended_p = false;
  Scheme scheme = Scheme::taylor_hood;
  Stabilization stabilization;
  double theta = 0.5;
  int max_iterations = 100;
  long long max_ndof = 200000;
  BoundaryMode bc = BoundaryMode::homogeneous;
  RefinementMode refinement = RefinementMode::adaptive;
  std::filesystem::path output_dir = "out";
  bool write_vtk = true;
  bool write_indicators = true;
};

/// Parses a JSON configuration; unknown keys are rejected.
ProblemConfig config_from_json(const nlohmann::json& j);
ProblemConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const ProblemConfig& config);

/// Throws Error with a descriptive message when the configuration is
/// unusable.
void validate_config(const ProblemConfig& config);

Mesh initial_mesh(const ProblemConfig& config);

struct ConvergenceRecord
{
  int iteration = 0;
  long long ndof = 0;
  int num_triangles = 0;
  double h_max = 0.0;
  double min_angle = 0.0;
  double estimator = 0.0;
  /// NaN when no exact solution is available.
  double error_grad = std::numeric_limits<double>::quiet_NaN();
  double error_pressure = std::numeric_limits<double>::quiet_NaN();
  double error_total = std::numeric_limits<double>::quiet_NaN();
  double effectivity = std::numeric_limits<double>::quiet_NaN();
  int num_marked = 0;
  double wall_time = 0.0; ///< seconds since the start of the run
};

/// Everything known at the end of one loop iteration.
struct IterationState
{
  const ConvergenceRecord& record;
  const Mesh& mesh;
  const DiscreteSolution& solution;
  const IndicatorField& indicators;
  /// Elements selected for refinement; empty on the final iteration.
  std::span<const int> marked;
};

using IterationObserver = std::function<void(const IterationState&)>;

/// A run that failed part way; carries the records completed before the
/// failing iteration.
class RunAborted : public Error
{
public:
  RunAborted(const std::string& what, std::vector<ConvergenceRecord> records)
    : Error(what)
    , records(std::move(records))
  {}
  std::vector<ConvergenceRecord> records;
};

/// SOLVE -> ESTIMATE -> MARK -> REFINE until max_iterations or max_ndof is
/// reached. The refinement mode of the config selects adaptive marking or
/// marking every element.
std::vector<ConvergenceRecord> run(const ProblemConfig& config, const IterationObserver& observer = {});
std::vector<ConvergenceRecord> run_adaptive(ProblemConfig config, const IterationObserver& observer = {});
std::vector<ConvergenceRecord> run_uniform(ProblemConfig config, const IterationObserver& observer = {});

/// One solve on a fixed mesh.
DiscreteSolution solve_on_mesh(const ProblemConfig& config, std::shared_ptr<const Mesh> mesh);

/// Ndof = dim V + dim P, counting every Lagrange node.
long long count_dofs(const Mesh& mesh, Scheme scheme);

enum class RateQuantity
{
  estimator,
  error_total,
  error_grad,
  error_pressure,
};

double record_value(const ConvergenceRecord& record, RateQuantity quantity);

/// Least-squares slope of log(quantity) against log(Ndof) over the last
/// `window` records.
double fit_rate(std::span<const ConvergenceRecord> records, RateQuantity quantity, int window);

/// max(10, number of trailing records within one decade of the final Ndof),
/// capped at the number of records.
int default_rate_window(std::span<const ConvergenceRecord> records);

/// Fraction of triangles whose closure meets the union of the discs.
double localization_fraction(const Mesh& mesh, std::span<const Point> centers, double radius);

/// CSV, one row per iteration. Column order:
/// iteration,ndof,estimator,error_grad,error_pressure,effectivity,
/// error_total,num_triangles,h_max,min_angle
void write_records_csv(std::span<const ConvergenceRecord> records, std::ostream& out);
std::vector<ConvergenceRecord> read_records_csv(std::istream& in);

/// Legacy ASCII VTK with point data velocity/pressure and cell data
/// indicator (eta_T^p).
void write_vtk(const DiscreteSolution& solution, const IndicatorField& indicators, std::ostream& out);

nlohmann::json summarize(const ProblemConfig& config, std::span<const ConvergenceRecord> records);

/// Runs the configured loop and writes records.csv, indicators_<i>.csv,
/// mesh_<i>.vtk and summary.json into config.output_dir.
std::vector<ConvergenceRecord> run_and_write(const ProblemConfig& config, bool quiet);

/// Command-line entry point: run | validate | rates.
int cli_main(int argc, const char* const* argv);

} // namespace pointstokes
