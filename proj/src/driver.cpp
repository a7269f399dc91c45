#include "pointstokes/driver.hpp"

#include "pointstokes/error.hpp"
#include "pointstokes/exact.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>

namespace pointstokes {

namespace {

template <class Enum>
Enum parse_enum(const nlohmann::json& j,
                const char* key,
                std::initializer_list<std::pair<const char*, Enum>> options)
{
  const std::string value = j.get<std::string>();
  for (const auto& [name, e] : options)
    if (value == name)
      return e;
  std::string msg = std::string("config: unknown ") + key + " '" + value + "' (expected one of:";
  for (const auto& [name, e] : options)
    msg += std::string(" ") + name;
  throw Error(msg + ")");
}

Point parse_point(const nlohmann::json& j, const char* what)
{
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw Error(std::string("config: ") + what + " must be a pair of numbers");
  return {j[0].get<double>(), j[1].get<double>()};
}

double distance_to_segment(const Point& x, const Point& a, const Point& b)
{
  const Point d = b - a;
  const double s = std::clamp((x - a).dot(d) / d.squaredNorm(), 0.0, 1.0);
  return (x - (a + s * d)).norm();
}

} // namespace

ProblemConfig config_from_json(const nlohmann::json& j)
{
  static const std::set<std::string> known = {
    "domain",     "mesh_file", "sources",    "p",          "extended_p",     "scheme",
    "tau_div",    "tau_T",     "tau_S",      "theta",      "max_iterations", "max_ndof",
    "bc",         "refinement", "output_dir", "write_vtk", "write_indicators"};
  if (!j.is_object())
    throw Error("config: expected a JSON object");
  for (const auto& [key, value] : j.items())
    if (!known.contains(key))
      throw Error("config: unknown key '" + key + "'");

  ProblemConfig c;
  try {
    if (j.contains("domain"))
      c.domain = parse_enum<DomainShape>(j["domain"], "domain",
                                         {{"unit_square", DomainShape::unit_square},
                                          {"l_shape", DomainShape::l_shape}});
    if (j.contains("mesh_file"))
      c.mesh_file = j["mesh_file"].get<std::string>();
    if (j.contains("sources")) {
      for (const auto& s : j["sources"]) {
        Source src;
        src.point = parse_point(s.at("point"), "source point");
        src.force = parse_point(s.at("force"), "source force");
        c.sources.push_back(src);
      }
    }
    c.p = j.value("p", c.p);
    c.extended_p = j.value("extended_p", c.extended_p);
    if (j.contains("scheme"))
      c.scheme = parse_enum<Scheme>(j["scheme"], "scheme",
                                    {{"taylor_hood", Scheme::taylor_hood},
                                     {"stabilized_p1p0", Scheme::stabilized_p1p0}});
    c.stabilization.tau_div = j.value("tau_div", c.stabilization.tau_div);
    c.stabilization.tau_T = j.value("tau_T", c.stabilization.tau_T);
    c.stabilization.tau_S = j.value("tau_S", c.stabilization.tau_S);
    c.theta = j.value("theta", c.theta);
    c.max_iterations = j.value("max_iterations", c.max_iterations);
    c.max_ndof = j.value("max_ndof", c.max_ndof);
    if (j.contains("bc"))
      c.bc = parse_enum<BoundaryMode>(j["bc"], "bc",
                                      {{"homogeneous", BoundaryMode::homogeneous},
                                       {"exact_stokeslet", BoundaryMode::exact_stokeslet}});
    if (j.contains("refinement"))
      c.refinement = parse_enum<RefinementMode>(j["refinement"], "refinement",
                                                {{"adaptive", RefinementMode::adaptive},
                                                 {"uniform", RefinementMode::uniform}});
    if (j.contains("output_dir"))
      c.output_dir = j["output_dir"].get<std::string>();
    c.write_vtk = j.value("write_vtk", c.write_vtk);
    c.write_indicators = j.value("write_indicators", c.write_indicators);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  return c;
}

ProblemConfig load_config(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw Error("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("config " + path.string() + ": " + e.what());
  }
  ProblemConfig config = config_from_json(j);
  if (config.mesh_file && config.mesh_file->is_relative())
    config.mesh_file = path.parent_path() / *config.mesh_file;
  return config;
}

nlohmann::json config_to_json(const ProblemConfig& c)
{
  nlohmann::json j;
  j["domain"] = c.domain == DomainShape::unit_square ? "unit_square" : "l_shape";
  if (c.mesh_file)
    j["mesh_file"] = c.mesh_file->string();
  j["sources"] = nlohmann::json::array();
  for (const auto& s : c.sources)
    j["sources"].push_back({{"point", {s.point.x(), s.point.y()}},
                            {"force", {s.force.x(), s.force.y()}}});
  j["p"] = c.p;
  j["extended_p"] = c.extended_p;
  j["scheme"] = c.scheme == Scheme::taylor_hood ? "taylor_hood" : "stabilized_p1p0";
  j["tau_div"] = c.stabilization.tau_div;
  j["tau_T"] = c.stabilization.tau_T;
  j["tau_S"] = c.stabilization.tau_S;
  j["theta"] = c.theta;
  j["max_iterations"] = c.max_iterations;
  j["max_ndof"] = c.max_ndof;
  j["bc"] = c.bc == BoundaryMode::homogeneous ? "homogeneous" : "exact_stokeslet";
  j["refinement"] = c.refinement == RefinementMode::adaptive ? "adaptive" : "uniform";
  j["output_dir"] = c.output_dir.string();
  j["write_vtk"] = c.write_vtk;
  j["write_indicators"] = c.write_indicators;
  return j;
}

Mesh initial_mesh(const ProblemConfig& config)
{
  if (config.mesh_file)
    return read_mesh(*config.mesh_file);
  return build_initial_mesh(config.domain);
}

void validate_config(const ProblemConfig& c)
{
  const bool in_theory_range = c.p > 4.0 / 3.0 && c.p < 2.0;
  const bool in_extended_range = c.extended_p && c.p > 1.0 && c.p < 2.0;
  if (!std::isfinite(c.p) || !(in_theory_range || in_extended_range))
    throw Error("p outside (4/3, 2)");
  if (c.scheme == Scheme::stabilized_p1p0) {
    if (!(c.stabilization.tau_S > 0.0))
      throw Error("tau_S must be positive for the stabilized scheme");
    if (c.stabilization.tau_div < 0.0 || c.stabilization.tau_T < 0.0)
      throw Error("tau_div and tau_T must be non-negative");
  }
  if (!(c.theta > 0.0 && c.theta < 1.0))
    throw Error("theta must lie in (0, 1)");
  if (c.max_iterations < 0)
    throw Error("max_iterations must be non-negative");
  if (c.max_ndof <= 0)
    throw Error("max_ndof must be positive");
  if (c.sources.empty())
    throw Error("at least one source is required");

  const Mesh mesh = initial_mesh(c);
  for (const auto& s : c.sources) {
    if (!s.point.allFinite() || !s.force.allFinite())
      throw Error("source data must be finite");
    locate_point(mesh, s.point); // throws when outside the domain
    if (c.bc == BoundaryMode::exact_stokeslet) {
      for (const auto& e : mesh.edges())
        if (e.on_boundary() &&
            distance_to_segment(s.point, mesh.vertex(e.vertices[0]), mesh.vertex(e.vertices[1])) <=
              1e-12)
          throw Error("exact_stokeslet boundary data requires sources strictly inside the domain");
    }
  }
}

long long count_dofs(const Mesh& mesh, Scheme scheme)
{
  if (scheme == Scheme::taylor_hood)
    return 2LL * (mesh.num_vertices() + mesh.num_edges()) + mesh.num_vertices();
  return 2LL * mesh.num_vertices() + mesh.num_triangles();
}

DiscreteSolution solve_on_mesh(const ProblemConfig& config, std::shared_ptr<const Mesh> mesh)
{
  auto [velocity, pressure] = build_spaces(mesh, config.scheme);
  SaddleSystem system = config.scheme == Scheme::taylor_hood
                          ? assemble_taylor_hood(velocity, pressure, config.sources)
                          : assemble_stabilized(velocity, pressure, config.sources,
                                                config.stabilization);
  std::vector<std::pair<int, double>> values;
  if (config.bc == BoundaryMode::exact_stokeslet) {
    const StokesletField field{config.sources};
    values = boundary_values(*velocity,
                             [&](const Point& x) { return stokeslet_eval(field, x).velocity; });
  } else {
    values = boundary_values(*velocity, [](const Point&) { return Eigen::Vector2d::Zero(); });
  }
  return solve(apply_dirichlet(system, values));
}

std::vector<ConvergenceRecord> run(const ProblemConfig& config, const IterationObserver& observer)
{
  validate_config(config);
  const auto start = std::chrono::steady_clock::now();
  auto mesh = std::make_shared<const Mesh>(initial_mesh(config));

  EstimatorOptions options;
  options.p = config.p;
  options.sources = config.sources;
  options.tau_div = config.scheme == Scheme::stabilized_p1p0 ? config.stabilization.tau_div : 0.0;

  std::optional<ExactSolution> exact;
  if (config.bc == BoundaryMode::exact_stokeslet)
    exact = make_exact_solution(StokesletField{config.sources});

  std::vector<ConvergenceRecord> records;
  int iteration = 0;
  try {
  for (;; ++iteration) {
    const DiscreteSolution solution = solve_on_mesh(config, mesh);
    const IndicatorField indicators = compute_indicators(solution, options);

    ConvergenceRecord record;
    record.iteration = iteration;
    record.ndof = count_dofs(*mesh, config.scheme);
    const MeshStats stats = mesh_stats(*mesh);
    record.num_triangles = stats.num_triangles;
    record.h_max = stats.h_max;
    record.min_angle = stats.min_angle;
    record.estimator = indicators.global;
    if (exact) {
      const ErrorNorms errors = error_norms(solution, *exact, config.p);
      record.error_grad = errors.grad_error;
      record.error_pressure = errors.pressure_error;
      record.error_total = errors.total;
      if (errors.total > 0.0)
        record.effectivity = effectivity(indicators.global, errors.total);
    }

    const bool last = iteration >= config.max_iterations || record.ndof >= config.max_ndof;
    std::vector<int> marked;
    if (!last) {
      if (config.refinement == RefinementMode::uniform) {
        marked.resize(mesh->num_triangles());
        for (int t = 0; t < mesh->num_triangles(); ++t)
          marked[t] = t;
      } else {
        marked = mark(indicators, config.theta);
      }
    }
    record.num_marked = static_cast<int>(marked.size());
    record.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    records.push_back(record);
    if (observer)
      observer(IterationState{records.back(), *mesh, solution, indicators, marked});
    if (last)
      break;
    mesh = std::make_shared<const Mesh>(refine(*mesh, marked));
  }
  } catch (const RunAborted&) {
    throw;
  } catch (const Error& e) {
    throw RunAborted("iteration " + std::to_string(iteration) + ": " + e.what(),
                     std::move(records));
  }
  return records;
}

std::vector<ConvergenceRecord> run_adaptive(ProblemConfig config, const IterationObserver& observer)
{
  config.refinement = RefinementMode::adaptive;
  return run(config, observer);
}

std::vector<ConvergenceRecord> run_uniform(ProblemConfig config, const IterationObserver& observer)
{
  config.refinement = RefinementMode::uniform;
  return run(config, observer);
}

double record_value(const ConvergenceRecord& r, RateQuantity quantity)
{
  switch (quantity) {
    case RateQuantity::estimator:
      return r.estimator;
    case RateQuantity::error_total:
      return r.error_total;
    case RateQuantity::error_grad:
      return r.error_grad;
    case RateQuantity::error_pressure:
      return r.error_pressure;
  }
  return r.estimator;
}

double fit_rate(std::span<const ConvergenceRecord> records, RateQuantity quantity, int window)
{
  if (window < 3 || static_cast<int>(records.size()) < window)
    throw Error("fit_rate: need at least 3 records in the window");
  const auto tail = records.subspan(records.size() - window);
  double sx = 0.0, sy = 0.0;
  std::vector<double> xs, ys;
  for (const auto& r : tail) {
    const double v = record_value(r, quantity);
    if (!(v > 0.0) || !(r.ndof > 0))
      throw Error("fit_rate: non-positive value in window");
    xs.push_back(std::log(static_cast<double>(r.ndof)));
    ys.push_back(std::log(v));
    sx += xs.back();
    sy += ys.back();
  }
  const double mx = sx / window, my = sy / window;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < window; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0))
    throw Error("fit_rate: Ndof does not vary over the window");
  return sxy / sxx;
}

int default_rate_window(std::span<const ConvergenceRecord> records)
{
  const int n = static_cast<int>(records.size());
  if (n == 0)
    return 0;
  const double floor = static_cast<double>(records.back().ndof) / 10.0;
  int decade = 0;
  for (int i = n - 1; i >= 0 && static_cast<double>(records[i].ndof) >= floor; --i)
    ++decade;
  return std::min(n, std::max(10, decade));
}

double localization_fraction(const Mesh& mesh, std::span<const Point> centers, double radius)
{
  int hits = 0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    bool touches = false;
    for (const auto& c : centers) {
      const auto l = mesh.barycentric(t, c);
      if (l[0] >= 0.0 && l[1] >= 0.0 && l[2] >= 0.0) {
        touches = true;
        break;
      }
      for (int k = 0; k < 3 && !touches; ++k)
        touches = distance_to_segment(c, mesh.vertex(tri[k]), mesh.vertex(tri[(k + 1) % 3])) <= radius;
      if (touches)
        break;
    }
    hits += touches ? 1 : 0;
  }
  return static_cast<double>(hits) / mesh.num_triangles();
}

} // namespace pointstokes
