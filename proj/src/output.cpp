#include "pointstokes/driver.hpp"

#include "pointstokes/error.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace pointstokes {

namespace {

std::string format_double(double v)
{
  if (std::isnan(v))
    return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* const records_header =
  "iteration,ndof,estimator,error_grad,error_pressure,effectivity,error_total,num_triangles,"
  "h_max,min_angle";

std::vector<std::string> split_csv(const std::string& line)
{
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ','))
    out.push_back(cell);
  return out;
}

double parse_double(const std::string& s)
{
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str())
    throw Error("records csv: cannot parse number '" + s + "'");
  return v;
}

nlohmann::json nullable(double v)
{
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

} // namespace

void write_records_csv(std::span<const ConvergenceRecord> records, std::ostream& out)
{
  out << records_header << '\n';
  for (const auto& r : records) {
    out << r.iteration << ',' << r.ndof << ',' << format_double(r.estimator) << ','
        << format_double(r.error_grad) << ',' << format_double(r.error_pressure) << ','
        << format_double(r.effectivity) << ',' << format_double(r.error_total) << ','
        << r.num_triangles << ',' << format_double(r.h_max) << ',' << format_double(r.min_angle)
        << '\n';
  }
}

std::vector<ConvergenceRecord> read_records_csv(std::istream& in)
{
  std::string line;
  if (!std::getline(in, line))
    throw Error("records csv: missing header");
  const auto header = split_csv(line);
  auto column = [&](const std::string& name) -> int {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name)
        return static_cast<int>(i);
    return -1;
  };
  const int c_iter = column("iteration"), c_ndof = column("ndof"), c_est = column("estimator");
  if (c_iter < 0 || c_ndof < 0 || c_est < 0)
    throw Error("records csv: header must contain iteration, ndof and estimator");
  const int c_grad = column("error_grad"), c_pres = column("error_pressure"),
            c_eff = column("effectivity"), c_total = column("error_total"),
            c_tri = column("num_triangles"), c_h = column("h_max"), c_angle = column("min_angle");

  std::vector<ConvergenceRecord> records;
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size())
      throw Error("records csv: row has " + std::to_string(cells.size()) + " fields, expected " +
                  std::to_string(header.size()));
    ConvergenceRecord r;
    r.iteration = static_cast<int>(parse_double(cells[c_iter]));
    r.ndof = static_cast<long long>(parse_double(cells[c_ndof]));
    r.estimator = parse_double(cells[c_est]);
    if (c_grad >= 0)
      r.error_grad = parse_double(cells[c_grad]);
    if (c_pres >= 0)
      r.error_pressure = parse_double(cells[c_pres]);
    if (c_eff >= 0)
      r.effectivity = parse_double(cells[c_eff]);
    if (c_total >= 0)
      r.error_total = parse_double(cells[c_total]);
    else if (c_grad >= 0 && c_pres >= 0)
      r.error_total = r.error_grad + r.error_pressure;
    if (c_tri >= 0)
      r.num_triangles = static_cast<int>(parse_double(cells[c_tri]));
    if (c_h >= 0)
      r.h_max = parse_double(cells[c_h]);
    if (c_angle >= 0)
      r.min_angle = parse_double(cells[c_angle]);
    records.push_back(r);
  }
  return records;
}

void write_vtk(const DiscreteSolution& solution, const IndicatorField& indicators, std::ostream& out)
{
  const Mesh& mesh = solution.velocity_space->mesh();
  const FeSpace& vspace = *solution.velocity_space;
  const FeSpace& pspace = *solution.pressure_space;
  const int nv = mesh.num_vertices();
  const int nt = mesh.num_triangles();

  out << "# vtk DataFile Version 3.0\n";
  out << "pointstokes solution\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << nv << " double\n";
  for (const auto& v : mesh.vertices())
    out << format_double(v.x()) << ' ' << format_double(v.y()) << " 0\n";
  out << "CELLS " << nt << ' ' << 4 * nt << '\n';
  for (const auto& t : mesh.triangles())
    out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "CELL_TYPES " << nt << '\n';
  for (int t = 0; t < nt; ++t)
    out << "5\n";

  // Vertex pressure: nodal value for continuous spaces, area-weighted
  // average of the incident cells for P0.
  std::vector<double> pressure(nv, 0.0);
  if (pspace.continuous()) {
    for (int v = 0; v < nv; ++v)
      pressure[v] = solution.pressure[v];
  } else {
    for (int v = 0; v < nv; ++v) {
      double weight = 0.0, sum = 0.0;
      for (int t : mesh.vertex_triangles(v)) {
        weight += mesh.area(t);
        sum += mesh.area(t) * solution.pressure[t];
      }
      pressure[v] = sum / weight;
    }
  }

  out << "POINT_DATA " << nv << '\n';
  out << "VECTORS velocity double\n";
  for (int v = 0; v < nv; ++v)
    out << format_double(solution.velocity[vspace.dof(v, 0)]) << ' '
        << format_double(solution.velocity[vspace.dof(v, 1)]) << " 0\n";
  out << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
  for (int v = 0; v < nv; ++v)
    out << format_double(pressure[v]) << '\n';

  out << "CELL_DATA " << nt << '\n';
  out << "SCALARS indicator double 1\nLOOKUP_TABLE default\n";
  for (int t = 0; t < nt; ++t)
    out << format_double(t < static_cast<int>(indicators.elements.size())
                           ? indicators.elements[t].total()
                           : 0.0)
        << '\n';
  if (!pspace.continuous()) {
    out << "SCALARS pressure_cell double 1\nLOOKUP_TABLE default\n";
    for (int t = 0; t < nt; ++t)
      out << format_double(solution.pressure[t]) << '\n';
  }
}

nlohmann::json summarize(const ProblemConfig& config, std::span<const ConvergenceRecord> records)
{
  nlohmann::json s;
  s["config"] = config_to_json(config);
  s["iterations"] = records.size();
  if (records.empty())
    return s;
  const auto& last = records.back();
  s["final_ndof"] = last.ndof;
  s["final_estimator"] = last.estimator;
  s["final_error"] = nullable(last.error_total);
  s["final_effectivity"] = nullable(last.effectivity);
  s["wall_time_seconds"] = last.wall_time;
  const int window = default_rate_window(records);
  s["rate_window"] = window;
  s["estimator_slope"] = nullptr;
  s["error_slope"] = nullptr;
  if (window >= 3) {
    s["estimator_slope"] = fit_rate(records, RateQuantity::estimator, window);
    if (std::isfinite(last.error_total))
      s["error_slope"] = fit_rate(records, RateQuantity::error_total, window);
  }
  return s;
}

std::vector<ConvergenceRecord> run_and_write(const ProblemConfig& config, bool quiet)
{
  std::filesystem::create_directories(config.output_dir);
  auto open = [&](const std::string& name) {
    std::ofstream f(config.output_dir / name);
    if (!f)
      throw Error("cannot write " + (config.output_dir / name).string());
    return f;
  };

  auto observer = [&](const IterationState& state) {
    const auto& r = state.record;
    if (config.write_indicators) {
      auto f = open("indicators_" + std::to_string(r.iteration) + ".csv");
      write_indicators_csv(state.indicators, f);
    }
    if (config.write_vtk) {
      auto f = open("mesh_" + std::to_string(r.iteration) + ".vtk");
      write_vtk(state.solution, state.indicators, f);
    }
    if (!quiet) {
      std::printf("iter %3d  ndof %8lld  estimator %.6e", r.iteration, r.ndof, r.estimator);
      if (std::isfinite(r.error_total))
        std::printf("  error %.6e  effectivity %.3f", r.error_total, r.effectivity);
      std::printf("\n");
      std::fflush(stdout);
    }
  };

  auto write_outputs = [&](const std::vector<ConvergenceRecord>& records, const char* aborted) {
    {
      auto f = open("records.csv");
      write_records_csv(records, f);
    }
    auto summary = summarize(config, records);
    if (aborted)
      summary["aborted"] = aborted;
    auto f = open("summary.json");
    f << summary.dump(2) << '\n';
  };
  try {
    const auto records = run(config, observer);
    write_outputs(records, nullptr);
    return records;
  } catch (const RunAborted& e) {
    write_outputs(e.records, e.what());
    throw;
  }
}

} // namespace pointstokes
