#include "pointstokes/exact.hpp"

#include "pointstokes/error.hpp"
#include "pointstokes/quadrature.hpp"

#include <cmath>
#include <iostream>
#include <numbers>

namespace pointstokes {

namespace {

constexpr double inv_four_pi = 0.25 / std::numbers::pi;
constexpr double inv_two_pi = 0.5 / std::numbers::pi;

} // namespace

StokesletValue stokeslet_eval(const StokesletField& field, const Point& x)
{
  StokesletValue out;
  for (const auto& s : field.sources) {
    const Eigen::Vector2d r = x - s.point;
    const double r2 = r.squaredNorm();
    if (!(r2 > 0.0))
      throw Error("stokeslet_eval: evaluation point coincides with a source");
    const Eigen::Vector2d& f = s.force;
    const double rf = r.dot(f);
    const double log_r = 0.5 * std::log(r2);

    out.velocity += -inv_four_pi * (log_r * f - (rf / r2) * r);
    out.pressure += inv_two_pi * rf / r2;
    // d_j u_i = -1/(4pi) (f_i r_j - delta_ij r.f - r_i f_j + 2 r_i r_j r.f / r^2) / r^2
    Eigen::Matrix2d g = f * r.transpose() - r * f.transpose() - rf * Eigen::Matrix2d::Identity() +
                        (2.0 * rf / r2) * (r * r.transpose());
    out.gradient += (-inv_four_pi / r2) * g;
  }
  return out;
}

PdeResidual verify_pde(const StokesletField& field, const Point& x, double step)
{
  for (const auto& s : field.sources)
    if ((x - s.point).norm() < 10.0 * step)
      throw Error("verify_pde: evaluation point too close to a source");

  const StokesletValue center = stokeslet_eval(field, x);
  Eigen::Vector2d laplacian = Eigen::Vector2d::Zero();
  Eigen::Vector2d grad_p = Eigen::Vector2d::Zero();
  for (int j = 0; j < 2; ++j) {
    Point e = Point::Zero();
    e[j] = step;
    const StokesletValue plus = stokeslet_eval(field, x + e);
    const StokesletValue minus = stokeslet_eval(field, x - e);
    laplacian += (plus.gradient.col(j) - minus.gradient.col(j)) / (2.0 * step);
    grad_p[j] = (plus.pressure - minus.pressure) / (2.0 * step);
  }
  PdeResidual res;
  res.momentum = (-laplacian + grad_p).norm();
  res.divergence = std::abs(center.gradient.trace());
  return res;
}

ExactSolution make_exact_solution(const StokesletField& field)
{
  ExactSolution exact;
  exact.velocity = [field](const Point& x) { return stokeslet_eval(field, x).velocity; };
  exact.gradient = [field](const Point& x) { return stokeslet_eval(field, x).gradient; };
  exact.pressure = [field](const Point& x) { return stokeslet_eval(field, x).pressure; };
  for (const auto& s : field.sources)
    exact.singular_points.push_back(s.point);
  return exact;
}

namespace {

/// Quadrature points of triangle t with any point sitting on a singular
/// point moved slightly towards the centroid.
MappedRule element_points(const Mesh& mesh, int t, const QuadRule& rule,
                          const std::vector<Point>& singular, int& shifted)
{
  const auto& tri = mesh.triangle(t);
  MappedRule mapped = map_rule(rule, mesh.vertex(tri[0]), mesh.vertex(tri[1]), mesh.vertex(tri[2]));
  if (singular.empty())
    return mapped;
  const double h = mesh.diameter(t);
  const Point centroid = (mesh.vertex(tri[0]) + mesh.vertex(tri[1]) + mesh.vertex(tri[2])) / 3.0;
  for (auto& x : mapped.points)
    for (const auto& s : singular)
      if ((x - s).norm() <= 1e-13 * h) {
        ++shifted;
        x += 1e-10 * (centroid - x);
        // On very small elements the step above can vanish in rounding.
        if (x == s)
          x.x() = std::nextafter(x.x(), centroid.x() >= s.x() ? 2.0 : -2.0);
      }
  return mapped;
}

} // namespace

double pressure_mean(const DiscreteSolution& solution)
{
  const Mesh& mesh = solution.pressure_space->mesh();
  const QuadRule& rule = triangle_rule(2);
  double integral = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double jac = 2.0 * mesh.area(t);
    for (std::size_t q = 0; q < rule.size(); ++q)
      integral += rule.weights[q] * jac * pressure_value(solution, t, rule.barycentric[q]);
  }
  return integral / mesh.total_area();
}

DiscreteSolution normalize_pressure_mean(const DiscreteSolution& solution)
{
  DiscreteSolution out = solution;
  out.pressure.array() -= pressure_mean(solution);
  return out;
}

ErrorNorms error_norms(const DiscreteSolution& solution, const ExactSolution& exact, double p)
{
  if (!(p >= 1.0))
    throw Error("error_norms: p must be at least 1");
  const Mesh& mesh = solution.velocity_space->mesh();
  const QuadRule& rule = triangle_rule(max_quadrature_degree);
  const int nt = mesh.num_triangles();

  // Pass 1: domain means of both pressures with the same rule.
  double exact_integral = 0.0, discrete_integral = 0.0;
  int shifted = 0;
  for (int t = 0; t < nt; ++t) {
    const MappedRule mapped = element_points(mesh, t, rule, exact.singular_points, shifted);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      exact_integral += mapped.weights[q] * exact.pressure(mapped.points[q]);
      discrete_integral += mapped.weights[q] * pressure_value(solution, t, rule.barycentric[q]);
    }
  }
  if (shifted > 0)
    std::clog << "warning: " << shifted
              << " quadrature points fell on singular points and were moved towards the centroid\n";
  const double area = mesh.total_area();
  const double exact_mean = exact_integral / area;
  const double discrete_mean = discrete_integral / area;

  ErrorNorms norms;
  norms.element_grad.assign(nt, 0.0);
  norms.element_pressure.assign(nt, 0.0);
  double grad_sum = 0.0, pressure_sum = 0.0;
  int shifted_again = 0;
  for (int t = 0; t < nt; ++t) {
    const MappedRule mapped = element_points(mesh, t, rule, exact.singular_points, shifted_again);
    double g = 0.0, e = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto& l = rule.barycentric[q];
      const Eigen::Matrix2d dg = exact.gradient(mapped.points[q]) - velocity_gradient(solution, t, l);
      const double dp = (exact.pressure(mapped.points[q]) - exact_mean) -
                        (pressure_value(solution, t, l) - discrete_mean);
      g += mapped.weights[q] * std::pow(dg.norm(), p);
      e += mapped.weights[q] * std::pow(std::abs(dp), p);
    }
    norms.element_grad[t] = g;
    norms.element_pressure[t] = e;
    grad_sum += g;
    pressure_sum += e;
  }
  norms.grad_error = std::pow(grad_sum, 1.0 / p);
  norms.pressure_error = std::pow(pressure_sum, 1.0 / p);
  norms.total = norms.grad_error + norms.pressure_error;
  return norms;
}

double effectivity(double estimator, double error)
{
  if (!(error > 0.0))
    throw Error("effectivity: error must be positive");
  return estimator / error;
}

} // namespace pointstokes
