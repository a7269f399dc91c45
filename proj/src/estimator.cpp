#include "pointstokes/estimator.hpp"

#include "pointstokes/error.hpp"
#include "pointstokes/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace pointstokes {

namespace {

/// Elementwise constant Laplacian of the discrete velocity (zero for P1).
Eigen::Vector2d velocity_laplacian(const DiscreteSolution& s, int t)
{
  const FeSpace& space = *s.velocity_space;
  if (space.kind() != SpaceKind::vector_p2)
    return Eigen::Vector2d::Zero();
  const auto g = barycentric_gradients(space.mesh(), t);
  const auto nodes = space.element_nodes(t);
  std::array<double, 6> lap{};
  for (int i = 0; i < 3; ++i)
    lap[i] = 4.0 * g[i].squaredNorm();
  for (int k = 0; k < 3; ++k)
    lap[3 + k] = 8.0 * g[(k + 1) % 3].dot(g[(k + 2) % 3]);
  Eigen::Vector2d out = Eigen::Vector2d::Zero();
  for (int i = 0; i < 6; ++i)
    for (int c = 0; c < 2; ++c)
      out[c] += s.velocity[space.dof(nodes[i], c)] * lap[i];
  return out;
}

/// Elementwise constant pressure gradient (zero for P0).
Eigen::Vector2d pressure_gradient(const DiscreteSolution& s, int t)
{
  const FeSpace& space = *s.pressure_space;
  if (space.kind() != SpaceKind::scalar_p1)
    return Eigen::Vector2d::Zero();
  const auto g = barycentric_gradients(space.mesh(), t);
  const auto nodes = space.element_nodes(t);
  Eigen::Vector2d out = Eigen::Vector2d::Zero();
  for (int i = 0; i < 3; ++i)
    out += s.pressure[nodes[i]] * g[i];
  return out;
}

Eigen::Vector2d normal_flux(const DiscreteSolution& s, int t, const Point& x, const Point& normal)
{
  const auto l = s.velocity_space->mesh().barycentric(t, x);
  const Eigen::Matrix2d grad = velocity_gradient(s, t, l);
  return grad * normal - pressure_value(s, t, l) * normal;
}

bool on_velocity_node(const DiscreteSolution& s, int t, const Point& x)
{
  const FeSpace& space = *s.velocity_space;
  const double tol = node_tolerance * space.mesh().diameter(t);
  for (int n : space.element_nodes(t))
    if ((space.node(n) - x).norm() <= tol)
      return true;
  return false;
}

} // namespace

IndicatorComponents element_indicator(int t,
                                      const DiscreteSolution& solution,
                                      const EstimatorOptions& options)
{
  const FeSpace& vspace = *solution.velocity_space;
  const Mesh& mesh = vspace.mesh();
  if (solution.pressure_space->mesh_ptr() != vspace.mesh_ptr() ||
      solution.velocity.size() != vspace.num_dofs() ||
      solution.pressure.size() != solution.pressure_space->num_dofs())
    throw Error("element_indicator: solution does not match its spaces");
  if (t < 0 || t >= mesh.num_triangles())
    throw Error("element_indicator: triangle id out of range");

  const double p = options.p;
  const double h = mesh.diameter(t);
  const double area = mesh.area(t);
  IndicatorComponents out;

  const Eigen::Vector2d residual = velocity_laplacian(solution, t) - pressure_gradient(solution, t);
  out.residual = std::pow(h, p) * std::pow(residual.norm(), p) * area;

  const QuadRule& tri_rule = triangle_rule(max_quadrature_degree);
  double div = 0.0;
  for (std::size_t q = 0; q < tri_rule.size(); ++q) {
    const double d = velocity_gradient(solution, t, tri_rule.barycentric[q]).trace();
    div += tri_rule.weights[q] * 2.0 * area * std::pow(std::abs(d), p);
  }
  out.divergence = (1.0 + std::pow(options.tau_div, p)) * div;

  const QuadRule& line_rule = edge_rule(max_quadrature_degree);
  const auto& tri = mesh.triangle(t);
  double jump = 0.0;
  for (int k = 0; k < 3; ++k) {
    const Edge& edge = mesh.edge(mesh.triangle_edge(t, k));
    if (edge.on_boundary())
      continue;
    const int other = edge.triangles[0] == t ? edge.triangles[1] : edge.triangles[0];
    const Point normal = mesh.outward_normal(t, k);
    const auto mapped = map_rule(line_rule, mesh.vertex(tri[(k + 1) % 3]), mesh.vertex(tri[(k + 2) % 3]));
    for (std::size_t q = 0; q < mapped.points.size(); ++q) {
      const Point& x = mapped.points[q];
      const Eigen::Vector2d j =
        normal_flux(solution, t, x, normal) - normal_flux(solution, other, x, normal);
      jump += mapped.weights[q] * std::pow(j.norm(), p);
    }
  }
  out.jump = h * jump;

  for (const auto& source : options.sources) {
    const auto l = mesh.barycentric(t, source.point);
    if (l[0] < -point_tolerance || l[1] < -point_tolerance || l[2] < -point_tolerance)
      continue;
    if (on_velocity_node(solution, t, source.point))
      continue;
    out.dirac += std::pow(h, 2.0 - p) * std::pow(source.force.norm(), p);
  }
  return out;
}

IndicatorField compute_indicators(const DiscreteSolution& solution, const EstimatorOptions& options)
{
  if (!(options.p > 1.0))
    throw Error("compute_indicators: p must exceed 1");
  const int nt = solution.velocity_space->mesh().num_triangles();
  IndicatorField field;
  field.p = options.p;
  field.elements.resize(nt);
  for (int t = 0; t < nt; ++t)
    field.elements[t] = element_indicator(t, solution, options);
  field.global = global_estimator(field);
  return field;
}

double global_estimator(const IndicatorField& field)
{
  double sum = 0.0;
  for (const auto& e : field.elements)
    sum += e.total();
  return std::pow(sum, 1.0 / field.p);
}

std::vector<int> mark(const IndicatorField& field, double theta)
{
  if (field.elements.empty())
    throw Error("mark: empty indicator field");
  if (!(theta > 0.0 && theta < 1.0))
    throw Error("mark: theta must lie in (0, 1)");
  int argmax = 0;
  for (int t = 1; t < static_cast<int>(field.elements.size()); ++t)
    if (field.elements[t].total() > field.elements[argmax].total())
      argmax = t;
  const double threshold = theta * field.elements[argmax].total();
  std::vector<int> marked;
  for (int t = 0; t < static_cast<int>(field.elements.size()); ++t)
    if (field.elements[t].total() > threshold)
      marked.push_back(t);
  if (marked.empty())
    marked.push_back(argmax);
  return marked;
}

void write_indicators_csv(const IndicatorField& field, std::ostream& out)
{
  out << "triangle,residual,jump,divergence,dirac,total\n";
  char line[256];
  for (std::size_t t = 0; t < field.elements.size(); ++t) {
    const auto& e = field.elements[t];
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", t, e.residual, e.jump,
                  e.divergence, e.dirac, e.total());
    out << line;
  }
}

} // namespace pointstokes
