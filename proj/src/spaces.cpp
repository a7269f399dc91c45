#include "pointstokes/spaces.hpp"

#include "pointstokes/error.hpp"

#include <Eigen/LU>

#include <cmath>

namespace pointstokes {

FeSpace::FeSpace(std::shared_ptr<const Mesh> mesh, SpaceKind kind)
  : mesh_(std::move(mesh))
  , kind_(kind)
{
  const Mesh& m = *mesh_;
  const int nt = m.num_triangles();
  const int nv = m.num_vertices();

  components_ = (kind == SpaceKind::vector_p2 || kind == SpaceKind::vector_p1) ? 2 : 1;

  if (kind == SpaceKind::scalar_p0) {
    nodes_per_element_ = 1;
    element_nodes_.resize(nt);
    node_coords_.resize(nt);
    boundary_node_.assign(nt, 0);
    for (int t = 0; t < nt; ++t) {
      element_nodes_[t] = t;
      const auto& tri = m.triangle(t);
      node_coords_[t] = (m.vertex(tri[0]) + m.vertex(tri[1]) + m.vertex(tri[2])) / 3.0;
    }
    return;
  }

  const bool quadratic = kind == SpaceKind::vector_p2;
  nodes_per_element_ = quadratic ? 6 : 3;
  node_coords_.assign(m.vertices().begin(), m.vertices().end());
  if (quadratic)
    for (int e = 0; e < m.num_edges(); ++e)
      node_coords_.push_back(m.edge_midpoint(e));

  element_nodes_.resize(static_cast<std::size_t>(nt) * nodes_per_element_);
  for (int t = 0; t < nt; ++t) {
    int* nodes = element_nodes_.data() + static_cast<std::size_t>(t) * nodes_per_element_;
    for (int k = 0; k < 3; ++k)
      nodes[k] = m.triangle(t)[k];
    if (quadratic)
      for (int k = 0; k < 3; ++k)
        nodes[3 + k] = nv + m.triangle_edge(t, k);
  }

  boundary_node_.assign(node_coords_.size(), 0);
  for (int e = 0; e < m.num_edges(); ++e) {
    const Edge& edge = m.edge(e);
    if (!edge.on_boundary())
      continue;
    boundary_node_[edge.vertices[0]] = 1;
    boundary_node_[edge.vertices[1]] = 1;
    if (quadratic)
      boundary_node_[nv + e] = 1;
  }
}

std::shared_ptr<const FeSpace> build_space(std::shared_ptr<const Mesh> mesh, SpaceKind kind)
{
  return std::make_shared<const FeSpace>(std::move(mesh), kind);
}

std::array<Eigen::Vector2d, 3> barycentric_gradients(const Mesh& mesh, int t)
{
  const auto& tri = mesh.triangle(t);
  const Point& a = mesh.vertex(tri[0]);
  Eigen::Matrix2d jac;
  jac.col(0) = mesh.vertex(tri[1]) - a;
  jac.col(1) = mesh.vertex(tri[2]) - a;
  // Rows of J^{-1} are the gradients of the reference coordinates.
  const Eigen::Matrix2d inv = jac.inverse();
  const Eigen::Vector2d g1 = inv.row(0).transpose();
  const Eigen::Vector2d g2 = inv.row(1).transpose();
  return {-g1 - g2, g1, g2};
}

LocalBasis eval_basis(const FeSpace& space, int t, const std::array<double, 3>& l)
{
  LocalBasis basis;
  switch (space.kind()) {
    case SpaceKind::scalar_p0:
      basis.size = 1;
      basis.value[0] = 1.0;
      basis.grad[0].setZero();
      return basis;
    case SpaceKind::scalar_p1:
    case SpaceKind::vector_p1: {
      const auto g = barycentric_gradients(space.mesh(), t);
      basis.size = 3;
      for (int i = 0; i < 3; ++i) {
        basis.value[i] = l[i];
        basis.grad[i] = g[i];
      }
      return basis;
    }
    case SpaceKind::vector_p2: {
      const auto g = barycentric_gradients(space.mesh(), t);
      basis.size = 6;
      for (int i = 0; i < 3; ++i) {
        basis.value[i] = l[i] * (2.0 * l[i] - 1.0);
        basis.grad[i] = (4.0 * l[i] - 1.0) * g[i];
      }
      for (int k = 0; k < 3; ++k) {
        const int i = (k + 1) % 3, j = (k + 2) % 3;
        basis.value[3 + k] = 4.0 * l[i] * l[j];
        basis.grad[3 + k] = 4.0 * (l[i] * g[j] + l[j] * g[i]);
      }
      return basis;
    }
  }
  return basis;
}

LocalBasis eval_basis(const FeSpace& space, int t, const Eigen::Vector2d& reference_point)
{
  const double xi = reference_point.x(), eta = reference_point.y();
  return eval_basis(space, t, std::array<double, 3>{1.0 - xi - eta, xi, eta});
}

Eigen::Vector2d velocity_value(const DiscreteSolution& s, int t, const std::array<double, 3>& l)
{
  const FeSpace& space = *s.velocity_space;
  const auto basis = eval_basis(space, t, l);
  const auto nodes = space.element_nodes(t);
  Eigen::Vector2d u = Eigen::Vector2d::Zero();
  for (int i = 0; i < basis.size; ++i)
    for (int c = 0; c < 2; ++c)
      u[c] += s.velocity[space.dof(nodes[i], c)] * basis.value[i];
  return u;
}

Eigen::Matrix2d velocity_gradient(const DiscreteSolution& s, int t, const std::array<double, 3>& l)
{
  const FeSpace& space = *s.velocity_space;
  const auto basis = eval_basis(space, t, l);
  const auto nodes = space.element_nodes(t);
  Eigen::Matrix2d grad = Eigen::Matrix2d::Zero();
  for (int i = 0; i < basis.size; ++i)
    for (int c = 0; c < 2; ++c)
      grad.row(c) += s.velocity[space.dof(nodes[i], c)] * basis.grad[i].transpose();
  return grad;
}

double pressure_value(const DiscreteSolution& s, int t, const std::array<double, 3>& l)
{
  const FeSpace& space = *s.pressure_space;
  const auto basis = eval_basis(space, t, l);
  const auto nodes = space.element_nodes(t);
  double p = 0.0;
  for (int i = 0; i < basis.size; ++i)
    p += s.pressure[nodes[i]] * basis.value[i];
  return p;
}

FieldValue eval_field(const DiscreteSolution& solution, const Point& x)
{
  const Mesh& mesh = solution.velocity_space->mesh();
  const auto hits = locate_point(mesh, x);
  const int t = hits.front();
  auto l = mesh.barycentric(t, x);
  FieldValue out;
  out.velocity = velocity_value(solution, t, l);
  out.pressure = pressure_value(solution, t, l);
  out.one_sided = !solution.pressure_space->continuous() && hits.size() > 1;
  return out;
}

std::vector<std::pair<int, double>> boundary_values(const FeSpace& space, const VectorFunction& g)
{
  if (space.components() != 2)
    throw Error("boundary_values: expected a vector space");
  std::vector<std::pair<int, double>> values;
  for (int n = 0; n < space.num_nodes(); ++n) {
    if (!space.boundary_node(n))
      continue;
    const Eigen::Vector2d v = g(space.node(n));
    if (!std::isfinite(v.x()) || !std::isfinite(v.y()))
      throw Error("boundary_values: boundary data is not finite at node (" +
                  std::to_string(space.node(n).x()) + ", " + std::to_string(space.node(n).y()) +
                  ")");
    values.emplace_back(space.dof(n, 0), v.x());
    values.emplace_back(space.dof(n, 1), v.y());
  }
  return values;
}

Eigen::VectorXd interpolate(const FeSpace& space, const VectorFunction& g)
{
  if (space.components() != 2)
    throw Error("interpolate: expected a vector space");
  Eigen::VectorXd coeffs(space.num_dofs());
  for (int n = 0; n < space.num_nodes(); ++n) {
    const Eigen::Vector2d v = g(space.node(n));
    coeffs[space.dof(n, 0)] = v.x();
    coeffs[space.dof(n, 1)] = v.y();
  }
  return coeffs;
}

Eigen::VectorXd interpolate(const FeSpace& space, const std::function<double(const Point&)>& g)
{
  if (space.components() != 1)
    throw Error("interpolate: expected a scalar space");
  Eigen::VectorXd coeffs(space.num_dofs());
  for (int n = 0; n < space.num_nodes(); ++n)
    coeffs[n] = g(space.node(n));
  return coeffs;
}

} // namespace pointstokes
