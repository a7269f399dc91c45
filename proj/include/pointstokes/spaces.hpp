#pragma once

#include "pointstokes/mesh.hpp"

#include <Eigen/Core>

#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace pointstokes {

enum class SpaceKind
{
  vector_p2,        ///< continuous quadratic velocity
  vector_p1,        ///< continuous linear velocity
  scalar_p1,        ///< continuous linear pressure
  scalar_p0,        ///< discontinuous piecewise-constant pressure
};

/// Lagrange finite element space on a mesh. Nodes are numbered vertices
/// first, then (for P2) edge midpoints keyed by global edge id; P0 has one
/// node per triangle located at its centroid. Vector spaces interleave
/// components: dof = 2 * node + component.
class FeSpace
{
public:
  FeSpace(std::shared_ptr<const Mesh> mesh, SpaceKind kind);

  SpaceKind kind() const { return kind_; }
  const Mesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }

  int components() const { return components_; }
  int nodes_per_element() const { return nodes_per_element_; }
  int num_nodes() const { return static_cast<int>(node_coords_.size()); }
  int num_dofs() const { return num_nodes() * components_; }
  int dof(int node, int component) const { return node * components_ + component; }
  bool continuous() const { return kind_ != SpaceKind::scalar_p0; }

  /// Local-to-global node map of triangle t. For P2, local nodes 3..5 are
  /// the midpoints of local edges 0..2.
  std::span<const int> element_nodes(int t) const
  {
    return {element_nodes_.data() + static_cast<std::size_t>(t) * nodes_per_element_,
            static_cast<std::size_t>(nodes_per_element_)};
  }
  const Point& node(int n) const { return node_coords_[n]; }
  bool boundary_node(int n) const { return boundary_node_[n] != 0; }

private:
  std::shared_ptr<const Mesh> mesh_;
  SpaceKind kind_;
  int components_ = 1;
  int nodes_per_element_ = 1;
  std::vector<int> element_nodes_;
  std::vector<Point> node_coords_;
  std::vector<char> boundary_node_;
};

std::shared_ptr<const FeSpace> build_space(std::shared_ptr<const Mesh> mesh, SpaceKind kind);

/// Values and physical gradients of the scalar local shape functions.
struct LocalBasis
{
  int size = 0;
  std::array<double, 6> value{};
  std::array<Eigen::Vector2d, 6> grad{};
};

/// Shape functions of triangle t at a point given by barycentric coordinates.
LocalBasis eval_basis(const FeSpace& space, int t, const std::array<double, 3>& lambda);

/// Same, at a point (xi, eta) of the reference triangle.
LocalBasis eval_basis(const FeSpace& space, int t, const Eigen::Vector2d& reference_point);

/// Physical gradients of the barycentric coordinates of triangle t.
std::array<Eigen::Vector2d, 3> barycentric_gradients(const Mesh& mesh, int t);

/// Coefficients of a solved pair bound to the spaces they live in.
struct DiscreteSolution
{
  std::shared_ptr<const FeSpace> velocity_space;
  std::shared_ptr<const FeSpace> pressure_space;
  Eigen::VectorXd velocity;
  Eigen::VectorXd pressure;
  double multiplier = 0.0;
};

/// Restrictions of the discrete fields to triangle t, evaluated at a point
/// in barycentric coordinates.
Eigen::Vector2d velocity_value(const DiscreteSolution& s, int t, const std::array<double, 3>& l);
Eigen::Matrix2d velocity_gradient(const DiscreteSolution& s, int t, const std::array<double, 3>& l);
double pressure_value(const DiscreteSolution& s, int t, const std::array<double, 3>& l);

struct FieldValue
{
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();
  double pressure = 0.0;
  /// True when x sits on an inter-element edge of a discontinuous pressure
  /// space; the pressure then comes from the lowest-indexed triangle.
  bool one_sided = false;
};

FieldValue eval_field(const DiscreteSolution& solution, const Point& x);

using VectorFunction = std::function<Eigen::Vector2d(const Point&)>;

/// Nodal interpolation of g at every boundary Lagrange node of a vector
/// space, as (dof, value) pairs sorted by dof.
std::vector<std::pair<int, double>> boundary_values(const FeSpace& space, const VectorFunction& g);

/// Nodal interpolant of g on a vector space (all nodes).
Eigen::VectorXd interpolate(const FeSpace& space, const VectorFunction& g);

/// Nodal interpolant of a scalar function; for P0 the centroid value.
Eigen::VectorXd interpolate(const FeSpace& space, const std::function<double(const Point&)>& g);

} // namespace pointstokes
