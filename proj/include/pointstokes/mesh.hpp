#pragma once

#include <Eigen/Core>

#include <array>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace pointstokes {

using Point = Eigen::Vector2d;

enum class DomainShape
{
  unit_square,
  l_shape,
};

/// An edge of the triangulation. Triangle ids are stored in increasing order.
struct Edge
{
  std::array<int, 2> vertices{};
  std::array<int, 2> triangles{-1, -1};
  int num_triangles = 0;

  bool on_boundary() const { return num_triangles == 1; }
};

/// Conforming triangulation of a polygon. Immutable after construction;
/// refinement produces a new mesh.
///
/// Local edge k of a triangle joins vertices k+1 and k+2 (mod 3), i.e. it is
/// the edge opposite local vertex k.
class Mesh
{
public:
  /// Builds adjacency and validates orientation, positive area and manifold
  /// edges. Hanging nodes are not detected here; see check_conformity().
  Mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> triangles);

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_triangles() const { return static_cast<int>(triangles_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  const Point& vertex(int v) const { return vertices_[v]; }
  std::span<const Point> vertices() const { return vertices_; }
  const std::array<int, 3>& triangle(int t) const { return triangles_[t]; }
  std::span<const std::array<int, 3>> triangles() const { return triangles_; }
  const Edge& edge(int e) const { return edges_[e]; }
  std::span<const Edge> edges() const { return edges_; }

  /// Global id of local edge k of triangle t.
  int triangle_edge(int t, int k) const { return triangle_edges_[t][k]; }
  const std::array<int, 3>& triangle_edges(int t) const { return triangle_edges_[t]; }
  /// Triangles incident to vertex v, in increasing order.
  std::span<const int> vertex_triangles(int v) const
  {
    return {vertex_triangles_.data() + vertex_offsets_[v],
            vertex_triangles_.data() + vertex_offsets_[v + 1]};
  }

  /// Local index of the edge bisected when t is refined (its longest edge,
  /// ties broken by the lower global edge id).
  int refinement_edge(int t) const { return refinement_edge_[t]; }
  /// Number of bisections separating t from its initial ancestor.
  int generation(int t) const { return generation_[t]; }
  /// Triangle of the previous mesh this one was produced from (or copied
  /// from); -1 for an initial mesh.
  int parent(int t) const { return parent_[t]; }

  double area(int t) const;
  /// diam(T), the longest edge length.
  double diameter(int t) const;
  double edge_length(int e) const;
  Point edge_midpoint(int e) const;
  /// Outward unit normal of local edge k of triangle t.
  Point outward_normal(int t, int k) const;
  /// Barycentric coordinates of x with respect to triangle t.
  std::array<double, 3> barycentric(int t, const Point& x) const;

  double total_area() const;

private:
  friend Mesh refine(const Mesh&, std::span<const int>);

  void build_topology();

  std::vector<Point> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> triangle_edges_;
  std::vector<int> refinement_edge_;
  std::vector<int> generation_;
  std::vector<int> parent_;
  std::vector<int> vertex_offsets_;
  std::vector<int> vertex_triangles_;
};

/// Coarse criss-cross meshes: the unit square (0,1)^2 from 2x2 squares and
/// the L-shape (0,1)^2 \ [0.5,1)x(0,0.5] from three squares.
Mesh build_initial_mesh(DomainShape shape);

/// Reads the ASCII mesh format written by write_mesh() and checks all
/// conformity invariants.
Mesh read_mesh(const std::filesystem::path& path);
Mesh read_mesh(std::istream& in);

/// Plain ASCII format:
///   vertices N
///   x y            (N lines)
///   triangles M
///   a b c          (M lines, 0-based, counterclockwise)
void write_mesh(const Mesh& mesh, std::ostream& out);

/// Conforming bisection: every marked triangle is split across its
/// refinement edge; neighbours are refined recursively until no hanging
/// node remains.
Mesh refine(const Mesh& mesh, std::span<const int> marked);

/// Exhaustive conformity scan. Returns an empty string when the mesh is
/// conforming, otherwise a description of the first violation found.
std::string check_conformity(const Mesh& mesh);

/// Ids of all triangles whose closed set contains x. Throws if there are
/// none.
std::vector<int> locate_point(const Mesh& mesh, const Point& x);

/// Barycentric membership tolerance used by locate_point.
inline constexpr double point_tolerance = 1e-12;

enum class PatchKind
{
  vertex, ///< triangles sharing at least a vertex with T
  edge,   ///< triangles sharing at least an edge with T
};

struct Patch
{
  int center = -1;
  PatchKind kind = PatchKind::vertex;
  std::vector<int> members; ///< sorted, includes center
};

Patch element_patch(const Mesh& mesh, int t, PatchKind kind);

struct MeshStats
{
  int num_triangles = 0;
  double h_max = 0.0;
  double h_min = 0.0;
  double min_angle = 0.0; ///< degrees
};

MeshStats mesh_stats(const Mesh& mesh);

/// Smallest interior angle of triangle t in degrees.
double min_angle(const Mesh& mesh, int t);

} // namespace pointstokes
