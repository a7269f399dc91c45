#include "pointstokes/mesh.hpp"

#include "pointstokes/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

namespace pointstokes {

namespace {

double cross(const Point& a, const Point& b)
{
  return a.x() * b.y() - a.y() * b.x();
}

double signed_area(const Point& a, const Point& b, const Point& c)
{
  return 0.5 * cross(b - a, c - a);
}

} // namespace

Mesh::Mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> triangles)
  : vertices_(std::move(vertices))
  , triangles_(std::move(triangles))
{
  if (triangles_.empty())
    throw Error("mesh has no triangles");
  parent_.assign(triangles_.size(), -1);
  generation_.assign(triangles_.size(), 0);
  build_topology();
}

void Mesh::build_topology()
{
  const int nv = num_vertices();
  const int nt = num_triangles();

  for (int t = 0; t < nt; ++t) {
    const auto& tri = triangles_[t];
    for (int v : tri)
      if (v < 0 || v >= nv)
        throw Error("triangle " + std::to_string(t) + " references vertex " + std::to_string(v) +
                    " out of range");
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
      throw Error("triangle " + std::to_string(t) + " has repeated vertices");
    const double a = signed_area(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]);
    if (!(a > 0.0))
      throw Error("triangle " + std::to_string(t) +
                  " has non-positive signed area (clockwise or degenerate)");
  }

  // Edges keyed by their lower vertex; the per-vertex lists stay tiny.
  std::vector<std::vector<std::pair<int, int>>> by_vertex(nv);
  edges_.clear();
  triangle_edges_.assign(nt, {-1, -1, -1});
  for (int t = 0; t < nt; ++t) {
    const auto& tri = triangles_[t];
    for (int k = 0; k < 3; ++k) {
      int a = tri[(k + 1) % 3], b = tri[(k + 2) % 3];
      if (a > b)
        std::swap(a, b);
      auto& list = by_vertex[a];
      auto it = std::find_if(list.begin(), list.end(), [b](const auto& p) { return p.first == b; });
      int e;
      if (it == list.end()) {
        e = static_cast<int>(edges_.size());
        list.emplace_back(b, e);
        Edge edge;
        edge.vertices = {a, b};
        edges_.push_back(edge);
      } else {
        e = it->second;
      }
      Edge& edge = edges_[e];
      if (edge.num_triangles == 2)
        throw Error("edge (" + std::to_string(a) + "," + std::to_string(b) +
                    ") is shared by more than two triangles");
      edge.triangles[edge.num_triangles++] = t;
      triangle_edges_[t][k] = e;
    }
  }

  refinement_edge_.assign(nt, 0);
  for (int t = 0; t < nt; ++t) {
    int best = 0;
    double best_len = -1.0;
    for (int k = 0; k < 3; ++k) {
      const double len = edge_length(triangle_edges_[t][k]);
      const double tol = 1e-12 * std::max(len, best_len);
      if (len > best_len + tol ||
          (std::abs(len - best_len) <= tol &&
           triangle_edges_[t][k] < triangle_edges_[t][best])) {
        best = k;
        best_len = std::max(len, best_len);
      }
    }
    refinement_edge_[t] = best;
  }

  vertex_offsets_.assign(nv + 1, 0);
  for (const auto& tri : triangles_)
    for (int v : tri)
      ++vertex_offsets_[v + 1];
  for (int v = 0; v < nv; ++v)
    vertex_offsets_[v + 1] += vertex_offsets_[v];
  vertex_triangles_.assign(vertex_offsets_[nv], -1);
  std::vector<int> fill(vertex_offsets_.begin(), vertex_offsets_.end() - 1);
  for (int t = 0; t < nt; ++t)
    for (int v : triangles_[t])
      vertex_triangles_[fill[v]++] = t;
}

double Mesh::area(int t) const
{
  const auto& tri = triangles_[t];
  return signed_area(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]);
}

double Mesh::diameter(int t) const
{
  const auto& te = triangle_edges_[t];
  return std::max({edge_length(te[0]), edge_length(te[1]), edge_length(te[2])});
}

double Mesh::edge_length(int e) const
{
  return (vertices_[edges_[e].vertices[1]] - vertices_[edges_[e].vertices[0]]).norm();
}

Point Mesh::edge_midpoint(int e) const
{
  return 0.5 * (vertices_[edges_[e].vertices[0]] + vertices_[edges_[e].vertices[1]]);
}

Point Mesh::outward_normal(int t, int k) const
{
  const auto& tri = triangles_[t];
  const Point d = vertices_[tri[(k + 2) % 3]] - vertices_[tri[(k + 1) % 3]];
  return Point(d.y(), -d.x()) / d.norm();
}

std::array<double, 3> Mesh::barycentric(int t, const Point& x) const
{
  const auto& tri = triangles_[t];
  const Point& a = vertices_[tri[0]];
  const Point& b = vertices_[tri[1]];
  const Point& c = vertices_[tri[2]];
  const double twice = cross(b - a, c - a);
  const double l1 = cross(x - a, c - a) / twice;
  const double l2 = cross(b - a, x - a) / twice;
  return {1.0 - l1 - l2, l1, l2};
}

double Mesh::total_area() const
{
  double sum = 0.0;
  for (int t = 0; t < num_triangles(); ++t)
    sum += area(t);
  return sum;
}

Mesh build_initial_mesh(DomainShape shape)
{
  // Squares of side 1/2 indexed by their lower-left grid corner.
  std::vector<std::array<int, 2>> squares;
  switch (shape) {
    case DomainShape::unit_square:
      squares = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
      break;
    case DomainShape::l_shape:
      squares = {{0, 0}, {0, 1}, {1, 1}};
      break;
  }

  std::vector<Point> vertices;
  std::map<std::array<int, 2>, int> grid_vertex;
  auto grid = [&](int i, int j) {
    auto [it, inserted] = grid_vertex.try_emplace({i, j}, static_cast<int>(vertices.size()));
    if (inserted)
      vertices.emplace_back(0.5 * i, 0.5 * j);
    return it->second;
  };
  std::vector<std::array<int, 3>> triangles;
  for (const auto& [i, j] : squares) {
    const int v00 = grid(i, j), v10 = grid(i + 1, j), v11 = grid(i + 1, j + 1),
              v01 = grid(i, j + 1);
    const int c = static_cast<int>(vertices.size());
    vertices.emplace_back(0.5 * i + 0.25, 0.5 * j + 0.25);
    triangles.push_back({v00, v10, c});
    triangles.push_back({v10, v11, c});
    triangles.push_back({v11, v01, c});
    triangles.push_back({v01, v00, c});
  }
  return Mesh(std::move(vertices), std::move(triangles));
}

Mesh read_mesh(std::istream& in)
{
  std::string keyword;
  long long count = 0;
  if (!(in >> keyword >> count) || keyword != "vertices" || count < 3)
    throw Error("mesh file: expected 'vertices <N>' header");
  std::vector<Point> vertices(count);
  for (auto& v : vertices)
    if (!(in >> v.x() >> v.y()) || !std::isfinite(v.x()) || !std::isfinite(v.y()))
      throw Error("mesh file: malformed vertex record");
  if (!(in >> keyword >> count) || keyword != "triangles" || count < 1)
    throw Error("mesh file: expected 'triangles <M>' header");
  std::vector<std::array<int, 3>> triangles(count);
  for (auto& t : triangles)
    if (!(in >> t[0] >> t[1] >> t[2]))
      throw Error("mesh file: malformed triangle record");

  Mesh mesh(std::move(vertices), std::move(triangles));
  if (auto problem = check_conformity(mesh); !problem.empty())
    throw Error("mesh file: " + problem);
  return mesh;
}

Mesh read_mesh(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw Error("cannot open mesh file " + path.string());
  return read_mesh(in);
}

void write_mesh(const Mesh& mesh, std::ostream& out)
{
  auto old_precision = out.precision(17);
  out << "vertices " << mesh.num_vertices() << '\n';
  for (const auto& v : mesh.vertices())
    out << v.x() << ' ' << v.y() << '\n';
  out << "triangles " << mesh.num_triangles() << '\n';
  for (const auto& t : mesh.triangles())
    out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out.precision(old_precision);
}

Mesh refine(const Mesh& mesh, std::span<const int> marked)
{
  const int nt = mesh.num_triangles();
  const int ne = mesh.num_edges();
  std::vector<char> split(ne, 0);
  std::vector<int> work;
  for (int t : marked) {
    if (t < 0 || t >= nt)
      throw Error("refine: marked triangle " + std::to_string(t) + " out of range");
    const int e = mesh.triangle_edge(t, mesh.refinement_edge(t));
    if (!split[e]) {
      split[e] = 1;
      for (int i = 0; i < mesh.edge(e).num_triangles; ++i)
        work.push_back(mesh.edge(e).triangles[i]);
    }
  }
  if (work.empty())
    return mesh;

  // Closure: a triangle with any split edge must also split its refinement
  // edge, which may in turn propagate to the neighbour across it.
  while (!work.empty()) {
    const int t = work.back();
    work.pop_back();
    const int ref = mesh.triangle_edge(t, mesh.refinement_edge(t));
    if (split[ref])
      continue;
    const auto& te = mesh.triangle_edges(t);
    if (split[te[0]] || split[te[1]] || split[te[2]]) {
      split[ref] = 1;
      for (int i = 0; i < mesh.edge(ref).num_triangles; ++i)
        work.push_back(mesh.edge(ref).triangles[i]);
    }
  }

  std::vector<Point> vertices(mesh.vertices().begin(), mesh.vertices().end());
  std::vector<int> midpoint(ne, -1);
  for (int e = 0; e < ne; ++e)
    if (split[e]) {
      midpoint[e] = static_cast<int>(vertices.size());
      vertices.push_back(mesh.edge_midpoint(e));
    }

  std::vector<std::array<int, 3>> triangles;
  std::vector<int> parent, generation;
  triangles.reserve(nt + 2 * std::count(split.begin(), split.end(), 1));
  auto emit = [&](const std::array<int, 3>& tri, int from, int gen) {
    triangles.push_back(tri);
    parent.push_back(from);
    generation.push_back(gen);
  };

  for (int t = 0; t < nt; ++t) {
    const auto& tri = mesh.triangle(t);
    const auto& te = mesh.triangle_edges(t);
    const int r = mesh.refinement_edge(t);
    const int gen = mesh.generation(t);
    if (!split[te[r]]) {
      emit(tri, t, gen);
      continue;
    }
    const int a = tri[r], b = tri[(r + 1) % 3], c = tri[(r + 2) % 3];
    const int m = midpoint[te[r]];
    // (a,b,m) holds edge ab (opposite c); (a,m,c) holds edge ca (opposite b).
    const int mid_ab = midpoint[te[(r + 2) % 3]];
    const int mid_ca = midpoint[te[(r + 1) % 3]];
    if (mid_ab < 0)
      emit({a, b, m}, t, gen + 1);
    else {
      emit({m, a, mid_ab}, t, gen + 2);
      emit({m, mid_ab, b}, t, gen + 2);
    }
    if (mid_ca < 0)
      emit({a, m, c}, t, gen + 1);
    else {
      emit({m, c, mid_ca}, t, gen + 2);
      emit({m, mid_ca, a}, t, gen + 2);
    }
  }

  Mesh out(std::move(vertices), std::move(triangles));
  out.parent_ = std::move(parent);
  out.generation_ = std::move(generation);
  return out;
}

std::string check_conformity(const Mesh& mesh)
{
  const int nv = mesh.num_vertices();
  for (int t = 0; t < mesh.num_triangles(); ++t)
    if (!(mesh.area(t) > 0.0))
      return "triangle " + std::to_string(t) + " has non-positive area";

  // Boundary edges must form closed curves: every vertex touches an even
  // number of them.
  std::vector<int> boundary_degree(nv, 0);
  double enclosed = 0.0;
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const Edge& edge = mesh.edge(e);
    if (edge.num_triangles < 1 || edge.num_triangles > 2)
      return "edge " + std::to_string(e) + " has " + std::to_string(edge.num_triangles) +
             " adjacent triangles";
    if (edge.num_triangles == 2)
      continue;
    ++boundary_degree[edge.vertices[0]];
    ++boundary_degree[edge.vertices[1]];
    // Orient along the owning triangle (counterclockwise) for the shoelace sum.
    const int t = edge.triangles[0];
    const auto& te = mesh.triangle_edges(t);
    const int k = static_cast<int>(std::find(te.begin(), te.end(), e) - te.begin());
    const Point& p = mesh.vertex(mesh.triangle(t)[(k + 1) % 3]);
    const Point& q = mesh.vertex(mesh.triangle(t)[(k + 2) % 3]);
    enclosed += 0.5 * cross(p, q);
  }
  for (int v = 0; v < nv; ++v)
    if (boundary_degree[v] % 2 != 0)
      return "boundary is not closed at vertex " + std::to_string(v);

  // Overlapping triangles would make the summed area exceed the area
  // enclosed by the boundary curve.
  const double total = mesh.total_area();
  if (std::abs(total - enclosed) > 1e-10 * std::max(1.0, std::abs(enclosed)))
    return "triangle areas do not sum to the enclosed area (overlap or fold)";

  // Hanging nodes: a vertex lying inside a single-sided edge. Bucket the
  // vertices on a uniform grid so the scan stays linear.
  Point lo = mesh.vertex(0), hi = mesh.vertex(0);
  for (const auto& v : mesh.vertices()) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const int cells = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(nv))));
  const Point extent = (hi - lo).cwiseMax(Point(1e-300, 1e-300));
  auto cell_of = [&](const Point& x, int axis) {
    const int c = static_cast<int>((x[axis] - lo[axis]) / extent[axis] * cells);
    return std::clamp(c, 0, cells - 1);
  };
  std::vector<std::vector<int>> bucket(static_cast<std::size_t>(cells) * cells);
  for (int v = 0; v < nv; ++v)
    bucket[cell_of(mesh.vertex(v), 0) * cells + cell_of(mesh.vertex(v), 1)].push_back(v);

  for (int e = 0; e < mesh.num_edges(); ++e) {
    const Edge& edge = mesh.edge(e);
    if (edge.num_triangles != 1)
      continue;
    const Point& p = mesh.vertex(edge.vertices[0]);
    const Point& q = mesh.vertex(edge.vertices[1]);
    const Point d = q - p;
    const double len2 = d.squaredNorm();
    const Point blo = p.cwiseMin(q), bhi = p.cwiseMax(q);
    for (int i = cell_of(blo, 0); i <= cell_of(bhi, 0); ++i)
      for (int j = cell_of(blo, 1); j <= cell_of(bhi, 1); ++j)
        for (int v : bucket[i * cells + j]) {
          if (v == edge.vertices[0] || v == edge.vertices[1])
            continue;
          const Point w = mesh.vertex(v) - p;
          const double s = w.dot(d) / len2;
          if (s <= 1e-12 || s >= 1.0 - 1e-12)
            continue;
          if (std::abs(cross(d, w)) <= 1e-12 * len2)
            return "hanging node: vertex " + std::to_string(v) + " lies inside edge " +
                   std::to_string(e);
        }
  }
  return {};
}

std::vector<int> locate_point(const Mesh& mesh, const Point& x)
{
  std::vector<int> hits;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    const Point& a = mesh.vertex(tri[0]);
    const Point& b = mesh.vertex(tri[1]);
    const Point& c = mesh.vertex(tri[2]);
    const double slack = 1e-12 * mesh.diameter(t);
    if (x.x() < std::min({a.x(), b.x(), c.x()}) - slack ||
        x.x() > std::max({a.x(), b.x(), c.x()}) + slack ||
        x.y() < std::min({a.y(), b.y(), c.y()}) - slack ||
        x.y() > std::max({a.y(), b.y(), c.y()}) + slack)
      continue;
    const auto l = mesh.barycentric(t, x);
    if (l[0] >= -point_tolerance && l[1] >= -point_tolerance && l[2] >= -point_tolerance)
      hits.push_back(t);
  }
  if (hits.empty()) {
    std::ostringstream msg;
    msg << "point (" << x.x() << ", " << x.y() << ") lies outside the domain";
    throw Error(msg.str());
  }
  return hits;
}

Patch element_patch(const Mesh& mesh, int t, PatchKind kind)
{
  if (t < 0 || t >= mesh.num_triangles())
    throw Error("element_patch: triangle id " + std::to_string(t) + " out of range");
  Patch patch;
  patch.center = t;
  patch.kind = kind;
  if (kind == PatchKind::edge) {
    patch.members.push_back(t);
    for (int e : mesh.triangle_edges(t)) {
      const Edge& edge = mesh.edge(e);
      for (int i = 0; i < edge.num_triangles; ++i)
        if (edge.triangles[i] != t)
          patch.members.push_back(edge.triangles[i]);
    }
  } else {
    for (int v : mesh.triangle(t))
      for (int s : mesh.vertex_triangles(v))
        patch.members.push_back(s);
  }
  std::sort(patch.members.begin(), patch.members.end());
  patch.members.erase(std::unique(patch.members.begin(), patch.members.end()),
                      patch.members.end());
  return patch;
}

double min_angle(const Mesh& mesh, int t)
{
  const auto& tri = mesh.triangle(t);
  double smallest = 180.0;
  for (int k = 0; k < 3; ++k) {
    const Point u = mesh.vertex(tri[(k + 1) % 3]) - mesh.vertex(tri[k]);
    const Point w = mesh.vertex(tri[(k + 2) % 3]) - mesh.vertex(tri[k]);
    const double angle = std::atan2(std::abs(cross(u, w)), u.dot(w));
    smallest = std::min(smallest, angle * 180.0 / std::numbers::pi);
  }
  return smallest;
}

MeshStats mesh_stats(const Mesh& mesh)
{
  MeshStats stats;
  stats.num_triangles = mesh.num_triangles();
  stats.h_min = std::numeric_limits<double>::infinity();
  stats.min_angle = 180.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double h = mesh.diameter(t);
    stats.h_max = std::max(stats.h_max, h);
    stats.h_min = std::min(stats.h_min, h);
    stats.min_angle = std::min(stats.min_angle, min_angle(mesh, t));
  }
  return stats;
}

} // namespace pointstokes
