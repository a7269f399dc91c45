#include "pointstokes/assembly.hpp"

#include "pointstokes/error.hpp"
#include "pointstokes/quadrature.hpp"

#include <Eigen/SparseLU>
#ifdef POINTSTOKES_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif

#include <algorithm>
#include <cmath>
#include <ostream>

namespace pointstokes {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

SparseMatrix from_triplets(int rows, int cols, const Triplets& triplets)
{
  SparseMatrix m(rows, cols);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

Eigen::VectorXd pressure_means(const FeSpace& pressure)
{
  const Mesh& mesh = pressure.mesh();
  Eigen::VectorXd c = Eigen::VectorXd::Zero(pressure.num_dofs());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto nodes = pressure.element_nodes(t);
    const double share = mesh.area(t) / static_cast<double>(nodes.size());
    for (int n : nodes)
      c[n] += share;
  }
  return c;
}

/// a(u,v) + tau_div (div u, div v) and b(v,q) by elementwise quadrature.
void assemble_volume_terms(const FeSpace& velocity,
                           const FeSpace& pressure,
                           int degree,
                           double tau_div,
                           Triplets& a_entries,
                           Triplets& b_entries)
{
  const Mesh& mesh = velocity.mesh();
  const QuadRule& rule = triangle_rule(degree);
  const int nb = velocity.nodes_per_element();
  const int np = pressure.nodes_per_element();

  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double jac = 2.0 * mesh.area(t);
    const auto vnodes = velocity.element_nodes(t);
    const auto pnodes = pressure.element_nodes(t);
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(nb, nb);
    Eigen::MatrixXd grad_grad[2][2];
    for (auto& row : grad_grad)
      for (auto& m : row)
        m = Eigen::MatrixXd::Zero(nb, nb);
    Eigen::MatrixXd div_block[2] = {Eigen::MatrixXd::Zero(np, nb), Eigen::MatrixXd::Zero(np, nb)};

    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double w = rule.weights[q] * jac;
      const auto vb = eval_basis(velocity, t, rule.barycentric[q]);
      const auto pb = eval_basis(pressure, t, rule.barycentric[q]);
      for (int i = 0; i < nb; ++i)
        for (int j = 0; j < nb; ++j) {
          lap(i, j) += w * vb.grad[i].dot(vb.grad[j]);
          if (tau_div != 0.0)
            for (int c = 0; c < 2; ++c)
              for (int d = 0; d < 2; ++d)
                grad_grad[c][d](i, j) += w * vb.grad[i][c] * vb.grad[j][d];
        }
      for (int k = 0; k < np; ++k)
        for (int j = 0; j < nb; ++j)
          for (int c = 0; c < 2; ++c)
            div_block[c](k, j) -= w * pb.value[k] * vb.grad[j][c];
    }

    for (int i = 0; i < nb; ++i)
      for (int j = 0; j < nb; ++j)
        for (int c = 0; c < 2; ++c) {
          const int row = velocity.dof(vnodes[i], c);
          a_entries.emplace_back(row, velocity.dof(vnodes[j], c), lap(i, j));
          if (tau_div != 0.0)
            for (int d = 0; d < 2; ++d)
              a_entries.emplace_back(row, velocity.dof(vnodes[j], d),
                                     tau_div * grad_grad[c][d](i, j));
        }
    for (int k = 0; k < np; ++k)
      for (int j = 0; j < nb; ++j)
        for (int c = 0; c < 2; ++c)
          b_entries.emplace_back(pnodes[k], velocity.dof(vnodes[j], c), div_block[c](k, j));
  }
}

void add_body_force(SaddleSystem& system, const VectorFunction& body_force)
{
  if (body_force)
    system.rhs_velocity += load_rhs(*system.velocity_space, body_force);
}

} // namespace

std::pair<std::shared_ptr<const FeSpace>, std::shared_ptr<const FeSpace>>
build_spaces(std::shared_ptr<const Mesh> mesh, Scheme scheme)
{
  if (scheme == Scheme::taylor_hood)
    return {build_space(mesh, SpaceKind::vector_p2), build_space(mesh, SpaceKind::scalar_p1)};
  return {build_space(mesh, SpaceKind::vector_p1), build_space(mesh, SpaceKind::scalar_p0)};
}

Eigen::VectorXd dirac_rhs(const FeSpace& space, const std::vector<Source>& sources)
{
  if (space.components() != 2)
    throw Error("dirac_rhs: expected a vector space");
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(space.num_dofs());
  const Mesh& mesh = space.mesh();
  for (const auto& source : sources) {
    // Any containing element gives the same values by continuity.
    const int t = locate_point(mesh, source.point).front();
    const auto basis = eval_basis(space, t, mesh.barycentric(t, source.point));
    const auto nodes = space.element_nodes(t);
    for (int i = 0; i < basis.size; ++i)
      for (int c = 0; c < 2; ++c)
        rhs[space.dof(nodes[i], c)] += source.force[c] * basis.value[i];
  }
  return rhs;
}

Eigen::VectorXd load_rhs(const FeSpace& space, const VectorFunction& g, int degree)
{
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(space.num_dofs());
  const Mesh& mesh = space.mesh();
  const QuadRule& rule = triangle_rule(degree);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    const auto mapped = map_rule(rule, mesh.vertex(tri[0]), mesh.vertex(tri[1]), mesh.vertex(tri[2]));
    const auto nodes = space.element_nodes(t);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Eigen::Vector2d force = g(mapped.points[q]);
      const auto basis = eval_basis(space, t, rule.barycentric[q]);
      for (int i = 0; i < basis.size; ++i)
        for (int c = 0; c < 2; ++c)
          rhs[space.dof(nodes[i], c)] += mapped.weights[q] * force[c] * basis.value[i];
    }
  }
  return rhs;
}

SaddleSystem assemble_taylor_hood(std::shared_ptr<const FeSpace> velocity,
                                  std::shared_ptr<const FeSpace> pressure,
                                  const std::vector<Source>& sources,
                                  const VectorFunction& body_force)
{
  if (velocity->kind() != SpaceKind::vector_p2 || pressure->kind() != SpaceKind::scalar_p1)
    throw Error("assemble_taylor_hood: expected P2 velocity and P1 pressure spaces");
  SaddleSystem system;
  system.scheme = Scheme::taylor_hood;
  system.velocity_space = velocity;
  system.pressure_space = pressure;

  Triplets a_entries, b_entries;
  assemble_volume_terms(*velocity, *pressure, 4, 0.0, a_entries, b_entries);
  const int nu = velocity->num_dofs(), np = pressure->num_dofs();
  system.A = from_triplets(nu, nu, a_entries);
  system.B = from_triplets(np, nu, b_entries);
  system.M = SparseMatrix(np, np);
  system.mean_constraint = pressure_means(*pressure);
  system.rhs_velocity = dirac_rhs(*velocity, sources);
  system.rhs_pressure = Eigen::VectorXd::Zero(np);
  add_body_force(system, body_force);
  return system;
}

SaddleSystem assemble_stabilized(std::shared_ptr<const FeSpace> velocity,
                                 std::shared_ptr<const FeSpace> pressure,
                                 const std::vector<Source>& sources,
                                 const Stabilization& stab,
                                 const VectorFunction& body_force)
{
  if (velocity->kind() != SpaceKind::vector_p1 || pressure->kind() != SpaceKind::scalar_p0)
    throw Error("assemble_stabilized: expected P1 velocity and P0 pressure spaces");
  if (!(stab.tau_S > 0.0))
    throw Error("assemble_stabilized: tau_S must be positive");
  if (stab.tau_div < 0.0 || stab.tau_T < 0.0)
    throw Error("assemble_stabilized: tau_div and tau_T must be non-negative");

  SaddleSystem system;
  system.scheme = Scheme::stabilized_p1p0;
  system.velocity_space = velocity;
  system.pressure_space = pressure;

  Triplets a_entries, b_entries;
  assemble_volume_terms(*velocity, *pressure, 2, stab.tau_div, a_entries, b_entries);
  const int nu = velocity->num_dofs(), np = pressure->num_dofs();
  system.A = from_triplets(nu, nu, a_entries);
  system.B = from_triplets(np, nu, b_entries);

  // m(p,q): the tau_T gradient term vanishes identically for P0, leaving the
  // jump penalty tau_S h_S int_S [p][q] = tau_S |S|^2 (p+ - p-)(q+ - q-).
  const Mesh& mesh = velocity->mesh();
  Triplets m_entries;
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const Edge& edge = mesh.edge(e);
    if (edge.on_boundary())
      continue;
    const double h = mesh.edge_length(e);
    const double weight = stab.tau_S * h * h;
    const int plus = edge.triangles[0], minus = edge.triangles[1];
    m_entries.emplace_back(plus, plus, weight);
    m_entries.emplace_back(minus, minus, weight);
    m_entries.emplace_back(plus, minus, -weight);
    m_entries.emplace_back(minus, plus, -weight);
  }
  system.M = from_triplets(np, np, m_entries);
  system.mean_constraint = pressure_means(*pressure);
  system.rhs_velocity = dirac_rhs(*velocity, sources);
  system.rhs_pressure = Eigen::VectorXd::Zero(np);
  add_body_force(system, body_force);
  return system;
}

SaddleSystem apply_dirichlet(const SaddleSystem& system,
                             const std::vector<std::pair<int, double>>& values)
{
  SaddleSystem out = system;
  const int nu = static_cast<int>(system.rhs_velocity.size());
  Eigen::VectorXd lift = Eigen::VectorXd::Zero(nu);
  std::vector<char> fixed(nu, 0);
  for (const auto& [dof, value] : values) {
    if (dof < 0 || dof >= nu)
      throw Error("apply_dirichlet: dof out of range");
    fixed[dof] = 1;
    lift[dof] = value;
  }
  for (const auto& [dof, value] : system.dirichlet) {
    fixed[dof] = 1;
    lift[dof] = value;
  }

  out.rhs_velocity -= system.A * lift;
  out.rhs_pressure -= system.B * lift;
  for (int i = 0; i < nu; ++i)
    if (fixed[i])
      out.rhs_velocity[i] = lift[i];

  Triplets a_entries;
  for (int k = 0; k < system.A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(system.A, k); it; ++it)
      if (!fixed[it.row()] && !fixed[it.col()])
        a_entries.emplace_back(it.row(), it.col(), it.value());
  for (int i = 0; i < nu; ++i)
    if (fixed[i])
      a_entries.emplace_back(i, i, 1.0);
  out.A = from_triplets(nu, nu, a_entries);

  Triplets b_entries;
  for (int k = 0; k < system.B.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(system.B, k); it; ++it)
      if (!fixed[it.col()])
        b_entries.emplace_back(it.row(), it.col(), it.value());
  out.B = from_triplets(static_cast<int>(system.B.rows()), nu, b_entries);

  out.dirichlet.clear();
  for (int i = 0; i < nu; ++i)
    if (fixed[i])
      out.dirichlet.emplace_back(i, lift[i]);
  return out;
}

SparseMatrix saddle_matrix(const SaddleSystem& system)
{
  const int nu = static_cast<int>(system.A.rows());
  const int np = static_cast<int>(system.B.rows());
  const bool taylor_hood = system.scheme == Scheme::taylor_hood;
  const int n = nu + np + (taylor_hood ? 1 : 0);
  // The stabilized system fixes the gauge by pinning pressure dof 0.
  auto pinned = [&](int q) { return !taylor_hood && q == 0; };

  Triplets entries;
  entries.reserve(system.A.nonZeros() + 2 * system.B.nonZeros() + system.M.nonZeros() + 2 * np);
  for (int k = 0; k < system.A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(system.A, k); it; ++it)
      entries.emplace_back(it.row(), it.col(), it.value());
  for (int k = 0; k < system.B.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(system.B, k); it; ++it) {
      if (pinned(static_cast<int>(it.row())))
        continue;
      entries.emplace_back(nu + it.row(), it.col(), it.value());
      entries.emplace_back(it.col(), nu + it.row(), it.value());
    }
  for (int k = 0; k < system.M.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(system.M, k); it; ++it) {
      if (pinned(static_cast<int>(it.row())) || pinned(static_cast<int>(it.col())))
        continue;
      entries.emplace_back(nu + it.row(), nu + it.col(), -it.value());
    }
  if (taylor_hood) {
    for (int q = 0; q < np; ++q) {
      entries.emplace_back(nu + q, nu + np, system.mean_constraint[q]);
      entries.emplace_back(nu + np, nu + q, system.mean_constraint[q]);
    }
  } else {
    entries.emplace_back(nu, nu, 1.0);
  }
  return from_triplets(n, n, entries);
}

Eigen::VectorXd saddle_rhs(const SaddleSystem& system)
{
  const int nu = static_cast<int>(system.A.rows());
  const int np = static_cast<int>(system.B.rows());
  const bool taylor_hood = system.scheme == Scheme::taylor_hood;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nu + np + (taylor_hood ? 1 : 0));
  rhs.head(nu) = system.rhs_velocity;
  rhs.segment(nu, np) = system.rhs_pressure;
  if (!taylor_hood)
    rhs[nu] = 0.0;
  return rhs;
}

namespace {

Eigen::VectorXd pack(const SaddleSystem& system, const DiscreteSolution& s)
{
  const int nu = static_cast<int>(system.A.rows());
  const int np = static_cast<int>(system.B.rows());
  const bool taylor_hood = system.scheme == Scheme::taylor_hood;
  Eigen::VectorXd x(nu + np + (taylor_hood ? 1 : 0));
  x.head(nu) = s.velocity;
  x.segment(nu, np) = s.pressure;
  if (taylor_hood)
    x[nu + np] = s.multiplier;
  else
    x.segment(nu, np).array() -= s.pressure[0]; // back to the pinned representative
  return x;
}

} // namespace

DiscreteSolution solve(const SaddleSystem& system)
{
  const SparseMatrix K = saddle_matrix(system);
  const Eigen::VectorXd b = saddle_rhs(system);
  const int nu = static_cast<int>(system.A.rows());
  const int np = static_cast<int>(system.B.rows());

  Eigen::VectorXd x;
  if (b.squaredNorm() == 0.0) {
    x = Eigen::VectorXd::Zero(b.size());
  } else {
#ifdef POINTSTOKES_HAVE_UMFPACK
    Eigen::UmfPackLU<SparseMatrix> lu;
    // The saddle matrix is structurally symmetric; the default unsymmetric
    // strategy orders it much worse.
    lu.umfpackControl()(UMFPACK_STRATEGY) = UMFPACK_STRATEGY_SYMMETRIC;
#else
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
#endif
    lu.compute(K);
    if (lu.info() != Eigen::Success)
      throw Error("solve: sparse factorization failed (singular system?)");
    x = lu.solve(b);
    if (lu.info() != Eigen::Success || !x.allFinite())
      throw Error("solve: back substitution failed");
  }

  DiscreteSolution solution;
  solution.velocity_space = system.velocity_space;
  solution.pressure_space = system.pressure_space;
  solution.velocity = x.head(nu);
  solution.pressure = x.segment(nu, np);
  if (system.scheme == Scheme::taylor_hood) {
    solution.multiplier = x[nu + np];
  }

  const double res = b.squaredNorm() == 0.0 ? 0.0 : (K * x - b).norm() / b.norm();
  if (res > 1e-10)
    throw Error("solve: relative residual " + std::to_string(res) + " exceeds 1e-10");

  if (system.scheme == Scheme::stabilized_p1p0) {
    const double mean = system.mean_constraint.dot(solution.pressure) / system.mean_constraint.sum();
    solution.pressure.array() -= mean;
  }
  return solution;
}

double relative_residual(const SaddleSystem& system, const DiscreteSolution& solution)
{
  const Eigen::VectorXd b = saddle_rhs(system);
  const Eigen::VectorXd x = pack(system, solution);
  const Eigen::VectorXd r = saddle_matrix(system) * x - b;
  const double bn = b.norm();
  return bn == 0.0 ? r.norm() : r.norm() / bn;
}

double galerkin_residual(const SaddleSystem& system, const DiscreteSolution& s)
{
  const Eigen::VectorXd au = system.A * s.velocity;
  const Eigen::VectorXd btp = system.B.transpose() * s.pressure;
  Eigen::VectorXd r_u = au + btp - system.rhs_velocity;
  Eigen::VectorXd r_p = system.B * s.velocity - system.M * s.pressure - system.rhs_pressure;
  if (system.scheme == Scheme::taylor_hood)
    r_p += s.multiplier * system.mean_constraint;

  // Free test functions are those vanishing on the Dirichlet boundary.
  const FeSpace& vspace = *system.velocity_space;
  double worst = 0.0, scale = 0.0;
  for (int n = 0; n < vspace.num_nodes(); ++n)
    for (int c = 0; c < 2; ++c) {
      const int i = vspace.dof(n, c);
      if (vspace.boundary_node(n))
        continue;
      worst = std::max(worst, std::abs(r_u[i]));
      scale = std::max({scale, std::abs(au[i]), std::abs(btp[i]),
                        std::abs(system.rhs_velocity[i])});
    }
  const Eigen::VectorXd bu = system.B * s.velocity;
  for (Eigen::Index q = 0; q < r_p.size(); ++q) {
    worst = std::max(worst, std::abs(r_p[q]));
    scale = std::max(scale, std::abs(bu[q]));
  }
  if (scale == 0.0)
    return worst;
  return worst / scale;
}

void write_matrix_market(const SaddleSystem& system, std::ostream& out)
{
  const SparseMatrix K = saddle_matrix(system);
  auto old_precision = out.precision(17);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << K.rows() << ' ' << K.cols() << ' ' << K.nonZeros() << '\n';
  for (int k = 0; k < K.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(K, k); it; ++it)
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
  out.precision(old_precision);
}

} // namespace pointstokes
