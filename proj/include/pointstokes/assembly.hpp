#pragma once

#include "pointstokes/spaces.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <iosfwd>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

namespace pointstokes {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// A point force f delta_t.
struct Source
{
  Point point = Point::Zero();
  Eigen::Vector2d force = Eigen::Vector2d::Zero();
};

enum class Scheme
{
  taylor_hood,     ///< P2 velocity / continuous P1 pressure
  stabilized_p1p0, ///< P1 velocity / P0 pressure with jump penalty
};

struct Stabilization
{
  double tau_div = 0.0;
  double tau_T = 0.0;
  double tau_S = 1.0 / 12.0;
};

/// The blocks of
///   [ A   B^T       ] [u]   [f]
///   [ B   -M    c   ] [p] = [g]
///   [     c^T       ] [l]   [0]
/// where A holds a(.,.) + s(.,.), B_qj = -int q div phi_j, M the pressure
/// stabilization m(.,.) and c the mean constraint (Taylor-Hood only; the
/// stabilized system pins pressure dof 0 instead).
struct SaddleSystem
{
  Scheme scheme = Scheme::taylor_hood;
  std::shared_ptr<const FeSpace> velocity_space;
  std::shared_ptr<const FeSpace> pressure_space;
  SparseMatrix A;
  SparseMatrix B;
  SparseMatrix M;
  Eigen::VectorXd mean_constraint;
  Eigen::VectorXd rhs_velocity;
  Eigen::VectorXd rhs_pressure;
  /// Constrained velocity dofs and their prescribed values, sorted by dof.
  std::vector<std::pair<int, double>> dirichlet;
};

/// Velocity/pressure spaces for a scheme on a mesh.
std::pair<std::shared_ptr<const FeSpace>, std::shared_ptr<const FeSpace>>
build_spaces(std::shared_ptr<const Mesh> mesh, Scheme scheme);

/// Right-hand side sum_t f_t . phi_j(t) for a vector space.
Eigen::VectorXd dirac_rhs(const FeSpace& space, const std::vector<Source>& sources);

/// Right-hand side int g . phi_j for a smooth body force.
Eigen::VectorXd load_rhs(const FeSpace& space, const VectorFunction& g, int degree = 10);

SaddleSystem assemble_taylor_hood(std::shared_ptr<const FeSpace> velocity,
                                  std::shared_ptr<const FeSpace> pressure,
                                  const std::vector<Source>& sources,
                                  const VectorFunction& body_force = {});

SaddleSystem assemble_stabilized(std::shared_ptr<const FeSpace> velocity,
                                 std::shared_ptr<const FeSpace> pressure,
                                 const std::vector<Source>& sources,
                                 const Stabilization& stab,
                                 const VectorFunction& body_force = {});

/// Symmetric elimination of constrained velocity dofs: the rhs is lifted by
/// the known values, constrained rows and columns are zeroed and their
/// diagonal set to one.
SaddleSystem apply_dirichlet(const SaddleSystem& system,
                             const std::vector<std::pair<int, double>>& values);

/// The assembled square matrix and right-hand side actually factorized.
SparseMatrix saddle_matrix(const SaddleSystem& system);
Eigen::VectorXd saddle_rhs(const SaddleSystem& system);

/// Direct sparse factorization of the indefinite system. Throws on a
/// singular factorization or when the relative residual exceeds 1e-10.
DiscreteSolution solve(const SaddleSystem& system);

/// Relative residual ||K x - b|| / ||b|| of a solution (0 when b = 0 and x = 0).
double relative_residual(const SaddleSystem& system, const DiscreteSolution& solution);

/// Largest violation of the discrete equations over all free test
/// functions, relative to the size of the terms involved. Evaluate on the
/// system as assembled, before apply_dirichlet.
double galerkin_residual(const SaddleSystem& system, const DiscreteSolution& solution);

/// Matrix Market dump of saddle_matrix(system).
void write_matrix_market(const SaddleSystem& system, std::ostream& out);

} // namespace pointstokes
