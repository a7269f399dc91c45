#pragma once

#include "pointstokes/assembly.hpp"

#include <Eigen/Core>

#include <functional>
#include <vector>

namespace pointstokes {

/// Superposition of free-space Stokeslets: u = sum_t G(x - t) f_t with
///   G(r) = -1/(4 pi) (log|r| I - r r^T / |r|^2),
/// and pressure pi = sum_t r.f_t / (2 pi |r|^2), solving
/// -Lap u + grad pi = sum_t f_t delta_t, div u = 0 in the plane.
struct StokesletField
{
  std::vector<Source> sources;
};

struct StokesletValue
{
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();
  double pressure = 0.0;
  /// gradient(i, j) = d u_i / d x_j
  Eigen::Matrix2d gradient = Eigen::Matrix2d::Zero();
};

/// Throws when x coincides with a source.
StokesletValue stokeslet_eval(const StokesletField& field, const Point& x);

struct PdeResidual
{
  double momentum = 0.0;   ///< |-Lap u + grad pi|
  double divergence = 0.0; ///< |div u|
};

/// Residual of the Stokes equations at x: divergence from the analytic
/// gradient, Laplacian and pressure gradient by central differences of the
/// analytic gradient and pressure with the given step.
PdeResidual verify_pde(const StokesletField& field, const Point& x, double step = 1e-6);

/// Closed-form velocity/pressure pair used as a reference solution.
struct ExactSolution
{
  std::function<Eigen::Vector2d(const Point&)> velocity;
  std::function<Eigen::Matrix2d(const Point&)> gradient;
  std::function<double(const Point&)> pressure;
  /// Points where the fields are singular; quadrature points landing on
  /// them are nudged towards the element centroid.
  std::vector<Point> singular_points;
};

ExactSolution make_exact_solution(const StokesletField& field);

struct ErrorNorms
{
  double grad_error = 0.0;     ///< ||grad(u - u_h)||_{L^p}
  double pressure_error = 0.0; ///< ||(pi - mean) - (pi_h - mean_h)||_{L^p}
  double total = 0.0;          ///< sum of the two
  /// Per-element p-th powers of the two contributions.
  std::vector<double> element_grad;
  std::vector<double> element_pressure;
};

/// Errors in W^{1,p} x L^p/R by elementwise degree-19 quadrature. Both
/// pressures are reduced to zero mean over the domain before comparing.
ErrorNorms error_norms(const DiscreteSolution& solution, const ExactSolution& exact, double p);

/// Domain mean of the discrete pressure.
double pressure_mean(const DiscreteSolution& solution);

/// Copy with the pressure shifted to zero mean.
DiscreteSolution normalize_pressure_mean(const DiscreteSolution& solution);

/// Estimator over error. Throws when error is not positive.
double effectivity(double estimator, double error);

} // namespace pointstokes
