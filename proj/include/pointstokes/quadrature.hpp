#pragma once

#include <Eigen/Core>

#include <array>
#include <vector>

namespace pointstokes {

/// Highest polynomial degree for which rules are provided.
inline constexpr int max_quadrature_degree = 19;

/// Quadrature on the reference triangle {(x,y): x,y >= 0, x+y <= 1}
/// (points stored as barycentric triples, weights sum to 1/2) or on the
/// reference edge [0,1] (points stored as (1-s, s), weights sum to 1).
struct QuadRule
{
  std::vector<std::array<double, 3>> barycentric;
  std::vector<double> weights;
  int degree = 0;

  std::size_t size() const { return weights.size(); }
};

/// Gauss-Legendre nodes/weights on [0,1] with n points (exact to 2n-1).
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Rule on the reference triangle exact for total degree <= degree.
/// Collapsed (Duffy) product of Gauss-Legendre rules, so all weights are
/// positive and all points lie strictly inside the triangle.
const QuadRule& triangle_rule(int degree);

/// Gauss rule on [0,1] exact to the given degree.
const QuadRule& edge_rule(int degree);

/// A rule pushed forward to a physical element.
struct MappedRule
{
  std::vector<Eigen::Vector2d> points;
  std::vector<double> weights;
};

/// Map a triangle rule to the triangle (a, b, c); weights are scaled by
/// 2 * area so they sum to the area.
MappedRule map_rule(const QuadRule& rule,
                    const Eigen::Vector2d& a,
                    const Eigen::Vector2d& b,
                    const Eigen::Vector2d& c);

/// Map an edge rule to the segment (a, b); weights are scaled by length.
MappedRule map_rule(const QuadRule& rule, const Eigen::Vector2d& a, const Eigen::Vector2d& b);

} // namespace pointstokes
