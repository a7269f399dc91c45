#include "pointstokes/quadrature.hpp"

#include "pointstokes/error.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace pointstokes {

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights)
{
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    // Newton on P_n starting from the Tricomi estimate of the i-th root.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      const double pn = n == 0 ? 1.0 : p1;
      const double pnm1 = n == 1 ? 1.0 : p0;
      dp = n * (x * pn - pnm1) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16)
        break;
    }
    // Recompute the derivative at the converged root.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = n * (x * p1 - (n == 1 ? 1.0 : p0)) / (x * x - 1.0);
    nodes[i] = 0.5 * (1.0 - x);
    weights[i] = 1.0 / ((1.0 - x * x) * dp * dp); // 2/((1-x^2)P'^2) scaled by 1/2
  }
}

namespace {

void check_degree(int degree, const char* what)
{
  if (degree < 1 || degree > max_quadrature_degree)
    throw Error(std::string(what) + ": degree " + std::to_string(degree) +
                " outside supported range [1, 19]");
}

QuadRule build_triangle_rule(int degree)
{
  // x = s, y = t (1 - s); Jacobian (1 - s) raises the s-degree by one.
  const int ns = (degree + 2 + 1) / 2;
  const int nt = (degree + 1 + 1) / 2;
  std::vector<double> sx, sw, tx, tw;
  gauss_legendre(ns, sx, sw);
  gauss_legendre(nt, tx, tw);

  QuadRule rule;
  rule.degree = degree;
  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < nt; ++j) {
      const double x = sx[i];
      const double y = tx[j] * (1.0 - sx[i]);
      rule.barycentric.push_back({1.0 - x - y, x, y});
      rule.weights.push_back(sw[i] * tw[j] * (1.0 - sx[i]));
    }
  return rule;
}

QuadRule build_edge_rule(int degree)
{
  const int n = (degree + 1 + 1) / 2;
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  QuadRule rule;
  rule.degree = degree;
  for (int i = 0; i < n; ++i) {
    rule.barycentric.push_back({1.0 - x[i], x[i], 0.0});
    rule.weights.push_back(w[i]);
  }
  return rule;
}

std::vector<QuadRule> build_table(QuadRule (*build)(int))
{
  std::vector<QuadRule> t;
  for (int d = 1; d <= max_quadrature_degree; ++d)
    t.push_back(build(d));
  return t;
}

} // namespace

const QuadRule& triangle_rule(int degree)
{
  check_degree(degree, "triangle_rule");
  static const std::vector<QuadRule> table = build_table(build_triangle_rule);
  return table[degree - 1];
}

const QuadRule& edge_rule(int degree)
{
  check_degree(degree, "edge_rule");
  static const std::vector<QuadRule> table = build_table(build_edge_rule);
  return table[degree - 1];
}

MappedRule map_rule(const QuadRule& rule,
                    const Eigen::Vector2d& a,
                    const Eigen::Vector2d& b,
                    const Eigen::Vector2d& c)
{
  const Eigen::Vector2d e1 = b - a, e2 = c - a;
  const double jac = std::abs(e1.x() * e2.y() - e1.y() * e2.x());
  if (!(jac > 0.0) || !std::isfinite(jac))
    throw Error("map_rule: degenerate triangle");
  MappedRule out;
  out.points.reserve(rule.size());
  out.weights.reserve(rule.size());
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const auto& l = rule.barycentric[q];
    out.points.push_back(l[0] * a + l[1] * b + l[2] * c);
    out.weights.push_back(rule.weights[q] * jac);
  }
  return out;
}

MappedRule map_rule(const QuadRule& rule, const Eigen::Vector2d& a, const Eigen::Vector2d& b)
{
  const double len = (b - a).norm();
  if (!(len > 0.0) || !std::isfinite(len))
    throw Error("map_rule: degenerate edge");
  MappedRule out;
  out.points.reserve(rule.size());
  out.weights.reserve(rule.size());
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const auto& l = rule.barycentric[q];
    out.points.push_back(l[0] * a + l[1] * b);
    out.weights.push_back(rule.weights[q] * len);
  }
  return out;
}

} // namespace pointstokes
