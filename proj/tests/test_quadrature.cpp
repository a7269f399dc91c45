#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pointstokes/error.hpp"
#include "pointstokes/quadrature.hpp"

#include <cmath>
#include <numeric>

using namespace pointstokes;

namespace {

double factorial(int n)
{
  double f = 1.0;
  for (int k = 2; k <= n; ++k)
    f *= k;
  return f;
}

double integrate_monomial(const QuadRule& rule, int a, int b)
{
  double sum = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const auto& l = rule.barycentric[q];
    sum += rule.weights[q] * std::pow(l[1], a) * std::pow(l[2], b);
  }
  return sum;
}

} // namespace

TEST_CASE("triangle rule basics")
{
  const auto& r = triangle_rule(1);
  CHECK(std::accumulate(r.weights.begin(), r.weights.end(), 0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(integrate_monomial(triangle_rule(1), 1, 0) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK(triangle_rule(7).degree == 7);
}

TEST_CASE("triangle rules integrate every monomial up to their degree")
{
  for (int d = 1; d <= max_quadrature_degree; ++d) {
    const auto& rule = triangle_rule(d);
    for (int a = 0; a <= d; ++a)
      for (int b = 0; a + b <= d; ++b) {
        const double exact = factorial(a) * factorial(b) / factorial(a + b + 2);
        const double got = integrate_monomial(rule, a, b);
        INFO("degree " << d << " monomial x^" << a << " y^" << b);
        CHECK(std::abs(got - exact) <= 1e-13 * exact);
      }
  }
}

TEST_CASE("triangle rule weights are well conditioned and points lie inside")
{
  for (int d = 1; d <= max_quadrature_degree; ++d) {
    const auto& rule = triangle_rule(d);
    double sum = 0.0, abs_sum = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      sum += rule.weights[q];
      abs_sum += std::abs(rule.weights[q]);
      const auto& l = rule.barycentric[q];
      CHECK(l[0] > 0.0);
      CHECK(l[1] > 0.0);
      CHECK(l[2] > 0.0);
      CHECK(l[0] + l[1] + l[2] == doctest::Approx(1.0).epsilon(1e-15));
    }
    CHECK(abs_sum <= 3.0 * sum);
    CHECK(sum == doctest::Approx(0.5).epsilon(1e-14));
  }
}

TEST_CASE("edge rules integrate s^k exactly")
{
  for (int d = 1; d <= max_quadrature_degree; ++d) {
    const auto& rule = edge_rule(d);
    for (int k = 0; k <= d; ++k) {
      double sum = 0.0;
      for (std::size_t q = 0; q < rule.size(); ++q)
        sum += rule.weights[q] * std::pow(rule.barycentric[q][1], k);
      CHECK(std::abs(sum - 1.0 / (k + 1)) <= 1e-13 / (k + 1));
    }
  }
  const auto& r = edge_rule(3);
  double s = 0.0;
  for (std::size_t q = 0; q < r.size(); ++q)
    s += r.weights[q] * r.barycentric[q][1];
  CHECK(s == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("triangle and edge tables are independent")
{
  // Asking for one family must not change what the other returns.
  const auto edge_size = edge_rule(5).size();
  const auto tri_size = triangle_rule(5).size();
  CHECK(edge_rule(5).size() == edge_size);
  CHECK(triangle_rule(5).size() == tri_size);
  CHECK(edge_size != tri_size);
  for (const auto& l : edge_rule(5).barycentric)
    CHECK(l[2] == 0.0);
}

TEST_CASE("degrees outside 1..19 are rejected")
{
  CHECK_THROWS_AS(triangle_rule(0), Error);
  CHECK_THROWS_AS(triangle_rule(20), Error);
  CHECK_THROWS_AS(edge_rule(0), Error);
  CHECK_THROWS_AS(edge_rule(20), Error);
}

TEST_CASE("map_rule")
{
  const Eigen::Vector2d a(0, 0), b(1, 0), c(0, 1);
  const auto& rule = triangle_rule(4);

  SUBCASE("reference triangle maps to itself")
  {
    const auto m = map_rule(rule, a, b, c);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      CHECK(m.weights[q] == doctest::Approx(rule.weights[q]).epsilon(1e-15));
      CHECK(m.points[q].x() == doctest::Approx(rule.barycentric[q][1]).epsilon(1e-15));
      CHECK(m.points[q].y() == doctest::Approx(rule.barycentric[q][2]).epsilon(1e-15));
    }
  }

  SUBCASE("weights sum to the area")
  {
    const auto m = map_rule(rule, Eigen::Vector2d(0, 0), Eigen::Vector2d(2, 0), Eigen::Vector2d(0, 2));
    CHECK(std::accumulate(m.weights.begin(), m.weights.end(), 0.0) == doctest::Approx(2.0).epsilon(1e-14));
  }

  SUBCASE("cubic over a general triangle matches the barycentric expansion")
  {
    // f = x^2 y + 3 x y - 2 y^3 + 1 on T = (p0, p1, p2). In barycentric
    // form x = sum l_i x_i, and int_T l0^a l1^b l2^c = 2|T| a! b! c!/(a+b+c+2)!.
    const Eigen::Vector2d p0(0.3, -0.2), p1(1.7, 0.4), p2(0.1, 1.3);
    auto f = [](const Eigen::Vector2d& x) {
      return x.x() * x.x() * x.y() + 3 * x.x() * x.y() - 2 * std::pow(x.y(), 3) + 1.0;
    };
    const double area = 0.5 * std::abs((p1 - p0).x() * (p2 - p0).y() - (p1 - p0).y() * (p2 - p0).x());
    // Exact integral by expanding f over all barycentric monomials of
    // degree <= 3, each integrated in closed form.
    double exact = 0.0;
    const std::array<Eigen::Vector2d, 3> P{p0, p1, p2};
    // Sum over ordered index triples reproduces the multinomial expansion.
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) {
          int e[3] = {0, 0, 0};
          ++e[i];
          ++e[j];
          ++e[k];
          const double mono = 2 * area * factorial(e[0]) * factorial(e[1]) * factorial(e[2]) / factorial(5);
          exact += (P[i].x() * P[j].x() * P[k].y() - 2 * P[i].y() * P[j].y() * P[k].y()) * mono;
        }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        int e[3] = {0, 0, 0};
        ++e[i];
        ++e[j];
        const double mono = 2 * area * factorial(e[0]) * factorial(e[1]) * factorial(e[2]) / factorial(4);
        exact += 3 * P[i].x() * P[j].y() * mono;
      }
    exact += area;

    const auto m = map_rule(triangle_rule(3), p0, p1, p2);
    double got = 0.0;
    for (std::size_t q = 0; q < m.points.size(); ++q)
      got += m.weights[q] * f(m.points[q]);
    CHECK(got == doctest::Approx(exact).epsilon(1e-13));
  }

  SUBCASE("edges scale by length")
  {
    const auto m = map_rule(edge_rule(2), Eigen::Vector2d(1, 1), Eigen::Vector2d(4, 5));
    CHECK(std::accumulate(m.weights.begin(), m.weights.end(), 0.0) == doctest::Approx(5.0).epsilon(1e-15));
  }

  SUBCASE("degenerate geometry")
  {
    CHECK_THROWS_AS(map_rule(rule, a, b, Eigen::Vector2d(2, 0)), Error);
    CHECK_THROWS_AS(map_rule(edge_rule(2), a, a), Error);
  }
}
