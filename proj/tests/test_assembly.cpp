#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"

#include "pointstokes/assembly.hpp"
#include "pointstokes/error.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace pointstokes;

namespace {

std::shared_ptr<const Mesh> shared(Mesh m)
{
  return std::make_shared<const Mesh>(std::move(m));
}

std::shared_ptr<const Mesh> square_two()
{
  return shared(Mesh({Point(0, 0), Point(1, 0), Point(1, 1), Point(0, 1)}, {{0, 1, 2}, {0, 2, 3}}));
}

std::shared_ptr<const Mesh> small_mesh(unsigned seed, DomainShape shape = DomainShape::unit_square)
{
  std::mt19937 rng(seed);
  return shared(oracle::random_mesh(rng, 4, shape));
}

double max_abs_diff(const SparseMatrix& a, const Eigen::MatrixXd& b)
{
  return (Eigen::MatrixXd(a) - b).cwiseAbs().maxCoeff();
}

std::vector<std::pair<int, double>> zero_boundary(const FeSpace& v)
{
  return boundary_values(v, [](const Point&) { return Eigen::Vector2d::Zero(); });
}

SaddleSystem assemble(Scheme scheme,
                      std::shared_ptr<const Mesh> mesh,
                      const std::vector<Source>& sources,
                      const Stabilization& stab = {},
                      const VectorFunction& body = {})
{
  auto [v, p] = build_spaces(mesh, scheme);
  return scheme == Scheme::taylor_hood ? assemble_taylor_hood(v, p, sources, body)
                                       : assemble_stabilized(v, p, sources, stab, body);
}

const std::vector<Source> some_sources = {
  {Point(0.3, 0.4), Eigen::Vector2d(1.0, -0.5)},
  {Point(0.71, 0.63), Eigen::Vector2d(-2.0, 0.25)},
};

} // namespace

TEST_CASE("blocks match the dense oracle")
{
  for (unsigned seed : {1u, 2u, 3u}) {
    const auto mesh = small_mesh(seed, seed == 2 ? DomainShape::l_shape : DomainShape::unit_square);

    const auto th = assemble(Scheme::taylor_hood, mesh, {});
    const auto dth = oracle::dense_assembly(*th.velocity_space, *th.pressure_space, 0.0, 0.0);
    CHECK(max_abs_diff(th.A, dth.A) <= 1e-13);
    CHECK(max_abs_diff(th.B, dth.B) <= 1e-13);
    CHECK(th.M.nonZeros() == 0);
    CHECK((th.mean_constraint - dth.c).cwiseAbs().maxCoeff() <= 1e-14);

    const Stabilization stab{0.7, 0.0, 0.25};
    const auto st = assemble(Scheme::stabilized_p1p0, mesh, {}, stab);
    const auto dst = oracle::dense_assembly(*st.velocity_space, *st.pressure_space, stab.tau_div, stab.tau_S);
    CHECK(max_abs_diff(st.A, dst.A) <= 1e-13);
    CHECK(max_abs_diff(st.B, dst.B) <= 1e-13);
    CHECK(max_abs_diff(st.M, dst.M) <= 1e-13);
    CHECK((st.mean_constraint - dst.c).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("pressure penalty on two triangles")
{
  const auto sys = assemble(Scheme::stabilized_p1p0, square_two(), {});
  // One interior edge, the diagonal, with |S|^2 = 2 and tau_S = 1/12.
  Eigen::Matrix2d expected;
  expected << 1, -1, -1, 1;
  expected *= 2.0 / 12.0;
  CHECK(max_abs_diff(sys.M, expected) <= 1e-15);
  CHECK(sys.mean_constraint[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(sys.mean_constraint[1] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("A is symmetric positive semidefinite and B annihilates rigid translations")
{
  const auto mesh = small_mesh(4);
  for (auto scheme : {Scheme::taylor_hood, Scheme::stabilized_p1p0}) {
    const auto sys = assemble(scheme, mesh, {}, {0.3, 0.0, 1.0 / 12});
    const Eigen::MatrixXd A(sys.A);
    CHECK((A - A.transpose()).cwiseAbs().maxCoeff() <= 1e-14);
    const Eigen::VectorXd u = interpolate(*sys.velocity_space, [](const Point&) {
      return Eigen::Vector2d(0.3, -1.2);
    });
    CHECK((sys.A * u).norm() <= 1e-12);
    CHECK((sys.B * u).norm() <= 1e-12);
  }
}

TEST_CASE("Dirac right-hand side")
{
  const auto mesh = small_mesh(5);
  for (auto scheme : {Scheme::taylor_hood, Scheme::stabilized_p1p0}) {
    auto [v, p] = build_spaces(mesh, scheme);
    (void)p;

    SUBCASE("interior, vertex, edge and midpoint sources match the oracle")
    {
      const int e = 7;
      const Point midpoint = mesh->edge_midpoint(e);
      const Point on_edge = 0.8 * mesh->vertex(mesh->edge(e).vertices[0]) + 0.2 * mesh->vertex(mesh->edge(e).vertices[1]);
      const std::vector<Source> sources = {
        {Point(0.31, 0.47), Eigen::Vector2d(1.0, 2.0)},
        {mesh->vertex(mesh->triangle(3)[1]), Eigen::Vector2d(-1.0, 0.5)},
        {midpoint, Eigen::Vector2d(0.25, 0.0)},
        {on_edge, Eigen::Vector2d(0.0, -3.0)},
      };
      const Eigen::VectorXd got = dirac_rhs(*v, sources);
      const Eigen::VectorXd want = oracle::dense_dirac_rhs(*v, sources);
      CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-13);
    }

    SUBCASE("a source on a node loads only that node")
    {
      const int node = oracle::find_node(*v, mesh->vertex(mesh->triangle(2)[0]));
      const Eigen::VectorXd rhs = dirac_rhs(*v, {{v->node(node), Eigen::Vector2d(2.0, -1.0)}});
      for (int i = 0; i < rhs.size(); ++i) {
        const double expected = i == v->dof(node, 0) ? 2.0 : i == v->dof(node, 1) ? -1.0 : 0.0;
        CHECK(std::abs(rhs[i] - expected) <= 1e-14);
      }
    }

    SUBCASE("each component sums to the force")
    {
      const Eigen::VectorXd rhs = dirac_rhs(*v, some_sources);
      Eigen::Vector2d total = Eigen::Vector2d::Zero();
      for (int n = 0; n < v->num_nodes(); ++n)
        for (int c = 0; c < 2; ++c)
          total[c] += rhs[v->dof(n, c)];
      CHECK((total - (some_sources[0].force + some_sources[1].force)).norm() <= 1e-13);
    }

    SUBCASE("sources outside the domain")
    {
      CHECK_THROWS_AS(dirac_rhs(*v, {{Point(1.5, 0.5), Eigen::Vector2d(1, 0)}}), Error);
    }
  }
}

TEST_CASE("load_rhs integrates polynomials exactly")
{
  const auto mesh = small_mesh(6);
  auto [v, p] = build_spaces(mesh, Scheme::taylor_hood);
  (void)p;
  auto g = [](const Point& x) { return Eigen::Vector2d(1.0 + x.x() * x.y(), x.y() * x.y()); };
  const Eigen::VectorXd rhs = load_rhs(*v, g);
  // Against the constant field (1, 0), load_rhs . interpolant = int g_x.
  const Eigen::VectorXd ones = interpolate(*v, [](const Point&) { return Eigen::Vector2d(1.0, 0.0); });
  CHECK(rhs.dot(ones) == doctest::Approx(1.0 + 0.25).epsilon(1e-13));
  const Eigen::VectorXd ys = interpolate(*v, [](const Point&) { return Eigen::Vector2d(0.0, 1.0); });
  CHECK(rhs.dot(ys) == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
}

TEST_CASE("apply_dirichlet")
{
  const auto mesh = small_mesh(7);
  const auto sys = assemble(Scheme::taylor_hood, mesh, some_sources);
  auto g = [](const Point& x) { return Eigen::Vector2d(x.y(), -x.x()); };
  const auto values = boundary_values(*sys.velocity_space, g);
  const auto constrained = apply_dirichlet(sys, values);

  const Eigen::MatrixXd K(saddle_matrix(constrained));
  CHECK((K - K.transpose()).cwiseAbs().maxCoeff() <= 1e-14);
  for (const auto& [dof, value] : values) {
    CHECK(constrained.rhs_velocity[dof] == value);
    CHECK(K(dof, dof) == 1.0);
    CHECK(K.row(dof).cwiseAbs().sum() == 1.0);
  }
  CHECK(constrained.dirichlet.size() == values.size());
  CHECK_THROWS_AS(apply_dirichlet(sys, {{-1, 0.0}}), Error);
  CHECK_THROWS_AS(apply_dirichlet(sys, {{static_cast<int>(sys.A.rows()), 0.0}}), Error);
}

TEST_CASE("sparse solve matches the dense oracle")
{
  for (unsigned seed : {8u, 9u}) {
    const auto mesh = small_mesh(seed, seed == 9 ? DomainShape::l_shape : DomainShape::unit_square);
    const std::vector<Source> sources = {{Point(0.3, 0.7), Eigen::Vector2d(1.0, -2.0)},
                                         {Point(0.2, 0.2), Eigen::Vector2d(0.5, 0.5)}};
    for (auto scheme : {Scheme::taylor_hood, Scheme::stabilized_p1p0}) {
      const Stabilization stab{0.5, 0.0, 1.0 / 12};
      const auto sys = assemble(scheme, mesh, sources, stab);
      const auto values = zero_boundary(*sys.velocity_space);
      const auto s = solve(apply_dirichlet(sys, values));
      const auto dense = oracle::dense_assembly(*sys.velocity_space, *sys.pressure_space,
                                                scheme == Scheme::taylor_hood ? 0.0 : stab.tau_div,
                                                scheme == Scheme::taylor_hood ? 0.0 : stab.tau_S);
      const auto [u, p] = oracle::dense_solve(*sys.velocity_space, *sys.pressure_space, dense,
                                              oracle::dense_dirac_rhs(*sys.velocity_space, sources), values,
                                              scheme == Scheme::taylor_hood);
      CHECK((s.velocity - u).norm() <= 1e-11 * u.norm());
      CHECK((s.pressure - p).norm() <= 1e-11 * p.norm());
      CHECK(sys.mean_constraint.dot(s.pressure) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
      CHECK(galerkin_residual(sys, s) <= 1e-9);
      CHECK(relative_residual(apply_dirichlet(sys, values), s) <= 1e-10);
    }
  }
}

TEST_CASE("polynomial flows are reproduced")
{
  std::mt19937 rng(21);
  for (int trial = 0; trial < 6; ++trial) {
    const auto flow = oracle::random_flow(rng, trial % 2 == 0);
    const auto mesh = small_mesh(30 + trial, trial < 3 ? DomainShape::unit_square : DomainShape::l_shape);
    const Eigen::Vector2d f = flow.body_force();
    const auto sys = assemble(Scheme::taylor_hood, mesh, {}, {}, [f](const Point&) { return f; });
    const auto values = boundary_values(*sys.velocity_space, [&](const Point& x) { return flow.velocity(x); });
    const auto s = solve(apply_dirichlet(sys, values));

    const Eigen::VectorXd u = interpolate(*sys.velocity_space, [&](const Point& x) { return flow.velocity(x); });
    Eigen::VectorXd p = interpolate(*sys.pressure_space, [&](const Point& x) { return flow.pressure(x); });
    p.array() -= sys.mean_constraint.dot(p) / sys.mean_constraint.sum();
    CHECK((s.velocity - u).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((s.pressure - p).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(galerkin_residual(sys, s) <= 1e-9);
  }

  // Linear divergence-free flow with zero pressure on P1/P0.
  const auto mesh = small_mesh(40, DomainShape::l_shape);
  const auto sys = assemble(Scheme::stabilized_p1p0, mesh, {});
  auto g = [](const Point& x) { return Eigen::Vector2d(x.y(), -x.x()); };
  const auto s = solve(apply_dirichlet(sys, boundary_values(*sys.velocity_space, g)));
  CHECK((s.velocity - interpolate(*sys.velocity_space, g)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(s.pressure.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("solutions are linear in the data")
{
  const auto mesh = small_mesh(50);
  for (auto scheme : {Scheme::taylor_hood, Scheme::stabilized_p1p0}) {
    auto solve_for = [&](const std::vector<Source>& sources) {
      const auto sys = assemble(scheme, mesh, sources);
      return solve(apply_dirichlet(sys, zero_boundary(*sys.velocity_space)));
    };
    const auto a = solve_for({some_sources[0]});
    const auto b = solve_for({some_sources[1]});
    const auto ab = solve_for(some_sources);
    CHECK((ab.velocity - a.velocity - b.velocity).norm() <= 1e-12 * ab.velocity.norm());
    CHECK((ab.pressure - a.pressure - b.pressure).norm() <= 1e-12 * ab.pressure.norm());

    Source doubled = some_sources[0];
    doubled.force *= -3.0;
    const auto c = solve_for({doubled});
    CHECK((c.velocity + 3.0 * a.velocity).norm() <= 1e-12 * c.velocity.norm());

    const auto zero = solve_for({});
    CHECK(zero.velocity.norm() == 0.0);
    CHECK(zero.pressure.norm() == 0.0);
  }
}

TEST_CASE("input checks")
{
  const auto mesh = small_mesh(60);
  auto [v2, p1] = build_spaces(mesh, Scheme::taylor_hood);
  auto [v1, p0] = build_spaces(mesh, Scheme::stabilized_p1p0);
  CHECK_THROWS_AS(assemble_taylor_hood(v1, p0, {}), Error);
  CHECK_THROWS_AS(assemble_stabilized(v2, p1, {}, {}), Error);
  CHECK_THROWS_AS(assemble_stabilized(v1, p0, {}, {0.0, 0.0, 0.0}), Error);
  CHECK_THROWS_AS(assemble_stabilized(v1, p0, {}, {-1.0, 0.0, 0.1}), Error);
  CHECK_THROWS_AS(dirac_rhs(*p1, {}), Error);
}

TEST_CASE("matrix market dump")
{
  const auto sys = assemble(Scheme::stabilized_p1p0, square_two(), {});
  std::ostringstream out;
  write_matrix_market(sys, out);
  std::istringstream in(out.str());
  std::string banner;
  std::getline(in, banner);
  CHECK(banner == "%%MatrixMarket matrix coordinate real general");
  long rows = 0, cols = 0, nnz = 0;
  in >> rows >> cols >> nnz;
  const SparseMatrix K = saddle_matrix(sys);
  CHECK(rows == K.rows());
  CHECK(cols == K.cols());
  CHECK(nnz == K.nonZeros());
  Eigen::MatrixXd read = Eigen::MatrixXd::Zero(rows, cols);
  for (long k = 0; k < nnz; ++k) {
    long i = 0, j = 0;
    double value = 0;
    in >> i >> j >> value;
    read(i - 1, j - 1) = value;
  }
  CHECK(max_abs_diff(K, read) == 0.0);
}
