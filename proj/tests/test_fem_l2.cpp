#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "graphdiff/fem_l2.hpp"
#include "support.hpp"

using namespace graphdiff;

namespace {

constexpr double kPi = std::numbers::pi;

EdgeGrid nodes(const MetricGraph& g, std::vector<std::size_t> m) {
  std::vector<double> d;
  for (std::size_t i = 0; i < g.edge_count(); ++i) d.push_back(g.length(i));
  return EdgeGrid(GridKind::NodeCentered, d, std::move(m));
}

Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(n);
  for (Eigen::Index k = 0; k < n; ++k) v[k] = normal(rng);
  return v;
}

bool is_endpoint(const EdgeGrid& grid, Eigen::Index k) {
  for (std::size_t i = 0; i < grid.edge_count(); ++i)
    if (static_cast<std::size_t>(k) == grid.index(i, 0) ||
        static_cast<std::size_t>(k) == grid.index(i, grid.cells(i)))
      return true;
  return false;
}

}  // namespace

TEST_CASE("single edge, two elements: stiffness and mass by hand") {
  const auto g = testing::single_edge();
  const auto sys = assemble_forms(g, nodes(g, {2}), 1.0);
  Eigen::Matrix3d b;
  b << 2, -2, 0, -2, 4, -2, 0, -2, 2;
  CHECK((sys.stiffness.toDense() - b).norm() < 1e-14);
  Eigen::Matrix3d m;
  m << 2, 1, 0, 1, 4, 1, 0, 1, 2;
  CHECK((sys.mass.toDense() - m / 12).norm() < 1e-15);
  CHECK(sys.coupling.nonZeros() == 0);
  CHECK((sys.stiffness * Eigen::VectorXd::Ones(3)).norm() < 1e-14);
}

TEST_CASE("coupling form on the two-edge chain") {
  const auto g = testing::fixture("chain2");
  const auto grid = nodes(g, {3, 4});
  const auto sys = assemble_forms(g, grid, 1.0);
  const Eigen::MatrixXd c = sys.coupling.toDense();
  const auto r1 = static_cast<Eigen::Index>(grid.index(0, 3));
  const auto l2 = static_cast<Eigen::Index>(grid.index(1, 0));
  CHECK(c(r1, r1) == doctest::Approx(1.0));
  CHECK(c(r1, l2) == doctest::Approx(-1.0));
  CHECK(c(l2, l2) == doctest::Approx(1.0));
  CHECK(c(l2, r1) == doctest::Approx(-1.0));
  CHECK(c.cwiseAbs().sum() == doctest::Approx(4.0));
}

TEST_CASE("structure of the forms") {
  const auto g = testing::fixture("ring4");
  const auto grid = EdgeGrid::uniform(g, 0.1, GridKind::NodeCentered);
  const auto sys = assemble_forms(g, grid, 3.0);
  const Eigen::MatrixXd m = sys.mass.toDense(), b = sys.stiffness.toDense(), c = sys.coupling.toDense();
  CHECK((m - m.transpose()).norm() == 0.0);
  CHECK((b - b.transpose()).norm() == 0.0);
  CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues().minCoeff() > 0.0);
  const Eigen::VectorXd eb = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(b).eigenvalues();
  CHECK(eb.minCoeff() > -1e-10);
  int kernel = 0;
  for (double e : eb) kernel += std::abs(e) < 1e-9 * eb.maxCoeff() ? 1 : 0;
  CHECK(kernel == static_cast<int>(g.edge_count()));

  const auto sys2 = assemble_forms(g, grid, 6.0);
  CHECK((sys2.stiffness.toDense() - 2.0 * b).norm() < 1e-10);
  CHECK((sys2.coupling.toDense() - c).norm() == 0.0);

  for (Eigen::Index i = 0; i < c.rows(); ++i)
    for (Eigen::Index j = 0; j < c.cols(); ++j)
      if (c(i, j) != 0.0) CHECK((is_endpoint(grid, i) && is_endpoint(grid, j)));

  std::mt19937 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd u = random_vector(m.rows(), rng);
    CHECK(form_b(sys, u, u) >= 0.0);
    CHECK(form_a(sys, u, u) == doctest::Approx(form_b(sys, u, u) + form_c(sys, u, u)));
  }
  const EdgeFunction steps = EdgeFunction::sample(grid, [](std::size_t i, double) { return 1.0 + i; });
  CHECK(std::abs(form_b(sys, steps.values, steps.values)) < 1e-10);
}

TEST_CASE("sup of b over unit vectors grows linearly in kappa") {
  const auto g = testing::fixture("star3_conservative");
  const auto grid = EdgeGrid::uniform(g, 0.1, GridKind::NodeCentered);
  auto top = [&](double kappa) {
    const auto sys = assemble_forms(g, grid, kappa);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(sys.stiffness.toDense(), sys.mass.toDense());
    return es.eigenvalues().maxCoeff();
  };
  CHECK(top(10.0) / top(1.0) == doctest::Approx(10.0));
  CHECK(top(1000.0) / top(1.0) == doctest::Approx(1000.0));
}

TEST_CASE("generator: Neumann kernel and conservation") {
  const auto single = testing::single_edge();
  const auto gen = generator_l2(assemble_forms(single, nodes(single, {20}), 1.0));
  CHECK(gen.kind == GeneratorKind::Galerkin);
  CHECK(gen.apply(Eigen::VectorXd::Ones(21)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(gen.weights.sum() == doctest::Approx(1.0));

  std::mt19937 rng(8);
  for (const char* name : {"chain2", "star3_conservative"}) {
    const auto g = testing::fixture(name);
    const auto grid = EdgeGrid::uniform(g, 0.05, GridKind::NodeCentered);
    const auto sys = assemble_forms(g, grid, 5.0);
    const auto a = generator_l2(sys);
    for (int trial = 0; trial < 5; ++trial) {
      const Eigen::VectorXd u = random_vector(grid.size(), rng);
      // <A u, 1>_M = -a(u, 1)
      const Eigen::VectorXd au = a.apply(u);
      const double pairing = Eigen::VectorXd::Ones(grid.size()).dot(sys.mass * au);
      CHECK(std::abs(pairing) < 1e-10 * u.cwiseAbs().maxCoeff() * a.op.norm());
      const Eigen::VectorXd v = random_vector(grid.size(), rng);
      CHECK(v.dot(sys.mass * au) == doctest::Approx(-form_a(sys, u, v)).epsilon(1e-9));
    }
  }

  const auto lumped = generator_l2(assemble_forms(single, nodes(single, {4}), 1.0), true);
  const Eigen::MatrixXd lm = lumped.mass.toDense();
  CHECK((lm - Eigen::MatrixXd(lm.diagonal().asDiagonal())).norm() == 0.0);
  CHECK(lm.diagonal().sum() == doctest::Approx(1.0));
}

TEST_CASE("growth bound and sector constant") {
  for (const char* name : {"star3_conservative", "ring4", "star3_subconservative"}) {
    const auto g = testing::fixture(name);
    const auto grid = EdgeGrid::uniform(g, 0.1, GridKind::NodeCentered);
    const auto sys = assemble_forms(g, grid, 1.0);
    const double gamma = gamma_emp(sys);
    const double sector = sector_gamma(sys);
    CAPTURE(name);
    CHECK(std::isfinite(gamma));
    CHECK(sector >= gamma);
    CHECK(std::isfinite(sector));
    CHECK(sectoriality_ratio(sys, sector, 200, 3) <= 1.0 + 1e-12);

    std::mt19937 rng(4);
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::VectorXd u = random_vector(grid.size(), rng);
      CHECK(form_a(sys, u, u) + gamma * m_norm(sys, u) * m_norm(sys, u) >= -1e-10 * u.squaredNorm());
    }
    const Eigen::VectorXd u0 = random_vector(grid.size(), rng);
    for (double t : {0.1, 0.5, 2.0})
      CHECK(m_norm(sys, evolve_l2(sys, u0, t)) <= std::exp(gamma * t) * m_norm(sys, u0) * (1 + 1e-10));
  }
  // Symmetric coupling with nonnegative form: no growth.
  const auto single = testing::single_edge();
  CHECK(gamma_emp(assemble_forms(single, nodes(single, {8}), 1.0)) == 0.0);
}

TEST_CASE("evolution examples") {
  const auto single = testing::single_edge();
  {
    const auto sys = assemble_forms(single, nodes(single, {16}), 1.0);
    const Eigen::VectorXd c = Eigen::VectorXd::Constant(17, 2.5);
    CHECK((evolve_l2(sys, c, 1.0) - c).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_THROWS_AS(evolve_l2(sys, c, -1.0), std::invalid_argument);
  }
  {
    const auto grid = nodes(single, {600});
    const auto sys = assemble_forms(single, grid, 1.0);
    const auto u0 = EdgeFunction::sample(grid, [](std::size_t, double x) { return std::cos(kPi * x); });
    const Eigen::VectorXd u = evolve_l2(sys, u0.values, 0.1);
    CHECK((u - std::exp(-kPi * kPi * 0.1) * u0.values).cwiseAbs().maxCoeff() < 1e-6);
  }
  {
    const auto g = testing::fixture("chain2");
    const auto grid = EdgeGrid::uniform(g, 0.02, GridKind::NodeCentered);
    const auto sys = assemble_forms(g, grid, 2.0);
    const auto u0 = EdgeFunction::sample(grid, [](std::size_t i, double x) { return i == 0 ? x * x : 0.0; });
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(grid.size());
    const double mass0 = ones.dot(sys.mass * u0.values);
    for (double t : {0.1, 1.0, 5.0})
      CHECK(std::abs(ones.dot(sys.mass * evolve_l2(sys, u0.values, t)) - mass0) < 1e-8);
  }
}

TEST_CASE("triplet export carries the mass matrix") {
  const auto single = testing::single_edge();
  std::ostringstream os;
  write_triplets(os, generator_l2(assemble_forms(single, nodes(single, {2}), 1.0)));
  CHECK(os.str().find("% mass") != std::string::npos);
}
