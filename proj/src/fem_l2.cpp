#include "graphdiff/fem_l2.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Eigenvalues>

#include "graphdiff/evolution.hpp"

namespace graphdiff {

namespace {

using Triplet = Eigen::Triplet<double>;

Eigen::SparseMatrix<double> sparse(std::size_t n, const std::vector<Triplet>& entries) {
  Eigen::SparseMatrix<double> m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  m.setFromTriplets(entries.begin(), entries.end());
  m.makeCompressed();
  return m;
}

Eigen::MatrixXd form_matrix(const FemSystem& sys) {
  return Eigen::MatrixXd(sys.stiffness + sys.coupling);
}

double top_eigenvalue(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, b, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("generalized eigensolver failed");
  return solver.eigenvalues().maxCoeff();
}

void require_size(const FemSystem& sys, const Eigen::VectorXd& u) {
  if (static_cast<std::size_t>(u.size()) != sys.grid.size())
    throw std::invalid_argument("vector does not match the FEM grid");
}

}  // namespace

FemSystem assemble_forms(const MetricGraph& graph, const EdgeGrid& grid, double kappa) {
  require_valid(graph);
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw std::invalid_argument("kappa must be positive");
  if (!grid.matches(graph) || grid.kind() != GridKind::NodeCentered)
    throw std::invalid_argument("FEM needs a node-centered grid matching the graph");

  std::vector<Triplet> m, b, c;
  for (std::size_t i = 0; i < graph.edge_count(); ++i) {
    const double h = grid.spacing(i);
    const double s = kappa * graph.sigma(i) / h;
    for (std::size_t k = 0; k < grid.cells(i); ++k) {
      const auto p = static_cast<int>(grid.index(i, k));
      const int q = p + 1;
      m.emplace_back(p, p, h / 3);
      m.emplace_back(q, q, h / 3);
      m.emplace_back(p, q, h / 6);
      m.emplace_back(q, p, h / 6);
      b.emplace_back(p, p, s);
      b.emplace_back(q, q, s);
      b.emplace_back(p, q, -s);
      b.emplace_back(q, p, -s);
    }
  }

  auto node_at = [&](EndpointRef at) {
    return static_cast<int>(grid.index(at.edge, at.side == Side::Left ? 0 : grid.cells(at.edge)));
  };
  const auto table = trace_functionals(graph);
  for (std::size_t i = 0; i < graph.edge_count(); ++i) {
    for (Side side : {Side::Left, Side::Right}) {
      const double sign = side == Side::Left ? 1.0 : -1.0;
      const int row = node_at({i, side});
      for (const auto& term : table.at({i, side}).terms)
        if (term.coef != 0.0)
          c.emplace_back(row, node_at(term.at), sign * graph.sigma(i) * term.coef);
    }
  }

  const std::size_t n = grid.size();
  return FemSystem{grid, kappa, sparse(n, m), sparse(n, b), sparse(n, c)};
}

DiscreteGenerator generator_l2(const FemSystem& sys, bool lumped) {
  const Eigen::VectorXd row_sums = sys.mass * Eigen::VectorXd::Ones(sys.mass.cols());
  Eigen::SparseMatrix<double> mass = sys.mass;
  if (lumped) {
    std::vector<Triplet> diag;
    for (Eigen::Index k = 0; k < row_sums.size(); ++k) diag.emplace_back(k, k, row_sums[k]);
    mass = sparse(sys.grid.size(), diag);
  }
  Eigen::SparseMatrix<double> op = -(sys.stiffness + sys.coupling);
  op.makeCompressed();
  return DiscreteGenerator{GeneratorKind::Galerkin, sys.grid, sys.kappa, std::move(op),
                           std::move(mass), row_sums};
}

double form_b(const FemSystem& sys, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  require_size(sys, u);
  require_size(sys, v);
  return v.dot(sys.stiffness * u);
}

double form_c(const FemSystem& sys, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  require_size(sys, u);
  require_size(sys, v);
  return v.dot(sys.coupling * u);
}

double form_a(const FemSystem& sys, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  return form_b(sys, u, v) + form_c(sys, u, v);
}

double m_norm(const FemSystem& sys, const Eigen::VectorXd& u) {
  require_size(sys, u);
  return std::sqrt(std::max(0.0, u.dot(sys.mass * u)));
}

double gamma_emp(const FemSystem& sys) {
  const Eigen::MatrixXd k = form_matrix(sys);
  const Eigen::MatrixXd sym = 0.5 * (k + k.transpose());
  return std::max(0.0, top_eigenvalue(-sym, Eigen::MatrixXd(sys.mass)));
}

double sector_gamma(const FemSystem& sys) {
  const Eigen::MatrixXd k = form_matrix(sys);
  const Eigen::MatrixXd sym = 0.5 * (k + k.transpose());
  const Eigen::MatrixXd skew = 0.5 * (k - k.transpose());
  const Eigen::Index n = k.rows();
  Eigen::MatrixXd pencil(2 * n, 2 * n);
  pencil << -sym, -skew, skew, -sym;
  Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  mass.topLeftCorner(n, n) = sys.mass;
  mass.bottomRightCorner(n, n) = sys.mass;
  return std::max(gamma_emp(sys), top_eigenvalue(pencil, mass));
}

double sectoriality_ratio(const FemSystem& sys, double gamma, int samples, std::uint32_t seed) {
  const Eigen::MatrixXd k = form_matrix(sys);
  const Eigen::MatrixXd mass(sys.mass);
  std::mt19937 rng(seed);
  std::normal_distribution<double> normal;
  const Eigen::Index n = k.rows();
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd x(n), y(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      x[j] = normal(rng);
      y[j] = normal(rng);
    }
    const double norm2 = x.dot(mass * x) + y.dot(mass * y);
    x /= std::sqrt(norm2);
    y /= std::sqrt(norm2);
    // a(u) = u^H K u with u = x + i y.
    const double re = x.dot(k * x) + y.dot(k * y);
    const double im = x.dot(k * y) - y.dot(k * x);
    const double denom = re + gamma;
    if (denom <= 0.0) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, std::abs(im) / denom);
  }
  return worst;
}

Eigen::VectorXd evolve_l2(const FemSystem& sys, const Eigen::VectorXd& u0, double t) {
  const auto gen = generator_l2(sys);
  const Method method = gen.size() <= kDenseLimit ? Method::Expm : Method::CrankNicolson;
  return propagate(gen, u0, t, method);
}

}  // namespace graphdiff
