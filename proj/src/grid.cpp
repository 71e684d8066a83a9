#include "graphdiff/grid.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include <Eigen/SparseLU>

namespace graphdiff {

EdgeGrid::EdgeGrid(GridKind kind, std::vector<double> lengths, std::vector<std::size_t> cells)
    : kind_(kind), lengths_(std::move(lengths)), cells_(std::move(cells)) {
  if (lengths_.size() != cells_.size()) throw std::invalid_argument("grid: size mismatch");
  offsets_.assign(1, 0);
  for (std::size_t i = 0; i < lengths_.size(); ++i) {
    if (cells_[i] < 2) throw std::invalid_argument("grid: every edge needs at least 2 cells");
    if (!(lengths_[i] > 0.0)) throw std::invalid_argument("grid: edge length must be positive");
    offsets_.push_back(offsets_.back() + points(i));
  }
}

EdgeGrid EdgeGrid::uniform(const MetricGraph& graph, double h_target, GridKind kind) {
  if (!(h_target > 0.0)) throw std::invalid_argument("grid: h must be positive");
  std::vector<double> lengths;
  std::vector<std::size_t> cells;
  for (std::size_t i = 0; i < graph.edge_count(); ++i) {
    const double d = graph.length(i);
    // Guard against 1/0.005 = 200.00000000000003 style round-up.
    const auto m = static_cast<std::size_t>(std::ceil(d / h_target - 1e-9));
    lengths.push_back(d);
    cells.push_back(std::max<std::size_t>(2, m));
  }
  return EdgeGrid(kind, std::move(lengths), std::move(cells));
}

std::size_t EdgeGrid::points(std::size_t edge) const {
  return kind_ == GridKind::CellCentered ? cells_.at(edge) : cells_.at(edge) + 1;
}

double EdgeGrid::position(std::size_t edge, std::size_t k) const {
  const double h = spacing(edge);
  return kind_ == GridKind::CellCentered ? (static_cast<double>(k) + 0.5) * h
                                         : static_cast<double>(k) * h;
}

Eigen::VectorXd EdgeGrid::weights() const {
  Eigen::VectorXd w(size());
  for (std::size_t i = 0; i < edge_count(); ++i) {
    const double h = spacing(i);
    for (std::size_t k = 0; k < points(i); ++k) w[index(i, k)] = h;
    if (kind_ == GridKind::NodeCentered) {
      w[index(i, 0)] = 0.5 * h;
      w[index(i, points(i) - 1)] = 0.5 * h;
    }
  }
  return w;
}

std::vector<std::size_t> EdgeGrid::owners() const {
  std::vector<std::size_t> out(size());
  for (std::size_t i = 0; i < edge_count(); ++i)
    for (std::size_t k = 0; k < points(i); ++k) out[index(i, k)] = i;
  return out;
}

bool EdgeGrid::matches(const MetricGraph& graph) const {
  if (graph.edge_count() != edge_count()) return false;
  for (std::size_t i = 0; i < edge_count(); ++i)
    if (graph.length(i) != lengths_[i]) return false;
  return true;
}

EdgeFunction EdgeFunction::sample(const EdgeGrid& grid,
                                  const std::function<double(std::size_t, double)>& f) {
  EdgeFunction out{grid, Eigen::VectorXd(grid.size())};
  for (std::size_t i = 0; i < grid.edge_count(); ++i)
    for (std::size_t k = 0; k < grid.points(i); ++k)
      out.values[grid.index(i, k)] = f(i, grid.position(i, k));
  return out;
}

double EdgeFunction::integral(std::size_t edge) const {
  const Eigen::VectorXd w = grid.weights();
  double acc = 0.0;
  for (std::size_t k = 0; k < grid.points(edge); ++k) {
    const std::size_t g = grid.index(edge, k);
    acc += w[g] * values[g];
  }
  return acc;
}

const char* to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::DualFV: return "dual_fv";
    case GeneratorKind::PrimalFD: return "primal_fd";
    case GeneratorKind::Galerkin: return "galerkin";
  }
  return "?";
}

Eigen::MatrixXd DiscreteGenerator::dense() const {
  Eigen::MatrixXd g = Eigen::MatrixXd(op);
  if (!has_mass()) return g;
  return Eigen::MatrixXd(mass).partialPivLu().solve(g);
}

Eigen::VectorXd DiscreteGenerator::apply(const Eigen::VectorXd& x) const {
  Eigen::VectorXd y = op * x;
  if (!has_mass()) return y;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(mass);
  return lu.solve(y);
}

void write_triplets(std::ostream& out, const DiscreteGenerator& gen) {
  char buf[64];
  auto emit = [&](const Eigen::SparseMatrix<double>& m) {
    for (int col = 0; col < m.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator it(m, col); it; ++it) {
        std::snprintf(buf, sizeof buf, "%.17g", it.value());
        out << it.row() << ' ' << it.col() << ' ' << buf << '\n';
      }
  };
  std::snprintf(buf, sizeof buf, "%.17g", gen.kappa);
  out << "% " << to_string(gen.kind) << ' ' << gen.op.rows() << ' ' << gen.op.cols() << ' '
      << gen.op.nonZeros() << ' ' << buf << '\n';
  emit(gen.op);
  if (gen.has_mass()) {
    out << "% mass " << gen.mass.rows() << ' ' << gen.mass.cols() << ' ' << gen.mass.nonZeros()
        << '\n';
    emit(gen.mass);
  }
}

}  // namespace graphdiff
