#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "graphdiff/graph_model.hpp"

namespace graphdiff {

/// Cell-centered grids carry cell averages (finite volumes); node-centered
/// grids carry nodal values including both endpoints of every edge
/// (finite differences and P1 elements).
enum class GridKind { CellCentered, NodeCentered };

/// Per-edge uniform subdivision of S, the disjoint union of edges. Degrees of
/// freedom are numbered edge by edge.
class EdgeGrid {
 public:
  EdgeGrid(GridKind kind, std::vector<double> lengths, std::vector<std::size_t> cells);

  /// m_i = max(2, ceil(d_i / h_target)) cells per edge.
  static EdgeGrid uniform(const MetricGraph& graph, double h_target, GridKind kind);

  GridKind kind() const { return kind_; }
  std::size_t edge_count() const { return lengths_.size(); }
  std::size_t cells(std::size_t edge) const { return cells_.at(edge); }
  double length(std::size_t edge) const { return lengths_.at(edge); }
  double spacing(std::size_t edge) const { return lengths_.at(edge) / cells_.at(edge); }
  /// Number of unknowns on one edge (m_i or m_i + 1).
  std::size_t points(std::size_t edge) const;
  std::size_t offset(std::size_t edge) const { return offsets_.at(edge); }
  std::size_t size() const { return offsets_.back(); }
  /// Global index of the local point k on edge i.
  std::size_t index(std::size_t edge, std::size_t k) const { return offsets_.at(edge) + k; }
  /// Local coordinate (distance from L_i) of point k on edge i.
  double position(std::size_t edge, std::size_t k) const;
  /// Quadrature weights: cell widths, or trapezoid weights for nodal grids.
  Eigen::VectorXd weights() const;
  /// Edge index owning each global point.
  std::vector<std::size_t> owners() const;

  bool matches(const MetricGraph& graph) const;
  friend bool operator==(const EdgeGrid&, const EdgeGrid&) = default;

 private:
  GridKind kind_;
  std::vector<double> lengths_;
  std::vector<std::size_t> cells_;
  std::vector<std::size_t> offsets_;
};

/// A function on S as per-point values on a grid, integrated with the grid's
/// quadrature weights.
struct EdgeFunction {
  EdgeGrid grid;
  Eigen::VectorXd values;

  /// Sample f(edge, x) at the grid points (cell centers or nodes).
  static EdgeFunction sample(const EdgeGrid& grid,
                             const std::function<double(std::size_t, double)>& f);
  double integral(std::size_t edge) const;
};

enum class GeneratorKind { DualFV, PrimalFD, Galerkin };

const char* to_string(GeneratorKind kind);

/// Linear evolution M u' = G u on a grid. For the finite-volume and
/// finite-difference generators M is the identity and G is the matrix A;
/// for the Galerkin generator G = -(B_n + C) and M is the mass matrix.
struct DiscreteGenerator {
  GeneratorKind kind = GeneratorKind::DualFV;
  EdgeGrid grid;
  double kappa = 1.0;
  Eigen::SparseMatrix<double> op;
  /// Empty (0x0) means identity.
  Eigen::SparseMatrix<double> mass;
  /// Pairing weights: <phi> = sum_k w_k phi_k.
  Eigen::VectorXd weights;

  std::size_t size() const { return grid.size(); }
  bool has_mass() const { return mass.rows() != 0; }
  /// M^{-1} G as a dense matrix.
  Eigen::MatrixXd dense() const;
  /// M^{-1} G x.
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
};

/// Writes "% kind rows cols nnz kappa" followed by one "row col value" line per
/// stored entry of G (and of M after a "% mass" line, when present).
/// Indices are zero based; values use 17 significant digits.
void write_triplets(std::ostream& out, const DiscreteGenerator& gen);

}  // namespace graphdiff
