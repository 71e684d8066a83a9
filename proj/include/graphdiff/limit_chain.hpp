#pragma once

#include <cmath>
#include <iosfwd>

#include <Eigen/Dense>

#include "graphdiff/graph_model.hpp"
#include "graphdiff/grid.hpp"

namespace graphdiff {

/// Function constant on each edge, viewed as an element of L^1(S) or L^2(S):
/// norms carry the edge lengths as weights.
struct PiecewiseConstant {
  Eigen::VectorXd values;
  Eigen::VectorXd lengths;

  double l1_norm() const { return lengths.dot(values.cwiseAbs()); }
  double l2_norm() const { return std::sqrt(lengths.dot(values.cwiseAbs2())); }
  double mass() const { return lengths.dot(values); }
};

/// Dual: q_ij = sigma_j (l_ji + r_ji) / d_i, the generator of the limit chain
/// for the integrable (L^1, L^2) dynamics.
/// Primal: q_ij = sigma_i (l_ij + r_ij) / d_i, the limit for continuous functions.
/// Both share q_ii = -sigma_i (l_i + r_i) / d_i.
enum class ChainVariant { Dual, Primal };

const char* to_string(ChainVariant v);

struct GeneratorMatrix {
  Eigen::MatrixXd q;
  ChainVariant variant = ChainVariant::Dual;
};

/// Edge averages (d_i^{-1} * integral over E_i) using the function's quadrature.
PiecewiseConstant project_p(const EdgeFunction& phi);

/// Inverse of project_p on edge-wise constants: each grid point gets its edge value.
EdgeFunction lift(const PiecewiseConstant& v, const EdgeGrid& grid);

GeneratorMatrix build_q(const MetricGraph& graph, ChainVariant variant);

/// e^{tQ}; throws std::invalid_argument for t < 0.
Eigen::MatrixXd expm_q(const GeneratorMatrix& q, double t);

/// (sum_i d_i q_ij)_j: the rate at which edge-j mass leaves the system. Zero
/// for conservative graphs. Dual variant only.
Eigen::VectorXd mass_rate(const GeneratorMatrix& q, const Eigen::VectorXd& lengths);

Eigen::VectorXd edge_lengths(const MetricGraph& graph);

/// CSV with a header row of edge ids and one row per edge.
void write_q_csv(std::ostream& out, const GeneratorMatrix& q, const MetricGraph& graph);

}  // namespace graphdiff
