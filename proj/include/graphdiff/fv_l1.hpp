#pragma once

#include <cstddef>
#include <functional>

#include <Eigen/Dense>

#include "graphdiff/graph_model.hpp"
#include "graphdiff/grid.hpp"

namespace graphdiff {

/// How endpoint traces phi(L_j), phi(R_j) are read from cell averages.
/// Nearest keeps the matrix Metzler; Linear extrapolates from the two
/// outermost cells (second order, may create small negative couplings).
enum class TraceOrder { Nearest = 1, Linear = 2 };

/// Finite-volume generator of the dual (integrable) dynamics kappa sigma phi''
/// with membrane fluxes kappa sigma_i phi'(L_i) = sigma_i F_{L,i} phi and
/// kappa sigma_i phi'(R_i) = sigma_i F_{R,i} phi on a cell-centered grid.
///
/// The flux form telescopes: w^T A phi = sum_i sigma_i (F_{R,i} - F_{L,i}) phi.
DiscreteGenerator assemble_dual_fv(const MetricGraph& graph, const EdgeGrid& grid, double kappa,
                                   TraceOrder order = TraceOrder::Nearest);

/// Node-centered finite differences for the primal generator kappa sigma f''
/// with transmission conditions f'(L_i) = kappa^{-1} [l_i f(L_i) - sum_j l_ij f(V_j)]
/// and -f'(R_i) = kappa^{-1} [r_i f(R_i) - sum_j r_ij f(V_j)], imposed via ghost
/// nodes. Trapezoid weights make the boundary rows flux-conservative.
DiscreteGenerator assemble_primal_fd(const MetricGraph& graph, const EdgeGrid& grid, double kappa);

/// Analytic per-edge mass rate of the dual dynamics:
/// sigma_j (sum_{i != j} (l_ji + r_ji) - l_j - r_j). Each column block of
/// w^T A sums to this value.
Eigen::VectorXd dual_mass_rate(const MetricGraph& graph);

/// Sum of w^T A over the columns belonging to each edge.
Eigen::VectorXd column_block_sums(const DiscreteGenerator& gen);

/// Smooth function on S given by value and first two derivatives in the
/// local coordinate x in [0, d_i].
struct SmoothEdgeField {
  std::function<double(std::size_t, double)> value;
  std::function<double(std::size_t, double)> first;
  std::function<double(std::size_t, double)> second;
};

/// |<phi, A_primal f>_w - <A_dual phi, f>_w| where each pairing is computed on
/// its generator's own grid (nodes for A_primal, cells for A_dual) with
/// m_i cells per edge, and f, phi are sampled from the given fields.
/// The continuum value is zero when f satisfies the primal and phi the dual
/// transmission conditions.
double duality_defect(const MetricGraph& graph, const std::vector<std::size_t>& cells,
                      double kappa, const SmoothEdgeField& f, const SmoothEdgeField& phi,
                      TraceOrder order = TraceOrder::Nearest);

struct DefectRow {
  double h = 0.0;  // largest cell width
  double defect = 0.0;
  double ratio = 0.0;  // defect / previous defect (0 for the first row)
};

/// duality_defect on successively halved grids starting at h_target.
std::vector<DefectRow> duality_refinement(const MetricGraph& graph, double h_target,
                                          int levels, double kappa, const SmoothEdgeField& f,
                                          const SmoothEdgeField& phi,
                                          TraceOrder order = TraceOrder::Nearest);

/// Corrects a base field by edge-local bumps that vanish at both endpoints so
/// that the result satisfies the primal transmission conditions (for f) or
/// the dual ones (for phi) at the given kappa. Endpoint values are untouched.
SmoothEdgeField enforce_primal_conditions(const MetricGraph& graph, double kappa,
                                          const SmoothEdgeField& base);
SmoothEdgeField enforce_dual_conditions(const MetricGraph& graph, double kappa,
                                        const SmoothEdgeField& base);

/// Deterministic smooth field: on edge i, sum of a few cosines/sines with
/// seed-dependent amplitudes and phases.
SmoothEdgeField trigonometric_field(const MetricGraph& graph, unsigned seed);

}  // namespace graphdiff
