#pragma once

#include <cstdint>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "graphdiff/graph_model.hpp"
#include "graphdiff/grid.hpp"

namespace graphdiff {

/// P1 Galerkin matrices on a node-centered grid. Rows index test functions,
/// columns trial functions:
///   M[k,l] = int b_k b_l,
///   B[k,l] = kappa sum_i sigma_i int_{E_i} b_k' b_l',
///   C[k,l] = sum_i sigma_i [(F_{L,i} b_l) b_k(L_i) - (F_{R,i} b_l) b_k(R_i)].
/// The form a(u, v) = b(u, v) + c(u, v) evaluates as v^T (B + C) u.
struct FemSystem {
  EdgeGrid grid;
  double kappa = 1.0;
  Eigen::SparseMatrix<double> mass;
  Eigen::SparseMatrix<double> stiffness;
  Eigen::SparseMatrix<double> coupling;
};

FemSystem assemble_forms(const MetricGraph& graph, const EdgeGrid& grid, double kappa);

/// M u' = -(B + C) u. With `lumped`, M is replaced by its row sums.
DiscreteGenerator generator_l2(const FemSystem& sys, bool lumped = false);

double form_b(const FemSystem& sys, const Eigen::VectorXd& u, const Eigen::VectorXd& v);
double form_c(const FemSystem& sys, const Eigen::VectorXd& u, const Eigen::VectorXd& v);
double form_a(const FemSystem& sys, const Eigen::VectorXd& u, const Eigen::VectorXd& v);

/// ||u||_M = sqrt(u^T M u), the L^2(S) norm of the P1 function.
double m_norm(const FemSystem& sys, const Eigen::VectorXd& u);

/// Smallest gamma >= 0 with Re a(u) + gamma ||u||^2 >= 0 for all discrete u:
/// the top generalized eigenvalue of (-sym(B + C), M), clamped at zero.
/// Then ||u(t)||_M <= e^{gamma t} ||u0||_M.
double gamma_emp(const FemSystem& sys);

/// Smallest gamma >= gamma_emp with |Im a(u)| <= Re a(u) + gamma ||u||^2 for all
/// complex discrete u = x + i y. Computed on the real 2n x 2n symmetric pencil
///   [[-S, -W], [W, -S]], diag(M, M),  S = sym(B + C), W = skew(B + C),
/// so no complex arithmetic is involved.
double sector_gamma(const FemSystem& sys);

/// Largest |Im a(u)| / (Re a(u) + gamma ||u||^2) over `samples` random complex
/// unit vectors (real and imaginary parts stored separately).
double sectoriality_ratio(const FemSystem& sys, double gamma, int samples, std::uint32_t seed);

/// u(t) for M u' = -(B + C) u; dense exponential up to 2000 unknowns,
/// adaptive Crank-Nicolson above. Throws std::invalid_argument for t < 0.
Eigen::VectorXd evolve_l2(const FemSystem& sys, const Eigen::VectorXd& u0, double t);

}  // namespace graphdiff
