#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "graphdiff/fv_l1.hpp"
#include "graphdiff/graph_model.hpp"
#include "graphdiff/grid.hpp"

namespace graphdiff {

enum class Method { Expm, CrankNicolson };

/// Largest system handed to the dense exponential.
inline constexpr std::size_t kDenseLimit = 2000;

/// e^{tA} phi0 for M u' = G u. Expm forms M^{-1} G densely; CrankNicolson uses
/// step doubling with a local error target of `tol` relative to the solution's
/// max norm. Throws std::invalid_argument for t < 0 or a size
/// mismatch, std::runtime_error if step control fails.
Eigen::VectorXd propagate(const DiscreteGenerator& gen, const Eigen::VectorXd& phi0, double t,
                          Method method = Method::Expm, double tol = 1e-8);

/// (lambda - A)^{-1} f, i.e. the solution of (lambda M - G) u = M f.
Eigen::VectorXd resolvent_solve(const DiscreteGenerator& gen, double lambda,
                                const Eigen::VectorXd& f);

struct Norms {
  double l1 = 0.0;
  double l2 = 0.0;
  double min = 0.0;
  double mass = 0.0;
};

Norms norms(const Eigen::VectorXd& phi, const Eigen::VectorXd& weights);

enum class Discretization { FV, FEM };

struct SweepRow {
  double kappa = 0.0;
  double t = 0.0;
  double err_l1 = 0.0;
  double err_l2 = 0.0;
  /// || P u(t) - e^{tQ} P phi0 ||_{L^1}, edge averages only.
  double err_projected = 0.0;
  /// mass(t) - mass(0), signed.
  double mass_drift = 0.0;
  double min_value = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  /// Rows with the given t, in increasing kappa.
  std::vector<SweepRow> at_time(double t) const;
};

struct SweepConfig {
  std::vector<double> kappas;
  std::vector<double> times;
  double h = 1.0 / 200.0;
  Discretization disc = Discretization::FV;
  TraceOrder trace_order = TraceOrder::Nearest;
  Method method = Method::Expm;
  /// 0 means GRAPHDIFF_THREADS or the hardware concurrency.
  unsigned threads = 0;
};

/// For each kappa and t, the distance between the discretized dynamics and the
/// limit chain e^{tQ} P phi0 (dual variant). FV errors use the cell weights;
/// FEM errors use trapezoid weights for L^1 and the mass matrix for L^2.
/// Rows are ordered by (kappa, t) regardless of scheduling.
SweepResult kappa_sweep(const MetricGraph& graph, const SweepConfig& config,
                        const std::function<double(std::size_t, double)>& phi0);

/// Worker count from GRAPHDIFF_THREADS (if set and positive), else hardware concurrency.
unsigned sweep_threads();

/// True when err_l1 decreases in kappa (strictly, or allowing ties) for every
/// positive t. Pairs whose larger error is already below `floor` are skipped.
bool decreasing_in_kappa(const SweepResult& result, bool strict = true, double floor = 1e-12);

/// Columns kappa,t,err_l1,err_l2,err_projected,mass_drift,min_value.
void write_sweep_csv(std::ostream& out, const SweepResult& result);

}  // namespace graphdiff
