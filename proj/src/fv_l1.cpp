#include "graphdiff/fv_l1.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace graphdiff {

namespace {

using Triplet = Eigen::Triplet<double>;

void require_kappa(double kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa))
    throw std::invalid_argument("kappa must be positive");
}

void require_grid(const MetricGraph& graph, const EdgeGrid& grid, GridKind kind) {
  if (!grid.matches(graph)) throw std::invalid_argument("grid does not match graph");
  if (grid.kind() != kind) throw std::invalid_argument("grid has the wrong kind");
}

struct StencilEntry {
  std::size_t index;
  double weight;
};

// Cells used to evaluate the trace of a cell-centered function at an endpoint.
std::vector<StencilEntry> trace_stencil(const EdgeGrid& grid, EndpointRef end, TraceOrder order) {
  const std::size_t m = grid.cells(end.edge);
  const std::size_t outer = end.side == Side::Left ? 0 : m - 1;
  const std::size_t inner = end.side == Side::Left ? 1 : m - 2;
  if (order == TraceOrder::Nearest) return {{grid.index(end.edge, outer), 1.0}};
  return {{grid.index(end.edge, outer), 1.5}, {grid.index(end.edge, inner), -0.5}};
}

Eigen::SparseMatrix<double> from_triplets(std::size_t n, const std::vector<Triplet>& entries) {
  Eigen::SparseMatrix<double> m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  m.setFromTriplets(entries.begin(), entries.end());
  m.makeCompressed();
  return m;
}

}  // namespace

DiscreteGenerator assemble_dual_fv(const MetricGraph& graph, const EdgeGrid& grid, double kappa,
                                   TraceOrder order) {
  require_valid(graph);
  require_kappa(kappa);
  require_grid(graph, grid, GridKind::CellCentered);
  const auto table = trace_functionals(graph);

  std::vector<Triplet> entries;
  for (std::size_t i = 0; i < graph.edge_count(); ++i) {
    const std::size_t m = grid.cells(i);
    const double h = grid.spacing(i);
    const double sigma = graph.sigma(i);
    const double c = kappa * sigma / (h * h);
    for (std::size_t k = 0; k + 1 < m; ++k) {
      const auto p = static_cast<int>(grid.index(i, k));
      const auto q = static_cast<int>(grid.index(i, k + 1));
      entries.emplace_back(p, p, -c);
      entries.emplace_back(p, q, c);
      entries.emplace_back(q, q, -c);
      entries.emplace_back(q, p, c);
    }
    // Boundary fluxes: d/dt phi_0 gets -sigma F_L / h, phi_{m-1} gets +sigma F_R / h.
    for (Side side : {Side::Left, Side::Right}) {
      const auto row = static_cast<int>(grid.index(i, side == Side::Left ? 0 : m - 1));
      const double sign = side == Side::Left ? -1.0 : 1.0;
      for (const auto& term : table.at({i, side}).terms) {
        if (term.coef == 0.0) continue;
        for (const auto& s : trace_stencil(grid, term.at, order))
          entries.emplace_back(row, static_cast<int>(s.index),
                               sign * sigma * term.coef * s.weight / h);
      }
    }
  }

  return DiscreteGenerator{GeneratorKind::DualFV, grid, kappa, from_triplets(grid.size(), entries),
                           {}, grid.weights()};
}

DiscreteGenerator assemble_primal_fd(const MetricGraph& graph, const EdgeGrid& grid,
                                     double kappa) {
  require_valid(graph);
  require_kappa(kappa);
  require_grid(graph, grid, GridKind::NodeCentered);

  auto node_at = [&](EndpointRef end) {
    return grid.index(end.edge, end.side == Side::Left ? 0 : grid.cells(end.edge));
  };

  std::vector<Triplet> entries;
  for (std::size_t i = 0; i < graph.edge_count(); ++i) {
    const std::size_t m = grid.cells(i);
    const double h = grid.spacing(i);
    const double sigma = graph.sigma(i);
    const double c = kappa * sigma / (h * h);
    for (std::size_t k = 1; k < m; ++k) {
      const auto p = static_cast<int>(grid.index(i, k));
      entries.emplace_back(p, p - 1, c);
      entries.emplace_back(p, p, -2.0 * c);
      entries.emplace_back(p, p + 1, c);
    }
    // Ghost-node boundary rows: (2 sigma / h) [kappa (f_in - f_end) / h - t_i f_end + sum t_ij f(V_j)].
    for (Side side : {Side::Left, Side::Right}) {
      const auto end = static_cast<int>(node_at({i, side}));
      const auto in = side == Side::Left ? end + 1 : end - 1;
      const double scale = 2.0 * sigma / h;
      entries.emplace_back(end, in, scale * kappa / h);
      entries.emplace_back(end, end, -scale * (kappa / h + graph.total({i, side})));
      for (const auto& other : incident_edges(graph, {i, side})) {
        const double coef = graph.coupling(i, side, other.edge);
        if (coef == 0.0) continue;
        entries.emplace_back(end, static_cast<int>(node_at(other)), scale * coef);
      }
    }
  }

  return DiscreteGenerator{GeneratorKind::PrimalFD, grid, kappa, from_triplets(grid.size(), entries),
                           {}, grid.weights()};
}

Eigen::VectorXd dual_mass_rate(const MetricGraph& graph) {
  require_valid(graph);
  const std::size_t n = graph.edge_count();
  Eigen::VectorXd rate(n);
  for (std::size_t j = 0; j < n; ++j) {
    double passed = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (i != j) passed += graph.coupling(j, Side::Left, i) + graph.coupling(j, Side::Right, i);
    const auto& e = graph.edge(j);
    rate[j] = graph.sigma(j) * (passed - e.l - e.r);
  }
  return rate;
}

Eigen::VectorXd column_block_sums(const DiscreteGenerator& gen) {
  // Mass is w^T u for lumped pairings, 1^T M u for the Galerkin pairing.
  const Eigen::RowVectorXd sums =
      gen.has_mass() ? Eigen::RowVectorXd(Eigen::RowVectorXd::Ones(gen.op.rows()) * gen.op)
                     : Eigen::RowVectorXd(gen.weights.transpose() * gen.op);
  Eigen::VectorXd out(gen.grid.edge_count());
  for (std::size_t i = 0; i < gen.grid.edge_count(); ++i)
    out[i] = sums.segment(gen.grid.offset(i), gen.grid.points(i)).sum();
  return out;
}

double duality_defect(const MetricGraph& graph, const std::vector<std::size_t>& cells,
                      double kappa, const SmoothEdgeField& f, const SmoothEdgeField& phi,
                      TraceOrder order) {
  if (cells.size() != graph.edge_count())
    throw std::invalid_argument("duality defect: grid does not match graph");
  std::vector<double> lengths;
  for (std::size_t i = 0; i < graph.edge_count(); ++i) lengths.push_back(graph.length(i));
  const EdgeGrid nodes(GridKind::NodeCentered, lengths, cells);
  const EdgeGrid centers(GridKind::CellCentered, lengths, cells);

  const auto primal = assemble_primal_fd(graph, nodes, kappa);
  const auto dual = assemble_dual_fv(graph, centers, kappa, order);

  const Eigen::VectorXd f_nodes = EdgeFunction::sample(nodes, f.value).values;
  const Eigen::VectorXd phi_nodes = EdgeFunction::sample(nodes, phi.value).values;
  const Eigen::VectorXd f_cells = EdgeFunction::sample(centers, f.value).values;
  const Eigen::VectorXd phi_cells = EdgeFunction::sample(centers, phi.value).values;

  const Eigen::VectorXd af = primal.op * f_nodes;
  const Eigen::VectorXd aphi = dual.op * phi_cells;
  const double lhs = (primal.weights.array() * phi_nodes.array() * af.array()).sum();
  const double rhs = (dual.weights.array() * aphi.array() * f_cells.array()).sum();
  return std::abs(lhs - rhs);
}

std::vector<DefectRow> duality_refinement(const MetricGraph& graph, double h_target, int levels,
                                          double kappa, const SmoothEdgeField& f,
                                          const SmoothEdgeField& phi, TraceOrder order) {
  if (levels < 1) throw std::invalid_argument("duality refinement: need at least one level");
  std::vector<DefectRow> rows;
  double h = h_target;
  for (int level = 0; level < levels; ++level, h *= 0.5) {
    const auto grid = EdgeGrid::uniform(graph, h, GridKind::CellCentered);
    std::vector<std::size_t> cells;
    double widest = 0.0;
    for (std::size_t i = 0; i < graph.edge_count(); ++i) {
      cells.push_back(grid.cells(i));
      widest = std::max(widest, grid.spacing(i));
    }
    DefectRow row{widest, duality_defect(graph, cells, kappa, f, phi, order), 0.0};
    if (!rows.empty()) row.ratio = row.defect / rows.back().defect;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace graphdiff
