#include "graphdiff/limit_chain.hpp"

#include <ostream>
#include <stdexcept>

#include "graphdiff/csv.hpp"
#include "graphdiff/expm.hpp"

namespace graphdiff {

const char* to_string(ChainVariant v) { return v == ChainVariant::Dual ? "dual" : "primal"; }

Eigen::VectorXd edge_lengths(const MetricGraph& graph) {
  Eigen::VectorXd d(graph.edge_count());
  for (std::size_t i = 0; i < graph.edge_count(); ++i) d[i] = graph.length(i);
  return d;
}

PiecewiseConstant project_p(const EdgeFunction& phi) {
  const auto& grid = phi.grid;
  if (static_cast<std::size_t>(phi.values.size()) != grid.size())
    throw std::invalid_argument("project_p: values do not match grid");
  const Eigen::VectorXd w = grid.weights();
  PiecewiseConstant out{Eigen::VectorXd(grid.edge_count()), Eigen::VectorXd(grid.edge_count())};
  for (std::size_t i = 0; i < grid.edge_count(); ++i) {
    const auto first = static_cast<Eigen::Index>(grid.offset(i));
    const auto count = static_cast<Eigen::Index>(grid.points(i));
    out.values[i] = w.segment(first, count).dot(phi.values.segment(first, count)) / grid.length(i);
    out.lengths[i] = grid.length(i);
  }
  return out;
}

EdgeFunction lift(const PiecewiseConstant& v, const EdgeGrid& grid) {
  if (static_cast<std::size_t>(v.values.size()) != grid.edge_count())
    throw std::invalid_argument("lift: edge count mismatch");
  EdgeFunction out{grid, Eigen::VectorXd(grid.size())};
  for (std::size_t i = 0; i < grid.edge_count(); ++i)
    out.values.segment(grid.offset(i), grid.points(i)).setConstant(v.values[i]);
  return out;
}

GeneratorMatrix build_q(const MetricGraph& graph, ChainVariant variant) {
  require_valid(graph);
  const std::size_t n = graph.edge_count();
  GeneratorMatrix out{Eigen::MatrixXd::Zero(n, n), variant};
  for (std::size_t i = 0; i < n; ++i) {
    const double d_i = graph.length(i);
    const auto& e = graph.edge(i);
    out.q(i, i) = -graph.sigma(i) * (e.l + e.r) / d_i;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      if (variant == ChainVariant::Dual) {
        const double pass = graph.coupling(j, Side::Left, i) + graph.coupling(j, Side::Right, i);
        out.q(i, j) = graph.sigma(j) * pass / d_i;
      } else {
        const double pass = graph.coupling(i, Side::Left, j) + graph.coupling(i, Side::Right, j);
        out.q(i, j) = graph.sigma(i) * pass / d_i;
      }
    }
  }
  return out;
}

Eigen::MatrixXd expm_q(const GeneratorMatrix& q, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("expm_q: t must be nonnegative");
  return expm(t * q.q);
}

Eigen::VectorXd mass_rate(const GeneratorMatrix& q, const Eigen::VectorXd& lengths) {
  if (q.variant != ChainVariant::Dual)
    throw std::invalid_argument("mass_rate: only defined for the dual generator");
  if (lengths.size() != q.q.rows()) throw std::invalid_argument("mass_rate: size mismatch");
  return q.q.transpose() * lengths;
}

void write_q_csv(std::ostream& out, const GeneratorMatrix& q, const MetricGraph& graph) {
  CsvWriter csv(out);
  std::vector<std::string> header{"edge"};
  for (const auto& e : graph.edges()) header.push_back(e.id);
  csv.row(header);
  for (std::size_t i = 0; i < graph.edge_count(); ++i) {
    csv.field(graph.edge(i).id);
    for (Eigen::Index j = 0; j < q.q.cols(); ++j) csv.field(q.q(i, j));
    csv.end_row();
  }
}

}  // namespace graphdiff
