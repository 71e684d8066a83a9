#include "graphdiff/graph_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace graphdiff {

namespace {

// Sums of pass-through coefficients are compared against the totals with a
// relative slack so that decimal inputs like 0.6 + 0.4 == 1 are accepted.
constexpr double kSumSlack = 1e-12;

bool sum_within(double sum, double total) {
  return sum <= total + kSumSlack * std::max(1.0, std::abs(total));
}

bool sum_equal(double sum, double total) {
  return std::abs(sum - total) <= kSumSlack * std::max(1.0, std::abs(total));
}

}  // namespace

const char* to_string(Side side) { return side == Side::Left ? "left" : "right"; }

MetricGraph::MetricGraph(std::vector<EdgeSpec> edges) : edges_(std::move(edges)) {
  for (std::size_t i = 0; i < edges_.size(); ++i) index_.emplace(edges_[i].id, i);

  for (std::size_t i = 0; i < edges_.size(); ++i) {
    for (Side side : {Side::Left, Side::Right}) {
      const auto& targets = side == Side::Left ? edges_[i].l_to : edges_[i].r_to;
      for (const auto& [target_id, coef] : targets) {
        auto it = index_.find(target_id);
        if (it == index_.end()) {
          unresolved_.push_back("edge '" + edges_[i].id + "' " + to_string(side) +
                                " coupling references unknown edge '" + target_id + "'");
          continue;
        }
        couplings_[{i, side, it->second}] = coef;
      }
    }
  }
}

std::vector<std::string> MetricGraph::vertices() const {
  std::set<std::string> unique;
  for (const auto& e : edges_) {
    unique.insert(e.left_vertex);
    unique.insert(e.right_vertex);
  }
  return {unique.begin(), unique.end()};
}

std::optional<std::size_t> MetricGraph::index_of(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const std::string& MetricGraph::vertex_of(EndpointRef at) const {
  const auto& e = edges_.at(at.edge);
  return at.side == Side::Left ? e.left_vertex : e.right_vertex;
}

double MetricGraph::total(EndpointRef at) const {
  const auto& e = edges_.at(at.edge);
  return at.side == Side::Left ? e.l : e.r;
}

double MetricGraph::coupling(std::size_t source, Side side, std::size_t target) const {
  auto it = couplings_.find({source, side, target});
  return it == couplings_.end() ? 0.0 : it->second;
}

ValidationReport validate(const MetricGraph& graph) {
  ValidationReport report;
  auto violation = [&](std::size_t i, const std::string& what) {
    report.violations.push_back("edge '" + graph.edge(i).id + "': " + what);
  };

  if (graph.edge_count() == 0) {
    report.violations.push_back("graph has no edges");
    return report;
  }

  std::set<std::string> seen;
  for (std::size_t i = 0; i < graph.edge_count(); ++i) {
    const auto& e = graph.edge(i);
    if (e.id.empty()) violation(i, "empty edge id");
    if (!seen.insert(e.id).second) violation(i, "duplicate edge id");
    if (!(std::isfinite(e.length) && e.length > 0.0)) violation(i, "length must be positive");
    if (!(std::isfinite(e.sigma) && e.sigma > 0.0)) violation(i, "sigma must be positive");
    if (e.left_vertex.empty() || e.right_vertex.empty()) violation(i, "missing vertex id");
    if (e.left_vertex == e.right_vertex) violation(i, "loop (left and right vertex coincide)");
    if (!(std::isfinite(e.l) && e.l >= 0.0)) violation(i, "l must be nonnegative");
    if (!(std::isfinite(e.r) && e.r >= 0.0)) violation(i, "r must be nonnegative");
    if (e.l > 1.0 || e.r > 1.0) {
      report.warnings.push_back("edge '" + e.id +
                                "': total permeability above 1 (treated as a rate)");
    }
  }
  for (const auto& msg : graph.unresolved()) report.violations.push_back(msg);

  bool conservative = true;
  for (std::size_t i = 0; i < graph.edge_count(); ++i) {
    const auto& e = graph.edge(i);
    for (Side side : {Side::Left, Side::Right}) {
      const std::string& vertex = graph.vertex_of({i, side});
      double sum = 0.0;
      for (const auto& [key, coef] : graph.couplings()) {
        const auto& [source, s, target] = key;
        if (source != i || s != side) continue;
        std::ostringstream where;
        where << to_string(side) << " coupling to '" << graph.edge(target).id << "'";
        if (target == i) violation(i, where.str() + " targets the edge itself");
        if (!(std::isfinite(coef) && coef >= 0.0)) violation(i, where.str() + " is negative");
        const auto& t = graph.edge(target);
        if (target != i && t.left_vertex != vertex && t.right_vertex != vertex) {
          violation(i, where.str() + " but that edge is not incident at vertex '" + vertex + "'");
        }
        sum += coef;
      }
      const double total = side == Side::Left ? e.l : e.r;
      if (!sum_within(sum, total)) {
        std::ostringstream msg;
        msg << "sum of " << to_string(side) << " couplings " << sum << " exceeds "
            << (side == Side::Left ? "l" : "r") << " = " << total;
        violation(i, msg.str());
      }
      if (!sum_equal(sum, total)) conservative = false;
    }
  }
  report.conservative = conservative && report.violations.empty();
  return report;
}

void require_valid(const MetricGraph& graph) {
  auto report = validate(graph);
  if (report.ok()) return;
  std::string msg = "invalid graph:";
  for (const auto& v : report.violations) msg += "\n  " + v;
  throw InvalidGraph(msg);
}

std::vector<EndpointRef> incident_edges(const MetricGraph& graph, EndpointRef at) {
  if (at.edge >= graph.edge_count()) throw std::out_of_range("unknown edge index");
  const std::string& vertex = graph.vertex_of(at);
  std::vector<EndpointRef> out;
  for (std::size_t j = 0; j < graph.edge_count(); ++j) {
    if (j == at.edge) continue;
    const auto& e = graph.edge(j);
    if (e.left_vertex == vertex) {
      out.push_back({j, Side::Left});
    } else if (e.right_vertex == vertex) {
      out.push_back({j, Side::Right});
    }
  }
  return out;
}

double TraceFunctional::coefficient(EndpointRef at) const {
  double c = 0.0;
  for (const auto& t : terms)
    if (t.at == at) c += t.coef;
  return c;
}

bool TraceFunctional::is_zero() const {
  return std::all_of(terms.begin(), terms.end(), [](const TraceTerm& t) { return t.coef == 0.0; });
}

TraceFunctionalTable trace_functionals(const MetricGraph& graph) {
  require_valid(graph);
  const std::size_t n = graph.edge_count();
  TraceFunctionalTable table;
  table.left.resize(n);
  table.right.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    const double sigma_i = graph.sigma(i);
    for (Side side : {Side::Left, Side::Right}) {
      auto& fn = side == Side::Left ? table.left[i] : table.right[i];
      const double self = graph.total({i, side});
      fn.terms.push_back({{i, side}, side == Side::Left ? self : -self});
      // Inflow from each edge j meeting this endpoint, through j's own endpoint.
      const double sign = side == Side::Left ? -1.0 : 1.0;
      for (const auto& other : incident_edges(graph, {i, side})) {
        const double c = graph.coupling(other.edge, other.side, i);
        if (c == 0.0) continue;
        fn.terms.push_back({other, sign * graph.sigma(other.edge) * c / sigma_i});
      }
    }
  }
  return table;
}

}  // namespace graphdiff
