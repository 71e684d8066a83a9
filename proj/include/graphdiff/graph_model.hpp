#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace graphdiff {

enum class Side { Left, Right };

const char* to_string(Side side);

/// One endpoint of an edge: side Left is the initial vertex L_i, Right the terminal R_i.
struct EndpointRef {
  std::size_t edge = 0;
  Side side = Side::Left;

  friend bool operator==(const EndpointRef&, const EndpointRef&) = default;
  friend auto operator<=>(const EndpointRef&, const EndpointRef&) = default;
};

/// User-facing description of an edge. Coupling coefficients are keyed by the
/// target edge id: `l_to[j]` is the share of the left permeability of this edge
/// that is passed on to edge `j`, and similarly for `r_to`.
struct EdgeSpec {
  std::string id;
  double length = 1.0;
  double sigma = 1.0;
  std::string left_vertex;
  std::string right_vertex;
  double l = 0.0;
  double r = 0.0;
  std::map<std::string, double> l_to;
  std::map<std::string, double> r_to;
};

class InvalidGraph : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Finite metric graph with semipermeable vertices.
///
/// Construction only resolves ids to indices; admissibility is checked by
/// validate(). The object is immutable afterwards.
class MetricGraph {
 public:
  explicit MetricGraph(std::vector<EdgeSpec> edges);

  std::size_t edge_count() const { return edges_.size(); }
  const EdgeSpec& edge(std::size_t i) const { return edges_.at(i); }
  const std::vector<EdgeSpec>& edges() const { return edges_; }
  std::vector<std::string> vertices() const;

  std::optional<std::size_t> index_of(const std::string& id) const;
  const std::string& vertex_of(EndpointRef at) const;

  double length(std::size_t i) const { return edges_.at(i).length; }
  double sigma(std::size_t i) const { return edges_.at(i).sigma; }
  /// Total permeability at an endpoint (l_i or r_i).
  double total(EndpointRef at) const;
  /// Pass-through coefficient from edge `source` through its `side` endpoint
  /// into edge `target` (l_ij or r_ij); zero when not supplied.
  double coupling(std::size_t source, Side side, std::size_t target) const;

  /// Resolved sparse couplings keyed by (source, side, target).
  const std::map<std::tuple<std::size_t, Side, std::size_t>, double>& couplings() const {
    return couplings_;
  }
  /// Coupling entries whose target id did not resolve to an edge.
  const std::vector<std::string>& unresolved() const { return unresolved_; }

 private:
  std::vector<EdgeSpec> edges_;
  std::map<std::string, std::size_t> index_;
  std::map<std::tuple<std::size_t, Side, std::size_t>, double> couplings_;
  std::vector<std::string> unresolved_;
};

struct ValidationReport {
  std::vector<std::string> violations;
  /// Non-fatal observations (e.g. permeabilities above 1).
  std::vector<std::string> warnings;
  bool conservative = false;

  bool ok() const { return violations.empty(); }
};

ValidationReport validate(const MetricGraph& graph);

/// Throws InvalidGraph listing the violations when the graph is not admissible.
void require_valid(const MetricGraph& graph);

/// Edges j != i sharing the vertex of `at`, each tagged with its own endpoint
/// at that vertex. Ordered by edge index.
std::vector<EndpointRef> incident_edges(const MetricGraph& graph, EndpointRef at);

struct TraceTerm {
  EndpointRef at;
  double coef = 0.0;
};

/// Linear functional on endpoint traces: F(phi) = sum coef * phi(at).
struct TraceFunctional {
  std::vector<TraceTerm> terms;

  template <typename TraceFn>
  double apply(TraceFn&& trace) const {
    double acc = 0.0;
    for (const auto& term : terms) acc += term.coef * trace(term.at);
    return acc;
  }
  double coefficient(EndpointRef at) const;
  bool is_zero() const;
};

/// F_{L,i} and F_{R,i} for every edge. The self term is always first:
/// coefficient l_i at (i, Left) in left[i], and -r_i at (i, Right) in right[i].
struct TraceFunctionalTable {
  std::vector<TraceFunctional> left;
  std::vector<TraceFunctional> right;

  const TraceFunctional& at(EndpointRef end) const {
    return end.side == Side::Left ? left.at(end.edge) : right.at(end.edge);
  }
};

TraceFunctionalTable trace_functionals(const MetricGraph& graph);

}  // namespace graphdiff
