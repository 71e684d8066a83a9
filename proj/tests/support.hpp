#pragma once

#include <string>

#include "graphdiff/graph_config.hpp"
#include "graphdiff/graph_model.hpp"

namespace testing {

inline graphdiff::MetricGraph fixture(const std::string& name) {
  return graphdiff::load_graph_json(std::string(GRAPHDIFF_FIXTURES) + "/" + name + ".json");
}

inline std::string fixture_path(const std::string& name) {
  return std::string(GRAPHDIFF_FIXTURES) + "/" + name + ".json";
}

inline graphdiff::MetricGraph single_edge(double length = 1.0, double sigma = 1.0) {
  graphdiff::EdgeSpec e;
  e.id = "e";
  e.length = length;
  e.sigma = sigma;
  e.left_vertex = "u";
  e.right_vertex = "v";
  return graphdiff::MetricGraph({e});
}

}  // namespace testing
