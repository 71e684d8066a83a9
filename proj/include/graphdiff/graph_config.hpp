#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "graphdiff/graph_model.hpp"

namespace graphdiff {

/// Malformed configuration text or unreadable file.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses the JSON graph description:
///
///   {"edges": [{"id": "e1", "length": 1.0, "sigma": 1.0,
///               "left_vertex": "u", "right_vertex": "v",
///               "l": 0.0, "r": 1.0,
///               "l_to": {}, "r_to": {"e2": 0.5, "e3": 0.5}}, ...]}
///
/// `sigma`, `l`, `r`, `l_to` and `r_to` are optional (defaults 1, 0, 0, {}, {}).
/// Edge indices follow file order. Throws ParseError on syntax or type errors;
/// semantic problems are left to validate().
MetricGraph parse_graph_json(const std::string& text);
MetricGraph load_graph_json(const std::filesystem::path& path);

std::string to_json(const MetricGraph& graph);

}  // namespace graphdiff
