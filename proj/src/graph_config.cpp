#include "graphdiff/graph_config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace graphdiff {

namespace {

using nlohmann::json;

double number_or(const json& obj, const char* key, double fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number()) throw ParseError(std::string("field '") + key + "' must be a number");
  return it->get<double>();
}

std::string string_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(std::string("missing field '") + key + "'");
  if (!it->is_string()) throw ParseError(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

std::map<std::string, double> coupling_map(const json& obj, const char* key) {
  std::map<std::string, double> out;
  auto it = obj.find(key);
  if (it == obj.end()) return out;
  if (!it->is_object()) throw ParseError(std::string("field '") + key + "' must be an object");
  for (const auto& [target, value] : it->items()) {
    if (!value.is_number())
      throw ParseError(std::string("coefficient '") + key + "." + target + "' must be a number");
    out[target] = value.get<double>();
  }
  return out;
}

}  // namespace

MetricGraph parse_graph_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("edges") || !doc["edges"].is_array())
    throw ParseError("top level must be an object with an 'edges' array");

  std::vector<EdgeSpec> edges;
  std::size_t position = 0;
  for (const auto& item : doc["edges"]) {
    if (!item.is_object())
      throw ParseError("edge #" + std::to_string(position) + " is not an object");
    try {
      EdgeSpec e;
      e.id = string_field(item, "id");
      if (!item.contains("length")) throw ParseError("missing field 'length'");
      e.length = number_or(item, "length", 0.0);
      e.sigma = number_or(item, "sigma", 1.0);
      e.left_vertex = string_field(item, "left_vertex");
      e.right_vertex = string_field(item, "right_vertex");
      e.l = number_or(item, "l", 0.0);
      e.r = number_or(item, "r", 0.0);
      e.l_to = coupling_map(item, "l_to");
      e.r_to = coupling_map(item, "r_to");
      edges.push_back(std::move(e));
    } catch (const ParseError& err) {
      throw ParseError("edge #" + std::to_string(position) + ": " + err.what());
    }
    ++position;
  }
  return MetricGraph(std::move(edges));
}

MetricGraph load_graph_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open graph file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_graph_json(buf.str());
}

std::string to_json(const MetricGraph& graph) {
  json edges = json::array();
  for (const auto& e : graph.edges()) {
    edges.push_back({{"id", e.id},
                     {"length", e.length},
                     {"sigma", e.sigma},
                     {"left_vertex", e.left_vertex},
                     {"right_vertex", e.right_vertex},
                     {"l", e.l},
                     {"r", e.r},
                     {"l_to", e.l_to},
                     {"r_to", e.r_to}});
  }
  return json{{"edges", edges}}.dump(2);
}

}  // namespace graphdiff
