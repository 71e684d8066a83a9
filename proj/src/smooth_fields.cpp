#include <array>
#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "graphdiff/fv_l1.hpp"

namespace graphdiff {

namespace {

// Bumps on [0, d] with zero endpoint values and unit slope at one end:
// left(x) = x (1 - x/d)^2, right(x) = (x - d) (x/d)^2.
struct Bump {
  static double left(double x, double d, int order) {
    const double u = x / d;
    switch (order) {
      case 0: return x * (1 - u) * (1 - u);
      case 1: return (1 - u) * (1 - 3 * u);
      default: return (6 * u - 4) / d;
    }
  }
  static double right(double x, double d, int order) {
    const double u = x / d;
    switch (order) {
      case 0: return (x - d) * u * u;
      case 1: return 3 * u * u - 2 * u;
      default: return (6 * u - 2) / d;
    }
  }
};

double endpoint_value(const MetricGraph& graph, const SmoothEdgeField& g, EndpointRef at) {
  return g.value(at.edge, at.side == Side::Left ? 0.0 : graph.length(at.edge));
}

SmoothEdgeField corrected(const MetricGraph& graph, const SmoothEdgeField& base,
                          std::vector<double> left_slopes, std::vector<double> right_slopes) {
  auto alpha = std::make_shared<std::vector<double>>();
  auto beta = std::make_shared<std::vector<double>>();
  auto lengths = std::make_shared<std::vector<double>>();
  for (std::size_t i = 0; i < graph.edge_count(); ++i) {
    const double d = graph.length(i);
    alpha->push_back(left_slopes[i] - base.first(i, 0.0));
    beta->push_back(right_slopes[i] - base.first(i, d));
    lengths->push_back(d);
  }
  auto make = [=](int order, std::function<double(std::size_t, double)> g) {
    return [=](std::size_t i, double x) {
      const double d = (*lengths)[i];
      return g(i, x) + (*alpha)[i] * Bump::left(x, d, order) + (*beta)[i] * Bump::right(x, d, order);
    };
  };
  return {make(0, base.value), make(1, base.first), make(2, base.second)};
}

}  // namespace

SmoothEdgeField enforce_primal_conditions(const MetricGraph& graph, double kappa,
                                          const SmoothEdgeField& base) {
  require_valid(graph);
  std::vector<double> left, right;
  for (std::size_t i = 0; i < graph.edge_count(); ++i) {
    double value[2];
    for (Side side : {Side::Left, Side::Right}) {
      double acc = graph.total({i, side}) * endpoint_value(graph, base, {i, side});
      for (const auto& other : incident_edges(graph, {i, side}))
        acc -= graph.coupling(i, side, other.edge) * endpoint_value(graph, base, other);
      value[side == Side::Left ? 0 : 1] = acc / kappa;
    }
    left.push_back(value[0]);
    right.push_back(-value[1]);
  }
  return corrected(graph, base, std::move(left), std::move(right));
}

SmoothEdgeField enforce_dual_conditions(const MetricGraph& graph, double kappa,
                                        const SmoothEdgeField& base) {
  const auto table = trace_functionals(graph);
  auto trace = [&](EndpointRef at) { return endpoint_value(graph, base, at); };
  std::vector<double> left, right;
  for (std::size_t i = 0; i < graph.edge_count(); ++i) {
    left.push_back(table.left[i].apply(trace) / kappa);
    right.push_back(table.right[i].apply(trace) / kappa);
  }
  return corrected(graph, base, std::move(left), std::move(right));
}

SmoothEdgeField trigonometric_field(const MetricGraph& graph, unsigned seed) {
  struct Mode {
    double amplitude, phase, wavenumber;
  };
  auto modes = std::make_shared<std::vector<std::array<Mode, 3>>>();
  auto offsets = std::make_shared<std::vector<double>>();
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  for (std::size_t i = 0; i < graph.edge_count(); ++i) {
    std::array<Mode, 3> m{};
    for (int k = 0; k < 3; ++k)
      m[k] = {amp(rng), phase(rng), (k + 1) * std::numbers::pi / graph.length(i)};
    modes->push_back(m);
    offsets->push_back(amp(rng));
  }
  auto make = [=](int order) {
    return [=](std::size_t i, double x) {
      double acc = order == 0 ? (*offsets)[i] : 0.0;
      for (const auto& m : (*modes)[i]) {
        const double arg = m.wavenumber * x + m.phase;
        switch (order) {
          case 0: acc += m.amplitude * std::cos(arg); break;
          case 1: acc -= m.amplitude * m.wavenumber * std::sin(arg); break;
          default: acc -= m.amplitude * m.wavenumber * m.wavenumber * std::cos(arg); break;
        }
      }
      return acc;
    };
  };
  return {make(0), make(1), make(2)};
}

}  // namespace graphdiff
