// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "graphdiff/edge_resolvent.hpp"
#include "graphdiff/evolution.hpp"
#include "graphdiff/expm.hpp"
#include "graphdiff/fem_l2.hpp"
#include "graphdiff/fv_l1.hpp"
#include "graphdiff/graph_config.hpp"
#include "graphdiff/limit_chain.hpp"

using namespace graphdiff;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

MetricGraph fixture(const std::string& name) {
  return load_graph_json(std::string(GRAPHDIFF_FIXTURES) + "/" + name + ".json");
}

MetricGraph unit_edge() {
  EdgeSpec e;
  e.id = "e";
  e.left_vertex = "u";
  e.right_vertex = "v";
  return MetricGraph({e});
}

std::string fmt(const char* format, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double indicator_e1(std::size_t i, double) { return i == 0 ? 1.0 : 0.0; }

// 1. FV resolvent against the closed form.
Outcome resolvent_oracle() {
  const auto g = unit_edge();
  const auto src = EdgeSource::polynomial({0.0, 1.0}, {0.0, 1.0});
  auto error = [&](double h) {
    const auto grid = EdgeGrid::uniform(g, h, GridKind::CellCentered);
    const auto gen = assemble_dual_fv(g, grid, 1.0);
    const auto phi = EdgeFunction::sample(grid, [](std::size_t, double x) { return x; });
    const Eigen::VectorXd u = resolvent_solve(gen, 1.0, phi.values);
    std::vector<double> xs;
    for (std::size_t k = 0; k < grid.cells(0); ++k) xs.push_back(grid.position(0, k));
    const auto exact = resolvent_apply({0.0, 1.0}, 1.0, src, xs);
    double acc = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) acc += grid.spacing(0) * std::abs(u[k] - exact[k]);
    return acc;
  };
  const double e400 = error(1.0 / 400), ratio = error(1.0 / 100) / error(1.0 / 200);
  return {e400 <= 1e-3 && ratio >= 3.5 && ratio <= 4.5,
          fmt("L1 error %.3e at h=1/400, ratio %.3f", e400, ratio)};
}

// 2. Method of images against the closed form.
Outcome image_series() {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  double worst = 0.0;
  for (double lambda : {0.25, 1.0, 4.0, 100.0}) {
    for (int trial = 0; trial < 8; ++trial) {
      const double a = coef(rng), b = a + 0.5 + 2.0 * std::abs(coef(rng));
      const auto src = EdgeSource::polynomial({a, b}, {coef(rng), coef(rng), coef(rng), coef(rng)});
      std::vector<double> xs;
      for (int k = 0; k <= 64; ++k) xs.push_back(a + (b - a) * k / 64.0);
      const auto closed = resolvent_apply({a, b}, lambda, src, xs);
      const auto series = resolvent_image_series({a, b}, lambda, src, xs, 1e-12);
      for (std::size_t k = 0; k < xs.size(); ++k)
        worst = std::max(worst, std::abs(closed[k] - series.values[k]));
    }
  }
  return {worst <= 1e-10, fmt("max deviation %.3e", worst)};
}

// 3. lambda psi_lambda tends to the mean.
Outcome averaging_limit() {
  const std::vector<double> lambdas{1e-1, 1e-2, 1e-3, 1e-4};
  const auto rows = averaging_limit_check({0.0, 1.0}, EdgeSource::polynomial({0.0, 1.0}, {0.0, 1.0}), lambdas);
  const bool ok = is_nonincreasing(rows, 0.0) && rows.back().distance <= 0.05;
  return {ok, fmt("distance %.3e at 1e-1, %.3e at 1e-4", rows.front().distance, rows.back().distance)};
}

// 4. Positivity and mass for the FV dual scheme.
Outcome markov_property() {
  const double h = 1.0 / 100, dt = 0.05;
  const auto star = fixture("star3_conservative");
  const auto grid = EdgeGrid::uniform(star, h, GridKind::CellCentered);
  const auto gen = assemble_dual_fv(star, grid, 1.0);
  const Eigen::MatrixXd step = expm(dt * gen.dense());
  const auto phi0 = EdgeFunction::sample(grid, [](std::size_t i, double x) {
    return i == 1 ? x : 0.2 * (1.0 + std::cos(3.0 * x));
  });
  const double mass0 = gen.weights.dot(phi0.values);
  double drift = 0.0, low = phi0.values.minCoeff();
  Eigen::VectorXd u = phi0.values;
  for (int k = 1; k <= 40; ++k) {
    u = step * u;
    drift = std::max(drift, std::abs(gen.weights.dot(u) - mass0));
    low = std::min(low, u.minCoeff());
  }

  // Sub-conservative star: mass decreases; its rate is w^T A u, which must
  // match the trace formula sum_i sigma_i (F_R - F_L) u and a difference
  // quotient of the mass curve.
  const auto sub = fixture("star3_subconservative");
  const auto sgrid = EdgeGrid::uniform(sub, h, GridKind::CellCentered);
  const auto sgen = assemble_dual_fv(sub, sgrid, 1.0);
  const auto table = trace_functionals(sub);
  const Eigen::MatrixXd a = sgen.dense();
  const Eigen::MatrixXd sstep = expm(dt * a);
  const double delta = 1e-3;
  // Stencil points come from forward propagation only; e^{-delta A} is unstable.
  const Eigen::MatrixXd to_stencil = expm((dt - 2.0 * delta) * a), near = expm(delta * a);
  auto mass = [&](const Eigen::VectorXd& v) { return sgen.weights.dot(v); };
  Eigen::VectorXd v = EdgeFunction::sample(sgrid, [](std::size_t i, double x) { return 1.0 + i * x; }).values;
  bool decreasing = true;
  double rate_formula = 0.0, rate_fd = 0.0;
  for (int k = 1; k <= 40; ++k) {
    const double before = mass(v);
    std::vector<double> m(5);
    Eigen::VectorXd w = to_stencil * v;
    for (int j = 0; j < 5; ++j, w = near * w) m[j] = mass(w);
    v = sstep * v;
    decreasing = decreasing && mass(v) < before;
    const double rate = sgen.weights.dot(a * v);
    auto trace = [&](EndpointRef at) {
      const std::size_t cell = at.side == Side::Left ? 0 : sgrid.cells(at.edge) - 1;
      return v[static_cast<Eigen::Index>(sgrid.index(at.edge, cell))];
    };
    double formula = 0.0;
    for (std::size_t i = 0; i < sub.edge_count(); ++i)
      formula += sub.sigma(i) * (table.right[i].apply(trace) - table.left[i].apply(trace));
    const double fd = (8.0 * (m[3] - m[1]) - (m[4] - m[0])) / (12.0 * delta);
    rate_formula = std::max(rate_formula, std::abs(rate - formula));
    if (k >= 4) rate_fd = std::max(rate_fd, std::abs(rate - fd));
  }
  const bool ok = drift <= 1e-10 && low >= -1e-10 && decreasing && rate_formula <= 1e-8 && rate_fd <= 1e-8;
  return {ok, fmt("drift %.2e, min %.2e; sub-conservative rate vs traces %.2e, vs difference quotient %.2e",
                  drift, low, rate_formula, rate_fd)};
}

// 5. Column sums and the chain semigroup.
Outcome limit_chain_structure() {
  double sums = 0.0, neg = 0.0, conservation = 0.0;
  for (const char* name : {"star3_conservative", "star3_subconservative", "ring4", "chain2"}) {
    const auto g = fixture(name);
    const auto q = build_q(g, ChainVariant::Dual);
    const Eigen::VectorXd d = edge_lengths(g);
    const std::size_t n = g.edge_count();
    for (std::size_t j = 0; j < n; ++j) {
      double passed = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (i != j) passed += g.coupling(j, Side::Left, i) + g.coupling(j, Side::Right, i);
      const double expected =
          g.sigma(j) * (passed - g.total({j, Side::Left}) - g.total({j, Side::Right}));
      double column = 0.0;
      for (std::size_t i = 0; i < n; ++i) column += d[i] * q.q(i, j);
      sums = std::max(sums, std::abs(column - expected));
    }
    const bool conservative = validate(g).conservative;
    for (double t : {0.1, 1.0, 10.0}) {
      const Eigen::MatrixXd e = expm_q(q, t);
      neg = std::min(neg, e.minCoeff());
      if (conservative) conservation = std::max(conservation, (d.transpose() * e - d.transpose()).cwiseAbs().maxCoeff());
    }
  }
  return {sums <= 1e-14 && neg >= 0.0 && conservation <= 1e-10,
          fmt("column sums %.1e, min entry %.1e, mass %.1e", sums, neg, conservation)};
}

SweepResult star_sweep(Discretization disc) {
  SweepConfig config;
  config.kappas = {1.0, 10.0, 100.0, 1000.0};
  config.times = {1.0};
  config.h = 1.0 / 200;
  config.disc = disc;
  return kappa_sweep(fixture("star3_conservative"), config, indicator_e1);
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t k = 1; k < v.size(); ++k)
    if (!(v[k] < v[k - 1])) return false;
  return true;
}

std::string list(const std::vector<double>& v) {
  std::ostringstream os;
  for (std::size_t k = 0; k < v.size(); ++k) os << (k ? " " : "") << fmt("%.3e", v[k]);
  return os.str();
}

// 6. Convergence to the chain in L^1.
Outcome convergence_l1(const SweepResult& fv) {
  std::vector<double> errs;
  for (const auto& row : fv.rows) errs.push_back(row.err_l1);
  const bool ok = strictly_decreasing(errs) && errs.back() <= 0.05 * 1.0;
  return {ok, "err_l1 over kappa 1..1000: " + list(errs)};
}

// 7. Same experiment on the FEM path.
Outcome convergence_l2(const SweepResult& fv, const SweepResult& fem) {
  std::vector<double> errs;
  for (const auto& row : fem.rows) errs.push_back(row.err_l2);
  const double factor = errs.back() / fv.rows.back().err_l2;

  // FEM element averages against FV cells with the same subdivision.
  const auto star = fixture("star3_conservative");
  const double h = 1.0 / 200;
  const auto cells = EdgeGrid::uniform(star, h, GridKind::CellCentered);
  const auto nodes = EdgeGrid::uniform(star, h, GridKind::NodeCentered);
  double worst = 0.0;
  for (double kappa : {1.0, 10.0, 100.0, 1000.0}) {
    const auto gen = assemble_dual_fv(star, cells, kappa);
    const Eigen::VectorXd u = propagate(gen, EdgeFunction::sample(cells, indicator_e1).values, 1.0,
                                        Method::CrankNicolson, 1e-10);
    const auto sys = assemble_forms(star, nodes, kappa);
    const Eigen::VectorXd v =
        propagate(generator_l2(sys), EdgeFunction::sample(nodes, indicator_e1).values, 1.0,
                  Method::CrankNicolson, 1e-10);
    double diff = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < star.edge_count(); ++i) {
      for (std::size_t k = 0; k < cells.cells(i); ++k) {
        const double avg = 0.5 * (v[static_cast<Eigen::Index>(nodes.index(i, k))] +
                                  v[static_cast<Eigen::Index>(nodes.index(i, k + 1))]);
        const double fvv = u[static_cast<Eigen::Index>(cells.index(i, k))];
        diff += cells.spacing(i) * (avg - fvv) * (avg - fvv);
        ref += cells.spacing(i) * fvv * fvv;
      }
    }
    worst = std::max(worst, std::sqrt(diff / ref));
  }
  const double tol = std::max(5e-3, 10.0 * h * h);
  const bool ok = strictly_decreasing(errs) && factor <= 2.0 && factor >= 0.5 && worst <= tol;
  return {ok, "err_l2 over kappa 1..1000: " + list(errs) +
                  fmt("; FEM/FV at 1000: %.3f; FV vs FEM relative L2 %.2e", factor, worst)};
}

// 8. Pairing defect under refinement.
Outcome duality() {
  double worst = 0.0;
  int runs = 0;
  for (const char* name : {"star3_conservative", "star3_subconservative", "ring4", "chain2"}) {
    const auto g = fixture(name);
    for (double kappa : {0.5, 4.0}) {
      for (unsigned seed : {1u, 2u, 3u}) {
        const auto f = enforce_primal_conditions(g, kappa, trigonometric_field(g, seed));
        const auto phi = enforce_dual_conditions(g, kappa, trigonometric_field(g, seed + 10));
        const auto rows = duality_refinement(g, 0.025, 3, kappa, f, phi);
        for (std::size_t k = 1; k < rows.size(); ++k) worst = std::max(worst, rows[k].ratio);
        ++runs;
      }
    }
  }
  return {worst <= 0.75, fmt("worst ratio %.3f over %d refinement studies", worst, runs)};
}

// 9. Semigroup law; exponential against Crank-Nicolson.
Outcome semigroup() {
  const auto g = fixture("star3_subconservative");
  const auto grid = EdgeGrid::uniform(g, 1.0 / 50, GridKind::CellCentered);
  const Eigen::VectorXd phi =
      EdgeFunction::sample(grid, [](std::size_t i, double x) { return 1.0 + std::sin(3.0 * x + i); }).values;
  const auto gen = assemble_dual_fv(g, grid, 3.0);
  const Eigen::VectorXd direct = propagate(gen, phi, 0.7);
  const Eigen::VectorXd composed = propagate(gen, propagate(gen, phi, 0.3), 0.4);
  const double law = (direct - composed).lpNorm<Eigen::Infinity>() / phi.lpNorm<Eigen::Infinity>();
  const auto stiff = assemble_dual_fv(g, grid, 1e4);
  const Eigen::VectorXd a = propagate(stiff, phi, 0.5, Method::Expm);
  const Eigen::VectorXd b = propagate(stiff, phi, 0.5, Method::CrankNicolson);
  const double methods = (a - b).lpNorm<Eigen::Infinity>() / a.lpNorm<Eigen::Infinity>();
  return {law <= 1e-7 && methods <= 1e-6, fmt("semigroup %.2e, expm vs CN %.2e", law, methods)};
}

// 10. L^2 growth bound with the empirical constant.
Outcome growth_bound() {
  std::ostringstream detail;
  bool ok = true;
  std::mt19937 rng(10);
  std::normal_distribution<double> normal;
  for (const char* name : {"star3_conservative", "star3_subconservative", "ring4", "chain2"}) {
    const auto g = fixture(name);
    std::vector<double> gammas;
    for (double h : {0.1, 0.05, 0.025}) {
      const auto sys = assemble_forms(g, EdgeGrid::uniform(g, h, GridKind::NodeCentered), 1.0);
      const double gamma = gamma_emp(sys);
      ok = ok && std::isfinite(gamma);
      gammas.push_back(gamma);
      Eigen::VectorXd u0(static_cast<Eigen::Index>(sys.grid.size()));
      for (auto& x : u0) x = normal(rng);
      for (double t : {0.1, 0.5, 1.0, 2.0})
        ok = ok && m_norm(sys, evolve_l2(sys, u0, t)) <= std::exp(gamma * t) * m_norm(sys, u0) * (1 + 1e-10);
    }
    for (std::size_t k = 1; k < gammas.size(); ++k) {
      if (gammas[k] == 0.0 && gammas[k - 1] == 0.0) continue;
      ok = ok && std::abs(gammas[k] - gammas[k - 1]) <= 0.1 * gammas[k - 1];
    }
    detail << name << fmt(" %.4f/%.4f/%.4f; ", gammas[0], gammas[1], gammas[2]);
  }
  std::string text = "gamma_emp at h=0.1/0.05/0.025: " + detail.str();
  text.resize(text.size() - 2);
  return {ok, text};
}

}  // namespace

int main() {
  int failures = 0;
  auto run = [&](int id, const char* title, const std::function<Outcome()>& criterion) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criterion();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %2d %s: %s [%.1fs]\n", outcome.pass ? "PASS" : "FAIL", id, title,
                outcome.detail.c_str(), secs);
    std::fflush(stdout);
    failures += outcome.pass ? 0 : 1;
  };

  run(1, "resolvent oracle", resolvent_oracle);
  run(2, "image series", image_series);
  run(3, "averaging limit", averaging_limit);
  run(4, "Markov property", markov_property);
  run(5, "limit chain structure", limit_chain_structure);
  SweepResult fv, fem;
  run(6, "L1 convergence to the chain", [&] {
    fv = star_sweep(Discretization::FV);
    return convergence_l1(fv);
  });
  run(7, "L2 convergence, FEM path", [&] {
    fem = star_sweep(Discretization::FEM);
    return convergence_l2(fv, fem);
  });
  run(8, "duality under refinement", duality);
  run(9, "semigroup law and integrators", semigroup);
  run(10, "L2 growth bound", growth_bound);
  return failures == 0 ? 0 : 1;
}
