#include "graphdiff/evolution.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <Eigen/SparseLU>

#include "graphdiff/csv.hpp"
#include "graphdiff/expm.hpp"
#include "graphdiff/fem_l2.hpp"
#include "graphdiff/limit_chain.hpp"

namespace graphdiff {

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Lu = Eigen::SparseLU<SparseMatrix>;

SparseMatrix mass_or_identity(const DiscreteGenerator& gen) {
  if (gen.has_mass()) return gen.mass;
  SparseMatrix id(gen.op.rows(), gen.op.cols());
  id.setIdentity();
  return id;
}

void require_compatible(const DiscreteGenerator& gen, const Eigen::VectorXd& v) {
  if (static_cast<std::size_t>(v.size()) != gen.size())
    throw std::invalid_argument("vector does not match the generator's grid");
}

// Crank-Nicolson with step doubling. Factorizations are cached by step size;
// steps stay on the dyadic lattice t 2^-k except for the final one.
class CrankNicolson {
 public:
  explicit CrankNicolson(const DiscreteGenerator& gen) : op_(gen.op), mass_(mass_or_identity(gen)) {}

  Eigen::VectorXd step(const Eigen::VectorXd& u, double dt) {
    const Eigen::VectorXd rhs = mass_ * u + (0.5 * dt) * (op_ * u);
    Eigen::VectorXd y = solver(dt).solve(rhs);
    if (!y.allFinite()) throw std::runtime_error("Crank-Nicolson solve failed");
    return y;
  }

  Eigen::VectorXd run(Eigen::VectorXd u, double t, double tol) {
    double dt = std::ldexp(t, -20);
    double time = 0.0;
    for (long steps = 0; time < t; ++steps) {
      if (steps > 2'000'000) throw std::runtime_error("Crank-Nicolson: too many steps");
      const bool last = time + dt >= t;
      const double h = last ? t - time : dt;
      const Eigen::VectorXd coarse = step(u, h);
      const Eigen::VectorXd half = step(u, 0.5 * h);
      const Eigen::VectorXd fine = step(half, 0.5 * h);
      const double scale = std::max(fine.lpNorm<Eigen::Infinity>(), 1e-300);
      const double err = (fine - coarse).lpNorm<Eigen::Infinity>() / 3.0;
      const double target = tol * scale;
      if (err <= target) {
        u = fine;
        time = last ? t : time + h;
        if (err <= target / 16.0 && !last) dt = std::min(2.0 * dt, t);
      } else {
        dt = 0.5 * h;
        if (dt < t * 1e-15) throw std::runtime_error("Crank-Nicolson: step size underflow");
      }
    }
    return u;
  }

 private:
  Lu& solver(double dt) {
    auto it = cache_.find(dt);
    if (it != cache_.end()) return *it->second;
    auto lu = std::make_unique<Lu>();
    SparseMatrix lhs = mass_ - (0.5 * dt) * op_;
    lhs.makeCompressed();
    lu->compute(lhs);
    if (lu->info() != Eigen::Success) throw std::runtime_error("Crank-Nicolson factorization failed");
    return *cache_.emplace(dt, std::move(lu)).first->second;
  }

  SparseMatrix op_;
  SparseMatrix mass_;
  std::map<double, std::unique_ptr<Lu>> cache_;
};

// Dense e^{dt A} with reuse: e^{2s A} = (e^{s A})^2 when e^{s A} is known.
class ExponentialCache {
 public:
  explicit ExponentialCache(Eigen::MatrixXd a) : a_(std::move(a)) {}

  const Eigen::MatrixXd& get(double dt) {
    if (auto it = cache_.find(dt); it != cache_.end()) return it->second;
    if (auto it = cache_.find(0.5 * dt); it != cache_.end()) {
      Eigen::MatrixXd sq = it->second * it->second;
      return cache_.emplace(dt, std::move(sq)).first->second;
    }
    return cache_.emplace(dt, expm(dt * a_)).first->second;
  }

 private:
  Eigen::MatrixXd a_;
  std::map<double, Eigen::MatrixXd> cache_;
};

struct SweepSetup {
  EdgeGrid grid;
  Eigen::VectorXd phi0;
  GeneratorMatrix q;
  PiecewiseConstant p0;
};

Eigen::VectorXd error_weights(const DiscreteGenerator& gen) { return gen.weights; }

std::vector<SweepRow> sweep_one(const MetricGraph& graph, const SweepConfig& config,
                                const SweepSetup& setup, double kappa) {
  std::unique_ptr<FemSystem> fem;
  DiscreteGenerator gen = [&] {
    if (config.disc == Discretization::FV)
      return assemble_dual_fv(graph, setup.grid, kappa, config.trace_order);
    fem = std::make_unique<FemSystem>(assemble_forms(graph, setup.grid, kappa));
    return generator_l2(*fem);
  }();
  const Eigen::VectorXd w = error_weights(gen);
  const double mass0 = w.dot(setup.phi0);

  std::vector<std::size_t> order(config.times.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return config.times[a] < config.times[b]; });

  std::unique_ptr<ExponentialCache> dense;
  if (config.method == Method::Expm) dense = std::make_unique<ExponentialCache>(gen.dense());

  std::vector<SweepRow> rows(config.times.size());
  Eigen::VectorXd u = setup.phi0;
  double now = 0.0;
  for (std::size_t k : order) {
    const double t = config.times[k];
    if (t > now) {
      u = dense ? Eigen::VectorXd(dense->get(t - now) * u) : propagate(gen, u, t - now, config.method);
      now = t;
    }
    const Eigen::VectorXd chain = expm_q(setup.q, t) * setup.p0.values;
    const Eigen::VectorXd err = u - lift(PiecewiseConstant{chain, setup.p0.lengths}, setup.grid).values;

    SweepRow row;
    row.kappa = kappa;
    row.t = t;
    row.err_l1 = w.dot(err.cwiseAbs());
    row.err_l2 = fem ? m_norm(*fem, err) : std::sqrt(w.dot(err.cwiseAbs2()));
    const auto projected = project_p(EdgeFunction{setup.grid, u});
    row.err_projected = setup.p0.lengths.dot((projected.values - chain).cwiseAbs());
    row.mass_drift = w.dot(u) - mass0;
    row.min_value = u.minCoeff();
    rows[k] = row;
  }
  return rows;
}

}  // namespace

Eigen::VectorXd propagate(const DiscreteGenerator& gen, const Eigen::VectorXd& phi0, double t,
                          Method method, double tol) {
  require_compatible(gen, phi0);
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("propagate: t must be >= 0");
  if (t == 0.0) return phi0;
  if (method == Method::Expm) {
    if (gen.size() > kDenseLimit)
      throw std::invalid_argument("propagate: system too large for the dense exponential");
    return expm(t * gen.dense()) * phi0;
  }
  return CrankNicolson(gen).run(phi0, t, tol);
}

Eigen::VectorXd resolvent_solve(const DiscreteGenerator& gen, double lambda,
                                const Eigen::VectorXd& f) {
  require_compatible(gen, f);
  if (!(lambda > 0.0)) throw std::invalid_argument("resolvent: lambda must be positive");
  const SparseMatrix mass = mass_or_identity(gen);
  SparseMatrix lhs = lambda * mass - gen.op;
  lhs.makeCompressed();
  Lu lu(lhs);
  if (lu.info() != Eigen::Success) throw std::runtime_error("resolvent: factorization failed");
  return lu.solve(mass * f);
}

Norms norms(const Eigen::VectorXd& phi, const Eigen::VectorXd& weights) {
  if (phi.size() != weights.size()) throw std::invalid_argument("norms: size mismatch");
  if (phi.size() == 0) return {};
  return Norms{weights.dot(phi.cwiseAbs()), std::sqrt(weights.dot(phi.cwiseAbs2())),
               phi.minCoeff(), weights.dot(phi)};
}

std::vector<SweepRow> SweepResult::at_time(double t) const {
  std::vector<SweepRow> out;
  for (const auto& row : rows)
    if (row.t == t) out.push_back(row);
  return out;
}

unsigned sweep_threads() {
  if (const char* env = std::getenv("GRAPHDIFF_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

SweepResult kappa_sweep(const MetricGraph& graph, const SweepConfig& config,
                        const std::function<double(std::size_t, double)>& phi0) {
  require_valid(graph);
  if (config.kappas.empty() || config.times.empty())
    throw std::invalid_argument("sweep: kappa and t lists must be nonempty");
  for (std::size_t k = 0; k < config.kappas.size(); ++k) {
    if (!(config.kappas[k] > 0.0)) throw std::invalid_argument("sweep: kappa must be positive");
    if (k > 0 && !(config.kappas[k] > config.kappas[k - 1]))
      throw std::invalid_argument("sweep: kappa must be strictly increasing");
  }
  for (double t : config.times)
    if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("sweep: t must be >= 0");
  if (!(config.h > 0.0)) throw std::invalid_argument("sweep: h must be positive");

  const GridKind kind =
      config.disc == Discretization::FV ? GridKind::CellCentered : GridKind::NodeCentered;
  const EdgeGrid grid = EdgeGrid::uniform(graph, config.h, kind);
  const EdgeFunction initial = EdgeFunction::sample(grid, phi0);
  const SweepSetup setup{grid, initial.values, build_q(graph, ChainVariant::Dual),
                         project_p(initial)};

  const std::size_t jobs = config.kappas.size();
  std::vector<std::vector<SweepRow>> results(jobs);
  std::vector<std::exception_ptr> errors(jobs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j; (j = next.fetch_add(1)) < jobs;) {
      try {
        results[j] = sweep_one(graph, config, setup, config.kappas[j]);
      } catch (...) {
        errors[j] = std::current_exception();
      }
    }
  };
  const unsigned threads = std::min<std::size_t>(
      jobs, config.threads > 0 ? config.threads : sweep_threads());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  SweepResult out;
  for (auto& rows : results) out.rows.insert(out.rows.end(), rows.begin(), rows.end());
  return out;
}

bool decreasing_in_kappa(const SweepResult& result, bool strict, double floor) {
  std::map<double, std::vector<double>> by_time;
  for (const auto& row : result.rows)
    if (row.t > 0.0) by_time[row.t].push_back(row.err_l1);
  for (const auto& [t, errs] : by_time) {
    for (std::size_t k = 1; k < errs.size(); ++k) {
      if (errs[k - 1] <= floor) continue;
      if (strict ? !(errs[k] < errs[k - 1]) : !(errs[k] <= errs[k - 1])) return false;
    }
  }
  return true;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  CsvWriter csv(out);
  csv.row({"kappa", "t", "err_l1", "err_l2", "err_projected", "mass_drift", "min_value"});
  for (const auto& row : result.rows) {
    csv.field(row.kappa).field(row.t).field(row.err_l1).field(row.err_l2);
    csv.field(row.err_projected).field(row.mass_drift).field(row.min_value);
    csv.end_row();
  }
}

}  // namespace graphdiff
