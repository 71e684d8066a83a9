#include "graphdiff/cli.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "graphdiff/csv.hpp"
#include "graphdiff/edge_resolvent.hpp"
#include "graphdiff/evolution.hpp"
#include "graphdiff/fem_l2.hpp"
#include "graphdiff/fv_l1.hpp"
#include "graphdiff/graph_config.hpp"
#include "graphdiff/limit_chain.hpp"

namespace graphdiff {

namespace {

struct Options {
  std::string graph;
  std::string out;
  std::vector<double> kappas{1, 10, 100, 1000, 10000};
  double kappa = 1.0;
  std::vector<double> times{0.25, 0.5, 1, 2};
  double h = 1.0 / 200.0;
  std::string disc = "fv";
  int trace_order = 1;
  std::string method = "expm";
  std::string initial;
  std::vector<double> lambdas{1e-1, 1e-2, 1e-3, 1e-4};
  double a = 0.0;
  double b = 1.0;
  std::vector<double> source{0.0, 1.0};
  int levels = 3;
  unsigned seed = 7;
};

// Failures that map onto a specific exit code.
struct CliFailure {
  int code;
  std::string message;
};

MetricGraph load(const std::string& path) {
  try {
    return load_graph_json(path);
  } catch (const ParseError& e) {
    throw CliFailure{kExitParse, e.what()};
  }
}

MetricGraph load_valid(const std::string& path) {
  auto graph = load(path);
  const auto report = validate(graph);
  if (!report.ok()) {
    std::string msg = "invalid graph:";
    for (const auto& v : report.violations) msg += "\n  " + v;
    throw CliFailure{kExitInvalid, msg};
  }
  return graph;
}

// Writes to --out when given, else to the default stream.
void emit(const Options& opt, std::ostream& out, const std::function<void(std::ostream&)>& body) {
  if (opt.out.empty()) {
    body(out);
    return;
  }
  std::ofstream file(opt.out, std::ios::binary);
  if (!file) throw CliFailure{kExitParse, "cannot open output file: " + opt.out};
  body(file);
  if (!file) throw CliFailure{kExitParse, "failed writing output file: " + opt.out};
}

std::function<double(std::size_t, double)> initial_condition(const MetricGraph& graph,
                                                             const std::string& spec) {
  const std::string text = spec.empty() ? "indicator:" + graph.edge(0).id : spec;
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (kind == "indicator") {
    const auto idx = graph.index_of(arg);
    if (!idx) throw CliFailure{kExitParse, "unknown edge in --initial: " + arg};
    return [e = *idx](std::size_t i, double) { return i == e ? 1.0 : 0.0; };
  }
  if (kind == "constant") {
    double c = 0.0;
    try {
      c = std::stod(arg);
    } catch (const std::exception&) {
      throw CliFailure{kExitParse, "bad constant in --initial: " + arg};
    }
    return [c](std::size_t, double) { return c; };
  }
  if (kind == "cosine") {
    std::vector<double> lengths;
    for (const auto& e : graph.edges()) lengths.push_back(e.length);
    return [lengths](std::size_t i, double x) {
      return 1.0 + std::cos(std::numbers::pi * x / lengths[i]);
    };
  }
  throw CliFailure{kExitParse, "unknown --initial kind: " + kind};
}

int cmd_validate(const Options& opt, std::ostream& out) {
  const auto graph = load(opt.graph);
  const auto report = validate(graph);
  emit(opt, out, [&](std::ostream& os) {
    os << "edges: " << graph.edge_count() << '\n';
    os << "valid: " << (report.ok() ? "true" : "false") << '\n';
    os << "conservative: " << (report.conservative ? "true" : "false") << '\n';
    for (const auto& v : report.violations) os << "violation: " << v << '\n';
    for (const auto& w : report.warnings) os << "warning: " << w << '\n';
  });
  return report.ok() ? kExitOk : kExitInvalid;
}

int cmd_limit_q(const Options& opt, std::ostream& out) {
  const auto graph = load_valid(opt.graph);
  const auto dual = build_q(graph, ChainVariant::Dual);
  const auto primal = build_q(graph, ChainVariant::Primal);
  const Eigen::VectorXd rate = mass_rate(dual, edge_lengths(graph));
  const std::size_t n = graph.edge_count();
  emit(opt, out, [&](std::ostream& os) {
    CsvWriter csv(os);
    csv.field("edge");
    for (const auto& e : graph.edges()) csv.field("dual:" + e.id);
    for (const auto& e : graph.edges()) csv.field("primal:" + e.id);
    csv.field("mass_rate").field("differs");
    csv.end_row();
    for (std::size_t i = 0; i < n; ++i) {
      csv.field(graph.edge(i).id);
      std::string differs;
      for (std::size_t j = 0; j < n; ++j) csv.field(dual.q(i, j));
      for (std::size_t j = 0; j < n; ++j) {
        csv.field(primal.q(i, j));
        if (dual.q(i, j) != primal.q(i, j)) differs += (differs.empty() ? "" : ";") + graph.edge(j).id;
      }
      csv.field(rate[i]).field(differs);
      csv.end_row();
    }
  });
  return kExitOk;
}

int cmd_sweep(const Options& opt, std::ostream& out, std::ostream& err) {
  const auto graph = load_valid(opt.graph);
  SweepConfig config;
  config.kappas = opt.kappas;
  config.times = opt.times;
  config.h = opt.h;
  config.disc = opt.disc == "fem" ? Discretization::FEM : Discretization::FV;
  config.trace_order = opt.trace_order == 2 ? TraceOrder::Linear : TraceOrder::Nearest;
  config.method = opt.method == "cn" ? Method::CrankNicolson : Method::Expm;
  for (std::size_t k = 1; k < config.kappas.size(); ++k)
    if (!(config.kappas[k] > config.kappas[k - 1]))
      throw CliFailure{kExitParse, "--kappa values must be strictly increasing"};

  const auto phi0 = initial_condition(graph, opt.initial);
  const auto result = kappa_sweep(graph, config, phi0);
  emit(opt, out, [&](std::ostream& os) { write_sweep_csv(os, result); });

  const GridKind kind = config.disc == Discretization::FV ? GridKind::CellCentered
                                                          : GridKind::NodeCentered;
  const auto grid = EdgeGrid::uniform(graph, config.h, kind);
  const auto sampled = EdgeFunction::sample(grid, phi0);
  const double scale = norms(sampled.values, grid.weights()).l1;
  if (!decreasing_in_kappa(result, true, 1e-10 * std::max(scale, 1.0))) {
    err << "sweep: error is not decreasing in kappa\n";
    return kExitAcceptance;
  }
  return kExitOk;
}

int cmd_resolvent_check(const Options& opt, std::ostream& out, std::ostream& err) {
  if (!(opt.b > opt.a)) throw CliFailure{kExitParse, "--b must exceed --a"};
  for (std::size_t k = 1; k < opt.lambdas.size(); ++k)
    if (!(opt.lambdas[k] < opt.lambdas[k - 1]))
      throw CliFailure{kExitParse, "--lambda values must be strictly decreasing"};
  const Interval iv{opt.a, opt.b};
  const auto phi = EdgeSource::polynomial(iv, opt.source);
  const auto rows = averaging_limit_check(iv, phi, opt.lambdas);
  emit(opt, out, [&](std::ostream& os) {
    CsvWriter csv(os);
    csv.row({"lambda", "distance"});
    for (const auto& r : rows) {
      csv.field(r.lambda).field(r.distance);
      csv.end_row();
    }
  });
  if (!is_nonincreasing(rows, 0.0)) {
    err << "resolvent-check: distance is not nonincreasing as lambda decreases\n";
    return kExitAcceptance;
  }
  return kExitOk;
}

int cmd_duality_check(const Options& opt, std::ostream& out, std::ostream& err) {
  const auto graph = load_valid(opt.graph);
  const auto f = enforce_primal_conditions(graph, opt.kappa, trigonometric_field(graph, opt.seed));
  const auto phi = enforce_dual_conditions(graph, opt.kappa, trigonometric_field(graph, opt.seed + 1));
  const auto order = opt.trace_order == 2 ? TraceOrder::Linear : TraceOrder::Nearest;
  const auto rows = duality_refinement(graph, opt.h, opt.levels, opt.kappa, f, phi, order);
  emit(opt, out, [&](std::ostream& os) {
    CsvWriter csv(os);
    csv.row({"h", "defect", "ratio"});
    for (const auto& r : rows) {
      csv.field(r.h).field(r.defect).field(r.ratio);
      csv.end_row();
    }
  });
  for (std::size_t k = 1; k < rows.size(); ++k) {
    if (!(rows[k].ratio <= 0.75)) {
      err << "duality-check: defect ratio above 0.75 at h = " << format_number(rows[k].h) << '\n';
      return kExitAcceptance;
    }
  }
  return kExitOk;
}

int cmd_export_generator(const Options& opt, std::ostream& out) {
  const auto graph = load_valid(opt.graph);
  DiscreteGenerator gen = [&] {
    if (opt.disc == "fem") {
      const auto grid = EdgeGrid::uniform(graph, opt.h, GridKind::NodeCentered);
      return generator_l2(assemble_forms(graph, grid, opt.kappa));
    }
    const auto grid = EdgeGrid::uniform(graph, opt.h, GridKind::CellCentered);
    return assemble_dual_fv(graph, grid, opt.kappa,
                            opt.trace_order == 2 ? TraceOrder::Linear : TraceOrder::Nearest);
  }();
  emit(opt, out, [&](std::ostream& os) { write_triplets(os, gen); });
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options opt;
  CLI::App app{"Diffusion on metric graphs with semipermeable membranes", "graphdiff"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);

  auto add_graph = [&](CLI::App* sub) {
    sub->add_option("--graph", opt.graph, "Graph description (JSON)")->required()->check(CLI::ExistingFile);
  };
  auto add_out = [&](CLI::App* sub) { sub->add_option("--out", opt.out, "Output file (default stdout)"); };
  auto add_h = [&](CLI::App* sub) {
    sub->add_option("--h", opt.h, "Target cell width")->check(CLI::PositiveNumber)->capture_default_str();
  };
  auto add_trace = [&](CLI::App* sub) {
    sub->add_option("--trace-order", opt.trace_order, "Endpoint trace order (1 or 2)")
        ->check(CLI::IsMember({1, 2}))
        ->capture_default_str();
  };
  auto add_disc = [&](CLI::App* sub) {
    sub->add_option("--disc", opt.disc, "Discretization")->check(CLI::IsMember({"fv", "fem"}))->capture_default_str();
  };
  auto add_single_kappa = [&](CLI::App* sub) {
    sub->add_option("--kappa", opt.kappa, "Diffusion scale")->check(CLI::PositiveNumber)->capture_default_str();
  };

  auto* validate_cmd = app.add_subcommand("validate", "Check graph admissibility and conservativeness");
  add_graph(validate_cmd);
  add_out(validate_cmd);

  auto* limit_q = app.add_subcommand("limit-q", "Dual and primal limit-chain generators");
  add_graph(limit_q);
  add_out(limit_q);

  auto* sweep = app.add_subcommand("sweep", "Distance to the limit chain over kappa and t");
  add_graph(sweep);
  add_out(sweep);
  add_h(sweep);
  add_trace(sweep);
  add_disc(sweep);
  sweep->add_option("--kappa", opt.kappas, "Increasing kappa list")->delimiter(',')->check(CLI::PositiveNumber);
  sweep->add_option("--t", opt.times, "Time list")->delimiter(',')->check(CLI::NonNegativeNumber);
  sweep->add_option("--initial", opt.initial,
                    "indicator:<edge id> | constant:<value> | cosine (default: indicator of the first edge)");
  sweep->add_option("--method", opt.method, "Time propagation")->check(CLI::IsMember({"expm", "cn"}))->capture_default_str();

  auto* resolvent = app.add_subcommand("resolvent-check", "Averaging limit of the Neumann resolvent");
  add_out(resolvent);
  resolvent->add_option("--lambda", opt.lambdas, "Decreasing lambda list")->delimiter(',')->check(CLI::PositiveNumber);
  resolvent->add_option("--a", opt.a, "Left end")->capture_default_str();
  resolvent->add_option("--b", opt.b, "Right end")->capture_default_str();
  resolvent->add_option("--source", opt.source, "Polynomial coefficients c0,c1,... in x")->delimiter(',');

  auto* duality = app.add_subcommand("duality-check", "Primal/dual pairing defect under refinement");
  add_graph(duality);
  add_out(duality);
  add_h(duality);
  add_trace(duality);
  add_single_kappa(duality);
  duality->add_option("--levels", opt.levels, "Number of grids")->check(CLI::Range(2, 12))->capture_default_str();
  duality->add_option("--seed", opt.seed, "Seed of the smooth test fields")->capture_default_str();

  auto* exporter = app.add_subcommand("export-generator", "Write a discrete generator as sparse triplets");
  add_graph(exporter);
  add_out(exporter);
  add_h(exporter);
  add_trace(exporter);
  add_disc(exporter);
  add_single_kappa(exporter);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kExitParse;
  }

  try {
    if (validate_cmd->parsed()) return cmd_validate(opt, out);
    if (limit_q->parsed()) return cmd_limit_q(opt, out);
    if (sweep->parsed()) return cmd_sweep(opt, out, err);
    if (resolvent->parsed()) return cmd_resolvent_check(opt, out, err);
    if (duality->parsed()) return cmd_duality_check(opt, out, err);
    if (exporter->parsed()) return cmd_export_generator(opt, out);
  } catch (const CliFailure& f) {
    err << f.message << '\n';
    return f.code;
  } catch (const InvalidGraph& e) {
    err << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitParse;
  }
  return kExitParse;
}

}  // namespace graphdiff
