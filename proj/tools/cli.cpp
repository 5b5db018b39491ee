#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>

#include <CLI11.hpp>
#include <json.hpp>

#include "mvu/analysis.hpp"
#include "mvu/config.hpp"
#include "mvu/csv.hpp"
#include "mvu/energy.hpp"
#include "mvu/errors.hpp"
#include "mvu/experiments.hpp"
#include "mvu/graph.hpp"
#include "mvu/manifolds.hpp"
#include "mvu/solver.hpp"

namespace mvu {

namespace {

struct ModelArgs {
  std::string name;
  std::vector<std::string> params;
  std::size_t n = 100;
  std::uint64_t seed = 0;
  std::string points;  // optional CSV input instead of sampling
};

void add_model_options(CLI::App* app, ModelArgs& m, bool allow_points) {
  app->add_option("--model", m.name, "interval, rectangle, disk, circle, arc, ellipse or tube");
  app->add_option("--param", m.params, "model parameter key=value (repeatable)");
  app->add_option("--n", m.n, "sample size")->check(CLI::Range(std::size_t{2}, std::size_t{1000000}));
  app->add_option("--seed", m.seed, "sampling seed");
  if (allow_points) app->add_option("--points", m.points, "read points from a CSV instead of sampling");
}

ModelParams parse_params(const std::vector<std::string>& items) {
  ModelParams p;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ValidationError("--param expects key=value, got '" + item + "'");
    p[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return p;
}

ManifoldModel model_of(const ModelArgs& m) {
  if (m.name.empty()) throw ValidationError("--model is required");
  return make_model(m.name, parse_params(m.params));
}

Points points_of(const ModelArgs& m) {
  if (!m.points.empty()) return read_points_csv(m.points);
  return sample(model_of(m), m.n, m.seed).points;
}

/// Intrinsic dimension used by `--r auto`: the model's when one is named.
int dimension_of(const ModelArgs& m, int fallback) {
  if (!m.name.empty()) return model_of(m).intrinsic_dim();
  return fallback;
}

double radius_of(const std::string& text, std::size_t n, int d, double c) {
  if (text == "auto") return radius_schedule(n, d, c);
  try {
    std::size_t used = 0;
    const double r = std::stod(text, &used);
    if (used != text.size() || !(r > 0.0)) throw std::invalid_argument(text);
    return r;
  } catch (const std::logic_error&) {
    throw ValidationError("--r expects a positive number or 'auto', got '" + text + "'");
  }
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_text_file(path, text);
  }
}

int report_command(const std::string& dir) {
  namespace fs = std::filesystem;
  const CsvTable table = CsvTable::read((fs::path(dir) / "report.csv").string());
  std::cout << read_text_file((fs::path(dir) / "summary.json").string());
  const auto& header = table.header();
  if (std::find(header.begin(), header.end(), "embedding") == header.end()) return 0;
  const std::size_t emb_col = table.column("embedding");
  const std::size_t energy_col = table.column("energy");
  std::size_t checked = 0;
  double worst = 0.0;
  for (const auto& row : table.rows()) {
    if (row[emb_col] == "none") continue;
    const Points y = read_points_csv((fs::path(dir) / row[emb_col]).string());
    const double recorded = std::stod(row[energy_col]);
    worst = std::max(worst, std::abs(energy(y) - recorded));
    ++checked;
  }
  std::cout << "rescored " << checked << " embeddings, max |energy - recorded| = " << format_double(worst) << "\n";
  if (worst > 1e-12) throw NumericalFailure("report: rescored energy disagrees with the recorded row");
  return 0;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Maximum variance unfolding: sampling, graphs, solver, oracles and experiments"};
  app.require_subcommand(1);

  ModelArgs sample_args;
  std::string sample_out;
  auto* sample_cmd = app.add_subcommand("sample", "sample points from a model (CSV)");
  add_model_options(sample_cmd, sample_args, false);
  sample_cmd->add_option("--out", sample_out, "output file (stdout by default)");

  ModelArgs graph_args;
  std::string graph_r = "auto";
  double graph_c = 2.0;
  std::string graph_out;
  std::string graph_json;
  auto* graph_cmd = app.add_subcommand("graph", "build the r-neighborhood graph (edge list CSV)");
  add_model_options(graph_cmd, graph_args, true);
  graph_cmd->add_option("--r", graph_r, "radius or 'auto' for the schedule");
  graph_cmd->add_option("--C", graph_c, "schedule multiplier");
  graph_cmd->add_option("--out", graph_out, "edge list file (stdout by default)");
  graph_cmd->add_option("--diagnostics", graph_json, "write the diagnostics record here");

  ModelArgs solve_args;
  std::string solve_r = "auto";
  double solve_c = 2.0;
  std::string solve_backend = "coordinate";
  int solve_restarts = 3;
  int solve_rank = 0;
  std::uint64_t solve_seed = 0;
  std::string solve_out;
  std::string solve_trace;
  auto* solve_cmd = app.add_subcommand("solve", "solve discrete MVU and print the embedding CSV");
  add_model_options(solve_cmd, solve_args, true);
  solve_cmd->add_option("--r", solve_r, "radius or 'auto' for the schedule");
  solve_cmd->add_option("--C", solve_c, "schedule multiplier");
  solve_cmd->add_option("--backend", solve_backend, "coordinate or gram");
  solve_cmd->add_option("--restarts", solve_restarts, "random restarts after the start y = x");
  solve_cmd->add_option("--rank", solve_rank, "factor rank for the gram backend (0: min(p, 10))");
  solve_cmd->add_option("--solver-seed", solve_seed, "seed for restarts and perturbations");
  solve_cmd->add_option("--out", solve_out, "embedding file (stdout by default)");
  solve_cmd->add_option("--trace", solve_trace, "write the solver trace CSV here");

  ModelArgs energy_args;
  std::size_t energy_m = 0;
  auto* energy_cmd = app.add_subcommand("energy", "energy of a point set, or Monte Carlo continuum energy");
  add_model_options(energy_cmd, energy_args, true);
  energy_cmd->add_option("--mc", energy_m, "Monte Carlo sample size for the continuum energy of the identity");

  std::string oracle_grid = "1:1.5707:0.01";
  std::string oracle_out;
  auto* oracle_cmd = app.add_subcommand("oracle", "ellipse oracle table a,b,F,E0");
  oracle_cmd->add_option("--grid", oracle_grid, "lo:hi:step over a");
  oracle_cmd->add_option("--out", oracle_out, "output file (stdout by default)");

  std::string exp_config;
  std::string exp_out;
  int exp_workers = 0;
  auto* exp_cmd = app.add_subcommand("experiment", "run an experiment config and write its report");
  exp_cmd->add_option("config", exp_config, "config file")->required();
  exp_cmd->add_option("--out", exp_out, "output directory (overrides config and MVU_OUTPUT_DIR)");
  exp_cmd->add_option("--workers", exp_workers, "worker threads (overrides config)");

  std::string report_dir;
  auto* report_cmd = app.add_subcommand("report", "print a report summary and rescore its embeddings");
  report_cmd->add_option("dir", report_dir, "report directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*sample_cmd) {
      emit(sample_out, points_csv(sample(model_of(sample_args), sample_args.n, sample_args.seed).points));
    } else if (*graph_cmd) {
      const Points x = points_of(graph_args);
      const int d = dimension_of(graph_args, static_cast<int>(x.cols()));
      const NeighborGraph g = build_graph(x, radius_of(graph_r, static_cast<std::size_t>(x.rows()), d, graph_c));
      emit(graph_out, edges_csv(g));
      if (!graph_json.empty()) write_text_file(graph_json, graph_diagnostics_json(g));
      if (!graph_out.empty() && graph_json.empty()) std::cout << graph_diagnostics_json(g);
    } else if (*solve_cmd) {
      const Points x = points_of(solve_args);
      const int d = dimension_of(solve_args, static_cast<int>(x.cols()));
      const NeighborGraph g = build_graph(x, radius_of(solve_r, static_cast<std::size_t>(x.rows()), d, solve_c));
      SolverConfig cfg;
      cfg.backend = parse_backend(solve_backend);
      cfg.restarts = solve_restarts;
      cfg.rank_cap = solve_rank;
      cfg.seed = solve_seed;
      const Solution sol = solve(x, g, cfg);
      emit(solve_out, points_csv(sol.embedding.y));
      if (!solve_trace.empty()) write_text_file(solve_trace, sol.trace.csv());
      std::cerr << "energy=" << format_double(sol.embedding.energy)
                << " max_violation=" << format_double(sol.embedding.max_violation)
                << " r=" << format_double(g.r) << " edges=" << g.edges.size()
                << " converged=" << (sol.embedding.converged ? "true" : "false") << "\n";
    } else if (*energy_cmd) {
      if (energy_m > 0) {
        const ContinuumEnergy e = continuum_energy_mc(model_of(energy_args), [](const Points& p) { return p; },
                                                      energy_m, energy_args.seed);
        std::cout << "energy=" << format_double(e.value) << " se=" << format_double(e.error_estimate)
                  << " method=" << to_string(e.method) << "\n";
      } else {
        std::cout << "energy=" << format_double(energy(points_of(energy_args))) << "\n";
      }
    } else if (*oracle_cmd) {
      double lo = 0, hi = 0, step = 0;
      parse_grid(oracle_grid, lo, hi, step);
      CsvTable table({"a", "b", "F", "E0"});
      for (const auto& row : ellipse_oracle_table(lo, hi, step)) {
        table.add_row({format_double(row.a), format_double(row.b), format_double(row.F), format_double(row.E0)});
      }
      emit(oracle_out, table.str());
    } else if (*exp_cmd) {
      ExperimentConfig cfg = read_config(exp_config);
      if (exp_workers > 0) cfg.workers = exp_workers;
      const std::string dir = exp_out.empty() ? resolve_output_dir(cfg) : exp_out;
      const ExperimentReport rep = run_experiment(cfg);
      write_report(rep, dir);
      std::cout << summary_json(rep);
    } else if (*report_cmd) {
      return report_command(report_dir);
    }
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    // I/O problems and the like are input errors from the caller's side
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace mvu
