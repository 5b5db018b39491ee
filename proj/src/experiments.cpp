#include "mvu/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "mvu/analysis.hpp"
#include "mvu/energy.hpp"
#include "mvu/errors.hpp"
#include "mvu/graph.hpp"
#include "mvu/solver.hpp"

namespace mvu {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kProbeSalt = 0xd1b54a32d192ed03ULL;

std::string num(double v) { return format_double(v); }

std::string short_num(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double median(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return !std::isfinite(x); }), v.end());
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

/// Runs f(0..count-1) on up to `workers` threads; results land by index.
template <typename T>
std::vector<T> run_pool(std::size_t count, int workers, const std::function<T(std::size_t)>& f) {
  std::vector<T> out(count);
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), count);
  if (threads <= 1) {
    for (std::size_t k = 0; k < count; ++k) out[k] = f(k);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < count; k = next++) {
          try {
            out[k] = f(k);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

struct Cell {
  std::size_t n = 0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

struct CellResult {
  Cell cell;
  std::string status = "ok";
  double r = kNaN;
  double edges = kNaN;
  double eta = kNaN;
  double energy = kNaN;
  double identity_energy = kNaN;
  double oracle = kNaN;
  double gap = kNaN;
  double procrustes = kNaN;
  double identity_residual = kNaN;
  double lip_oracle = kNaN;
  double lip_graph = kNaN;
  double margin = kNaN;
  double violation = kNaN;
  double tight = kNaN;
  double flatness = kNaN;
  double converged = kNaN;
  double spread = kNaN;
  double r_dagger = kNaN;
  double envelope = kNaN;
  std::string embedding_file = "none";
  std::string embedding_csv;
  std::string trace_file = "none";
  std::string trace_csv;
  double runtime = 0.0;
};

const std::vector<std::string> kCellHeader{
    "n", "r", "sigma", "seed", "status", "edges", "covering_radius", "lambda_hat", "energy",
    "identity_energy", "oracle_energy", "energy_gap", "procrustes_residual", "identity_residual",
    "lipschitz_oracle", "lipschitz_graph", "interp_margin", "max_violation", "tight_fraction",
    "flatness", "converged", "restart_spread", "r_dagger", "envelope", "embedding"};

std::vector<std::string> cell_row(const CellResult& c) {
  return {std::to_string(c.cell.n), num(c.r), num(c.cell.sigma), std::to_string(c.cell.seed), c.status,
          num(c.edges), num(c.eta), num(c.eta / c.r), num(c.energy), num(c.identity_energy),
          num(c.oracle), num(c.gap), num(c.procrustes), num(c.identity_residual), num(c.lip_oracle),
          num(c.lip_graph), num(c.margin), num(c.violation), num(c.tight), num(c.flatness),
          num(c.converged), num(c.spread), num(c.r_dagger), num(c.envelope), c.embedding_file};
}

double radius_for(const ExperimentConfig& cfg, std::size_t n, int d) {
  return cfg.r ? *cfg.r : radius_schedule(n, d, cfg.radius_c);
}

std::string cell_name(const Cell& c) {
  return "n" + std::to_string(c.n) + "_sigma" + short_num(c.sigma) + "_seed" + std::to_string(c.seed);
}

CellResult solve_cell(const ExperimentConfig& cfg, const ManifoldModel& model,
                      std::optional<double> oracle, const Cell& cell, int flat_dim) {
  const auto t0 = std::chrono::steady_clock::now();
  CellResult out;
  out.cell = cell;
  const int d = model.intrinsic_dim();
  out.r = radius_for(cfg, cell.n, d);
  out.r_dagger = critical_radius(cell.n, d);
  out.envelope = rate_envelope(static_cast<double>(cell.n), d, out.r);
  if (oracle) out.oracle = *oracle;
  try {
    const PointCloud cloud = sample(model, cell.n, cell.seed);
    const Points& x = cloud.points;
    out.identity_energy = energy(x);
    NeighborGraph g = build_graph(x, out.r);
    out.edges = static_cast<double>(g.edges.size());
    const PointCloud probe =
        sample(model, static_cast<std::size_t>(cfg.probe_factor) * cell.n, cell.seed ^ kProbeSalt);
    out.eta = covering_radius(cloud, probe);
    g.covering_radius = out.eta;

    SolverConfig sc = cfg.solver;
    sc.seed = cfg.solver.seed + cell.seed;
    const Solution sol = solve(x, g, sc);
    const Points& y = sol.embedding.y;
    out.energy = energy(y);
    if (oracle) out.gap = std::abs(out.energy - *oracle);
    out.violation = sol.embedding.max_violation;
    out.converged = sol.embedding.converged ? 1.0 : 0.0;
    const auto [lo, hi] = std::minmax_element(sol.trace.start_energies.begin(), sol.trace.start_energies.end());
    out.spread = *hi > 0.0 ? (*hi - *lo) / *hi : 0.0;
    const FeasibilityReport feas = feasibility_report(x, g, y);
    out.tight = g.edges.empty() ? kNaN : static_cast<double>(feas.tight_edges) / g.edges.size();
    out.flatness = flatness_report(y, flat_dim > 0 ? flat_dim : d);
    out.identity_residual = identity_recovery_error(y, x);

    const RecoveryReport rec = recovery_report(model, x, g, y, out.eta, oracle);
    if (rec.procrustes_error) out.procrustes = *rec.procrustes_error;
    out.lip_oracle = rec.lipschitz_oracle.value_or(kNaN);
    out.lip_graph = rec.lipschitz_graph.value_or(kNaN);
    out.margin = rec.interpolation_margin;

    const std::string name = cell_name(cell);
    if (cfg.save_embeddings) {
      out.embedding_file = "embeddings/" + name + ".csv";
      out.embedding_csv = points_csv(y);
    }
    out.trace_file = "traces/" + name + ".csv";
    out.trace_csv = sol.trace.csv();
  } catch (const DisconnectedGraph&) {
    out.status = "disconnected";
  } catch (const NumericalFailure&) {
    out.status = "numerical_failure";
  } catch (const ValidationError&) {
    out.status = "analysis_error";
  }
  out.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

ExperimentReport new_report(const ExperimentConfig& cfg, std::vector<std::string> header) {
  ExperimentReport rep;
  rep.config = cfg;
  rep.config_hash = config_hash(cfg);
  rep.rows = CsvTable(std::move(header));
  rep.summary["kind"] = to_string(cfg.kind);
  return rep;
}

std::vector<Cell> cells_for(const ExperimentConfig& cfg, const std::vector<double>& sigmas) {
  std::vector<Cell> cells;
  for (double s : sigmas)
    for (std::size_t n : cfg.n_grid)
      for (std::uint64_t seed : cfg.seeds) cells.push_back({n, s, seed});
  return cells;
}

using ModelFor = std::function<ManifoldModel(double sigma)>;

std::vector<CellResult> run_cells(const ExperimentConfig& cfg, const std::vector<Cell>& cells,
                                  const ModelFor& model_for, std::optional<double> oracle,
                                  int flat_dim = 0) {
  // Models are built up front so every worker shares the same immutable ones.
  std::map<double, ManifoldModel> models;
  for (const auto& c : cells)
    if (!models.count(c.sigma)) models.emplace(c.sigma, model_for(c.sigma));
  return run_pool<CellResult>(cells.size(), cfg.workers, [&](std::size_t k) {
    return solve_cell(cfg, models.at(cells[k].sigma), oracle, cells[k], flat_dim);
  });
}

void collect(ExperimentReport& rep, const std::vector<CellResult>& results) {
  std::size_t failed = 0;
  for (const auto& r : results) {
    rep.rows.add_row(cell_row(r));
    rep.runtimes.push_back(r.runtime);
    if (r.embedding_file != "none") rep.artifacts[r.embedding_file] = r.embedding_csv;
    if (r.trace_file != "none") rep.artifacts[r.trace_file] = r.trace_csv;
    if (r.status != "ok") ++failed;
  }
  rep.summary["rows"] = std::to_string(results.size());
  rep.summary["failed_rows"] = std::to_string(failed);
  double worst_violation = 0.0;
  double worst_ratio = 0.0;
  for (const auto& r : results) {
    if (r.status != "ok") continue;
    worst_violation = std::max(worst_violation, r.violation);
    worst_ratio = std::max(worst_ratio, r.violation / r.r);
  }
  rep.summary["max_violation"] = num(worst_violation);
  rep.summary["max_violation_over_r"] = num(worst_ratio);
}

/// Median of a field over seeds for each (sigma, n).
std::vector<std::pair<Cell, double>> medians(const std::vector<CellResult>& results,
                                             const std::function<double(const CellResult&)>& field) {
  std::vector<std::pair<Cell, double>> out;
  std::map<std::pair<double, std::size_t>, std::vector<double>> groups;
  std::vector<std::pair<double, std::size_t>> order;
  for (const auto& r : results) {
    const auto key = std::make_pair(r.cell.sigma, r.cell.n);
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(r.status == "ok" ? field(r) : kNaN);
  }
  for (const auto& key : order) out.push_back({Cell{key.second, key.first, 0}, median(groups[key])});
  return out;
}

std::string key_for(const std::string& stem, const Cell& c, bool with_sigma) {
  std::string k = stem + "[";
  if (with_sigma) k += "sigma=" + short_num(c.sigma) + ",";
  return k + "n=" + std::to_string(c.n) + "]";
}

void summarize_medians(ExperimentReport& rep, const std::vector<CellResult>& results,
                       const std::string& stem, const std::function<double(const CellResult&)>& field,
                       bool with_sigma) {
  for (const auto& [cell, value] : medians(results, field)) rep.summary[key_for(stem, cell, with_sigma)] = num(value);
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t k = 1; k < v.size(); ++k)
    if (!(v[k] < v[k - 1])) return false;
  return true;
}

std::string flag(bool b) { return b ? "true" : "false"; }

std::optional<double> supremum_if_convex(const ManifoldModel& model) {
  try {
    return convex_supremum(model).value;
  } catch (const ValidationError&) {
    return std::nullopt;
  }
}

ManifoldModel tube_of(const ExperimentConfig& cfg, double sigma) {
  if (sigma == 0.0) return make_model(cfg.model, cfg.model_params);
  ModelParams p = cfg.model_params;
  p["base"] = cfg.model;
  p["sigma"] = short_num(sigma);
  return make_model("tube", p);
}

void require_sigma_grid(const ExperimentConfig& cfg, const ManifoldModel& base, bool allow_zero) {
  if (cfg.sigma_grid.empty()) throw ValidationError(to_string(cfg.kind) + ": sigma grid is empty");
  for (double s : cfg.sigma_grid) {
    if ((s == 0.0 && !allow_zero) || s < 0.0 || s >= base.reach()) {
      throw ValidationError(to_string(cfg.kind) + ": sigma values must lie in (0, reach) = (0, " +
                            short_num(base.reach()) + ")");
    }
  }
}

void convex_summary(ExperimentReport& rep, const std::vector<CellResult>& results) {
  const auto& cfg = rep.config;
  auto gaps = medians(results, [](const CellResult& r) { return r.gap; });
  auto res = medians(results, [](const CellResult& r) { return r.procrustes; });
  summarize_medians(rep, results, "median_energy_gap", [](const CellResult& r) { return r.gap; }, false);
  summarize_medians(rep, results, "median_procrustes", [](const CellResult& r) { return r.procrustes; }, false);
  std::vector<double> g;
  std::vector<double> p;
  for (const auto& [c, v] : gaps) g.push_back(v);
  for (const auto& [c, v] : res) p.push_back(v);
  rep.summary["energy_gap_monotone"] = flag(strictly_decreasing(g));
  rep.summary["procrustes_monotone"] = flag(strictly_decreasing(p));
  rep.summary["final_median_energy_gap"] = num(g.back());
  rep.summary["final_median_procrustes"] = num(p.back());
  if (cfg.max_energy_gap) rep.summary["pass_energy_gap"] = flag(g.back() <= *cfg.max_energy_gap);
  if (cfg.max_residual) rep.summary["pass_residual"] = flag(p.back() <= *cfg.max_residual);
}

Points identity_map(const Points& x) { return x; }

}  // namespace

double rate_envelope(double n, int d, double r_n, double alpha) {
  const double r_dagger = std::pow(std::log(n) / (alpha * n), 1.0 / d);
  return r_n + r_dagger / r_n + std::pow(n, -1.0 / (2.0 + d));
}

ExperimentReport run_convex_consistency(const ExperimentConfig& cfg) {
  const ManifoldModel model = make_model(cfg.model, cfg.model_params);
  if (!model.has_isometry()) throw NoIsometry("convex_consistency: model " + model.id() + " has no isometry");
  const double oracle = convex_supremum(model).value;
  ExperimentReport rep = new_report(cfg, kCellHeader);
  const auto results = run_cells(cfg, cells_for(cfg, {0.0}), [&](double) { return model; }, oracle);
  collect(rep, results);
  rep.summary["oracle_energy"] = num(oracle);
  rep.summary["model"] = model.id();
  convex_summary(rep, results);
  return rep;
}

ExperimentReport run_rate_sweep(const ExperimentConfig& cfg) {
  const ManifoldModel model = make_model(cfg.model, cfg.model_params);
  const double oracle = convex_supremum(model).value;
  ExperimentReport rep = new_report(cfg, kCellHeader);
  const auto results = run_cells(cfg, cells_for(cfg, {0.0}), [&](double) { return model; }, oracle);
  collect(rep, results);
  rep.summary["oracle_energy"] = num(oracle);
  rep.summary["model"] = model.id();
  convex_summary(rep, results);

  // log-log least squares of the median gap against n
  const auto gaps = medians(results, [](const CellResult& r) { return r.gap; });
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (const auto& [c, v] : gaps) {
    if (!(v > 0.0)) continue;
    const double lx = std::log(static_cast<double>(c.n));
    const double ly = std::log(v);
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly, ++m;
  }
  const double slope = m >= 2 ? (m * sxy - sx * sy) / (m * sxx - sx * sx) : kNaN;
  rep.summary["loglog_slope"] = num(slope);

  // constant fitted at the smallest n, then checked on the rest of the grid
  const int d = model.intrinsic_dim();
  const auto env = [&](std::size_t n) {
    return rate_envelope(static_cast<double>(n), d, radius_for(cfg, n, d));
  };
  const double fitted = gaps.front().second / env(gaps.front().first.n);
  bool below = true;
  for (std::size_t k = 1; k < gaps.size(); ++k)
    if (!(gaps[k].second <= fitted * env(gaps[k].first.n))) below = false;
  rep.summary["envelope_constant"] = num(fitted);
  rep.summary["below_envelope"] = flag(below);
  return rep;
}

ExperimentReport run_noise_sweep(const ExperimentConfig& cfg) {
  const ManifoldModel base = make_model(cfg.model, cfg.model_params);
  require_sigma_grid(cfg, base, true);
  const std::optional<double> oracle = supremum_if_convex(base);
  ExperimentReport rep = new_report(cfg, kCellHeader);
  const auto results = run_cells(cfg, cells_for(cfg, cfg.sigma_grid),
                                 [&](double s) { return tube_of(cfg, s); }, oracle);
  collect(rep, results);
  rep.summary["model"] = base.id();
  if (oracle) rep.summary["noiseless_oracle_energy"] = num(*oracle);
  summarize_medians(rep, results, "median_energy", [](const CellResult& r) { return r.energy; }, true);

  // Continuity: largest slope between consecutive sigma values at the largest n.
  const auto med = medians(results, [](const CellResult& r) { return r.energy; });
  std::vector<std::pair<double, double>> curve;
  for (const auto& [c, v] : med)
    if (c.n == cfg.n_grid.back()) curve.push_back({c.sigma, v});
  double k_fit = 0.0;
  for (std::size_t k = 1; k < curve.size(); ++k)
    k_fit = std::max(k_fit, std::abs(curve[k].second - curve[k - 1].second) / (curve[k].first - curve[k - 1].first));
  rep.summary["continuity_constant"] = num(k_fit);
  if (oracle && !curve.empty()) {
    rep.summary["smallest_sigma_relative_error"] = num(std::abs(curve.front().second - *oracle) / *oracle);
  }
  return rep;
}

namespace {

void nonrecovery_summary(ExperimentReport& rep, const std::vector<CellResult>& results) {
  summarize_medians(rep, results, "median_identity_residual", [](const CellResult& r) { return r.identity_residual; }, true);
  summarize_medians(rep, results, "median_flatness_d1", [](const CellResult& r) {
    return r.status == "ok" ? r.flatness : kNaN;
  }, true);
  std::size_t beats = 0;
  std::size_t ok = 0;
  double min_residual = std::numeric_limits<double>::infinity();
  for (const auto& r : results) {
    if (r.status != "ok") continue;
    ++ok;
    if (r.energy > r.identity_energy) ++beats;
    min_residual = std::min(min_residual, r.identity_residual);
  }
  rep.summary["rows_beating_identity"] = std::to_string(beats);
  rep.summary["all_beat_identity"] = flag(ok > 0 && beats == ok);
  rep.summary["min_identity_residual"] = num(min_residual);
  if (rep.config.min_residual) rep.summary["pass_residual_floor"] = flag(min_residual > *rep.config.min_residual);
}

}  // namespace

ExperimentReport run_nonconvex_tube(const ExperimentConfig& cfg) {
  if (cfg.model != "arc") throw ValidationError("nonconvex_tube: the base curve must be an arc");
  const ManifoldModel base = make_model(cfg.model, cfg.model_params);
  require_sigma_grid(cfg, base, false);
  ExperimentReport rep = new_report(cfg, kCellHeader);
  // flatness is measured toward d = 1, the dimension of the base curve
  const auto results = run_cells(cfg, cells_for(cfg, cfg.sigma_grid),
                                 [&](double s) { return tube_of(cfg, s); }, std::nullopt, 1);
  collect(rep, results);
  rep.summary["model"] = base.id();
  nonrecovery_summary(rep, results);
  return rep;
}

ExperimentReport run_ellipse_hole(const ExperimentConfig& cfg) {
  if (cfg.model != "ellipse") throw ValidationError("ellipse_hole: the base curve must be an ellipse");
  const ManifoldModel base = make_model(cfg.model, cfg.model_params);
  const double a = std::stod(base.params().at("a"));
  const AStarResult star = find_a_star();
  if (!(a > star.a_star)) {
    throw ValidationError("ellipse_hole: a = " + short_num(a) + " does not exceed a* = " + short_num(star.a_star) +
                          "; the identity is not beaten there");
  }
  require_sigma_grid(cfg, base, false);
  ExperimentReport rep = new_report(cfg, kCellHeader);
  const auto results = run_cells(cfg, cells_for(cfg, cfg.sigma_grid),
                                 [&](double s) { return tube_of(cfg, s); }, std::nullopt, 1);
  collect(rep, results);
  rep.summary["model"] = base.id();
  nonrecovery_summary(rep, results);

  const double fa = ellipse_F(a);
  rep.summary["oracle.a"] = num(a);
  rep.summary["oracle.b"] = num(solve_b(a));
  rep.summary["oracle.F_a"] = num(fa);
  rep.summary["oracle.F_1"] = num(ellipse_F(1.0));
  rep.summary["oracle.a_star"] = num(star.a_star);
  rep.summary["oracle.E0_identity"] = num(fa / std::numbers::pi);
  rep.summary["oracle.E0_circle"] = num(circle_energy_identity(1.0));
  const ContinuumEnergy mc = continuum_energy_mc(base, identity_map, 100000, cfg.seeds.front());
  rep.summary["oracle.E0_identity_mc"] = num(mc.value);
  rep.summary["oracle.E0_identity_mc_se"] = num(mc.error_estimate);
  return rep;
}

ExperimentReport run_ustat_tail(const ExperimentConfig& cfg) {
  const ManifoldModel model = make_model(cfg.model, cfg.model_params);
  if (cfg.t_grid.empty()) throw ValidationError("ustat_tail: t grid is empty");
  ExperimentReport rep = new_report(cfg, {"t", "frequency", "bound", "se", "within"});
  const auto t0 = std::chrono::steady_clock::now();
  const TailExperiment tail = ustat_tail_experiment(model, identity_map, cfg.n_grid.front(), cfg.t_grid,
                                                    cfg.trials, cfg.seeds.front(), cfg.reference_m);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bool all = true;
  bool monotone = true;
  for (std::size_t k = 0; k < tail.rows.size(); ++k) {
    const TailRow& r = tail.rows[k];
    rep.rows.add_row({num(r.t), num(r.frequency), num(r.bound), num(r.se), flag(r.within)});
    rep.runtimes.push_back(elapsed / tail.rows.size());
    all = all && r.within;
    if (k > 0 && tail.rows[k].t >= tail.rows[k - 1].t && r.frequency > tail.rows[k - 1].frequency) monotone = false;
  }
  rep.summary["model"] = model.id();
  rep.summary["n"] = std::to_string(cfg.n_grid.front());
  rep.summary["trials"] = std::to_string(cfg.trials);
  rep.summary["reference_energy"] = num(tail.reference_energy);
  rep.summary["reference_se"] = num(tail.reference_se);
  rep.summary["all_within_bound"] = flag(all);
  rep.summary["frequency_monotone"] = flag(monotone);
  return rep;
}

ExperimentReport run_oracle_table(const ExperimentConfig& cfg) {
  ExperimentReport rep = new_report(cfg, {"a", "b", "F", "E0"});
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& row : ellipse_oracle_table(cfg.grid_lo, cfg.grid_hi, cfg.grid_step)) {
    rep.rows.add_row({num(row.a), num(row.b), num(row.F), num(row.E0)});
  }
  const double pi = std::numbers::pi;
  const double f1 = ellipse_F(1.0);
  const double fhalf = ellipse_F(pi / 2.0);
  const AStarResult star = find_a_star();
  rep.summary["F_1"] = num(f1);
  rep.summary["F_1_minus_2pi"] = num(f1 - 2.0 * pi);
  rep.summary["F_half_pi_quadrature"] = num(fhalf);
  rep.summary["F_half_pi_closed_form"] = num(pi * pi * pi / 6.0);
  rep.summary["F_half_pi_printed"] = num(pi * pi / 12.0);
  rep.summary["F_half_pi_minus_printed"] = num(fhalf - pi * pi / 12.0);
  rep.summary["a_star"] = num(star.a_star);
  rep.summary["F_a_star_plus_0.01"] = num(ellipse_F(star.a_star + 0.01));
  rep.summary["F_strictly_decreasing"] = flag(star.strictly_decreasing);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rep.runtimes.assign(rep.rows.rows().size(), elapsed / std::max<std::size_t>(1, rep.rows.rows().size()));
  return rep;
}

ExperimentReport run_circle_probe(const ExperimentConfig& cfg) {
  const ManifoldModel model = make_model(cfg.model, cfg.model_params);
  if (model.name() != "circle" && !(model.name() == "tube" && model.params().at("base") == "circle")) {
    throw ValidationError("circle_probe: model must be a circle or a tube of one");
  }
  ExperimentReport rep = new_report(cfg, kCellHeader);
  const auto results = run_cells(cfg, cells_for(cfg, {0.0}), [&](double) { return model; }, std::nullopt);
  collect(rep, results);
  rep.summary["model"] = model.id();
  summarize_medians(rep, results, "median_energy", [](const CellResult& r) { return r.energy; }, false);
  summarize_medians(rep, results, "median_flatness", [](const CellResult& r) { return r.flatness; }, false);
  summarize_medians(rep, results, "median_identity_residual", [](const CellResult& r) { return r.identity_residual; }, false);
  return rep;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ExperimentKind::ConvexConsistency: return run_convex_consistency(cfg);
    case ExperimentKind::RateSweep: return run_rate_sweep(cfg);
    case ExperimentKind::NoiseSweep: return run_noise_sweep(cfg);
    case ExperimentKind::NonConvexTube: return run_nonconvex_tube(cfg);
    case ExperimentKind::EllipseHole: return run_ellipse_hole(cfg);
    case ExperimentKind::UStatTail: return run_ustat_tail(cfg);
    case ExperimentKind::OracleTable: return run_oracle_table(cfg);
    case ExperimentKind::CircleProbe: return run_circle_probe(cfg);
  }
  throw ValidationError("unknown experiment kind");
}

std::string summary_json(const ExperimentReport& report) {
  nlohmann::ordered_json j;
  j["config_hash"] = report.config_hash;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::istringstream is(config_text(report.config));
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find('=');
    const std::string key = line.substr(0, eq);
    if (key == "output_dir" || key == "workers") continue;
    config[key] = line.substr(eq + 1);
  }
  j["config"] = config;
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
  for (const auto& [k, v] : report.summary) {
    if (v == "true" || v == "false") {
      summary[k] = v == "true";
      continue;
    }
    double d = 0.0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), d);
    if (res.ec == std::errc() && res.ptr == v.data() + v.size() && std::isfinite(d)) {
      summary[k] = d;
    } else {
      summary[k] = v;
    }
  }
  j["summary"] = summary;
  return j.dump(2) + "\n";
}

void write_report(const ExperimentReport& report, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  report.rows.write((fs::path(dir) / "report.csv").string());
  write_text_file((fs::path(dir) / "summary.json").string(), summary_json(report));
  std::string timing = "row,seconds\n";
  for (std::size_t k = 0; k < report.runtimes.size(); ++k) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", report.runtimes[k]);
    timing += std::to_string(k) + "," + buf + "\n";
  }
  write_text_file((fs::path(dir) / "timing.csv").string(), timing);
  for (const auto& [name, content] : report.artifacts) write_text_file((fs::path(dir) / name).string(), content);
}

std::string resolve_output_dir(const ExperimentConfig& cfg) {
  const char* env = std::getenv("MVU_OUTPUT_DIR");
  return env && *env ? std::string(env) : cfg.output_dir;
}

}  // namespace mvu
