// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mvu/analysis.hpp"
#include "mvu/config.hpp"
#include "mvu/csv.hpp"
#include "mvu/energy.hpp"
#include "mvu/experiments.hpp"
#include "mvu/graph.hpp"
#include "mvu/manifolds.hpp"
#include "mvu/solver.hpp"

using namespace mvu;

namespace {

constexpr double kPi = std::numbers::pi;

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Benchmark {
  std::string name;
  ManifoldModel model;
  Points x;
  NeighborGraph g;
  Solution sol;
  double eta = 0.0;
};

// solved instances kept for the invariant checks of criterion 5
std::vector<Benchmark> g_benchmarks;

int workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

int report(int id, const std::string& title, double budget_s, const std::function<Verdict()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double elapsed = seconds_since(t0);
  const bool in_time = elapsed <= budget_s;
  const bool ok = v.pass && in_time;
  std::printf("%s [%d] %s: %s; %.1f s of %.0f s budget%s\n", ok ? "PASS" : "FAIL", id, title.c_str(),
              v.detail.c_str(), elapsed, budget_s, in_time ? "" : " (over budget)");
  std::fflush(stdout);
  return ok ? 0 : 1;
}

double col(const ExperimentReport& rep, std::size_t row, const std::string& name) {
  return std::stod(rep.rows.rows().at(row).at(rep.rows.column(name)));
}

Benchmark solve_benchmark(const std::string& name, const ManifoldModel& model, std::size_t n, std::uint64_t seed,
                          double c, int restarts) {
  Benchmark b{name, model, sample(model, n, seed).points, {}, {}, 0.0};
  b.g = build_graph(b.x, radius_schedule(n, model.intrinsic_dim(), c));
  b.eta = covering_radius(sample(model, n, seed), sample(model, 50 * n, seed ^ 0xabcdefULL));
  SolverConfig cfg;
  cfg.restarts = restarts;
  cfg.seed = seed;
  b.sol = solve(b.x, b.g, cfg);
  return b;
}

Verdict convex_consistency() {
  ExperimentConfig cfg = parse_config(
      "version=1\nkind=convex_consistency\nmodel=interval\nmodel.length=1\n"
      "n=50,100,200,400,800\nseeds=1,2,3,4,5\nC=2\nsolver.restarts=3\nsave_embeddings=false\n");
  cfg.workers = workers();
  const ExperimentReport rep = run_experiment(cfg);
  const double oracle = 1.0 / 6.0;
  std::ostringstream gaps;
  for (std::size_t n : cfg.n_grid) gaps << (gaps.tellp() ? " " : "") << fmt(std::stod(rep.summary.at("median_energy_gap[n=" + std::to_string(n) + "]")), 3);
  const bool monotone = rep.summary.at("energy_gap_monotone") == "true";
  const double gap = std::stod(rep.summary.at("final_median_energy_gap"));
  const double res = std::stod(rep.summary.at("final_median_procrustes"));
  const bool ok = monotone && gap <= 0.05 * oracle && res <= 0.05 && rep.summary.at("failed_rows") == "0";
  // keep the largest instance for the invariant checks
  g_benchmarks.push_back(solve_benchmark("interval n=800", make_model("interval"), 800, 1, 2.0, 3));
  return {ok, "median gaps [" + gaps.str() + "] monotone=" + (monotone ? "yes" : "no") + ", gap(800)=" + fmt(gap) +
                  " <= " + fmt(0.05 * oracle) + ", procrustes(800)=" + fmt(res) + " <= 0.05"};
}

Verdict disk_consistency() {
  const auto disk = make_model("disk");
  Benchmark b = solve_benchmark("disk n=600", disk, 600, 1, 2.0, 3);
  const double e = b.sol.embedding.energy;
  const double res = solution_distance(b.sol.embedding.y, disk, b.x);
  g_benchmarks.push_back(std::move(b));
  return {std::abs(e - 1.0) <= 0.1 && res <= 0.1,
          "energy=" + fmt(e, 6) + " (|E-1| <= 0.1), procrustes=" + fmt(res) + " <= 0.1"};
}

Verdict ellipse_oracle() {
  const double f1 = ellipse_F(1.0);
  const double fhalf = ellipse_F(kPi / 2);
  // brute-force midpoint rule on the doubled segment, independent of the adaptive quadrature
  double brute = 0.0;
  const int m = 2000000;
  for (int k = 0; k < m; ++k) {
    const double t = 2 * kPi * (k + 0.5) / m;
    brute += (kPi * kPi / 4) * std::cos(t) * std::cos(t) * (kPi / 2) * std::abs(std::sin(t));
  }
  brute *= 2 * kPi / m;
  const AStarResult star = find_a_star();
  const double f_after = ellipse_F(star.a_star + 0.01);
  const bool ok = std::abs(f1 - 2 * kPi) <= 1e-9 && std::abs(fhalf - brute) <= 1e-8 &&
                  std::abs(fhalf - std::pow(kPi, 3) / 6) <= 1e-9 && f_after < 2 * kPi;
  return {ok, "F(1)-2pi=" + fmt(f1 - 2 * kPi, 3) + ", F(pi/2)=" + fmt(fhalf, 12) + " brute=" + fmt(brute, 12) +
                  " pi^3/6=" + fmt(std::pow(kPi, 3) / 6, 12) + " printed pi^2/12=" + fmt(kPi * kPi / 12, 6) +
                  " (differs by " + fmt(fhalf - kPi * kPi / 12, 6) + "), a*=" + fmt(star.a_star, 8) +
                  ", F(a*+0.01)=" + fmt(f_after, 10) + " < 2pi"};
}

Verdict inconsistency() {
  const auto arc_tube = make_model("tube", {{"base", "arc"}, {"radius", "1"}, {"length", "2"}, {"sigma", "0.1"}});
  const auto ellipse_tube = make_model("tube", {{"base", "ellipse"}, {"a", "1.4"}, {"sigma", "0.05"}});
  bool ok = true;
  std::ostringstream detail;
  for (auto& [name, model] : std::vector<std::pair<std::string, ManifoldModel>>{{"arc tube", arc_tube},
                                                                                 {"ellipse tube", ellipse_tube}}) {
    Benchmark b = solve_benchmark(name + " n=800", model, 800, 1, 1.0, 2);
    const double e = b.sol.embedding.energy;
    const double e_id = energy(b.x);
    const double res = identity_recovery_error(b.sol.embedding.y, b.x);
    const auto& starts = b.sol.trace.start_energies;
    const double hi = *std::max_element(starts.begin(), starts.end());
    const double lo = *std::min_element(starts.begin(), starts.end());
    ok = ok && e > e_id && res > 0.1;
    detail << (detail.tellp() ? "; " : "") << name << ": E=" << fmt(e, 6) << " > E(id)=" << fmt(e_id, 6)
           << ", identity residual=" << fmt(res) << " > 0.1, restart spread=" << fmt((hi - lo) / hi, 2);
    g_benchmarks.push_back(std::move(b));
  }
  return {ok, detail.str()};
}

Verdict invariants() {
  bool ok = !g_benchmarks.empty();
  std::ostringstream detail;
  for (const auto& b : g_benchmarks) {
    const double r = b.g.r;
    const double viol = b.sol.embedding.max_violation;
    ok = ok && viol <= 1e-6 * r;
    detail << (detail.tellp() ? "; " : "") << b.name << ": violation/r=" << fmt(viol / r, 2);
    if (b.eta <= r / 4) {
      const Eigen::MatrixXd dist = b.model.pairwise_intrinsic(b.x);
      const double margin = interpolation_margin(b.sol.embedding.y, dist, b.eta, r);
      const double slack = 0.05 * b.model.diameter();
      ok = ok && margin <= slack;
      detail << ", interp margin=" << fmt(margin, 3) << " <= " << fmt(slack, 3);
    } else {
      detail << ", eta/r=" << fmt(b.eta / r, 3) << " > 1/4 (bound not applicable)";
    }
  }
  return {ok, detail.str()};
}

Verdict ustat_tail() {
  ExperimentConfig cfg = parse_config(
      "version=1\nkind=ustat_tail\nmodel=interval\nn=100\nseeds=7\ntrials=2000\nreference_m=200000\n"
      "t=0.002,0.005,0.01,0.015,0.02,0.03,0.04,0.06,0.08,0.1\n");
  const ExperimentReport rep = run_experiment(cfg);
  bool ok = rep.rows.rows().size() == 10;
  double worst = -1.0;
  for (std::size_t k = 0; k < rep.rows.rows().size(); ++k) {
    const double slack = col(rep, k, "bound") + 3 * col(rep, k, "se") - col(rep, k, "frequency");
    ok = ok && slack >= 0.0;
    worst = worst < 0 ? slack : std::min(worst, slack);
  }
  return {ok, "10 t values, 2000 trials, min(bound + 3 se - frequency)=" + fmt(worst, 3) +
                  ", reference E=" + rep.summary.at("reference_energy").substr(0, 8)};
}

Verdict properties() {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto random_points = [&](Eigen::Index n, Eigen::Index p) {
    Points y(n, p);
    for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = gauss(rng);
    return y;
  };
  std::vector<std::string> failed;

  double homog = 0.0, trans = 0.0, identity = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Points y = random_points(2 + trial % 49, 3);
    const double e = energy(y);
    homog = std::max(homog, std::abs(energy(Points(2.5 * y)) - 6.25 * e) / e);
    trans = std::max(trans, std::abs(energy(Points(y.rowwise() + Eigen::RowVector3d(3, -1, 2))) - e) / e);
    identity = std::max(identity, std::abs(energy_double_sum(y) - e) / e);
  }
  if (homog > 1e-12) failed.push_back("homogeneity");
  if (trans > 1e-12) failed.push_back("translation");
  if (identity > 1e-12) failed.push_back("variance identity");

  // gradient check on random 5-point instances
  double grad_err = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const Points x = random_points(5, 2);
    const NeighborGraph g = build_graph(x, 10.0);
    AugmentedLagrangian al(5, g.edges, 1.0);
    al.set_penalty(2.0);
    Points y = x + 0.3 * random_points(5, 2);
    al.update_multipliers(y);
    y += 0.1 * random_points(5, 2);
    Points grad;
    al.value_and_gradient(y, grad);
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      Points up = y, down = y;
      up.data()[i] += 1e-6;
      down.data()[i] -= 1e-6;
      const double fd = (al.value(up) - al.value(down)) / 2e-6;
      grad_err = std::max(grad_err, std::abs(fd - grad.data()[i]) / std::max(1.0, std::abs(fd)));
    }
  }
  if (grad_err > 1e-5) failed.push_back("gradient");

  // backend agreement on the convex benchmarks
  double backend_gap = 0.0;
  for (const auto& [name, n] : std::vector<std::pair<std::string, std::size_t>>{
           {"interval", 50}, {"interval", 200}, {"interval", 800}, {"disk", 600}}) {
    const auto model = make_model(name);
    const Points x = sample(model, n, 1).points;
    const NeighborGraph g = build_graph(x, radius_schedule(n, model.intrinsic_dim(), 2.0));
    SolverConfig cfg;
    const double coord = solve(x, g, cfg).embedding.energy;
    cfg.backend = Backend::GramLowRank;
    const double gram = solve(x, g, cfg).embedding.energy;
    backend_gap = std::max(backend_gap, std::abs(coord - gram) / coord);
  }
  if (backend_gap > 0.01) failed.push_back("backend agreement");

  // planted rigid motions, reflections included
  double procrustes = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Points a = random_points(30, 3);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(random_points(3, 3)).householderQ();
    Points b = a * q;
    b.rowwise() += Eigen::RowVector3d(gauss(rng), gauss(rng), gauss(rng));
    procrustes = std::max(procrustes, procrustes_align(a, b).max_residual);
  }
  if (procrustes > 1e-10) failed.push_back("procrustes");

  // byte-identical reruns of a solve and of an experiment
  const auto arc = make_model("arc");
  const Points x = sample(arc, 200, 3).points;
  const NeighborGraph g = build_graph(x, radius_schedule(200, 1, 2.0));
  SolverConfig cfg;
  cfg.restarts = 2;
  const Solution s1 = solve(x, g, cfg);
  const Solution s2 = solve(x, g, cfg);
  ExperimentConfig ec = parse_config("version=1\nkind=convex_consistency\nmodel=disk\nn=60,120\nseeds=1,2\nsolver.restarts=1\n");
  const ExperimentReport r1 = run_experiment(ec);
  ec.workers = 3;
  const ExperimentReport r2 = run_experiment(ec);
  const bool deterministic = points_csv(s1.embedding.y) == points_csv(s2.embedding.y) &&
                             s1.trace.csv() == s2.trace.csv() && r1.rows.str() == r2.rows.str() &&
                             summary_json(r1) == summary_json(r2) && r1.artifacts == r2.artifacts;
  if (!deterministic) failed.push_back("determinism");

  std::string which;
  for (const auto& f : failed) which += (which.empty() ? "" : ",") + f;
  return {failed.empty(), "homogeneity " + fmt(homog, 2) + ", translation " + fmt(trans, 2) + ", identity " +
                              fmt(identity, 2) + ", gradient " + fmt(grad_err, 2) + ", backends " +
                              fmt(backend_gap, 2) + ", procrustes " + fmt(procrustes, 2) + ", determinism " +
                              (deterministic ? "ok" : "broken") + (which.empty() ? "" : "; failed: " + which)};
}

}  // namespace

int main() {
  int failures = 0;
  failures += report(1, "convex consistency (interval)", 300, convex_consistency);
  failures += report(2, "disk consistency", 600, disk_consistency);
  failures += report(3, "ellipse oracle", 10, ellipse_oracle);
  failures += report(4, "inconsistency on non-convex tubes", 900, inconsistency);
  failures += report(5, "Lipschitz and interpolation invariants", 120, invariants);
  failures += report(6, "U-statistic tail", 120, ustat_tail);
  failures += report(7, "property suites", 600, properties);
  std::printf("%d of 7 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
