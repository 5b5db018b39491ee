#include "mvu/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

#include "mvu/csv.hpp"
#include "mvu/energy.hpp"
#include "mvu/errors.hpp"
#include "mvu/linalg.hpp"

namespace mvu {

std::string to_string(Backend b) {
  return b == Backend::GramLowRank ? "gram" : "coordinate";
}

Backend parse_backend(const std::string& text) {
  if (text == "coordinate" || text == "CoordinateAscent") return Backend::CoordinateAscent;
  if (text == "gram" || text == "GramLowRank") return Backend::GramLowRank;
  throw ValidationError("unknown backend '" + text + "' (expected coordinate or gram)");
}

std::string SolveTrace::csv() const {
  std::ostringstream os;
  os << "iter,energy,max_violation,penalty,steps\n";
  for (const auto& r : records) {
    os << r.iter << ',' << format_double(r.energy) << ',' << format_double(r.max_violation) << ','
       << format_double(r.penalty) << ',' << r.steps << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------

AugmentedLagrangian::AugmentedLagrangian(std::size_t n, const std::vector<Edge>& edges, double scale)
    : n_(n), edges_(edges), scale_(scale), lambda_(edges.size(), 0.0) {
  if (!(scale > 0.0)) throw ValidationError("augmented Lagrangian: scale must be positive");
}

double AugmentedLagrangian::constraint(const Points& y, std::size_t e) const {
  const Edge& ed = edges_[e];
  const double* a = y.data() + ed.i * y.cols();
  const double* b = y.data() + ed.j * y.cols();
  double sq = 0.0;
  for (Eigen::Index k = 0; k < y.cols(); ++k) sq += (a[k] - b[k]) * (a[k] - b[k]);
  return (sq - ed.length * ed.length) / (scale_ * scale_);
}

double AugmentedLagrangian::value(const Points& y) const {
  Points grad;
  return value_and_gradient(y, grad);
}

double AugmentedLagrangian::value_and_gradient(const Points& y, Points& grad) const {
  const Eigen::Index q = y.cols();
  const double inv_s2 = 1.0 / (scale_ * scale_);
  const double nd = static_cast<double>(n_);
  Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(q);
  if (!gram_) mean = y.colwise().mean();
  grad = y.rowwise() - mean;
  double value = -grad.squaredNorm() * inv_s2 / nd;
  grad *= -2.0 * inv_s2 / nd;

  const double mu = mu_;
  const double* yd = y.data();
  double* gd = grad.data();
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const Edge& ed = edges_[e];
    const double* a = yd + ed.i * q;
    const double* b = yd + ed.j * q;
    double sq = 0.0;
    for (Eigen::Index k = 0; k < q; ++k) sq += (a[k] - b[k]) * (a[k] - b[k]);
    const double h = (sq - ed.length * ed.length) * inv_s2;
    const double lam = lambda_[e];
    const double t = lam + mu * h;
    if (t > 0.0) {
      value += (t * t - lam * lam) / (2.0 * mu);
      const double coef = 2.0 * t * inv_s2;
      double* ga = gd + ed.i * q;
      double* gb = gd + ed.j * q;
      for (Eigen::Index k = 0; k < q; ++k) {
        const double c = coef * (a[k] - b[k]);
        ga[k] += c;
        gb[k] -= c;
      }
    } else {
      value -= lam * lam / (2.0 * mu);
    }
  }
  if (gram_) grad.rowwise() -= grad.colwise().mean();
  return value;
}

void AugmentedLagrangian::update_multipliers(const Points& y) {
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    lambda_[e] = std::max(0.0, lambda_[e] + mu_ * constraint(y, e));
  }
}

double AugmentedLagrangian::kkt_violation(const Points& y) const {
  double worst = 0.0;
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    worst = std::max(worst, std::abs(std::max(constraint(y, e), -lambda_[e] / mu_)));
  }
  return worst;
}

// ---------------------------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

struct LbfgsOptions {
  int memory = 10;
  int max_iter = 3000;
  double gtol = 1e-8;        // sup-norm of the gradient
  double initial_step = 1.0;
  double armijo = 1e-4;
  double backtrack = 0.5;
};

struct LbfgsResult {
  int iterations = 0;
  double value = 0.0;
  double grad_inf = 0.0;
  bool converged = false;
};

using Objective = std::function<double(const Points&, Points&)>;

Eigen::Map<Eigen::VectorXd> flat(Points& p) { return {p.data(), p.size()}; }

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericalFailure(std::string("solver: non-finite ") + what);
}

// Limited-memory BFGS with Armijo backtracking.
LbfgsResult lbfgs(const Objective& f, Points& x, const LbfgsOptions& opt) {
  LbfgsResult out;
  Points g(x.rows(), x.cols());
  double fx = f(x, g);
  require_finite(fx, "objective");
  std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> mem;
  Points trial(x.rows(), x.cols());
  Points g_trial(x.rows(), x.cols());
  Eigen::VectorXd d(x.size());
  std::vector<double> alpha;
  int flat_steps = 0;

  for (out.iterations = 0; out.iterations < opt.max_iter; ++out.iterations) {
    out.grad_inf = flat(g).lpNorm<Eigen::Infinity>();
    require_finite(out.grad_inf, "gradient");
    if (out.grad_inf <= opt.gtol) {
      out.converged = true;
      break;
    }
    // two-loop recursion
    d = -flat(g);
    alpha.assign(mem.size(), 0.0);
    for (std::size_t k = mem.size(); k-- > 0;) {
      const auto& [s, y] = mem[k];
      alpha[k] = s.dot(d) / y.dot(s);
      d -= alpha[k] * y;
    }
    if (mem.empty()) {
      d *= opt.initial_step / out.grad_inf;
    } else {
      const auto& [s, y] = mem.back();
      d *= s.dot(y) / y.dot(y);
    }
    for (std::size_t k = 0; k < mem.size(); ++k) {
      const auto& [s, y] = mem[k];
      const double beta = y.dot(d) / y.dot(s);
      d += (alpha[k] - beta) * s;
    }
    double slope = flat(g).dot(d);
    if (!(slope < 0.0)) {
      mem.clear();
      d = -flat(g) * (opt.initial_step / out.grad_inf);
      slope = flat(g).dot(d);
    }

    double step = 1.0;
    double f_trial = 0.0;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      flat(trial) = flat(x) + step * d;
      f_trial = f(trial, g_trial);
      if (std::isfinite(f_trial) && f_trial <= fx + opt.armijo * step * slope) {
        accepted = true;
        break;
      }
      step *= opt.backtrack;
    }
    if (!accepted) break;  // no descent possible at working precision

    Eigen::VectorXd s = flat(trial) - flat(x);
    Eigen::VectorXd yv = flat(g_trial) - flat(g);
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      mem.emplace_back(std::move(s), std::move(yv));
      if (static_cast<int>(mem.size()) > opt.memory) mem.pop_front();
    }
    const double decrease = fx - f_trial;
    std::swap(x, trial);
    std::swap(g, g_trial);
    fx = f_trial;
    if (decrease <= 1e-15 * std::max(1.0, std::abs(fx))) {
      if (++flat_steps >= 3) {
        ++out.iterations;
        out.grad_inf = flat(g).lpNorm<Eigen::Infinity>();
        break;
      }
    } else {
      flat_steps = 0;
    }
  }
  out.value = fx;
  return out;
}

double max_violation(const Points& y, const std::vector<Edge>& edges) {
  double worst = 0.0;
  for (const auto& e : edges) {
    worst = std::max(worst, (y.row(e.i) - y.row(e.j)).norm() - e.length);
  }
  return worst;
}

// Gauss-Seidel projection onto violated edges: each pass pulls the two
// endpoints of an over-long edge together symmetrically.
int project_edges(Points& y, const std::vector<Edge>& edges, double tol, int max_sweeps = 2000) {
  const Eigen::Index q = y.cols();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double worst = 0.0;
    for (const auto& e : edges) {
      double* a = y.data() + e.i * q;
      double* b = y.data() + e.j * q;
      double sq = 0.0;
      for (Eigen::Index k = 0; k < q; ++k) sq += (a[k] - b[k]) * (a[k] - b[k]);
      const double len = std::sqrt(sq);
      const double excess = len - e.length;
      if (excess <= 0.0) continue;
      worst = std::max(worst, excess);
      // aim slightly inside so rounding cannot leave a residual violation
      const double target = e.length * (1.0 - 1e-14);
      const double shrink = 0.5 * (len - target) / len;
      for (Eigen::Index k = 0; k < q; ++k) {
        const double c = shrink * (a[k] - b[k]);
        a[k] -= c;
        b[k] += c;
      }
    }
    if (worst <= tol) return sweep;
  }
  return max_sweeps;
}

/// Largest factor in (0, 1] that makes y feasible by uniform scaling.
double feasibility_scale(const Points& y, const std::vector<Edge>& edges) {
  double scale = 1.0;
  for (const auto& e : edges) {
    const double len = (y.row(e.i) - y.row(e.j)).norm();
    if (len > e.length) scale = std::min(scale, len > 0.0 ? e.length / len : 1.0);
  }
  return scale;
}

struct StartResult {
  Points y;
  double energy = 0.0;
  double violation = 0.0;
  bool converged = false;
  std::vector<TraceRecord> records;
};

// One augmented-Lagrangian run in scaled units (edge lengths divided by r).
StartResult run_start(Points z, const std::vector<Edge>& edges, double r, bool gram,
                      const SolverConfig& cfg) {
  const std::size_t n = static_cast<std::size_t>(z.rows());
  AugmentedLagrangian al(n, edges, 1.0);
  al.set_gram_form(gram);
  al.set_penalty(cfg.initial_penalty);
  const double feas = cfg.feas_tol;  // scaled units: relative to r

  LbfgsOptions opt;
  opt.memory = cfg.lbfgs_memory;
  opt.max_iter = cfg.max_inner;
  opt.initial_step = cfg.initial_step;
  opt.armijo = cfg.armijo;
  opt.backtrack = cfg.backtrack;
  const Objective objective = [&al](const Points& y, Points& g) {
    return al.value_and_gradient(y, g);
  };

  // Gradient scale of the bare objective, used to make the inner tolerance
  // independent of n.
  auto spread_scale = [&](const Points& y) {
    Eigen::RowVectorXd mean = y.colwise().mean();
    const double m = (y.rowwise() - mean).rowwise().norm().maxCoeff();
    return std::max(2.0 * m / static_cast<double>(n), 1e-300);
  };

  StartResult out;
  double prev_kkt = std::numeric_limits<double>::infinity();
  double prev_energy = std::numeric_limits<double>::quiet_NaN();
  double best_energy = -std::numeric_limits<double>::infinity();
  Points best;
  double omega = 1e-2;
  for (int outer = 1; outer <= cfg.max_outer; ++outer) {
    opt.gtol = omega * spread_scale(z);
    const LbfgsResult inner = lbfgs(objective, z, opt);
    const double e = energy(z) * r * r;
    const double viol = max_violation(z, edges);
    require_finite(e, "energy");
    out.records.push_back({outer, e, viol * r, al.penalty(), inner.iterations});
    if (viol <= feas && e > best_energy) {
      best_energy = e;
      best = z;
    }
    const double kkt = al.kkt_violation(z);
    al.update_multipliers(z);
    const bool stable = std::isfinite(prev_energy) &&
                        std::abs(e - prev_energy) <= cfg.stop_tol * std::abs(e);
    if (viol <= feas && stable && kkt <= feas) {
      out.converged = true;
      break;
    }
    if (kkt > 0.25 * prev_kkt) al.set_penalty(al.penalty() * cfg.penalty_growth);
    prev_kkt = kkt;
    prev_energy = e;
    omega = std::max(omega * 0.1, 1e-9);
  }

  // Finish from the last iterate when it can be pulled back to feasibility,
  // otherwise from the best feasible one.
  Points last = z;
  const int sweeps = project_edges(last, edges, feas * 1e-3);
  if (max_violation(last, edges) <= feas) {
    const double e_last = energy(last) * r * r;
    if (best.size() == 0 || e_last >= best_energy) {
      best = std::move(last);
      best_energy = e_last;
    }
  }
  if (best.size() == 0) {
    // nothing feasible was reached: scale the last iterate back
    best = z * feasibility_scale(z, edges);
    best_energy = energy(best) * r * r;
    out.converged = false;
  }
  out.violation = max_violation(best, edges) * r;
  out.records.push_back({static_cast<int>(out.records.size()) + 1, best_energy, out.violation,
                         al.penalty(), sweeps});
  out.y = std::move(best);
  out.energy = best_energy;
  return out;
}

Points gaussian_points(Eigen::Index n, Eigen::Index q, double sd, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, sd);
  Points y(n, q);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < q; ++k) y(i, k) = normal(rng);
  return y;
}

void check_inputs(const Points& x, const NeighborGraph& g) {
  if (x.rows() < 2) throw ValidationError("solve: need at least two points");
  if (static_cast<std::size_t>(x.rows()) != g.n) {
    throw ValidationError("solve: graph and point cloud sizes differ");
  }
  if (!(g.r > 0.0)) throw ValidationError("solve: graph radius must be positive");
  if (!x.allFinite()) throw ValidationError("solve: input points must be finite");
  if (count_components(g.n, g.edges) != 1) {
    throw DisconnectedGraph("solve: neighborhood graph is disconnected (" +
                            std::to_string(count_components(g.n, g.edges)) +
                            " components); the program is unbounded");
  }
}

Points centered(const Points& y) { return y.rowwise() - y.colwise().mean(); }

Solution finish(StartResult best, std::vector<double> energies, int best_start, double r,
                Clock::time_point t0) {
  Solution sol;
  sol.embedding.y = canonicalize(best.y * r);
  sol.embedding.energy = energy(sol.embedding.y);
  sol.embedding.max_violation = best.violation;
  sol.embedding.centered = true;
  sol.embedding.converged = best.converged;
  sol.trace.records = std::move(best.records);
  sol.trace.converged = best.converged;
  sol.trace.best_start = best_start;
  sol.trace.start_energies = std::move(energies);
  sol.trace.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return sol;
}

Solution two_points(const Points& x, const NeighborGraph& g, Clock::time_point t0) {
  // The single edge is stretched tight, which is where x already sits.
  Solution sol;
  sol.embedding.y = canonicalize(x);
  sol.embedding.energy = energy(sol.embedding.y);
  sol.embedding.centered = true;
  sol.embedding.converged = true;
  sol.trace.records.push_back({1, sol.embedding.energy, 0.0, 0.0, 0});
  sol.trace.converged = true;
  sol.trace.start_energies = {sol.embedding.energy};
  sol.trace.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  (void)g;
  return sol;
}

std::vector<Edge> scaled_edges(const NeighborGraph& g) {
  std::vector<Edge> edges = g.edges;
  for (auto& e : edges) e.length /= g.r;
  return edges;
}

Solution run_starts(std::vector<Points> starts, const std::vector<Edge>& edges, double r,
                    bool gram, const SolverConfig& cfg, Clock::time_point t0) {
  std::vector<double> energies;
  StartResult best;
  int best_start = -1;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    StartResult res = run_start(std::move(starts[s]), edges, r, gram, cfg);
    energies.push_back(res.energy);
    if (best_start < 0 || res.energy > best.energy) {
      best = std::move(res);
      best_start = static_cast<int>(s);
    }
  }
  return finish(std::move(best), std::move(energies), best_start, r, t0);
}

void validate_config(const SolverConfig& cfg) {
  if (!(cfg.feas_tol > 0.0 && cfg.stop_tol > 0.0 && cfg.initial_step > 0.0 &&
        cfg.armijo > 0.0 && cfg.armijo < 1.0 && cfg.backtrack > 0.0 && cfg.backtrack < 1.0 &&
        cfg.initial_penalty > 0.0 && cfg.penalty_growth >= 1.0)) {
    throw ValidationError("solver: tolerances and step parameters must be positive");
  }
  if (cfg.max_outer < 1 || cfg.max_inner < 1 || cfg.lbfgs_memory < 1 || cfg.restarts < 0) {
    throw ValidationError("solver: iteration budgets must be positive");
  }
}

}  // namespace

Solution solve_mvu(const Points& x, const NeighborGraph& g, const SolverConfig& cfg) {
  const auto t0 = Clock::now();
  validate_config(cfg);
  check_inputs(x, g);
  if (x.rows() == 2) return two_points(x, g, t0);
  const std::vector<Edge> edges = scaled_edges(g);
  const Points z0 = centered(x) / g.r;
  std::vector<Points> starts{z0};
  const double sd = std::sqrt(z0.squaredNorm() / static_cast<double>(z0.size()));
  for (int k = 0; k < cfg.restarts; ++k) {
    Points y = gaussian_points(z0.rows(), z0.cols(), sd, cfg.seed + 0x632be59bd9b4e019ULL * (k + 1));
    starts.push_back(centered(y) * feasibility_scale(y, edges));
  }
  return run_starts(std::move(starts), edges, g.r, false, cfg, t0);
}

Solution solve_mvu_gram(const Points& x, const NeighborGraph& g, const SolverConfig& cfg) {
  const auto t0 = Clock::now();
  validate_config(cfg);
  const int k = cfg.rank_cap > 0 ? cfg.rank_cap : static_cast<int>(std::min<Eigen::Index>(x.cols(), 10));
  if (k < 1) throw ValidationError("solve_mvu_gram: rank_cap must be positive");
  check_inputs(x, g);
  if (x.rows() == 2) return two_points(x, g, t0);
  const std::vector<Edge> edges = scaled_edges(g);

  // Start from the top-k principal coordinates of x (an orthogonal projection
  // never lengthens an edge); extra columns get a small seeded perturbation.
  const Points c = centered(x) / g.r;
  const auto eig = linalg::jacobi_eigen(Eigen::MatrixXd(c.transpose() * c));
  Points v = Points::Zero(c.rows(), k);
  const int shared = std::min<int>(k, static_cast<int>(c.cols()));
  v.leftCols(shared) = c * eig.vectors.leftCols(shared);
  if (k > c.cols()) {
    Points noise = gaussian_points(c.rows(), k - shared, 1e-3, cfg.seed ^ 0x5851f42d4c957f2dULL);
    v.rightCols(k - shared) = centered(noise);
  }
  v = centered(v);
  v *= feasibility_scale(v, edges);

  std::vector<Points> starts{v};
  const double sd = std::sqrt(v.squaredNorm() / static_cast<double>(v.size()));
  for (int s = 0; s < cfg.restarts; ++s) {
    Points y = centered(gaussian_points(v.rows(), v.cols(), sd, cfg.seed + 0x632be59bd9b4e019ULL * (s + 1)));
    starts.push_back(y * feasibility_scale(y, edges));
  }
  return run_starts(std::move(starts), edges, g.r, true, cfg, t0);
}

Solution solve(const Points& x, const NeighborGraph& g, const SolverConfig& cfg) {
  return cfg.backend == Backend::GramLowRank ? solve_mvu_gram(x, g, cfg) : solve_mvu(x, g, cfg);
}

Points canonicalize(const Points& y) {
  if (y.rows() == 0) return y;
  Points c = centered(y);
  const auto eig = linalg::jacobi_eigen(Eigen::MatrixXd(c.transpose() * c));
  Points out = c * eig.vectors;
  for (Eigen::Index k = 0; k < out.cols(); ++k) {
    const auto col = out.col(k);
    const double m3 = col.array().cube().sum();
    const double scale = col.array().abs().cube().sum();
    double sign = 1.0;
    if (scale > 0.0 && std::abs(m3) > 1e-9 * scale) {
      sign = m3 < 0.0 ? -1.0 : 1.0;
    } else {
      const double big = col.cwiseAbs().maxCoeff();
      for (Eigen::Index i = 0; i < col.size(); ++i) {
        if (std::abs(col(i)) > 1e-9 * big) {
          sign = col(i) < 0.0 ? -1.0 : 1.0;
          break;
        }
      }
    }
    if (sign < 0.0) out.col(k) *= -1.0;
  }
  return out;
}

Coordinates extract_coordinates(const Points& y, int d) {
  if (d < 1) throw ValidationError("extract_coordinates: d must be positive");
  if (d > y.cols()) {
    throw ValidationError("extract_coordinates: d = " + std::to_string(d) +
                          " exceeds the embedding dimension");
  }
  // Y^T Y and Y Y^T share their nonzero spectrum, so the p x p problem gives
  // the Gram eigenpairs: coordinates Y v_k = sqrt(lambda_k) u_k.
  const Points c = centered(y);
  const auto eig = linalg::jacobi_eigen(Eigen::MatrixXd(c.transpose() * c));
  Coordinates out;
  out.eigenvalues = eig.values.cwiseMax(0.0);
  const double total = out.eigenvalues.sum();
  const double top = out.eigenvalues(0);
  if (!(top > 0.0) || out.eigenvalues(d - 1) <= 1e-12 * top) {
    throw ValidationError("extract_coordinates: d = " + std::to_string(d) +
                          " exceeds the numerical rank of the embedding");
  }
  out.coords = c * eig.vectors.leftCols(d);
  out.trace_fraction = out.eigenvalues.head(d).sum() / total;
  return out;
}

FeasibilityReport feasibility_report(const Points& x, const NeighborGraph& g, const Points& y) {
  if (x.rows() != y.rows()) throw ValidationError("feasibility_report: row counts differ");
  FeasibilityReport out;
  out.edge_count = g.edges.size();
  double sum = 0.0;
  for (const auto& e : g.edges) {
    const double len = (y.row(e.i) - y.row(e.j)).norm();
    const double excess = len - e.length;
    if (excess > 0.0) {
      out.max_violation = std::max(out.max_violation, excess);
      sum += excess;
    }
    if (std::abs(e.length - len) < 1e-6 * g.r) ++out.tight_edges;
  }
  if (!g.edges.empty()) out.mean_violation = sum / static_cast<double>(g.edges.size());
  return out;
}

}  // namespace mvu
