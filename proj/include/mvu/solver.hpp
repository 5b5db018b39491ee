#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mvu/graph.hpp"
#include "mvu/manifolds.hpp"

namespace mvu {

enum class Backend { CoordinateAscent, GramLowRank };
std::string to_string(Backend b);
Backend parse_backend(const std::string& text);

struct SolverConfig {
  Backend backend = Backend::CoordinateAscent;
  /// Allowed edge violation relative to r.
  double feas_tol = 1e-6;
  /// Backtracking line search: first trial step, Armijo constant, shrink factor.
  double initial_step = 1.0;
  double armijo = 1e-4;
  double backtrack = 0.5;
  /// Penalty schedule. Multipliers are updated after every inner solve; the
  /// penalty grows when the violation fails to drop by a factor of 4.
  double initial_penalty = 1.0;
  double penalty_growth = 4.0;
  int max_outer = 60;
  int max_inner = 3000;
  int lbfgs_memory = 10;
  /// Factor rank for GramLowRank; 0 means min(p, 10).
  int rank_cap = 0;
  std::uint64_t seed = 0;
  /// Relative energy change that ends the outer loop once feasible.
  double stop_tol = 1e-9;
  /// Random Gaussian starts tried after the feasible start y_i = x_i.
  int restarts = 0;
};

struct TraceRecord {
  int iter = 0;
  double energy = 0.0;
  double max_violation = 0.0;
  double penalty = 0.0;
  int steps = 0;
};

struct SolveTrace {
  std::vector<TraceRecord> records;  // records of the start that won
  double wall_seconds = 0.0;
  bool converged = false;
  int best_start = 0;
  std::vector<double> start_energies;

  /// CSV "iter,energy,max_violation,penalty,steps".
  std::string csv() const;
};

struct Embedding {
  Points y;
  double energy = 0.0;
  double max_violation = 0.0;  // max over edges of (||y_i-y_j|| - ||x_i-x_j||)_+
  bool centered = false;
  bool converged = false;
};

struct Solution {
  Embedding embedding;
  SolveTrace trace;
};

/// Augmented Lagrangian of the discrete program in scaled coordinates.
/// With h_e = (||y_i - y_j||^2 - l_e^2) / s^2 and S(Y) = sum_i ||y_i - ybar||^2 / s^2,
///   Phi(Y) = -S(Y)/n + sum_e [max(0, lambda_e + mu h_e)^2 - lambda_e^2] / (2 mu).
/// Minimizing Phi maximizes the energy subject to h_e <= 0.
class AugmentedLagrangian {
 public:
  AugmentedLagrangian(std::size_t n, const std::vector<Edge>& edges, double scale);

  double value(const Points& y) const;
  /// Value with gradient written to `grad` (same shape as y).
  double value_and_gradient(const Points& y, Points& grad) const;
  /// lambda_e <- max(0, lambda_e + mu h_e).
  void update_multipliers(const Points& y);
  /// Complementarity-aware violation: max_e max(h_e, -lambda_e/mu).
  double kkt_violation(const Points& y) const;

  std::vector<double>& multipliers() { return lambda_; }
  const std::vector<double>& multipliers() const { return lambda_; }
  double penalty() const { return mu_; }
  void set_penalty(double mu) { mu_ = mu; }
  /// When true the objective is -||Y||_F^2/n and gradients are projected onto
  /// the centered subspace (Gram formulation); otherwise the centered spread.
  void set_gram_form(bool on) { gram_ = on; }

 private:
  double constraint(const Points& y, std::size_t e) const;
  std::size_t n_;
  const std::vector<Edge>& edges_;
  double scale_;
  double mu_ = 1.0;
  bool gram_ = false;
  std::vector<double> lambda_;
};

/// Discrete MVU by augmented-Lagrangian ascent in point coordinates.
/// Throws DisconnectedGraph when g is not connected and NumericalFailure on
/// non-finite iterates. A run that exhausts its budget returns the best
/// iterate with converged = false.
Solution solve_mvu(const Points& x, const NeighborGraph& g, const SolverConfig& cfg = {});

/// Same program over a rank-k factor V of the Gram matrix K = V V^T, with
/// edge constraints K_ii + K_jj - 2 K_ij <= ||x_i - x_j||^2 and row sums of V
/// held at zero.
Solution solve_mvu_gram(const Points& x, const NeighborGraph& g, const SolverConfig& cfg = {});

/// Dispatches on cfg.backend.
Solution solve(const Points& x, const NeighborGraph& g, const SolverConfig& cfg);

/// Centers, rotates to principal axes and fixes signs so that rigid-motion
/// equivalent solutions print identically.
Points canonicalize(const Points& y);

struct Coordinates {
  Points coords;               // n x d
  Eigen::VectorXd eigenvalues; // full spectrum of the centered Gram, decreasing
  double trace_fraction = 0.0; // share of the trace in the top d eigenvalues
};

/// Top-d spectral coordinates of the centered Gram matrix Y Y^T. Throws
/// ValidationError when d exceeds the numerical rank.
Coordinates extract_coordinates(const Points& y, int d);

struct FeasibilityReport {
  double max_violation = 0.0;
  double mean_violation = 0.0;  // mean over edges of the positive part
  std::size_t tight_edges = 0;  // |slack| below 1e-6 r; stretched edges are not tight
  std::size_t edge_count = 0;
};

FeasibilityReport feasibility_report(const Points& x, const NeighborGraph& g, const Points& y);

}  // namespace mvu
