#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mvu/energy.hpp"
#include "mvu/graph.hpp"
#include "mvu/manifolds.hpp"

namespace mvu {

struct Alignment {
  Eigen::MatrixXd rotation;         // orthogonal, a * rotation + translation ~ b
  Eigen::RowVectorXd translation;
  bool reflection = false;          // det(rotation) < 0
  bool degenerate = false;          // zero cross-covariance, identity used
  double max_residual = 0.0;
  double rms_residual = 0.0;
};

/// Best rigid motion (reflections allowed) taking the rows of a onto the rows
/// of b. When the column counts differ the narrower set is padded with zeros.
Alignment procrustes_align(const Points& a, const Points& b);

/// Max Procrustes residual between the top-d spectral coordinates of y and
/// psi(x). Throws NoIsometry for models without a reference isometry.
double solution_distance(const Points& y, const ManifoldModel& model, const Points& x);

/// Max Procrustes residual between y and the input points themselves.
double identity_recovery_error(const Points& y, const Points& x);

/// max_{i<j} ||y_i - y_j|| / dist(i, j) over pairs with dist > 1e-9.
double empirical_lipschitz(const Points& y, const Eigen::MatrixXd& dist);

/// max_{i<j} ||y_i - y_j|| - (1 + 6 eta / r) dist(i, j).
double interpolation_margin(const Points& y, const Eigen::MatrixXd& dist, double eta, double r);

struct RecoveryReport {
  std::optional<double> procrustes_error;
  std::optional<double> energy_gap;
  std::optional<double> lipschitz_oracle;
  std::optional<double> lipschitz_graph;
  /// Against the oracle distance when the model has one, else graph geodesics.
  double interpolation_margin = 0.0;
  double eta = 0.0;
  double r = 0.0;
};

/// Judges a solved embedding. `oracle_energy` is the continuum supremum when
/// known; `eta` the measured covering radius.
RecoveryReport recovery_report(const ManifoldModel& model, const Points& x, const NeighborGraph& g,
                               const Points& y, double eta,
                               std::optional<double> oracle_energy = std::nullopt);

struct TailRow {
  double t = 0.0;
  double frequency = 0.0;  // share of trials with |E_n - E| > t
  double bound = 0.0;      // 2 exp(-n t^2 / (5 D^4 + 3 D^2 t))
  double se = 0.0;         // binomial standard error of the frequency
  bool within = false;     // frequency <= bound + 3 se
};

struct TailExperiment {
  double reference_energy = 0.0;
  double reference_se = 0.0;
  std::vector<TailRow> rows;
};

/// Monte Carlo tail of the energy U-statistic of f over `trials` samples of
/// size n. The reference energy comes from one sample of size reference_m.
TailExperiment ustat_tail_experiment(const ManifoldModel& model, const PointMap& f, std::size_t n,
                                     const std::vector<double>& t_grid, int trials,
                                     std::uint64_t seed, std::size_t reference_m = 200000);

/// Share of the centered Gram trace carried by the top d eigenvalues (1 when
/// d reaches the embedding dimension).
double flatness_report(const Points& y, int d);

}  // namespace mvu
