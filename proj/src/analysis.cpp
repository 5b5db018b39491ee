#include "mvu/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mvu/errors.hpp"
#include "mvu/linalg.hpp"
#include "mvu/solver.hpp"

namespace mvu {

namespace {

Points pad_columns(const Points& a, Eigen::Index cols) {
  if (a.cols() == cols) return a;
  Points out = Points::Zero(a.rows(), cols);
  out.leftCols(a.cols()) = a;
  return out;
}

}  // namespace

Alignment procrustes_align(const Points& a_in, const Points& b_in) {
  if (a_in.rows() != b_in.rows() || a_in.rows() == 0) {
    throw ValidationError("procrustes_align: point sets must have the same, nonzero row count");
  }
  const Eigen::Index dim = std::max(a_in.cols(), b_in.cols());
  const Points a = pad_columns(a_in, dim);
  const Points b = pad_columns(b_in, dim);
  const Eigen::RowVectorXd ma = a.colwise().mean();
  const Eigen::RowVectorXd mb = b.colwise().mean();
  const Points ac = a.rowwise() - ma;
  const Points bc = b.rowwise() - mb;

  Alignment out;
  const Eigen::MatrixXd cross = ac.transpose() * bc;
  const double size = std::sqrt(ac.squaredNorm() * bc.squaredNorm());
  if (!(cross.norm() > 1e-14 * size) || size == 0.0) {
    out.degenerate = true;
    out.rotation = Eigen::MatrixXd::Identity(dim, dim);
  } else {
    const auto svd = linalg::jacobi_svd(cross);
    out.rotation = svd.u * svd.v.transpose();
  }
  out.reflection = out.rotation.determinant() < 0.0;
  out.translation = mb - ma * out.rotation;
  const Points residual = (a * out.rotation).rowwise() + out.translation - b;
  const Eigen::VectorXd norms = residual.rowwise().norm();
  out.max_residual = norms.maxCoeff();
  out.rms_residual = std::sqrt(norms.squaredNorm() / static_cast<double>(norms.size()));
  return out;
}

double solution_distance(const Points& y, const ManifoldModel& model, const Points& x) {
  const Points psi = model.isometry(x);
  const Coordinates c = extract_coordinates(y, model.intrinsic_dim());
  return procrustes_align(c.coords, psi).max_residual;
}

double identity_recovery_error(const Points& y, const Points& x) {
  return procrustes_align(y, x).max_residual;
}

double empirical_lipschitz(const Points& y, const Eigen::MatrixXd& dist) {
  const Eigen::Index n = y.rows();
  if (dist.rows() != n || dist.cols() != n) throw ValidationError("empirical_lipschitz: size mismatch");
  double best = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = dist(i, j);
      if (d > 1e-9) best = std::max(best, (y.row(i) - y.row(j)).norm() / d);
    }
  }
  return best;
}

double interpolation_margin(const Points& y, const Eigen::MatrixXd& dist, double eta, double r) {
  const Eigen::Index n = y.rows();
  if (dist.rows() != n || dist.cols() != n) throw ValidationError("interpolation_margin: size mismatch");
  if (!(r > 0.0)) throw ValidationError("interpolation_margin: r must be positive");
  const double factor = 1.0 + 6.0 * eta / r;
  double worst = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      worst = std::max(worst, (y.row(i) - y.row(j)).norm() - factor * dist(i, j));
  return worst;
}

RecoveryReport recovery_report(const ManifoldModel& model, const Points& x, const NeighborGraph& g,
                               const Points& y, double eta, std::optional<double> oracle_energy) {
  RecoveryReport out;
  out.eta = eta;
  out.r = g.r;
  if (model.has_isometry()) out.procrustes_error = solution_distance(y, model, x);
  if (oracle_energy) out.energy_gap = std::abs(energy(y) - *oracle_energy);
  const Eigen::MatrixXd geo = graph_geodesics(g);
  out.lipschitz_graph = empirical_lipschitz(y, geo);
  const Eigen::MatrixXd oracle = model.pairwise_intrinsic(x);
  out.lipschitz_oracle = empirical_lipschitz(y, oracle);
  out.interpolation_margin = interpolation_margin(y, oracle, eta, g.r);
  return out;
}

TailExperiment ustat_tail_experiment(const ManifoldModel& model, const PointMap& f, std::size_t n,
                                     const std::vector<double>& t_grid, int trials,
                                     std::uint64_t seed, std::size_t reference_m) {
  if (trials < 1000 || trials > 5000) throw ValidationError("ustat tail: trials must lie in [1000, 5000]");
  if (n < 2) throw ValidationError("ustat tail: n must be at least 2");
  if (reference_m < 10 * n) throw ValidationError("ustat tail: reference sample must be much larger than n");
  for (double t : t_grid) {
    if (!(t >= 0.0)) throw ValidationError("ustat tail: t values must be non-negative");
  }
  TailExperiment out;
  const ContinuumEnergy ref = continuum_energy_mc(model, f, reference_m, seed);
  out.reference_energy = ref.value;
  out.reference_se = ref.error_estimate;

  std::vector<double> deviation(static_cast<std::size_t>(trials));
  for (int k = 0; k < trials; ++k) {
    const std::uint64_t s = seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(k + 1);
    const PointCloud cloud = sample(model, n, s);
    deviation[static_cast<std::size_t>(k)] = std::abs(energy(f(cloud.points)) - ref.value);
  }
  const double diam = model.diameter();
  const double nd = static_cast<double>(n);
  for (double t : t_grid) {
    TailRow row;
    row.t = t;
    const auto hits = std::count_if(deviation.begin(), deviation.end(), [t](double d) { return d > t; });
    row.frequency = static_cast<double>(hits) / trials;
    row.bound = 2.0 * std::exp(-nd * t * t / (5.0 * std::pow(diam, 4) + 3.0 * diam * diam * t));
    row.se = std::sqrt(row.frequency * (1.0 - row.frequency) / trials);
    row.within = row.frequency <= row.bound + 3.0 * row.se;
    out.rows.push_back(row);
  }
  return out;
}

double flatness_report(const Points& y, int d) {
  if (d < 1) throw ValidationError("flatness_report: d must be positive");
  const Points c = y.rowwise() - y.colwise().mean();
  const auto eig = linalg::jacobi_eigen(Eigen::MatrixXd(c.transpose() * c));
  const Eigen::VectorXd v = eig.values.cwiseMax(0.0);
  const double total = v.sum();
  if (!(total > 0.0)) return 1.0;
  return v.head(std::min<Eigen::Index>(d, v.size())).sum() / total;
}

}  // namespace mvu
