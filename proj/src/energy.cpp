#include "mvu/energy.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "mvu/errors.hpp"
#include "mvu/numerics.hpp"

namespace mvu {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kHalfPi = std::numbers::pi / 2.0;
}  // namespace

double energy(const Points& y) {
  const Eigen::Index n = y.rows();
  if (n < 2) throw ValidationError("energy: need at least two points");
  const Eigen::RowVectorXd mean = y.colwise().mean();
  // Centering first keeps the subtraction in the identity well conditioned.
  const double spread = (y.rowwise() - mean).squaredNorm() / static_cast<double>(n);
  const double nd = static_cast<double>(n);
  return 2.0 * nd / (nd - 1.0) * spread;
}

double energy_double_sum(const Points& y) {
  const Eigen::Index n = y.rows();
  if (n < 2) throw ValidationError("energy: need at least two points");
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) total += (y.row(i) - y.row(j)).squaredNorm();
  const double nd = static_cast<double>(n);
  return total / (nd * (nd - 1.0));
}

std::string to_string(EnergyMethod m) {
  switch (m) {
    case EnergyMethod::ClosedForm: return "closed_form";
    case EnergyMethod::Quadrature: return "quadrature";
    case EnergyMethod::MonteCarlo: return "monte_carlo";
  }
  return "unknown";
}

ContinuumEnergy continuum_energy_mc(const ManifoldModel& model, const PointMap& f, std::size_t m,
                                    std::uint64_t seed, int bootstrap_replicates) {
  if (m < 100) throw ValidationError("continuum_energy_mc: m must be at least 100");
  const PointCloud cloud = sample(model, m, seed);
  const Points image = f(cloud.points);
  if (image.rows() != cloud.points.rows()) {
    throw ValidationError("continuum_energy_mc: map changed the number of points");
  }
  ContinuumEnergy out;
  out.method = EnergyMethod::MonteCarlo;
  out.value = energy(image);

  // Bootstrap over resampled indices; the generator is offset from the
  // sampling seed so the two streams do not coincide.
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_int_distribution<Eigen::Index> pick(0, image.rows() - 1);
  double sum = 0.0;
  double sum_sq = 0.0;
  Points resampled(image.rows(), image.cols());
  for (int b = 0; b < bootstrap_replicates; ++b) {
    for (Eigen::Index i = 0; i < image.rows(); ++i) resampled.row(i) = image.row(pick(rng));
    const double e = energy(resampled);
    sum += e;
    sum_sq += e * e;
  }
  if (bootstrap_replicates > 1) {
    const double reps = bootstrap_replicates;
    const double mean = sum / reps;
    out.error_estimate = std::sqrt(std::max(0.0, (sum_sq - reps * mean * mean) / (reps - 1.0)));
  }
  return out;
}

ContinuumEnergy convex_supremum(const ManifoldModel& model) {
  const auto& p = model.params();
  auto num = [&](const char* key) { return std::stod(p.at(key)); };
  ContinuumEnergy out;
  out.method = EnergyMethod::ClosedForm;
  const std::string& name = model.name();
  if (name == "interval" || name == "arc") {
    const double length = num("length");
    out.value = length * length / 6.0;
  } else if (name == "rectangle") {
    const double l = num("length");
    const double w = num("width");
    out.value = (l * l + w * w) / 6.0;
  } else if (name == "disk") {
    const double r = num("radius");
    out.value = r * r;
  } else if (name == "tube" && p.at("base") == "interval") {
    // Stadium: a length x 2s rectangle capped by two half disks of radius s.
    const double l = num("length");
    const double s = num("sigma");
    const double c = 0.5 * l;
    const double area = 2.0 * s * l + kPi * s * s;
    const double rect_xx = 2.0 * s * l * l * l / 12.0;
    const double rect_yy = l * std::pow(2.0 * s, 3) / 12.0;
    const double half_u = 2.0 * s * s * s / 3.0;      // int u dA over a half disk
    const double half_uu = kPi * std::pow(s, 4) / 8.0;  // int u^2 dA and int v^2 dA
    const double caps_xx = 2.0 * (c * c * kPi * s * s / 2.0 + 2.0 * c * half_u + half_uu);
    const double caps_yy = 2.0 * half_uu;
    out.value = 2.0 * (rect_xx + rect_yy + caps_xx + caps_yy) / area;
  } else {
    throw ValidationError("convex_supremum: model " + model.id() +
                          " is not isometric to a convex domain");
  }
  return out;
}

double ellipse_perimeter(double a, double b) {
  auto speed = [a, b](double t) {
    const double s = std::sin(t);
    const double c = std::cos(t);
    return std::sqrt(a * a * s * s + b * b * c * c);
  };
  return 4.0 * numerics::adaptive_simpson(speed, 0.0, kHalfPi, 1e-14).value;
}

double solve_b(double a) {
  if (!(a >= 1.0 && a < kHalfPi)) throw ValidationError("solve_b: a must lie in [1, pi/2)");
  if (a == 1.0) return 1.0;
  const double target = 2.0 * kPi;
  // Perimeter is increasing in b; b = 0 gives 4a < 2pi and b = 1 gives > 2pi.
  return numerics::bisect([&](double b) { return ellipse_perimeter(a, b) - target; }, 0.0, 1.0,
                          1e-16, 1e-12);
}

double ellipse_F(double a, double tol) {
  if (!(a >= 1.0 && a <= kHalfPi)) throw ValidationError("ellipse_F: a must lie in [1, pi/2]");
  const double b = a >= kHalfPi ? 0.0 : solve_b(a);
  auto integrand = [a, b](double t) {
    const double s = std::sin(t);
    const double c = std::cos(t);
    return (a * a * c * c + b * b * s * s) * std::sqrt(a * a * s * s + b * b * c * c);
  };
  // Symmetric in both axes; integrating over a quarter keeps the |sin t| kink
  // of the degenerate case at the panel ends.
  return 4.0 * numerics::adaptive_simpson(integrand, 0.0, kHalfPi, tol / 4.0).value;
}

AStarResult find_a_star(int grid_points, double margin, double a_tol) {
  if (grid_points < 3) throw ValidationError("find_a_star: need at least 3 grid points");
  AStarResult out;
  out.grid_points = grid_points;
  out.f_one = ellipse_F(1.0);
  out.f_half_pi = ellipse_F(kHalfPi);
  const double threshold = out.f_one - margin;

  // Grid over (1, pi/2): a_k = 1 + k h for k = 1..grid_points-1, h chosen so
  // that the last node sits just inside pi/2.
  const double h = (kHalfPi - 1.0) / grid_points;
  std::vector<double> grid;
  std::vector<double> values;
  for (int k = 1; k < grid_points; ++k) {
    grid.push_back(1.0 + k * h);
    values.push_back(ellipse_F(grid.back()));
  }
  out.strictly_decreasing = values.front() < out.f_one;
  for (std::size_t k = 1; k < values.size(); ++k)
    if (!(values[k] < values[k - 1])) out.strictly_decreasing = false;

  // Smallest grid index from which F stays below the threshold.
  std::size_t first = values.size();
  for (std::size_t k = values.size(); k-- > 0;) {
    if (values[k] < threshold) {
      first = k;
    } else {
      break;
    }
  }
  if (first == values.size()) throw NumericalFailure("find_a_star: F never drops below F(1)");
  const double lo = first == 0 ? 1.0 : grid[first - 1];
  const double hi = grid[first];
  out.a_star = numerics::bisect([&](double a) { return ellipse_F(a) - threshold; }, lo, hi, a_tol);
  return out;
}

double circle_energy_identity(double a) { return ellipse_F(a) / kPi; }

std::vector<OracleRow> ellipse_oracle_table(double a_lo, double a_hi, double step) {
  if (!(step > 0.0) || !(a_lo <= a_hi)) throw ValidationError("oracle table: bad grid");
  if (a_lo < 1.0 || a_hi > kHalfPi) throw ValidationError("oracle table: grid must lie in [1, pi/2]");
  std::vector<OracleRow> rows;
  const auto count = static_cast<long>(std::floor((a_hi - a_lo) / step + 1e-9)) + 1;
  for (long k = 0; k < count; ++k) {
    const double a = std::min(a_lo + static_cast<double>(k) * step, a_hi);
    const double b = a >= kHalfPi ? 0.0 : solve_b(a);
    const double f = ellipse_F(a);
    rows.push_back({a, b, f, f / kPi});
  }
  return rows;
}

}  // namespace mvu
