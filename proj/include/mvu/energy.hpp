#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mvu/manifolds.hpp"

namespace mvu {

/// Energy of a configuration: 1/(n(n-1)) sum_{i != j} ||y_i - y_j||^2,
/// evaluated through the variance identity
/// (2n/(n-1)) [mean ||y_i||^2 - ||mean y_i||^2] in O(np).
double energy(const Points& y);

/// The same quantity by the O(n^2 p) double sum.
double energy_double_sum(const Points& y);

enum class EnergyMethod { ClosedForm, Quadrature, MonteCarlo };
std::string to_string(EnergyMethod m);

struct ContinuumEnergy {
  double value = 0.0;
  EnergyMethod method = EnergyMethod::ClosedForm;
  double error_estimate = 0.0;  // absolute bound, or standard error for Monte Carlo
};

using PointMap = std::function<Points(const Points&)>;

/// Monte Carlo estimate of the continuum energy of f under the uniform law on
/// the model, with a 200-replicate bootstrap standard error.
ContinuumEnergy continuum_energy_mc(const ManifoldModel& model, const PointMap& f,
                                    std::size_t m, std::uint64_t seed,
                                    int bootstrap_replicates = 200);

/// sup of the continuum energy over 1-Lipschitz maps for models isometric to a
/// convex domain: twice the trace of the covariance of the uniform law on D.
ContinuumEnergy convex_supremum(const ManifoldModel& model);

/// Perimeter of the ellipse with semi-axes (a, b).
double ellipse_perimeter(double a, double b);

/// Semi-minor axis b(a) of the perimeter-2*pi ellipse with semi-major axis a.
/// Requires 1 <= a < pi/2.
double solve_b(double a);

/// Second moment of K_a under arc length:
/// int_0^{2pi} (a^2 cos^2 t + b^2 sin^2 t) sqrt(a^2 sin^2 t + b^2 cos^2 t) dt.
/// Accepts a = pi/2 (the doubled segment, b = 0).
double ellipse_F(double a, double tol = 1e-12);

struct AStarResult {
  double a_star = 1.0;
  bool strictly_decreasing = false;  // F decreasing on the scan grid
  double f_one = 0.0;
  double f_half_pi = 0.0;
  int grid_points = 0;
};

/// Threshold a* above which F(a) < F(1) - 1e-9, found by a grid scan followed
/// by bisection to 1e-6 in a.
AStarResult find_a_star(int grid_points = 500, double margin = 1e-9,
                        double a_tol = 1e-6);

/// Continuum energy F(a)/pi of the identity on K_a under normalized arc length.
double circle_energy_identity(double a = 1.0);

struct OracleRow {
  double a, b, F, E0;
};
std::vector<OracleRow> ellipse_oracle_table(double a_lo, double a_hi, double step);

}  // namespace mvu
