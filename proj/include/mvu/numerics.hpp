#pragma once

#include <functional>

namespace mvu::numerics {

struct Quadrature {
  double value = 0.0;
  double error = 0.0;  // sum of Richardson error estimates over accepted panels
  int evaluations = 0;
};

/// Adaptive Simpson quadrature on [a, b] to absolute tolerance `tol`.
/// Panels are accepted when |S(left)+S(right)-S(whole)| <= 15*tol_local; the
/// accepted value carries the Richardson correction.
Quadrature adaptive_simpson(const std::function<double(double)>& f, double a,
                            double b, double tol, int max_depth = 50);

/// Bisection for a sign change of `f` on [lo, hi]. Stops once the bracket is
/// narrower than `x_tol` or |f| <= `f_tol`. Throws NumericalFailure when the
/// endpoints do not bracket a root.
double bisect(const std::function<double(double)>& f, double lo, double hi,
              double x_tol, double f_tol = 0.0, int max_iter = 400);

}  // namespace mvu::numerics
