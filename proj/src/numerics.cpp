#include "mvu/numerics.hpp"

#include <cmath>

#include "mvu/errors.hpp"

namespace mvu::numerics {
namespace {

struct Panel {
  double a, b, fa, fm, fb, whole;
};

double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

void recurse(const std::function<double(double)>& f, const Panel& p, double tol,
             int depth, Quadrature& out) {
  const double m = 0.5 * (p.a + p.b);
  const double lm = 0.5 * (p.a + m);
  const double rm = 0.5 * (m + p.b);
  const double flm = f(lm);
  const double frm = f(rm);
  out.evaluations += 2;
  const double left = simpson(p.a, m, p.fa, flm, p.fm);
  const double right = simpson(m, p.b, p.fm, frm, p.fb);
  const double delta = left + right - p.whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    out.value += left + right + delta / 15.0;
    out.error += std::abs(delta) / 15.0;
    return;
  }
  recurse(f, {p.a, m, p.fa, flm, p.fm, left}, 0.5 * tol, depth - 1, out);
  recurse(f, {m, p.b, p.fm, frm, p.fb, right}, 0.5 * tol, depth - 1, out);
}

}  // namespace

Quadrature adaptive_simpson(const std::function<double(double)>& f, double a,
                            double b, double tol, int max_depth) {
  Quadrature out;
  if (a == b) return out;
  const double fa = f(a);
  const double fb = f(b);
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  out.evaluations = 3;
  // Forcing one split up front avoids accepting a panel whose three nodes
  // happen to miss a feature of the integrand.
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  out.evaluations += 2;
  recurse(f, {a, m, fa, flm, fm, simpson(a, m, fa, flm, fm)}, 0.5 * tol,
          max_depth, out);
  recurse(f, {m, b, fm, frm, fb, simpson(m, b, fm, frm, fb)}, 0.5 * tol,
          max_depth, out);
  if (!std::isfinite(out.value)) {
    throw NumericalFailure("adaptive_simpson: non-finite integral");
  }
  return out;
}

double bisect(const std::function<double(double)>& f, double lo, double hi,
              double x_tol, double f_tol, int max_iter) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) {
    throw NumericalFailure("bisect: endpoints do not bracket a root");
  }
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < max_iter; ++it) {
    mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (std::abs(fm) <= f_tol || 0.5 * (hi - lo) < x_tol) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
    if (mid == lo && mid == hi) break;
  }
  return mid;
}

}  // namespace mvu::numerics
