#include "mvu/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "mvu/errors.hpp"

namespace mvu::linalg {
namespace {

std::vector<Eigen::Index> decreasing_order(const Eigen::VectorXd& v) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(v.size()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](Eigen::Index l, Eigen::Index r) { return v(l) > v(r); });
  return idx;
}

}  // namespace

SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& input, double tol,
                            int max_sweeps) {
  const Eigen::Index n = input.rows();
  if (input.cols() != n) {
    throw ValidationError("jacobi_eigen: matrix must be square");
  }
  Eigen::MatrixXd a = 0.5 * (input + input.transpose());
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double scale = std::max(a.norm(), 1e-300);

  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= tol * scale) break;

    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (!a.allFinite()) throw NumericalFailure("jacobi_eigen: non-finite entries");

  const Eigen::VectorXd diag = a.diagonal();
  const auto order = decreasing_order(diag);
  SymmetricEigen out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = diag(order[static_cast<std::size_t>(k)]);
    out.vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
  }
  out.sweeps = sweep;
  return out;
}

Svd jacobi_svd(const Eigen::MatrixXd& input, double tol, int max_sweeps) {
  const Eigen::Index n = input.cols();
  if (input.rows() != n) throw ValidationError("jacobi_svd: matrix must be square");
  Eigen::MatrixXd u = input;
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double alpha = u.col(p).squaredNorm();
        const double beta = u.col(q).squaredNorm();
        const double gamma = u.col(p).dot(u.col(q));
        if (std::abs(gamma) <= tol * std::sqrt(alpha * beta) ||
            std::abs(gamma) <= 1e-300) {
          continue;
        }
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double up = u(k, p);
          const double uq = u(k, q);
          u(k, p) = c * up - s * uq;
          u(k, q) = s * up + c * uq;
          const double vp = v(k, p);
          const double vq = v(k, q);
          v(k, p) = c * vp - s * vq;
          v(k, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }

  Eigen::VectorXd sigma(n);
  for (Eigen::Index k = 0; k < n; ++k) sigma(k) = u.col(k).norm();
  const auto order = decreasing_order(sigma);

  Svd out;
  out.u.resize(n, n);
  out.v.resize(n, n);
  out.singular.resize(n);
  const double smax = sigma.maxCoeff();
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    out.singular(k) = sigma(src);
    out.v.col(k) = v.col(src);
    if (sigma(src) > 1e-14 * std::max(smax, 1e-300)) {
      out.u.col(k) = u.col(src) / sigma(src);
    } else {
      out.u.col(k).setZero();
    }
  }
  // Complete U to an orthonormal basis where singular values vanished.
  for (Eigen::Index k = 0; k < n; ++k) {
    if (out.u.col(k).squaredNorm() > 0.5) continue;
    for (Eigen::Index e = 0; e < n; ++e) {
      Eigen::VectorXd cand = Eigen::VectorXd::Unit(n, e);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == k || out.u.col(j).squaredNorm() < 0.5) continue;
        cand -= out.u.col(j).dot(cand) * out.u.col(j);
      }
      if (cand.norm() > 1e-6) {
        out.u.col(k) = cand.normalized();
        break;
      }
    }
  }
  return out;
}

}  // namespace mvu::linalg
