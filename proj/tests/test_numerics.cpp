#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mvu/errors.hpp"
#include "mvu/linalg.hpp"
#include "mvu/numerics.hpp"

using namespace mvu;

TEST_CASE("adaptive simpson integrates smooth and kinked integrands") {
  const auto q = numerics::adaptive_simpson([](double x) { return std::sin(x); }, 0.0, std::numbers::pi, 1e-12);
  CHECK(q.value == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(q.error <= 1e-10);
  const auto k = numerics::adaptive_simpson([](double x) { return std::abs(x - 0.3); }, 0.0, 1.0, 1e-12);
  CHECK(std::abs(k.value - (0.045 + 0.245)) < 1e-10);
  const auto poly = numerics::adaptive_simpson([](double x) { return x * x * x; }, -1.0, 2.0, 1e-14);
  CHECK(std::abs(poly.value - 3.75) < 1e-13);
}

TEST_CASE("bisection finds roots and rejects bad brackets") {
  const double root = numerics::bisect([](double x) { return x * x - 2.0; }, 0.0, 2.0, 1e-14);
  CHECK(std::abs(root - std::sqrt(2.0)) < 1e-13);
  CHECK_THROWS_AS(numerics::bisect([](double x) { return x * x + 1.0; }, -1.0, 1.0, 1e-12), NumericalFailure);
}

TEST_CASE("jacobi eigen recovers a planted spectrum") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) m(i, j) = g(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  const Eigen::MatrixXd q = qr.householderQ();
  Eigen::VectorXd lam(6);
  lam << 5, 4, 3, 1, 0.5, -2;
  const Eigen::MatrixXd a = q * lam.asDiagonal() * q.transpose();
  const auto eig = linalg::jacobi_eigen(a);
  for (int k = 0; k < 6; ++k) CHECK(std::abs(eig.values(k) - lam(k)) < 1e-12);
  const Eigen::MatrixXd back = eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose();
  CHECK((back - a).norm() < 1e-12);
  CHECK((eig.vectors.transpose() * eig.vectors - Eigen::MatrixXd::Identity(6, 6)).norm() < 1e-12);
}

TEST_CASE("jacobi svd factors square matrices, including rank deficient ones") {
  Eigen::MatrixXd a(3, 3);
  a << 1, 2, 3, 4, 5, 6, 7, 8, 10;
  auto s = linalg::jacobi_svd(a);
  CHECK((s.u * s.singular.asDiagonal() * s.v.transpose() - a).norm() < 1e-12);
  CHECK(s.singular(0) >= s.singular(1));
  CHECK(s.singular(1) >= s.singular(2));

  Eigen::MatrixXd r(3, 3);
  r << 1, 2, 0, 2, 4, 0, 0, 0, 0;
  s = linalg::jacobi_svd(r);
  CHECK((s.u * s.singular.asDiagonal() * s.v.transpose() - r).norm() < 1e-12);
  CHECK((s.u.transpose() * s.u - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-12);
  CHECK(std::abs(s.singular(1)) < 1e-12);
}
