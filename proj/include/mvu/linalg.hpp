#pragma once

#include <Eigen/Dense>

namespace mvu::linalg {

struct SymmetricEigen {
  Eigen::VectorXd values;   // sorted in decreasing order
  Eigen::MatrixXd vectors;  // column k pairs with values(k)
  int sweeps = 0;
};

/// Cyclic Jacobi eigensolver for a real symmetric matrix.
SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& a, double tol = 1e-15,
                            int max_sweeps = 100);

struct Svd {
  Eigen::MatrixXd u;
  Eigen::VectorXd singular;  // decreasing, non-negative
  Eigen::MatrixXd v;         // a = u * diag(singular) * v^T
};

/// One-sided (Hestenes) Jacobi SVD of a square matrix. Intended for the small
/// d x d cross-covariances of Procrustes problems.
Svd jacobi_svd(const Eigen::MatrixXd& a, double tol = 1e-15,
               int max_sweeps = 100);

}  // namespace mvu::linalg
