#pragma once

#include <random>

#include "centroidal/sparse_qp.hpp"

namespace centroidal::testing {

/// Random strictly convex, feasible QP with a mix of equality, two-sided,
/// one-sided and free rows.
inline SparseQP randomQp(std::mt19937& rng, int n, int m, double density = 0.5) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = uni(rng) < density ? gauss(rng) : 0.0;
  Eigen::MatrixXd P = M.transpose() * M + 0.1 * Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd A(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) A(i, j) = uni(rng) < density ? gauss(rng) : 0.0;
    if (A.row(i).norm() == 0.0) A(i, i % n) = 1.0;
  }
  Eigen::VectorXd x0(n), q(n);
  for (int j = 0; j < n; ++j) {
    x0(j) = gauss(rng);
    q(j) = 3.0 * gauss(rng);
  }
  const Eigen::VectorXd Ax0 = A * x0;
  Eigen::VectorXd lo(m), hi(m);
  int n_eq = 0;
  for (int i = 0; i < m; ++i) {
    const double kind = uni(rng);
    if (kind < 0.15 && n_eq < n / 2) {
      lo(i) = hi(i) = Ax0(i);
      ++n_eq;
    } else if (kind < 0.55) {
      lo(i) = Ax0(i) - uni(rng);
      hi(i) = Ax0(i) + uni(rng);
    } else if (kind < 0.75) {
      lo(i) = -kInfinity;
      hi(i) = Ax0(i) + uni(rng);
    } else if (kind < 0.95) {
      lo(i) = Ax0(i) - uni(rng);
      hi(i) = kInfinity;
    } else {
      lo(i) = -kInfinity;
      hi(i) = kInfinity;
    }
  }
  SparseQP qp;
  qp.P = P.sparseView();
  qp.A = A.sparseView();
  qp.q = q;
  qp.lo = lo;
  qp.hi = hi;
  qp.layout.add(Quantity::r, 0, -1, n);
  return qp;
}

}  // namespace centroidal::testing
