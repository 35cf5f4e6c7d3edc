#pragma once

#include <vector>

#include "centroidal/sparse_qp.hpp"

namespace centroidal::detail {

/// Accumulates constraint rows and a diagonal cost while a QP is assembled.
/// Entries are kept even when their value is zero so that the sparsity
/// pattern depends only on the plan.
class QpAssembler {
 public:
  int addRow(double lo, double hi) {
    lo_.push_back(lo);
    hi_.push_back(hi);
    return rows_++;
  }
  void coeff(int row, int col, double v) { a_.emplace_back(row, col, v); }
  int rows() const { return rows_; }

  void setVariableCount(int n) {
    p_diag_.assign(static_cast<std::size_t>(n), 0.0);
    q_.assign(static_cast<std::size_t>(n), 0.0);
  }
  void addDiag(int col, double v) { p_diag_[static_cast<std::size_t>(col)] += v; }
  void addLinear(int col, double v) { q_[static_cast<std::size_t>(col)] += v; }

  /// Adds w * (x - target)^2 on a single column, split into P and q.
  void addSquare(int col, double w, double target) {
    addDiag(col, 2.0 * w);
    addLinear(col, -2.0 * w * target);
  }

  SparseQP finish(VariableLayout layout) const {
    const int n = layout.size();
    SparseQP qp;
    std::vector<Triplet> pt;
    pt.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) pt.emplace_back(j, j, p_diag_[static_cast<std::size_t>(j)]);
    qp.P.resize(n, n);
    qp.P.setFromTriplets(pt.begin(), pt.end());
    qp.q = Eigen::Map<const Eigen::VectorXd>(q_.data(), n);
    qp.A.resize(rows_, n);
    qp.A.setFromTriplets(a_.begin(), a_.end());
    qp.A.makeCompressed();
    qp.lo = Eigen::Map<const Eigen::VectorXd>(lo_.data(), rows_);
    qp.hi = Eigen::Map<const Eigen::VectorXd>(hi_.data(), rows_);
    qp.layout = std::move(layout);
    return qp;
  }

 private:
  int rows_ = 0;
  std::vector<double> lo_, hi_;
  std::vector<Triplet> a_;
  std::vector<double> p_diag_, q_;
};

}  // namespace centroidal::detail
