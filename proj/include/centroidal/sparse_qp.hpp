#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace centroidal {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Triplet = Eigen::Triplet<double, int>;

/// Bounds at or beyond this magnitude are treated as infinite.
inline constexpr double kInfinity = 1e30;

inline bool isInfiniteBound(double v) { return std::abs(v) >= 1e20; }

enum class Quantity { r, l, k, f, tau, z, p };

const char* quantityName(Quantity q);

struct ColumnRange {
  int offset = 0;
  int size = 0;
};

/// Maps (quantity, timestep, effector) to a contiguous column range. State
/// quantities use effector -1.
class VariableLayout {
 public:
  int add(Quantity q, int t, int effector, int size);
  ColumnRange at(Quantity q, int t, int effector = -1) const;
  bool contains(Quantity q, int t, int effector = -1) const;
  int size() const { return n_; }

  struct Entry {
    Quantity quantity;
    int t;
    int effector;
    ColumnRange range;
  };
  const std::vector<Entry>& entries() const { return entries_; }

  /// True when ranges are disjoint and cover [0, size()).
  bool isPartition() const;

 private:
  using Key = std::tuple<int, int, int>;
  std::map<Key, std::size_t> index_;
  std::vector<Entry> entries_;
  int n_ = 0;
};

/// min 1/2 x'Px + q'x  s.t.  lo <= Ax <= hi. P holds the full symmetric
/// matrix (both triangles).
struct SparseQP {
  SparseMatrix P;
  Eigen::VectorXd q;
  SparseMatrix A;
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
  VariableLayout layout;

  int n() const { return static_cast<int>(q.size()); }
  int m() const { return static_cast<int>(lo.size()); }

  /// Throws std::invalid_argument on dimension, symmetry or bound errors.
  void validate() const;
  double objective(const Eigen::VectorXd& x) const;
};

/// Lower bound on the smallest eigenvalue of a symmetric matrix. Exact for
/// diagonal matrices and for anything up to a few thousand columns.
double minEigenvalueEstimate(const SparseMatrix& P);

/// Hash of dimensions and nonzero positions of P and A, ignoring values.
std::uint64_t structuralHash(const SparseQP& qp);
bool samePattern(const SparseMatrix& a, const SparseMatrix& b);

struct SolverSettings {
  double eps_abs = 1e-7;
  double eps_rel = 1e-7;
  double eps_prim_inf = 1e-6;
  double eps_dual_inf = 1e-6;
  bool polish = true;
  bool scaled_termination = true;
  bool adaptive_penalty = true;
  int check_termination_every = 50;
  int max_iterations = 100000;

  double rho = 0.1;
  double sigma = 1e-6;
  double relaxation = 1.6;
  int scaling_iterations = 10;
  int polish_refine_iterations = 3;
  double polish_delta = 1e-6;
  /// Reject P with a negative eigenvalue at setup.
  bool validate_psd = false;

  void validate() const;
  bool operator==(const SolverSettings&) const = default;
};

enum class QpStatus { solved, max_iter, primal_infeasible, dual_infeasible };

const char* statusName(QpStatus s);

struct QpSolution {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  QpStatus status = QpStatus::max_iter;
  double objective = 0.0;
  int iterations = 0;
  double solve_time = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  bool polished = false;
};

struct KktResiduals {
  double primal = 0.0;         ///< ||Ax - clamp(Ax, lo, hi)||_inf
  double dual = 0.0;           ///< ||Px + q + A'y||_inf
  double complementarity = 0.0;  ///< max violation of the dual sign pattern
};

/// Unscaled KKT residuals of a primal/dual pair. The dual sign convention
/// is y_i < 0 at an active lower bound and y_i > 0 at an active upper bound.
KktResiduals kktResiduals(const SparseQP& qp, const Eigen::VectorXd& x, const Eigen::VectorXd& y);

}  // namespace centroidal
