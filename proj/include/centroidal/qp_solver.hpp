#pragma once

#include <memory>
#include <optional>

#include <Eigen/Core>
#include <Eigen/SparseCholesky>

#include "centroidal/sparse_qp.hpp"

namespace centroidal {

struct WarmStart {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
};

/// Value-only update. Absent members keep their current values. New P/A
/// values must come with exactly the pattern the solver was set up with.
struct QpValueUpdate {
  std::optional<Eigen::VectorXd> q;
  std::optional<Eigen::VectorXd> lo;
  std::optional<Eigen::VectorXd> hi;
  std::optional<SparseMatrix> P;
  std::optional<SparseMatrix> A;
};

/// Thrown at setup when the problem cannot be factorized or fails
/// validation, and on pattern mismatches in updates.
class QpSetupError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Common interface of QP backends. A backend instance owns one problem
/// (sparsity pattern fixed at construction) and is not thread-safe.
class QpBackend {
 public:
  virtual ~QpBackend() = default;
  virtual QpSolution solve(const std::optional<WarmStart>& warm = std::nullopt) = 0;
  virtual void update(const QpValueUpdate& upd) = 0;
  virtual const SparseQP& problem() const = 0;
  virtual void setMaxIterations(int iters) = 0;
  virtual int maxIterations() const = 0;
};

/// Operator-splitting QP solver (ADMM on the quasi-definite KKT system) with
/// Ruiz equilibration, adaptive penalty and solution polishing. The KKT
/// sparsity pattern is analyzed once at construction; numeric factorizations
/// are reused until P, A or the penalty change.
class AdmmSolver final : public QpBackend {
 public:
  AdmmSolver(SparseQP qp, SolverSettings settings);

  QpSolution solve(const std::optional<WarmStart>& warm = std::nullopt) override;
  void update(const QpValueUpdate& upd) override;
  const SparseQP& problem() const override { return qp_; }
  void setMaxIterations(int iters) override { settings_.max_iterations = iters; }
  int maxIterations() const override { return settings_.max_iterations; }

  const SolverSettings& settings() const { return settings_; }
  /// Numeric KKT factorizations so far, including penalty updates.
  int numericFactorizations() const { return numeric_factorizations_; }
  /// Factorizations triggered by update() (P or A value changes).
  int updateRefactorizations() const { return update_refactorizations_; }
  double setupTime() const { return setup_time_; }

 private:
  void computeScaling();
  void scaleVectors();
  void buildKkt();
  void factorize();
  void updateRhoVector();
  bool polish(Eigen::VectorXd& x, Eigen::VectorXd& y, Eigen::VectorXd& z) const;

  SparseQP qp_;
  SolverSettings settings_;

  // Scaled problem data: Ps = c D P D, qs = c D q, As = E A D, bounds E lo/hi.
  Eigen::VectorXd D_, E_;
  double c_ = 1.0;
  SparseMatrix Ps_, As_, AsT_;
  Eigen::VectorXd qs_, los_, his_;

  enum class RowKind { inequality, equality, free };
  std::vector<RowKind> row_kind_;
  double rho_ = 0.1;
  Eigen::VectorXd rho_vec_;

  SparseMatrix kkt_;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Upper> ldlt_;

  // ADMM iterates in scaled space, kept between solves.
  Eigen::VectorXd x_, z_, y_;

  int numeric_factorizations_ = 0;
  int update_refactorizations_ = 0;
  double setup_time_ = 0.0;
};

/// Free-function surface over AdmmSolver.
using SolverHandle = std::unique_ptr<AdmmSolver>;
SolverHandle setup(const SparseQP& qp, const SolverSettings& settings);
QpSolution solve(SolverHandle& handle, const std::optional<WarmStart>& warm = std::nullopt);
void updateValues(SolverHandle& handle, const QpValueUpdate& upd);

}  // namespace centroidal
