#include <algorithm>
#include <chrono>
#include <cmath>

#include "centroidal/qp_solver.hpp"

namespace centroidal {

namespace {

constexpr double kMinScaling = 1e-4;
constexpr double kMaxScaling = 1e4;
constexpr double kRhoMin = 1e-6;
constexpr double kRhoMax = 1e6;
constexpr double kRhoEqualityFactor = 1e3;
constexpr double kAdaptiveRhoTolerance = 5.0;

double infNorm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

double limitScaling(double v) {
  if (v < kMinScaling) return 1.0;
  return std::min(v, kMaxScaling);
}

void scaleSymmetric(SparseMatrix& M, const Eigen::VectorXd& left, const Eigen::VectorXd& right) {
  for (int c = 0; c < M.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(M, c); it; ++it) it.valueRef() *= left(it.row()) * right(c);
}

double seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

Eigen::VectorXd clampInf(const Eigen::VectorXd& v) {
  return v.cwiseMax(-kInfinity).cwiseMin(kInfinity);
}

}  // namespace

AdmmSolver::AdmmSolver(SparseQP qp, SolverSettings settings)
    : qp_(std::move(qp)), settings_(settings) {
  const auto start = std::chrono::steady_clock::now();
  settings_.validate();
  try {
    qp_.validate();
  } catch (const std::invalid_argument& e) {
    throw QpSetupError(e.what());
  }
  qp_.lo = clampInf(qp_.lo);
  qp_.hi = clampInf(qp_.hi);
  qp_.P.makeCompressed();
  qp_.A.makeCompressed();
  if (settings_.validate_psd) {
    const double lambda = minEigenvalueEstimate(qp_.P);
    if (lambda < -1e-8)
      throw QpSetupError("P is not positive semidefinite (eigenvalue " + std::to_string(lambda) + ")");
  }

  const int m = qp_.m();
  row_kind_.assign(static_cast<std::size_t>(m), RowKind::inequality);
  for (int i = 0; i < m; ++i) {
    if (isInfiniteBound(qp_.lo(i)) && isInfiniteBound(qp_.hi(i)))
      row_kind_[static_cast<std::size_t>(i)] = RowKind::free;
    else if (qp_.hi(i) - qp_.lo(i) < 1e-12 * (1.0 + std::abs(qp_.hi(i))))
      row_kind_[static_cast<std::size_t>(i)] = RowKind::equality;
  }
  rho_ = settings_.rho;
  computeScaling();
  scaleVectors();
  updateRhoVector();
  buildKkt();
  ldlt_.analyzePattern(kkt_);
  factorize();

  x_ = Eigen::VectorXd::Zero(qp_.n());
  z_ = Eigen::VectorXd::Zero(m);
  y_ = Eigen::VectorXd::Zero(m);
  setup_time_ = seconds(start);
}

void AdmmSolver::computeScaling() {
  const int n = qp_.n();
  const int m = qp_.m();
  D_ = Eigen::VectorXd::Ones(n);
  E_ = Eigen::VectorXd::Ones(m);
  c_ = 1.0;
  Ps_ = qp_.P;
  As_ = qp_.A;
  Eigen::VectorXd q = qp_.q;
  if (!settings_.scaled_termination || settings_.scaling_iterations <= 0) {
    qs_ = q;
    AsT_ = As_.transpose();
    return;
  }

  Eigen::VectorXd dt(n), et(m);
  for (int iter = 0; iter < settings_.scaling_iterations; ++iter) {
    dt.setZero();
    et.setZero();
    for (int c = 0; c < Ps_.outerSize(); ++c)
      for (SparseMatrix::InnerIterator it(Ps_, c); it; ++it)
        dt(c) = std::max(dt(c), std::abs(it.value()));
    for (int c = 0; c < As_.outerSize(); ++c)
      for (SparseMatrix::InnerIterator it(As_, c); it; ++it) {
        const double a = std::abs(it.value());
        dt(c) = std::max(dt(c), a);
        et(it.row()) = std::max(et(it.row()), a);
      }
    for (int j = 0; j < n; ++j) dt(j) = 1.0 / std::sqrt(limitScaling(dt(j)));
    for (int i = 0; i < m; ++i) et(i) = 1.0 / std::sqrt(limitScaling(et(i)));

    scaleSymmetric(Ps_, dt, dt);
    scaleSymmetric(As_, et, dt);
    q = q.cwiseProduct(dt);
    D_ = D_.cwiseProduct(dt);
    E_ = E_.cwiseProduct(et);

    // Cost scaling
    double mean_col = 0.0;
    if (n > 0) {
      Eigen::VectorXd colnorm = Eigen::VectorXd::Zero(n);
      for (int c = 0; c < Ps_.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(Ps_, c); it; ++it)
          colnorm(c) = std::max(colnorm(c), std::abs(it.value()));
      mean_col = colnorm.mean();
    }
    const double ct = 1.0 / limitScaling(std::max(mean_col, infNorm(q)));
    Ps_ *= ct;
    q *= ct;
    c_ *= ct;
  }
  qs_ = q;
  AsT_ = As_.transpose();
}

void AdmmSolver::scaleVectors() {
  qs_ = c_ * D_.cwiseProduct(qp_.q);
  los_ = qp_.lo;
  his_ = qp_.hi;
  for (int i = 0; i < qp_.m(); ++i) {
    if (!isInfiniteBound(los_(i))) los_(i) *= E_(i);
    if (!isInfiniteBound(his_(i))) his_(i) *= E_(i);
  }
}

void AdmmSolver::updateRhoVector() {
  const int m = qp_.m();
  rho_vec_.resize(m);
  for (int i = 0; i < m; ++i) {
    switch (row_kind_[static_cast<std::size_t>(i)]) {
      case RowKind::free: rho_vec_(i) = kRhoMin; break;
      case RowKind::equality: rho_vec_(i) = kRhoEqualityFactor * rho_; break;
      case RowKind::inequality: rho_vec_(i) = rho_; break;
    }
  }
}

void AdmmSolver::buildKkt() {
  const int n = qp_.n();
  const int m = qp_.m();
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(Ps_.nonZeros() + As_.nonZeros() + n + m));
  for (int c = 0; c < Ps_.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(Ps_, c); it; ++it)
      if (it.row() <= c) trips.emplace_back(it.row(), c, it.value());
  for (int j = 0; j < n; ++j) trips.emplace_back(j, j, settings_.sigma);
  for (int c = 0; c < As_.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(As_, c); it; ++it)
      trips.emplace_back(c, n + it.row(), it.value());
  for (int i = 0; i < m; ++i) trips.emplace_back(n + i, n + i, -1.0 / rho_vec_(i));
  kkt_.resize(n + m, n + m);
  kkt_.setFromTriplets(trips.begin(), trips.end());
}

void AdmmSolver::factorize() {
  ldlt_.factorize(kkt_);
  if (ldlt_.info() != Eigen::Success) throw QpSetupError("KKT factorization failed");
  ++numeric_factorizations_;
}

void AdmmSolver::update(const QpValueUpdate& upd) {
  const int n = qp_.n();
  const int m = qp_.m();
  if (upd.q && upd.q->size() != n) throw QpSetupError("update: q has wrong size");
  if (upd.lo && upd.lo->size() != m) throw QpSetupError("update: lo has wrong size");
  if (upd.hi && upd.hi->size() != m) throw QpSetupError("update: hi has wrong size");
  if (upd.P && !samePattern(*upd.P, qp_.P)) throw QpSetupError("update: P pattern mismatch");
  if (upd.A && !samePattern(*upd.A, qp_.A)) throw QpSetupError("update: A pattern mismatch");

  // Keep the iterates meaningful across a change of scaling.
  const Eigen::VectorXd x_unscaled = D_.cwiseProduct(x_);
  const Eigen::VectorXd y_unscaled = E_.cwiseProduct(y_) / c_;
  const Eigen::VectorXd z_unscaled = z_.cwiseQuotient(E_);

  if (upd.q) qp_.q = *upd.q;
  if (upd.lo) qp_.lo = clampInf(*upd.lo);
  if (upd.hi) qp_.hi = clampInf(*upd.hi);
  if (upd.P) {
    qp_.P = *upd.P;
    qp_.P.makeCompressed();
  }
  if (upd.A) {
    qp_.A = *upd.A;
    qp_.A.makeCompressed();
  }
  try {
    qp_.validate();
  } catch (const std::invalid_argument& e) {
    throw QpSetupError(std::string("update: ") + e.what());
  }
  for (int i = 0; i < m; ++i) {
    RowKind kind = RowKind::inequality;
    if (isInfiniteBound(qp_.lo(i)) && isInfiniteBound(qp_.hi(i)))
      kind = RowKind::free;
    else if (qp_.hi(i) - qp_.lo(i) < 1e-12 * (1.0 + std::abs(qp_.hi(i))))
      kind = RowKind::equality;
    if (kind != row_kind_[static_cast<std::size_t>(i)]) {
      row_kind_[static_cast<std::size_t>(i)] = kind;
    }
  }

  const bool matrices_changed = upd.P.has_value() || upd.A.has_value();
  if (matrices_changed) {
    if (settings_.validate_psd && minEigenvalueEstimate(qp_.P) < -1e-8)
      throw QpSetupError("update: P is not positive semidefinite");
    computeScaling();
  }
  scaleVectors();
  const Eigen::VectorXd old_rho = rho_vec_;
  updateRhoVector();
  if (matrices_changed || old_rho != rho_vec_) {
    buildKkt();
    factorize();
    ++update_refactorizations_;
  }
  x_ = x_unscaled.cwiseQuotient(D_);
  y_ = c_ * y_unscaled.cwiseQuotient(E_);
  z_ = z_unscaled.cwiseProduct(E_);
}

QpSolution AdmmSolver::solve(const std::optional<WarmStart>& warm) {
  const auto start = std::chrono::steady_clock::now();
  const int n = qp_.n();
  const int m = qp_.m();
  const SolverSettings& s = settings_;

  if (warm) {
    if (warm->x.size() != n || warm->y.size() != m)
      throw std::invalid_argument("warm start has wrong dimensions");
    x_ = warm->x.cwiseQuotient(D_);
    y_ = c_ * warm->y.cwiseQuotient(E_);
    z_ = (As_ * x_).cwiseMax(los_).cwiseMin(his_);
  } else {
    x_.setZero(n);
    y_.setZero(m);
    z_.setZero(m);
  }

  Eigen::VectorXd rhs(n + m), sol(n + m);
  Eigen::VectorXd x_prev(n), y_prev(m), z_tilde(m), z_relax(m);
  Eigen::VectorXd Ax(m), Px(n), ATy(n);
  const Eigen::VectorXd Dinv = D_.cwiseInverse();
  const Eigen::VectorXd Einv = E_.cwiseInverse();

  QpSolution out;
  out.status = QpStatus::max_iter;
  int iter = 0;
  double prim = 0.0, dual = 0.0;

  for (iter = 1; iter <= s.max_iterations; ++iter) {
    x_prev = x_;
    y_prev = y_;
    rhs.head(n) = s.sigma * x_ - qs_;
    rhs.tail(m) = z_ - y_.cwiseQuotient(rho_vec_);
    sol = ldlt_.solve(rhs);
    // sol.head(n) is x~, sol.tail(m) is nu.
    z_tilde = z_ + (sol.tail(m) - y_).cwiseQuotient(rho_vec_);
    x_ = s.relaxation * sol.head(n) + (1.0 - s.relaxation) * x_prev;
    z_relax = s.relaxation * z_tilde + (1.0 - s.relaxation) * z_;
    z_ = (z_relax + y_.cwiseQuotient(rho_vec_)).cwiseMax(los_).cwiseMin(his_);
    y_ = y_ + rho_vec_.cwiseProduct(z_relax - z_);

    const bool check = (iter % s.check_termination_every == 0) || iter == s.max_iterations;
    if (!check) continue;

    Ax = As_ * x_;
    Px = Ps_ * x_;
    ATy = AsT_ * y_;
    double norm_ax, norm_z, norm_px, norm_aty, norm_q;
    if (s.scaled_termination) {
      prim = infNorm(Ax - z_);
      dual = infNorm(Px + qs_ + ATy);
      norm_ax = infNorm(Ax);
      norm_z = infNorm(z_);
      norm_px = infNorm(Px);
      norm_aty = infNorm(ATy);
      norm_q = infNorm(qs_);
    } else {
      prim = infNorm(Einv.cwiseProduct(Ax - z_));
      dual = infNorm(Dinv.cwiseProduct(Px + qs_ + ATy)) / c_;
      norm_ax = infNorm(Einv.cwiseProduct(Ax));
      norm_z = infNorm(Einv.cwiseProduct(z_));
      norm_px = infNorm(Dinv.cwiseProduct(Px)) / c_;
      norm_aty = infNorm(Dinv.cwiseProduct(ATy)) / c_;
      norm_q = infNorm(Dinv.cwiseProduct(qs_)) / c_;
    }
    const double eps_prim = s.eps_abs + s.eps_rel * std::max(norm_ax, norm_z);
    const double eps_dual = s.eps_abs + s.eps_rel * std::max({norm_px, norm_aty, norm_q});
    if (prim <= eps_prim && dual <= eps_dual) {
      out.status = QpStatus::solved;
      break;
    }

    // Primal infeasibility certificate from the dual increment, projected
    // onto the recession cone of the bounds.
    if (m > 0) {
      Eigen::VectorXd dy = E_.cwiseProduct(y_ - y_prev);
      for (int i = 0; i < m; ++i) {
        if (isInfiniteBound(qp_.hi(i))) dy(i) = std::min(dy(i), 0.0);
        if (isInfiniteBound(qp_.lo(i))) dy(i) = std::max(dy(i), 0.0);
      }
      const double ndy = infNorm(dy);
      if (ndy > 1e-30) {
        const double aty = infNorm(Dinv.cwiseProduct(AsT_ * Einv.cwiseProduct(dy)));
        double support = 0.0;
        for (int i = 0; i < m; ++i) {
          if (dy(i) > 0.0) support += qp_.hi(i) * dy(i);
          if (dy(i) < 0.0) support += qp_.lo(i) * dy(i);
        }
        if (aty <= s.eps_prim_inf * ndy && support < -s.eps_prim_inf * ndy) {
          out.status = QpStatus::primal_infeasible;
          break;
        }
      }
    }
    // Dual infeasibility certificate from the primal increment.
    {
      const Eigen::VectorXd dx_s = x_ - x_prev;
      const Eigen::VectorXd dx = D_.cwiseProduct(dx_s);
      const double ndx = infNorm(dx);
      if (ndx > 1e-30) {
        const double tol = s.eps_dual_inf * ndx;
        const bool flat = infNorm(Dinv.cwiseProduct(Ps_ * dx_s)) / c_ <= tol;
        const bool descent = qs_.dot(dx_s) / c_ < -tol;
        bool recession = true;
        const Eigen::VectorXd adx = Einv.cwiseProduct(As_ * dx_s);
        for (int i = 0; i < m && recession; ++i) {
          const bool lo_inf = isInfiniteBound(qp_.lo(i));
          const bool hi_inf = isInfiniteBound(qp_.hi(i));
          if (!lo_inf && !hi_inf)
            recession = std::abs(adx(i)) <= tol;
          else if (!lo_inf)
            recession = adx(i) >= -tol;
          else if (!hi_inf)
            recession = adx(i) <= tol;
        }
        if (flat && descent && recession) {
          out.status = QpStatus::dual_infeasible;
          break;
        }
      }
    }

    if (s.adaptive_penalty && m > 0) {
      const double prim_rel = prim / std::max(std::max(norm_ax, norm_z), 1e-30);
      const double dual_rel = dual / std::max(std::max({norm_px, norm_aty, norm_q}), 1e-30);
      double rho_new = rho_ * std::sqrt(prim_rel / std::max(dual_rel, 1e-30));
      rho_new = std::clamp(rho_new, kRhoMin, kRhoMax);
      if (rho_new > kAdaptiveRhoTolerance * rho_ || rho_new < rho_ / kAdaptiveRhoTolerance) {
        rho_ = rho_new;
        updateRhoVector();
        buildKkt();
        factorize();
      }
    }
  }
  out.iterations = std::min(iter, s.max_iterations);

  if (out.status == QpStatus::solved || out.status == QpStatus::max_iter) {
    Eigen::VectorXd x = D_.cwiseProduct(x_);
    Eigen::VectorXd y = E_.cwiseProduct(y_) / c_;
    if (out.status == QpStatus::solved && s.polish) {
      Eigen::VectorXd xp = x_, yp = y_, zp = z_;
      if (polish(xp, yp, zp)) {
        const Eigen::VectorXd xu = D_.cwiseProduct(xp);
        const Eigen::VectorXd yu = E_.cwiseProduct(yp) / c_;
        const KktResiduals before = kktResiduals(qp_, x, y);
        const KktResiduals after = kktResiduals(qp_, xu, yu);
        const bool prim_ok = after.primal < before.primal || after.primal < 1e-10;
        const bool dual_ok = after.dual < before.dual || after.dual < 1e-10;
        const bool comp_ok = after.complementarity <=
                             std::max(before.complementarity, s.eps_abs);
        if (prim_ok && dual_ok && comp_ok) {
          x_ = xp;
          y_ = yp;
          z_ = zp;
          x = xu;
          y = yu;
          out.polished = true;
        }
      }
    }
    out.x = x;
    out.y = y;
    const KktResiduals res = kktResiduals(qp_, x, y);
    out.primal_residual = res.primal;
    out.dual_residual = res.dual;
    out.objective = qp_.objective(x);
  } else {
    // Certificates are returned in place of a solution.
    out.x = D_.cwiseProduct(x_);
    out.y = E_.cwiseProduct(y_) / c_;
    out.objective = out.status == QpStatus::primal_infeasible
                        ? std::numeric_limits<double>::infinity()
                        : -std::numeric_limits<double>::infinity();
  }
  out.solve_time = seconds(start);
  return out;
}

bool AdmmSolver::polish(Eigen::VectorXd& x, Eigen::VectorXd& y, Eigen::VectorXd& z) const {
  const int n = qp_.n();
  const int m = qp_.m();
  const Eigen::VectorXd& los = los_;
  const Eigen::VectorXd& his = his_;

  // Active set guess from the ADMM iterate.
  std::vector<int> rows;
  std::vector<double> bound;
  std::vector<int> side;  // -1 lower, +1 upper, 0 equality
  for (int i = 0; i < m; ++i) {
    const bool at_lower = z(i) - los(i) < -y(i);
    const bool at_upper = his(i) - z(i) < y(i);
    if (row_kind_[static_cast<std::size_t>(i)] == RowKind::equality) {
      rows.push_back(i);
      bound.push_back(los(i));
      side.push_back(0);
    } else if (at_lower && !isInfiniteBound(qp_.lo(i))) {
      rows.push_back(i);
      bound.push_back(los(i));
      side.push_back(-1);
    } else if (at_upper && !isInfiniteBound(qp_.hi(i))) {
      rows.push_back(i);
      bound.push_back(his(i));
      side.push_back(+1);
    }
  }
  const int ma = static_cast<int>(rows.size());
  std::vector<int> active_index(static_cast<std::size_t>(m), -1);
  for (int a = 0; a < ma; ++a) active_index[static_cast<std::size_t>(rows[a])] = a;

  const double delta = settings_.polish_delta;
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(Ps_.nonZeros() + As_.nonZeros() + n + ma));
  for (int c = 0; c < Ps_.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(Ps_, c); it; ++it)
      if (it.row() <= c) trips.emplace_back(it.row(), c, it.value());
  for (int j = 0; j < n; ++j) trips.emplace_back(j, j, delta);
  SparseMatrix Ared(ma, n);
  {
    std::vector<Triplet> at;
    for (int c = 0; c < As_.outerSize(); ++c)
      for (SparseMatrix::InnerIterator it(As_, c); it; ++it) {
        const int a = active_index[static_cast<std::size_t>(it.row())];
        if (a < 0) continue;
        trips.emplace_back(c, n + a, it.value());
        at.emplace_back(a, c, it.value());
      }
    Ared.setFromTriplets(at.begin(), at.end());
  }
  for (int a = 0; a < ma; ++a) trips.emplace_back(n + a, n + a, -delta);
  SparseMatrix K(n + ma, n + ma);
  K.setFromTriplets(trips.begin(), trips.end());

  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Upper> ldlt(K);
  if (ldlt.info() != Eigen::Success) return false;

  Eigen::VectorXd rhs(n + ma);
  rhs.head(n) = -qs_;
  for (int a = 0; a < ma; ++a) rhs(n + a) = bound[static_cast<std::size_t>(a)];
  Eigen::VectorXd sol = ldlt.solve(rhs);
  const SparseMatrix AredT = Ared.transpose();
  for (int it = 0; it < settings_.polish_refine_iterations; ++it) {
    // Residual against the unregularized reduced KKT system.
    Eigen::VectorXd res(n + ma);
    res.head(n) = rhs.head(n) - (Ps_ * sol.head(n) + AredT * sol.tail(ma));
    res.tail(ma) = rhs.tail(ma) - Ared * sol.head(n);
    sol += ldlt.solve(res);
  }
  if (!sol.allFinite()) return false;

  x = sol.head(n);
  y.setZero(m);
  for (int a = 0; a < ma; ++a) {
    double ya = sol(n + a);
    const int s = side[static_cast<std::size_t>(a)];
    // Reject guesses whose multipliers have the wrong sign beyond noise.
    if ((s < 0 && ya > 1e-9) || (s > 0 && ya < -1e-9)) return false;
    y(rows[static_cast<std::size_t>(a)]) = ya;
  }
  z = (As_ * x).cwiseMax(los).cwiseMin(his);
  return true;
}

SolverHandle setup(const SparseQP& qp, const SolverSettings& settings) {
  return std::make_unique<AdmmSolver>(qp, settings);
}

QpSolution solve(SolverHandle& handle, const std::optional<WarmStart>& warm) {
  return handle->solve(warm);
}

void updateValues(SolverHandle& handle, const QpValueUpdate& upd) { handle->update(upd); }

}  // namespace centroidal
