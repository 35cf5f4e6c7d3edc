#pragma once
// Dense reference QP solvers used as test oracles. Independent of the ADMM
// path: no splitting, no sparse factorization, no scaling.

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "centroidal/sparse_qp.hpp"

namespace centroidal::oracle {

struct DenseQp {
  Eigen::MatrixXd P;
  Eigen::VectorXd q;
  Eigen::MatrixXd A;
  Eigen::VectorXd lo, hi;

  static DenseQp from(const SparseQP& qp) {
    return {Eigen::MatrixXd(qp.P), qp.q, Eigen::MatrixXd(qp.A), qp.lo, qp.hi};
  }
};

struct DenseResult {
  bool feasible = false;
  Eigen::VectorXd x;
  Eigen::VectorXd y;  // sign convention: y < 0 at lower, y > 0 at upper
  double objective = std::numeric_limits<double>::infinity();
};

/// Solves min 1/2 x'Px + q'x s.t. A_eq x = b_eq by one dense KKT solve.
inline Eigen::VectorXd solveEqualityKkt(const Eigen::MatrixXd& P, const Eigen::VectorXd& q,
                                        const Eigen::MatrixXd& Aeq, const Eigen::VectorXd& beq,
                                        Eigen::VectorXd* multipliers = nullptr) {
  const auto n = P.rows();
  const auto m = Aeq.rows();
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + m, n + m);
  K.topLeftCorner(n, n) = P;
  K.topRightCorner(n, m) = Aeq.transpose();
  K.bottomLeftCorner(m, n) = Aeq;
  Eigen::VectorXd rhs(n + m);
  rhs << -q, beq;
  Eigen::VectorXd sol = K.fullPivLu().solve(rhs);
  if (multipliers) *multipliers = sol.tail(m);
  return sol.head(n);
}

/// Exhaustive active-set enumeration for strictly convex QPs with few
/// inequality rows. Each inequality row is free, at its lower or at its
/// upper bound; every combination is solved as an equality-constrained KKT
/// system and the KKT-consistent one is returned.
inline DenseResult enumerateActiveSets(const DenseQp& qp, double tol = 1e-9) {
  const auto n = qp.P.rows();
  const auto m = qp.A.rows();
  std::vector<int> eq, ineq;
  for (int i = 0; i < m; ++i) (qp.hi(i) - qp.lo(i) < 1e-14 ? eq : ineq).push_back(i);
  const auto k = ineq.size();
  std::size_t combos = 1;
  for (std::size_t i = 0; i < k; ++i) combos *= 3;

  DenseResult best;
  std::vector<int> state(k);
  for (std::size_t code = 0; code < combos; ++code) {
    std::size_t c = code;
    for (std::size_t i = 0; i < k; ++i) {
      state[i] = static_cast<int>(c % 3) - 1;  // -1 lower, 0 free, +1 upper
      c /= 3;
    }
    std::vector<int> rows(eq.begin(), eq.end());
    std::vector<double> rhs;
    for (int i : eq) rhs.push_back(qp.lo(i));
    bool skip = false;
    for (std::size_t i = 0; i < k; ++i) {
      const int r = ineq[i];
      if (state[i] == -1) {
        if (!std::isfinite(qp.lo(r)) || std::abs(qp.lo(r)) >= 1e20) { skip = true; break; }
        rows.push_back(r);
        rhs.push_back(qp.lo(r));
      } else if (state[i] == 1) {
        if (!std::isfinite(qp.hi(r)) || std::abs(qp.hi(r)) >= 1e20) { skip = true; break; }
        rows.push_back(r);
        rhs.push_back(qp.hi(r));
      }
    }
    if (skip || static_cast<Eigen::Index>(rows.size()) > n) continue;
    Eigen::MatrixXd Aeq(rows.size(), n);
    Eigen::VectorXd beq(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      Aeq.row(static_cast<Eigen::Index>(i)) = qp.A.row(rows[i]);
      beq(static_cast<Eigen::Index>(i)) = rhs[i];
    }
    Eigen::VectorXd mult;
    const Eigen::VectorXd x = solveEqualityKkt(qp.P, qp.q, Aeq, beq, &mult);
    if (!x.allFinite()) continue;
    const Eigen::VectorXd Ax = qp.A * x;
    bool ok = true;
    for (int i = 0; i < m && ok; ++i) ok = Ax(i) >= qp.lo(i) - tol && Ax(i) <= qp.hi(i) + tol;
    // Multiplier signs: the KKT solve returns y with P x + q + Aeq' y = 0.
    for (std::size_t i = eq.size(); i < rows.size() && ok; ++i) {
      const int r = rows[i];
      const double y = mult(static_cast<Eigen::Index>(i));
      const bool lower = std::abs(Ax(r) - qp.lo(r)) <= std::abs(Ax(r) - qp.hi(r));
      ok = lower ? y <= tol : y >= -tol;
    }
    if (!ok) continue;
    if (ok) {
      Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
      for (std::size_t i = 0; i < rows.size(); ++i) y(rows[i]) = mult(static_cast<Eigen::Index>(i));
      const double obj = 0.5 * x.dot(qp.P * x) + qp.q.dot(x);
      if (obj < best.objective) best = {true, x, y, obj};
    }
  }
  return best;
}

/// Goldfarb-Idnani dual active-set method for strictly convex QPs. Dense
/// and refactorized at each step; intended for problems up to a few hundred
/// variables.
inline DenseResult goldfarbIdnani(const DenseQp& qp, double tol = 1e-11) {
  const auto n = qp.P.rows();
  const auto m = qp.A.rows();

  // Constraints as c_j' x >= b_j. Equalities are never dropped.
  struct Con {
    Eigen::VectorXd normal;
    double b;
    int row;
    int sign;  // +1 lower bound of the row, -1 upper bound
    bool equality;
  };
  std::vector<Con> cons;
  for (int i = 0; i < m; ++i) {
    const Eigen::VectorXd a = qp.A.row(i).transpose();
    const bool lo_fin = std::abs(qp.lo(i)) < 1e20;
    const bool hi_fin = std::abs(qp.hi(i)) < 1e20;
    if (lo_fin && hi_fin && qp.hi(i) - qp.lo(i) < 1e-14) {
      cons.push_back({a, qp.lo(i), i, +1, true});
      continue;
    }
    if (lo_fin) cons.push_back({a, qp.lo(i), i, +1, false});
    if (hi_fin) cons.push_back({-a, -qp.hi(i), i, -1, false});
  }

  const Eigen::LLT<Eigen::MatrixXd> llt(qp.P);
  if (llt.info() != Eigen::Success) return {};
  const Eigen::MatrixXd J = llt.solve(Eigen::MatrixXd::Identity(n, n));

  Eigen::VectorXd x = -J * qp.q;
  std::vector<int> active;  // indices into cons
  std::vector<double> u;    // multipliers of active constraints
  std::vector<bool> is_active(cons.size(), false);

  double scale = 1.0;
  for (const auto& c : cons) scale = std::max(scale, std::abs(c.b));

  auto slack = [&](std::size_t j) { return cons[j].normal.dot(x) - cons[j].b; };

  for (int outer = 0; outer < 100000; ++outer) {
    // Pick the most violated constraint, equalities first.
    int p = -1;
    double worst = 0.0;
    for (std::size_t j = 0; j < cons.size(); ++j) {
      if (is_active[j]) continue;
      double s = slack(j);
      if (cons[j].equality) {
        if (std::abs(s) > tol * scale) {
          if (s > 0) {  // orient so that the equality is violated from below
            cons[j].normal = -cons[j].normal;
            cons[j].b = -cons[j].b;
            cons[j].sign = -cons[j].sign;
            s = -s;
          }
          p = static_cast<int>(j);
          break;
        }
        continue;
      }
      if (s < worst - tol * scale) {
        worst = s;
        p = static_cast<int>(j);
      }
    }
    if (p < 0) break;

    double up = 0.0;
    for (int inner = 0; inner < 100000; ++inner) {
      const auto q = static_cast<Eigen::Index>(active.size());
      Eigen::MatrixXd N(n, q);
      for (Eigen::Index j = 0; j < q; ++j) N.col(j) = cons[static_cast<std::size_t>(active[j])].normal;
      const Eigen::VectorXd np = cons[static_cast<std::size_t>(p)].normal;
      Eigen::VectorXd z, r;
      if (q == 0) {
        z = J * np;
        r.resize(0);
      } else {
        const Eigen::MatrixXd JN = J * N;
        const Eigen::MatrixXd M = N.transpose() * JN;
        const Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
        r = lu.solve(JN.transpose() * np);
        z = J * np - JN * r;
      }
      // Dual step limit
      double t1 = std::numeric_limits<double>::infinity();
      int drop = -1;
      for (Eigen::Index j = 0; j < q; ++j) {
        const auto& c = cons[static_cast<std::size_t>(active[j])];
        if (c.equality || r(j) <= 1e-14) continue;
        const double ratio = u[static_cast<std::size_t>(j)] / r(j);
        if (ratio < t1) {
          t1 = ratio;
          drop = static_cast<int>(j);
        }
      }
      // Primal step
      double t2 = std::numeric_limits<double>::infinity();
      const double zn = z.dot(np);
      if (z.norm() > 1e-13 && zn > 1e-16) t2 = -slack(static_cast<std::size_t>(p)) / zn;
      const double t = std::min(t1, t2);
      if (!std::isfinite(t)) return {};  // infeasible

      for (Eigen::Index j = 0; j < q; ++j) u[static_cast<std::size_t>(j)] -= t * r(j);
      up += t;
      if (std::isfinite(t2)) x += t * z;

      if (t == t2) {
        active.push_back(p);
        u.push_back(up);
        is_active[static_cast<std::size_t>(p)] = true;
        break;
      }
      is_active[static_cast<std::size_t>(active[static_cast<std::size_t>(drop)])] = false;
      active.erase(active.begin() + drop);
      u.erase(u.begin() + drop);
    }
  }

  DenseResult res;
  res.feasible = true;
  res.x = x;
  res.y = Eigen::VectorXd::Zero(m);
  for (std::size_t j = 0; j < active.size(); ++j) {
    const auto& c = cons[static_cast<std::size_t>(active[j])];
    // P x + q = sum u_j c_j  and c_j = sign * a_row  =>  y_row = -sign * u_j
    res.y(c.row) += -c.sign * u[j];
  }
  res.objective = 0.5 * x.dot(qp.P * x) + qp.q.dot(x);
  return res;
}

}  // namespace centroidal::oracle
