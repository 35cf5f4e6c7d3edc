#include "centroidal/sparse_qp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace centroidal {

const char* quantityName(Quantity q) {
  switch (q) {
    case Quantity::r: return "r";
    case Quantity::l: return "l";
    case Quantity::k: return "k";
    case Quantity::f: return "f";
    case Quantity::tau: return "tau";
    case Quantity::z: return "z";
    case Quantity::p: return "p";
  }
  return "?";
}

const char* statusName(QpStatus s) {
  switch (s) {
    case QpStatus::solved: return "solved";
    case QpStatus::max_iter: return "max_iter";
    case QpStatus::primal_infeasible: return "primal_infeasible";
    case QpStatus::dual_infeasible: return "dual_infeasible";
  }
  return "?";
}

int VariableLayout::add(Quantity q, int t, int effector, int size) {
  const Key key{static_cast<int>(q), t, effector};
  if (index_.count(key) != 0)
    throw std::logic_error(std::string("duplicate layout entry for ") + quantityName(q));
  const int offset = n_;
  index_.emplace(key, entries_.size());
  entries_.push_back({q, t, effector, {offset, size}});
  n_ += size;
  return offset;
}

ColumnRange VariableLayout::at(Quantity q, int t, int effector) const {
  auto it = index_.find(Key{static_cast<int>(q), t, effector});
  if (it == index_.end())
    throw std::out_of_range(std::string("no layout entry for ") + quantityName(q) + " t=" +
                            std::to_string(t) + " e=" + std::to_string(effector));
  return entries_[it->second].range;
}

bool VariableLayout::contains(Quantity q, int t, int effector) const {
  return index_.count(Key{static_cast<int>(q), t, effector}) != 0;
}

bool VariableLayout::isPartition() const {
  std::vector<ColumnRange> ranges;
  for (const auto& e : entries_) ranges.push_back(e.range);
  std::sort(ranges.begin(), ranges.end(),
            [](const ColumnRange& a, const ColumnRange& b) { return a.offset < b.offset; });
  int next = 0;
  for (const auto& r : ranges) {
    if (r.offset != next || r.size <= 0) return false;
    next += r.size;
  }
  return next == n_;
}

void SparseQP::validate() const {
  const int nv = n();
  if (P.rows() != nv || P.cols() != nv) throw std::invalid_argument("P has wrong shape");
  if (A.cols() != nv || A.rows() != m()) throw std::invalid_argument("A has wrong shape");
  if (hi.size() != lo.size()) throw std::invalid_argument("bound sizes differ");
  if (!q.allFinite()) throw std::invalid_argument("q must be finite");
  for (int i = 0; i < m(); ++i) {
    if (std::isnan(lo(i)) || std::isnan(hi(i))) throw std::invalid_argument("NaN bound");
    if (lo(i) > hi(i))
      throw std::invalid_argument("lo > hi in row " + std::to_string(i));
  }
  for (int c = 0; c < P.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(P, c); it; ++it)
      if (!std::isfinite(it.value())) throw std::invalid_argument("P must be finite");
  for (int c = 0; c < A.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(A, c); it; ++it)
      if (!std::isfinite(it.value())) throw std::invalid_argument("A must be finite");
  const SparseMatrix asym = SparseMatrix(P.transpose()) - P;
  for (int c = 0; c < asym.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(asym, c); it; ++it)
      if (std::abs(it.value()) > 1e-12 * (1.0 + std::abs(it.value())))
        throw std::invalid_argument("P is not symmetric");
}

double SparseQP::objective(const Eigen::VectorXd& x) const {
  return 0.5 * x.dot(P * x) + q.dot(x);
}

double minEigenvalueEstimate(const SparseMatrix& P) {
  const int n = static_cast<int>(P.rows());
  if (n == 0) return 0.0;
  bool diagonal = true;
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd offsum = Eigen::VectorXd::Zero(n);
  for (int c = 0; c < P.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(P, c); it; ++it) {
      if (it.row() == it.col()) {
        diag(c) += it.value();
      } else if (it.value() != 0.0) {
        diagonal = false;
        offsum(it.row()) += std::abs(it.value());
      }
    }
  }
  if (diagonal) return diag.minCoeff();
  const double gershgorin = (diag - offsum).minCoeff();
  if (gershgorin >= 0.0 || n > 3000) return gershgorin;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(P), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  // FNV-1a over the 8 bytes of v
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xffu;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t hashPattern(std::uint64_t h, const SparseMatrix& M) {
  h = mix(h, static_cast<std::uint64_t>(M.rows()));
  h = mix(h, static_cast<std::uint64_t>(M.cols()));
  for (int c = 0; c < M.outerSize(); ++c) {
    h = mix(h, 0xffffffffull);
    for (SparseMatrix::InnerIterator it(M, c); it; ++it) h = mix(h, static_cast<std::uint64_t>(it.row()));
  }
  return h;
}

}  // namespace

std::uint64_t structuralHash(const SparseQP& qp) {
  std::uint64_t h = 1469598103934665603ull;
  h = hashPattern(h, qp.P);
  h = hashPattern(h, qp.A);
  return h;
}

bool samePattern(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.nonZeros() != b.nonZeros()) return false;
  for (int c = 0; c < a.outerSize(); ++c) {
    SparseMatrix::InnerIterator ia(a, c), ib(b, c);
    for (; ia && ib; ++ia, ++ib)
      if (ia.row() != ib.row()) return false;
    if (ia || ib) return false;
  }
  return true;
}

void SolverSettings::validate() const {
  if (!(eps_abs > 0 && eps_rel > 0 && eps_prim_inf > 0 && eps_dual_inf > 0))
    throw std::invalid_argument("solver tolerances must be positive");
  if (check_termination_every < 1) throw std::invalid_argument("check_termination_every < 1");
  if (max_iterations < 1) throw std::invalid_argument("max_iterations < 1");
  if (!(rho > 0 && sigma > 0)) throw std::invalid_argument("rho and sigma must be positive");
  if (!(relaxation > 0 && relaxation < 2)) throw std::invalid_argument("relaxation outside (0, 2)");
}

KktResiduals kktResiduals(const SparseQP& qp, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  KktResiduals res;
  const Eigen::VectorXd Ax = qp.A * x;
  for (int i = 0; i < qp.m(); ++i) {
    const double clamped = std::clamp(Ax(i), qp.lo(i), qp.hi(i));
    res.primal = std::max(res.primal, std::abs(Ax(i) - clamped));
    double gap;
    if (y(i) > 0.0)
      gap = isInfiniteBound(qp.hi(i)) ? y(i) : std::abs(qp.hi(i) - Ax(i));
    else if (y(i) < 0.0)
      gap = isInfiniteBound(qp.lo(i)) ? -y(i) : std::abs(Ax(i) - qp.lo(i));
    else
      gap = 0.0;
    res.complementarity = std::max(res.complementarity, std::min(std::abs(y(i)), gap));
  }
  const Eigen::VectorXd stationarity = qp.P * x + qp.q + qp.A.transpose() * y;
  res.dual = stationarity.size() ? stationarity.cwiseAbs().maxCoeff() : 0.0;
  return res;
}

}  // namespace centroidal
