#include "centroidal/contact_qp.hpp"

#include <string>

#include "qp_assembly.hpp"

namespace centroidal {

namespace {

/// Surface halfspaces as rows lo <= a'p <= hi, folding opposing pairs
/// (a, b), (-a, -b') into one two-sided row.
struct SurfaceRow {
  Vec3 a;
  double lo, hi;
};

std::vector<SurfaceRow> surfaceRows(const Halfspaces& hs) {
  std::vector<SurfaceRow> rows;
  std::vector<bool> used(static_cast<std::size_t>(hs.rows()), false);
  for (int i = 0; i < hs.rows(); ++i) {
    if (used[static_cast<std::size_t>(i)]) continue;
    const Vec3 a = hs.A.row(i).transpose();
    SurfaceRow row{a, -kInfinity, hs.b(i)};
    for (int j = i + 1; j < hs.rows(); ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      const Vec3 o = hs.A.row(j).transpose();
      if ((a + o).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + a.norm())) {
        row.lo = -hs.b(j);
        used[static_cast<std::size_t>(j)] = true;
        break;
      }
    }
    if (row.lo > row.hi) row.lo = row.hi;  // numerically flat surface
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

SparseQP buildContactQp(const ContactQpInputs& in) {
  if (in.plan == nullptr || in.refs == nullptr)
    throw std::invalid_argument("buildContactQp: plan and references are required");
  const ContactPlan& plan = *in.plan;
  const ReferenceSet& refs = *in.refs;
  const int N = plan.horizon;
  in.weights.validate();
  refs.validate(N);
  if (!(in.L_prox >= 0.0)) throw std::invalid_argument("buildContactQp: negative proximal weight");
  if (static_cast<int>(in.h_reg.size()) != N)
    throw std::invalid_argument("buildContactQp: h_reg length mismatch");
  if (!in.l_reg.empty() && static_cast<int>(in.l_reg.size()) != N)
    throw std::invalid_argument("buildContactQp: l_reg length mismatch");
  if (in.f_fixed.horizon() != N) throw std::invalid_argument("buildContactQp: force field has wrong horizon");

  VariableLayout layout;
  std::vector<std::vector<int>> active(static_cast<std::size_t>(N));
  for (int t = 0; t < N; ++t) {
    layout.add(Quantity::r, t, -1, 3);
    layout.add(Quantity::l, t, -1, 3);
    layout.add(Quantity::k, t, -1, 3);
    active[static_cast<std::size_t>(t)] = plan.activePhases(t);
    for (int idx : active[static_cast<std::size_t>(t)]) {
      const auto& ph = plan.phases[static_cast<std::size_t>(idx)];
      if (!in.f_fixed(t, ph.effector))
        throw std::invalid_argument("buildContactQp: missing force for active contact (t=" +
                                    std::to_string(t) + ", effector=" +
                                    std::to_string(ph.effector) + ")");
      if (ph.t_start == t) layout.add(Quantity::p, ph.t_start, ph.effector, 3);
      if (ph.flat_foot) layout.add(Quantity::z, t, ph.effector, 2);
    }
  }

  detail::QpAssembler qa;
  qa.setVariableCount(layout.size());
  const double dt = plan.dt;
  const double m = plan.mass;

  for (int t = 0; t < N; ++t) {
    const int r = layout.at(Quantity::r, t).offset;
    const int l = layout.at(Quantity::l, t).offset;
    const int k = layout.at(Quantity::k, t).offset;
    const auto& contacts = active[static_cast<std::size_t>(t)];

    // Surface rows of phases starting here
    for (int idx : contacts) {
      const auto& ph = plan.phases[static_cast<std::size_t>(idx)];
      if (ph.t_start != t) continue;
      const int p = layout.at(Quantity::p, ph.t_start, ph.effector).offset;
      for (const auto& sr : surfaceRows(ph.surface)) {
        const int row = qa.addRow(sr.lo, sr.hi);
        for (int b = 0; b < 3; ++b) qa.coeff(row, p + b, sr.a(b));
      }
    }
    // Position: r_t - r_{t-1} - (dt/m) l_t = 0
    for (int a = 0; a < 3; ++a) {
      const double rhs = t == 0 ? plan.h0.r(a) : 0.0;
      const int row = qa.addRow(rhs, rhs);
      qa.coeff(row, r + a, 1.0);
      if (t > 0) qa.coeff(row, layout.at(Quantity::r, t - 1).offset + a, -1.0);
      qa.coeff(row, l + a, -dt / m);
    }
    // Angular momentum with kappa = f x (r - p) - f x (R^{xy} z):
    // k_t - k_{t-1} - dt sum [S(f) r_t - S(f) p - S(f) R^{xy} z] = 0
    for (int a = 0; a < 3; ++a) {
      const double rhs = t == 0 ? plan.h0.k(a) : 0.0;
      const int row = qa.addRow(rhs, rhs);
      qa.coeff(row, k + a, 1.0);
      if (t > 0) qa.coeff(row, layout.at(Quantity::k, t - 1).offset + a, -1.0);
      for (int idx : contacts) {
        const auto& ph = plan.phases[static_cast<std::size_t>(idx)];
        const Mat3 S = skew(*in.f_fixed(t, ph.effector));
        const int p = layout.at(Quantity::p, ph.t_start, ph.effector).offset;
        for (int b = 0; b < 3; ++b) {
          if (a == b) continue;
          qa.coeff(row, r + b, -dt * S(a, b));
          qa.coeff(row, p + b, dt * S(a, b));
        }
        if (ph.flat_foot) {
          const Eigen::Matrix<double, 3, 2> SR = S * tangentColumns(ph.rotation);
          const int z = layout.at(Quantity::z, t, ph.effector).offset;
          for (int b = 0; b < 2; ++b) qa.coeff(row, z + b, dt * SR(a, b));
        }
      }
    }
    for (int idx : contacts) {
      const auto& ph = plan.phases[static_cast<std::size_t>(idx)];
      const int p = layout.at(Quantity::p, ph.t_start, ph.effector).offset;
      for (int a = 0; a < 3; ++a) {
        const int row = qa.addRow(-plan.L_max, plan.L_max);
        qa.coeff(row, p + a, 1.0);
        qa.coeff(row, r + a, -1.0);
      }
      if (ph.flat_foot) {
        const int z = layout.at(Quantity::z, t, ph.effector).offset;
        for (int a = 0; a < 2; ++a) {
          const int row = qa.addRow(ph.zmp.min(a), ph.zmp.max(a));
          qa.coeff(row, z + a, 1.0);
        }
      }
    }
  }

  const CostWeights& w = in.weights;
  const double half_L = 0.5 * in.L_prox;
  for (int t = 0; t < N; ++t) {
    const auto& ref = refs.h_kin[static_cast<std::size_t>(t)];
    const auto& hr = in.h_reg[static_cast<std::size_t>(t)];
    const Vec3 lr = in.l_reg.empty() ? hr.l : in.l_reg[static_cast<std::size_t>(t)];
    const StateWeights sw = trackingWeights(w, refs, t, N);
    const int r = layout.at(Quantity::r, t).offset;
    const int l = layout.at(Quantity::l, t).offset;
    const int k = layout.at(Quantity::k, t).offset;
    for (int a = 0; a < 3; ++a) {
      qa.addSquare(r + a, w.run_r(a), 0.0);
      qa.addSquare(l + a, w.run_l(a), 0.0);
      qa.addSquare(k + a, w.run_k(a), 0.0);
      qa.addSquare(r + a, sw.r(a), ref.r(a));
      qa.addSquare(l + a, sw.l(a), ref.l(a));
      qa.addSquare(k + a, sw.k(a), ref.k(a));
      qa.addSquare(r + a, half_L, hr.r(a));
      qa.addSquare(l + a, half_L, lr(a));
      qa.addSquare(k + a, half_L, hr.k(a));
    }
    for (int idx : active[static_cast<std::size_t>(t)]) {
      const auto& ph = plan.phases[static_cast<std::size_t>(idx)];
      const int p = layout.at(Quantity::p, ph.t_start, ph.effector).offset;
      for (int a = 0; a < 3; ++a) qa.addSquare(p + a, w.run_p(a), ph.nominal_position(a));
      if (in.p_reg) {
        const auto& target = (*in.p_reg)(t, ph.effector);
        if (!target)
          throw std::invalid_argument("buildContactQp: missing previous foothold at t=" +
                                      std::to_string(t));
        for (int a = 0; a < 3; ++a) qa.addSquare(p + a, half_L, (*target)(a));
      } else {
        for (int a = 0; a < 3; ++a) qa.addDiag(p + a, 0.0);
      }
      if (ph.flat_foot) {
        const int z = layout.at(Quantity::z, t, ph.effector).offset;
        for (int a = 0; a < 2; ++a) qa.addSquare(z + a, w.run_z(a), 0.0);
      }
    }
  }
  return qa.finish(std::move(layout));
}

ContactIterate extractContactIterate(const QpSolution& sol, const VariableLayout& layout,
                                     const ContactPlan& plan) {
  if (sol.status != QpStatus::solved)
    throw QpFailure(std::string("contact QP not solved: ") + statusName(sol.status), sol.status);
  if (sol.x.size() != layout.size()) throw std::invalid_argument("solution size mismatch");
  const int N = plan.horizon;
  ContactIterate it;
  it.states.resize(static_cast<std::size_t>(N));
  it.p = ContactField<Vec3>(N, plan.n_effectors);
  it.z = ContactField<Vec2>(N, plan.n_effectors);
  it.ell = ContactField<Vec3>(N, plan.n_effectors);
  it.phase_footholds.assign(plan.phases.size(), Vec3::Zero());

  for (int t = 0; t < N; ++t) {
    auto& h = it.states[static_cast<std::size_t>(t)];
    h.r = sol.x.segment<3>(layout.at(Quantity::r, t).offset);
    h.l = sol.x.segment<3>(layout.at(Quantity::l, t).offset);
    h.k = sol.x.segment<3>(layout.at(Quantity::k, t).offset);
  }
  for (std::size_t i = 0; i < plan.phases.size(); ++i) {
    const auto& ph = plan.phases[i];
    const Vec3 p = sol.x.segment<3>(layout.at(Quantity::p, ph.t_start, ph.effector).offset);
    it.phase_footholds[i] = p;
    for (int t = ph.t_start; t < ph.t_end; ++t) {
      Vec2 z = Vec2::Zero();
      if (ph.flat_foot) z = sol.x.segment<2>(layout.at(Quantity::z, t, ph.effector).offset);
      it.p(t, ph.effector) = p;
      it.z(t, ph.effector) = z;
      it.ell(t, ph.effector) = leverArm(p, it.states[static_cast<std::size_t>(t)].r, z, ph.rotation);
    }
  }
  return it;
}

Eigen::VectorXd stackLeverArms(const ContactField<Vec3>& ell) {
  std::vector<double> out;
  for (int t = 0; t < ell.horizon(); ++t)
    for (int e = 0; e < ell.effectors(); ++e)
      if (const auto& v = ell(t, e)) out.insert(out.end(), {v->x(), v->y(), v->z()});
  return Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

}  // namespace centroidal
