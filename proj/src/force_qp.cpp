#include "centroidal/force_qp.hpp"

#include <string>

#include "qp_assembly.hpp"

namespace centroidal {

namespace {

std::string pairTag(int t, int e) {
  return "(t=" + std::to_string(t) + ", effector=" + std::to_string(e) + ")";
}

}  // namespace

SparseQP buildForceQp(const ForceQpInputs& in) {
  if (in.plan == nullptr || in.refs == nullptr)
    throw std::invalid_argument("buildForceQp: plan and references are required");
  const ContactPlan& plan = *in.plan;
  const ReferenceSet& refs = *in.refs;
  const int N = plan.horizon;
  in.weights.validate();
  refs.validate(N);
  if (!(in.L_prox >= 0.0)) throw std::invalid_argument("buildForceQp: negative proximal weight");
  if (!in.h_reg && in.L_prox != 0.0)
    throw std::invalid_argument("buildForceQp: proximal weight without a target");
  if (in.h_reg && static_cast<int>(in.h_reg->size()) != N)
    throw std::invalid_argument("buildForceQp: h_reg length mismatch");
  if (in.ell_fixed.horizon() != N || in.p_fixed.horizon() != N)
    throw std::invalid_argument("buildForceQp: lever-arm field has wrong horizon");

  // Layout
  VariableLayout layout;
  std::vector<std::vector<int>> active(static_cast<std::size_t>(N));
  for (int t = 0; t < N; ++t) {
    layout.add(Quantity::r, t, -1, 3);
    layout.add(Quantity::l, t, -1, 3);
    layout.add(Quantity::k, t, -1, 3);
    active[static_cast<std::size_t>(t)] = plan.activePhases(t);
    for (int idx : active[static_cast<std::size_t>(t)]) {
      const auto& ph = plan.phases[static_cast<std::size_t>(idx)];
      if (!in.ell_fixed(t, ph.effector))
        throw std::invalid_argument("buildForceQp: missing lever arm for active contact " +
                                    pairTag(t, ph.effector));
      if (!in.p_fixed(t, ph.effector))
        throw std::invalid_argument("buildForceQp: missing foothold for active contact " +
                                    pairTag(t, ph.effector));
      layout.add(Quantity::f, t, ph.effector, 3);
      if (ph.flat_foot) {
        layout.add(Quantity::tau, t, ph.effector, 3);
        layout.add(Quantity::z, t, ph.effector, 2);
      }
    }
  }
  for (int t = 0; t < N; ++t)
    for (int e = 0; e < plan.n_effectors; ++e)
      if (!plan.activePhase(e, t) && (in.ell_fixed(t, e) || in.p_fixed(t, e)))
        throw std::invalid_argument("buildForceQp: lever arm given for inactive contact " +
                                    pairTag(t, e));

  detail::QpAssembler qa;
  qa.setVariableCount(layout.size());
  const double dt = plan.dt;
  const double m = plan.mass;
  const Vec3 gravity_impulse = m * plan.gravity * dt;

  for (int t = 0; t < N; ++t) {
    const int r = layout.at(Quantity::r, t).offset;
    const int l = layout.at(Quantity::l, t).offset;
    const int k = layout.at(Quantity::k, t).offset;
    const auto& contacts = active[static_cast<std::size_t>(t)];

    // Linear momentum: l_t - l_{t-1} - dt sum f = m g dt
    for (int a = 0; a < 3; ++a) {
      double rhs = gravity_impulse(a);
      if (t == 0) rhs += plan.h0.l(a);
      const int row = qa.addRow(rhs, rhs);
      qa.coeff(row, l + a, 1.0);
      if (t > 0) qa.coeff(row, layout.at(Quantity::l, t - 1).offset + a, -1.0);
      for (int idx : contacts) {
        const int e = plan.phases[static_cast<std::size_t>(idx)].effector;
        qa.coeff(row, layout.at(Quantity::f, t, e).offset + a, -dt);
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
    // Angular momentum: k_t - k_{t-1} - dt sum (skew(ell) f + tau) = 0
    for (int a = 0; a < 3; ++a) {
      const double rhs = t == 0 ? plan.h0.k(a) : 0.0;
      const int row = qa.addRow(rhs, rhs);
      qa.coeff(row, k + a, 1.0);
      if (t > 0) qa.coeff(row, layout.at(Quantity::k, t - 1).offset + a, -1.0);
      for (int idx : contacts) {
        const auto& ph = plan.phases[static_cast<std::size_t>(idx)];
        const Mat3 S = skew(*in.ell_fixed(t, ph.effector));
        const int f = layout.at(Quantity::f, t, ph.effector).offset;
        for (int b = 0; b < 3; ++b)
          if (a != b) qa.coeff(row, f + b, -dt * S(a, b));
        if (ph.flat_foot) qa.coeff(row, layout.at(Quantity::tau, t, ph.effector).offset + a, -dt);
      }
    }

    for (int idx : contacts) {
      const auto& ph = plan.phases[static_cast<std::size_t>(idx)];
      const int f = layout.at(Quantity::f, t, ph.effector).offset;
      const Vec3 tx = ph.rotation.col(0);
      const Vec3 ty = ph.rotation.col(1);
      const Vec3 nz = ph.rotation.col(2);
      const double mu = ph.friction;
      // Friction pyramid in the contact frame
      const Vec3 faces[4] = {tx - mu * nz, -tx - mu * nz, ty - mu * nz, -ty - mu * nz};
      for (const auto& face : faces) {
        const int row = qa.addRow(-kInfinity, 0.0);
        for (int b = 0; b < 3; ++b) qa.coeff(row, f + b, face(b));
      }
      {
        const int row = qa.addRow(0.0, kInfinity);
        for (int b = 0; b < 3; ++b) qa.coeff(row, f + b, nz(b));
      }
      {
        const double fmax = std::isfinite(ph.max_normal_force) ? ph.max_normal_force : kInfinity;
        const int row = qa.addRow(-kInfinity, fmax);
        for (int b = 0; b < 3; ++b) qa.coeff(row, f + b, nz(b));
      }
      // Kinematic limit: |p - r| <= L per axis
      const Vec3& p = *in.p_fixed(t, ph.effector);
      for (int a = 0; a < 3; ++a) {
        const int lower = qa.addRow(p(a) - plan.L_max, kInfinity);
        qa.coeff(lower, r + a, 1.0);
        const int upper = qa.addRow(-kInfinity, p(a) + plan.L_max);
        qa.coeff(upper, r + a, 1.0);
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

  // Cost
  const CostWeights& w = in.weights;
  for (int t = 0; t < N; ++t) {
    const auto& ref = refs.h_kin[static_cast<std::size_t>(t)];
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
    }
    if (in.h_reg) {
      const auto& hr = (*in.h_reg)[static_cast<std::size_t>(t)];
      // (L/2) ||h - h_reg||^2
      for (int a = 0; a < 3; ++a) {
        qa.addSquare(r + a, 0.5 * in.L_prox, hr.r(a));
        qa.addSquare(l + a, 0.5 * in.L_prox, hr.l(a));
        qa.addSquare(k + a, 0.5 * in.L_prox, hr.k(a));
      }
    }
    for (int idx : active[static_cast<std::size_t>(t)]) {
      const auto& ph = plan.phases[static_cast<std::size_t>(idx)];
      const int f = layout.at(Quantity::f, t, ph.effector).offset;
      for (int a = 0; a < 3; ++a) qa.addSquare(f + a, w.run_f(a), 0.0);
      if (ph.flat_foot) {
        const int tau = layout.at(Quantity::tau, t, ph.effector).offset;
        const int z = layout.at(Quantity::z, t, ph.effector).offset;
        for (int a = 0; a < 3; ++a) qa.addSquare(tau + a, w.run_tau(a), 0.0);
        for (int a = 0; a < 2; ++a) qa.addSquare(z + a, w.run_z(a), 0.0);
      }
    }
  }
  return qa.finish(std::move(layout));
}

ForceIterate extractForceIterate(const QpSolution& sol, const VariableLayout& layout,
                                 const ContactPlan& plan) {
  if (sol.status != QpStatus::solved)
    throw QpFailure(std::string("force QP not solved: ") + statusName(sol.status), sol.status);
  if (sol.x.size() != layout.size()) throw std::invalid_argument("solution size mismatch");
  const int N = plan.horizon;
  ForceIterate it;
  it.states.resize(static_cast<std::size_t>(N));
  it.f = ContactField<Vec3>(N, plan.n_effectors);
  it.tau = ContactField<Vec3>(N, plan.n_effectors);
  it.z = ContactField<Vec2>(N, plan.n_effectors);
  for (const auto& entry : layout.entries()) {
    const auto seg = sol.x.segment(entry.range.offset, entry.range.size);
    auto& h = it.states[static_cast<std::size_t>(entry.t)];
    switch (entry.quantity) {
      case Quantity::r: h.r = seg; break;
      case Quantity::l: h.l = seg; break;
      case Quantity::k: h.k = seg; break;
      case Quantity::f: it.f(entry.t, entry.effector) = Vec3(seg); break;
      case Quantity::tau: it.tau(entry.t, entry.effector) = Vec3(seg); break;
      case Quantity::z: it.z(entry.t, entry.effector) = Vec2(seg); break;
      case Quantity::p: throw std::invalid_argument("force layout has no foothold variables");
    }
  }
  return it;
}

Eigen::VectorXd scatterForceIterate(const ForceIterate& it, const VariableLayout& layout,
                                    const ContactPlan& plan) {
  (void)plan;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(layout.size());
  for (const auto& entry : layout.entries()) {
    auto seg = x.segment(entry.range.offset, entry.range.size);
    const auto& h = it.states[static_cast<std::size_t>(entry.t)];
    switch (entry.quantity) {
      case Quantity::r: seg = h.r; break;
      case Quantity::l: seg = h.l; break;
      case Quantity::k: seg = h.k; break;
      case Quantity::f: seg = *it.f(entry.t, entry.effector); break;
      case Quantity::tau: seg = *it.tau(entry.t, entry.effector); break;
      case Quantity::z: seg = *it.z(entry.t, entry.effector); break;
      case Quantity::p: break;
    }
  }
  return x;
}

Trajectory assembleTrajectory(const ContactPlan& plan, const std::vector<CentroidalState>& states,
                              const ContactField<Vec3>& f, const ContactField<Vec3>& p,
                              const ContactField<Vec3>& ell, const ContactField<Vec3>* tau,
                              const ContactField<Vec2>* z) {
  Trajectory traj(static_cast<std::size_t>(plan.horizon));
  for (int t = 0; t < plan.horizon; ++t) {
    auto& pt = traj[static_cast<std::size_t>(t)];
    pt.state = states[static_cast<std::size_t>(t)];
    for (int idx : plan.activePhases(t)) {
      const auto& ph = plan.phases[static_cast<std::size_t>(idx)];
      const int e = ph.effector;
      ContactValues c;
      c.effector = e;
      if (!f(t, e) || !p(t, e) || !ell(t, e))
        throw std::invalid_argument("assembleTrajectory: missing contact values at t=" +
                                    std::to_string(t));
      c.f = *f(t, e);
      c.p = *p(t, e);
      c.ell = *ell(t, e);
      if (ph.flat_foot) {
        if (tau && (*tau)(t, e)) c.tau = *(*tau)(t, e);
        if (z && (*z)(t, e)) c.z = *(*z)(t, e);
      }
      pt.contacts.contacts.push_back(c);
    }
  }
  return traj;
}

}  // namespace centroidal
