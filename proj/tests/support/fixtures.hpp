#pragma once

#include "centroidal/scenario.hpp"

namespace centroidal::testing {

/// Four-foot stand, symmetric footholds, constant references, N = 10.
inline Scenario hoverScenario(int N = 10) {
  GaitParams g;
  g.duration = N * g.dt;
  return buildScenario(makeGait(GaitKind::stand, g));
}

/// Weights under which static equilibrium is the optimum of the hover
/// scenario up to solver precision.
inline CostWeights hoverWeights() {
  CostWeights w;
  w.run_f = Vec3::Constant(1e-12);
  w.track_r = w.track_l = w.track_k = Vec3::Constant(1e4);
  w.terminal_r = w.terminal_l = w.terminal_k = Vec3::Constant(1e4);
  return w;
}

/// One point contact on a flat patch under the CoM.
inline ContactPlan singleContactPlan(int N, double mass = 1.0, double mu = 0.7) {
  ContactPlan plan;
  plan.n_effectors = 1;
  plan.horizon = N;
  plan.dt = 0.01;
  plan.mass = mass;
  plan.L_max = 0.5;
  plan.h0.r = Vec3(0.0, 0.0, 0.3);
  plan.nominal_offsets = {Vec3(0.0, 0.0, -0.3)};
  ContactPhase ph;
  ph.effector = 0;
  ph.t_start = 0;
  ph.t_end = N;
  ph.surface = polygonToHalfspaces({Vec3(0.1, 0.1, 0), Vec3(-0.1, 0.1, 0), Vec3(-0.1, -0.1, 0), Vec3(0.1, -0.1, 0)});
  ph.friction = mu;
  ph.nominal_position = Vec3::Zero();
  plan.phases.push_back(ph);
  return plan;
}

inline ReferenceSet constantRefs(const ContactPlan& plan) {
  ReferenceSet refs;
  refs.h_kin.assign(static_cast<std::size_t>(plan.horizon), plan.h0);
  return refs;
}

}  // namespace centroidal::testing
