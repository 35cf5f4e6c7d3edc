#pragma once

#include <optional>
#include <vector>

#include "centroidal/cost.hpp"
#include "centroidal/force_qp.hpp"
#include "centroidal/sparse_qp.hpp"

namespace centroidal {

/// Inputs of the contact block: forces are fixed, so f x (r - p) is linear
/// in CoM and foothold.
struct ContactQpInputs {
  const ContactPlan* plan = nullptr;
  const ReferenceSet* refs = nullptr;
  CostWeights weights;
  ContactField<Vec3> f_fixed;
  /// Momentum trajectory of the previous force block (proximal target).
  std::vector<CentroidalState> h_reg;
  /// Linear momentum target; defaults to the l part of h_reg when empty.
  std::vector<Vec3> l_reg;
  /// Footholds of the previous contact block; absent on the first iteration.
  std::optional<ContactField<Vec3>> p_reg;
  double L_prox = 0.0;
};

/// Assembles the contact block. Variables per timestep: r, l, k; one
/// foothold p per stance phase, placed at the phase's first timestep; z per
/// flat-foot contact. Rows per timestep: 3 position and 3 angular-momentum
/// transitions (no linear-momentum transition), per contact 3 two-sided
/// kinematic rows and 2 ZMP rows for flat feet; per phase its surface rows.
SparseQP buildContactQp(const ContactQpInputs& in);

struct ContactIterate {
  std::vector<CentroidalState> states;
  ContactField<Vec3> p;    ///< foothold at each active (t, e)
  ContactField<Vec2> z;    ///< flat-foot ZMP; zero for point contacts
  ContactField<Vec3> ell;  ///< p - r + R^{xy} z
  std::vector<Vec3> phase_footholds;  ///< one per plan phase
};

/// Throws QpFailure unless the status is solved.
ContactIterate extractContactIterate(const QpSolution& sol, const VariableLayout& layout,
                                     const ContactPlan& plan);

/// Stacks lever arms over active pairs in (t, effector) order.
Eigen::VectorXd stackLeverArms(const ContactField<Vec3>& ell);

}  // namespace centroidal
