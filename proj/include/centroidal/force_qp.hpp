#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "centroidal/cost.hpp"
#include "centroidal/sparse_qp.hpp"

namespace centroidal {

/// A QP subproblem that did not return a usable solution.
class QpFailure : public std::runtime_error {
 public:
  QpFailure(const std::string& what, QpStatus status) : std::runtime_error(what), status_(status) {}
  QpStatus status() const { return status_; }

 private:
  QpStatus status_;
};

/// Inputs of the force block: lever arms are fixed, so the angular momentum
/// rate ell x f + tau is linear in the decision variables.
struct ForceQpInputs {
  const ContactPlan* plan = nullptr;
  const ReferenceSet* refs = nullptr;
  CostWeights weights;
  ContactField<Vec3> ell_fixed;  ///< lever arms from the previous contact block
  ContactField<Vec3> p_fixed;    ///< footholds for the kinematic-limit rows
  /// Proximal target from the previous contact block; absent on the first
  /// iteration, in which case L_prox must be zero.
  std::optional<std::vector<CentroidalState>> h_reg;
  double L_prox = 0.0;
};

/// Assembles the force block. Variables per timestep: r, l, k, then for each
/// active contact (by effector) f, and tau, z for flat feet. Rows per
/// timestep: 9 transition equalities, then per contact 6 friction rows,
/// 6 kinematic-limit rows and 2 ZMP rows for flat feet.
SparseQP buildForceQp(const ForceQpInputs& in);

struct ForceIterate {
  std::vector<CentroidalState> states;
  ContactField<Vec3> f;
  ContactField<Vec3> tau;
  ContactField<Vec2> z;
};

/// Scatters a solved force-block solution back into trajectories. Throws
/// QpFailure unless the status is solved.
ForceIterate extractForceIterate(const QpSolution& sol, const VariableLayout& layout,
                                 const ContactPlan& plan);

/// Inverse of extractForceIterate on the layout's columns.
Eigen::VectorXd scatterForceIterate(const ForceIterate& it, const VariableLayout& layout,
                                    const ContactPlan& plan);

/// Combines states and contact quantities into a verifiable trajectory.
/// Missing torque/ZMP entries are zero.
Trajectory assembleTrajectory(const ContactPlan& plan, const std::vector<CentroidalState>& states,
                              const ContactField<Vec3>& f, const ContactField<Vec3>& p,
                              const ContactField<Vec3>& ell, const ContactField<Vec3>* tau = nullptr,
                              const ContactField<Vec2>* z = nullptr);

}  // namespace centroidal
