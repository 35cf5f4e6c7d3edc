#pragma once

#include <optional>
#include <vector>

#include "centroidal/model.hpp"

namespace centroidal {

/// Per-(timestep, effector) values, present only where a contact is active.
template <class T>
class ContactField {
 public:
  ContactField() = default;
  ContactField(int horizon, int n_effectors)
      : n_eff_(n_effectors),
        data_(static_cast<std::size_t>(horizon) * static_cast<std::size_t>(n_effectors)) {}

  std::optional<T>& operator()(int t, int e) { return data_[index(t, e)]; }
  const std::optional<T>& operator()(int t, int e) const { return data_[index(t, e)]; }

  int horizon() const { return n_eff_ ? static_cast<int>(data_.size()) / n_eff_ : 0; }
  int effectors() const { return n_eff_; }

 private:
  std::size_t index(int t, int e) const {
    return static_cast<std::size_t>(t) * static_cast<std::size_t>(n_eff_) + static_cast<std::size_t>(e);
  }
  int n_eff_ = 0;
  std::vector<std::optional<T>> data_;
};

/// Diagonal weights of the running cost and of reference tracking. Running
/// weights act on the raw quantities (foothold weight on the offset from the
/// planned foothold); tracking weights on h - h_kin.
struct CostWeights {
  Vec3 run_r = Vec3::Zero();
  Vec3 run_l = Vec3::Constant(1e-2);
  Vec3 run_k = Vec3::Constant(1e-1);
  Vec3 run_f = Vec3::Constant(1e-4);
  Vec3 run_tau = Vec3::Constant(1e-2);
  Vec2 run_z = Vec2::Constant(1.0);
  Vec3 run_p = Vec3::Constant(1e-2);

  Vec3 track_r = Vec3::Constant(1e2);
  Vec3 track_l = Vec3::Constant(1.0);
  Vec3 track_k = Vec3::Constant(1e1);

  Vec3 terminal_r = Vec3::Zero();
  Vec3 terminal_l = Vec3::Zero();
  Vec3 terminal_k = Vec3::Zero();

  /// Throws std::invalid_argument on negative or non-finite weights.
  void validate() const;
  bool operator==(const CostWeights&) const = default;
};

/// Reference momentum trajectory with per-timestep tracking multipliers.
struct ReferenceSet {
  std::vector<CentroidalState> h_kin;
  std::vector<double> tracking_scale;

  int size() const { return static_cast<int>(h_kin.size()); }
  double scale(int t) const {
    return tracking_scale.empty() ? 1.0 : tracking_scale[static_cast<std::size_t>(t)];
  }
  void validate(int horizon) const;
};

/// Diagonal tracking weights on (r, l, k) at timestep t including the
/// terminal term.
struct StateWeights {
  Vec3 r, l, k;
};
StateWeights trackingWeights(const CostWeights& w, const ReferenceSet& refs, int t, int horizon);

/// Running plus tracking cost of a trajectory, without any proximal terms.
double originalCost(const ContactPlan& plan, const ReferenceSet& refs, const CostWeights& w,
                    const Trajectory& traj);

}  // namespace centroidal
