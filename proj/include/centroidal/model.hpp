#pragma once

#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace centroidal {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Momentum state expressed at the center of mass.
struct CentroidalState {
  Vec3 r = Vec3::Zero();  ///< CoM position [m]
  Vec3 l = Vec3::Zero();  ///< linear momentum [kg m/s]
  Vec3 k = Vec3::Zero();  ///< angular momentum [kg m^2/s]

  bool allFinite() const { return r.allFinite() && l.allFinite() && k.allFinite(); }
  bool operator==(const CentroidalState&) const = default;
};

/// Convex polytope {x : A x <= b} in world frame.
struct Halfspaces {
  Eigen::MatrixX3d A;
  Eigen::VectorXd b;

  int rows() const { return static_cast<int>(b.size()); }
  bool contains(const Vec3& x, double tol = 0.0) const;
  /// Largest violation max_i (a_i x - b_i), floored at zero.
  double violation(const Vec3& x) const;
  bool operator==(const Halfspaces& o) const { return A == o.A && b == o.b; }
};

/// Builds the halfspace description of a planar convex polygon given by its
/// vertices (either winding). The plane itself contributes two opposing rows.
Halfspaces polygonToHalfspaces(const std::vector<Vec3>& vertices);

struct ZmpBounds {
  Vec2 min = Vec2::Zero();
  Vec2 max = Vec2::Zero();
  bool operator==(const ZmpBounds&) const = default;
};

/// One stance interval of one end-effector.
struct ContactPhase {
  int effector = 0;
  int t_start = 0;  ///< first timestep index (inclusive)
  int t_end = 0;    ///< last timestep index (exclusive)
  Halfspaces surface;
  Mat3 rotation = Mat3::Identity();  ///< contact frame -> world frame
  double friction = 0.7;
  bool flat_foot = false;
  ZmpBounds zmp;
  /// Planned foothold; used for the first Force-QP and as the Contact-QP
  /// starting point.
  Vec3 nominal_position = Vec3::Zero();
  /// Upper bound on the contact-frame normal force. Infinite by default.
  double max_normal_force = std::numeric_limits<double>::infinity();

  bool activeAt(int t) const { return t >= t_start && t < t_end; }
  bool operator==(const ContactPhase& o) const;
};

struct ContactPlan {
  std::vector<ContactPhase> phases;
  int n_effectors = 0;
  int horizon = 0;  ///< number of transitions N
  double dt = 0.01;
  double mass = 1.0;
  Vec3 gravity = Vec3(0.0, 0.0, -9.81);
  CentroidalState h0;
  double L_max = 1.0;
  std::vector<Vec3> nominal_offsets;  ///< nominal foothold minus CoM, per effector

  /// Index into `phases` of the phase of effector `e` active at `t`, if any.
  std::optional<int> activePhase(int e, int t) const;
  /// Phase indices active at `t`, ordered by effector.
  std::vector<int> activePhases(int t) const;

  /// Throws std::invalid_argument when an invariant does not hold.
  void validate() const;
};

/// Contact quantities of one active end-effector at one timestep.
struct ContactValues {
  int effector = 0;
  Vec3 f = Vec3::Zero();    ///< world-frame force [N]
  Vec3 p = Vec3::Zero();    ///< contact point [m]
  Vec2 z = Vec2::Zero();    ///< center of pressure offset, flat foot only
  Vec3 tau = Vec3::Zero();  ///< contact torque, flat foot only
  Vec3 ell = Vec3::Zero();  ///< lever arm p - r + R^{xy} z
};

/// Active contacts at one timestep, ordered by effector id.
struct TimestepContacts {
  std::vector<ContactValues> contacts;

  const ContactValues* find(int effector) const;
};

struct TrajectoryPoint {
  CentroidalState state;
  TimestepContacts contacts;
};

using Trajectory = std::vector<TrajectoryPoint>;

struct ResidualReport {
  double dynamics = 0.0;
  double friction = 0.0;
  double kinematic = 0.0;
  double surface = 0.0;
  double zmp = 0.0;
  /// max |ell - (p - r + R^{xy} z)|; informational, not part of `feasible`.
  double lever_arm = 0.0;
  double tolerance = 0.0;
  bool feasible = false;

  double worst() const;
};

Mat3 skew(const Vec3& v);

/// First two columns of a contact rotation.
inline Eigen::Matrix<double, 3, 2> tangentColumns(const Mat3& R) { return R.leftCols<2>(); }

inline Vec3 leverArm(const Vec3& p, const Vec3& r, const Vec2& z, const Mat3& R) {
  return p - r + tangentColumns(R) * z;
}

/// Contact wrench contribution ell x f + tau.
inline Vec3 angularRate(const ContactValues& c) { return c.ell.cross(c.f) + c.tau; }

/// One discrete transition. Linear momentum is integrated first and the new
/// momentum drives the position update; angular momentum uses each contact's
/// lever arm.
CentroidalState integrateStep(const CentroidalState& prev, const TimestepContacts& contacts,
                              const ContactPlan& plan);

/// Friction pyramid violation of force `f` for `phase`, evaluated in the
/// contact frame. Zero when inside.
double frictionViolation(const Vec3& f, const ContactPhase& phase);

/// Certifies a candidate trajectory against the plan's constraints. Throws
/// std::invalid_argument on length mismatch or when the active contacts do
/// not match the plan.
ResidualReport verifyTrajectory(const Trajectory& traj, const ContactPlan& plan, double tol);

}  // namespace centroidal
