#include "centroidal/model.hpp"

#include <algorithm>
#include <cmath>

namespace centroidal {

bool Halfspaces::contains(const Vec3& x, double tol) const { return violation(x) <= tol; }

double Halfspaces::violation(const Vec3& x) const {
  if (b.size() == 0) return 0.0;
  return std::max(0.0, (A * x - b).maxCoeff());
}

Halfspaces polygonToHalfspaces(const std::vector<Vec3>& vertices) {
  const auto n_vert = vertices.size();
  if (n_vert == 0) throw std::invalid_argument("polygon has no vertices");

  Halfspaces hs;
  if (n_vert == 1) {
    // A single point: pin every axis.
    hs.A.resize(6, 3);
    hs.b.resize(6);
    for (int a = 0; a < 3; ++a) {
      hs.A.row(2 * a) = Vec3::Unit(a).transpose();
      hs.b(2 * a) = vertices[0](a);
      hs.A.row(2 * a + 1) = -Vec3::Unit(a).transpose();
      hs.b(2 * a + 1) = -vertices[0](a);
    }
    return hs;
  }
  if (n_vert == 2) throw std::invalid_argument("polygon needs one or at least three vertices");

  Vec3 centroid = Vec3::Zero();
  for (const auto& v : vertices) centroid += v;
  centroid /= static_cast<double>(n_vert);

  // Newell's method is robust to nearly collinear leading vertices.
  Vec3 normal = Vec3::Zero();
  for (std::size_t i = 0; i < n_vert; ++i) {
    const Vec3& a = vertices[i];
    const Vec3& b = vertices[(i + 1) % n_vert];
    normal += (a - centroid).cross(b - centroid);
  }
  if (normal.norm() < 1e-12) throw std::invalid_argument("polygon vertices are degenerate");
  normal.normalize();

  hs.A.resize(static_cast<Eigen::Index>(n_vert + 2), 3);
  hs.b.resize(static_cast<Eigen::Index>(n_vert + 2));
  hs.A.row(0) = normal.transpose();
  hs.b(0) = normal.dot(centroid);
  hs.A.row(1) = -normal.transpose();
  hs.b(1) = -normal.dot(centroid);
  for (std::size_t i = 0; i < n_vert; ++i) {
    const Vec3& a = vertices[i];
    const Vec3& b = vertices[(i + 1) % n_vert];
    Vec3 outward = (b - a).cross(normal);
    if (outward.norm() < 1e-12) throw std::invalid_argument("polygon has repeated vertices");
    outward.normalize();
    if (outward.dot(centroid - a) > 0.0) outward = -outward;
    if (std::abs(normal.dot(a - centroid)) > 1e-9)
      throw std::invalid_argument("polygon vertices are not coplanar");
    const auto row = static_cast<Eigen::Index>(i + 2);
    hs.A.row(row) = outward.transpose();
    hs.b(row) = outward.dot(a);
  }
  for (const auto& v : vertices) {
    if (!hs.contains(v, 1e-9)) throw std::invalid_argument("polygon is not convex");
  }
  return hs;
}

bool ContactPhase::operator==(const ContactPhase& o) const {
  return effector == o.effector && t_start == o.t_start && t_end == o.t_end &&
         surface == o.surface && rotation == o.rotation && friction == o.friction &&
         flat_foot == o.flat_foot && zmp == o.zmp && nominal_position == o.nominal_position &&
         max_normal_force == o.max_normal_force;
}

std::optional<int> ContactPlan::activePhase(int e, int t) const {
  for (std::size_t i = 0; i < phases.size(); ++i) {
    if (phases[i].effector == e && phases[i].activeAt(t)) return static_cast<int>(i);
  }
  return std::nullopt;
}

std::vector<int> ContactPlan::activePhases(int t) const {
  std::vector<int> out;
  for (int e = 0; e < n_effectors; ++e) {
    if (auto p = activePhase(e, t)) out.push_back(*p);
  }
  return out;
}

void ContactPlan::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
  if (!(mass > 0.0) || !std::isfinite(mass)) throw std::invalid_argument("mass must be positive");
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  if (n_effectors < 0) throw std::invalid_argument("negative effector count");
  if (!gravity.allFinite()) throw std::invalid_argument("gravity must be finite");
  if (!h0.allFinite()) throw std::invalid_argument("initial state must be finite");
  if (!(L_max > 0.0)) throw std::invalid_argument("L_max must be positive");
  if (nominal_offsets.size() != static_cast<std::size_t>(n_effectors))
    throw std::invalid_argument("nominal_offsets must have one entry per effector");

  for (std::size_t i = 0; i < phases.size(); ++i) {
    const auto& ph = phases[i];
    const std::string tag = "phase " + std::to_string(i) + ": ";
    if (ph.effector < 0 || ph.effector >= n_effectors)
      throw std::invalid_argument(tag + "unknown effector");
    if (ph.t_start >= ph.t_end) throw std::invalid_argument(tag + "empty window");
    if (ph.t_start < 0 || ph.t_end > horizon)
      throw std::invalid_argument(tag + "window outside horizon");
    if (!(ph.friction >= 0.0)) throw std::invalid_argument(tag + "friction must be nonnegative");
    if ((ph.rotation.transpose() * ph.rotation - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-10)
      throw std::invalid_argument(tag + "rotation is not orthonormal");
    if (ph.surface.rows() == 0) throw std::invalid_argument(tag + "empty surface");
    if (!ph.surface.contains(ph.nominal_position, 1e-8))
      throw std::invalid_argument(tag + "nominal position outside surface");
    if (ph.flat_foot && (ph.zmp.min.array() > ph.zmp.max.array()).any())
      throw std::invalid_argument(tag + "zmp bounds inverted");
    if (!(ph.max_normal_force >= 0.0)) throw std::invalid_argument(tag + "negative force limit");
    for (std::size_t j = 0; j < i; ++j) {
      const auto& o = phases[j];
      if (o.effector == ph.effector && o.t_start < ph.t_end && ph.t_start < o.t_end)
        throw std::invalid_argument(tag + "overlaps phase " + std::to_string(j) +
                                    " of the same effector");
    }
  }
}

const ContactValues* TimestepContacts::find(int effector) const {
  for (const auto& c : contacts) {
    if (c.effector == effector) return &c;
  }
  return nullptr;
}

double ResidualReport::worst() const { return std::max({dynamics, friction, kinematic, surface, zmp}); }

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

CentroidalState integrateStep(const CentroidalState& prev, const TimestepContacts& contacts,
                              const ContactPlan& plan) {
  if (!prev.allFinite()) throw std::invalid_argument("integrateStep: non-finite state");
  Vec3 force = Vec3::Zero();
  Vec3 moment = Vec3::Zero();
  for (const auto& c : contacts.contacts) {
    if (!c.f.allFinite() || !c.ell.allFinite() || !c.tau.allFinite())
      throw std::invalid_argument("integrateStep: non-finite contact values");
    force += c.f;
    moment += angularRate(c);
  }
  CentroidalState next;
  next.l = prev.l + plan.mass * plan.gravity * plan.dt + force * plan.dt;
  next.r = prev.r + next.l * (plan.dt / plan.mass);
  next.k = prev.k + moment * plan.dt;
  return next;
}

double frictionViolation(const Vec3& f, const ContactPhase& phase) {
  const Vec3 fc = phase.rotation.transpose() * f;
  const double mu_n = phase.friction * fc.z();
  double v = std::max({std::abs(fc.x()) - mu_n, std::abs(fc.y()) - mu_n, -fc.z(), 0.0});
  if (std::isfinite(phase.max_normal_force)) v = std::max(v, fc.z() - phase.max_normal_force);
  return v;
}

ResidualReport verifyTrajectory(const Trajectory& traj, const ContactPlan& plan, double tol) {
  if (traj.size() != static_cast<std::size_t>(plan.horizon))
    throw std::invalid_argument("verifyTrajectory: trajectory length " +
                                std::to_string(traj.size()) + " != horizon " +
                                std::to_string(plan.horizon));
  ResidualReport rep;
  rep.tolerance = tol;
  const CentroidalState* prev = &plan.h0;
  for (int t = 0; t < plan.horizon; ++t) {
    const auto& pt = traj[static_cast<std::size_t>(t)];
    const auto active = plan.activePhases(t);
    if (active.size() != pt.contacts.contacts.size())
      throw std::invalid_argument("verifyTrajectory: contact count mismatch at t=" +
                                  std::to_string(t));
    for (int idx : active) {
      const auto& ph = plan.phases[static_cast<std::size_t>(idx)];
      const ContactValues* c = pt.contacts.find(ph.effector);
      if (c == nullptr)
        throw std::invalid_argument("verifyTrajectory: effector " + std::to_string(ph.effector) +
                                    " missing at t=" + std::to_string(t));
      rep.friction = std::max(rep.friction, frictionViolation(c->f, ph));
      const Vec3 offset = c->p - pt.state.r;
      rep.kinematic = std::max(rep.kinematic, offset.cwiseAbs().maxCoeff() - plan.L_max);
      rep.surface = std::max(rep.surface, ph.surface.violation(c->p));
      if (ph.flat_foot) {
        const Vec2 below = ph.zmp.min - c->z;
        const Vec2 above = c->z - ph.zmp.max;
        rep.zmp = std::max({rep.zmp, below.maxCoeff(), above.maxCoeff()});
      }
      const Vec2 z = ph.flat_foot ? c->z : Vec2::Zero();
      const Vec3 ell = leverArm(c->p, pt.state.r, z, ph.rotation);
      rep.lever_arm = std::max(rep.lever_arm, (ell - c->ell).cwiseAbs().maxCoeff());
    }
    const CentroidalState expect = integrateStep(*prev, pt.contacts, plan);
    const double d = std::max({(expect.r - pt.state.r).cwiseAbs().maxCoeff(),
                               (expect.l - pt.state.l).cwiseAbs().maxCoeff(),
                               (expect.k - pt.state.k).cwiseAbs().maxCoeff()});
    if (!std::isfinite(d)) throw std::invalid_argument("verifyTrajectory: non-finite state");
    rep.dynamics = std::max(rep.dynamics, d);
    prev = &pt.state;
  }
  rep.kinematic = std::max(rep.kinematic, 0.0);
  rep.zmp = std::max(rep.zmp, 0.0);
  rep.feasible = rep.worst() <= tol;
  return rep;
}

}  // namespace centroidal
