#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "centroidal/bcd.hpp"
#include "support/fixtures.hpp"

using namespace centroidal;

namespace {

ContactPlan barePlan(int N, double mass) {
  ContactPlan plan;
  plan.horizon = N;
  plan.mass = mass;
  plan.dt = 0.01;
  return plan;
}

ContactValues pointContact(int e, const Vec3& f, const Vec3& ell) {
  ContactValues c;
  c.effector = e;
  c.f = f;
  c.ell = ell;
  c.p = ell;
  return c;
}

}  // namespace

TEST_CASE("skew of zero is zero") { CHECK(skew(Vec3::Zero()).isZero(0.0)); }

TEST_CASE("skew reproduces the cross product and antisymmetry") {
  std::mt19937 rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const Vec3 a(g(rng), g(rng), g(rng)), b(g(rng), g(rng), g(rng));
    CHECK((skew(a) * b - a.cross(b)).norm() <= 1e-14);
    CHECK((skew(a) + skew(a).transpose()).norm() == 0.0);
    // a x b = -b x a
    CHECK((skew(a) * b + skew(b) * a).norm() <= 1e-14);
  }
}

TEST_CASE("ballistic step") {
  const auto plan = barePlan(1, 1.0);
  CentroidalState h0;
  h0.k = Vec3(0.1, -0.2, 0.3);
  const auto h1 = integrateStep(h0, {}, plan);
  CHECK((h1.l - Vec3(0.0, 0.0, -0.0981)).norm() <= 1e-15);
  CHECK(h1.k == h0.k);
  CHECK((h1.r - h0.r - h1.l * 0.01).norm() <= 1e-15);
}

TEST_CASE("hover step keeps zero momentum") {
  const auto plan = barePlan(1, 1.0);
  TimestepContacts c{{pointContact(0, Vec3(0, 0, 9.81), Vec3(0, 0, -0.3))}};
  const auto h1 = integrateStep(CentroidalState{}, c, plan);
  CHECK(h1.l.norm() <= 1e-15);
  CHECK(h1.k.norm() <= 1e-15);
}

TEST_CASE("hand cross product moment") {
  const auto plan = barePlan(1, 1.0);
  TimestepContacts c{{pointContact(0, Vec3(0, 0, 5), Vec3(0.2, 0, -0.3))}};
  CHECK((angularRate(c.contacts[0]) - Vec3(0, -1.0, 0)).norm() <= 1e-15);
  const auto h1 = integrateStep(CentroidalState{}, c, plan);
  CHECK((h1.k - Vec3(0, -0.01, 0)).norm() <= 1e-15);
}

TEST_CASE("lever arm includes the tangent ZMP offset") {
  const Mat3 R = Eigen::AngleAxisd(0.3, Vec3::UnitX()).toRotationMatrix();
  const Vec3 ell = leverArm(Vec3(1, 2, 3), Vec3(0.5, 0.5, 0.5), Vec2(0.1, -0.2), R);
  CHECK((ell - (Vec3(0.5, 1.5, 2.5) + 0.1 * R.col(0) - 0.2 * R.col(1))).norm() <= 1e-15);
  CHECK(leverArm(Vec3(1, 2, 3), Vec3(1, 2, 3), Vec2::Zero(), R).isZero(0.0));
}

TEST_CASE("friction pyramid violation") {
  ContactPhase ph;
  ph.friction = 0.6;
  CHECK(frictionViolation(Vec3(10, 0, 1), ph) == doctest::Approx(9.4));
  CHECK(frictionViolation(Vec3(0.5, -0.5, 1), ph) == 0.0);
  CHECK(frictionViolation(Vec3(0, 0, -2), ph) == doctest::Approx(2.0));
  ph.rotation = Eigen::AngleAxisd(0.5, Vec3::UnitY()).toRotationMatrix();
  CHECK(frictionViolation(ph.rotation * Vec3(0.1, 0.2, 1.0), ph) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("polygon halfspaces contain the polygon and its plane only") {
  const auto H = polygonToHalfspaces({Vec3(1, 1, 0.2), Vec3(-1, 1, 0.2), Vec3(-1, -1, 0.2), Vec3(1, -1, 0.2)});
  CHECK(H.contains(Vec3(0.5, -0.5, 0.2), 1e-12));
  CHECK_FALSE(H.contains(Vec3(0.5, -0.5, 0.3), 1e-6));
  CHECK(H.violation(Vec3(1.5, 0, 0.2)) == doctest::Approx(0.5));
}

TEST_CASE("chained integration verifies with zero dynamics residual") {
  auto plan = testing::singleContactPlan(6);
  Trajectory traj;
  CentroidalState h = plan.h0;
  for (int t = 0; t < plan.horizon; ++t) {
    ContactValues c;
    c.f = Vec3(0.1 * t, 0.0, 9.0 + t);
    c.p = Vec3::Zero();
    TrajectoryPoint pt;
    pt.contacts.contacts.push_back(c);
    // r_t does not depend on ell, so a second pass settles ell = p - r_t.
    pt.state = integrateStep(h, pt.contacts, plan);
    pt.contacts.contacts[0].ell = c.p - pt.state.r;
    pt.state = integrateStep(h, pt.contacts, plan);
    h = pt.state;
    traj.push_back(pt);
  }
  const auto rep = verifyTrajectory(traj, plan, 1e-5);
  CHECK(rep.dynamics == 0.0);
  CHECK(rep.friction == 0.0);
  CHECK(rep.feasible);
}

TEST_CASE("verifier flags friction violations") {
  auto plan = testing::singleContactPlan(1, 1.0, 0.6);
  TrajectoryPoint pt;
  pt.contacts.contacts.push_back(pointContact(0, Vec3(10, 0, 1), Vec3::Zero()));
  pt.state = integrateStep(plan.h0, pt.contacts, plan);
  const auto rep = verifyTrajectory({pt}, plan, 1e-5);
  CHECK(rep.friction == doctest::Approx(9.4));
  CHECK_FALSE(rep.feasible);
}

TEST_CASE("verifier rejects length and contact mismatches") {
  auto plan = testing::singleContactPlan(2);
  CHECK_THROWS_AS(verifyTrajectory(Trajectory(1), plan, 1e-5), std::invalid_argument);
  CHECK_THROWS_AS(verifyTrajectory(Trajectory(2), plan, 1e-5), std::invalid_argument);
}

TEST_CASE("plan validation") {
  auto plan = testing::singleContactPlan(4);
  CHECK_NOTHROW(plan.validate());
  auto bad = plan;
  bad.phases[0].t_end = 5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = plan;
  bad.phases.push_back(plan.phases[0]);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = plan;
  bad.phases[0].nominal_position = Vec3(0, 0, 0.1);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = plan;
  bad.phases[0].friction = -0.1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK(plan.activePhase(0, 3) == 0);
  CHECK_FALSE(plan.activePhase(0, 4).has_value());
}

TEST_CASE("hover pipeline output is feasible and replays exactly") {
  const auto sc = testing::hoverScenario();
  const auto res = optimize(sc.plan, sc.refs, sc.bcd, sc.weights);
  CHECK(res.residuals.feasible);
  CHECK(res.residuals.worst() <= 1e-5);
  CentroidalState h = sc.plan.h0;
  for (const auto& pt : res.trajectory) {
    h = integrateStep(h, pt.contacts, sc.plan);
    CHECK((h.l - pt.state.l).norm() <= 1e-5);
    CHECK((h.k - pt.state.k).norm() <= 1e-5);
  }
}
