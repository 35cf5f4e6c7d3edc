#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "centroidal/bcd.hpp"
#include "support/fixtures.hpp"

using namespace centroidal;

TEST_CASE("consensus metric examples") {
  const Eigen::VectorXd a = Eigen::VectorXd::LinSpaced(12, -1.0, 1.0);
  CHECK(consensusMetric(a, a, 4) == 0.0);
  CHECK(consensusMetric(a + Eigen::VectorXd::Ones(12), a, 4) == doctest::Approx(3.0));
  Eigen::VectorXd b = Eigen::VectorXd::Zero(300);
  b(17) = 1e-3;
  const double v = consensusMetric(b, Eigen::VectorXd::Zero(300), 100);
  CHECK(v == doctest::Approx(1e-8));
  CHECK(v <= BcdSettings{}.eps_f);
  CHECK_THROWS_AS(consensusMetric(a, b, 4), std::invalid_argument);
}

TEST_CASE("settings validation") {
  BcdSettings s;
  CHECK_NOTHROW(s.validate());
  s.alpha = 1.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = {};
  s.L0_force = -1.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = {};
  s.max_outer_iterations = 0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("hover converges at the first check with an even force split") {
  const auto sc = testing::hoverScenario();
  const auto res = optimize(sc.plan, sc.refs, sc.bcd, testing::hoverWeights());
  CHECK(res.converged);
  CHECK(res.records.size() == 1);
  const double mg = sc.plan.mass * 9.81;
  for (const auto& pt : res.trajectory) {
    double fz = 0.0;
    for (const auto& c : pt.contacts.contacts) {
      fz += c.f.z();
      CHECK(c.f.z() == doctest::Approx(mg / 4).epsilon(1e-3));
    }
    CHECK(std::abs(fz - mg) <= 1e-6);
  }
}

TEST_CASE("every force block is feasible and eps_f decreases") {
  const auto sc = buildScenario(makeGait(GaitKind::walk, {}));
  BcdSettings s = sc.bcd;
  s.eps_f = 0.0;
  s.max_outer_iterations = 4;
  const auto res = optimize(sc.plan, sc.refs, s, sc.weights);
  REQUIRE(res.records.size() == 4);
  for (const auto& r : res.records) {
    CHECK(r.force_residuals.dynamics <= 1e-5);
    CHECK(r.force_residuals.friction <= 1e-5);
    CHECK(r.force_residuals.kinematic <= 1e-5);
    CHECK(r.eps_f_value >= 0.0);
  }
  for (std::size_t i = 2; i < res.records.size(); ++i)
    CHECK(res.records[i].eps_f_value <= res.records[i - 1].eps_f_value);
  CHECK(res.residuals.feasible);
  CHECK_FALSE(res.converged);
}

TEST_CASE("proximal weights follow L0 alpha^k and respect the cap") {
  const auto sc = testing::hoverScenario(6);
  BcdSettings s = sc.bcd;
  s.eps_f = 0.0;
  s.max_outer_iterations = 5;
  s.L0_force = 3.0;
  s.L0_contact = 7.0;
  s.alpha = 10.0;
  const auto res = optimize(sc.plan, sc.refs, s, sc.weights);
  REQUIRE(res.records.size() == 5);
  CHECK(res.records[0].L_force == 0.0);
  for (int k = 1; k <= 5; ++k) {
    const auto& r = res.records[static_cast<std::size_t>(k - 1)];
    if (k > 1) CHECK(r.L_force == 3.0 * std::pow(10.0, k - 1));
    CHECK(r.L_contact == 7.0 * std::pow(10.0, k - 1));
    CHECK_FALSE(r.L_capped);
  }
  CHECK(res.final_L_force == 3.0 * std::pow(10.0, 5));

  s.L0_force = s.L0_contact = 1e6;
  s.alpha = 100.0;
  s.L_cap = 1e12;
  const auto capped = optimize(sc.plan, sc.refs, s, sc.weights);
  CHECK(capped.records[3].L_capped);
  CHECK(capped.records[4].L_contact == 1e12);
  CHECK(capped.final_L_force == 1e12);
}

TEST_CASE("zero threshold forces the iteration cap") {
  const auto sc = testing::hoverScenario();
  BcdSettings s = sc.bcd;
  s.eps_f = 0.0;
  s.max_outer_iterations = 3;
  const auto res = optimize(sc.plan, sc.refs, s, sc.weights);
  CHECK_FALSE(res.converged);
  CHECK(res.records.size() == 3);
  CHECK(res.residuals.feasible);
}

TEST_CASE("identical inputs give identical records") {
  const auto sc = buildScenario(makeGait(GaitKind::trot, {}));
  const auto a = optimize(sc.plan, sc.refs, sc.bcd, sc.weights);
  const auto b = optimize(sc.plan, sc.refs, sc.bcd, sc.weights);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].eps_f_value == b.records[i].eps_f_value);
    CHECK(a.records[i].original_cost == b.records[i].original_cost);
    CHECK(a.records[i].force_iterations == b.records[i].force_iterations);
    CHECK(a.records[i].contact_iterations == b.records[i].contact_iterations);
  }
  CHECK(a.final_cost == b.final_cost);
}

TEST_CASE("callbacks see every iteration and the final force block") {
  const auto sc = testing::hoverScenario();
  BcdSettings s = sc.bcd;
  s.eps_f = 0.0;
  s.max_outer_iterations = 2;
  int iterations = 0, force = 0, contact = 0, final_tag = 0;
  BcdCallbacks cb;
  cb.on_iteration = [&](const BcdIterationRecord&) { ++iterations; };
  cb.on_qp = [&](Block b, int tag, const SparseQP&) {
    (b == Block::force ? force : contact)++;
    if (tag == 0) ++final_tag;
  };
  optimize(sc.plan, sc.refs, s, sc.weights, cb);
  CHECK(iterations == 2);
  CHECK(force == 3);
  CHECK(contact == 2);
  CHECK(final_tag == 1);
}

TEST_CASE("infeasible force block names the block and iteration") {
  auto plan = testing::singleContactPlan(20, 1.0, 0.0);
  plan.h0.l = Vec3(3.0, 0.0, 0.0);
  const auto refs = testing::constantRefs(plan);
  try {
    optimize(plan, refs, BcdSettings{});
    FAIL("expected BcdError");
  } catch (const BcdError& e) {
    CHECK(e.block() == Block::force);
    CHECK(e.iteration() == 1);
    CHECK(e.status() == QpStatus::primal_infeasible);
  }
}
