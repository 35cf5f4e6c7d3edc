#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "centroidal/scenario.hpp"

using namespace centroidal;

namespace {

const char* kHover = R"({
  "schema_version": 1,
  "name": "hover",
  "robot": {
    "mass": 2.0,
    "L_max": 0.35,
    "effectors": [
      {"name": "a", "nominal_offset": [0.2, 0.15, -0.25]},
      {"name": "b", "nominal_offset": [0.2, -0.15, -0.25]},
      {"name": "c", "nominal_offset": [-0.2, 0.15, -0.25]},
      {"name": "d", "nominal_offset": [-0.2, -0.15, -0.25]}
    ]
  },
  "horizon": {"N": 20},
  "initial_state": {"r": [0, 0, 0.25]},
  "contacts": [
    {"effector": "a", "window": [0, 20], "surface": {"vertices": [[0.25, 0.2, 0], [0.15, 0.2, 0], [0.15, 0.1, 0], [0.25, 0.1, 0]]}},
    {"effector": "b", "window": [0, 20], "surface": {"vertices": [[0.25, -0.1, 0], [0.15, -0.1, 0], [0.15, -0.2, 0], [0.25, -0.2, 0]]}},
    {"effector": "c", "window": [0, 20], "surface": {"vertices": [[-0.15, 0.2, 0], [-0.25, 0.2, 0], [-0.25, 0.1, 0], [-0.15, 0.1, 0]]}},
    {"effector": "d", "window": [0, 20], "surface": {"vertices": [[-0.15, -0.1, 0], [-0.25, -0.1, 0], [-0.25, -0.2, 0], [-0.15, -0.2, 0]]}}
  ]
}
)";

std::string replaced(std::string s, const std::string& from, const std::string& to) {
  const auto pos = s.find(from);
  REQUIRE(pos != std::string::npos);
  return s.replace(pos, from.size(), to);
}

ScenarioError errorOf(const std::string& text) {
  try {
    loadScenario(text);
  } catch (const ScenarioError& e) {
    return e;
  }
  FAIL("document was accepted");
  return ScenarioError("");
}

std::vector<int> activeSet(const ContactPlan& plan, int t) {
  std::vector<int> out;
  for (int i : plan.activePhases(t)) out.push_back(plan.phases[static_cast<std::size_t>(i)].effector);
  return out;
}

}  // namespace

TEST_CASE("minimal hover document") {
  const auto sc = loadScenario(kHover);
  CHECK(sc.plan.n_effectors == 4);
  CHECK(sc.plan.phases.size() == 4);
  CHECK(sc.plan.dt == 0.01);
  CHECK(sc.plan.mass == 2.0);
  for (const auto& ph : sc.plan.phases) {
    CHECK(ph.t_start == 0);
    CHECK(ph.t_end == 20);
  }
  CHECK(sc.plan.phases[0].nominal_position.isApprox(Vec3(0.2, 0.15, 0.0)));
  CHECK(sc.refs.size() == 20);
  for (const auto& h : sc.refs.h_kin) {
    CHECK(h.r.isApprox(Vec3(0, 0, 0.25)));
    CHECK(h.l.isZero(0.0));
    CHECK(h.k.isZero(0.0));
  }
  CHECK(sc.effector_names == std::vector<std::string>{"a", "b", "c", "d"});
}

TEST_CASE("inverted window is rejected with its field path") {
  const auto e = errorOf(replaced(kHover, "\"window\": [0, 20], \"surface\": {\"vertices\": [[0.25, -0.1", "\"window\": [5, 3], \"surface\": {\"vertices\": [[0.25, -0.1"));
  CHECK(e.path() == "contacts[1].window");
}

TEST_CASE("diagnostics name the field and line") {
  SUBCASE("syntax error carries a line number") {
    const auto e = errorOf(replaced(kHover, "\"horizon\": {\"N\": 20},", "\"horizon\": {\"N\": 20}"));
    CHECK(e.line() == 15);
  }
  SUBCASE("unknown field") {
    const auto e = errorOf(replaced(kHover, "\"mass\": 2.0,", "\"mass\": 2.0, \"colour\": 1,"));
    CHECK(e.path() == "robot.colour");
    CHECK(e.line() == 5);
  }
  SUBCASE("wrong type") {
    const auto e = errorOf(replaced(kHover, "\"N\": 20", "\"N\": \"twenty\""));
    CHECK(e.path() == "horizon.N");
    CHECK(std::string(e.what()).find("expected an integer") != std::string::npos);
  }
  SUBCASE("undeclared effector") {
    const auto e = errorOf(replaced(kHover, "{\"effector\": \"d\"", "{\"effector\": \"e\""));
    CHECK(e.path() == "contacts[3].effector");
  }
  SUBCASE("overlapping phases") {
    const auto e = errorOf(replaced(kHover, "{\"effector\": \"d\"", "{\"effector\": \"a\""));
    CHECK(e.path() == "contacts");
  }
  SUBCASE("unsupported schema") {
    const auto e = errorOf(replaced(kHover, "\"schema_version\": 1", "\"schema_version\": 2"));
    CHECK(e.path() == "schema_version");
  }
  SUBCASE("missing horizon") {
    const auto e = errorOf(replaced(kHover, "\"horizon\": {\"N\": 20},", ""));
    CHECK(e.path() == "horizon");
  }
}

TEST_CASE("emit then parse round-trips every gait") {
  for (GaitKind k : allGaits()) {
    CAPTURE(gaitName(k));
    const auto f = makeGait(k);
    CHECK(parseScenario(emitScenario(f)) == f);
  }
}

TEST_CASE("emit then parse round-trips optional fields") {
  auto f = parseScenario(kHover);
  f.contacts[0].flat_foot = true;
  f.contacts[0].zmp = {Vec2(-0.01, -0.02), Vec2(0.01, 0.02)};
  f.contacts[0].max_normal_force = 40.0;
  f.contacts[1].halfspaces = polygonToHalfspaces(f.contacts[1].vertices);
  f.contacts[1].vertices.clear();
  f.contacts[1].foothold = Vec3(0.2, -0.15, 0.0);
  f.contacts[2].rotation = Eigen::AngleAxisd(0.1, Vec3::UnitY()).toRotationMatrix();
  f.references.com = {{0, Vec3(0, 0, 0.25)}, {19, Vec3(0.1, 0, 0.25)}};
  f.references.tracking_scale.assign(20, 2.0);
  f.weights.track_k = Vec3(1, 2, 3);
  f.bcd.alpha = 10.0;
  f.bcd.solver.max_iterations = 5000;
  f.generator = GeneratorInfo{"custom", {{"x", 1.5}}};
  CHECK(parseScenario(emitScenario(f)) == f);
}

TEST_CASE("shipped scenarios load and match their generator") {
  const std::filesystem::path dir = CENTROIDAL_SCENARIO_DIR;
  int count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    CAPTURE(entry.path().string());
    const auto text = readTextFile(entry.path());
    const auto file = parseScenario(text);
    CHECK_NOTHROW(buildScenario(file));
    REQUIRE(file.generator.has_value());
    const auto kind = gaitFromName(file.generator->kind);
    REQUIRE(kind.has_value());
    CHECK(makeGait(*kind, GaitParams::fromMap(file.generator->params)) == file);
    ++count;
  }
  CHECK(count == 10);
}

TEST_CASE("stairs rises are stored as surface offsets") {
  for (double fraction : {0.125, 0.25, 0.35}) {
    GaitParams g;
    g.step_height = fraction * g.com_height;
    g.L_max = 0.34;
    for (GaitKind k : {GaitKind::stairs_up, GaitKind::stairs_down}) {
      const auto sc = loadScenario(emitScenario(makeGait(k, g)));
      const double sign = k == GaitKind::stairs_up ? 1.0 : -1.0;
      bool raised = false;
      for (const auto& ph : sc.plan.phases) {
        const double h = ph.nominal_position.z();
        const double steps = sign * h / g.step_height;
        CHECK(steps == doctest::Approx(std::round(steps)).epsilon(1e-12));
        CHECK(ph.surface.contains(ph.nominal_position, 1e-12));
        CHECK_FALSE(ph.surface.contains(ph.nominal_position - Vec3(0, 0, h + 0.01), 1e-6));
        raised = raised || std::abs(h) > 0.0;
      }
      CHECK(raised);
    }
  }
}

TEST_CASE("bound alternates front and hind pairs every 25 steps") {
  const auto sc = buildScenario(makeGait(GaitKind::bound));
  REQUIRE(sc.plan.horizon == 300);
  const std::vector<int> front{0, 1}, hind{2, 3};
  for (int t = 0; t < 300; ++t) CHECK(activeSet(sc.plan, t) == ((t / 25) % 2 == 0 ? front : hind));
}

TEST_CASE("stand has one full-horizon phase per effector") {
  const auto sc = buildScenario(makeGait(GaitKind::stand));
  REQUIRE(sc.plan.phases.size() == 4);
  for (const auto& ph : sc.plan.phases) {
    CHECK(ph.t_start == 0);
    CHECK(ph.t_end == sc.plan.horizon);
  }
}

TEST_CASE("stepping gaits keep two feet down and validate") {
  for (GaitKind k : allGaits()) {
    CAPTURE(gaitName(k));
    const auto sc = buildScenario(makeGait(k));
    CHECK_NOTHROW(sc.plan.validate());
    const bool jump = k == GaitKind::jump_in_place || k == GaitKind::jump_forward || k == GaitKind::jump_twist;
    for (int t = 0; t < sc.plan.horizon; ++t)
      if (!jump) CHECK(sc.plan.activePhases(t).size() >= 2);
  }
}

TEST_CASE("jump flight phase accepts ballistic momentum") {
  const auto sc = buildScenario(makeGait(GaitKind::jump_in_place));
  const auto& plan = sc.plan;
  int takeoff = -1, landing = -1;
  for (int t = 0; t < plan.horizon; ++t)
    if (plan.activePhases(t).empty()) {
      if (takeoff < 0) takeoff = t;
      landing = t + 1;
    }
  REQUIRE(takeoff > 0);
  const int flight = landing - takeoff;
  CHECK(flight == 30);
  // Launch with the momentum that returns the CoM to its start height.
  const double launch = plan.mass * 9.81 * plan.dt * flight / 2.0;
  Trajectory traj;
  CentroidalState h = plan.h0;
  for (int t = 0; t < plan.horizon; ++t) {
    TrajectoryPoint pt;
    const auto active = plan.activePhases(t);
    double total = plan.mass * 9.81;
    if (t == takeoff - 1) total += launch / plan.dt;
    if (t == landing) total -= h.l.z() / plan.dt;
    for (int i : active) {
      ContactValues c;
      c.effector = plan.phases[static_cast<std::size_t>(i)].effector;
      c.p = plan.phases[static_cast<std::size_t>(i)].nominal_position;
      c.f = Vec3(0, 0, total / static_cast<double>(active.size()));
      pt.contacts.contacts.push_back(c);
    }
    pt.state = integrateStep(h, pt.contacts, plan);
    for (auto& c : pt.contacts.contacts) c.ell = c.p - pt.state.r;
    pt.state = integrateStep(h, pt.contacts, plan);
    if (active.empty()) {
      const Vec3 ballistic = Vec3(0, 0, launch) + plan.mass * plan.gravity * plan.dt * (t - takeoff + 1);
      CHECK((pt.state.l - ballistic).norm() <= 1e-12);
    }
    h = pt.state;
    traj.push_back(pt);
  }
  const auto rep = verifyTrajectory(traj, plan, 1e-5);
  CHECK(rep.dynamics == 0.0);
  CHECK(rep.feasible);
}

TEST_CASE("stride beyond the kinematic limit is rejected") {
  GaitParams g;
  g.stride = 0.2;
  CHECK_THROWS_AS(makeGait(GaitKind::walk, g), std::invalid_argument);
}

TEST_CASE("pitch to momentum") {
  const double dt = 0.01;
  SUBCASE("constant pitch") {
    for (double k : pitchReferenceToMomentum(std::vector<double>(50, 0.2), 1.0, dt)) CHECK(k == 0.0);
  }
  SUBCASE("ramp") {
    std::vector<double> pitch;
    for (int t = 0; t <= 100; ++t) pitch.push_back(0.26 * t / 100.0);
    for (double k : pitchReferenceToMomentum(pitch, 1.0, dt)) CHECK(k == doctest::Approx(0.26).epsilon(1e-12));
  }
  SUBCASE("sinusoid leads by a quarter period") {
    const double A = 15.0 * std::numbers::pi / 180.0, I = 0.03, period = 0.5;
    const double w = 2.0 * std::numbers::pi / period;
    std::vector<double> pitch;
    for (int t = 0; t < 300; ++t) pitch.push_back(A * std::sin(w * t * dt));
    const auto k = pitchReferenceToMomentum(pitch, I, dt);
    // Forward differences sample the derivative at the half step.
    const double gain = std::sin(0.5 * w * dt) / (0.5 * w * dt);
    for (int t = 0; t + 1 < 300; ++t)
      CHECK(k[static_cast<std::size_t>(t)] ==
            doctest::Approx(I * A * w * gain * std::cos(w * (t + 0.5) * dt)).epsilon(1e-9).scale(I * A * w));
  }
}

TEST_CASE("bound references carry the pitch-derived momentum") {
  const auto f = makeGait(GaitKind::bound);
  const auto sc = buildScenario(f);
  const auto ky = pitchReferenceToMomentum(f.references.pitch, f.references.inertia_scale, f.dt);
  for (int t = 0; t < sc.plan.horizon; ++t) CHECK(sc.refs.h_kin[static_cast<std::size_t>(t)].k.y() == ky[static_cast<std::size_t>(t)]);
}
