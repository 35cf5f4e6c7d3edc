#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

#include "centroidal/scenario.hpp"

namespace centroidal {

namespace {

constexpr int FL = 0, FR = 1, HL = 2, HR = 3;
constexpr const char* kNames[] = {"FL", "FR", "HL", "HR"};

struct Stance {
  int t_start, t_end;
  Vec3 foothold;
  Mat3 rotation;
};

struct Swing {
  std::vector<int> feet;
  int t_start, t_end;
};

int steps(double seconds, double dt) { return static_cast<int>(std::lround(seconds / dt)); }

Mat3 rotZ(double a) { return Eigen::AngleAxisd(a, Vec3::UnitZ()).toRotationMatrix(); }

std::vector<Vec3> patch(const Vec3& c, const Mat3& R, double half) {
  const Vec3 u = half * R.col(0), v = half * R.col(1);
  return {c + u + v, c - u + v, c - u - v, c + u - v};
}

void requirePositive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string("gait parameter ") + name + " must be positive");
}

/// Swing events for the stepping gaits, packed between the settle phases.
std::vector<Swing> steppingSchedule(GaitKind kind, const GaitParams& g, int N) {
  std::vector<Swing> out;
  if (kind == GaitKind::bound) {
    const int period = steps(g.bound_switch, g.dt);
    if (period < 1) throw std::invalid_argument("bound switch period shorter than one timestep");
    for (int t = 0, j = 0; t < N; t += period, ++j)
      out.push_back({j % 2 == 0 ? std::vector<int>{HL, HR} : std::vector<int>{FL, FR}, t, std::min(N, t + period)});
    return out;
  }
  std::vector<std::vector<int>> order;
  if (kind == GaitKind::trot)
    order = {{FL, HR}, {FR, HL}};
  else
    order = {{HL}, {FL}, {HR}, {FR}};
  const int settle = steps(g.settle, g.dt);
  const int swing = steps(g.swing, g.dt);
  const int ds = steps(g.double_support, g.dt);
  if (swing < 1) throw std::invalid_argument("swing shorter than one timestep");
  for (int t = settle, j = 0; t + swing + settle <= N; t += swing + ds, ++j)
    out.push_back({order[static_cast<std::size_t>(j) % order.size()], t, t + swing});
  return out;
}

}  // namespace

const char* gaitName(GaitKind kind) {
  switch (kind) {
    case GaitKind::stand: return "stand";
    case GaitKind::walk: return "walk";
    case GaitKind::trot: return "trot";
    case GaitKind::bound: return "bound";
    case GaitKind::jump_in_place: return "jump_in_place";
    case GaitKind::jump_forward: return "jump_forward";
    case GaitKind::jump_twist: return "jump_twist";
    case GaitKind::stairs_up: return "stairs_up";
    case GaitKind::stairs_down: return "stairs_down";
    case GaitKind::stones: return "stones";
  }
  return "?";
}

std::vector<GaitKind> allGaits() {
  return {GaitKind::stand,        GaitKind::walk,        GaitKind::trot,         GaitKind::bound,
          GaitKind::jump_in_place, GaitKind::jump_forward, GaitKind::jump_twist, GaitKind::stairs_up,
          GaitKind::stairs_down,  GaitKind::stones};
}

std::optional<GaitKind> gaitFromName(std::string_view name) {
  for (GaitKind k : allGaits())
    if (name == gaitName(k)) return k;
  return std::nullopt;
}

namespace {

using GaitField = double GaitParams::*;

const std::vector<std::pair<const char*, GaitField>>& gaitFields() {
  static const std::vector<std::pair<const char*, GaitField>> fields{
      {"duration", &GaitParams::duration},
      {"dt", &GaitParams::dt},
      {"mass", &GaitParams::mass},
      {"com_height", &GaitParams::com_height},
      {"half_length", &GaitParams::half_length},
      {"half_width", &GaitParams::half_width},
      {"L_max", &GaitParams::L_max},
      {"friction", &GaitParams::friction},
      {"patch", &GaitParams::patch},
      {"settle", &GaitParams::settle},
      {"stride", &GaitParams::stride},
      {"swing", &GaitParams::swing},
      {"double_support", &GaitParams::double_support},
      {"bound_switch", &GaitParams::bound_switch},
      {"pitch_amplitude", &GaitParams::pitch_amplitude},
      {"pitch_inertia", &GaitParams::pitch_inertia},
      {"yaw_inertia", &GaitParams::yaw_inertia},
      {"takeoff", &GaitParams::takeoff},
      {"flight", &GaitParams::flight},
      {"jump_distance", &GaitParams::jump_distance},
      {"twist_angle", &GaitParams::twist_angle},
      {"step_height", &GaitParams::step_height},
      {"step_run", &GaitParams::step_run},
      {"max_incline", &GaitParams::max_incline}};
  return fields;
}

}  // namespace

std::map<std::string, double> GaitParams::asMap() const {
  std::map<std::string, double> out;
  for (const auto& [name, field] : gaitFields()) out[name] = this->*field;
  return out;
}

GaitParams GaitParams::fromMap(const std::map<std::string, double>& values) {
  GaitParams g;
  for (const auto& [key, v] : values) {
    const auto& fields = gaitFields();
    auto it = std::find_if(fields.begin(), fields.end(), [&](const auto& f) { return key == f.first; });
    if (it == fields.end()) throw std::invalid_argument("unknown gait parameter '" + key + "'");
    g.*(it->second) = v;
  }
  return g;
}

ScenarioFile makeGait(GaitKind kind, const GaitParams& g) {
  requirePositive(g.duration, "duration");
  requirePositive(g.dt, "dt");
  requirePositive(g.mass, "mass");
  requirePositive(g.com_height, "com_height");
  requirePositive(g.L_max, "L_max");
  requirePositive(g.friction, "friction");
  requirePositive(g.patch, "patch");
  if (g.stride < 0.0 || g.jump_distance < 0.0 || g.step_height < 0.0 || g.settle < 0.0)
    throw std::invalid_argument("gait distances must be nonnegative");
  const double reach = std::max({g.half_length + g.stride + g.patch, g.half_width + g.patch,
                                 g.com_height + (kind == GaitKind::stairs_up || kind == GaitKind::stairs_down ? g.step_height : 0.0)});
  if (reach > g.L_max)
    throw std::invalid_argument("stride or step geometry exceeds the kinematic limit L_max");

  const int N = steps(g.duration, g.dt);
  if (N < 2) throw std::invalid_argument("duration shorter than two timesteps");

  ScenarioFile f;
  f.name = gaitName(kind);
  f.N = N;
  f.dt = g.dt;
  f.robot.mass = g.mass;
  f.robot.L_max = g.L_max;
  const Vec3 offsets[4] = {{g.half_length, g.half_width, -g.com_height},
                           {g.half_length, -g.half_width, -g.com_height},
                           {-g.half_length, g.half_width, -g.com_height},
                           {-g.half_length, -g.half_width, -g.com_height}};
  for (int e = 0; e < 4; ++e) f.robot.effectors.push_back({kNames[e], offsets[e]});
  const Vec3 r0(0.0, 0.0, g.com_height);
  f.initial_state.r = r0;
  f.generator = GeneratorInfo{gaitName(kind), g.asMap()};

  std::vector<std::vector<Stance>> stances(4);
  const bool jump = kind == GaitKind::jump_in_place || kind == GaitKind::jump_forward || kind == GaitKind::jump_twist;

  if (kind == GaitKind::stand) {
    for (int e = 0; e < 4; ++e) stances[static_cast<std::size_t>(e)].push_back({0, N, r0 + offsets[e], Mat3::Identity()});
  } else if (jump) {
    const int to = steps(g.takeoff, g.dt);
    const int land = to + steps(g.flight, g.dt);
    if (to < 1 || g.flight <= 0.0 || land >= N)
      throw std::invalid_argument("jump takeoff and flight must fit inside the horizon");
    const double d = kind == GaitKind::jump_forward ? g.jump_distance : 0.0;
    const double yaw = kind == GaitKind::jump_twist ? g.twist_angle : 0.0;
    const Mat3 Rl = rotZ(yaw);
    const Vec3 r1 = r0 + Vec3(d, 0.0, 0.0);
    for (int e = 0; e < 4; ++e) {
      stances[static_cast<std::size_t>(e)].push_back({0, to, r0 + offsets[e], Mat3::Identity()});
      stances[static_cast<std::size_t>(e)].push_back({land, N, r1 + Rl * offsets[e], Rl});
    }
    // Ballistic reference between the last stance step and the landing step.
    const int ta = to - 1, tb = land;
    const double T = (tb - ta) * g.dt;
    const double grav = 9.81;
    const double v0 = 0.5 * grav * T;
    const int ramp = std::min(steps(0.1, g.dt), ta);
    auto& refs = f.references;
    refs.com.push_back({0, r0});
    refs.linear_momentum.push_back({0, Vec3::Zero()});
    refs.angular_momentum.push_back({0, Vec3::Zero()});
    if (ramp > 0) {
      refs.com.push_back({ta - ramp, r0});
      refs.linear_momentum.push_back({ta - ramp, Vec3::Zero()});
      refs.angular_momentum.push_back({ta - ramp, Vec3::Zero()});
    }
    const Vec3 k_flight(0.0, 0.0, g.yaw_inertia * yaw / T);
    for (int t = ta; t <= tb; ++t) {
      const double s = (t - ta) * g.dt;
      refs.com.push_back({t, r0 + Vec3(d * s / T, 0.0, v0 * s - 0.5 * grav * s * s)});
      refs.linear_momentum.push_back({t, g.mass * Vec3(d / T, 0.0, v0 - grav * s)});
      refs.angular_momentum.push_back({t, k_flight});
    }
    const int after = std::min(tb + steps(0.1, g.dt), N - 1);
    if (after > tb) {
      refs.com.push_back({after, r1});
      refs.linear_momentum.push_back({after, Vec3::Zero()});
      refs.angular_momentum.push_back({after, Vec3::Zero()});
    }
  } else {
    const GaitKind pattern = kind == GaitKind::stairs_up || kind == GaitKind::stairs_down || kind == GaitKind::stones
                                 ? GaitKind::walk
                                 : kind;
    const auto swings = steppingSchedule(pattern, g, N);
    const double edge0 = g.half_length + 0.5 * g.stride;
    auto terrain = [&](double x) {
      if (kind != GaitKind::stairs_up && kind != GaitKind::stairs_down) return 0.0;
      if (x < edge0) return 0.0;
      const double rise = (1.0 + std::floor((x - edge0) / g.step_run)) * g.step_height;
      return kind == GaitKind::stairs_up ? rise : -rise;
    };
    auto tilt = [&](int e, int k) -> Mat3 {
      if (kind != GaitKind::stones || k == 0) return Mat3::Identity();
      const double angle = g.max_incline * static_cast<double>((k + e) % 4) / 3.0;
      const double sign = (k + e) % 2 == 0 ? 1.0 : -1.0;
      const Vec3 axis = (k % 2 == 0) ? Vec3::UnitX() : Vec3::UnitY();
      return Eigen::AngleAxisd(sign * angle, axis).toRotationMatrix();
    };
    for (int e = 0; e < 4; ++e) {
      int start = 0, k = 0;
      for (const auto& sw : swings) {
        if (std::find(sw.feet.begin(), sw.feet.end(), e) == sw.feet.end()) continue;
        const Vec3 base = r0 + offsets[e] + Vec3(k * g.stride, 0.0, 0.0);
        if (sw.t_start > start)
          stances[static_cast<std::size_t>(e)].push_back({start, sw.t_start, base + Vec3(0, 0, terrain(base.x())), tilt(e, k)});
        start = sw.t_end;
        ++k;
      }
      const Vec3 base = r0 + offsets[e] + Vec3(k * g.stride, 0.0, 0.0);
      if (start < N)
        stances[static_cast<std::size_t>(e)].push_back({start, N, base + Vec3(0, 0, terrain(base.x())), tilt(e, k)});
    }
    if (kind == GaitKind::bound) {
      const double period = 2.0 * g.bound_switch;
      f.references.inertia_scale = g.pitch_inertia;
      for (int t = 0; t < N; ++t)
        f.references.pitch.push_back(g.pitch_amplitude * std::sin(2.0 * std::numbers::pi * t * g.dt / period));
    }
  }

  for (int e = 0; e < 4; ++e)
    for (const auto& s : stances[static_cast<std::size_t>(e)]) {
      PhaseSpec ph;
      ph.effector = kNames[e];
      ph.t_start = s.t_start;
      ph.t_end = s.t_end;
      ph.vertices = patch(s.foothold, s.rotation, g.patch);
      ph.rotation = s.rotation;
      ph.friction = g.friction;
      ph.foothold = s.foothold;
      f.contacts.push_back(std::move(ph));
    }
  std::stable_sort(f.contacts.begin(), f.contacts.end(),
                   [](const PhaseSpec& a, const PhaseSpec& b) { return a.t_start < b.t_start; });
  return f;
}

}  // namespace centroidal
