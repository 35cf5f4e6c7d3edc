#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "centroidal/bcd.hpp"
#include "centroidal/cost.hpp"
#include "centroidal/model.hpp"

namespace centroidal {

inline constexpr int kScenarioSchemaVersion = 1;

struct EffectorSpec {
  std::string name;
  Vec3 nominal_offset = Vec3::Zero();  ///< foothold minus CoM in the nominal stance
  bool operator==(const EffectorSpec&) const = default;
};

struct RobotSpec {
  double mass = 2.5;
  Vec3 gravity = Vec3(0.0, 0.0, -9.81);
  double L_max = 0.32;
  std::vector<EffectorSpec> effectors;
  bool operator==(const RobotSpec&) const = default;
};

/// A stance phase as written in a scenario. The surface is either a convex
/// polygon (vertices) or explicit halfspaces.
struct PhaseSpec {
  std::string effector;
  int t_start = 0;
  int t_end = 0;
  std::vector<Vec3> vertices;
  std::optional<Halfspaces> halfspaces;
  Mat3 rotation = Mat3::Identity();
  double friction = 0.7;
  bool flat_foot = false;
  ZmpBounds zmp;
  /// Defaults to the vertex centroid.
  std::optional<Vec3> foothold;
  std::optional<double> max_normal_force;
  bool operator==(const PhaseSpec&) const = default;
};

struct Waypoint {
  int t = 0;
  Vec3 value = Vec3::Zero();
  bool operator==(const Waypoint&) const = default;
};

/// Inputs of the reference surrogate. Without CoM waypoints the CoM
/// reference interpolates the centroids of the stance configurations;
/// momentum references are zero unless waypoints or a pitch profile are given.
struct ReferenceSpec {
  std::vector<Waypoint> com;
  std::vector<Waypoint> linear_momentum;
  std::vector<Waypoint> angular_momentum;
  std::vector<double> pitch;  ///< per-timestep pitch [rad]; drives k^y
  double inertia_scale = 0.0;
  std::vector<double> tracking_scale;
  bool operator==(const ReferenceSpec&) const = default;
};

struct GeneratorInfo {
  std::string kind;
  std::map<std::string, double> params;
  bool operator==(const GeneratorInfo&) const = default;
};

struct ScenarioFile {
  int schema_version = kScenarioSchemaVersion;
  std::string name;
  RobotSpec robot;
  int N = 0;
  double dt = 0.01;
  CentroidalState initial_state;
  std::vector<PhaseSpec> contacts;
  ReferenceSpec references;
  CostWeights weights;
  BcdSettings bcd;
  std::optional<GeneratorInfo> generator;
  bool operator==(const ScenarioFile&) const = default;
};

struct Scenario {
  std::string name;
  ContactPlan plan;
  ReferenceSet refs;
  BcdSettings bcd;
  CostWeights weights;
  std::vector<std::string> effector_names;
};

/// Malformed or invalid scenario document. `path` names the offending field
/// (e.g. "contacts[3].window"); `line` is set for syntax errors.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(const std::string& message, std::string path = {}, int line = 0);
  const std::string& path() const { return path_; }
  int line() const { return line_; }

 private:
  std::string path_;
  int line_;
};

ScenarioFile parseScenario(std::string_view text);
std::string emitScenario(const ScenarioFile& file);

/// Converts a parsed document into a validated plan and references.
Scenario buildScenario(const ScenarioFile& file);
Scenario loadScenario(std::string_view text);
Scenario loadScenarioFile(const std::filesystem::path& path);
std::string readTextFile(const std::filesystem::path& path);

/// Reference trajectory from the plan and the reference inputs.
ReferenceSet makeReferences(const ContactPlan& plan, const ReferenceSpec& spec);

/// k^y_t = inertia_scale * (pitch_{t+1} - pitch_t) / dt; the last sample
/// repeats the previous difference.
std::vector<double> pitchReferenceToMomentum(const std::vector<double>& pitch, double inertia_scale,
                                             double dt);

enum class GaitKind {
  stand,
  walk,
  trot,
  bound,
  jump_in_place,
  jump_forward,
  jump_twist,
  stairs_up,
  stairs_down,
  stones
};

const char* gaitName(GaitKind kind);
std::optional<GaitKind> gaitFromName(std::string_view name);
std::vector<GaitKind> allGaits();

struct GaitParams {
  double duration = 3.0;  ///< [s]
  double dt = 0.01;
  double mass = 2.5;
  double com_height = 0.24;
  double half_length = 0.19;  ///< |x| of the nominal footholds
  double half_width = 0.15;
  double L_max = 0.32;
  double friction = 0.7;
  double patch = 0.03;          ///< half side of the square contact patches
  double settle = 0.3;          ///< all-feet stance at start and end [s]
  double stride = 0.06;         ///< foothold advance per swing [m]
  double swing = 0.2;           ///< walk/trot swing duration [s]
  double double_support = 0.05; ///< all-feet stance between swings [s]
  double bound_switch = 0.25;   ///< front/hind alternation period [s]
  double pitch_amplitude = 0.26;  ///< bound pitch oscillation [rad]
  double pitch_inertia = 0.03;  ///< body inertia about y [kg m^2]
  double yaw_inertia = 0.05;    ///< body inertia about z [kg m^2]
  double takeoff = 0.8;         ///< jump takeoff time [s]
  double flight = 0.3;          ///< jump flight duration [s]
  double jump_distance = 0.15;  ///< jump_forward displacement [m]
  double twist_angle = 0.4;     ///< jump_twist yaw [rad]
  double step_height = 0.06;    ///< stairs rise [m]
  double step_run = 0.2;        ///< stairs tread depth [m]
  double max_incline = 0.5236;  ///< stepping-stone tilt [rad]

  std::map<std::string, double> asMap() const;
  /// Defaults overridden by `values`. Throws std::invalid_argument on an
  /// unknown key.
  static GaitParams fromMap(const std::map<std::string, double>& values);
};

/// Generates a quadruped scenario (effectors FL, FR, HL, HR). Throws
/// std::invalid_argument when parameters are out of range or the stride
/// does not fit the kinematic limit.
ScenarioFile makeGait(GaitKind kind, const GaitParams& params = {});

}  // namespace centroidal
