#include "centroidal/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <iterator>
#include <set>
#include <sstream>

#include <json.hpp>

namespace centroidal {

using json = nlohmann::ordered_json;

ScenarioError::ScenarioError(const std::string& message, std::string path, int line)
    : std::runtime_error([&] {
        std::string s;
        if (line > 0) s += "line " + std::to_string(line) + ": ";
        if (!path.empty()) s += path + ": ";
        return s + message;
      }()),
      path_(std::move(path)),
      line_(line) {}

namespace {

// ---------------------------------------------------------------------------
// Source positions. Only computed when a schema error needs a line number.

int lineAt(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

struct CountingIterator {
  using iterator_category = std::input_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char*;
  using reference = const char&;

  const char* p = nullptr;
  const char* base = nullptr;
  std::size_t* furthest = nullptr;

  reference operator*() const {
    const auto off = static_cast<std::size_t>(p - base) + 1;
    if (off > *furthest) *furthest = off;
    return *p;
  }
  CountingIterator& operator++() {
    ++p;
    return *this;
  }
  CountingIterator operator++(int) {
    auto c = *this;
    ++p;
    return c;
  }
  bool operator==(const CountingIterator& o) const { return p == o.p; }
  bool operator!=(const CountingIterator& o) const { return p != o.p; }
};

class LineIndex : public nlohmann::json_sax<json> {
 public:
  LineIndex(std::string_view text, const std::size_t* pos) : text_(text), pos_(pos) {}

  bool null() override { return scalar(); }
  bool boolean(bool) override { return scalar(); }
  bool number_integer(number_integer_t) override { return scalar(); }
  bool number_unsigned(number_unsigned_t) override { return scalar(); }
  bool number_float(number_float_t, const string_t&) override { return scalar(); }
  bool string(string_t&) override { return scalar(); }
  bool binary(binary_t&) override { return scalar(); }
  bool start_object(std::size_t) override {
    record();
    stack_.push_back({false, 0, {}});
    return true;
  }
  bool key(string_t& k) override {
    stack_.back().key = k;
    return true;
  }
  bool end_object() override {
    stack_.pop_back();
    return advance();
  }
  bool start_array(std::size_t) override {
    record();
    stack_.push_back({true, 0, {}});
    return true;
  }
  bool end_array() override {
    stack_.pop_back();
    return advance();
  }
  bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception&) override {
    return false;
  }

  int lineOf(std::string path) const {
    while (true) {
      if (auto it = lines_.find(path); it != lines_.end()) return it->second;
      if (path.empty()) return 0;
      const auto cut = path.find_last_of(".[");
      path = cut == std::string::npos ? std::string() : path.substr(0, cut);
    }
  }

 private:
  struct Frame {
    bool array;
    int index;
    std::string key;
  };

  std::string currentPath() const {
    std::string s;
    for (const auto& f : stack_) {
      if (f.array) {
        s += "[" + std::to_string(f.index) + "]";
      } else {
        if (!s.empty()) s += ".";
        s += f.key;
      }
    }
    return s;
  }
  void record() { lines_.emplace(currentPath(), lineAt(text_, *pos_)); }
  bool advance() {
    if (!stack_.empty() && stack_.back().array) ++stack_.back().index;
    return true;
  }
  bool scalar() {
    record();
    return advance();
  }

  std::string_view text_;
  const std::size_t* pos_;
  std::vector<Frame> stack_;
  std::map<std::string, int> lines_;
};

int lineForPath(std::string_view text, const std::string& path) {
  std::size_t furthest = 0;
  CountingIterator first{text.data(), text.data(), &furthest};
  CountingIterator last{text.data() + text.size(), text.data(), &furthest};
  LineIndex index(text, &furthest);
  json::sax_parse(first, last, &index);
  return index.lineOf(path);
}

// ---------------------------------------------------------------------------
// Schema reading

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}
std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ScenarioError(message, path);
}

void requireObject(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(path, "expected an object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || item.key() == a;
    if (!ok) fail(join(path, item.key()), "unknown field");
  }
}

const json* optionalField(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

const json& field(const json& j, const char* key, const std::string& path) {
  const json* f = optionalField(j, key);
  if (!f) fail(join(path, key), "missing required field");
  return *f;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "expected a finite number");
  return v;
}

int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

bool boolean(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected true or false");
  return j.get<bool>();
}

std::string text(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

template <int Size>
Eigen::Matrix<double, Size, 1> vec(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != Size)
    fail(path, "expected an array of " + std::to_string(Size) + " numbers");
  Eigen::Matrix<double, Size, 1> v;
  for (int i = 0; i < Size; ++i) v(i) = number(j[static_cast<std::size_t>(i)], at(path, static_cast<std::size_t>(i)));
  return v;
}

Mat3 mat3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) fail(path, "expected 3 rows of 3 numbers");
  Mat3 m;
  for (std::size_t i = 0; i < 3; ++i) m.row(static_cast<int>(i)) = vec<3>(j[i], at(path, i)).transpose();
  return m;
}

std::vector<double> numbers(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> v;
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(number(j[i], at(path, i)));
  return v;
}

template <int Size>
void readVec(const json& obj, const char* key, const std::string& path, Eigen::Matrix<double, Size, 1>& out) {
  if (const json* f = optionalField(obj, key)) out = vec<Size>(*f, join(path, key));
}
void readNumber(const json& obj, const char* key, const std::string& path, double& out) {
  if (const json* f = optionalField(obj, key)) out = number(*f, join(path, key));
}
void readInt(const json& obj, const char* key, const std::string& path, int& out) {
  if (const json* f = optionalField(obj, key)) out = integer(*f, join(path, key));
}
void readBool(const json& obj, const char* key, const std::string& path, bool& out) {
  if (const json* f = optionalField(obj, key)) out = boolean(*f, join(path, key));
}

std::vector<Waypoint> waypoints(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of waypoints");
  std::vector<Waypoint> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = at(path, i);
    requireObject(j[i], p, {"t", "value"});
    out.push_back({integer(field(j[i], "t", p), join(p, "t")), vec<3>(field(j[i], "value", p), join(p, "value"))});
  }
  return out;
}

CentroidalState readState(const json& j, const std::string& path) {
  requireObject(j, path, {"r", "l", "k"});
  CentroidalState h;
  readVec(j, "r", path, h.r);
  readVec(j, "l", path, h.l);
  readVec(j, "k", path, h.k);
  return h;
}

RobotSpec readRobot(const json& j, const std::string& path) {
  requireObject(j, path, {"mass", "gravity", "L_max", "effectors"});
  RobotSpec r;
  r.mass = number(field(j, "mass", path), join(path, "mass"));
  readVec(j, "gravity", path, r.gravity);
  r.L_max = number(field(j, "L_max", path), join(path, "L_max"));
  const std::string ep = join(path, "effectors");
  const json& effs = field(j, "effectors", path);
  if (!effs.is_array() || effs.empty()) fail(ep, "expected a non-empty array of effectors");
  for (std::size_t i = 0; i < effs.size(); ++i) {
    const std::string p = at(ep, i);
    requireObject(effs[i], p, {"name", "nominal_offset"});
    r.effectors.push_back({text(field(effs[i], "name", p), join(p, "name")),
                           vec<3>(field(effs[i], "nominal_offset", p), join(p, "nominal_offset"))});
  }
  return r;
}

PhaseSpec readPhase(const json& j, const std::string& path) {
  requireObject(j, path, {"effector", "window", "surface", "rotation", "friction", "flat_foot", "zmp",
                          "foothold", "max_normal_force"});
  PhaseSpec ph;
  ph.effector = text(field(j, "effector", path), join(path, "effector"));
  const std::string wp = join(path, "window");
  const json& w = field(j, "window", path);
  if (!w.is_array() || w.size() != 2) fail(wp, "expected [t_start, t_end]");
  ph.t_start = integer(w[0], at(wp, 0));
  ph.t_end = integer(w[1], at(wp, 1));

  const std::string sp = join(path, "surface");
  const json& s = field(j, "surface", path);
  requireObject(s, sp, {"vertices", "halfspaces"});
  const json* verts = optionalField(s, "vertices");
  const json* hs = optionalField(s, "halfspaces");
  if ((verts != nullptr) == (hs != nullptr)) fail(sp, "give exactly one of vertices or halfspaces");
  if (verts) {
    const std::string vp = join(sp, "vertices");
    if (!verts->is_array() || verts->empty()) fail(vp, "expected a non-empty array of points");
    for (std::size_t i = 0; i < verts->size(); ++i) ph.vertices.push_back(vec<3>((*verts)[i], at(vp, i)));
  } else {
    const std::string hp = join(sp, "halfspaces");
    requireObject(*hs, hp, {"A", "b"});
    const json& A = field(*hs, "A", hp);
    const std::vector<double> b = numbers(field(*hs, "b", hp), join(hp, "b"));
    if (!A.is_array() || A.size() != b.size() || b.empty())
      fail(join(hp, "A"), "expected one row of 3 numbers per entry of b");
    Halfspaces h;
    h.A.resize(static_cast<Eigen::Index>(b.size()), 3);
    h.b = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
    for (std::size_t i = 0; i < b.size(); ++i)
      h.A.row(static_cast<Eigen::Index>(i)) = vec<3>(A[i], at(join(hp, "A"), i)).transpose();
    ph.halfspaces = std::move(h);
  }
  if (const json* r = optionalField(j, "rotation")) ph.rotation = mat3(*r, join(path, "rotation"));
  readNumber(j, "friction", path, ph.friction);
  readBool(j, "flat_foot", path, ph.flat_foot);
  if (const json* z = optionalField(j, "zmp")) {
    const std::string zp = join(path, "zmp");
    requireObject(*z, zp, {"min", "max"});
    readVec(*z, "min", zp, ph.zmp.min);
    readVec(*z, "max", zp, ph.zmp.max);
  }
  if (const json* f = optionalField(j, "foothold")) ph.foothold = vec<3>(*f, join(path, "foothold"));
  if (const json* f = optionalField(j, "max_normal_force"))
    ph.max_normal_force = number(*f, join(path, "max_normal_force"));
  return ph;
}

ReferenceSpec readReferences(const json& j, const std::string& path) {
  requireObject(j, path, {"com", "linear_momentum", "angular_momentum", "pitch", "inertia_scale",
                          "tracking_scale"});
  ReferenceSpec r;
  if (const json* f = optionalField(j, "com")) r.com = waypoints(*f, join(path, "com"));
  if (const json* f = optionalField(j, "linear_momentum"))
    r.linear_momentum = waypoints(*f, join(path, "linear_momentum"));
  if (const json* f = optionalField(j, "angular_momentum"))
    r.angular_momentum = waypoints(*f, join(path, "angular_momentum"));
  if (const json* f = optionalField(j, "pitch")) r.pitch = numbers(*f, join(path, "pitch"));
  readNumber(j, "inertia_scale", path, r.inertia_scale);
  if (const json* f = optionalField(j, "tracking_scale"))
    r.tracking_scale = numbers(*f, join(path, "tracking_scale"));
  return r;
}

#define CENTROIDAL_WEIGHT_FIELDS(X)                                                          \
  X(run_r) X(run_l) X(run_k) X(run_f) X(run_tau) X(run_z) X(run_p) X(track_r) X(track_l) \
      X(track_k) X(terminal_r) X(terminal_l) X(terminal_k)

CostWeights readWeights(const json& j, const std::string& path) {
  requireObject(j, path, {"run_r", "run_l", "run_k", "run_f", "run_tau", "run_z", "run_p", "track_r",
                          "track_l", "track_k", "terminal_r", "terminal_l", "terminal_k"});
  CostWeights w;
#define X(name) readVec(j, #name, path, w.name);
  CENTROIDAL_WEIGHT_FIELDS(X)
#undef X
  return w;
}

SolverSettings readSolver(const json& j, const std::string& path) {
  requireObject(j, path, {"eps_abs", "eps_rel", "eps_prim_inf", "eps_dual_inf", "polish",
                          "scaled_termination", "adaptive_penalty", "check_termination_every",
                          "max_iterations", "rho", "sigma", "relaxation", "scaling_iterations",
                          "polish_refine_iterations", "polish_delta"});
  SolverSettings s;
  readNumber(j, "eps_abs", path, s.eps_abs);
  readNumber(j, "eps_rel", path, s.eps_rel);
  readNumber(j, "eps_prim_inf", path, s.eps_prim_inf);
  readNumber(j, "eps_dual_inf", path, s.eps_dual_inf);
  readBool(j, "polish", path, s.polish);
  readBool(j, "scaled_termination", path, s.scaled_termination);
  readBool(j, "adaptive_penalty", path, s.adaptive_penalty);
  readInt(j, "check_termination_every", path, s.check_termination_every);
  readInt(j, "max_iterations", path, s.max_iterations);
  readNumber(j, "rho", path, s.rho);
  readNumber(j, "sigma", path, s.sigma);
  readNumber(j, "relaxation", path, s.relaxation);
  readInt(j, "scaling_iterations", path, s.scaling_iterations);
  readInt(j, "polish_refine_iterations", path, s.polish_refine_iterations);
  readNumber(j, "polish_delta", path, s.polish_delta);
  return s;
}

BcdSettings readBcd(const json& j, const std::string& path) {
  requireObject(j, path, {"L0_force", "L0_contact", "alpha", "eps_f", "max_outer_iterations", "L_cap",
                          "solver"});
  BcdSettings b;
  readNumber(j, "L0_force", path, b.L0_force);
  readNumber(j, "L0_contact", path, b.L0_contact);
  readNumber(j, "alpha", path, b.alpha);
  readNumber(j, "eps_f", path, b.eps_f);
  readInt(j, "max_outer_iterations", path, b.max_outer_iterations);
  readNumber(j, "L_cap", path, b.L_cap);
  if (const json* s = optionalField(j, "solver")) b.solver = readSolver(*s, join(path, "solver"));
  return b;
}

ScenarioFile readDocument(const json& doc) {
  requireObject(doc, "", {"schema_version", "name", "robot", "horizon", "initial_state", "contacts",
                          "references", "weights", "bcd", "generator"});
  ScenarioFile f;
  f.schema_version = integer(field(doc, "schema_version", ""), "schema_version");
  if (f.schema_version != kScenarioSchemaVersion)
    fail("schema_version", "unsupported schema version " + std::to_string(f.schema_version));
  if (const json* n = optionalField(doc, "name")) f.name = text(*n, "name");
  f.robot = readRobot(field(doc, "robot", ""), "robot");
  const json& hz = field(doc, "horizon", "");
  requireObject(hz, "horizon", {"N", "dt"});
  f.N = integer(field(hz, "N", "horizon"), "horizon.N");
  readNumber(hz, "dt", "horizon", f.dt);
  if (const json* h = optionalField(doc, "initial_state")) f.initial_state = readState(*h, "initial_state");
  const json& cs = field(doc, "contacts", "");
  if (!cs.is_array()) fail("contacts", "expected an array of phases");
  for (std::size_t i = 0; i < cs.size(); ++i) f.contacts.push_back(readPhase(cs[i], at("contacts", i)));
  if (const json* r = optionalField(doc, "references")) f.references = readReferences(*r, "references");
  if (const json* w = optionalField(doc, "weights")) f.weights = readWeights(*w, "weights");
  if (const json* b = optionalField(doc, "bcd")) f.bcd = readBcd(*b, "bcd");
  if (const json* g = optionalField(doc, "generator")) {
    requireObject(*g, "generator", {"kind", "params"});
    GeneratorInfo info;
    info.kind = text(field(*g, "kind", "generator"), "generator.kind");
    if (const json* p = optionalField(*g, "params")) {
      if (!p->is_object()) fail("generator.params", "expected an object");
      for (const auto& item : p->items())
        info.params[item.key()] = number(item.value(), "generator.params." + item.key());
    }
    f.generator = std::move(info);
  }
  return f;
}

// ---------------------------------------------------------------------------
// Writing

template <class V>
json toJson(const V& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json toJson(const Mat3& m) {
  json a = json::array();
  for (int i = 0; i < 3; ++i) a.push_back(toJson(Vec3(m.row(i).transpose())));
  return a;
}

json toJson(const std::vector<Waypoint>& w) {
  json a = json::array();
  for (const auto& p : w) a.push_back({{"t", p.t}, {"value", toJson(p.value)}});
  return a;
}

json toJson(const SolverSettings& s) {
  return {{"eps_abs", s.eps_abs},
          {"eps_rel", s.eps_rel},
          {"eps_prim_inf", s.eps_prim_inf},
          {"eps_dual_inf", s.eps_dual_inf},
          {"polish", s.polish},
          {"scaled_termination", s.scaled_termination},
          {"adaptive_penalty", s.adaptive_penalty},
          {"check_termination_every", s.check_termination_every},
          {"max_iterations", s.max_iterations},
          {"rho", s.rho},
          {"sigma", s.sigma},
          {"relaxation", s.relaxation},
          {"scaling_iterations", s.scaling_iterations},
          {"polish_refine_iterations", s.polish_refine_iterations},
          {"polish_delta", s.polish_delta}};
}

json toJson(const PhaseSpec& ph) {
  json j;
  j["effector"] = ph.effector;
  j["window"] = {ph.t_start, ph.t_end};
  json surface;
  if (ph.halfspaces) {
    json A = json::array();
    for (int i = 0; i < ph.halfspaces->rows(); ++i) A.push_back(toJson(Vec3(ph.halfspaces->A.row(i).transpose())));
    surface["halfspaces"] = {{"A", A}, {"b", toJson(ph.halfspaces->b)}};
  } else {
    json v = json::array();
    for (const auto& p : ph.vertices) v.push_back(toJson(p));
    surface["vertices"] = v;
  }
  j["surface"] = surface;
  j["rotation"] = toJson(ph.rotation);
  j["friction"] = ph.friction;
  j["flat_foot"] = ph.flat_foot;
  if (ph.flat_foot || ph.zmp != ZmpBounds{})
    j["zmp"] = {{"min", toJson(ph.zmp.min)}, {"max", toJson(ph.zmp.max)}};
  if (ph.foothold) j["foothold"] = toJson(*ph.foothold);
  if (ph.max_normal_force) j["max_normal_force"] = *ph.max_normal_force;
  return j;
}

// ---------------------------------------------------------------------------
// References

/// Linear interpolation through (t, value) samples; constant beyond the ends.
template <class V>
std::vector<V> interpolate(std::vector<std::pair<double, V>> samples, int N, const V& fallback) {
  std::vector<V> out(static_cast<std::size_t>(N), fallback);
  if (samples.empty()) return out;
  std::stable_sort(samples.begin(), samples.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::size_t j = 0;
  for (int t = 0; t < N; ++t) {
    auto& v = out[static_cast<std::size_t>(t)];
    if (t <= samples.front().first) {
      v = samples.front().second;
    } else if (t >= samples.back().first) {
      v = samples.back().second;
    } else {
      while (samples[j + 1].first <= t) ++j;
      const auto& [ta, va] = samples[j];
      const auto& [tb, vb] = samples[j + 1];
      const double s = (t - ta) / (tb - ta);
      v = (1.0 - s) * va + s * vb;
    }
  }
  return out;
}

std::vector<std::pair<double, Vec3>> samplesOf(const std::vector<Waypoint>& w) {
  std::vector<std::pair<double, Vec3>> s;
  for (const auto& p : w) s.emplace_back(p.t, p.value);
  return s;
}

/// Centroid of each maximal interval with a constant, non-empty set of
/// stance phases, placed at the interval midpoint.
std::vector<std::pair<double, Vec3>> stanceCentroids(const ContactPlan& plan) {
  std::vector<std::pair<double, Vec3>> s;
  int t = 0;
  while (t < plan.horizon) {
    const auto active = plan.activePhases(t);
    int end = t + 1;
    while (end < plan.horizon && plan.activePhases(end) == active) ++end;
    if (!active.empty()) {
      Vec3 c = Vec3::Zero();
      for (int idx : active) {
        const auto& ph = plan.phases[static_cast<std::size_t>(idx)];
        c += ph.nominal_position - plan.nominal_offsets[static_cast<std::size_t>(ph.effector)];
      }
      s.emplace_back(0.5 * (t + end - 1), c / static_cast<double>(active.size()));
    }
    t = end;
  }
  return s;
}

}  // namespace

ScenarioFile parseScenario(std::string_view src) {
  json doc;
  try {
    doc = json::parse(src.begin(), src.end());
  } catch (const json::parse_error& e) {
    const auto byte = e.byte > 0 ? e.byte - 1 : 0;
    throw ScenarioError(std::string("syntax error: ") + e.what(), {}, lineAt(src, byte));
  }
  try {
    return readDocument(doc);
  } catch (const ScenarioError& e) {
    if (e.line() > 0) throw;
    const std::string prefix = e.path().empty() ? std::string() : e.path() + ": ";
    std::string msg = e.what();
    if (msg.rfind(prefix, 0) == 0) msg = msg.substr(prefix.size());
    throw ScenarioError(msg, e.path(), lineForPath(src, e.path()));
  }
}

std::string emitScenario(const ScenarioFile& f) {
  json doc;
  doc["schema_version"] = f.schema_version;
  doc["name"] = f.name;
  json effs = json::array();
  for (const auto& e : f.robot.effectors) effs.push_back({{"name", e.name}, {"nominal_offset", toJson(e.nominal_offset)}});
  doc["robot"] = {{"mass", f.robot.mass}, {"gravity", toJson(f.robot.gravity)}, {"L_max", f.robot.L_max}, {"effectors", effs}};
  doc["horizon"] = {{"N", f.N}, {"dt", f.dt}};
  doc["initial_state"] = {{"r", toJson(f.initial_state.r)}, {"l", toJson(f.initial_state.l)}, {"k", toJson(f.initial_state.k)}};
  json cs = json::array();
  for (const auto& ph : f.contacts) cs.push_back(toJson(ph));
  doc["contacts"] = cs;
  const auto& r = f.references;
  json refs;
  refs["com"] = toJson(r.com);
  refs["linear_momentum"] = toJson(r.linear_momentum);
  refs["angular_momentum"] = toJson(r.angular_momentum);
  refs["pitch"] = r.pitch;
  refs["inertia_scale"] = r.inertia_scale;
  refs["tracking_scale"] = r.tracking_scale;
  doc["references"] = refs;
  json w;
#define X(name) w[#name] = toJson(f.weights.name);
  CENTROIDAL_WEIGHT_FIELDS(X)
#undef X
  doc["weights"] = w;
  doc["bcd"] = {{"L0_force", f.bcd.L0_force},
                {"L0_contact", f.bcd.L0_contact},
                {"alpha", f.bcd.alpha},
                {"eps_f", f.bcd.eps_f},
                {"max_outer_iterations", f.bcd.max_outer_iterations},
                {"L_cap", f.bcd.L_cap},
                {"solver", toJson(f.bcd.solver)}};
  if (f.generator) {
    json params = json::object();
    for (const auto& [k, v] : f.generator->params) params[k] = v;
    doc["generator"] = {{"kind", f.generator->kind}, {"params", params}};
  }
  return doc.dump(2) + "\n";
}

ReferenceSet makeReferences(const ContactPlan& plan, const ReferenceSpec& spec) {
  const int N = plan.horizon;
  ReferenceSet refs;
  auto com_samples = spec.com.empty() ? stanceCentroids(plan) : samplesOf(spec.com);
  const auto r = interpolate(com_samples, N, plan.h0.r);
  const auto l = interpolate(samplesOf(spec.linear_momentum), N, Vec3(Vec3::Zero()));
  auto k = interpolate(samplesOf(spec.angular_momentum), N, Vec3(Vec3::Zero()));
  if (!spec.pitch.empty()) {
    const auto ky = pitchReferenceToMomentum(spec.pitch, spec.inertia_scale, plan.dt);
    for (int t = 0; t < N; ++t) k[static_cast<std::size_t>(t)].y() = ky[static_cast<std::size_t>(t)];
  }
  refs.h_kin.resize(static_cast<std::size_t>(N));
  for (std::size_t t = 0; t < refs.h_kin.size(); ++t) refs.h_kin[t] = {r[t], l[t], k[t]};
  refs.tracking_scale = spec.tracking_scale;
  return refs;
}

std::vector<double> pitchReferenceToMomentum(const std::vector<double>& pitch, double inertia_scale,
                                             double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("pitch conversion needs dt > 0");
  std::vector<double> k(pitch.size(), 0.0);
  for (std::size_t t = 0; t + 1 < pitch.size(); ++t) k[t] = inertia_scale * (pitch[t + 1] - pitch[t]) / dt;
  if (pitch.size() >= 2) k.back() = k[k.size() - 2];
  return k;
}

Scenario buildScenario(const ScenarioFile& f) {
  Scenario s;
  s.name = f.name;
  s.bcd = f.bcd;
  s.weights = f.weights;
  ContactPlan& plan = s.plan;
  if (f.N < 1) throw ScenarioError("horizon must be at least 1", "horizon.N");
  if (!(f.dt > 0.0)) throw ScenarioError("time step must be positive", "horizon.dt");
  plan.horizon = f.N;
  plan.dt = f.dt;
  plan.mass = f.robot.mass;
  plan.gravity = f.robot.gravity;
  plan.L_max = f.robot.L_max;
  plan.h0 = f.initial_state;
  plan.n_effectors = static_cast<int>(f.robot.effectors.size());
  std::map<std::string, int> ids;
  for (std::size_t i = 0; i < f.robot.effectors.size(); ++i) {
    const auto& e = f.robot.effectors[i];
    if (!ids.emplace(e.name, static_cast<int>(i)).second)
      throw ScenarioError("duplicate effector name '" + e.name + "'", at("robot.effectors", i));
    plan.nominal_offsets.push_back(e.nominal_offset);
    s.effector_names.push_back(e.name);
  }
  for (std::size_t i = 0; i < f.contacts.size(); ++i) {
    const auto& spec = f.contacts[i];
    const std::string path = at("contacts", i);
    auto id = ids.find(spec.effector);
    if (id == ids.end()) throw ScenarioError("undeclared effector '" + spec.effector + "'", join(path, "effector"));
    if (spec.t_start < 0 || spec.t_end > f.N || spec.t_start >= spec.t_end)
      throw ScenarioError("window [" + std::to_string(spec.t_start) + ", " + std::to_string(spec.t_end) +
                              ") must satisfy 0 <= start < end <= N",
                          join(path, "window"));
    ContactPhase ph;
    ph.effector = id->second;
    ph.t_start = spec.t_start;
    ph.t_end = spec.t_end;
    try {
      ph.surface = spec.halfspaces ? *spec.halfspaces : polygonToHalfspaces(spec.vertices);
    } catch (const std::invalid_argument& e) {
      throw ScenarioError(e.what(), join(path, "surface"));
    }
    ph.rotation = spec.rotation;
    ph.friction = spec.friction;
    ph.flat_foot = spec.flat_foot;
    ph.zmp = spec.zmp;
    if (spec.foothold) {
      ph.nominal_position = *spec.foothold;
    } else if (!spec.vertices.empty()) {
      Vec3 c = Vec3::Zero();
      for (const auto& v : spec.vertices) c += v;
      ph.nominal_position = c / static_cast<double>(spec.vertices.size());
    } else {
      throw ScenarioError("foothold is required for halfspace surfaces", join(path, "foothold"));
    }
    if (spec.max_normal_force) ph.max_normal_force = *spec.max_normal_force;
    plan.phases.push_back(std::move(ph));
  }
  try {
    plan.validate();
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(e.what(), "contacts");
  }
  for (const auto* list : {&f.references.com, &f.references.linear_momentum, &f.references.angular_momentum})
    for (const auto& w : *list)
      if (w.t < 0 || w.t >= f.N) throw ScenarioError("waypoint time outside [0, N)", "references");
  if (!f.references.pitch.empty() && static_cast<int>(f.references.pitch.size()) != f.N)
    throw ScenarioError("pitch profile must have N entries", "references.pitch");
  s.refs = makeReferences(plan, f.references);
  try {
    s.refs.validate(f.N);
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(e.what(), "references");
  }
  try {
    s.weights.validate();
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(e.what(), "weights");
  }
  try {
    s.bcd.validate();
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(e.what(), "bcd");
  }
  return s;
}

Scenario loadScenario(std::string_view text) { return buildScenario(parseScenario(text)); }

std::string readTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Scenario loadScenarioFile(const std::filesystem::path& path) { return loadScenario(readTextFile(path)); }

}  // namespace centroidal
