#include "centroidal/trajectory_io.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace centroidal {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<bool> flatFootEffectors(const ContactPlan& plan) {
  std::vector<bool> flat(static_cast<std::size_t>(plan.n_effectors), false);
  for (const auto& ph : plan.phases)
    if (ph.flat_foot) flat[static_cast<std::size_t>(ph.effector)] = true;
  return flat;
}

void checkNames(const ContactPlan& plan, const std::vector<std::string>& names) {
  if (static_cast<int>(names.size()) != plan.n_effectors)
    throw std::invalid_argument("one effector name per effector is required");
}

std::vector<std::string> splitCsv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parseCell(const std::string& s, int row, const std::string& column) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(v))
    throw TrajectoryFormatError("row " + std::to_string(row) + ", column " + column + ": '" + s +
                                "' is not a finite number");
  return v;
}

}  // namespace

std::vector<std::string> trajectoryColumns(const ContactPlan& plan, const std::vector<std::string>& names) {
  checkNames(plan, names);
  const auto flat = flatFootEffectors(plan);
  std::vector<std::string> cols{"t"};
  const char* axes[] = {"x", "y", "z"};
  for (const char* q : {"r", "l", "k"})
    for (const char* a : axes) cols.push_back(std::string(q) + "_" + a);
  for (int e = 0; e < plan.n_effectors; ++e) {
    const std::string& n = names[static_cast<std::size_t>(e)];
    for (const char* q : {"f", "p", "ell"})
      for (const char* a : axes) cols.push_back(n + "_" + q + "_" + a);
    if (flat[static_cast<std::size_t>(e)]) {
      for (const char* a : axes) cols.push_back(n + "_tau_" + a);
      for (const char* a : {"x", "y"}) cols.push_back(n + "_z_" + a);
    }
  }
  return cols;
}

void writeTrajectoryCsv(std::ostream& out, const ContactPlan& plan, const std::vector<std::string>& names,
                        const Trajectory& traj) {
  const auto cols = trajectoryColumns(plan, names);
  const auto flat = flatFootEffectors(plan);
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
  for (std::size_t t = 0; t < traj.size(); ++t) {
    const auto& h = traj[t].state;
    out << t;
    for (const Vec3* v : {&h.r, &h.l, &h.k})
      for (int a = 0; a < 3; ++a) out << "," << fmt((*v)(a));
    for (int e = 0; e < plan.n_effectors; ++e) {
      const ContactValues* c = traj[t].contacts.find(e);
      const int n = flat[static_cast<std::size_t>(e)] ? 14 : 9;
      if (!c) {
        for (int i = 0; i < n; ++i) out << ",";
        continue;
      }
      for (const Vec3* v : {&c->f, &c->p, &c->ell})
        for (int a = 0; a < 3; ++a) out << "," << fmt((*v)(a));
      if (flat[static_cast<std::size_t>(e)]) {
        for (int a = 0; a < 3; ++a) out << "," << fmt(c->tau(a));
        for (int a = 0; a < 2; ++a) out << "," << fmt(c->z(a));
      }
    }
    out << "\n";
  }
}

Trajectory readTrajectoryCsv(std::istream& in, const ContactPlan& plan, const std::vector<std::string>& names) {
  const auto cols = trajectoryColumns(plan, names);
  const auto flat = flatFootEffectors(plan);
  std::string line;
  if (!std::getline(in, line)) throw TrajectoryFormatError("empty trajectory file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (splitCsv(line) != cols) throw TrajectoryFormatError("header does not match the scenario's effectors");

  Trajectory traj;
  int row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    const auto cells = splitCsv(line);
    if (cells.size() != cols.size())
      throw TrajectoryFormatError("row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                                  " cells, expected " + std::to_string(cols.size()));
    const int t = static_cast<int>(traj.size());
    if (parseCell(cells[0], row, "t") != t)
      throw TrajectoryFormatError("row " + std::to_string(row) + ": timestep index out of sequence");
    std::size_t col = 1;
    auto vec3 = [&](Vec3& v) {
      for (int a = 0; a < 3; ++a, ++col) v(a) = parseCell(cells[col], row, cols[col]);
    };
    TrajectoryPoint pt;
    vec3(pt.state.r);
    vec3(pt.state.l);
    vec3(pt.state.k);
    for (int e = 0; e < plan.n_effectors; ++e) {
      const std::size_t n = flat[static_cast<std::size_t>(e)] ? 14 : 9;
      bool empty = true, full = true;
      for (std::size_t i = col; i < col + n; ++i) (cells[i].empty() ? full : empty) = false;
      const bool active = plan.activePhase(e, t).has_value();
      if (!empty && !full)
        throw TrajectoryFormatError("row " + std::to_string(row) + ": partially filled contact " +
                                    names[static_cast<std::size_t>(e)]);
      if (full != active)
        throw TrajectoryFormatError("row " + std::to_string(row) + ": contact " + names[static_cast<std::size_t>(e)] +
                                    (active ? " is active in the plan but empty" : " is inactive in the plan but filled"));
      if (!active) {
        col += n;
        continue;
      }
      ContactValues c;
      c.effector = e;
      vec3(c.f);
      vec3(c.p);
      vec3(c.ell);
      if (flat[static_cast<std::size_t>(e)]) {
        vec3(c.tau);
        for (int a = 0; a < 2; ++a, ++col) c.z(a) = parseCell(cells[col], row, cols[col]);
      }
      pt.contacts.contacts.push_back(c);
    }
    traj.push_back(std::move(pt));
  }
  if (static_cast<int>(traj.size()) != plan.horizon)
    throw TrajectoryFormatError("trajectory has " + std::to_string(traj.size()) + " rows, expected " +
                                std::to_string(plan.horizon));
  return traj;
}

namespace {

nlohmann::ordered_json residualJson(const ResidualReport& r) {
  return {{"dynamics", r.dynamics}, {"friction", r.friction},   {"kinematic", r.kinematic},
          {"surface", r.surface},   {"zmp", r.zmp},             {"lever_arm", r.lever_arm},
          {"tolerance", r.tolerance}, {"feasible", r.feasible}};
}

}  // namespace

void writeConvergenceJson(std::ostream& out, const std::string& scenario, const TrajectoryResult& result) {
  using json = nlohmann::ordered_json;
  json records = json::array();
  for (const auto& r : result.records)
    records.push_back({{"iteration", r.iteration},
                       {"eps_f", r.eps_f_value},
                       {"original_cost", r.original_cost},
                       {"force_qp_iterations", r.force_iterations},
                       {"contact_qp_iterations", r.contact_iterations},
                       {"L_force", r.L_force},
                       {"L_contact", r.L_contact},
                       {"L_capped", r.L_capped},
                       {"force_residuals", residualJson(r.force_residuals)}});
  json doc = {{"scenario", scenario},
              {"converged", result.converged},
              {"outer_iterations", result.records.size()},
              {"final_cost", result.final_cost},
              {"final_force_qp_iterations", result.final_force_iterations},
              {"final_L_force", result.final_L_force},
              {"residuals", residualJson(result.residuals)},
              {"iterations", records}};
  out << doc.dump(2) << "\n";
}

void writeTimingCsv(std::ostream& out, const TrajectoryResult& result) {
  out << "iteration,force_qp_time,contact_qp_time,force_setup_time,contact_setup_time\n";
  for (const auto& r : result.records)
    out << r.iteration << "," << fmt(r.force_qp_time) << "," << fmt(r.contact_qp_time) << ","
        << fmt(r.force_setup_time) << "," << fmt(r.contact_setup_time) << "\n";
  out << "final," << fmt(result.final_force_time) << ",0,,\n";
}

void writeSummary(std::ostream& out, const std::string& scenario, const TrajectoryResult& result) {
  char line[256];
  out << "scenario: " << scenario << "\n";
  out << "outer iterations: " << result.records.size() << (result.converged ? " (converged)" : " (not converged)")
      << "\n";
  out << "eps_f trace:";
  for (const auto& r : result.records) {
    std::snprintf(line, sizeof line, " %.3e", r.eps_f_value);
    out << line;
  }
  out << "\n";
  const double force = result.forceTime(), contact = result.contactTime();
  const double total = force + contact;
  std::snprintf(line, sizeof line, "solve time: %.3f s (Force-QP %.3f s, %.1f%%; Contact-QP %.3f s, %.1f%%)\n", total,
                force, total > 0 ? 100.0 * force / total : 0.0, contact, total > 0 ? 100.0 * contact / total : 0.0);
  out << line;
  std::snprintf(line, sizeof line, "setup time: %.3f s\n", result.total_setup_time);
  out << line;
  std::snprintf(line, sizeof line, "final cost: %.9g\n", result.final_cost);
  out << line;
  const auto& r = result.residuals;
  std::snprintf(line, sizeof line,
                "residuals: dynamics %.2e, friction %.2e, kinematic %.2e, surface %.2e, zmp %.2e (%s at %.0e)\n",
                r.dynamics, r.friction, r.kinematic, r.surface, r.zmp, r.feasible ? "feasible" : "infeasible",
                r.tolerance);
  out << line;
}

}  // namespace centroidal
