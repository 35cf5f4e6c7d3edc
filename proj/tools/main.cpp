#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "centroidal/bcd.hpp"
#include "centroidal/scenario.hpp"
#include "centroidal/trajectory_io.hpp"

namespace fs = std::filesystem;
using namespace centroidal;

namespace {

enum Exit : int {
  kOk = 0,
  kScenarioError = 1,
  kInfeasible = 2,
  kNotConverged = 3,
  kVerifyFailed = 4,
  kFormatError = 64,
};

struct Overrides {
  std::optional<double> eps_f, L0, alpha;
  std::optional<int> max_iters;
};

void apply(const Overrides& o, BcdSettings& s) {
  if (o.eps_f) s.eps_f = *o.eps_f;
  if (o.L0) s.L0_force = s.L0_contact = *o.L0;
  if (o.alpha) s.alpha = *o.alpha;
  if (o.max_iters) s.max_outer_iterations = *o.max_iters;
}

void writeFile(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

int runSolve(const std::string& scenario_path, const std::string& out_dir, const Overrides& o, bool verbose) {
  Scenario sc;
  try {
    sc = loadScenarioFile(scenario_path);
    apply(o, sc.bcd);
    sc.bcd.validate();
    fs::create_directories(out_dir);
  } catch (const std::exception& e) {
    std::cerr << "scenario error: " << e.what() << "\n";
    return kScenarioError;
  }
  BcdCallbacks cb;
  if (verbose)
    cb.on_iteration = [](const BcdIterationRecord& r) {
      std::fprintf(stderr, "iteration %d: eps_f %.3e, cost %.9g, Force-QP %d it %.3f s, Contact-QP %d it %.3f s\n",
                   r.iteration, r.eps_f_value, r.original_cost, r.force_iterations, r.force_qp_time,
                   r.contact_iterations, r.contact_qp_time);
    };
  TrajectoryResult result;
  try {
    result = optimize(sc.plan, sc.refs, sc.bcd, sc.weights, cb);
  } catch (const BcdError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  }
  const fs::path dir(out_dir);
  std::ostringstream csv, conv, timing, summary;
  writeTrajectoryCsv(csv, sc.plan, sc.effector_names, result.trajectory);
  writeConvergenceJson(conv, sc.name, result);
  writeTimingCsv(timing, result);
  writeSummary(summary, sc.name, result);
  writeFile(dir / "trajectory.csv", csv.str());
  writeFile(dir / "convergence.json", conv.str());
  writeFile(dir / "timing.csv", timing.str());
  writeFile(dir / "summary.txt", summary.str());
  std::cout << summary.str();
  if (!result.residuals.feasible) return kInfeasible;
  return result.converged ? kOk : kNotConverged;
}

int runVerify(const std::string& scenario_path, const std::string& csv_path, double tol) {
  Scenario sc;
  try {
    sc = loadScenarioFile(scenario_path);
  } catch (const std::exception& e) {
    std::cerr << "scenario error: " << e.what() << "\n";
    return kScenarioError;
  }
  Trajectory traj;
  try {
    std::ifstream in(csv_path, std::ios::binary);
    if (!in) throw TrajectoryFormatError("cannot open " + csv_path);
    traj = readTrajectoryCsv(in, sc.plan, sc.effector_names);
  } catch (const TrajectoryFormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return kFormatError;
  }
  const ResidualReport r = verifyTrajectory(traj, sc.plan, tol);
  std::printf("dynamics %.3e\nfriction %.3e\nkinematic %.3e\nsurface %.3e\nzmp %.3e\nlever_arm %.3e\n", r.dynamics,
              r.friction, r.kinematic, r.surface, r.zmp, r.lever_arm);
  std::printf("%s at tolerance %.1e\n", r.feasible ? "feasible" : "infeasible", tol);
  return r.feasible ? kOk : kVerifyFailed;
}

/// Scenario at horizon N: regenerated when it came from the gait generator,
/// otherwise truncated.
Scenario atHorizon(const ScenarioFile& file, int N) {
  if (file.generator) {
    auto kind = gaitFromName(file.generator->kind);
    if (!kind) throw ScenarioError("unknown generator kind", "generator.kind");
    GaitParams g;
    try {
      g = GaitParams::fromMap(file.generator->params);
    } catch (const std::invalid_argument& e) {
      throw ScenarioError(e.what(), "generator.params");
    }
    g.duration = N * g.dt;
    ScenarioFile f = makeGait(*kind, g);
    f.weights = file.weights;
    f.bcd = file.bcd;
    return buildScenario(f);
  }
  if (N > file.N) throw ScenarioError("horizon longer than the scenario; only generated scenarios can be extended");
  ScenarioFile f = file;
  f.N = N;
  f.contacts.clear();
  for (auto ph : file.contacts) {
    if (ph.t_start >= N) continue;
    ph.t_end = std::min(ph.t_end, N);
    f.contacts.push_back(ph);
  }
  for (auto* list : {&f.references.com, &f.references.linear_momentum, &f.references.angular_momentum})
    std::erase_if(*list, [&](const Waypoint& w) { return w.t >= N; });
  if (!f.references.pitch.empty()) f.references.pitch.resize(static_cast<std::size_t>(N));
  if (!f.references.tracking_scale.empty()) f.references.tracking_scale.resize(static_cast<std::size_t>(N));
  return buildScenario(f);
}

int runBench(const std::string& scenario_path, const std::string& out_dir, std::vector<int> horizons,
             unsigned seed, const Overrides& o, bool verbose) {
  ScenarioFile file;
  std::vector<Scenario> scenarios;
  try {
    file = parseScenario(readTextFile(scenario_path));
    if (horizons.empty()) horizons.push_back(file.N);
    for (int N : horizons) {
      if (N < 1) throw ScenarioError("horizons must be positive", "--horizons");
      scenarios.push_back(atHorizon(file, N));
      apply(o, scenarios.back().bcd);
      scenarios.back().bcd.validate();
    }
    if (!out_dir.empty()) fs::create_directories(out_dir);
  } catch (const std::exception& e) {
    std::cerr << "scenario error: " << e.what() << "\n";
    return kScenarioError;
  }
  // Shuffled run order keeps warm-up effects from correlating with N.
  std::vector<std::size_t> order(horizons.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<TrajectoryResult> results(horizons.size());
  for (std::size_t i : order) {
    try {
      results[i] = optimize(scenarios[i].plan, scenarios[i].refs, scenarios[i].bcd, scenarios[i].weights);
    } catch (const BcdError& e) {
      std::cerr << "N=" << horizons[i] << ": infeasible: " << e.what() << "\n";
      return kInfeasible;
    }
    if (verbose) std::fprintf(stderr, "N=%d done\n", horizons[i]);
  }

  std::ostringstream csv;
  csv << "N,total_time,force_qp_time,contact_qp_time,outer_iterations,converged\n";
  std::vector<double> lx, ly;
  bool all_converged = true;
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    const auto& r = results[i];
    const double total = r.forceTime() + r.contactTime();
    char line[256];
    std::snprintf(line, sizeof line, "%d,%.6f,%.6f,%.6f,%zu,%d\n", horizons[i], total, r.forceTime(),
                  r.contactTime(), r.records.size(), r.converged ? 1 : 0);
    csv << line;
    lx.push_back(std::log(horizons[i]));
    ly.push_back(std::log(total));
    all_converged = all_converged && r.converged;
  }
  std::string exponent = "n/a";
  std::set<int> distinct(horizons.begin(), horizons.end());
  if (distinct.size() >= 2) {
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", sxy / sxx);
    exponent = buf;
  }
  std::cout << csv.str() << "exponent: " << exponent << "\n";
  if (!out_dir.empty()) {
    writeFile(fs::path(out_dir) / "bench.csv", csv.str());
    writeFile(fs::path(out_dir) / "bench_exponent.txt", exponent + "\n");
  }
  return all_converged ? kOk : kNotConverged;
}

int runGait(const std::string& kind_name, const std::string& out, GaitParams g) {
  auto kind = gaitFromName(kind_name);
  if (!kind) {
    std::cerr << "unknown gait '" << kind_name << "'\n";
    return kScenarioError;
  }
  try {
    const std::string text = emitScenario(makeGait(*kind, g));
    if (out.empty() || out == "-")
      std::cout << text;
    else
      writeFile(out, text);
  } catch (const std::exception& e) {
    std::cerr << "gait error: " << e.what() << "\n";
    return kScenarioError;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Centroidal trajectory optimization by block coordinate descent"};
  app.require_subcommand(1);

  std::string scenario, out, trajectory;
  Overrides o;
  double tol = 1e-5;
  bool verbose = false;
  std::vector<int> horizons;
  unsigned seed = 0;

  auto* solve = app.add_subcommand("solve", "optimize a scenario");
  solve->add_option("--scenario", scenario, "scenario document")->required()->check(CLI::ExistingFile);
  solve->add_option("--out", out, "output directory")->required();
  solve->add_option("--eps-f", o.eps_f, "consensus threshold");
  solve->add_option("--L0", o.L0, "initial proximal weight (both blocks)");
  solve->add_option("--alpha", o.alpha, "proximal growth factor");
  solve->add_option("--max-iters", o.max_iters, "maximum outer iterations");
  solve->add_flag("--verbose,-v", verbose, "per-iteration progress on stderr");

  auto* verify = app.add_subcommand("verify", "check a trajectory against a scenario");
  verify->add_option("--scenario", scenario, "scenario document")->required()->check(CLI::ExistingFile);
  verify->add_option("--trajectory", trajectory, "trajectory CSV")->required();
  verify->add_option("--tol", tol, "residual tolerance")->check(CLI::PositiveNumber);

  auto* bench = app.add_subcommand("bench", "solve time against horizon");
  bench->add_option("--scenario", scenario, "scenario template")->required()->check(CLI::ExistingFile);
  bench->add_option("--horizons", horizons, "horizons to run")->delimiter(',');
  bench->add_option("--seed", seed, "run-order seed");
  bench->add_option("--out", out, "output directory");
  bench->add_option("--eps-f", o.eps_f, "consensus threshold");
  bench->add_option("--L0", o.L0, "initial proximal weight (both blocks)");
  bench->add_option("--alpha", o.alpha, "proximal growth factor");
  bench->add_option("--max-iters", o.max_iters, "maximum outer iterations");
  bench->add_flag("--verbose,-v", verbose, "progress on stderr");

  GaitParams g;
  std::string kind;
  auto* gait = app.add_subcommand("gait", "generate a quadruped scenario");
  gait->add_option("--kind", kind, "stand, walk, trot, bound, jump_in_place, jump_forward, jump_twist, "
                                   "stairs_up, stairs_down or stones")
      ->required();
  gait->add_option("--out", out, "output file (stdout when omitted)");
  gait->add_option("--duration", g.duration, "horizon length [s]");
  gait->add_option("--dt", g.dt, "time step [s]");
  gait->add_option("--stride", g.stride, "foothold advance per swing [m]");
  gait->add_option("--flight", g.flight, "jump flight time [s]");
  gait->add_option("--step-height", g.step_height, "stair rise [m]");
  gait->add_option("--incline", g.max_incline, "largest stepping-stone tilt [rad]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*solve) return runSolve(scenario, out, o, verbose);
    if (*verify) return runVerify(scenario, trajectory, tol);
    if (*bench) return runBench(scenario, out, horizons, seed, o, verbose);
    if (*gait) return runGait(kind, out, g);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kScenarioError;
  }
  return kOk;
}
