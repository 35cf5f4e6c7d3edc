#include "centroidal/bcd.hpp"

#include <algorithm>
#include <chrono>
#include <memory>

#include "centroidal/qp_solver.hpp"

namespace centroidal {

namespace {

using Clock = std::chrono::steady_clock;

double secondsSince(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// One persistent solver per block. The first call sets up; later calls
/// push new values into the same factorization pattern and warm start from
/// the previous solution.
class BlockSolver {
 public:
  BlockSolver(Block block, SolverSettings settings) : block_(block), settings_(settings) {}

  QpSolution solve(const SparseQP& qp, int iteration) {
    if (!solver_) {
      solver_ = std::make_unique<AdmmSolver>(qp, settings_);
      last_setup_ = solver_->setupTime();
    } else {
      const auto& cur = solver_->problem();
      if (!samePattern(cur.P, qp.P) || !samePattern(cur.A, qp.A))
        throw std::logic_error(std::string(blockName(block_)) + " QP changed its sparsity pattern");
      const auto t0 = Clock::now();
      QpValueUpdate upd;
      upd.q = qp.q;
      upd.lo = qp.lo;
      upd.hi = qp.hi;
      upd.P = qp.P;
      upd.A = qp.A;
      solver_->update(upd);
      last_setup_ = secondsSince(t0);
    }
    QpSolution sol = solver_->solve(warm_);
    if (sol.status == QpStatus::max_iter) {
      const int cap = solver_->maxIterations();
      solver_->setMaxIterations(10 * cap);
      QpSolution retry = solver_->solve(WarmStart{sol.x, sol.y});
      solver_->setMaxIterations(cap);
      retry.iterations += sol.iterations;
      retry.solve_time += sol.solve_time;
      sol = std::move(retry);
    }
    if (sol.status != QpStatus::solved) throw BcdError(block_, iteration, sol.status);
    warm_ = WarmStart{sol.x, sol.y};
    return sol;
  }

  double lastSetupTime() const { return last_setup_; }

 private:
  Block block_;
  SolverSettings settings_;
  std::unique_ptr<AdmmSolver> solver_;
  std::optional<WarmStart> warm_;
  double last_setup_ = 0.0;
};

/// Contact geometry the Force-QP is solved against.
struct Geometry {
  ContactField<Vec3> p;
  ContactField<Vec2> z;
  ContactField<Vec3> ell;
};

Geometry initialGeometry(const ContactPlan& plan, const ReferenceSet& refs) {
  const int N = plan.horizon;
  Geometry g{ContactField<Vec3>(N, plan.n_effectors), ContactField<Vec2>(N, plan.n_effectors),
             ContactField<Vec3>(N, plan.n_effectors)};
  for (const auto& ph : plan.phases)
    for (int t = ph.t_start; t < ph.t_end; ++t) {
      g.p(t, ph.effector) = ph.nominal_position;
      g.z(t, ph.effector) = Vec2::Zero();
      g.ell(t, ph.effector) = ph.nominal_position - refs.h_kin[static_cast<std::size_t>(t)].r;
    }
  return g;
}

struct ForceStep {
  ForceIterate iterate;
  Trajectory trajectory;
  QpSolution solution;
  double setup_time = 0.0;
};

ForceStep runForce(BlockSolver& solver, const ContactPlan& plan, const ReferenceSet& refs,
                   const CostWeights& w, const Geometry& g,
                   const std::optional<std::vector<CentroidalState>>& h_reg, double L,
                   int iteration, int tag, const BcdCallbacks& cb) {
  ForceQpInputs in;
  in.plan = &plan;
  in.refs = &refs;
  in.weights = w;
  in.ell_fixed = g.ell;
  in.p_fixed = g.p;
  in.h_reg = h_reg;
  in.L_prox = h_reg ? L : 0.0;
  const SparseQP qp = buildForceQp(in);
  if (cb.on_qp) cb.on_qp(Block::force, tag, qp);
  ForceStep step;
  step.solution = solver.solve(qp, iteration);
  step.setup_time = solver.lastSetupTime();
  step.iterate = extractForceIterate(step.solution, qp.layout, plan);
  step.trajectory = assembleTrajectory(plan, step.iterate.states, step.iterate.f, g.p, g.ell,
                                       &step.iterate.tau, &g.z);
  return step;
}

constexpr double kFeasibilityTol = 1e-5;

}  // namespace

void BcdSettings::validate() const {
  if (!(alpha > 1.0)) throw std::invalid_argument("BCD alpha must exceed 1");
  if (!(eps_f >= 0.0)) throw std::invalid_argument("BCD eps_f must be nonnegative");
  if (!(L0_force >= 0.0) || !(L0_contact >= 0.0))
    throw std::invalid_argument("BCD initial proximal weights must be nonnegative");
  if (!(L_cap > 0.0)) throw std::invalid_argument("BCD proximal cap must be positive");
  if (max_outer_iterations < 1) throw std::invalid_argument("BCD needs at least one iteration");
  solver.validate();
}

const char* blockName(Block b) { return b == Block::force ? "force" : "contact"; }

BcdError::BcdError(Block block, int iteration, QpStatus status)
    : std::runtime_error(std::string(blockName(block)) + " QP failed at outer iteration " +
                         std::to_string(iteration) + ": " + statusName(status)),
      block_(block),
      iteration_(iteration),
      status_(status) {}

double TrajectoryResult::forceTime() const {
  double s = final_force_time;
  for (const auto& r : records) s += r.force_qp_time;
  return s;
}

double TrajectoryResult::contactTime() const {
  double s = 0.0;
  for (const auto& r : records) s += r.contact_qp_time;
  return s;
}

double consensusMetric(const Eigen::VectorXd& ell_k, const Eigen::VectorXd& ell_prev, int horizon) {
  if (ell_k.size() != ell_prev.size())
    throw std::invalid_argument("consensusMetric: length mismatch");
  if (horizon < 1) throw std::invalid_argument("consensusMetric: horizon must be positive");
  return (ell_k - ell_prev).squaredNorm() / horizon;
}

TrajectoryResult optimize(const ContactPlan& plan, const ReferenceSet& refs,
                          const BcdSettings& settings, const CostWeights& weights,
                          const BcdCallbacks& cb) {
  plan.validate();
  refs.validate(plan.horizon);
  settings.validate();
  weights.validate();

  BlockSolver force_solver(Block::force, settings.solver);
  BlockSolver contact_solver(Block::contact, settings.solver);

  TrajectoryResult result;
  Geometry geom = initialGeometry(plan, refs);
  std::optional<std::vector<CentroidalState>> contact_states;
  std::optional<ContactField<Vec3>> prev_footholds;
  double L_force = std::min(settings.L0_force, settings.L_cap);
  double L_contact = std::min(settings.L0_contact, settings.L_cap);
  bool consensus = false;

  for (int k = 1; k <= settings.max_outer_iterations; ++k) {
    BcdIterationRecord rec;
    rec.iteration = k;

    rec.L_force = contact_states ? L_force : 0.0;
    ForceStep fs = runForce(force_solver, plan, refs, weights, geom, contact_states, L_force, k, k, cb);
    rec.force_qp_time = fs.solution.solve_time;
    rec.force_setup_time = fs.setup_time;
    rec.force_iterations = fs.solution.iterations;
    rec.force_residuals = verifyTrajectory(fs.trajectory, plan, kFeasibilityTol);
    rec.original_cost = originalCost(plan, refs, weights, fs.trajectory);
    if (L_force * settings.alpha > settings.L_cap) rec.L_capped = true;
    L_force = std::min(L_force * settings.alpha, settings.L_cap);

    ContactQpInputs cin;
    cin.plan = &plan;
    cin.refs = &refs;
    cin.weights = weights;
    cin.f_fixed = fs.iterate.f;
    cin.h_reg = fs.iterate.states;
    cin.p_reg = prev_footholds;
    cin.L_prox = L_contact;
    rec.L_contact = L_contact;
    const SparseQP cqp = buildContactQp(cin);
    if (cb.on_qp) cb.on_qp(Block::contact, k, cqp);
    const QpSolution csol = contact_solver.solve(cqp, k);
    rec.contact_qp_time = csol.solve_time;
    rec.contact_setup_time = contact_solver.lastSetupTime();
    rec.contact_iterations = csol.iterations;
    ContactIterate ci = extractContactIterate(csol, cqp.layout, plan);
    if (L_contact * settings.alpha > settings.L_cap) rec.L_capped = true;
    L_contact = std::min(L_contact * settings.alpha, settings.L_cap);

    rec.eps_f_value = consensusMetric(stackLeverArms(ci.ell), stackLeverArms(geom.ell), plan.horizon);
    geom = Geometry{ci.p, ci.z, ci.ell};
    prev_footholds = ci.p;
    contact_states = std::move(ci.states);

    result.total_setup_time += rec.force_setup_time + rec.contact_setup_time;
    result.records.push_back(rec);
    if (cb.on_iteration) cb.on_iteration(rec);
    if (rec.eps_f_value <= settings.eps_f) {
      consensus = true;
      break;
    }
  }

  const int last = static_cast<int>(result.records.size());
  ForceStep fs = runForce(force_solver, plan, refs, weights, geom, contact_states, L_force, last, 0, cb);
  result.final_L_force = L_force;
  result.final_force_time = fs.solution.solve_time;
  result.final_force_iterations = fs.solution.iterations;
  result.total_setup_time += fs.setup_time;
  result.trajectory = std::move(fs.trajectory);
  result.residuals = verifyTrajectory(result.trajectory, plan, kFeasibilityTol);
  result.final_cost = originalCost(plan, refs, weights, result.trajectory);
  result.converged = consensus && result.residuals.feasible;
  return result;
}

}  // namespace centroidal
