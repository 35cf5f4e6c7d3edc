#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "centroidal/contact_qp.hpp"
#include "centroidal/cost.hpp"
#include "centroidal/force_qp.hpp"
#include "centroidal/model.hpp"
#include "centroidal/sparse_qp.hpp"

namespace centroidal {

struct BcdSettings {
  double L0_force = 100.0;
  double L0_contact = 100.0;
  double alpha = 100.0;
  double eps_f = 1e-7;
  int max_outer_iterations = 10;
  /// Proximal weights stop growing here.
  double L_cap = 1e12;
  SolverSettings solver;

  /// Throws std::invalid_argument unless alpha > 1, eps_f >= 0, L0 >= 0 and
  /// max_outer_iterations >= 1.
  void validate() const;
  bool operator==(const BcdSettings&) const = default;
};

enum class Block { force, contact };
const char* blockName(Block b);

struct BcdIterationRecord {
  int iteration = 0;  ///< 1-based outer iteration
  double force_qp_time = 0.0;
  double contact_qp_time = 0.0;
  double force_setup_time = 0.0;
  double contact_setup_time = 0.0;
  double eps_f_value = 0.0;
  /// Cost of this iteration's force iterate without proximal terms.
  double original_cost = 0.0;
  int force_iterations = 0;
  int contact_iterations = 0;
  double L_force = 0.0;    ///< proximal weight used by this Force-QP
  double L_contact = 0.0;  ///< proximal weight used by this Contact-QP
  bool L_capped = false;
  /// Residuals of the force iterate against the geometry it was solved with.
  ResidualReport force_residuals;
};

struct TrajectoryResult {
  Trajectory trajectory;
  std::vector<BcdIterationRecord> records;
  bool converged = false;
  ResidualReport residuals;
  double final_cost = 0.0;
  double final_force_time = 0.0;
  int final_force_iterations = 0;
  double final_L_force = 0.0;
  double total_setup_time = 0.0;

  double forceTime() const;
  double contactTime() const;
};

/// A QP block without a usable solution; names block and outer iteration.
class BcdError : public std::runtime_error {
 public:
  BcdError(Block block, int iteration, QpStatus status);
  Block block() const { return block_; }
  int iteration() const { return iteration_; }
  QpStatus status() const { return status_; }

 private:
  Block block_;
  int iteration_;
  QpStatus status_;
};

/// ||ell_k - ell_prev||^2 / N over the stacked lever arms.
double consensusMetric(const Eigen::VectorXd& ell_k, const Eigen::VectorXd& ell_prev, int horizon);

struct BcdCallbacks {
  /// After each outer iteration.
  std::function<void(const BcdIterationRecord&)> on_iteration;
  /// Every assembled QP, before it is solved. Iteration 0 marks the final
  /// Force-QP.
  std::function<void(Block, int iteration, const SparseQP&)> on_qp;
};

/// Alternates Force-QP and Contact-QP with geometrically growing proximal
/// weights until the lever arms agree, then solves one last Force-QP whose
/// momentum and forces form the result.
TrajectoryResult optimize(const ContactPlan& plan, const ReferenceSet& refs,
                          const BcdSettings& settings, const CostWeights& weights = {},
                          const BcdCallbacks& callbacks = {});

}  // namespace centroidal
