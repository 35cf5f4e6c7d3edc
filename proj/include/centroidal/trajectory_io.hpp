#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "centroidal/bcd.hpp"
#include "centroidal/model.hpp"

namespace centroidal {

class TrajectoryFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Column names: t, r_*, l_*, k_*, then per effector <name>_f_*, <name>_p_*,
/// <name>_ell_*, and <name>_tau_*, <name>_z_* for effectors with a flat-foot
/// phase. Inactive contacts leave their cells empty.
std::vector<std::string> trajectoryColumns(const ContactPlan& plan, const std::vector<std::string>& names);

void writeTrajectoryCsv(std::ostream& out, const ContactPlan& plan, const std::vector<std::string>& names,
                        const Trajectory& traj);

/// Throws TrajectoryFormatError on header, row count, cell or activity
/// mismatches against the plan.
Trajectory readTrajectoryCsv(std::istream& in, const ContactPlan& plan, const std::vector<std::string>& names);

/// Per-iteration convergence records without timing fields.
void writeConvergenceJson(std::ostream& out, const std::string& scenario, const TrajectoryResult& result);

/// Per-QP solve and setup times.
void writeTimingCsv(std::ostream& out, const TrajectoryResult& result);

/// Human-readable solve summary.
void writeSummary(std::ostream& out, const std::string& scenario, const TrajectoryResult& result);

}  // namespace centroidal
