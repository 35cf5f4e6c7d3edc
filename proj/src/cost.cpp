#include "centroidal/cost.hpp"

#include <cmath>
#include <stdexcept>

namespace centroidal {

namespace {

template <class V>
bool nonnegative(const V& v) {
  return v.allFinite() && (v.array() >= 0.0).all();
}

template <class V>
double weighted(const V& w, const V& x) {
  return (w.array() * x.array().square()).sum();
}

}  // namespace

void CostWeights::validate() const {
  const bool ok = nonnegative(run_r) && nonnegative(run_l) && nonnegative(run_k) &&
                  nonnegative(run_f) && nonnegative(run_tau) && nonnegative(run_z) &&
                  nonnegative(run_p) && nonnegative(track_r) && nonnegative(track_l) &&
                  nonnegative(track_k) && nonnegative(terminal_r) && nonnegative(terminal_l) &&
                  nonnegative(terminal_k);
  if (!ok) throw std::invalid_argument("cost weights must be finite and nonnegative");
}

void ReferenceSet::validate(int horizon) const {
  if (size() != horizon)
    throw std::invalid_argument("reference length " + std::to_string(size()) +
                                " does not match horizon " + std::to_string(horizon));
  if (!tracking_scale.empty() && static_cast<int>(tracking_scale.size()) != horizon)
    throw std::invalid_argument("tracking_scale length does not match horizon");
  for (double s : tracking_scale)
    if (!(s >= 0.0) || !std::isfinite(s)) throw std::invalid_argument("negative tracking scale");
  for (const auto& h : h_kin)
    if (!h.allFinite()) throw std::invalid_argument("non-finite reference state");
}

StateWeights trackingWeights(const CostWeights& w, const ReferenceSet& refs, int t, int horizon) {
  const double s = refs.scale(t);
  StateWeights sw{s * w.track_r, s * w.track_l, s * w.track_k};
  if (t == horizon - 1) {
    sw.r += w.terminal_r;
    sw.l += w.terminal_l;
    sw.k += w.terminal_k;
  }
  return sw;
}

double originalCost(const ContactPlan& plan, const ReferenceSet& refs, const CostWeights& w,
                    const Trajectory& traj) {
  double cost = 0.0;
  const int N = plan.horizon;
  for (int t = 0; t < N; ++t) {
    const auto& pt = traj[static_cast<std::size_t>(t)];
    const auto& h = pt.state;
    const auto& ref = refs.h_kin[static_cast<std::size_t>(t)];
    const StateWeights sw = trackingWeights(w, refs, t, N);
    cost += weighted(w.run_r, h.r) + weighted(w.run_l, h.l) + weighted(w.run_k, h.k);
    cost += weighted(sw.r, Vec3(h.r - ref.r)) + weighted(sw.l, Vec3(h.l - ref.l)) +
            weighted(sw.k, Vec3(h.k - ref.k));
    for (const auto& c : pt.contacts.contacts) {
      const auto phase = plan.activePhase(c.effector, t);
      if (!phase) throw std::invalid_argument("originalCost: contact outside plan");
      const auto& ph = plan.phases[static_cast<std::size_t>(*phase)];
      cost += weighted(w.run_f, c.f);
      cost += weighted(w.run_p, Vec3(c.p - ph.nominal_position));
      if (ph.flat_foot) cost += weighted(w.run_tau, c.tau) + weighted(w.run_z, c.z);
    }
  }
  return cost;
}

}  // namespace centroidal
