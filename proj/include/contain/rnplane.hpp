// Trajectories in the R-N plane: tumor size as a function of the resistant
// population size, integrated from dN/dr = f_N/f_R, plus pointwise curve
// comparison and the time-domain/plane consistency check.
#pragma once

#include <optional>
#include <vector>

#include "contain/simulate.hpp"

namespace contain {

/// Tumor size N_tilde(r), sensitive count S_tilde(r) = N_tilde - r, dose
/// L_tilde(r) and elapsed time t(r) on an increasing r grid. Idealized resets
/// appear as two entries at equal r; interpolation is right-continuous there.
struct RnCurve {
  std::vector<double> r;
  std::vector<double> N_tilde;
  std::vector<double> S_tilde;
  std::vector<double> L_tilde;
  std::vector<double> t_of_r;
  std::vector<double> dN_dr;  // slope per sample, for dense interpolation

  enum class Truncation { ReachedEnd, SensitiveDepleted, Horizon, Survival };
  Truncation truncation = Truncation::ReachedEnd;

  size_t size() const { return r.size(); }
  double r_front() const { return r.front(); }
  double r_back() const { return r.back(); }

  /// N_tilde at r (cubic Hermite between samples, right-continuous at jumps).
  double value_at(double rq) const;
  double time_at(double rq) const;
};

/// Integrates the curve from (R0, N0) up to r_end (or until the sensitive
/// population falls below one cell, the horizon, or tumor size passes well
/// beyond N_crit). Throws if f_R <= 0 is encountered on the way.
RnCurve rn_trajectory(const TumorModel& model, const Policy& policy, const TumorState& init,
                      double r_end, const IntegratorConfig& cfg);

struct PointwiseOrderReport {
  enum class Relation { LessEq, GreaterEq, Crossing };

  Relation relation = Relation::LessEq;
  double max_violation = 0.0;  // cells, against the declared relation
  std::optional<double> violation_locus;
  double max_above_rel = 0.0;  // worst relative excess of a over b
  double max_below_rel = 0.0;  // worst relative excess of b over a
};

/// Classifies the pointwise order of two curves on their overlap, evaluating
/// each curve's own samples against the other's interpolant.
PointwiseOrderReport compare_curves(const RnCurve& a, const RnCurve& b, double rel_tol = 1e-6);

struct ConsistencyResult {
  double max_rel_dev = 0.0;  // max over covered samples of |N(t) - N_tilde(R(t))| / N(t)
  double coverage = 1.0;     // fraction of trajectory samples inside the curve's r range
};

/// Cross-checks N(t) = N_tilde(R(t)) between a time-domain trajectory and an
/// R-N curve produced from the same (model, policy, init).
ConsistencyResult consistency_check(const Trajectory& traj, const RnCurve& curve);

}  // namespace contain
