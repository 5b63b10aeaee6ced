// Time-domain simulation of a tumor model under a treatment policy: event
// detection, discrete resets, trajectories and outcome metrics.
#pragma once

#include <optional>
#include <vector>

#include "contain/integrate.hpp"
#include "contain/model.hpp"
#include "contain/policy.hpp"

namespace contain {

struct TumorState {
  double S = 0.0;  // sensitive cells, >= 0
  double R = 0.0;  // resistant cells, > 0
  double t = 0.0;

  double N() const { return S + R; }
};

struct TrajectorySample {
  double t = 0.0;
  double S = 0.0, R = 0.0, N = 0.0;
  double L = 0.0;
  Phase phase = Phase::Grow;
  double dS = 0.0, dR = 0.0;  // kept for dense interpolation between samples
};

struct TrajectoryEvent {
  EventKind kind = EventKind::ReachedThresholdUp;
  double t = 0.0;
  double S_before = 0.0, R_before = 0.0;
  double S_after = 0.0, R_after = 0.0;
};

/// Sampled run. Sample times are non-decreasing; records sharing a time stamp
/// come in before/after pairs (resets and phase transitions).
struct Trajectory {
  std::vector<TrajectorySample> samples;
  std::vector<TrajectoryEvent> events;
  double event_time_tol = 1e-6;

  double t_end() const { return samples.empty() ? 0.0 : samples.back().t; }
};

struct OutcomeMetrics {
  std::optional<double> t_progression;  // first upward crossing of N0
  std::optional<double> t_failure;      // first upward crossing of N_tol
  std::optional<double> t_survival;     // first upward crossing of N_crit
};

struct SimulationResult {
  Trajectory trajectory;
  OutcomeMetrics metrics;
};

/// Integrates the model under the policy from `init` until the horizon or
/// shortly past the first N_crit crossing. Threshold crossings are localized
/// to cfg.event_time_tol; idealized resets are applied atomically and appear
/// as paired samples at equal t.
SimulationResult simulate(const TumorModel& model, const Policy& policy, const TumorState& init,
                          const IntegratorConfig& cfg);

/// First time N crosses `threshold` from below, refined on the dense output.
std::optional<double> first_upward_crossing_N(const Trajectory& traj, double threshold);

/// Same for the resistant population (failure definition for idealized runs).
std::optional<double> first_upward_crossing_R(const Trajectory& traj, double threshold);

OutcomeMetrics outcome_metrics(const Trajectory& traj, double N0, double N_tol, double N_crit);

TumorState apply_ideal_reset(const TumorState& state, const ResetAction& action);

}  // namespace contain
