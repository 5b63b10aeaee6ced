#include "contain/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace contain {

namespace {

constexpr int kEvSurvival = 100;  // internal: N crossed N_crit
constexpr int kEvGuard = 101;     // internal: S went convincingly negative

// Trial Runge-Kutta stages can land far outside the model domain; rate
// evaluations clamp populations to this floor and report NaN for non-finite
// states, which the step controller treats as a rejection.
constexpr double kStageFloor = 1e-6;

double qnan() { return std::numeric_limits<double>::quiet_NaN(); }

double hermite1(double t, double t0, double y0, double f0, double t1, double y1, double f1) {
  const double h = t1 - t0;
  const double s = (t - t0) / h;
  const double s2 = s * s, s3 = s2 * s;
  return (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * h * f0 +
         (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * h * f1;
}

enum class ReducedMode { Stabilized, Pinned };

struct Runner {
  const TumorModel& model;
  const Policy& policy;
  const IntegratorConfig& cfg;

  Trajectory traj;
  Phase phase = Phase::Grow;
  double t = 0.0, S = 0.0, R = 0.0;
  std::optional<double> t_cut;  // end of the post-survival margin
  bool survival_seen = false;
  bool done = false;

  Runner(const TumorModel& m, const Policy& p, const IntegratorConfig& c, const TumorState& init)
      : model(m), policy(p), cfg(c), t(init.t), S(init.S), R(init.R) {
    traj.event_time_tol = cfg.event_time_tol;
  }

  double t_stop() const { return t_cut ? std::min(*t_cut, cfg.horizon) : cfg.horizon; }

  double sat_tol(double N, double R_) const {
    return 1e-9 * std::abs(raw_fn_fr(model, N, R_, 0.0).f_R);
  }

  void push_sample(double tt, double S_, double R_, double N_, double dS, double dR) {
    const double L = dose(policy, phase, model, S_, R_, tt);
    traj.samples.push_back({tt, S_, R_, N_, L, phase, dS, dR});
  }

  void record_event(EventKind kind, double S_before, double R_before) {
    traj.events.push_back({kind, t, S_before, R_before, S, R});
  }

  void note_survival_crossing() {
    if (survival_seen) return;
    survival_seen = true;
    record_event(EventKind::SurvivalThreshold, S, R);
    const double margin = std::max(0.005 * std::max(t, 1.0), 50.0 * cfg.event_time_tol);
    t_cut = t + margin;
  }

  // Full two-compartment dynamics at the phase's dose (or `dose_fn` when
  // given). Handles the survival crossing internally; returns the id of the
  // first external event, or -1 once the stop time is reached (sets done).
  int run_full(std::vector<EventSpec<2>> events,
               const std::function<double(double, double, double)>& dose_fn = {}) {
    events.push_back({[this](double, const StateVec<2>& y) { return y[0] + y[1] - model.N_crit; },
                      +1, kEvSurvival});
    events.push_back({[this](double, const StateVec<2>& y) { return -(y[0] + 10.0 * cfg.abs_tol); },
                      +1, kEvGuard});
    const RhsFn<2> rhs = [this, &dose_fn](double tt, const StateVec<2>& y) -> StateVec<2> {
      if (!y.allFinite()) return StateVec<2>{qnan(), qnan()};
      const double S_ = std::max(y[0], 0.0);
      const double R_ = std::max(y[1], kStageFloor);
      const double L = dose_fn ? dose_fn(tt, S_, R_) : dose(policy, phase, model, S_, R_, tt);
      const Rates r = raw_rates(model, S_, R_, L);
      return StateVec<2>{r.phi_S, r.phi_R};
    };
    const SampleFn<2> on_sample = [this](double tt, const StateVec<2>& y, const StateVec<2>& f) {
      push_sample(tt, y[0], y[1], y[0] + y[1], f[0], f[1]);
    };
    while (!done) {
      const auto end = integrate_segment<2>(rhs, t, StateVec<2>{S, R}, t_stop(), events, cfg,
                                            on_sample, true);
      t = end.t;
      S = std::max(end.y[0], 0.0);
      R = end.y[1];
      if (end.event_id == kEvGuard) {
        throw std::runtime_error("simulate: sensitive population left the domain (S < -10*abs_tol) at t=" +
                                 std::to_string(t));
      }
      if (end.event_id == kEvSurvival) {
        note_survival_crossing();
        continue;
      }
      if (end.event_id < 0) {
        done = true;
        return -1;
      }
      return end.event_id;
    }
    return -1;
  }

  // One-dimensional dynamics for plateaus (S = level - R, N = level) and for
  // pinned-sensitive phases (S = 0, N = R).
  int run_reduced(ReducedMode mode, double level, std::vector<EventSpec<1>> events) {
    if (mode == ReducedMode::Pinned) {
      events.push_back(
          {[this](double, const StateVec<1>& y) { return y[0] - model.N_crit; }, +1, kEvSurvival});
    }
    const RhsFn<1> rhs = [this, mode, level](double, const StateVec<1>& y) -> StateVec<1> {
      if (!std::isfinite(y[0])) return StateVec<1>{qnan()};
      const double R_ = std::max(y[0], kStageFloor);
      if (mode == ReducedMode::Stabilized) {
        return StateVec<1>{raw_fn_fr(model, level, R_, 0.0).f_R};
      }
      return StateVec<1>{raw_rates(model, 0.0, R_, 0.0).phi_R};
    };
    const SampleFn<1> on_sample = [this, mode, level](double tt, const StateVec<1>& y,
                                                      const StateVec<1>& f) {
      if (mode == ReducedMode::Stabilized) {
        push_sample(tt, std::max(level - y[0], 0.0), y[0], level, -f[0], f[0]);
      } else {
        push_sample(tt, 0.0, y[0], y[0], 0.0, f[0]);
      }
    };
    while (!done) {
      const auto end =
          integrate_segment<1>(rhs, t, StateVec<1>{R}, t_stop(), events, cfg, on_sample, true);
      t = end.t;
      R = end.y[0];
      S = (mode == ReducedMode::Stabilized) ? std::max(level - R, 0.0) : 0.0;
      if (end.event_id == kEvSurvival) {
        note_survival_crossing();
        continue;
      }
      if (end.event_id < 0) {
        done = true;
        return -1;
      }
      return end.event_id;
    }
    return -1;
  }

  EventSpec<2> up_event(double threshold, int id) const {
    return {[threshold](double, const StateVec<2>& y) { return y[0] + y[1] - threshold; }, +1, id};
  }
  EventSpec<2> down_event(double threshold, int id) const {
    return {[threshold](double, const StateVec<2>& y) { return y[0] + y[1] - threshold; }, -1, id};
  }
  EventSpec<2> time_event2(double when, int id) const {
    return {[when](double tt, const StateVec<2>&) { return tt - when; }, +1, id};
  }
  EventSpec<1> time_event1(double when, int id) const {
    return {[when](double tt, const StateVec<1>&) { return tt - when; }, +1, id};
  }

  void snap_to(double level) {
    // Entering a plateau: pin N to the threshold exactly; the adjustment is
    // below the event-location error. The located sample is rewritten too so
    // the stored trajectory touches the threshold instead of overshooting it.
    S = std::max(level - R, 0.0);
    if (!traj.samples.empty() && traj.samples.back().t == t) {
      TrajectorySample& back = traj.samples.back();
      back.S = S;
      back.R = R;
      back.N = level;
    }
  }

  void ensure_sample_now() {
    if (!traj.samples.empty() && traj.samples.back().t == t) return;
    const double L = dose(policy, phase, model, S, R, t);
    const Rates r = raw_rates(model, S, R, L);
    push_sample(t, S, R, S + R, r.phi_S, r.phi_R);
  }

  void apply_reset(const ResetAction& action) {
    ensure_sample_now();
    const TumorState before{S, R, t};
    const TumorState after = apply_ideal_reset(before, action);
    S = after.S;
    R = after.R;
    traj.events.push_back({EventKind::IdealReset, t, before.S, before.R, S, R});
  }

  // ---- drivers ------------------------------------------------------------

  void drive_constant() {
    phase = Phase::Dosing;
    run_full({});
  }

  void drive_delayed() {
    if (S + R < policy.start_threshold) {
      phase = Phase::Grow;
      if (run_full({up_event(policy.start_threshold, 0)}) < 0) return;
      const double Sb = S, Rb = R;
      phase = transition(policy, phase, {EventKind::ReachedThresholdUp, policy.start_threshold})
                  .next;
      record_event(EventKind::ReachedThresholdUp, Sb, Rb);
    } else {
      phase = Phase::Dosing;
    }
    run_full({});
  }

  void drive_containment() {
    const double C = policy.threshold;
    const double band = 1e-9 * std::max(C, 1.0);
    while (!done) {
      const double N = S + R;
      if (N < C - band) {
        phase = Phase::Grow;
        if (run_full({up_event(C, 0)}) < 0) return;
        record_event(EventKind::ReachedThresholdUp, S, R);
        snap_to(C);
        continue;
      }
      if (N > C + band) {
        phase = Phase::Saturated;
        if (run_full({down_event(C, 0)}) < 0) return;
        record_event(EventKind::ReachedThresholdDown, S, R);
        snap_to(C);
        continue;
      }
      if (R >= C * (1.0 - 1e-12)) {
        // No sensitive cells left to act on; the plateau cannot be held.
        phase = Phase::Saturated;
        if (run_full({down_event(C, 0)}) < 0) return;
        record_event(EventKind::ReachedThresholdDown, S, R);
        snap_to(C);
        continue;
      }
      if (raw_fn_fr(model, C, R, model.L_max).f_N > sat_tol(C, R)) {
        phase = Phase::Saturated;
        if (run_full({down_event(C, 0)}) < 0) return;
        record_event(EventKind::ReachedThresholdDown, S, R);
        snap_to(C);
        continue;
      }
      int ev;
      if (cfg.feedback_stabilization) {
        phase = Phase::Stabilize;
        snap_to(C);
        ev = run_full({{[this](double, const StateVec<2>& y) {
                          const double N_ = y[0] + y[1];
                          return raw_fn_fr(model, N_, y[1], model.L_max).f_N - sat_tol(N_, y[1]);
                        },
                        +1, 1}},
                      [this](double, double S_, double R_) {
                        if (S_ <= 0.0) return model.L_max;
                        return std::clamp(plateau_hold_dose(model, S_ + R_, R_), 0.0,
                                          model.L_max);
                      });
      } else {
        phase = Phase::Stabilize;
        snap_to(C);
        ev = run_reduced(
            ReducedMode::Stabilized, C,
            {{[this, C](double, const StateVec<1>& y) {
                return raw_fn_fr(model, C, y[0], model.L_max).f_N - sat_tol(C, y[0]);
              },
              +1, 1},
             {[C](double, const StateVec<1>& y) { return y[0] - C * (1.0 - 1e-12); }, +1, 2}});
      }
      if (ev < 0) return;
      record_event(ev == 1 ? EventKind::DoseSaturated : EventKind::SensitiveExtinct, S, R);
      // Loop re-decides; a true saturation lands in the Saturated branch.
    }
  }

  void drive_intermittent() {
    phase = (S + R >= policy.band_high) ? Phase::Treat : Phase::Vacation;
    while (!done) {
      if (phase == Phase::Vacation) {
        if (run_full({up_event(policy.band_high, 0)}) < 0) return;
        const double Sb = S, Rb = R;
        phase =
            transition(policy, phase, {EventKind::ReachedThresholdUp, policy.band_high}).next;
        record_event(EventKind::ReachedThresholdUp, Sb, Rb);
      } else {
        if (run_full({down_event(policy.band_low, 0)}) < 0) return;
        const double Sb = S, Rb = R;
        phase =
            transition(policy, phase, {EventKind::ReachedThresholdDown, policy.band_low}).next;
        record_event(EventKind::ReachedThresholdDown, Sb, Rb);
      }
    }
  }

  void run_pinned() {
    phase = Phase::Pinned;
    run_reduced(ReducedMode::Pinned, 0.0, {});
  }

  void drive_ideal_mtd() {
    apply_reset(ResetAction::eliminate_sensitive());
    run_pinned();
  }

  void drive_delayed_ideal_mtd() {
    if (S + R < policy.start_threshold) {
      phase = Phase::Grow;
      if (run_full({up_event(policy.start_threshold, 0)}) < 0) return;
      record_event(EventKind::ReachedThresholdUp, S, R);
      snap_to(policy.start_threshold);
    }
    apply_reset(ResetAction::eliminate_sensitive());
    run_pinned();
  }

  void drive_ideal_containment() {
    const double C = policy.threshold;
    const double band = 1e-9 * std::max(C, 1.0);
    if (S + R > C + band) {
      apply_reset(ResetAction::drop_to(C));
    } else if (S + R < C - band) {
      phase = Phase::Grow;
      if (run_full({up_event(C, 0)}) < 0) return;
      record_event(EventKind::ReachedThresholdUp, S, R);
      snap_to(C);
    } else {
      snap_to(C);
    }
    if (S > 0.0 && R < C * (1.0 - 1e-12)) {
      phase = Phase::Stabilize;
      const int ev = run_reduced(
          ReducedMode::Stabilized, C,
          {{[C](double, const StateVec<1>& y) { return y[0] - C; }, +1, 2}});
      if (ev < 0) return;
      S = 0.0;
      record_event(EventKind::SensitiveExtinct, std::max(C - R, 0.0), R);
    } else {
      S = 0.0;
      record_event(EventKind::SensitiveExtinct, S, R);
    }
    run_pinned();
  }

  void drive_ideal_intermittent() {
    const double band = 1e-9 * std::max(policy.band_high, 1.0);
    while (!done) {
      if (S + R >= policy.band_high - band) {
        apply_reset(ResetAction::drop_to(policy.band_low));
        if (S <= 0.0) {
          record_event(EventKind::SensitiveExtinct, S, R);
          run_pinned();
          return;
        }
      }
      phase = Phase::Grow;
      if (run_full({up_event(policy.band_high, 0)}) < 0) return;
      record_event(EventKind::ReachedThresholdUp, S, R);
      snap_to(policy.band_high);
    }
  }

  void drive_alternative() {
    phase = Phase::Dosing;
    bool reset_pending = policy.ideal_reset_time.has_value();
    const double C = policy.n_tol;
    while (!done) {
      if (reset_pending && t >= *policy.ideal_reset_time) {
        apply_reset(ResetAction::eliminate_sensitive());
        run_pinned();
        return;
      }
      if (phase == Phase::Dosing && policy.feedback_override &&
          S + R > C * (1.0 + 1e-12)) {
        phase = Phase::Saturated;
      }
      if (phase == Phase::Slide &&
          raw_fn_fr(model, C, R, policy.schedule.at(t)).f_N < 0.0) {
        phase = Phase::Dosing;  // the scheduled dose now pushes N below N_tol
      }

      // Next schedule breakpoint strictly ahead of t.
      double t_bp = std::numeric_limits<double>::infinity();
      for (const auto& [tb, l] : policy.schedule.breakpoints) {
        if (tb > t) {
          t_bp = tb;
          break;
        }
      }

      if (phase == Phase::Dosing) {
        std::vector<EventSpec<2>> events;
        if (policy.feedback_override) events.push_back(up_event(C, 0));
        if (std::isfinite(t_bp)) events.push_back(time_event2(t_bp, 4));
        if (reset_pending) events.push_back(time_event2(*policy.ideal_reset_time, 5));
        const int ev = run_full(std::move(events));
        if (ev < 0) return;
        if (ev == 0) {
          record_event(EventKind::ReachedThresholdUp, S, R);
          snap_to(C);
          if (reset_pending) {
            // Idealized alternatives eliminate sensitive cells no later than
            // the moment tumor size reaches N_tol.
            apply_reset(ResetAction::eliminate_sensitive());
            run_pinned();
            return;
          }
          phase = Phase::Saturated;
        } else if (ev == 4) {
          record_event(EventKind::Breakpoint, S, R);
        }
        // ev == 5 handled at loop top
        continue;
      }
      if (phase == Phase::Saturated) {
        std::vector<EventSpec<2>> events{down_event(C, 1)};
        if (reset_pending) events.push_back(time_event2(*policy.ideal_reset_time, 5));
        const int ev = run_full(std::move(events));
        if (ev < 0) return;
        if (ev == 1) {
          record_event(EventKind::ReachedThresholdDown, S, R);
          snap_to(C);
          phase = (raw_fn_fr(model, C, R, policy.schedule.at(t)).f_N >= 0.0) ? Phase::Slide
                                                                             : Phase::Dosing;
        }
        continue;
      }
      // Slide: hold N at N_tol while the schedule would push it up and L_max
      // can still push it down.
      std::vector<EventSpec<1>> events{
          {[this, C](double, const StateVec<1>& y) {
             return raw_fn_fr(model, C, y[0], model.L_max).f_N - sat_tol(C, y[0]);
           },
           +1, 1},
          {[this, C](double tt, const StateVec<1>& y) {
             return raw_fn_fr(model, C, y[0], policy.schedule.at(tt)).f_N;
           },
           -1, 2},
          {[C](double, const StateVec<1>& y) { return y[0] - C * (1.0 - 1e-12); }, +1, 3}};
      if (std::isfinite(t_bp)) events.push_back(time_event1(t_bp, 4));
      if (reset_pending) events.push_back(time_event1(*policy.ideal_reset_time, 5));
      phase = Phase::Slide;
      const int ev = run_reduced(ReducedMode::Stabilized, C, std::move(events));
      if (ev < 0) return;
      if (ev == 1) {
        record_event(EventKind::DoseSaturated, S, R);
        phase = Phase::Saturated;
      } else if (ev == 2) {
        record_event(EventKind::ReachedThresholdDown, S, R);
        phase = Phase::Dosing;
      } else if (ev == 3) {
        record_event(EventKind::SensitiveExtinct, S, R);
        phase = Phase::Saturated;
      } else if (ev == 4) {
        record_event(EventKind::Breakpoint, S, R);
      }
    }
  }

  void run() {
    switch (policy.kind) {
      case Policy::Kind::NoTreat:
      case Policy::Kind::ConstantDose:
      case Policy::Kind::Mtd:
        drive_constant();
        return;
      case Policy::Kind::DelayedMtd:
      case Policy::Kind::DelayedDose:
        drive_delayed();
        return;
      case Policy::Kind::Containment:
        drive_containment();
        return;
      case Policy::Kind::Intermittent:
        drive_intermittent();
        return;
      case Policy::Kind::IdealMtd:
        drive_ideal_mtd();
        return;
      case Policy::Kind::DelayedIdealMtd:
        drive_delayed_ideal_mtd();
        return;
      case Policy::Kind::IdealContainment:
        drive_ideal_containment();
        return;
      case Policy::Kind::IdealIntermittent:
        drive_ideal_intermittent();
        return;
      case Policy::Kind::Alternative:
        drive_alternative();
        return;
    }
    throw std::logic_error("simulate: unknown policy kind");
  }
};

std::optional<double> first_crossing(const Trajectory& traj, double threshold, bool use_R) {
  // A guard band of 1e-9 relative keeps solver-level wiggle on a feedback-held
  // plateau from counting as a crossing; it biases genuine crossing times by
  // far less than the event time tolerance.
  const double thr = threshold + 1e-9 * std::max(std::abs(threshold), 1.0);
  for (size_t i = 0; i + 1 < traj.samples.size(); ++i) {
    const TrajectorySample& a = traj.samples[i];
    const TrajectorySample& b = traj.samples[i + 1];
    const double va = use_R ? a.R : a.N;
    const double vb = use_R ? b.R : b.N;
    if (!(va <= thr && vb > thr)) continue;
    if (!(b.t > a.t)) return a.t;  // instantaneous crossing at a transition/reset pair
    const double fa = use_R ? a.dR : (a.dS + a.dR);
    const double fb = use_R ? b.dR : (b.dS + b.dR);
    const auto value = [&](double tt) { return hermite1(tt, a.t, va, fa, b.t, vb, fb); };
    return locate_threshold_crossing(value, a.t, b.t, thr, traj.event_time_tol);
  }
  return std::nullopt;
}

}  // namespace

SimulationResult simulate(const TumorModel& model, const Policy& policy, const TumorState& init,
                          const IntegratorConfig& cfg) {
  if (!(init.S >= 0.0) || !(init.R > 0.0)) {
    throw std::invalid_argument("simulate: requires S0 >= 0 and R0 > 0");
  }
  if (!(cfg.horizon > init.t)) {
    throw std::invalid_argument("simulate: horizon must exceed the initial time");
  }
  if ((policy.kind == Policy::Kind::ConstantDose || policy.kind == Policy::Kind::DelayedDose) &&
      policy.dose_level > model.L_max) {
    throw std::invalid_argument("simulate: constant dose exceeds L_max");
  }
  for (const auto& [t_bp, level] : policy.schedule.breakpoints) {
    if (level < 0.0 || level > model.L_max) {
      throw std::invalid_argument("simulate: schedule dose outside [0, L_max]");
    }
  }
  Runner runner(model, policy, cfg, init);
  runner.run();
  SimulationResult result{std::move(runner.traj), {}};
  result.metrics =
      outcome_metrics(result.trajectory, init.S + init.R, policy.n_tol, model.N_crit);
  return result;
}

std::optional<double> first_upward_crossing_N(const Trajectory& traj, double threshold) {
  return first_crossing(traj, threshold, false);
}

std::optional<double> first_upward_crossing_R(const Trajectory& traj, double threshold) {
  return first_crossing(traj, threshold, true);
}

OutcomeMetrics outcome_metrics(const Trajectory& traj, double N0, double N_tol, double N_crit) {
  OutcomeMetrics m;
  m.t_progression = first_upward_crossing_N(traj, N0);
  m.t_failure = first_upward_crossing_N(traj, N_tol);
  m.t_survival = first_upward_crossing_N(traj, N_crit);
  return m;
}

TumorState apply_ideal_reset(const TumorState& state, const ResetAction& action) {
  switch (action.kind) {
    case ResetAction::Kind::EliminateSensitive:
      return {0.0, state.R, state.t};
    case ResetAction::Kind::DropTo: {
      const double N = std::max(action.n_min, state.R);
      return {N - state.R, state.R, state.t};
    }
  }
  throw std::logic_error("apply_ideal_reset: unknown action");
}

}  // namespace contain
