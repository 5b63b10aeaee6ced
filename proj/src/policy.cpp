#include "contain/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace contain {

const char* to_string(Phase phase) {
  switch (phase) {
    case Phase::Grow: return "grow";
    case Phase::Dosing: return "dosing";
    case Phase::Stabilize: return "stabilize";
    case Phase::Saturated: return "saturated";
    case Phase::Treat: return "treat";
    case Phase::Vacation: return "vacation";
    case Phase::Slide: return "slide";
    case Phase::Pinned: return "pinned";
  }
  return "?";
}

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::ReachedThresholdUp: return "reached_threshold_up";
    case EventKind::ReachedThresholdDown: return "reached_threshold_down";
    case EventKind::DoseSaturated: return "dose_saturated";
    case EventKind::SensitiveExtinct: return "sensitive_extinct";
    case EventKind::Breakpoint: return "breakpoint";
    case EventKind::IdealReset: return "ideal_reset";
    case EventKind::SurvivalThreshold: return "survival_threshold";
  }
  return "?";
}

double DoseSchedule::at(double t) const {
  double level = 0.0;
  for (const auto& [t_start, l] : breakpoints) {
    if (t_start > t) break;
    level = l;
  }
  return level;
}

namespace {
void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}
}  // namespace

Policy Policy::no_treat(double n_tol) {
  require(n_tol > 0.0, "Policy: n_tol must be > 0");
  Policy p;
  p.kind = Kind::NoTreat;
  p.n_tol = n_tol;
  return p;
}

Policy Policy::constant_dose(double level, double n_tol) {
  require(level >= 0.0, "Policy: dose level must be >= 0");
  Policy p = no_treat(n_tol);
  p.kind = Kind::ConstantDose;
  p.dose_level = level;
  return p;
}

Policy Policy::mtd(double n_tol) {
  Policy p = no_treat(n_tol);
  p.kind = Kind::Mtd;
  return p;
}

Policy Policy::delayed_mtd(double n_tol) {
  Policy p = no_treat(n_tol);
  p.kind = Kind::DelayedMtd;
  p.start_threshold = n_tol;
  return p;
}

Policy Policy::delayed_dose(double level, double start_threshold, double n_tol) {
  require(level >= 0.0 && start_threshold > 0.0, "Policy: bad delayed dose parameters");
  Policy p = no_treat(n_tol);
  p.kind = Kind::DelayedDose;
  p.dose_level = level;
  p.start_threshold = start_threshold;
  return p;
}

Policy Policy::containment(double threshold, double n_tol) {
  require(threshold > 0.0, "Policy: containment threshold must be > 0");
  Policy p = no_treat(n_tol);
  p.kind = Kind::Containment;
  p.threshold = threshold;
  return p;
}

Policy Policy::intermittent(double n_min, double n_tol) {
  require(n_min > 0.0 && n_min < n_tol, "Policy: intermittent requires 0 < N_min < N_tol");
  Policy p = no_treat(n_tol);
  p.kind = Kind::Intermittent;
  p.band_low = n_min;
  p.band_high = n_tol;
  return p;
}

Policy Policy::ideal_mtd(double n_tol) {
  Policy p = no_treat(n_tol);
  p.kind = Kind::IdealMtd;
  return p;
}

Policy Policy::delayed_ideal_mtd(double n_tol) {
  Policy p = no_treat(n_tol);
  p.kind = Kind::DelayedIdealMtd;
  p.start_threshold = n_tol;
  return p;
}

Policy Policy::ideal_containment(double threshold, double n_tol) {
  require(threshold > 0.0, "Policy: containment threshold must be > 0");
  Policy p = no_treat(n_tol);
  p.kind = Kind::IdealContainment;
  p.threshold = threshold;
  return p;
}

Policy Policy::ideal_intermittent(double n_min, double n_tol) {
  require(n_min > 0.0 && n_min < n_tol, "Policy: intermittent requires 0 < N_min < N_tol");
  Policy p = no_treat(n_tol);
  p.kind = Kind::IdealIntermittent;
  p.band_low = n_min;
  p.band_high = n_tol;
  return p;
}

Policy Policy::alternative(DoseSchedule schedule, double n_tol, bool feedback_override) {
  Policy p = no_treat(n_tol);
  p.kind = Kind::Alternative;
  p.schedule = std::move(schedule);
  p.feedback_override = feedback_override;
  for (size_t i = 0; i + 1 < p.schedule.breakpoints.size(); ++i) {
    require(p.schedule.breakpoints[i].first < p.schedule.breakpoints[i + 1].first,
            "Policy: schedule breakpoints must be strictly increasing in t");
  }
  return p;
}

Policy Policy::ideal_alternative(DoseSchedule schedule, double reset_time, double n_tol) {
  Policy p = alternative(std::move(schedule), n_tol, true);
  require(reset_time >= 0.0, "Policy: reset time must be >= 0");
  p.ideal_reset_time = reset_time;
  return p;
}

std::string Policy::name() const {
  switch (kind) {
    case Kind::NoTreat: return "notreat";
    case Kind::ConstantDose: return "const";
    case Kind::Mtd: return "mtd";
    case Kind::DelayedMtd: return "delmtd";
    case Kind::DelayedDose: return "deldose";
    case Kind::Containment: return "cont";
    case Kind::Intermittent: return "int";
    case Kind::IdealMtd: return "idmtd";
    case Kind::DelayedIdealMtd: return "delidmtd";
    case Kind::IdealContainment: return "idcont";
    case Kind::IdealIntermittent: return "idint";
    case Kind::Alternative: return ideal_reset_time ? "idalt" : "alt";
  }
  return "?";
}

namespace {

// Finds the dose whose f_N sits in [-depth*f_R, -depth*f_R/2]: a hair into
// shrinkage, so a feedback-held plateau can only sag, never drift upward
// through its threshold.
StabilizingDose solve_hold_dose(const TumorModel& model, double N, double R, double depth) {
  if (!(R < N)) {
    throw std::domain_error("stabilizing_dose: no sensitive cells (R >= N)");
  }
  const double f_R_abs = std::abs(raw_fn_fr(model, N, R, 0.0).f_R);
  const double sat_tol = 1e-9 * f_R_abs;
  const double at_max = raw_fn_fr(model, N, R, model.L_max).f_N;
  if (at_max > sat_tol) return {model.L_max, true};
  const double target = -0.75 * depth * f_R_abs;
  const double width = 0.25 * depth * f_R_abs;
  const double at_zero = raw_fn_fr(model, N, R, 0.0).f_N;
  if (at_zero <= target + width) return {0.0, false};
  if (at_max > target + width) return {model.L_max, false};  // band sits at the box edge

  double lo = 0.0, hi = model.L_max;  // f_N(lo) > target > f_N(hi)
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double fm = raw_fn_fr(model, N, R, mid).f_N;
    if (std::abs(fm - target) <= width) return {mid, false};
    if (fm > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {hi, false};
}

}  // namespace

StabilizingDose stabilizing_dose(const TumorModel& model, double N, double R) {
  return solve_hold_dose(model, N, R, 1e-9);
}

double plateau_hold_dose(const TumorModel& model, double N, double R) {
  return solve_hold_dose(model, N, R, 3e-8).dose;
}

double dose(const Policy& policy, Phase phase, const TumorModel& model, double S, double R,
            double t) {
  switch (phase) {
    case Phase::Grow:
    case Phase::Vacation:
      return 0.0;
    case Phase::Treat:
    case Phase::Saturated:
    case Phase::Pinned:
      return model.L_max;
    case Phase::Stabilize:
    case Phase::Slide: {
      const double N = S + R;
      if (!(R < N)) return model.L_max;
      return std::clamp(stabilizing_dose(model, N, R).dose, 0.0, model.L_max);
    }
    case Phase::Dosing:
      switch (policy.kind) {
        case Policy::Kind::NoTreat: return 0.0;
        case Policy::Kind::ConstantDose:
        case Policy::Kind::DelayedDose: return policy.dose_level;
        case Policy::Kind::Mtd:
        case Policy::Kind::DelayedMtd: return model.L_max;
        case Policy::Kind::Alternative: return policy.schedule.at(t);
        default: break;
      }
      throw std::invalid_argument("dose: phase/policy mismatch");
  }
  throw std::invalid_argument("dose: unknown phase");
}

PhaseTransition transition(const Policy& policy, Phase current, const PolicyEvent& event) {
  auto bad = [&]() -> PhaseTransition {
    throw std::invalid_argument(std::string("transition: policy ") + policy.name() +
                                " in phase " + to_string(current) +
                                " cannot receive event " + to_string(event.kind));
  };
  switch (policy.kind) {
    case Policy::Kind::NoTreat:
    case Policy::Kind::ConstantDose:
    case Policy::Kind::Mtd:
      return bad();
    case Policy::Kind::DelayedMtd:
    case Policy::Kind::DelayedDose:
      if (current == Phase::Grow && event.kind == EventKind::ReachedThresholdUp) {
        return {Phase::Dosing, std::nullopt};
      }
      return bad();
    case Policy::Kind::Containment:
      if (current == Phase::Grow && event.kind == EventKind::ReachedThresholdUp) {
        return {Phase::Stabilize, std::nullopt};
      }
      if (current == Phase::Stabilize && event.kind == EventKind::DoseSaturated) {
        return {Phase::Saturated, std::nullopt};
      }
      if (current == Phase::Stabilize && event.kind == EventKind::SensitiveExtinct) {
        return {Phase::Saturated, std::nullopt};
      }
      if (current == Phase::Saturated && event.kind == EventKind::ReachedThresholdDown) {
        return {Phase::Stabilize, std::nullopt};
      }
      return bad();
    case Policy::Kind::Intermittent:
      if (current == Phase::Vacation && event.kind == EventKind::ReachedThresholdUp) {
        return {Phase::Treat, std::nullopt};
      }
      if (current == Phase::Treat && event.kind == EventKind::ReachedThresholdDown) {
        return {Phase::Vacation, std::nullopt};
      }
      return bad();
    case Policy::Kind::IdealMtd:
      if (event.kind == EventKind::IdealReset) {
        return {Phase::Pinned, ResetAction::eliminate_sensitive()};
      }
      return bad();
    case Policy::Kind::DelayedIdealMtd:
      if (current == Phase::Grow && event.kind == EventKind::ReachedThresholdUp) {
        return {Phase::Pinned, ResetAction::eliminate_sensitive()};
      }
      return bad();
    case Policy::Kind::IdealContainment:
      if (current == Phase::Grow && event.kind == EventKind::ReachedThresholdUp) {
        return {Phase::Stabilize, std::nullopt};
      }
      if (current == Phase::Grow && event.kind == EventKind::IdealReset) {
        return {Phase::Stabilize, ResetAction::drop_to(policy.threshold)};
      }
      if (current == Phase::Stabilize && event.kind == EventKind::SensitiveExtinct) {
        return {Phase::Pinned, std::nullopt};
      }
      return bad();
    case Policy::Kind::IdealIntermittent:
      if (current == Phase::Grow && event.kind == EventKind::ReachedThresholdUp) {
        return {Phase::Grow, ResetAction::drop_to(policy.band_low)};
      }
      return bad();
    case Policy::Kind::Alternative:
      if (event.kind == EventKind::IdealReset) {
        return {Phase::Pinned, ResetAction::eliminate_sensitive()};
      }
      if (event.kind == EventKind::Breakpoint &&
          (current == Phase::Dosing || current == Phase::Slide)) {
        return {current, std::nullopt};
      }
      if (current == Phase::Dosing && event.kind == EventKind::ReachedThresholdUp) {
        return {Phase::Saturated, std::nullopt};
      }
      if ((current == Phase::Saturated || current == Phase::Slide) &&
          event.kind == EventKind::ReachedThresholdDown) {
        return {Phase::Dosing, std::nullopt};
      }
      if (current == Phase::Slide && event.kind == EventKind::DoseSaturated) {
        return {Phase::Saturated, std::nullopt};
      }
      return bad();
  }
  return bad();
}

}  // namespace contain
