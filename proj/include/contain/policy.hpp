// Treatment policies: dose controllers with explicit phases, the feedback
// stabilizing dose for containment, and instantaneous resets for the
// idealized treatments.
#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "contain/model.hpp"

namespace contain {

/// Controller phase. Which phases a policy visits depends on its variant; the
/// simulator owns the transitions.
enum class Phase {
  Grow,       // untreated growth (dose 0)
  Dosing,     // constant or scheduled dose
  Stabilize,  // feedback dose holding N at the containment threshold
  Saturated,  // stabilizing dose exceeds L_max; treating at L_max
  Treat,      // intermittent: high-dose leg (L_max)
  Vacation,   // intermittent: treatment interruption (dose 0)
  Slide,      // alternative pinned at N_tol between schedule dose and L_max
  Pinned,     // idealized: sensitive population held at zero
};

const char* to_string(Phase phase);

/// Instantaneous reduction of the sensitive population.
struct ResetAction {
  enum class Kind {
    EliminateSensitive,  // S -> 0
    DropTo,              // N -> max(n_min, R), S adjusted
  };
  Kind kind = Kind::EliminateSensitive;
  double n_min = 0.0;  // DropTo only

  static ResetAction eliminate_sensitive() { return {Kind::EliminateSensitive, 0.0}; }
  static ResetAction drop_to(double n_min) { return {Kind::DropTo, n_min}; }
};

/// Piecewise-constant dose schedule: level of the last breakpoint at or before t.
struct DoseSchedule {
  std::vector<std::pair<double, double>> breakpoints;  // (t_start, level), t ascending

  double at(double t) const;
};

/// A treatment policy. `n_tol` is the maximal tolerable tumor size shared with
/// the scenario: every variant except the constant-dose ones treats at L_max
/// whenever N > n_tol.
struct Policy {
  enum class Kind {
    NoTreat,
    ConstantDose,
    Mtd,
    DelayedMtd,
    DelayedDose,  // constant dose after N first reaches start_threshold, no override
    Containment,
    Intermittent,
    IdealMtd,
    DelayedIdealMtd,
    IdealContainment,
    IdealIntermittent,
    Alternative,
  };

  Kind kind = Kind::NoTreat;
  double n_tol = 0.0;
  double dose_level = 0.0;       // ConstantDose, DelayedDose
  double start_threshold = 0.0;  // DelayedMtd, DelayedDose
  double threshold = 0.0;        // Containment, IdealContainment
  double band_low = 0.0;         // Intermittent, IdealIntermittent (N_min)
  double band_high = 0.0;        // Intermittent, IdealIntermittent (upper threshold)
  DoseSchedule schedule;         // Alternative
  bool feedback_override = true; // Alternative
  std::optional<double> ideal_reset_time;  // Alternative: eliminate sensitive cells at this time

  static Policy no_treat(double n_tol);
  static Policy constant_dose(double level, double n_tol);
  static Policy mtd(double n_tol);
  static Policy delayed_mtd(double n_tol);
  static Policy delayed_dose(double level, double start_threshold, double n_tol);
  static Policy containment(double threshold, double n_tol);
  static Policy intermittent(double n_min, double n_tol);
  static Policy ideal_mtd(double n_tol);
  static Policy delayed_ideal_mtd(double n_tol);
  static Policy ideal_containment(double threshold, double n_tol);
  static Policy ideal_intermittent(double n_min, double n_tol);
  static Policy alternative(DoseSchedule schedule, double n_tol, bool feedback_override = true);
  static Policy ideal_alternative(DoseSchedule schedule, double reset_time, double n_tol);

  std::string name() const;
};

/// Result of solving f_N(N, R, L) = 0 for L on [0, L_max].
struct StabilizingDose {
  double dose = 0.0;
  bool saturated = false;  // f_N(N, R, L_max) > 0: containment not possible
};

/// Dose that freezes tumor size, found by bisection on the monotone map
/// L -> f_N(N, R, L); the root is located to |f_N| <= 1e-9 * f_R(N, R).
/// Throws if R >= N (no sensitive cells to act on).
StabilizingDose stabilizing_dose(const TumorModel& model, double N, double R);

/// Hold dose for two-compartment feedback integration of a plateau: same
/// root, biased a little deeper into shrinkage (|f_N| <= 3e-8 * f_R) so the
/// held size cannot wander upward across its threshold between solves.
double plateau_hold_dose(const TumorModel& model, double N, double R);

/// Current dose for a policy in a given phase at state (S, R, t). Total over
/// valid (phase, state) combinations; the simulator maintains consistency.
double dose(const Policy& policy, Phase phase, const TumorModel& model, double S, double R,
            double t);

/// Discrete occurrences the phase machine reacts to.
enum class EventKind {
  ReachedThresholdUp,
  ReachedThresholdDown,
  DoseSaturated,
  SensitiveExtinct,
  Breakpoint,
  IdealReset,
  SurvivalThreshold,
};

const char* to_string(EventKind kind);

struct PolicyEvent {
  EventKind kind = EventKind::ReachedThresholdUp;
  double threshold = 0.0;
};

struct PhaseTransition {
  Phase next = Phase::Grow;
  std::optional<ResetAction> reset;
};

/// Deterministic phase map. Throws on event kinds a policy cannot receive in
/// the given phase.
PhaseTransition transition(const Policy& policy, Phase current, const PolicyEvent& event);

}  // namespace contain
