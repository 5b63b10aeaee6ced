#include "contain/rnplane.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace contain {

namespace {

// Curves are cut once tumor size passes this multiple of N_crit; the margin
// keeps the full time-domain trajectory (which runs slightly past N_crit)
// inside the curve's range.
constexpr double kSurvivalFactor = 1.15;

constexpr int kEvDepleted = 100;
constexpr int kEvHorizon = 101;
constexpr int kEvSurvival = 102;

double hermite1(double x, double x0, double y0, double f0, double x1, double y1, double f1) {
  const double h = x1 - x0;
  const double s = (x - x0) / h;
  const double s2 = s * s, s3 = s2 * s;
  return (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * h * f0 +
         (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * h * f1;
}

enum class RnMode { Full, Plateau, Pinned };

// State along r: y = [N_tilde, t].
struct RnRunner {
  const TumorModel& model;
  const Policy& policy;
  IntegratorConfig cfg;
  double r_stop;

  RnCurve curve;
  Phase phase = Phase::Grow;
  double r = 0.0, N = 0.0, t = 0.0;
  bool done = false;

  RnRunner(const TumorModel& m, const Policy& p, const IntegratorConfig& c, const TumorState& init,
           double r_end)
      : model(m), policy(p), cfg(c), r_stop(r_end), r(init.R), N(init.N()), t(init.t) {}

  double f_R_checked(double N_, double r_) const {
    const double fr = raw_fn_fr(model, N_, r_, 0.0).f_R;
    if (!(fr > 0.0)) {
      throw std::runtime_error("rn_trajectory: f_R <= 0 at (N=" + std::to_string(N_) +
                               ", r=" + std::to_string(r_) + ")");
    }
    return fr;
  }

  double sat_tol(double N_, double r_) const {
    return 1e-9 * std::abs(raw_fn_fr(model, N_, r_, 0.0).f_R);
  }

  void push(double r_, double N_, double L, double t_, double slope) {
    curve.r.push_back(r_);
    curve.N_tilde.push_back(N_);
    curve.S_tilde.push_back(std::max(N_ - r_, 0.0));
    curve.L_tilde.push_back(L);
    curve.t_of_r.push_back(t_);
    curve.dN_dr.push_back(slope);
  }

  // Integrates one segment in r for the given mode; Plateau keeps N at
  // `level`, Pinned keeps N = r. Handles truncation internally (sets done).
  int run(RnMode mode, double level, std::vector<EventSpec<2>> events) {
    events.push_back({[this](double, const StateVec<2>& y) { return cfg.horizon - y[1]; }, -1,
                      kEvHorizon});
    if (mode == RnMode::Full) {
      events.push_back(
          {[](double rr, const StateVec<2>& y) { return y[0] - rr - 1.0; }, -1, kEvDepleted});
      events.push_back({[this](double, const StateVec<2>& y) {
                          return y[0] - kSurvivalFactor * model.N_crit;
                        },
                        +1, kEvSurvival});
    }
    const RhsFn<2> rhs = [this, mode, level](double rr, const StateVec<2>& y) -> StateVec<2> {
      constexpr double nan = std::numeric_limits<double>::quiet_NaN();
      switch (mode) {
        case RnMode::Full: {
          if (!y.allFinite() || !(y[0] > 0.0)) return StateVec<2>{nan, nan};
          const double L = dose(policy, phase, model, std::max(y[0] - rr, 0.0), rr, y[1]);
          const SizeRates sr = raw_fn_fr(model, y[0], rr, L);
          if (!(sr.f_R > 0.0)) {
            // A genuine assumption violation happens at a valid state; trial
            // stages below the diagonal just get rejected.
            if (y[0] >= rr) {
              throw std::runtime_error("rn_trajectory: f_R <= 0 at (N=" + std::to_string(y[0]) +
                                       ", r=" + std::to_string(rr) + ")");
            }
            return StateVec<2>{nan, nan};
          }
          return StateVec<2>{sr.f_N / sr.f_R, 1.0 / sr.f_R};
        }
        case RnMode::Plateau:
          return StateVec<2>{0.0, 1.0 / f_R_checked(level, rr)};
        case RnMode::Pinned:
          return StateVec<2>{1.0, 1.0 / f_R_checked(rr, rr)};
      }
      return StateVec<2>::Zero();
    };
    const SampleFn<2> on_sample = [this, mode, level](double rr, const StateVec<2>& y,
                                                      const StateVec<2>& f) {
      double N_ = y[0];
      if (mode == RnMode::Plateau) N_ = level;
      if (mode == RnMode::Pinned) N_ = rr;
      const double L = dose(policy, phase, model, std::max(N_ - rr, 0.0), rr, y[1]);
      push(rr, N_, L, y[1], f[0]);
    };

    // Tight absolute floor on the co-integrated time component.
    const StateVec<2> abs_tols{cfg.abs_tol, 1e-3 * cfg.event_time_tol};

    const auto end = integrate_segment<2>(rhs, r, StateVec<2>{N, t}, r_stop, events, cfg,
                                          on_sample, true, &abs_tols);
    r = end.t;
    N = (mode == RnMode::Pinned) ? r : ((mode == RnMode::Plateau) ? level : end.y[0]);
    t = end.y[1];
    switch (end.event_id) {
      case -1:
        curve.truncation = RnCurve::Truncation::ReachedEnd;
        done = true;
        return -1;
      case kEvDepleted:
        curve.truncation = RnCurve::Truncation::SensitiveDepleted;
        done = true;
        return -1;
      case kEvHorizon:
        curve.truncation = RnCurve::Truncation::Horizon;
        done = true;
        return -1;
      case kEvSurvival:
        curve.truncation = RnCurve::Truncation::Survival;
        done = true;
        return -1;
      default:
        return end.event_id;
    }
  }

  EventSpec<2> up_event(double threshold, int id) const {
    return {[threshold](double, const StateVec<2>& y) { return y[0] - threshold; }, +1, id};
  }
  EventSpec<2> down_event(double threshold, int id) const {
    return {[threshold](double, const StateVec<2>& y) { return y[0] - threshold; }, -1, id};
  }
  EventSpec<2> time_event(double when, int id) const {
    return {[when](double, const StateVec<2>& y) { return y[1] - when; }, +1, id};
  }

  // Pin the curve to a threshold it just reached; the located sample is
  // rewritten so the stored curve touches the level instead of overshooting.
  void snap_N(double level) {
    N = level;
    if (!curve.r.empty() && curve.r.back() == r) {
      curve.N_tilde.back() = level;
      curve.S_tilde.back() = std::max(level - r, 0.0);
    }
  }

  // A vertical segment at fixed r; used for the idealized resets.
  void jump_to(double N_after) {
    if (curve.r.empty() || curve.r.back() != r) {
      const double L = dose(policy, phase, model, std::max(N - r, 0.0), r, t);
      push(r, N, L, t, 0.0);
    }
    N = N_after;
    const double L = dose(policy, phase, model, std::max(N - r, 0.0), r, t);
    push(r, N, L, t, 0.0);
  }

  void run_pinned() {
    phase = Phase::Pinned;
    N = r;
    run(RnMode::Pinned, 0.0, {});
  }

  void drive_constant() {
    phase = Phase::Dosing;
    run(RnMode::Full, 0.0, {});
  }

  void drive_delayed() {
    if (N < policy.start_threshold) {
      phase = Phase::Grow;
      if (run(RnMode::Full, 0.0, {up_event(policy.start_threshold, 0)}) < 0) return;
      snap_N(policy.start_threshold);
    }
    phase = Phase::Dosing;
    run(RnMode::Full, 0.0, {});
  }

  void drive_containment() {
    const double C = policy.threshold;
    const double band = 1e-9 * std::max(C, 1.0);
    while (!done) {
      if (N < C - band) {
        phase = Phase::Grow;
        if (run(RnMode::Full, 0.0, {up_event(C, 0)}) < 0) return;
        snap_N(C);
        continue;
      }
      if (N > C + band) {
        phase = Phase::Saturated;
        if (run(RnMode::Full, 0.0, {down_event(C, 0)}) < 0) return;
        snap_N(C);
        continue;
      }
      if (r >= C * (1.0 - 1e-12)) {
        phase = Phase::Saturated;
        if (run(RnMode::Full, 0.0, {down_event(C, 0)}) < 0) return;
        snap_N(C);
        continue;
      }
      if (raw_fn_fr(model, C, r, model.L_max).f_N > sat_tol(C, r)) {
        phase = Phase::Saturated;
        if (run(RnMode::Full, 0.0, {down_event(C, 0)}) < 0) return;
        snap_N(C);
        continue;
      }
      phase = Phase::Stabilize;
      snap_N(C);
      const int ev = run(
          RnMode::Plateau, C,
          {{[this, C](double rr, const StateVec<2>&) {
              return raw_fn_fr(model, C, rr, model.L_max).f_N - sat_tol(C, rr);
            },
            +1, 1},
           {[C](double rr, const StateVec<2>&) { return rr - C * (1.0 - 1e-12); }, +1, 2}});
      if (ev < 0) return;
      // Saturation or extinction; the loop lands in the Saturated branch.
    }
  }

  void drive_intermittent() {
    phase = (N >= policy.band_high) ? Phase::Treat : Phase::Vacation;
    while (!done) {
      if (phase == Phase::Vacation) {
        if (run(RnMode::Full, 0.0, {up_event(policy.band_high, 0)}) < 0) return;
        snap_N(policy.band_high);
        phase = Phase::Treat;
      } else {
        if (run(RnMode::Full, 0.0, {down_event(policy.band_low, 0)}) < 0) return;
        snap_N(policy.band_low);
        phase = Phase::Vacation;
      }
    }
  }

  void drive_ideal_mtd() {
    jump_to(r);
    run_pinned();
  }

  void drive_delayed_ideal_mtd() {
    if (N < policy.start_threshold) {
      phase = Phase::Grow;
      if (run(RnMode::Full, 0.0, {up_event(policy.start_threshold, 0)}) < 0) return;
      snap_N(policy.start_threshold);
    }
    jump_to(r);
    run_pinned();
  }

  void drive_ideal_containment() {
    const double C = policy.threshold;
    const double band = 1e-9 * std::max(C, 1.0);
    if (N > C + band) {
      jump_to(std::max(C, r));
    } else if (N < C - band) {
      phase = Phase::Grow;
      if (run(RnMode::Full, 0.0, {up_event(C, 0)}) < 0) return;
      snap_N(C);
    }
    if (N - r >= 1.0 && r < C * (1.0 - 1e-12)) {
      phase = Phase::Stabilize;
      const int ev =
          run(RnMode::Plateau, C,
              {{[C](double rr, const StateVec<2>&) { return rr - C; }, +1, 2}});
      if (ev < 0) return;
    }
    run_pinned();
  }

  void drive_ideal_intermittent() {
    const double band = 1e-9 * std::max(policy.band_high, 1.0);
    while (!done) {
      if (N >= policy.band_high - band) {
        const double target = std::max(policy.band_low, r);
        jump_to(target);
        if (target <= r) {
          run_pinned();
          return;
        }
      }
      phase = Phase::Grow;
      if (run(RnMode::Full, 0.0, {up_event(policy.band_high, 0)}) < 0) return;
      snap_N(policy.band_high);
    }
  }

  void drive_alternative() {
    phase = Phase::Dosing;
    bool reset_pending = policy.ideal_reset_time.has_value();
    const double C = policy.n_tol;
    while (!done) {
      if (reset_pending && t >= *policy.ideal_reset_time) {
        jump_to(r);
        run_pinned();
        return;
      }
      if (phase == Phase::Dosing && policy.feedback_override && N > C * (1.0 + 1e-12)) {
        phase = Phase::Saturated;
      }
      if (phase == Phase::Slide &&
          raw_fn_fr(model, C, r, policy.schedule.at(t)).f_N < 0.0) {
        phase = Phase::Dosing;
      }

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
        if (std::isfinite(t_bp)) events.push_back(time_event(t_bp, 4));
        if (reset_pending) events.push_back(time_event(*policy.ideal_reset_time, 5));
        const int ev = run(RnMode::Full, 0.0, std::move(events));
        if (ev < 0) return;
        if (ev == 0) {
          snap_N(C);
          if (reset_pending) {
            jump_to(r);
            run_pinned();
            return;
          }
          phase = Phase::Saturated;
        }
        continue;
      }
      if (phase == Phase::Saturated) {
        std::vector<EventSpec<2>> events{down_event(C, 1)};
        if (reset_pending) events.push_back(time_event(*policy.ideal_reset_time, 5));
        const int ev = run(RnMode::Full, 0.0, std::move(events));
        if (ev < 0) return;
        if (ev == 1) {
          snap_N(C);
          phase = (raw_fn_fr(model, C, r, policy.schedule.at(t)).f_N >= 0.0) ? Phase::Slide
                                                                             : Phase::Dosing;
        }
        continue;
      }
      phase = Phase::Slide;
      snap_N(C);
      std::vector<EventSpec<2>> events{
          {[this, C](double rr, const StateVec<2>&) {
             return raw_fn_fr(model, C, rr, model.L_max).f_N - sat_tol(C, rr);
           },
           +1, 1},
          {[this, C](double rr, const StateVec<2>& y) {
             return raw_fn_fr(model, C, rr, policy.schedule.at(y[1])).f_N;
           },
           -1, 2},
          {[C](double rr, const StateVec<2>&) { return rr - C * (1.0 - 1e-12); }, +1, 3}};
      if (std::isfinite(t_bp)) events.push_back(time_event(t_bp, 4));
      if (reset_pending) events.push_back(time_event(*policy.ideal_reset_time, 5));
      const int ev = run(RnMode::Plateau, C, std::move(events));
      if (ev < 0) return;
      if (ev == 1 || ev == 3) phase = Phase::Saturated;
      if (ev == 2) phase = Phase::Dosing;
      // ev == 4: breakpoint, stay in Slide and re-evaluate.
    }
  }

  void drive() {
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
    throw std::logic_error("rn_trajectory: unknown policy kind");
  }
};

// Right-continuous sample lookup: the last index with r[idx] <= rq.
size_t locate(const std::vector<double>& rs, double rq) {
  const auto it = std::upper_bound(rs.begin(), rs.end(), rq);
  return it == rs.begin() ? 0 : static_cast<size_t>(it - rs.begin()) - 1;
}

double interp(const std::vector<double>& rs, const std::vector<double>& ys,
              const std::vector<double>& ds, double rq) {
  const size_t i = locate(rs, rq);
  if (i + 1 >= rs.size() || rs[i + 1] <= rs[i]) return ys[i];
  if (rq <= rs[i]) return ys[i];
  return hermite1(rq, rs[i], ys[i], ds[i], rs[i + 1], ys[i + 1], ds[i + 1]);
}

}  // namespace

double RnCurve::value_at(double rq) const {
  return interp(r, N_tilde, dN_dr, rq);
}

double RnCurve::time_at(double rq) const {
  // Reuse the N slope grid layout; t varies smoothly, so interpolate linearly.
  const size_t i = locate(r, rq);
  if (i + 1 >= r.size() || r[i + 1] <= r[i] || rq <= r[i]) return t_of_r[i];
  const double w = (rq - r[i]) / (r[i + 1] - r[i]);
  return (1.0 - w) * t_of_r[i] + w * t_of_r[i + 1];
}

RnCurve rn_trajectory(const TumorModel& model, const Policy& policy, const TumorState& init,
                      double r_end, const IntegratorConfig& cfg) {
  if (!(init.R > 0.0) || !(init.S >= 0.0)) {
    throw std::invalid_argument("rn_trajectory: requires S0 >= 0 and R0 > 0");
  }
  if (!(r_end > init.R)) {
    throw std::invalid_argument("rn_trajectory: r_end must exceed R0");
  }
  if (r_end > kSurvivalFactor * model.N_crit) {
    throw std::invalid_argument("rn_trajectory: r_end beyond the survival margin");
  }
  if (!(cfg.horizon > init.t)) {
    throw std::invalid_argument("rn_trajectory: horizon must exceed the initial time");
  }
  RnRunner runner(model, policy, cfg, init, r_end);
  runner.drive();
  return std::move(runner.curve);
}

PointwiseOrderReport compare_curves(const RnCurve& a, const RnCurve& b, double rel_tol) {
  if (a.size() < 2 || b.size() < 2) {
    throw std::invalid_argument("compare_curves: curves must carry samples");
  }
  const double lo = std::max(a.r_front(), b.r_front());
  const double hi = std::min(a.r_back(), b.r_back());
  if (!(hi > lo)) throw std::invalid_argument("compare_curves: disjoint r ranges");
  if (std::abs(a.r_front() - b.r_front()) > 1e-6 * std::max(a.r_front(), b.r_front())) {
    throw std::invalid_argument("compare_curves: curves do not share R0");
  }

  PointwiseOrderReport rep;
  double above_cells = 0.0, below_cells = 0.0;
  std::optional<double> above_locus, below_locus;
  auto scan = [&](const RnCurve& own, const RnCurve& other, bool own_is_a) {
    for (size_t i = 0; i < own.size(); ++i) {
      const double rq = own.r[i];
      if (rq < lo || rq > hi) continue;
      const double va = own_is_a ? own.N_tilde[i] : other.value_at(rq);
      const double vb = own_is_a ? other.value_at(rq) : own.N_tilde[i];
      const double scale = std::max({std::abs(va), std::abs(vb), 1.0});
      const double d = va - vb;
      if (d > 0.0) {
        rep.max_above_rel = std::max(rep.max_above_rel, d / scale);
        if (d > above_cells) {
          above_cells = d;
          above_locus = rq;
        }
      } else if (d < 0.0) {
        rep.max_below_rel = std::max(rep.max_below_rel, -d / scale);
        if (-d > below_cells) {
          below_cells = -d;
          below_locus = rq;
        }
      }
    }
  };
  scan(a, b, true);
  scan(b, a, false);

  if (rep.max_above_rel <= rel_tol) {
    rep.relation = PointwiseOrderReport::Relation::LessEq;
    rep.max_violation = above_cells;
    rep.violation_locus = above_locus;
  } else if (rep.max_below_rel <= rel_tol) {
    rep.relation = PointwiseOrderReport::Relation::GreaterEq;
    rep.max_violation = below_cells;
    rep.violation_locus = below_locus;
  } else {
    rep.relation = PointwiseOrderReport::Relation::Crossing;
    rep.max_violation = std::max(above_cells, below_cells);
    rep.violation_locus = above_cells >= below_cells ? above_locus : below_locus;
  }
  return rep;
}

ConsistencyResult consistency_check(const Trajectory& traj, const RnCurve& curve) {
  if (traj.samples.empty() || curve.size() < 2) {
    throw std::invalid_argument("consistency_check: empty inputs");
  }
  ConsistencyResult res;
  size_t covered = 0, total = 0;
  for (size_t i = 0; i < traj.samples.size(); ++i) {
    const TrajectorySample& s = traj.samples[i];
    // Skip the "before" record of reset pairs: the curve is right-continuous.
    if (i + 1 < traj.samples.size() && traj.samples[i + 1].t == s.t &&
        (traj.samples[i + 1].S != s.S || traj.samples[i + 1].R != s.R)) {
      continue;
    }
    ++total;
    if (s.R < curve.r_front() || s.R > curve.r_back()) continue;
    ++covered;
    // The two routes locate a vertical jump's radius independently, so a
    // sample can land a rounding error on the wrong side of it; accept the
    // nearer branch within a relative hair of the sample radius.
    const double eps_r = 1e-9 * std::max(s.R, 1.0);
    double dev = std::abs(s.N - curve.value_at(s.R));
    dev = std::min(dev, std::abs(s.N - curve.value_at(std::max(s.R - eps_r, curve.r_front()))));
    dev = std::min(dev, std::abs(s.N - curve.value_at(std::min(s.R + eps_r, curve.r_back()))));
    res.max_rel_dev = std::max(res.max_rel_dev, dev / std::max(s.N, 1.0));
  }
  res.coverage = total > 0 ? static_cast<double>(covered) / static_cast<double>(total) : 1.0;
  return res;
}

}  // namespace contain
