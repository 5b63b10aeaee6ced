#include "contain/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <thread>

namespace contain {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t i) {
  return splitmix64(seed ^ splitmix64(i + 1));
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double hermite1(double x, double x0, double y0, double f0, double x1, double y1, double f1) {
  const double h = x1 - x0;
  const double s = (x - x0) / h;
  const double s2 = s * s, s3 = s2 * s;
  return (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * h * f0 +
         (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * h * f1;
}

void parallel_for(int n, int threads, const std::function<void(int)>& work) {
  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads <= 0) threads = 4;
  }
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) work(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto body = [&]() {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        work(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(threads));
  for (int k = 0; k < threads; ++k) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

// ---------------------------------------------------------------------------
// Trajectory interpolation

TrajectoryInterpolant::TrajectoryInterpolant(const Trajectory& traj) : traj_(&traj) {
  if (traj.samples.empty()) throw std::invalid_argument("TrajectoryInterpolant: empty trajectory");
  t_end_ = traj.samples.back().t;
}

double TrajectoryInterpolant::eval(double t, int component) const {
  const auto& s = traj_->samples;
  auto pick = [component](const TrajectorySample& x) {
    return component == 0 ? x.S : (component == 1 ? x.R : x.N);
  };
  auto slope = [component](const TrajectorySample& x) {
    return component == 0 ? x.dS : (component == 1 ? x.dR : x.dS + x.dR);
  };
  const auto it = std::upper_bound(s.begin(), s.end(), t,
                                   [](double v, const TrajectorySample& x) { return v < x.t; });
  if (it == s.begin()) return pick(s.front());
  const size_t i = static_cast<size_t>(it - s.begin()) - 1;  // last sample with t_s <= t
  if (i + 1 >= s.size() || !(s[i + 1].t > s[i].t) || t <= s[i].t) return pick(s[i]);
  return hermite1(t, s[i].t, pick(s[i]), slope(s[i]), s[i + 1].t, pick(s[i + 1]),
                  slope(s[i + 1]));
}

double TrajectoryInterpolant::S(double t) const { return eval(t, 0); }
double TrajectoryInterpolant::R(double t) const { return eval(t, 1); }
double TrajectoryInterpolant::N(double t) const { return eval(t, 2); }

namespace {

std::vector<double> union_times(const Trajectory& a, const Trajectory& b, double t_from,
                                double t_to) {
  std::vector<double> ts;
  ts.reserve(a.samples.size() + b.samples.size());
  for (const auto& s : a.samples) {
    if (s.t >= t_from && s.t <= t_to) ts.push_back(s.t);
  }
  for (const auto& s : b.samples) {
    if (s.t >= t_from && s.t <= t_to) ts.push_back(s.t);
  }
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  return ts;
}

}  // namespace

OrderMargin ordered_margin(const Trajectory& lo, const Trajectory& hi, char component,
                           double t_from) {
  const TrajectoryInterpolant a(lo), b(hi);
  const double t_to = std::min(a.t_end(), b.t_end());
  OrderMargin m;
  if (t_to <= t_from) return m;  // empty overlap: nothing to refute
  auto comp = [component](const TrajectoryInterpolant& x, double t) {
    switch (component) {
      case 'S': return x.S(t);
      case 'R': return x.R(t);
      default: return x.N(t);
    }
  };
  for (double t : union_times(lo, hi, t_from, t_to)) {
    const double vl = comp(a, t);
    const double vh = comp(b, t);
    const double scale = std::max({std::abs(vl), std::abs(vh), 1.0});
    const double margin = (vh - vl) / scale;
    ++m.points;
    if (margin < m.min_margin) {
      m.min_margin = margin;
      m.locus_t = t;
    }
  }
  return m;
}

double sensitive_decay_margin(const TumorModel& model, double R0, double N_crit) {
  double margin = std::numeric_limits<double>::infinity();
  const int n_axis = 12;
  for (int j = 0; j < n_axis; ++j) {
    const double R =
        std::exp(std::log(R0) + (std::log(N_crit) - std::log(R0)) * j / (n_axis - 1));
    for (int i = 0; i < n_axis; ++i) {
      const double N = std::exp(std::log(R) + (std::log(N_crit) - std::log(R)) * i / (n_axis - 1));
      const double S = N - R;
      if (S <= 0.0) continue;
      const double phi_S = raw_rates(model, S, R, model.L_max).phi_S;
      const double scale = std::max({std::abs(phi_S), std::abs(raw_fn_fr(model, N, R, 0.0).f_R), 1.0});
      margin = std::min(margin, -phi_S / scale);
    }
  }
  return margin;
}

// ---------------------------------------------------------------------------
// Scenario sampling

namespace {

ModelFamily pick_family(Rng& rng) {
  const double u = rng.uniform();
  if (u < 0.6) return ModelFamily::MonroGaffney;
  if (u < 0.8) return ModelFamily::MutationGompertz;
  if (u < 0.9) return ModelFamily::PowerLawNortonSimon;
  return ModelFamily::BirthDeath;
}

const char* family_name(ModelFamily f) {
  switch (f) {
    case ModelFamily::MonroGaffney: return "monro_gaffney";
    case ModelFamily::MutationGompertz: return "mutation_gompertz";
    case ModelFamily::PowerLawNortonSimon: return "powerlaw_norton_simon";
    case ModelFamily::BirthDeath: return "birth_death";
    case ModelFamily::MutationLogistic: return "mutation_logistic";
    case ModelFamily::NegativeControl: return "negative_control";
    case ModelFamily::Mixed: return "mixed";
  }
  return "?";
}

struct Draw {
  TumorModel model;
  TumorState init;
  Thresholds thr;
  bool gate = true;  // run the assumption check
};

Draw draw_scenario(Rng& rng, ModelFamily fam, bool no_backmutation) {
  const double L_max = rng.uniform(1.2, 3.0);
  const double N0 = rng.log_uniform(1e9, 1e11);
  const double N_tol = N0 * rng.log_uniform(2.0, 8.0);

  Draw d;
  d.thr.N0 = N0;
  d.thr.N_tol = N_tol;

  double R0 = 0.0;
  switch (fam) {
    case ModelFamily::MonroGaffney: {
      const double K = rng.log_uniform(std::max(1e12, 4.0 * N_tol), 5e12);
      const double N_crit = std::min(N_tol * rng.log_uniform(3.0, 10.0), 0.4 * K);
      if (N_crit < 2.0 * N_tol) throw FamilyInfeasible("headroom", 0);
      const double rho = rng.log_uniform(0.004, 0.02);
      d.model = TumorModel::monro_gaffney(rho, K, L_max, N_crit);
      R0 = std::max(rng.log_uniform(1e-6, 1e-2) * N0, 10.0);
      break;
    }
    case ModelFamily::MutationGompertz: {
      const double K = rng.log_uniform(std::max(1e12, 4.0 * N_tol), 5e12);
      const double N_crit = std::min(N_tol * rng.log_uniform(3.0, 10.0), 0.4 * K);
      if (N_crit < 2.0 * N_tol) throw FamilyInfeasible("headroom", 0);
      const double rho = rng.log_uniform(0.004, 0.02);
      const double tau1 = rng.log_uniform(1e-7, 1e-4);
      const double tau2 = no_backmutation ? 0.0 : rng.log_uniform(1e-8, tau1);
      d.model = TumorModel::mutation(GrowthLaw::gompertz(rho, K), tau1, tau2, L_max, N_crit);
      const double x_r = resistant_fraction_at_detection(tau1, tau2, N0);
      R0 = std::clamp(x_r * N0 * rng.uniform(0.8, 5.0), 10.0, 0.01 * N0);
      break;
    }
    case ModelFamily::PowerLawNortonSimon: {
      const double N_crit = N_tol * rng.log_uniform(3.0, 10.0);
      const double gamma = rng.uniform(0.2, 0.5);
      const double g_at_N0 = rng.log_uniform(0.005, 0.05);
      const double rho = g_at_N0 * std::pow(N0, gamma);
      d.model = TumorModel::norton_simon(GrowthLaw::power_law(rho, gamma), L_max, N_crit);
      R0 = std::max(rng.log_uniform(1e-6, 1e-2) * N0, 10.0);
      break;
    }
    case ModelFamily::BirthDeath: {
      const double N_crit = N_tol * rng.log_uniform(3.0, 10.0);
      const double Kb = N_crit * rng.log_uniform(2.5, 8.0);
      const double beta = rng.log_uniform(0.01, 0.08);
      const double q = rng.uniform(0.2, 0.8);
      const double delta = q * beta * (1.0 - N_crit / Kb);
      d.model = TumorModel::birth_death(
          [beta, Kb](double N) { return beta * (1.0 - N / Kb); },
          [delta](double) { return delta; }, L_max, N_crit);
      R0 = std::max(rng.log_uniform(1e-6, 1e-2) * N0, 10.0);
      break;
    }
    case ModelFamily::MutationLogistic: {
      // Carrying capacities well above the initial size: the weak logistic
      // competition then loses to the mutation inflow at small resistant
      // fractions.
      const double N_crit = N_tol * rng.log_uniform(4.0, 10.0);
      const double K = N_crit * rng.log_uniform(2.5, 6.0);
      const double rho = rng.log_uniform(0.004, 0.02);
      const double tau1 = rng.log_uniform(1e-7, 1e-4);
      const double tau2 = no_backmutation ? 0.0 : rng.log_uniform(1e-8, tau1);
      d.model = TumorModel::mutation(GrowthLaw::logistic(rho, K), tau1, tau2, L_max, N_crit);
      const double x_r = resistant_fraction_at_detection(tau1, tau2, N0);
      R0 = std::clamp(x_r * N0 * rng.uniform(0.8, 1.2), 10.0, 0.01 * N0);
      break;
    }
    case ModelFamily::NegativeControl: {
      // f_R increasing in N: larger tumors speed the resistant cells up, the
      // opposite of the competition assumption.
      const double N_crit = N_tol * rng.log_uniform(3.0, 10.0);
      const double rho = rng.log_uniform(0.004, 0.02);
      const double Kn = N_crit;
      d.model = TumorModel::general(
          [rho, Kn](double S, double R, double L) {
            return rho * (1.0 + (S + R) / Kn) * (1.0 - L) * S;
          },
          [rho, Kn](double S, double R) { return rho * (1.0 + (S + R) / Kn) * R; }, L_max,
          N_crit);
      R0 = std::max(rng.log_uniform(1e-5, 1e-2) * N0, 10.0);
      d.gate = false;
      break;
    }
    case ModelFamily::Mixed:
      throw std::logic_error("draw_scenario: Mixed must be resolved before drawing");
  }

  d.thr.N_crit = d.model.N_crit;
  d.thr.N_min = N_tol * rng.uniform(0.35, 0.7);
  if (d.thr.N_min <= 1.2 * R0) throw FamilyInfeasible("N_min too close to R0", 0);
  d.init = TumorState{N0 - R0, R0, 0.0};
  return d;
}

}  // namespace

Scenario sample_scenario(std::uint64_t seed, ModelFamily family, bool require_sensitive_decay) {
  Rng rng(splitmix64(seed));
  constexpr int kRetries = 40;
  std::optional<AssumptionReport> last_report;
  for (int attempt = 0; attempt < kRetries; ++attempt) {
    const ModelFamily fam = family == ModelFamily::Mixed ? pick_family(rng) : family;
    Draw d;
    try {
      d = draw_scenario(rng, fam, require_sensitive_decay);
    } catch (const FamilyInfeasible&) {
      continue;  // structural redraw (threshold headroom etc.)
    }
    if (d.gate) {
      const AssumptionReport rep = check_model_assumptions(d.model, d.init.R);
      if (!rep.ok()) {
        last_report = rep;
        continue;
      }
      if (require_sensitive_decay &&
          sensitive_decay_margin(d.model, d.init.R, d.model.N_crit) < 0.0) {
        continue;
      }
    }

    Scenario sc;
    sc.model = std::move(d.model);
    sc.init = d.init;
    sc.thr = d.thr;
    sc.seed = seed;
    sc.family = family_name(fam);
    sc.integ.horizon = 1e6;  // provisional, for the untreated reference run
    sc.integ.event_time_tol = 1e-6;

    const SimulationResult ref =
        simulate(sc.model, Policy::no_treat(sc.thr.N_tol), sc.init, sc.integ);
    if (!ref.metrics.t_survival) continue;  // untreated tumor must reach N_crit

    // Horizon: ten untreated survival times, stretched when the containment
    // plateau (resistant takeover at N_tol) would outlast that.
    const double mid_R = 0.5 * sc.thr.N_tol;
    const double percap = raw_fn_fr(sc.model, sc.thr.N_tol, mid_R, 0.0).f_R / mid_R;
    const double plateau_est = std::log(sc.thr.N_tol / sc.init.R) / std::max(percap, 1e-12);
    sc.integ.horizon = std::max(10.0 * *ref.metrics.t_survival, 5.0 * plateau_est);
    return sc;
  }
  const int worst = last_report ? last_report->worst_assumption() : 0;
  throw FamilyInfeasible(std::string("sample_scenario: family ") + family_name(family) +
                             " infeasible after retries; failing assumption: " +
                             (worst ? assumption_name(worst) : "structural"),
                         worst);
}

// ---------------------------------------------------------------------------
// Alternative treatments

namespace {

DoseSchedule make_schedule(Rng& rng, double lo, double hi, double horizon, int max_breakpoints) {
  DoseSchedule s;
  s.breakpoints.emplace_back(0.0, rng.uniform(lo, hi));
  const int n = rng.uniform_int(0, max_breakpoints);
  std::vector<double> times;
  times.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) times.push_back(rng.uniform(0.0, 0.8 * horizon));
  std::sort(times.begin(), times.end());
  for (double t : times) {
    if (t - s.breakpoints.back().first < 1e-9 * horizon) continue;
    s.breakpoints.emplace_back(t, rng.uniform(lo, hi));
  }
  return s;
}

}  // namespace

Policy generate_alternative_policy(Rng& rng, bool idealized, const AltConstraints& c) {
  DoseSchedule sched = make_schedule(rng, 0.0, c.L_max, c.horizon, c.max_breakpoints);
  if (idealized) {
    const double reset_time = rng.uniform(0.0, std::max(c.projected_failure, 0.0));
    return Policy::ideal_alternative(std::move(sched), reset_time, c.n_tol);
  }
  return Policy::alternative(std::move(sched), c.n_tol, true);
}

Policy generate_alternative_policy(std::uint64_t seed, bool idealized, const AltConstraints& c) {
  Rng rng(splitmix64(seed));
  return generate_alternative_policy(rng, idealized, c);
}

// ---------------------------------------------------------------------------
// Proposition suites

const char* to_string(PropId id) {
  switch (id) {
    case PropId::P1: return "P1";
    case PropId::P2: return "P2";
    case PropId::P3: return "P3";
    case PropId::P4: return "P4";
    case PropId::P5: return "P5";
    case PropId::P6: return "P6";
    case PropId::P7: return "P7";
    case PropId::P8: return "P8";
    case PropId::L4: return "L4";
    case PropId::A1A2: return "A1A2";
  }
  return "?";
}

std::optional<PropId> prop_from_string(const std::string& name) {
  for (PropId id : {PropId::P1, PropId::P2, PropId::P3, PropId::P4, PropId::P5, PropId::P6,
                    PropId::P7, PropId::P8, PropId::L4, PropId::A1A2}) {
    if (name == to_string(id)) return id;
  }
  return std::nullopt;
}

namespace {

struct Check {
  double min_margin = std::numeric_limits<double>::infinity();
  std::string locus;
  long comparisons = 0;

  void fold(double margin, long points, const std::string& what) {
    comparisons += points;
    if (margin < min_margin) {
      min_margin = margin;
      locus = what;
    }
  }
  void fold(const OrderMargin& m, const std::string& what) {
    if (m.points == 0) {
      fold(std::numeric_limits<double>::infinity(), 0, what);
      return;
    }
    fold(m.min_margin, m.points, what + " @t=" + fmt(m.locus_t));
  }
};

double time_order_margin(std::optional<double> ta, std::optional<double> tb) {
  // Margin that ta <= tb; unreached times count as +infinity.
  if (!ta && !tb) return 0.0;
  if (!ta) return -1.0;
  if (!tb) return 1.0;
  return (*tb - *ta) / std::max({*ta, *tb, 1.0});
}

SimulationResult run(const Scenario& sc, const Policy& p) {
  return simulate(sc.model, p, sc.init, sc.integ);
}

std::optional<double> fail_time_R(const Trajectory& traj, double n_tol) {
  return first_upward_crossing_R(traj, n_tol);
}

AltConstraints alt_constraints(const Scenario& sc, double projected_failure) {
  return {sc.integ.horizon, sc.model.L_max, sc.thr.N_tol, 6, projected_failure};
}

void eval_P1(const Scenario& sc, Rng& rng, int n_alt, Check& ck) {
  for (int k = 0; k < n_alt; ++k) {
    const double L_bar = sc.model.L_max * rng.uniform(0.1, 0.9);
    const Policy low = Policy::alternative(
        make_schedule(rng, 0.0, L_bar, sc.integ.horizon, 6), sc.thr.N_tol, false);
    const Policy high = Policy::alternative(
        make_schedule(rng, L_bar, sc.model.L_max, sc.integ.horizon, 6), sc.thr.N_tol, false);
    const auto r1 = run(sc, low);
    const auto r2 = run(sc, high);
    ck.fold(ordered_margin(r1.trajectory, r2.trajectory, 'R'),
            "R: L1<=Lbar<=L2 pair#" + std::to_string(k));
  }
}

void eval_P2(const Scenario& sc, Rng& rng, int n_alt, Check& ck) {
  for (int k = 0; k < n_alt; ++k) {
    const double L1 = rng.uniform(0.0, sc.model.L_max);
    const double L2 = rng.uniform(L1, sc.model.L_max);
    const auto a = run(sc, Policy::constant_dose(L1, sc.thr.N_tol));
    const auto b = run(sc, Policy::constant_dose(L2, sc.thr.N_tol));
    ck.fold(ordered_margin(a.trajectory, b.trajectory, 'R'),
            "R: const L1<=L2 pair#" + std::to_string(k));

    // Delaying the same dose keeps the dose pointwise below the immediate
    // schedule, so the delayed arm carries the smaller resistant population.
    const double L = sc.model.L_max * rng.uniform(0.1, 1.0);
    const double N_start = rng.log_uniform(sc.thr.N0, 0.9 * sc.thr.N_crit);
    const auto c = run(sc, Policy::constant_dose(L, sc.thr.N_tol));
    const auto d = run(sc, Policy::delayed_dose(L, N_start, sc.thr.N_tol));
    ck.fold(ordered_margin(d.trajectory, c.trajectory, 'R'),
            "R: delayed<=const pair#" + std::to_string(k));
  }
}

void eval_P3(const Scenario& sc, Rng& rng, int n_alt, Check& ck) {
  const auto no_treat = run(sc, Policy::no_treat(sc.thr.N_tol));
  const auto mtd = run(sc, Policy::mtd(sc.thr.N_tol));
  const auto cons = alt_constraints(sc, 0.0);
  for (int k = 0; k < n_alt; ++k) {
    const auto alt = run(sc, generate_alternative_policy(rng, false, cons));
    ck.fold(ordered_margin(no_treat.trajectory, alt.trajectory, 'R'),
            "R: noTreat<=alt#" + std::to_string(k));
    ck.fold(ordered_margin(alt.trajectory, mtd.trajectory, 'R'),
            "R: alt#" + std::to_string(k) + "<=MTD");
  }
}

void eval_P4(const Scenario& sc, Rng& rng, int n_alt, Check& ck) {
  const auto cont = run(sc, Policy::containment(sc.thr.N_tol, sc.thr.N_tol));
  const auto cons = alt_constraints(sc, 0.0);
  const TrajectoryInterpolant ic(cont.trajectory);
  for (int k = 0; k < n_alt; ++k) {
    const auto alt = run(sc, generate_alternative_policy(rng, false, cons));
    ck.fold(ordered_margin(cont.trajectory, alt.trajectory, 'R'),
            "R: Cont<=alt#" + std::to_string(k));

    // Corollary: N_Cont <= N_alt + (S_Cont - S_alt) at all common times.
    const TrajectoryInterpolant ia(alt.trajectory);
    const double t_to = std::min(ic.t_end(), ia.t_end());
    OrderMargin m;
    for (double t : union_times(cont.trajectory, alt.trajectory, 0.0, t_to)) {
      const double lhs = ic.N(t);
      const double rhs = ia.N(t) + ic.S(t) - ia.S(t);
      const double scale = std::max({std::abs(lhs), std::abs(rhs), 1.0});
      ++m.points;
      if ((rhs - lhs) / scale < m.min_margin) {
        m.min_margin = (rhs - lhs) / scale;
        m.locus_t = t;
      }
    }
    ck.fold(m, "N_Cont<=N_alt+(S_Cont-S_alt) alt#" + std::to_string(k));
  }
}

void eval_P5(const Scenario& sc, Rng& rng, int n_alt, Check& ck) {
  const auto no_treat = run(sc, Policy::no_treat(sc.thr.N_tol));
  const auto id_cont = run(sc, Policy::ideal_containment(sc.thr.N_tol, sc.thr.N_tol));
  const auto id_mtd = run(sc, Policy::ideal_mtd(sc.thr.N_tol));
  const auto t_idcont = fail_time_R(id_cont.trajectory, sc.thr.N_tol);
  const auto t_idmtd = fail_time_R(id_mtd.trajectory, sc.thr.N_tol);
  const double projected = no_treat.metrics.t_failure.value_or(sc.integ.horizon * 0.1);
  const auto cons = alt_constraints(sc, projected);
  for (int k = 0; k < n_alt; ++k) {
    const auto alt = run(sc, generate_alternative_policy(rng, true, cons));
    const auto t_alt = fail_time_R(alt.trajectory, sc.thr.N_tol);
    ck.fold(time_order_margin(t_alt, t_idcont), 1, "t_alt<=t_idCont alt#" + std::to_string(k));
    ck.fold(time_order_margin(t_idmtd, t_alt), 1, "t_idMTD<=t_alt alt#" + std::to_string(k));
    ck.fold(ordered_margin(id_cont.trajectory, alt.trajectory, 'R'),
            "R: idCont<=alt#" + std::to_string(k));
    ck.fold(ordered_margin(alt.trajectory, id_mtd.trajectory, 'R'),
            "R: alt#" + std::to_string(k) + "<=idMTD");
    if (t_alt) {
      ck.fold(ordered_margin(id_cont.trajectory, alt.trajectory, 'N', *t_alt),
              "N: idCont<=alt#" + std::to_string(k) + " (t>=t_alt)");
      ck.fold(ordered_margin(alt.trajectory, id_mtd.trajectory, 'N', *t_alt),
              "N: alt#" + std::to_string(k) + "<=idMTD (t>=t_alt)");
    }
  }
}

void eval_P6(const Scenario& sc, Rng&, int, Check& ck) {
  const auto cont = run(sc, Policy::containment(sc.thr.N_tol, sc.thr.N_tol));
  const auto intr = run(sc, Policy::intermittent(sc.thr.N_min, sc.thr.N_tol));
  const auto cont_min = run(sc, Policy::containment(sc.thr.N_min, sc.thr.N_tol));
  const auto id_cont = run(sc, Policy::ideal_containment(sc.thr.N_tol, sc.thr.N_tol));
  const auto id_int = run(sc, Policy::ideal_intermittent(sc.thr.N_min, sc.thr.N_tol));
  const auto id_cont_min = run(sc, Policy::ideal_containment(sc.thr.N_min, sc.thr.N_tol));

  ck.fold(ordered_margin(cont.trajectory, intr.trajectory, 'R'), "R: Cont<=Int");
  ck.fold(ordered_margin(intr.trajectory, cont_min.trajectory, 'R'), "R: Int<=ContNmin");
  ck.fold(ordered_margin(id_cont.trajectory, id_int.trajectory, 'R'), "R: idCont<=idInt");
  ck.fold(ordered_margin(id_int.trajectory, id_cont_min.trajectory, 'R'),
          "R: idInt<=idContNmin");

  const auto t_ic = fail_time_R(id_cont.trajectory, sc.thr.N_tol);
  const auto t_ii = fail_time_R(id_int.trajectory, sc.thr.N_tol);
  const auto t_icm = fail_time_R(id_cont_min.trajectory, sc.thr.N_tol);
  ck.fold(time_order_margin(t_icm, t_ii), 1, "t_idContNmin<=t_idInt");
  ck.fold(time_order_margin(t_ii, t_ic), 1, "t_idInt<=t_idCont");

  if (t_ii) {
    ck.fold(ordered_margin(id_cont.trajectory, id_int.trajectory, 'N', *t_ii),
            "N: idCont<=idInt (t>=t_idInt)");
    ck.fold(ordered_margin(id_int.trajectory, id_cont_min.trajectory, 'N', *t_ii),
            "N: idInt<=idContNmin (t>=t_idInt)");
  }
}

void eval_P7(const Scenario& sc, Rng&, int, Check& ck) {
  const auto no_treat = run(sc, Policy::no_treat(sc.thr.N_tol));
  const auto cont = run(sc, Policy::containment(sc.thr.N_tol, sc.thr.N_tol));
  const auto intr = run(sc, Policy::intermittent(sc.thr.N_min, sc.thr.N_tol));
  const auto del_mtd = run(sc, Policy::delayed_mtd(sc.thr.N_tol));
  const auto mtd = run(sc, Policy::mtd(sc.thr.N_tol));
  const auto id_mtd = run(sc, Policy::ideal_mtd(sc.thr.N_tol));
  const auto id_cont = run(sc, Policy::ideal_containment(sc.thr.N_tol, sc.thr.N_tol));
  const auto id_int = run(sc, Policy::ideal_intermittent(sc.thr.N_min, sc.thr.N_tol));
  const auto del_id_mtd = run(sc, Policy::delayed_ideal_mtd(sc.thr.N_tol));

  ck.fold(ordered_margin(no_treat.trajectory, cont.trajectory, 'R'), "R: noTreat<=Cont");
  ck.fold(ordered_margin(cont.trajectory, intr.trajectory, 'R'), "R: Cont<=Int");
  ck.fold(ordered_margin(intr.trajectory, del_mtd.trajectory, 'R'), "R: Int<=delMTD");
  ck.fold(ordered_margin(del_mtd.trajectory, mtd.trajectory, 'R'), "R: delMTD<=MTD");
  ck.fold(ordered_margin(mtd.trajectory, id_mtd.trajectory, 'R'), "R: MTD<=idMTD");

  ck.fold(ordered_margin(no_treat.trajectory, id_cont.trajectory, 'R'), "R: noTreat<=idCont");
  ck.fold(ordered_margin(id_cont.trajectory, id_int.trajectory, 'R'), "R: idCont<=idInt");
  ck.fold(ordered_margin(id_int.trajectory, del_id_mtd.trajectory, 'R'),
          "R: idInt<=del-idMTD");
  ck.fold(ordered_margin(del_id_mtd.trajectory, id_mtd.trajectory, 'R'),
          "R: del-idMTD<=idMTD");

  const auto t_im = fail_time_R(id_mtd.trajectory, sc.thr.N_tol);
  const auto t_dim = fail_time_R(del_id_mtd.trajectory, sc.thr.N_tol);
  const auto t_ii = fail_time_R(id_int.trajectory, sc.thr.N_tol);
  const auto t_ic = fail_time_R(id_cont.trajectory, sc.thr.N_tol);
  ck.fold(time_order_margin(t_im, t_dim), 1, "t_idMTD<=t_del-idMTD");
  ck.fold(time_order_margin(t_dim, t_ii), 1, "t_del-idMTD<=t_idInt");
  ck.fold(time_order_margin(t_ii, t_ic), 1, "t_idInt<=t_idCont");

  if (t_ic) {
    ck.fold(ordered_margin(id_cont.trajectory, id_int.trajectory, 'N', *t_ic),
            "N: idCont<=idInt (t>=t_idCont)");
    ck.fold(ordered_margin(id_int.trajectory, del_id_mtd.trajectory, 'N', *t_ic),
            "N: idInt<=del-idMTD (t>=t_idCont)");
    ck.fold(ordered_margin(del_id_mtd.trajectory, id_mtd.trajectory, 'N', *t_ic),
            "N: del-idMTD<=idMTD (t>=t_idCont)");
  }
}

// (A2) on the assumption grid, (A1) against the untreated run.
void eval_A1A2(const Scenario& sc, Rng& rng, int n_alt, Check& ck) {
  ck.fold(sensitive_decay_margin(sc.model, sc.init.R, sc.thr.N_crit), 144,
          "(A2) phi_S<=0 at L_max");

  const auto no_treat = run(sc, Policy::no_treat(sc.thr.N_tol));
  const auto mtd = run(sc, Policy::mtd(sc.thr.N_tol));
  const auto cont = run(sc, Policy::containment(sc.thr.N_tol, sc.thr.N_tol));
  ck.fold(ordered_margin(mtd.trajectory, no_treat.trajectory, 'S'), "(A1) S_MTD<=S_noTreat");
  ck.fold(ordered_margin(cont.trajectory, no_treat.trajectory, 'S'), "(A1) S_Cont<=S_noTreat");
  const auto cons = alt_constraints(sc, 0.0);
  for (int k = 0; k < std::max(1, n_alt / 3); ++k) {
    const auto alt = run(sc, generate_alternative_policy(rng, false, cons));
    ck.fold(ordered_margin(alt.trajectory, no_treat.trajectory, 'S'),
            "(A1) S_alt#" + std::to_string(k) + "<=S_noTreat");
  }
}

void eval_P8(const Scenario& sc, Rng& rng, int n_alt, Check& ck) {
  eval_A1A2(sc, rng, n_alt, ck);  // (A1)/(A2) must hold before the chains mean anything

  const auto no_treat = run(sc, Policy::no_treat(sc.thr.N_tol));
  const auto mtd = run(sc, Policy::mtd(sc.thr.N_tol));
  const auto cont = run(sc, Policy::containment(sc.thr.N_tol, sc.thr.N_tol));
  const auto intr = run(sc, Policy::intermittent(sc.thr.N_min, sc.thr.N_tol));
  const auto cont_min = run(sc, Policy::containment(sc.thr.N_min, sc.thr.N_tol));
  const auto del_mtd = run(sc, Policy::delayed_mtd(sc.thr.N_tol));
  const auto id_mtd = run(sc, Policy::ideal_mtd(sc.thr.N_tol));
  const auto id_cont = run(sc, Policy::ideal_containment(sc.thr.N_tol, sc.thr.N_tol));
  const auto id_int = run(sc, Policy::ideal_intermittent(sc.thr.N_min, sc.thr.N_tol));
  const auto id_cont_min = run(sc, Policy::ideal_containment(sc.thr.N_min, sc.thr.N_tol));
  const auto del_id_mtd = run(sc, Policy::delayed_ideal_mtd(sc.thr.N_tol));

  ck.fold(ordered_margin(id_mtd.trajectory, mtd.trajectory, 'S'), "S: idMTD<=MTD");
  const auto cons = alt_constraints(sc, 0.0);
  for (int k = 0; k < n_alt; ++k) {
    const auto alt = run(sc, generate_alternative_policy(rng, false, cons));
    ck.fold(ordered_margin(mtd.trajectory, alt.trajectory, 'S'),
            "S: MTD<=alt#" + std::to_string(k));
    ck.fold(ordered_margin(alt.trajectory, cont.trajectory, 'S'),
            "S: alt#" + std::to_string(k) + "<=Cont");
  }
  ck.fold(ordered_margin(cont.trajectory, no_treat.trajectory, 'S'), "S: Cont<=noTreat");

  ck.fold(ordered_margin(cont_min.trajectory, intr.trajectory, 'S'), "S: ContNmin<=Int");
  ck.fold(ordered_margin(intr.trajectory, cont.trajectory, 'S'), "S: Int<=Cont");
  ck.fold(ordered_margin(del_mtd.trajectory, intr.trajectory, 'S'), "S: delMTD<=Int");

  ck.fold(ordered_margin(id_cont_min.trajectory, id_int.trajectory, 'S'),
          "S: idContNmin<=idInt");
  ck.fold(ordered_margin(id_int.trajectory, id_cont.trajectory, 'S'), "S: idInt<=idCont");

  ck.fold(ordered_margin(id_mtd.trajectory, del_id_mtd.trajectory, 'S'),
          "S: idMTD<=del-idMTD");
  ck.fold(ordered_margin(del_id_mtd.trajectory, id_int.trajectory, 'S'),
          "S: del-idMTD<=idInt");
  ck.fold(ordered_margin(id_cont.trajectory, no_treat.trajectory, 'S'), "S: idCont<=noTreat");
}

// First time tumor size touches `level`, from either side.
std::optional<size_t> first_touch_index(const Trajectory& traj, double level) {
  if (traj.samples.empty()) return std::nullopt;
  const double tol = 1e-9 * std::max(level, 1.0);
  const bool started_below = traj.samples.front().N < level - tol;
  for (size_t i = 0; i < traj.samples.size(); ++i) {
    const double N = traj.samples[i].N;
    if (std::abs(N - level) <= tol) return i;
    if (started_below && N > level) return i;
    if (!started_below && N < level) return i;
  }
  return std::nullopt;
}

void eval_L4(const Scenario& sc, Rng& rng, int n_alt, Check& ck) {
  // b) under containment, S is non-increasing once the threshold is reached
  for (const auto& [label, level] :
       {std::pair<const char*, double>{"Cont", sc.thr.N_tol},
        std::pair<const char*, double>{"ContNmin", sc.thr.N_min}}) {
    const auto res = run(sc, Policy::containment(level, sc.thr.N_tol));
    const auto idx = first_touch_index(res.trajectory, level);
    if (!idx) continue;
    OrderMargin m;
    for (size_t i = *idx; i + 1 < res.trajectory.samples.size(); ++i) {
      const auto& a = res.trajectory.samples[i];
      const auto& b = res.trajectory.samples[i + 1];
      const double scale = std::max({a.S, b.S, 1.0});
      ++m.points;
      if ((a.S - b.S) / scale < m.min_margin) {
        m.min_margin = (a.S - b.S) / scale;
        m.locus_t = b.t;
      }
    }
    ck.fold(m, std::string("S non-increasing under ") + label);
  }

  // a) for L_max-after-failure treatments, S stays below its value at the
  // first time tumor size reaches N_tol
  std::vector<std::pair<std::string, SimulationResult>> runs;
  runs.emplace_back("MTD", run(sc, Policy::mtd(sc.thr.N_tol)));
  runs.emplace_back("delMTD", run(sc, Policy::delayed_mtd(sc.thr.N_tol)));
  const auto cons = alt_constraints(sc, 0.0);
  for (int k = 0; k < std::max(1, n_alt / 3); ++k) {
    runs.emplace_back("alt#" + std::to_string(k),
                      run(sc, generate_alternative_policy(rng, false, cons)));
  }
  for (const auto& [label, res] : runs) {
    const auto idx = first_touch_index(res.trajectory, sc.thr.N_tol);
    if (!idx) continue;
    const double S_bar = res.trajectory.samples[*idx].S;
    OrderMargin m;
    for (size_t i = *idx; i < res.trajectory.samples.size(); ++i) {
      const auto& s = res.trajectory.samples[i];
      const double scale = std::max({S_bar, s.S, 1.0});
      ++m.points;
      if ((S_bar - s.S) / scale < m.min_margin) {
        m.min_margin = (S_bar - s.S) / scale;
        m.locus_t = s.t;
      }
    }
    ck.fold(m, "S(t)<=S(t_bar) under " + label);
  }
}

Check eval_scenario(PropId prop, const Scenario& sc, int n_alt) {
  Rng rng(splitmix64(sc.seed ^ 0xA17EA17EULL));
  Check ck;
  switch (prop) {
    case PropId::P1: eval_P1(sc, rng, n_alt, ck); break;
    case PropId::P2: eval_P2(sc, rng, n_alt, ck); break;
    case PropId::P3: eval_P3(sc, rng, n_alt, ck); break;
    case PropId::P4: eval_P4(sc, rng, n_alt, ck); break;
    case PropId::P5: eval_P5(sc, rng, n_alt, ck); break;
    case PropId::P6: eval_P6(sc, rng, n_alt, ck); break;
    case PropId::P7: eval_P7(sc, rng, n_alt, ck); break;
    case PropId::P8: eval_P8(sc, rng, n_alt, ck); break;
    case PropId::L4: eval_L4(sc, rng, n_alt, ck); break;
    case PropId::A1A2: eval_A1A2(sc, rng, n_alt, ck); break;
  }
  return ck;
}

}  // namespace

VerificationReport check_proposition(PropId prop, const std::vector<Scenario>& scenarios,
                                     double tol, int n_alternatives, int threads) {
  VerificationReport rep;
  rep.suite = to_string(prop);
  rep.tolerance = tol;
  rep.scenarios_checked = static_cast<int>(scenarios.size());
  rep.records.resize(scenarios.size());

  parallel_for(static_cast<int>(scenarios.size()), threads, [&](int i) {
    const Check ck = eval_scenario(prop, scenarios[static_cast<size_t>(i)], n_alternatives);
    rep.records[static_cast<size_t>(i)] = {scenarios[static_cast<size_t>(i)].seed,
                                           ck.min_margin, ck.locus, ck.comparisons};
  });

  for (const ScenarioRecord& r : rep.records) {
    rep.comparisons += r.comparisons;
    rep.min_margin = std::min(rep.min_margin, r.min_margin);
    if (r.min_margin < -tol) rep.failures.push_back(r);
  }
  return rep;
}

VerificationReport check_proposition(PropId prop, const VerifyOptions& opt) {
  // The sensitive-population comparisons hold under the extra hypotheses that
  // not treating maximizes S and that S shrinks at L_max; their suites sample
  // from the compatible sub-family.
  const bool needs_decay = prop == PropId::P8 || prop == PropId::L4 || prop == PropId::A1A2;
  std::vector<Scenario> scenarios;
  scenarios.reserve(static_cast<size_t>(opt.n_scenarios));
  for (int i = 0; i < opt.n_scenarios; ++i) {
    Scenario sc =
        sample_scenario(mix(opt.seed, static_cast<std::uint64_t>(i)), opt.family, needs_decay);
    sc.integ.rel_tol = opt.rel_tol;
    sc.integ.abs_tol = opt.abs_tol;
    scenarios.push_back(std::move(sc));
  }
  VerificationReport rep =
      check_proposition(prop, scenarios, opt.tol, opt.n_alternatives, opt.threads);
  rep.note = std::string("family=") +
             (opt.family == ModelFamily::Mixed ? "mixed" : scenarios.front().family) +
             " seed=" + std::to_string(opt.seed) + " n=" + std::to_string(opt.n_scenarios);
  if (prop == PropId::P5) {
    rep.note += "; idealized alternatives only (fair comparison for idCont/idMTD)";
  }
  if (needs_decay) {
    rep.note += "; scenarios certified for sensitive decay at L_max (no backmutation)";
  }
  return rep;
}

std::string VerificationReport::to_text() const {
  std::string out;
  out += "suite " + suite + "\n";
  if (!note.empty()) out += "note " + note + "\n";
  out += "tolerance " + fmt(tolerance) + "\n";
  out += "scenarios " + std::to_string(scenarios_checked) + "\n";
  out += "comparisons " + std::to_string(comparisons) + "\n";
  out += "min_margin " + fmt(min_margin) + "\n";
  out += "failures " + std::to_string(failures.size()) + "\n";
  for (const ScenarioRecord& r : records) {
    out += "record seed=" + std::to_string(r.seed) + " margin=" + fmt(r.min_margin) +
           " locus=" + r.locus + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Comparison principles

const char* to_string(CpCase c) {
  switch (c) {
    case CpCase::Standard: return "standard";
    case CpCase::VariantA: return "variant-a";
    case CpCase::VariantB: return "variant-b";
  }
  return "?";
}

std::optional<CpCase> cp_case_from_string(const std::string& name) {
  for (CpCase c : {CpCase::Standard, CpCase::VariantA, CpCase::VariantB}) {
    if (name == to_string(c)) return c;
  }
  return std::nullopt;
}

namespace {

struct ScalarSeries {
  std::vector<double> t, y, d;

  double at(double tq) const {
    const auto it = std::upper_bound(t.begin(), t.end(), tq);
    if (it == t.begin()) return y.front();
    const size_t i = static_cast<size_t>(it - t.begin()) - 1;
    if (i + 1 >= t.size() || !(t[i + 1] > t[i]) || tq <= t[i]) return y[i];
    return hermite1(tq, t[i], y[i], d[i], t[i + 1], y[i + 1], d[i + 1]);
  }
};

ScalarSeries integrate_scalar(const ScalarRhs& f, double x0, double t0, double t1,
                              const std::vector<double>& t_knots) {
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-11;
  cfg.abs_tol = 1e-11;
  cfg.event_time_tol = 1e-10;
  cfg.horizon = t1;
  const RhsFn<1> rhs = [&f](double t, const StateVec<1>& y) {
    return StateVec<1>{f(t, y[0])};
  };
  ScalarSeries s;
  const SampleFn<1> on_sample = [&s](double t, const StateVec<1>& y, const StateVec<1>& fy) {
    s.t.push_back(t);
    s.y.push_back(y[0]);
    s.d.push_back(fy[0]);
  };
  std::vector<double> cuts = t_knots;
  std::sort(cuts.begin(), cuts.end());
  double t = t0;
  StateVec<1> y{x0};
  for (double cut : cuts) {
    if (cut <= t || cut >= t1) continue;
    const auto end = integrate_segment<1>(rhs, t, y, cut, {}, cfg, on_sample, s.t.empty());
    t = end.t;
    y = end.y;
  }
  const auto end = integrate_segment<1>(rhs, t, y, t1, {}, cfg, on_sample, s.t.empty());
  (void)end;
  return s;
}

CpOutcome compare_series(const ScalarSeries& u, const ScalarSeries& v) {
  CpOutcome out;
  std::vector<double> grid = u.t;
  grid.insert(grid.end(), v.t.begin(), v.t.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  for (double t : grid) {
    const double uu = u.at(t);
    const double vv = v.at(t);
    const double scale = std::max({std::abs(uu), std::abs(vv), 1.0});
    out.min_margin = std::min(out.min_margin, (uu - vv) / scale);
  }
  out.u_end = u.y.back();
  out.v_end = v.y.back();
  return out;
}

}  // namespace

CpOutcome cp_compare(const ScalarRhs& f, const ScalarFn& slack, double u0, double v0, double t0,
                     double t1, const std::vector<double>& t_knots) {
  if (!(v0 <= u0)) throw std::invalid_argument("cp_compare: requires v(t0) <= u(t0)");
  const ScalarSeries u = integrate_scalar(f, u0, t0, t1, t_knots);
  const ScalarSeries v = integrate_scalar(
      [&f, &slack](double t, double x) { return f(t, x) - slack(t); }, v0, t0, t1, t_knots);
  return compare_series(u, v);
}

double PiecewiseRhs::operator()(double x) const {
  const auto it = std::upper_bound(knots.begin(), knots.end(), x);
  return levels[static_cast<size_t>(it - knots.begin())];
}

CpOutcome cp_compare_state_jumps(const PiecewiseRhs& f, double u0, double v0, double slack,
                                 double t0, double t1) {
  if (f.levels.size() != f.knots.size() + 1) {
    throw std::invalid_argument("cp_compare_state_jumps: levels must be knots+1");
  }
  if (!(v0 <= u0)) throw std::invalid_argument("cp_compare_state_jumps: requires v(t0) <= u(t0)");
  for (double c : f.levels) {
    if (!(c > 0.0)) {
      throw std::invalid_argument("cp_compare_state_jumps: u must be strictly increasing");
    }
    if (!(c - slack > 0.0)) {
      throw std::invalid_argument("cp_compare_state_jumps: v must be strictly increasing");
    }
  }

  IntegratorConfig cfg;
  cfg.rel_tol = 1e-11;
  cfg.abs_tol = 1e-11;
  cfg.event_time_tol = 1e-10;
  cfg.horizon = t1;
  auto integrate = [&](double x0, double extra_slack) {
    ScalarSeries s;
    const RhsFn<1> rhs = [&f, extra_slack](double, const StateVec<1>& y) {
      return StateVec<1>{f(y[0]) - extra_slack};
    };
    const SampleFn<1> on_sample = [&s](double t, const StateVec<1>& y, const StateVec<1>& fy) {
      s.t.push_back(t);
      s.y.push_back(y[0]);
      s.d.push_back(fy[0]);
    };
    // Restart the stepper at every knot crossing so the jumps stay sharp.
    std::vector<EventSpec<1>> events;
    for (size_t k = 0; k < f.knots.size(); ++k) {
      const double xk = f.knots[k];
      events.push_back(
          {[xk](double, const StateVec<1>& y) { return y[0] - xk; }, +1, static_cast<int>(k)});
    }
    double t = t0;
    StateVec<1> y{x0};
    while (t < t1) {
      const auto end = integrate_segment<1>(rhs, t, y, t1, events, cfg, on_sample, s.t.empty());
      t = end.t;
      y = end.y;
      if (end.event_id < 0) break;
      // Nudge past the knot so the crossing event does not re-fire.
      events.erase(std::remove_if(events.begin(), events.end(),
                                  [&](const EventSpec<1>& e) { return e.id == end.event_id; }),
                   events.end());
    }
    return s;
  };
  const ScalarSeries u = integrate(u0, 0.0);
  const ScalarSeries v = integrate(v0, slack);
  return compare_series(u, v);
}

VerificationReport check_comparison_principle(CpCase c, int n_instances, std::uint64_t seed,
                                              double tol) {
  VerificationReport rep;
  rep.suite = std::string("cp-") + to_string(c);
  rep.tolerance = tol;
  rep.scenarios_checked = n_instances;
  rep.records.resize(static_cast<size_t>(n_instances));

  for (int i = 0; i < n_instances; ++i) {
    Rng rng(mix(seed, static_cast<std::uint64_t>(i)) | 1ULL);
    CpOutcome out;
    std::string locus;
    switch (c) {
      case CpCase::Standard: {
        if (i == 0) {
          // Fixed closed-form instance: u' = u from 1 gives e^t; v' = v - 1
          // from 1 stays at 1.
          out = cp_compare([](double, double x) { return x; }, [](double) { return 1.0; }, 1.0,
                           1.0, 0.0, 2.0);
          locus = "linear closed-form instance";
        } else {
          const double a = rng.uniform(0.0, 1.0), b = rng.uniform(0.0, 1.0);
          const double w = rng.uniform(0.5, 3.0), cc = rng.uniform(0.2, 2.0);
          const double u0 = rng.uniform(-1.0, 1.0);
          const double d0 = (i % 3 == 0) ? 0.0 : rng.uniform(0.0, 1.0);
          const double s0 = rng.uniform(0.0, 1.0), nu = rng.uniform(0.5, 3.0);
          const double t1 = rng.uniform(2.0, 6.0);
          out = cp_compare(
              [a, b, w, cc](double t, double x) { return a + b * std::sin(w * t) - cc * x; },
              [s0, nu](double t) { return 0.5 * s0 * (1.0 + std::sin(nu * t)); }, u0, u0 - d0,
              0.0, t1);
          locus = "standard#" + std::to_string(i);
        }
        break;
      }
      case CpCase::VariantA: {
        const double A = rng.uniform(0.5, 2.0), b = rng.uniform(0.0, 0.5);
        const double u0 = rng.uniform(-0.5, 0.5);
        const double d0 = (i % 3 == 0) ? 0.0 : rng.uniform(0.0, 0.5);
        const double s0 = rng.uniform(0.0, 0.5);
        const double t1 = rng.uniform(2.0, 6.0);
        const int n_knots = rng.uniform_int(1, 4);
        std::vector<double> knots;
        std::vector<double> levels{rng.uniform(0.2, 2.0)};
        for (int k = 0; k < n_knots; ++k) {
          knots.push_back(rng.uniform(0.1, 0.9) * t1);
          levels.push_back(rng.uniform(0.2, 2.0));
        }
        std::sort(knots.begin(), knots.end());
        auto modulation = [knots, levels](double t) {
          const auto it = std::upper_bound(knots.begin(), knots.end(), t);
          return levels[static_cast<size_t>(it - knots.begin())];
        };
        out = cp_compare(
            [A, b, modulation](double t, double x) {
              return modulation(t) * (A - x) + b * std::cos(t);
            },
            [s0](double) { return s0; }, u0, u0 - d0, 0.0, t1, knots);
        locus = "variant-a#" + std::to_string(i);
        break;
      }
      case CpCase::VariantB: {
        const int n_knots = rng.uniform_int(1, 3);
        PiecewiseRhs f;
        double x = rng.uniform(0.5, 1.5);
        f.levels.push_back(rng.uniform(0.3, 2.0));
        for (int k = 0; k < n_knots; ++k) {
          x += rng.uniform(0.5, 1.5);
          f.knots.push_back(x);
          f.levels.push_back(rng.uniform(0.3, 2.0));
        }
        const double min_level = *std::min_element(f.levels.begin(), f.levels.end());
        const double slack = rng.uniform(0.0, 0.45 * min_level);
        const double u0 = rng.uniform(-0.5, 0.5);
        const double d0 = (i % 3 == 0) ? 0.0 : rng.uniform(0.0, 0.5);
        const double t1 = rng.uniform(3.0, 8.0);
        out = cp_compare_state_jumps(f, u0, u0 - d0, slack, 0.0, t1);
        locus = "variant-b#" + std::to_string(i);
        break;
      }
    }
    rep.records[static_cast<size_t>(i)] = {mix(seed, static_cast<std::uint64_t>(i)),
                                           out.min_margin, locus, 1};
  }

  for (const ScenarioRecord& r : rep.records) {
    rep.comparisons += r.comparisons;
    rep.min_margin = std::min(rep.min_margin, r.min_margin);
    if (r.min_margin < -tol) rep.failures.push_back(r);
  }
  return rep;
}

}  // namespace contain
