#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "contain/policy.hpp"
#include "contain/simulate.hpp"

using namespace contain;

namespace {

TumorModel mg_fixture() { return TumorModel::monro_gaffney(0.007, 2e12, 2.0, 5e11); }

IntegratorConfig default_cfg(double horizon) {
  IntegratorConfig cfg;
  cfg.horizon = horizon;
  return cfg;
}

}  // namespace

TEST_CASE("dose schedule lookup") {
  DoseSchedule sched;
  sched.breakpoints = {{0.0, 0.2}, {10.0, 1.5}, {30.0, 0.0}};
  CHECK(sched.at(-1.0) == 0.0);
  CHECK(sched.at(0.0) == 0.2);
  CHECK(sched.at(9.999) == 0.2);
  CHECK(sched.at(10.0) == 1.5);
  CHECK(sched.at(29.0) == 1.5);
  CHECK(sched.at(30.0) == 0.0);
  CHECK(sched.at(1e9) == 0.0);
}

TEST_CASE("dose per phase") {
  const TumorModel model = mg_fixture();
  CHECK(dose(Policy::no_treat(6e10), Phase::Dosing, model, 1e10, 1e9, 0.0) == 0.0);
  CHECK(dose(Policy::mtd(6e10), Phase::Dosing, model, 1e10, 1e9, 0.0) == 2.0);
  CHECK(dose(Policy::constant_dose(0.8, 6e10), Phase::Dosing, model, 1e10, 1e9, 5.0) == 0.8);
  // Containment holding N = N_tol = 6e10 with S = 4e10: the Gompertz
  // stabilizing dose is N/S = 1.5.
  CHECK(dose(Policy::containment(6e10, 6e10), Phase::Stabilize, model, 4e10, 2e10, 0.0) ==
        doctest::Approx(1.5).epsilon(1e-9));
  CHECK(dose(Policy::containment(6e10, 6e10), Phase::Saturated, model, 1e10, 5e10, 0.0) == 2.0);
  CHECK(dose(Policy::intermittent(3e10, 6e10), Phase::Vacation, model, 1e10, 1e9, 0.0) == 0.0);
  CHECK(dose(Policy::intermittent(3e10, 6e10), Phase::Treat, model, 1e10, 1e9, 0.0) == 2.0);
}

TEST_CASE("stabilizing_dose") {
  const TumorModel model = mg_fixture();
  const StabilizingDose sd = stabilizing_dose(model, 6e10, 2e10);
  CHECK_FALSE(sd.saturated);
  CHECK(sd.dose == doctest::Approx(1.5).epsilon(1e-9));
  // Root quality: |f_N| <= 1e-9 * f_R at the returned dose.
  const SizeRates sr = eval_fn_fr(model, 6e10, 2e10, sd.dose);
  CHECK(std::abs(sr.f_N) <= 1e-9 * sr.f_R);

  const StabilizingDose sat = stabilizing_dose(model, 6e10, 5.9e10);
  CHECK(sat.saturated);  // N/S = 60 > L_max
  CHECK(sat.dose == 2.0);

  const TumorModel mut =
      TumorModel::mutation(GrowthLaw::gompertz(0.007, 2e12), 0.0, 0.0, 2.0, 5e11);
  CHECK(stabilizing_dose(mut, 6e10, 2e10).dose ==
        doctest::Approx(sd.dose).epsilon(1e-9));

  CHECK_THROWS_AS(stabilizing_dose(model, 6e10, 6e10), std::domain_error);
  CHECK_THROWS_AS(stabilizing_dose(model, 6e10, 7e10), std::domain_error);
}

TEST_CASE("phase transitions") {
  const Policy cont = Policy::containment(6e10, 6e10);
  const PhaseTransition t1 =
      transition(cont, Phase::Grow, {EventKind::ReachedThresholdUp, 6e10});
  CHECK(t1.next == Phase::Stabilize);
  CHECK_FALSE(t1.reset.has_value());
  CHECK(transition(cont, Phase::Stabilize, {EventKind::DoseSaturated, 0.0}).next ==
        Phase::Saturated);
  CHECK(transition(cont, Phase::Saturated, {EventKind::ReachedThresholdDown, 6e10}).next ==
        Phase::Stabilize);

  const Policy id_cont = Policy::ideal_containment(6e10, 6e10);
  CHECK(transition(id_cont, Phase::Stabilize, {EventKind::SensitiveExtinct, 0.0}).next ==
        Phase::Pinned);

  const Policy intr = Policy::intermittent(3e10, 6e10);
  CHECK(transition(intr, Phase::Treat, {EventKind::ReachedThresholdDown, 3e10}).next ==
        Phase::Vacation);
  CHECK(transition(intr, Phase::Vacation, {EventKind::ReachedThresholdUp, 6e10}).next ==
        Phase::Treat);

  const Policy id_mtd = Policy::ideal_mtd(6e10);
  const PhaseTransition t2 = transition(id_mtd, Phase::Grow, {EventKind::IdealReset, 0.0});
  CHECK(t2.next == Phase::Pinned);
  REQUIRE(t2.reset.has_value());
  CHECK(t2.reset->kind == ResetAction::Kind::EliminateSensitive);

  const Policy id_int = Policy::ideal_intermittent(3e10, 6e10);
  const PhaseTransition t3 =
      transition(id_int, Phase::Grow, {EventKind::ReachedThresholdUp, 6e10});
  CHECK(t3.next == Phase::Grow);
  REQUIRE(t3.reset.has_value());
  CHECK(t3.reset->kind == ResetAction::Kind::DropTo);
  CHECK(t3.reset->n_min == 3e10);

  // Events a policy cannot receive are contract violations.
  CHECK_THROWS_AS(transition(cont, Phase::Grow, {EventKind::Breakpoint, 0.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(transition(Policy::mtd(6e10), Phase::Dosing, {EventKind::DoseSaturated, 0.0}),
                  std::invalid_argument);
}

TEST_CASE("policy constructor invariants") {
  CHECK_THROWS_AS(Policy::intermittent(6e10, 6e10), std::invalid_argument);
  CHECK_THROWS_AS(Policy::intermittent(0.0, 6e10), std::invalid_argument);
  CHECK_THROWS_AS(Policy::containment(-1.0, 6e10), std::invalid_argument);
  CHECK_THROWS_AS(Policy::constant_dose(-0.5, 6e10), std::invalid_argument);
  DoseSchedule bad;
  bad.breakpoints = {{5.0, 0.1}, {5.0, 0.2}};
  CHECK_THROWS_AS(Policy::alternative(bad, 6e10), std::invalid_argument);
}

TEST_CASE("every emitted dose lies inside the box [0, L_max]") {
  const TumorModel model = mg_fixture();
  const TumorState init{1e10 - 1e7, 1e7, 0.0};
  const IntegratorConfig cfg = default_cfg(4000.0);
  DoseSchedule sched;
  sched.breakpoints = {{0.0, 0.5}, {80.0, 1.9}, {200.0, 0.1}};
  for (const Policy& policy :
       {Policy::no_treat(6e10), Policy::mtd(6e10), Policy::delayed_mtd(6e10),
        Policy::containment(6e10, 6e10), Policy::containment(3e10, 6e10),
        Policy::intermittent(3e10, 6e10), Policy::ideal_mtd(6e10),
        Policy::ideal_containment(6e10, 6e10), Policy::ideal_intermittent(3e10, 6e10),
        Policy::alternative(sched, 6e10)}) {
    CAPTURE(policy.name());
    const SimulationResult res = simulate(model, policy, init, cfg);
    for (const TrajectorySample& s : res.trajectory.samples) {
      CHECK(s.L >= 0.0);
      CHECK(s.L <= model.L_max);
    }
  }
}

TEST_CASE("post-failure aggressiveness: above N_tol the dose is maximal") {
  const TumorModel model = mg_fixture();
  const TumorState init{1e10 - 1e7, 1e7, 0.0};
  const IntegratorConfig cfg = default_cfg(4000.0);
  const double N_tol = 6e10;
  DoseSchedule sched;
  sched.breakpoints = {{0.0, 0.5}, {80.0, 1.9}, {200.0, 0.1}};
  for (const Policy& policy :
       {Policy::mtd(N_tol), Policy::delayed_mtd(N_tol), Policy::containment(N_tol, N_tol),
        Policy::containment(3e10, N_tol), Policy::intermittent(3e10, N_tol),
        Policy::ideal_mtd(N_tol), Policy::delayed_ideal_mtd(N_tol),
        Policy::ideal_containment(N_tol, N_tol), Policy::ideal_intermittent(3e10, N_tol),
        Policy::alternative(sched, N_tol)}) {
    CAPTURE(policy.name());
    const SimulationResult res = simulate(model, policy, init, cfg);
    bool above_seen = false;
    for (const TrajectorySample& s : res.trajectory.samples) {
      if (s.N > N_tol * (1.0 + 1e-6)) {
        above_seen = true;
        CHECK(s.L == model.L_max);
      }
    }
    CHECK(above_seen);  // every such policy eventually fails on this fixture
  }
}

TEST_CASE("containment holds the plateau fixed") {
  const TumorModel model = mg_fixture();
  const TumorState init{1e10 - 1e7, 1e7, 0.0};
  const double N_tol = 6e10;

  SUBCASE("reduced plateau dynamics") {
    const SimulationResult res = simulate(model, Policy::containment(N_tol, N_tol), init,
                                          default_cfg(4000.0));
    bool stabilized_seen = false;
    for (const TrajectorySample& s : res.trajectory.samples) {
      if (s.phase != Phase::Stabilize) continue;
      stabilized_seen = true;
      CHECK(s.N == N_tol);  // exact by construction
      const double f_R = eval_fn_fr(model, s.N, s.R, 0.0).f_R;
      CHECK(std::abs(s.dS + s.dR) <= 1e-6 * f_R);
    }
    CHECK(stabilized_seen);
  }

  SUBCASE("two-compartment feedback loop") {
    IntegratorConfig cfg = default_cfg(4000.0);
    cfg.feedback_stabilization = true;
    const SimulationResult res =
        simulate(model, Policy::containment(N_tol, N_tol), init, cfg);
    bool stabilized_seen = false;
    for (const TrajectorySample& s : res.trajectory.samples) {
      if (s.phase != Phase::Stabilize) continue;
      stabilized_seen = true;
      const double f_R = eval_fn_fr(model, s.N, s.R, 0.0).f_R;
      CHECK(std::abs(s.dS + s.dR) <= 1e-6 * f_R);
      CHECK(std::abs(s.N - N_tol) <= 1e-6 * N_tol);
    }
    CHECK(stabilized_seen);

    // The plateau end agrees with the reduced-mode run: the saturation event
    // tightly, the (tangential) threshold crossing a little more loosely.
    const SimulationResult reduced = simulate(model, Policy::containment(N_tol, N_tol), init,
                                              default_cfg(4000.0));
    auto saturation_time = [](const Trajectory& traj) {
      for (const TrajectoryEvent& e : traj.events) {
        if (e.kind == EventKind::DoseSaturated) return e.t;
      }
      return -1.0;
    };
    CHECK(saturation_time(res.trajectory) ==
          doctest::Approx(saturation_time(reduced.trajectory)).epsilon(1e-6));
    REQUIRE(res.metrics.t_failure);
    REQUIRE(reduced.metrics.t_failure);
    CHECK(*res.metrics.t_failure ==
          doctest::Approx(*reduced.metrics.t_failure).epsilon(1e-4));
  }
}

TEST_CASE("intermittent hysteresis is clean") {
  const TumorModel model = mg_fixture();
  const TumorState init{1e10 - 1e7, 1e7, 0.0};
  const double N_min = 3e10, N_tol = 6e10;
  const SimulationResult res =
      simulate(model, Policy::intermittent(N_min, N_tol), init, default_cfg(4000.0));
  bool cycled = false;
  for (const TrajectorySample& s : res.trajectory.samples) {
    if (s.phase == Phase::Treat) {
      CHECK(s.L == model.L_max);
      CHECK(s.N >= N_min * (1.0 - 1e-6));
      cycled = true;
    } else if (s.phase == Phase::Vacation) {
      CHECK(s.L == 0.0);
      CHECK(s.N <= N_tol * (1.0 + 1e-6));
      CHECK(s.N >= std::min(init.N(), N_min) * (1.0 - 1e-6));
    }
  }
  CHECK(cycled);
}

TEST_CASE("alternative override pushes the dose to L_max above N_tol") {
  const TumorModel model = mg_fixture();
  const TumorState init{1e10 - 1e7, 1e7, 0.0};
  DoseSchedule weak;
  weak.breakpoints = {{0.0, 0.2}};
  const SimulationResult with_override =
      simulate(model, Policy::alternative(weak, 2e10, true), init, default_cfg(400.0));
  bool overridden = false;
  for (const TrajectorySample& s : with_override.trajectory.samples) {
    if (s.N > 2e10 * (1.0 + 1e-6)) {
      CHECK(s.L == model.L_max);
      overridden = true;
    }
  }
  CHECK(overridden);

  const SimulationResult without =
      simulate(model, Policy::alternative(weak, 2e10, false), init, default_cfg(400.0));
  for (const TrajectorySample& s : without.trajectory.samples) {
    CHECK(s.L == 0.2);
  }
}
