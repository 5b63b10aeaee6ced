#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "contain/rnplane.hpp"
#include "contain/simulate.hpp"
#include "oracles.hpp"

using namespace contain;

namespace {

TumorModel mg_fixture() { return TumorModel::monro_gaffney(0.007, 2e12, 2.0, 5e11); }

IntegratorConfig default_cfg(double horizon) {
  IntegratorConfig cfg;
  cfg.horizon = horizon;
  return cfg;
}

std::vector<Policy> all_policies(double N_tol, double N_min) {
  DoseSchedule sched;
  sched.breakpoints = {{0.0, 0.3}, {50.0, 1.4}, {160.0, 0.8}};
  return {
      Policy::no_treat(N_tol),
      Policy::constant_dose(0.9, N_tol),
      Policy::mtd(N_tol),
      Policy::delayed_mtd(N_tol),
      Policy::containment(N_tol, N_tol),
      Policy::containment(N_min, N_tol),
      Policy::intermittent(N_min, N_tol),
      Policy::ideal_mtd(N_tol),
      Policy::delayed_ideal_mtd(N_tol),
      Policy::ideal_containment(N_tol, N_tol),
      Policy::ideal_intermittent(N_min, N_tol),
      Policy::alternative(sched, N_tol),
  };
}

}  // namespace

TEST_CASE("resistant-only dynamics are policy-independent and match the closed form") {
  const TumorModel model = mg_fixture();
  const TumorState init{0.0, 1e9, 0.0};
  const IntegratorConfig cfg = default_cfg(400.0);
  const double t_expected = oracles::gompertz_crossing_time(0.007, 2e12, 1e9, 5e11);
  CHECK(t_expected == doctest::Approx(243.09).epsilon(1e-3));

  for (const Policy& policy : all_policies(6e10, 3e10)) {
    CAPTURE(policy.name());
    const SimulationResult res = simulate(model, policy, init, cfg);
    REQUIRE(res.metrics.t_survival.has_value());
    CHECK(std::abs(*res.metrics.t_survival - t_expected) <= 1e-3);
    // R(t) follows the Gompertz closed form along the whole trajectory.
    for (size_t i = 0; i < res.trajectory.samples.size(); i += 7) {
      const auto& s = res.trajectory.samples[i];
      const double ref = oracles::gompertz_value(0.007, 2e12, 1e9, s.t);
      CHECK(std::abs(s.R - ref) <= 1e-7 * ref);
    }
  }
}

TEST_CASE("zero constant dose reproduces no treatment") {
  const TumorModel model = mg_fixture();
  const TumorState init{9e9, 1e9, 0.0};
  const IntegratorConfig cfg = default_cfg(400.0);
  const auto a = simulate(model, Policy::no_treat(6e10), init, cfg);
  const auto b = simulate(model, Policy::constant_dose(0.0, 6e10), init, cfg);
  REQUIRE(a.trajectory.samples.size() == b.trajectory.samples.size());
  for (size_t i = 0; i < a.trajectory.samples.size(); ++i) {
    CHECK(std::abs(a.trajectory.samples[i].R - b.trajectory.samples[i].R) <=
          1e-10 * a.trajectory.samples[i].R);
    CHECK(std::abs(a.trajectory.samples[i].S - b.trajectory.samples[i].S) <=
          1e-10 * std::max(a.trajectory.samples[i].S, 1.0));
  }
}

TEST_CASE("ideal MTD starts with an instantaneous reset") {
  const TumorModel model = mg_fixture();
  const SimulationResult res =
      simulate(model, Policy::ideal_mtd(6e10), {9e9, 1e9, 0.0}, default_cfg(500.0));
  REQUIRE(!res.trajectory.events.empty());
  const TrajectoryEvent& ev = res.trajectory.events.front();
  CHECK(ev.kind == EventKind::IdealReset);
  CHECK(ev.t == 0.0);
  CHECK(ev.S_before == 9e9);
  CHECK(ev.S_after == 0.0);
  CHECK(ev.R_before == 1e9);
  CHECK(ev.R_after == 1e9);
  for (const auto& s : res.trajectory.samples) {
    if (s.t > 0.0) CHECK(s.N == s.R);
  }
}

TEST_CASE("locate_threshold_crossing") {
  auto linear = [](double t) { return t; };
  CHECK(locate_threshold_crossing(linear, 0.0, 1.0, 0.5, 1e-9) ==
        doctest::Approx(0.5).epsilon(1e-6));

  const double rho = 0.007, K = 2e12, R0 = 1e9;
  auto gomp = [&](double t) { return oracles::gompertz_value(rho, K, R0, t); };
  const double t_star = locate_threshold_crossing(gomp, 0.0, 400.0, 5e11, 1e-6);
  CHECK(std::abs(t_star - oracles::gompertz_crossing_time(rho, K, R0, 5e11)) <= 1e-6);

  CHECK_THROWS_AS(locate_threshold_crossing(linear, 0.0, 1.0, 2.0, 1e-9),
                  std::invalid_argument);
}

TEST_CASE("outcome metrics for the untreated fixture match the closed forms") {
  const TumorModel model = mg_fixture();
  const TumorState init{1e10 - 1e7, 1e7, 0.0};
  const SimulationResult res =
      simulate(model, Policy::no_treat(6e10), init, default_cfg(400.0));
  REQUIRE(res.metrics.t_progression);
  REQUIRE(res.metrics.t_failure);
  REQUIRE(res.metrics.t_survival);
  // Total size follows the Gompertz closed form from N0 = 1e10.
  CHECK(*res.metrics.t_progression == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
  CHECK(std::abs(*res.metrics.t_failure -
                 oracles::gompertz_crossing_time(0.007, 2e12, 1e10, 6e10)) <= 1e-3);
  CHECK(std::abs(*res.metrics.t_survival -
                 oracles::gompertz_crossing_time(0.007, 2e12, 1e10, 5e11)) <= 1e-3);
  CHECK(*res.metrics.t_progression < *res.metrics.t_failure);
  CHECK(*res.metrics.t_failure < *res.metrics.t_survival);
}

TEST_CASE("metrics are absent when thresholds are never crossed") {
  const TumorModel model = mg_fixture();
  const SimulationResult res =
      simulate(model, Policy::no_treat(6e10), {9e9, 1e9, 0.0}, default_cfg(1.0));
  const OutcomeMetrics m = outcome_metrics(res.trajectory, 1e11, 2e11, 5e11);
  CHECK_FALSE(m.t_progression.has_value());
  CHECK_FALSE(m.t_failure.has_value());
  CHECK_FALSE(m.t_survival.has_value());
}

TEST_CASE("ideal containment: N-crossing and R-crossing failure detectors agree") {
  const TumorModel model = mg_fixture();
  const TumorState init{1e10 - 1e7, 1e7, 0.0};
  const IntegratorConfig cfg = default_cfg(4000.0);
  const SimulationResult res =
      simulate(model, Policy::ideal_containment(6e10, 6e10), init, cfg);
  const auto by_N = first_upward_crossing_N(res.trajectory, 6e10);
  const auto by_R = first_upward_crossing_R(res.trajectory, 6e10);
  REQUIRE(by_N);
  REQUIRE(by_R);
  CHECK(std::abs(*by_N - *by_R) <= 2.0 * cfg.event_time_tol);
}

TEST_CASE("apply_ideal_reset") {
  const TumorState a = apply_ideal_reset({5e10, 1e10, 3.0}, ResetAction::eliminate_sensitive());
  CHECK(a.S == 0.0);
  CHECK(a.R == 1e10);
  CHECK(a.t == 3.0);
  const TumorState b = apply_ideal_reset({5e10, 1e10, 0.0}, ResetAction::drop_to(3e10));
  CHECK(b.S == 2e10);
  CHECK(b.R == 1e10);
  const TumorState c = apply_ideal_reset({1e10, 5e10, 0.0}, ResetAction::drop_to(3e10));
  CHECK(c.S == 0.0);
  CHECK(c.R == 5e10);
}

TEST_CASE("resets conserve the resistant population bit for bit") {
  const TumorModel model = mg_fixture();
  const TumorState init{1e10 - 1e7, 1e7, 0.0};
  for (const Policy& policy :
       {Policy::ideal_mtd(6e10), Policy::delayed_ideal_mtd(6e10),
        Policy::ideal_intermittent(3e10, 6e10), Policy::ideal_containment(3e10, 6e10)}) {
    CAPTURE(policy.name());
    const SimulationResult res = simulate(model, policy, init, default_cfg(4000.0));
    for (const TrajectoryEvent& ev : res.trajectory.events) {
      if (ev.kind != EventKind::IdealReset) continue;
      CHECK(ev.R_after == ev.R_before);
      CHECK(ev.S_after >= 0.0);
      CHECK(ev.S_after <= ev.S_before);
    }
  }
}

TEST_CASE("resistant population never decreases; untreated size grows to N_crit") {
  const TumorModel model = mg_fixture();
  const TumorState init{1e10 - 1e7, 1e7, 0.0};
  const IntegratorConfig cfg = default_cfg(4000.0);
  for (const Policy& policy : all_policies(6e10, 3e10)) {
    CAPTURE(policy.name());
    const SimulationResult res = simulate(model, policy, init, cfg);
    for (size_t i = 0; i + 1 < res.trajectory.samples.size(); ++i) {
      const auto& a = res.trajectory.samples[i];
      const auto& b = res.trajectory.samples[i + 1];
      CHECK(b.R >= a.R * (1.0 - 1e-9));
    }
  }
  const SimulationResult nt = simulate(model, Policy::no_treat(6e10), init, cfg);
  for (size_t i = 0; i + 1 < nt.trajectory.samples.size(); ++i) {
    const auto& a = nt.trajectory.samples[i];
    const auto& b = nt.trajectory.samples[i + 1];
    if (b.t > a.t && a.N < 5e11) CHECK(b.N > a.N);
  }
}

TEST_CASE("fixed-step RK4 shows fourth-order convergence on the Gompertz problem") {
  const TumorModel model = mg_fixture();
  const TumorState init{0.0, 1e9, 0.0};
  const double T = 200.0;
  const double ref = oracles::gompertz_value(0.007, 2e12, 1e9, T);

  auto error_at = [&](double h) {
    IntegratorConfig cfg = default_cfg(T);
    cfg.method = IntegratorConfig::Method::Rk4Fixed;
    cfg.fixed_step = h;
    const SimulationResult res = simulate(model, Policy::no_treat(6e10), init, cfg);
    const auto& last = res.trajectory.samples.back();
    REQUIRE(last.t == doctest::Approx(T).epsilon(1e-12));
    return std::abs(last.R - ref);
  };

  const double e1 = error_at(4.0);
  const double e2 = error_at(2.0);
  const double e3 = error_at(1.0);
  const double order12 = std::log2(e1 / e2);
  const double order23 = std::log2(e2 / e3);
  CAPTURE(e1);
  CAPTURE(e2);
  CAPTURE(e3);
  CHECK(order12 >= 3.8);
  CHECK(order23 >= 3.8);
}

TEST_CASE("event idempotence: halving the event tolerance stays within it") {
  const TumorModel model = mg_fixture();
  const TumorState init{1e10 - 1e7, 1e7, 0.0};
  IntegratorConfig coarse = default_cfg(4000.0);
  coarse.event_time_tol = 1e-4;
  IntegratorConfig fine = coarse;
  fine.event_time_tol = 5e-5;
  for (const Policy& policy :
       {Policy::intermittent(3e10, 6e10), Policy::containment(6e10, 6e10),
        Policy::delayed_ideal_mtd(6e10)}) {
    CAPTURE(policy.name());
    const auto a = simulate(model, policy, init, coarse);
    const auto b = simulate(model, policy, init, fine);
    REQUIRE(a.metrics.t_failure);
    REQUIRE(b.metrics.t_failure);
    CHECK(std::abs(*a.metrics.t_failure - *b.metrics.t_failure) < coarse.event_time_tol);
    REQUIRE(a.metrics.t_survival);
    REQUIRE(b.metrics.t_survival);
    CHECK(std::abs(*a.metrics.t_survival - *b.metrics.t_survival) < coarse.event_time_tol);
  }
}

TEST_CASE("identical runs are bit-identical") {
  const TumorModel model = mg_fixture();
  const TumorState init{1e10 - 1e7, 1e7, 0.0};
  const IntegratorConfig cfg = default_cfg(4000.0);
  for (const Policy& policy : all_policies(6e10, 3e10)) {
    const auto a = simulate(model, policy, init, cfg);
    const auto b = simulate(model, policy, init, cfg);
    REQUIRE(a.trajectory.samples.size() == b.trajectory.samples.size());
    for (size_t i = 0; i < a.trajectory.samples.size(); ++i) {
      CHECK(a.trajectory.samples[i].t == b.trajectory.samples[i].t);
      CHECK(a.trajectory.samples[i].S == b.trajectory.samples[i].S);
      CHECK(a.trajectory.samples[i].R == b.trajectory.samples[i].R);
      CHECK(a.trajectory.samples[i].phase == b.trajectory.samples[i].phase);
    }
    REQUIRE(a.trajectory.events.size() == b.trajectory.events.size());
    for (size_t i = 0; i < a.trajectory.events.size(); ++i) {
      CHECK(a.trajectory.events[i].t == b.trajectory.events[i].t);
      CHECK(a.trajectory.events[i].kind == b.trajectory.events[i].kind);
    }
  }
}

TEST_CASE("simulate rejects invalid initial states and doses") {
  const TumorModel model = mg_fixture();
  CHECK_THROWS_AS(simulate(model, Policy::no_treat(6e10), {-1.0, 1e9, 0.0}, default_cfg(10.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(simulate(model, Policy::no_treat(6e10), {1e9, 0.0, 0.0}, default_cfg(10.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(simulate(model, Policy::no_treat(6e10), {1e9, 1e9, 0.0}, default_cfg(0.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      simulate(model, Policy::constant_dose(5.0, 6e10), {1e9, 1e9, 0.0}, default_cfg(10.0)),
      std::invalid_argument);
}
