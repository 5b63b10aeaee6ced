#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "contain/rnplane.hpp"
#include "contain/verify.hpp"

using namespace contain;

namespace {

TumorModel mg_fixture() { return TumorModel::monro_gaffney(0.007, 2e12, 2.0, 5e11); }

IntegratorConfig default_cfg(double horizon) {
  IntegratorConfig cfg;
  cfg.horizon = horizon;
  return cfg;
}

const double kNtol = 6e10;
const double kNmin = 3e10;
const TumorState kInit{1e10 - 1e7, 1e7, 0.0};

}  // namespace

TEST_CASE("ideal MTD lives on the diagonal of the R-N plane") {
  const TumorModel model = mg_fixture();
  const RnCurve curve =
      rn_trajectory(model, Policy::ideal_mtd(kNtol), kInit, 5e11, default_cfg(4000.0));
  REQUIRE(curve.size() > 2);
  CHECK(curve.r.front() == kInit.R);
  CHECK(curve.N_tilde.front() == kInit.N());  // pre-reset record
  CHECK(curve.N_tilde[1] == curve.r[1]);      // post-reset: N = r
  for (size_t i = 1; i < curve.size(); ++i) {
    CHECK(curve.N_tilde[i] == doctest::Approx(curve.r[i]).epsilon(1e-14));
    CHECK(curve.S_tilde[i] == 0.0);
  }
  CHECK(curve.r_back() == doctest::Approx(5e11).epsilon(1e-12));
}

TEST_CASE("ideal containment holds the plane at N_tol until r reaches it") {
  const TumorModel model = mg_fixture();
  const RnCurve curve = rn_trajectory(model, Policy::ideal_containment(kNtol, kNtol), kInit,
                                      5e11, default_cfg(1e5));
  bool plateau_seen = false;
  for (size_t i = 0; i < curve.size(); ++i) {
    if (curve.N_tilde[i] == kNtol && curve.r[i] < kNtol * (1.0 - 1e-9)) plateau_seen = true;
    if (curve.r[i] > kNtol) CHECK(curve.N_tilde[i] == doctest::Approx(curve.r[i]));
  }
  CHECK(plateau_seen);
}

TEST_CASE("time-domain and plane representations agree for every fixture policy") {
  const TumorModel model = mg_fixture();
  IntegratorConfig cfg = default_cfg(4000.0);
  // The two integration routes each accumulate ~n_steps * rel_tol of global
  // drift; run the cross-check tight enough that 1e-6 tests consistency
  // rather than step-control or dense-output noise.
  cfg.rel_tol = 1e-10;
  cfg.abs_tol = 1e-5;
  DoseSchedule sched;
  sched.breakpoints = {{0.0, 0.4}, {70.0, 1.6}, {180.0, 0.2}};
  for (const Policy& policy :
       {Policy::no_treat(kNtol), Policy::constant_dose(0.9, kNtol), Policy::mtd(kNtol),
        Policy::delayed_mtd(kNtol), Policy::containment(kNtol, kNtol),
        Policy::containment(kNmin, kNtol), Policy::intermittent(kNmin, kNtol),
        Policy::ideal_mtd(kNtol), Policy::delayed_ideal_mtd(kNtol),
        Policy::ideal_containment(kNtol, kNtol), Policy::ideal_intermittent(kNmin, kNtol),
        Policy::alternative(sched, kNtol)}) {
    CAPTURE(policy.name());
    const SimulationResult res = simulate(model, policy, kInit, cfg);
    const RnCurve curve = rn_trajectory(model, policy, kInit, 1.08 * model.N_crit, cfg);
    const ConsistencyResult cons = consistency_check(res.trajectory, curve);
    CAPTURE(cons.coverage);
    CHECK(cons.max_rel_dev <= 1e-6);
    CHECK(cons.coverage >= 0.99);
  }
}

TEST_CASE("resistant-only initial state stays on the diagonal") {
  const TumorModel model = mg_fixture();
  const TumorState init{0.0, 1e9, 0.0};
  const Policy policy = Policy::no_treat(kNtol);
  const SimulationResult res = simulate(model, policy, init, default_cfg(400.0));
  const RnCurve curve = rn_trajectory(model, policy, init, 5e11, default_cfg(400.0));
  const ConsistencyResult cons = consistency_check(res.trajectory, curve);
  CHECK(cons.max_rel_dev <= 1e-9);
}

TEST_CASE("mismatched trajectory/curve pairs are flagged (negative control)") {
  const TumorModel model = mg_fixture();
  const IntegratorConfig cfg = default_cfg(4000.0);
  const SimulationResult mtd = simulate(model, Policy::mtd(kNtol), kInit, cfg);
  const RnCurve no_treat_curve =
      rn_trajectory(model, Policy::no_treat(kNtol), kInit, 5e11, cfg);
  const ConsistencyResult cons = consistency_check(mtd.trajectory, no_treat_curve);
  CHECK(cons.max_rel_dev > 1e-2);
}

TEST_CASE("compare_curves classifies self, dominated and crossing pairs") {
  const TumorModel model = mg_fixture();
  const IntegratorConfig cfg = default_cfg(4000.0);
  const RnCurve no_treat = rn_trajectory(model, Policy::no_treat(kNtol), kInit, 5e11, cfg);
  const RnCurve mtd = rn_trajectory(model, Policy::mtd(kNtol), kInit, 5e11, cfg);

  const PointwiseOrderReport self = compare_curves(no_treat, no_treat);
  CHECK(self.relation == PointwiseOrderReport::Relation::LessEq);
  CHECK(self.max_violation == 0.0);

  const PointwiseOrderReport order = compare_curves(mtd, no_treat);
  CHECK(order.relation == PointwiseOrderReport::Relation::LessEq);

  const PointwiseOrderReport reverse = compare_curves(no_treat, mtd);
  CHECK(reverse.relation == PointwiseOrderReport::Relation::GreaterEq);
}

TEST_CASE("compare_curves rejects disjoint or mismatched ranges") {
  const TumorModel model = mg_fixture();
  const IntegratorConfig cfg = default_cfg(4000.0);
  const RnCurve a = rn_trajectory(model, Policy::no_treat(kNtol), kInit, 5e11, cfg);
  const TumorState other{5e10, 2e10, 0.0};
  const RnCurve b = rn_trajectory(model, Policy::no_treat(kNtol), other, 5e11, cfg);
  CHECK_THROWS_AS(compare_curves(a, b), std::invalid_argument);
}

TEST_CASE("containment dominates sampled alternatives in the plane") {
  const TumorModel model = mg_fixture();
  const IntegratorConfig cfg = default_cfg(4000.0);
  const RnCurve cont =
      rn_trajectory(model, Policy::containment(kNtol, kNtol), kInit, 5e11, cfg);
  const AltConstraints cons{cfg.horizon, model.L_max, kNtol, 6, 0.0};
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const Policy alt = generate_alternative_policy(seed, false, cons);
    const RnCurve ac = rn_trajectory(model, alt, kInit, 5e11, cfg);
    const PointwiseOrderReport rep = compare_curves(ac, cont, 1e-6);
    CAPTURE(seed);
    CHECK(rep.relation == PointwiseOrderReport::Relation::LessEq);
  }
}

TEST_CASE("dose order in the plane transfers to size order (Lemma 3 shape)") {
  const TumorModel model = mg_fixture();
  const IntegratorConfig cfg = default_cfg(4000.0);
  // L1 <= L2 pointwise implies the lower-dose curve lies above.
  const RnCurve low = rn_trajectory(model, Policy::constant_dose(0.3, kNtol), kInit, 5e11, cfg);
  const RnCurve high =
      rn_trajectory(model, Policy::constant_dose(1.1, kNtol), kInit, 5e11, cfg);
  const PointwiseOrderReport rep = compare_curves(low, high);
  CHECK(rep.relation == PointwiseOrderReport::Relation::GreaterEq);
}

TEST_CASE("size order in the plane transfers to resistant order in time (Lemma 2 shape)") {
  const TumorModel model = mg_fixture();
  const IntegratorConfig cfg = default_cfg(4000.0);
  struct Pair {
    Policy upper, lower;
  };
  const Pair pairs[] = {
      {Policy::no_treat(kNtol), Policy::mtd(kNtol)},
      {Policy::containment(kNtol, kNtol), Policy::mtd(kNtol)},
      {Policy::constant_dose(0.3, kNtol), Policy::constant_dose(1.1, kNtol)},
  };
  for (const Pair& p : pairs) {
    CAPTURE(p.upper.name());
    CAPTURE(p.lower.name());
    const RnCurve cu = rn_trajectory(model, p.upper, kInit, 5e11, cfg);
    const RnCurve cl = rn_trajectory(model, p.lower, kInit, 5e11, cfg);
    CHECK(compare_curves(cl, cu).relation == PointwiseOrderReport::Relation::LessEq);

    const auto upper = simulate(model, p.upper, kInit, cfg);
    const auto lower = simulate(model, p.lower, kInit, cfg);
    // N_tilde_upper >= N_tilde_lower pointwise implies R_upper(t) <= R_lower(t).
    const OrderMargin m = ordered_margin(upper.trajectory, lower.trajectory, 'R');
    CHECK(m.min_margin >= -1e-6);
  }
}

TEST_CASE("curve structure: t_of_r strictly increasing, S_tilde exact") {
  const TumorModel model = mg_fixture();
  const IntegratorConfig cfg = default_cfg(4000.0);
  for (const Policy& policy :
       {Policy::no_treat(kNtol), Policy::containment(kNtol, kNtol),
        Policy::intermittent(kNmin, kNtol), Policy::ideal_intermittent(kNmin, kNtol)}) {
    CAPTURE(policy.name());
    const RnCurve curve = rn_trajectory(model, policy, kInit, 5e11, cfg);
    for (size_t i = 0; i + 1 < curve.size(); ++i) {
      CHECK(curve.r[i + 1] >= curve.r[i]);
      if (curve.r[i + 1] > curve.r[i]) CHECK(curve.t_of_r[i + 1] > curve.t_of_r[i]);
    }
    for (size_t i = 0; i < curve.size(); ++i) {
      CHECK(curve.S_tilde[i] == std::max(curve.N_tilde[i] - curve.r[i], 0.0));
      CHECK(curve.N_tilde[i] >= curve.r[i] * (1.0 - 1e-12));
    }
  }
}

TEST_CASE("a vanishing resistant growth rate is reported, not mishandled") {
  // Logistic law with K below the target range: f_R turns negative once
  // N > K, which the plane parameterization must reject.
  const TumorModel model =
      TumorModel::norton_simon(GrowthLaw::logistic(0.05, 1e10), 2.0, 5e11);
  const TumorState init{8e9, 1e9, 0.0};
  CHECK_THROWS_AS(
      rn_trajectory(model, Policy::no_treat(6e10), init, 5e11, default_cfg(4000.0)),
      std::runtime_error);
}

TEST_CASE("rn_trajectory argument validation") {
  const TumorModel model = mg_fixture();
  CHECK_THROWS_AS(rn_trajectory(model, Policy::no_treat(kNtol), kInit, 1e6, default_cfg(10.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(rn_trajectory(model, Policy::no_treat(kNtol), kInit, 1e12, default_cfg(10.0)),
                  std::invalid_argument);
}
