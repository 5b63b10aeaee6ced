// Numerical certification harness: samples assumption-satisfying scenarios
// and checks the treatment-ordering claims and the comparison principles on
// each of them, producing deterministic machine-readable reports.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "contain/rnplane.hpp"
#include "contain/simulate.hpp"

namespace contain {

/// Deterministic RNG with hand-rolled uniform draws so sampled scenarios do
/// not depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  double log_uniform(double a, double b) {
    return std::exp(uniform(std::log(a), std::log(b)));
  }
  int uniform_int(int a, int b) {  // inclusive bounds
    const int span = b - a + 1;
    int k = static_cast<int>(uniform() * span);
    if (k >= span) k = span - 1;
    return a + k;
  }

 private:
  std::mt19937_64 eng_;
};

std::uint64_t splitmix64(std::uint64_t x);

struct Thresholds {
  double N0 = 0.0;
  double N_tol = 0.0;
  double N_min = 0.0;
  double N_crit = 0.0;
};

enum class ModelFamily {
  MonroGaffney,
  MutationGompertz,
  PowerLawNortonSimon,
  BirthDeath,
  MutationLogistic,  // frequently violates the f_R monotonicity assumption
  NegativeControl,   // f_R increasing in N on purpose; bypasses the gate
  Mixed,             // 60/20/10/10 over the first four
};

struct Scenario {
  TumorModel model;
  TumorState init;
  Thresholds thr;
  IntegratorConfig integ;
  std::uint64_t seed = 0;
  std::string family;
};

class FamilyInfeasible : public std::runtime_error {
 public:
  FamilyInfeasible(const std::string& what, int assumption)
      : std::runtime_error(what), assumption(assumption) {}
  int assumption = 0;
};

/// Draws parameters (log-uniform for cell counts), gates them through
/// check_model_assumptions with bounded retries, and picks the horizon as ten
/// times the untreated survival time. Throws FamilyInfeasible naming the
/// failing assumption when the retry budget runs out.
///
/// `require_sensitive_decay` additionally certifies that the sensitive
/// population shrinks under L_max everywhere on the domain (the sensitive-
/// comparison hypothesis); mutation draws then carry no backmutation, whose
/// inflow would prop the sensitive population up at small sizes.
Scenario sample_scenario(std::uint64_t seed, ModelFamily family = ModelFamily::Mixed,
                         bool require_sensitive_decay = false);

/// Worst slack of phi_S(S, R, L_max) <= 0 over the sampled domain, relative.
double sensitive_decay_margin(const TumorModel& model, double R0, double N_crit);

struct AltConstraints {
  double horizon = 0.0;
  double L_max = 0.0;
  double n_tol = 0.0;
  int max_breakpoints = 6;
  double projected_failure = 0.0;  // latest useful reset time for idealized draws
};

/// Random piecewise-constant schedule in [0, L_max] with the feedback
/// override; idealized draws add one eliminate-sensitive reset at a random
/// time (the simulator also fires it when N first reaches N_tol).
Policy generate_alternative_policy(std::uint64_t seed, bool idealized, const AltConstraints& c);
Policy generate_alternative_policy(Rng& rng, bool idealized, const AltConstraints& c);

/// Piecewise-cubic read-only view of a trajectory, right-continuous at reset
/// records.
class TrajectoryInterpolant {
 public:
  explicit TrajectoryInterpolant(const Trajectory& traj);

  double S(double t) const;
  double R(double t) const;
  double N(double t) const;
  double t_end() const { return t_end_; }

 private:
  double eval(double t, int component) const;
  const Trajectory* traj_;
  double t_end_ = 0.0;
};

struct OrderMargin {
  double min_margin = std::numeric_limits<double>::infinity();
  double locus_t = 0.0;
  long points = 0;
};

/// min over the union of sample times in [t_from, min(t_end)] of
/// (hi - lo)/scale for the chosen component ('S', 'R' or 'N').
OrderMargin ordered_margin(const Trajectory& lo, const Trajectory& hi, char component,
                           double t_from = 0.0);

enum class PropId { P1, P2, P3, P4, P5, P6, P7, P8, L4, A1A2 };

const char* to_string(PropId id);
std::optional<PropId> prop_from_string(const std::string& name);

struct ScenarioRecord {
  std::uint64_t seed = 0;
  double min_margin = 0.0;
  std::string locus;
  long comparisons = 0;
};

struct VerificationReport {
  std::string suite;
  int scenarios_checked = 0;
  long comparisons = 0;
  double min_margin = std::numeric_limits<double>::infinity();
  double tolerance = 1e-6;
  std::string note;
  std::vector<ScenarioRecord> records;
  std::vector<ScenarioRecord> failures;  // records with min_margin < -tolerance

  bool passed() const { return failures.empty(); }
  std::string to_text() const;
};

struct VerifyOptions {
  int n_scenarios = 100;
  std::uint64_t seed = 1;
  double tol = 1e-6;
  int n_alternatives = 10;
  ModelFamily family = ModelFamily::Mixed;
  int threads = 0;  // 0: hardware concurrency
  // Integrator settings for the sampled scenarios, tighter than the ordering
  // tolerance demands so that neither accumulated step-control drift nor
  // dense-output error on the small resistant component can masquerade as an
  // ordering violation.
  double rel_tol = 1e-10;
  double abs_tol = 1e-5;
};

/// Runs one proposition suite over freshly sampled scenarios. Scenario
/// evaluations execute on a bounded worker pool; records are merged in seed
/// order regardless of completion order.
VerificationReport check_proposition(PropId prop, const VerifyOptions& opt);

/// Same, over caller-supplied scenarios.
VerificationReport check_proposition(PropId prop, const std::vector<Scenario>& scenarios,
                                     double tol = 1e-6, int n_alternatives = 10,
                                     int threads = 0);

enum class CpCase { Standard, VariantA, VariantB };

const char* to_string(CpCase c);
std::optional<CpCase> cp_case_from_string(const std::string& name);

using ScalarRhs = std::function<double(double t, double x)>;
using ScalarFn = std::function<double(double t)>;

struct CpOutcome {
  double min_margin = std::numeric_limits<double>::infinity();  // min of (u - v)/scale
  double u_end = 0.0;
  double v_end = 0.0;
};

/// Integrates u' = f(t,u) and the subsolution v' = f(t,v) - slack(t) from
/// (t0, u0/v0) to t1 and reports the worst ordering margin. t_knots mark the
/// discontinuities of f's time dependence.
CpOutcome cp_compare(const ScalarRhs& f, const ScalarFn& slack, double u0, double v0, double t0,
                     double t1, const std::vector<double>& t_knots = {});

/// Autonomous piecewise-constant right-hand side with jumps at `knots`;
/// `levels` has one more entry than `knots`.
struct PiecewiseRhs {
  std::vector<double> knots;
  std::vector<double> levels;

  double operator()(double x) const;
};

/// Variant-b comparison: f depends on x only and has jump discontinuities;
/// u and v must be strictly increasing, so f and f - slack must stay positive
/// on the traversed range (checked; contract violation otherwise).
CpOutcome cp_compare_state_jumps(const PiecewiseRhs& f, double u0, double v0, double slack,
                                 double t0, double t1);

/// 50-instances-per-case oracle suite for the comparison principles.
VerificationReport check_comparison_principle(CpCase c, int n_instances, std::uint64_t seed,
                                              double tol = 1e-6);

}  // namespace contain
