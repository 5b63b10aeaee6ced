// Two-compartment tumor models: absolute growth rates phi_S, phi_R and the
// (f_N, f_R) reparameterization, structural assumption checks, and the
// mutation-compatibility conditions.
#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "contain/growth.hpp"

namespace contain {

/// Absolute growth rates of the sensitive and resistant compartments.
struct Rates {
  double phi_S = 0.0;
  double phi_R = 0.0;
};

/// Tumor-size form: f_N = phi_S + phi_R, f_R = phi_R, as functions of (N, R, L).
struct SizeRates {
  double f_N = 0.0;
  double f_R = 0.0;
};

/// A concrete two-compartment tumor model. The resistant compartment is fully
/// resistant: phi_R never depends on the dose L. Doses are restricted to
/// [0, L_max]; the patient dies when N reaches N_crit.
struct TumorModel {
  enum class Kind { General, MonroGaffney, NortonSimon, BirthDeath, Mutation, CostMutation };

  using PhiS = std::function<double(double S, double R, double L)>;
  using PhiR = std::function<double(double S, double R)>;
  using RateOfN = std::function<double(double N)>;

  Kind kind = Kind::MonroGaffney;
  GrowthLaw law;               // MonroGaffney/NortonSimon/Mutation; shape for CostMutation
  double tau1 = 0.0;           // mutation rate, Mutation/CostMutation
  double tau2 = 0.0;           // backmutation rate
  double rho_s = 0.0;          // sensitive baseline rate, CostMutation
  double rho_r = 0.0;          // resistant baseline rate, CostMutation
  PhiS phi_S_fn;               // General only
  PhiR phi_R_fn;               // General only
  RateOfN birth_fn, death_fn;  // BirthDeath only
  double L_max = 0.0;
  double N_crit = 0.0;

  static TumorModel monro_gaffney(double rho, double K, double L_max, double N_crit);
  static TumorModel norton_simon(GrowthLaw law, double L_max, double N_crit);
  static TumorModel birth_death(RateOfN birth, RateOfN death, double L_max, double N_crit);
  static TumorModel mutation(GrowthLaw law, double tau1, double tau2, double L_max, double N_crit);
  // `shape` carries the N-dependence only; rho_s and rho_r multiply it. Pass a
  // shape with rho = 1 unless an extra common factor is intended.
  static TumorModel cost_mutation(GrowthLaw shape, double rho_s, double rho_r, double tau1,
                                  double tau2, double L_max, double N_crit);
  static TumorModel general(PhiS phi_S, PhiR phi_R, double L_max, double N_crit);

  std::string name() const;
};

/// phi_S, phi_R at (S, R, L). Enforces S,R >= 0 and 0 <= L <= L_max.
Rates eval_rates(const TumorModel& model, double S, double R, double L);

/// f_N, f_R at (N, R, L) with S = N - R. Enforces 0 <= R <= N.
SizeRates eval_fn_fr(const TumorModel& model, double N, double R, double L);

/// Unchecked variants used by integrators and finite differences; these accept
/// points slightly outside the contract domain (the growth-rate functions are
/// defined on a neighborhood of it).
Rates raw_rates(const TumorModel& model, double S, double R, double L);
SizeRates raw_fn_fr(const TumorModel& model, double N, double R, double L);

/// Sampling resolution for check_model_assumptions; each axis needs >= 2 points.
struct AssumptionGrid {
  int n_N = 12;
  int n_R = 12;
  int n_L = 8;
};

// Assumption ids: 1: f_N(N,R,0) > 0; 2: f_R(N,R) > 0;
// 3: df_R/dN <= 0; 4: df_N/dL <= 0.
struct AssumptionViolation {
  int assumption = 0;
  double N = 0.0, R = 0.0, L = 0.0;
  double value = 0.0;  // the offending quantity (rate or derivative)
};

struct AssumptionReport {
  long grid_size = 0;
  std::vector<AssumptionViolation> violations;
  std::array<double, 4> min_slack{};  // indexed assumption-1; >= 0 means satisfied

  bool ok() const { return violations.empty(); }
  /// Assumption with the worst (most negative) slack.
  int worst_assumption() const;
};

const char* assumption_name(int assumption);

/// Evaluates the structural assumptions on the grid R0 <= R <= N <= N_crit,
/// 0 <= L <= L_max. Cell-count axes are sampled geometrically, the dose axis
/// linearly; derivatives use central differences with relative step
/// 1e-6 * max(|x|, 1).
AssumptionReport check_model_assumptions(const TumorModel& model, double R0,
                                         const AssumptionGrid& grid = {});

/// Resistant fraction x_r at detection size N0. Without a cost ratio this is
/// tau1/(tau1+tau2) * (1 - N0^-(tau1+tau2)); with cost_ratio = rho_r/rho_s < 1
/// it is tau1/(1 - cost_ratio).
double resistant_fraction_at_detection(double tau1, double tau2, double N0,
                                       std::optional<double> cost_ratio = std::nullopt);

struct MutationCompatibilityReport {
  double lhs = 0.0;
  double rhs = 0.0;
  bool satisfied = false;
  double resistant_fraction_x_r = 0.0;
  bool cost_variant = false;
  bool finite_difference_rhs = false;  // set when g' had no analytic form
};

/// Checks whether mutation inflow is dominated by competition at detection:
/// lhs = ln(N0) + 1 (Mutation) or 1/(1 - rho_r/rho_s) (CostMutation),
/// rhs = -g(N0)/(N0 g'(N0)); satisfied iff lhs >= rhs.
MutationCompatibilityReport mutation_compatibility(const TumorModel& model, double N0);

}  // namespace contain
