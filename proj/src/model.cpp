#include "contain/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace contain {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void check_common(double L_max, double N_crit) {
  require(std::isfinite(L_max) && L_max >= 0.0, "TumorModel: L_max must be >= 0");
  require(std::isfinite(N_crit) && N_crit > 0.0, "TumorModel: N_crit must be > 0");
}

void check_taus(double tau1, double tau2) {
  require(tau1 >= 0.0 && tau1 < 0.01, "TumorModel: tau1 must lie in [0, 0.01)");
  require(tau2 >= 0.0 && tau2 < 0.01, "TumorModel: tau2 must lie in [0, 0.01)");
}

double fd_step(double x) { return 1e-6 * std::max(std::abs(x), 1.0); }

}  // namespace

TumorModel TumorModel::monro_gaffney(double rho, double K, double L_max, double N_crit) {
  check_common(L_max, N_crit);
  TumorModel m;
  m.kind = Kind::MonroGaffney;
  m.law = GrowthLaw::gompertz(rho, K);
  m.L_max = L_max;
  m.N_crit = N_crit;
  return m;
}

TumorModel TumorModel::norton_simon(GrowthLaw law, double L_max, double N_crit) {
  check_common(L_max, N_crit);
  TumorModel m;
  m.kind = Kind::NortonSimon;
  m.law = law;
  m.L_max = L_max;
  m.N_crit = N_crit;
  return m;
}

TumorModel TumorModel::birth_death(RateOfN birth, RateOfN death, double L_max, double N_crit) {
  check_common(L_max, N_crit);
  require(static_cast<bool>(birth) && static_cast<bool>(death),
          "TumorModel: birth_death needs both rate functions");
  TumorModel m;
  m.kind = Kind::BirthDeath;
  m.birth_fn = std::move(birth);
  m.death_fn = std::move(death);
  m.L_max = L_max;
  m.N_crit = N_crit;
  return m;
}

TumorModel TumorModel::mutation(GrowthLaw law, double tau1, double tau2, double L_max,
                                double N_crit) {
  check_common(L_max, N_crit);
  check_taus(tau1, tau2);
  TumorModel m;
  m.kind = Kind::Mutation;
  m.law = law;
  m.tau1 = tau1;
  m.tau2 = tau2;
  m.L_max = L_max;
  m.N_crit = N_crit;
  return m;
}

TumorModel TumorModel::cost_mutation(GrowthLaw shape, double rho_s, double rho_r, double tau1,
                                     double tau2, double L_max, double N_crit) {
  check_common(L_max, N_crit);
  check_taus(tau1, tau2);
  require(rho_s > 0.0 && rho_r > 0.0, "TumorModel: rho_s and rho_r must be > 0");
  TumorModel m;
  m.kind = Kind::CostMutation;
  m.law = shape;
  m.rho_s = rho_s;
  m.rho_r = rho_r;
  m.tau1 = tau1;
  m.tau2 = tau2;
  m.L_max = L_max;
  m.N_crit = N_crit;
  return m;
}

TumorModel TumorModel::general(PhiS phi_S, PhiR phi_R, double L_max, double N_crit) {
  check_common(L_max, N_crit);
  require(static_cast<bool>(phi_S) && static_cast<bool>(phi_R),
          "TumorModel: general needs both rate functions");
  TumorModel m;
  m.kind = Kind::General;
  m.phi_S_fn = std::move(phi_S);
  m.phi_R_fn = std::move(phi_R);
  m.L_max = L_max;
  m.N_crit = N_crit;
  return m;
}

std::string TumorModel::name() const {
  switch (kind) {
    case Kind::General: return "general";
    case Kind::MonroGaffney: return "monro_gaffney";
    case Kind::NortonSimon: return std::string("norton_simon_") + to_string(law.kind);
    case Kind::BirthDeath: return "birth_death";
    case Kind::Mutation: return std::string("mutation_") + to_string(law.kind);
    case Kind::CostMutation: return std::string("cost_mutation_") + to_string(law.kind);
  }
  return "?";
}

Rates raw_rates(const TumorModel& m, double S, double R, double L) {
  const double N = S + R;
  switch (m.kind) {
    case TumorModel::Kind::General:
      return {m.phi_S_fn(S, R, L), m.phi_R_fn(S, R)};
    case TumorModel::Kind::MonroGaffney:
    case TumorModel::Kind::NortonSimon: {
      const double g = growth_rate(m.law, N);
      return {S * g * (1.0 - L), R * g};
    }
    case TumorModel::Kind::BirthDeath: {
      const double b = m.birth_fn(N);
      const double d = m.death_fn(N);
      return {S * (b * (1.0 - L) - d), R * (b - d)};
    }
    case TumorModel::Kind::Mutation: {
      const double g = growth_rate(m.law, N);
      const double phi_S = g * ((1.0 - L) * S - m.tau1 * S + m.tau2 * R);
      const double phi_R = g * (R + m.tau1 * S - m.tau2 * R);
      return {phi_S, phi_R};
    }
    case TumorModel::Kind::CostMutation: {
      // Mutation inflow scales with the sensitive baseline rate, backmutation
      // with the resistant one, so the two transfer terms cancel in f_N.
      const double g = growth_rate(m.law, N);
      const double phi_S =
          m.rho_s * g * (1.0 - L) * S - m.tau1 * m.rho_s * g * S + m.tau2 * m.rho_r * g * R;
      const double phi_R =
          m.rho_r * g * R + m.tau1 * m.rho_s * g * S - m.tau2 * m.rho_r * g * R;
      return {phi_S, phi_R};
    }
  }
  throw std::logic_error("raw_rates: unknown model kind");
}

SizeRates raw_fn_fr(const TumorModel& m, double N, double R, double L) {
  const Rates r = raw_rates(m, N - R, R, L);
  return {r.phi_S + r.phi_R, r.phi_R};
}

Rates eval_rates(const TumorModel& m, double S, double R, double L) {
  require(S >= 0.0 && R >= 0.0, "eval_rates: populations must be non-negative");
  require(L >= 0.0 && L <= m.L_max, "eval_rates: dose outside [0, L_max]");
  return raw_rates(m, S, R, L);
}

SizeRates eval_fn_fr(const TumorModel& m, double N, double R, double L) {
  require(R >= 0.0 && R <= N, "eval_fn_fr: requires 0 <= R <= N");
  require(L >= 0.0 && L <= m.L_max, "eval_fn_fr: dose outside [0, L_max]");
  return raw_fn_fr(m, N, R, L);
}

int AssumptionReport::worst_assumption() const {
  int worst = 1;
  for (int a = 2; a <= 4; ++a) {
    if (min_slack[a - 1] < min_slack[worst - 1]) worst = a;
  }
  return worst;
}

const char* assumption_name(int assumption) {
  switch (assumption) {
    case 1: return "f_N positive at L=0";
    case 2: return "f_R positive";
    case 3: return "f_R non-increasing in N";
    case 4: return "f_N non-increasing in L";
  }
  return "?";
}

namespace {

std::vector<double> geometric_axis(double lo, double hi, int n) {
  std::vector<double> xs(static_cast<size_t>(n));
  if (hi <= lo) {
    std::fill(xs.begin(), xs.end(), lo);
    return xs;
  }
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < n; ++i) {
    xs[static_cast<size_t>(i)] = std::exp(llo + (lhi - llo) * i / (n - 1));
  }
  xs.front() = lo;
  xs.back() = hi;
  return xs;
}

}  // namespace

AssumptionReport check_model_assumptions(const TumorModel& model, double R0,
                                         const AssumptionGrid& grid) {
  if (grid.n_N < 2 || grid.n_R < 2 || grid.n_L < 2) {
    throw std::invalid_argument("check_model_assumptions: need >= 2 points per axis");
  }
  if (!(R0 > 0.0 && R0 < model.N_crit)) {
    throw std::invalid_argument("check_model_assumptions: need 0 < R0 < N_crit");
  }
  if (!(model.L_max > 0.0)) {
    throw std::invalid_argument("check_model_assumptions: degenerate dose axis (L_max <= 0)");
  }

  AssumptionReport rep;
  rep.min_slack.fill(std::numeric_limits<double>::infinity());
  auto record = [&rep](int a, double N, double R, double L, double slack, double value) {
    rep.min_slack[static_cast<size_t>(a - 1)] =
        std::min(rep.min_slack[static_cast<size_t>(a - 1)], slack);
    if (slack < 0.0) rep.violations.push_back({a, N, R, L, value});
  };

  const std::vector<double> r_axis = geometric_axis(R0, model.N_crit, grid.n_R);
  std::vector<double> l_axis(static_cast<size_t>(grid.n_L));
  for (int k = 0; k < grid.n_L; ++k) {
    l_axis[static_cast<size_t>(k)] = model.L_max * k / (grid.n_L - 1);
  }

  for (double R : r_axis) {
    for (double N : geometric_axis(R, model.N_crit, grid.n_N)) {
      const SizeRates at0 = raw_fn_fr(model, N, R, 0.0);
      record(1, N, R, 0.0, at0.f_N, at0.f_N);
      record(2, N, R, 0.0, at0.f_R, at0.f_R);

      const double hN = fd_step(N);
      const double dfr_dN =
          (raw_fn_fr(model, N + hN, R, 0.0).f_R - raw_fn_fr(model, N - hN, R, 0.0).f_R) /
          (2.0 * hN);
      record(3, N, R, 0.0, -dfr_dN, dfr_dN);

      for (double L : l_axis) {
        const double hL = fd_step(L);
        const double dfn_dL =
            (raw_fn_fr(model, N, R, L + hL).f_N - raw_fn_fr(model, N, R, L - hL).f_N) /
            (2.0 * hL);
        record(4, N, R, L, -dfn_dL, dfn_dL);
        ++rep.grid_size;
      }
    }
  }
  return rep;
}

double resistant_fraction_at_detection(double tau1, double tau2, double N0,
                                       std::optional<double> cost_ratio) {
  require(tau1 > 0.0, "resistant_fraction_at_detection: tau1 must be > 0");
  require(tau2 >= 0.0, "resistant_fraction_at_detection: tau2 must be >= 0");
  require(N0 >= 1.0, "resistant_fraction_at_detection: N0 must be >= 1");
  if (cost_ratio) {
    if (!(*cost_ratio > 0.0 && *cost_ratio < 1.0)) {
      throw std::domain_error("resistant_fraction_at_detection: cost_ratio must lie in (0,1)");
    }
    return tau1 / (1.0 - *cost_ratio);
  }
  const double tau = tau1 + tau2;
  return tau1 / tau * (-std::expm1(-tau * std::log(N0)));
}

MutationCompatibilityReport mutation_compatibility(const TumorModel& model, double N0) {
  require(model.kind == TumorModel::Kind::Mutation ||
              model.kind == TumorModel::Kind::CostMutation,
          "mutation_compatibility: model must carry mutation terms");
  require(N0 > 1.0, "mutation_compatibility: N0 must be > 1");

  MutationCompatibilityReport rep;
  rep.cost_variant = model.kind == TumorModel::Kind::CostMutation;
  if (rep.cost_variant) {
    const double ratio = model.rho_r / model.rho_s;
    if (!(ratio < 1.0)) {
      throw std::domain_error("mutation_compatibility: requires rho_r < rho_s");
    }
    rep.lhs = 1.0 / (1.0 - ratio);
    rep.resistant_fraction_x_r =
        model.tau1 > 0.0 ? resistant_fraction_at_detection(model.tau1, model.tau2, N0, ratio)
                         : 0.0;
  } else {
    rep.lhs = std::log(N0) + 1.0;
    rep.resistant_fraction_x_r =
        model.tau1 > 0.0 ? resistant_fraction_at_detection(model.tau1, model.tau2, N0) : 0.0;
  }

  const double g = growth_rate(model.law, N0);
  const double gp = growth_rate_derivative(model.law, N0);
  if (std::isfinite(gp) && gp != 0.0) {
    rep.rhs = curvature_ratio(model.law, N0);
  } else {
    const double h = fd_step(N0);
    const double fd =
        (growth_rate(model.law, N0 + h) - growth_rate(model.law, N0 - h)) / (2.0 * h);
    rep.rhs = -g / (N0 * fd);
    rep.finite_difference_rhs = true;
  }
  rep.satisfied = rep.lhs >= rep.rhs;
  return rep;
}

}  // namespace contain
