// Per-cell tumor growth laws g(N) and their analytic derivatives.
#pragma once

#include <string>

namespace contain {

/// Untreated per-cell growth rate g(N). Every law is strictly decreasing in N
/// on its positive domain; Gompertz and Logistic become non-positive at N >= K
/// (allowed, trajectories saturate there naturally).
struct GrowthLaw {
  enum class Kind { Gompertz, PowerLaw, Logistic };

  Kind kind = Kind::Gompertz;
  double rho = 0.0;    // baseline rate scale [1/time]
  double K = 0.0;      // carrying capacity [cells], Gompertz/Logistic
  double gamma = 0.0;  // power-law exponent, in (0,1)

  static GrowthLaw gompertz(double rho, double K);
  static GrowthLaw power_law(double rho, double gamma);
  static GrowthLaw logistic(double rho, double K);
};

/// g(N): rho*ln(K/N), rho*N^-gamma, or rho*(1 - N/K).
double growth_rate(const GrowthLaw& law, double N);

/// g'(N), analytic.
double growth_rate_derivative(const GrowthLaw& law, double N);

/// -g(N) / (N*g'(N)): ln(K/N), 1/gamma, or K/N - 1.
double curvature_ratio(const GrowthLaw& law, double N);

const char* to_string(GrowthLaw::Kind kind);

}  // namespace contain
