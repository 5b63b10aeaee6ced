#include "contain/growth.hpp"

#include <cmath>
#include <stdexcept>

namespace contain {

namespace {
void require_positive(double x, const char* what) {
  if (!(std::isfinite(x) && x > 0.0)) {
    throw std::invalid_argument(std::string("GrowthLaw: ") + what + " must be finite and > 0");
  }
}
}  // namespace

GrowthLaw GrowthLaw::gompertz(double rho, double K) {
  require_positive(rho, "rho");
  require_positive(K, "K");
  return {Kind::Gompertz, rho, K, 0.0};
}

GrowthLaw GrowthLaw::power_law(double rho, double gamma) {
  require_positive(rho, "rho");
  if (!(std::isfinite(gamma) && gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("GrowthLaw: gamma must lie in (0,1)");
  }
  return {Kind::PowerLaw, rho, 0.0, gamma};
}

GrowthLaw GrowthLaw::logistic(double rho, double K) {
  require_positive(rho, "rho");
  require_positive(K, "K");
  return {Kind::Logistic, rho, K, 0.0};
}

double growth_rate(const GrowthLaw& law, double N) {
  if (!(std::isfinite(N) && N > 0.0)) {
    throw std::domain_error("growth_rate: N must be finite and > 0");
  }
  switch (law.kind) {
    case GrowthLaw::Kind::Gompertz: return law.rho * std::log(law.K / N);
    case GrowthLaw::Kind::PowerLaw: return law.rho * std::pow(N, -law.gamma);
    case GrowthLaw::Kind::Logistic: return law.rho * (1.0 - N / law.K);
  }
  throw std::logic_error("growth_rate: unknown law");
}

double growth_rate_derivative(const GrowthLaw& law, double N) {
  if (!(std::isfinite(N) && N > 0.0)) {
    throw std::domain_error("growth_rate_derivative: N must be finite and > 0");
  }
  switch (law.kind) {
    case GrowthLaw::Kind::Gompertz: return -law.rho / N;
    case GrowthLaw::Kind::PowerLaw: return -law.rho * law.gamma * std::pow(N, -law.gamma - 1.0);
    case GrowthLaw::Kind::Logistic: return -law.rho / law.K;
  }
  throw std::logic_error("growth_rate_derivative: unknown law");
}

double curvature_ratio(const GrowthLaw& law, double N) {
  if (!(std::isfinite(N) && N > 0.0)) {
    throw std::domain_error("curvature_ratio: N must be finite and > 0");
  }
  switch (law.kind) {
    case GrowthLaw::Kind::Gompertz: return std::log(law.K / N);
    case GrowthLaw::Kind::PowerLaw: return 1.0 / law.gamma;
    case GrowthLaw::Kind::Logistic: return law.K / N - 1.0;
  }
  throw std::logic_error("curvature_ratio: unknown law");
}

const char* to_string(GrowthLaw::Kind kind) {
  switch (kind) {
    case GrowthLaw::Kind::Gompertz: return "gompertz";
    case GrowthLaw::Kind::PowerLaw: return "power_law";
    case GrowthLaw::Kind::Logistic: return "logistic";
  }
  return "?";
}

}  // namespace contain
