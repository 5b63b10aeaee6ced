// Closed-form reference solutions used as independent oracles; kept out of
// the library on purpose.
#pragma once

#include <cmath>

namespace oracles {

// dX/dt = rho * ln(K/X) * X  =>  X(t) = K * (X0/K)^exp(-rho t)
inline double gompertz_value(double rho, double K, double X0, double t) {
  return K * std::pow(X0 / K, std::exp(-rho * t));
}

// time at which the Gompertz solution from X0 reaches X
inline double gompertz_crossing_time(double rho, double K, double X0, double X) {
  return std::log(std::log(K / X0) / std::log(K / X)) / rho;
}

}  // namespace oracles
