#include "contain/integrate.hpp"

#include <cmath>
#include <stdexcept>

namespace contain {

double locate_threshold_crossing(const std::function<double(double)>& value, double t_lo,
                                 double t_hi, double threshold, double time_tol) {
  if (!(t_hi > t_lo)) throw std::invalid_argument("locate_threshold_crossing: empty bracket");
  double v_lo = value(t_lo) - threshold;
  double v_hi = value(t_hi) - threshold;
  if (v_lo == 0.0) return t_lo;
  if (v_hi == 0.0) return t_hi;
  if ((v_lo < 0.0) == (v_hi < 0.0)) {
    throw std::invalid_argument("locate_threshold_crossing: no sign change in bracket");
  }
  while (t_hi - t_lo > time_tol) {
    const double mid = 0.5 * (t_lo + t_hi);
    const double vm = value(mid) - threshold;
    if (vm == 0.0) return mid;
    if ((vm < 0.0) == (v_lo < 0.0)) {
      t_lo = mid;
      v_lo = vm;
    } else {
      t_hi = mid;
      v_hi = vm;
    }
  }
  return 0.5 * (t_lo + t_hi);
}

}  // namespace contain
