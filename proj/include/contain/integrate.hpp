// Explicit Runge-Kutta integration on small fixed-size states with cubic
// Hermite dense output and bisection-based event location.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace contain {

struct IntegratorConfig {
  enum class Method { Rk45Adaptive, Rk4Fixed };

  Method method = Method::Rk45Adaptive;
  double abs_tol = 1.0;  // one cell
  double rel_tol = 1e-9;
  double max_step = std::numeric_limits<double>::infinity();
  double fixed_step = 0.5;        // Rk4Fixed only
  double event_time_tol = 1e-6;
  double horizon = 0.0;
  bool feedback_stabilization = false;  // integrate containment plateaus as a 2-D feedback loop
};

template <int Dim>
using StateVec = Eigen::Matrix<double, Dim, 1>;

template <int Dim>
using RhsFn = std::function<StateVec<Dim>(double, const StateVec<Dim>&)>;

/// Scalar event function; a crossing of zero in the requested direction ends
/// the segment. direction +1 fires on v <= 0 -> v > 0, -1 on v >= 0 -> v < 0.
template <int Dim>
struct EventSpec {
  std::function<double(double, const StateVec<Dim>&)> value;
  int direction = +1;
  int id = 0;
};

template <int Dim>
struct SegmentEnd {
  double t = 0.0;
  StateVec<Dim> y;
  int event_id = -1;  // -1: reached t_stop without an event
};

/// Called at the segment start, at every accepted step and at the located
/// event point, with the state and its derivative.
template <int Dim>
using SampleFn = std::function<void(double, const StateVec<Dim>&, const StateVec<Dim>&)>;

namespace integrate_detail {

template <int Dim>
StateVec<Dim> hermite(double t, double t0, const StateVec<Dim>& y0, const StateVec<Dim>& f0,
                      double t1, const StateVec<Dim>& y1, const StateVec<Dim>& f1) {
  const double h = t1 - t0;
  const double s = (t - t0) / h;
  const double s2 = s * s, s3 = s2 * s;
  return (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * h * f0 +
         (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * h * f1;
}

inline bool crossed(double v0, double v1, int direction) {
  if (direction >= 0 && v0 <= 0.0 && v1 > 0.0) return true;
  if (direction <= 0 && v0 >= 0.0 && v1 < 0.0) return true;
  return false;
}

}  // namespace integrate_detail

/// Integrates y' = rhs(t, y) from (t0, y0) until t_stop or the first event
/// crossing, whichever comes first. Event times are located to within
/// cfg.event_time_tol by bisection on the dense output of the bracketing step.
/// `abs_tols` overrides cfg.abs_tol per component when given.
template <int Dim>
SegmentEnd<Dim> integrate_segment(const RhsFn<Dim>& rhs, double t0, StateVec<Dim> y0,
                                  double t_stop, const std::vector<EventSpec<Dim>>& events,
                                  const IntegratorConfig& cfg, const SampleFn<Dim>& on_sample,
                                  bool emit_start = true,
                                  const StateVec<Dim>* abs_tols = nullptr) {
  using Vec = StateVec<Dim>;
  using integrate_detail::crossed;
  using integrate_detail::hermite;

  // Dormand-Prince 5(4) tableau.
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                          e4 = 125.0 / 192 - 393.0 / 640,
                          e5 = -2187.0 / 6784 + 92097.0 / 339200, e6 = 11.0 / 84 - 187.0 / 2100,
                          e7 = -1.0 / 40;

  const bool adaptive = cfg.method == IntegratorConfig::Method::Rk45Adaptive;
  double t = t0;
  Vec y = y0;
  Vec f = rhs(t, y);
  if (emit_start && on_sample) on_sample(t, y, f);
  if (t >= t_stop) return {t, y, -1};

  auto abs_tol_of = [&cfg, abs_tols](int i) {
    return abs_tols ? (*abs_tols)[i] : cfg.abs_tol;
  };
  auto err_norm = [&cfg, &abs_tol_of](const Vec& e, const Vec& ya, const Vec& yb) {
    double acc = 0.0;
    for (int i = 0; i < Dim; ++i) {
      const double sk = abs_tol_of(i) + cfg.rel_tol * std::max(std::abs(ya[i]), std::abs(yb[i]));
      const double q = e[i] / sk;
      acc += q * q;
    }
    return std::sqrt(acc / Dim);
  };

  double h;
  if (adaptive) {
    // Crude initial step from the state/derivative scale.
    double d0 = 0.0, d1 = 0.0;
    for (int i = 0; i < Dim; ++i) {
      const double sk = abs_tol_of(i) + cfg.rel_tol * std::abs(y[i]);
      d0 = std::max(d0, std::abs(y[i]) / sk);
      d1 = std::max(d1, std::abs(f[i]) / sk);
    }
    h = (d1 > 0.0) ? 0.01 * d0 / d1 : 1e-3 * (t_stop - t0);
    h = std::min({h, t_stop - t0, cfg.max_step});
    h = std::max(h, 1e4 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t0), 1.0));
  } else {
    h = cfg.fixed_step;
    if (!(h > 0.0)) throw std::invalid_argument("integrate_segment: fixed_step must be > 0");
  }

  while (t < t_stop) {
    const double h_try = std::min({h, t_stop - t, cfg.max_step});
    if (h_try < 16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), 1.0)) {
      throw std::runtime_error("integrate_segment: step size underflow at t=" +
                               std::to_string(t));
    }

    double t1;
    Vec y1, f1;
    if (adaptive) {
      const Vec k1 = f;
      const Vec k2 = rhs(t + c2 * h_try, y + h_try * (a21 * k1));
      const Vec k3 = rhs(t + c3 * h_try, y + h_try * (a31 * k1 + a32 * k2));
      const Vec k4 = rhs(t + c4 * h_try, y + h_try * (a41 * k1 + a42 * k2 + a43 * k3));
      const Vec k5 =
          rhs(t + c5 * h_try, y + h_try * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
      const Vec k6 = rhs(t + h_try,
                         y + h_try * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
      y1 = y + h_try * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      t1 = t + h_try;
      f1 = rhs(t1, y1);  // FSAL
      const Vec err = h_try * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * f1);
      const double en = err_norm(err, y, y1);
      // The negated comparison also rejects NaN, which the right-hand sides
      // return for trial states outside their domain.
      if (!(en <= 1.0) || !y1.allFinite()) {
        h = h_try * (std::isfinite(en) ? std::max(0.2, 0.9 * std::pow(en, -0.2)) : 0.2);
        continue;
      }
      h = h_try * std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(en, 1e-10), -0.2)));
    } else {
      const Vec k1 = f;
      const Vec k2 = rhs(t + 0.5 * h_try, y + 0.5 * h_try * k1);
      const Vec k3 = rhs(t + 0.5 * h_try, y + 0.5 * h_try * k2);
      const Vec k4 = rhs(t + h_try, y + h_try * k3);
      y1 = y + (h_try / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      t1 = t + h_try;
      f1 = rhs(t1, y1);
    }

    // Event scan over the accepted step.
    double t_event = std::numeric_limits<double>::infinity();
    int event_id = -1;
    Vec y_event;
    for (const EventSpec<Dim>& ev : events) {
      const double v0 = ev.value(t, y);
      const double v1 = ev.value(t1, y1);
      if (!crossed(v0, v1, ev.direction)) continue;
      double a = t, b = t1;
      Vec yb = y1;
      // Bisect on the dense output down to the floating-point fixpoint; this
      // over-delivers on event_time_tol so that switching states match across
      // integration routes to interpolation accuracy.
      while (true) {
        const double mid = 0.5 * (a + b);
        if (!(mid > a && mid < b)) break;
        const Vec ym = hermite(mid, t, y, f, t1, y1, f1);
        const double vm = ev.value(mid, ym);
        const bool past = (ev.direction >= 0) ? (vm > 0.0) : (vm < 0.0);
        if (past) {
          b = mid;
          yb = ym;
        } else {
          a = mid;
        }
      }
      if (b < t_event) {
        t_event = b;
        event_id = ev.id;
        y_event = yb;
      }
    }
    if (event_id >= 0) {
      if (on_sample) on_sample(t_event, y_event, rhs(t_event, y_event));
      return {t_event, y_event, event_id};
    }

    t = t1;
    y = y1;
    f = f1;
    if (on_sample) on_sample(t, y, f);
  }
  return {t, y, -1};
}

/// Locates t* in [t_lo, t_hi] with value(t*) = threshold by bisection; the
/// bracket endpoints must straddle the threshold.
double locate_threshold_crossing(const std::function<double(double)>& value, double t_lo,
                                 double t_hi, double threshold, double time_tol);

}  // namespace contain
