#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "ppwave/error.hpp"

namespace ppwave {

using State = std::vector<double>;

struct OdeOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  double max_step = 0.0;  // 0 = unbounded
  double initial_step = 1e-2;
  std::size_t max_steps = 50'000'000;
};

/// Outcome of one integration run.
struct OdeRun {
  double t_end = 0.0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  bool stopped_by_observer = false;
};

/**
 * Adaptive integration of x' = sys(x, t) from t0 to t1 (either direction) with an
 * embedded Runge-Kutta-Fehlberg 7(8) pair.
 *
 * `observer(t, x)` runs at t0 and after every accepted step; returning false stops
 * the run early. Throws StepFailure when the tolerance cannot be met.
 */
template <class System, class Observer>
OdeRun integrate_adaptive(System&& sys, State& x, double t0, double t1, const OdeOptions& opt,
                          Observer&& observer) {
  namespace odeint = boost::numeric::odeint;
  using stepper_t = odeint::runge_kutta_fehlberg78<State>;

  OdeRun run;
  double t = t0;
  run.t_end = t;
  if (!observer(t, static_cast<const State&>(x))) {
    run.stopped_by_observer = true;
    return run;
  }
  if (t1 == t0) return run;

  const double dir = (t1 > t0) ? 1.0 : -1.0;
  // odeint compares against max_dt with the sign of the step, so it must carry the direction.
  auto stepper = odeint::make_controlled(opt.abs_tol, opt.rel_tol, dir * opt.max_step, stepper_t());
  double dt = dir * std::min(std::abs(opt.initial_step), std::abs(t1 - t0));
  if (opt.max_step > 0.0) dt = dir * std::min(std::abs(dt), opt.max_step);

  std::size_t consecutive_fail = 0;
  while (dir * (t1 - t) > 0.0) {
    if (run.accepted + run.rejected > opt.max_steps) {
      throw Error(ErrorCode::StepFailure, "step budget exhausted at t = " + std::to_string(t));
    }
    const double remaining = t1 - t;
    bool last = false;
    if (dir * (t + dt - t1) >= 0.0) {
      dt = remaining;
      last = true;
    }
    const double dt_try = dt;
    const auto res = stepper.try_step(sys, x, t, dt);
    if (res == odeint::success) {
      ++run.accepted;
      consecutive_fail = 0;
      if (last) t = t1;  // snap the final node exactly onto the endpoint
      for (double xi : x) {
        if (!std::isfinite(xi)) {
          throw Error(ErrorCode::StepFailure, "non-finite state at t = " + std::to_string(t));
        }
      }
      if (!observer(t, static_cast<const State&>(x))) {
        run.stopped_by_observer = true;
        break;
      }
    } else {
      ++run.rejected;
      if (++consecutive_fail > 200 ||
          std::abs(dt_try) < 1e-15 * std::max(1.0, std::abs(t))) {
        throw Error(ErrorCode::StepFailure,
                    "tolerance unreachable near t = " + std::to_string(t));
      }
    }
    if (dt == 0.0) throw Error(ErrorCode::StepFailure, "zero step size at t = " + std::to_string(t));
  }
  run.t_end = t;
  return run;
}

template <class System>
OdeRun integrate_adaptive(System&& sys, State& x, double t0, double t1, const OdeOptions& opt) {
  return integrate_adaptive(std::forward<System>(sys), x, t0, t1, opt,
                            [](double, const State&) { return true; });
}

/// Cubic Hermite interpolation on [t0, t1] from values and derivatives.
inline double hermite3(double t, double t0, double t1, double y0, double y1, double d0, double d1) {
  const double h = t1 - t0;
  const double u = (t - t0) / h;
  const double u2 = u * u;
  const double u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * h * d0 + (-2 * u3 + 3 * u2) * y1 +
         (u3 - u2) * h * d1;
}

/// Quintic Hermite interpolation from value, first and second derivative at both ends.
inline double hermite5(double t, double t0, double t1, double y0, double y1, double d0, double d1,
                       double dd0, double dd1) {
  const double h = t1 - t0;
  const double u = (t - t0) / h;
  const double u2 = u * u, u3 = u2 * u, u4 = u3 * u, u5 = u4 * u;
  const double h00 = 1 - 10 * u3 + 15 * u4 - 6 * u5;
  const double h10 = u - 6 * u3 + 8 * u4 - 3 * u5;
  const double h20 = 0.5 * u2 - 1.5 * u3 + 1.5 * u4 - 0.5 * u5;
  const double h01 = 10 * u3 - 15 * u4 + 6 * u5;
  const double h11 = -4 * u3 + 7 * u4 - 3 * u5;
  const double h21 = 0.5 * u3 - u4 + 0.5 * u5;
  return h00 * y0 + h10 * h * d0 + h20 * h * h * dd0 + h01 * y1 + h11 * h * d1 + h21 * h * h * dd1;
}

}  // namespace ppwave
