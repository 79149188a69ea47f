#pragma once

// Thin stepping loop over Boost.Odeint's controlled Runge-Kutta-Fehlberg 7(8).
// We drive try_step by hand so callers can observe every accepted step, stop
// early, and land exactly on the end point.

#include <algorithm>
#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <cstddef>
#include <string>

#include "ftct/error.hpp"

namespace ftct {

struct IntegrationOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double max_step = 0.05;
  double initial_step = 1e-3;
  std::size_t max_steps = 100000;
};

// Integrates dy/dt = rhs(y, t) from t0 to t1 (either direction). After every
// accepted step obs(t, y) is called; returning false stops the loop. Returns
// the time reached.
template <class State, class Rhs, class Observer>
double integrate_observed(Rhs&& rhs, State& y, double t0, double t1, const IntegrationOptions& opts, Observer&& obs) {
  namespace odeint = boost::numeric::odeint;
  using Stepper = odeint::runge_kutta_fehlberg78<State>;
  auto stepper = odeint::make_controlled(opts.abs_tol, opts.rel_tol, opts.max_step, Stepper());
  const double dir = t1 >= t0 ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);
  if (span == 0.0) return t0;
  // Integrate in tau = dir * (t - t0) so the stepper always runs forward.
  auto sys = [&](const State& x, State& dxdt, double tau) {
    rhs(x, dxdt, t0 + dir * tau);
    if (dir < 0)
      for (auto& c : dxdt) c = -c;
  };
  double tau = 0.0;
  double dt = std::min(opts.initial_step, span);
  std::size_t steps = 0;
  std::size_t rejects = 0;
  while (tau < span) {
    if (++steps > opts.max_steps) fail(ErrorKind::IntegrationFailure, "step budget exhausted");
    double remaining = span - tau;
    bool last = dt >= remaining;
    if (last) dt = remaining;
    double dt_try = dt;
    auto res = stepper.try_step(sys, y, tau, dt);
    if (res == odeint::success) {
      rejects = 0;
      if (last && dt_try == remaining) tau = span;  // avoid roundoff at the end point
      for (auto c : y)
        if (!std::isfinite(c)) fail(ErrorKind::IntegrationFailure, "non-finite state");
      if (!obs(t0 + dir * tau, static_cast<const State&>(y))) return t0 + dir * tau;
    } else {
      if (++rejects > 200 || dt < 1e-14 * std::max(1.0, span))
        fail(ErrorKind::IntegrationFailure, "step size underflow");
    }
  }
  return t1;
}

template <class State, class Rhs>
void integrate_to(Rhs&& rhs, State& y, double t0, double t1, const IntegrationOptions& opts) {
  integrate_observed(rhs, y, t0, t1, opts, [](double, const State&) { return true; });
}

}  // namespace ftct
