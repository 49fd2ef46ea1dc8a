#pragma once

#include <array>

namespace resmotion {

/// Stage evaluations of one classical Runge-Kutta step, kept for replays
/// that need the intermediate derivatives.
template <class State>
struct Rk4Stages {
  std::array<State, 4> derivatives;
};

/// One classical fourth-order Runge-Kutta step of y' = f(t, y).
/// `State` needs `+`, `-` and scalar `*`; `f(t, y)` returns a `State`.
template <class State, class Deriv>
State rk4_step(const State& y, double t, double dt, Deriv&& f,
               Rk4Stages<State>* stages = nullptr) {
  const State k1 = f(t, y);
  const State k2 = f(t + 0.5 * dt, State(y + (0.5 * dt) * k1));
  const State k3 = f(t + 0.5 * dt, State(y + (0.5 * dt) * k2));
  const State k4 = f(t + dt, State(y + dt * k3));
  if (stages != nullptr) {
    stages->derivatives = {k1, k2, k3, k4};
  }
  return State(y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

/// Integrates `steps` equal RK4 steps starting at time t.
template <class State, class Deriv>
State rk4_integrate(State y, double t, double dt, int steps, Deriv&& f) {
  for (int i = 0; i < steps; ++i) {
    y = rk4_step(y, t + i * dt, dt, f);
  }
  return y;
}

}  // namespace resmotion
