#include "resmotion/simulate.hpp"

#include <cmath>

#include "resmotion/operator.hpp"

namespace resmotion {

namespace {

int substep_count(double sample_dt, double substep) {
  const double ratio = sample_dt / substep;
  const double rounded = std::round(ratio);
  if (!(substep > 0.0) || rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * ratio) {
    throw DomainError("sample interval must be an integer multiple of the integrator step");
  }
  return static_cast<int>(rounded);
}

void record_ship(Episode& ep, Eigen::Index k, const ship::ShipState& s, const Vec4& control) {
  ep.states.row(k) << s.velocity.u, s.velocity.w, s.velocity.p, s.velocity.r, s.pose.phi;
  ep.poses.row(k) << s.pose.x, s.pose.y, s.pose.phi, ship::wrap_angle(s.pose.psi);
  ep.controls.row(k) = control.transpose();
}

}  // namespace

SeaState random_sea_state(std::uint64_t seed, int components) {
  Rng rng(seed);
  const double hs = uniform(rng, 0.5, 4.0);
  const double tp = uniform(rng, 6.0, 12.0);
  const double direction = uniform(rng, -kPi, kPi);
  const double wind_speed = uniform(rng, 0.0, 15.0);
  const double wind_direction = direction + uniform(rng, -0.25 * kPi, 0.25 * kPi);
  SeaState sea = jonswap_amplitudes(hs, tp, components, derive_seed(seed, 1), direction, kPi / 6.0);
  sea.wind_speed = wind_speed;
  sea.wind_direction = wind_direction;
  return sea;
}

Episode simulate_ship(const ship::ShipParams& params, const SeaState& sea,
                      const std::vector<Vec4>& controls, const ship::ShipState& initial,
                      double sample_dt, double substep, std::uint64_t seed, double start_time,
                      const ShipSubstepObserver& observer) {
  const int substeps = substep_count(sample_dt, substep);
  const auto n = static_cast<Eigen::Index>(controls.size());
  Episode ep;
  ep.vehicle = Vehicle::Ship;
  ep.dt = sample_dt;
  ep.seed = seed;
  ep.states.resize(n, ship::kStateDim);
  ep.poses.resize(n, ship::kPoseDim);
  ep.controls.resize(n, ship::kControlDim);

  ship::ShipState state = initial;
  ship::check_envelope(state, params.envelope, seed, start_time);
  Rk4Stages<ship::ShipState::Vector> stages;
  for (Eigen::Index k = 0; k < n; ++k) {
    const Vec4& c = controls[static_cast<std::size_t>(k)];
    record_ship(ep, k, state, c);
    if (k + 1 == n) {
      break;
    }
    for (int i = 0; i < substeps; ++i) {
      const double t = start_time + static_cast<double>(k) * sample_dt + i * substep;
      const ship::ShipState before = state;
      state = ship::rk4_step(state, c, sea, t, substep, params, seed, observer ? &stages : nullptr);
      if (observer) {
        observer(t, before, stages);
      }
    }
  }
  return ep;
}

Episode simulate_ship_episode(double duration, double sample_rate, std::uint64_t seed,
                              const ship::ShipParams& params, const ShipEpisodeOptions& options,
                              const ShipSubstepObserver& observer) {
  if (!(duration > 0.0) || !(sample_rate > 0.0)) {
    throw DomainError("simulate_ship_episode: duration and sample rate must be positive");
  }
  const double sample_dt = 1.0 / sample_rate;
  const SeaState sea = options.calm ? SeaState::calm()
                                    : random_sea_state(derive_seed(seed, 100), options.wave_components);
  std::vector<Vec4> controls;
  if (options.idle) {
    const auto n = static_cast<std::size_t>(std::floor(duration / sample_dt + 1e-9)) + 1;
    controls.assign(n, Vec4::Zero());
  } else {
    controls = ship::operator_controls(duration, sample_dt, derive_seed(seed, 200));
  }

  Rng rng(derive_seed(seed, 300));
  ship::ShipState state;
  state.pose.psi = options.idle ? 0.0 : uniform(rng, -kPi, kPi);

  if (options.warmup > 0.0 && !options.idle) {
    const int steps = static_cast<int>(std::round(options.warmup / options.substep));
    for (int i = 0; i < steps; ++i) {
      const double t = -options.warmup + i * options.substep;
      state = ship::rk4_step(state, controls.front(), sea, t, options.substep, params, seed);
    }
    state.pose.x = 0.0;
    state.pose.y = 0.0;
  }
  return simulate_ship(params, sea, controls, state, sample_dt, options.substep, seed, 0.0,
                       observer);
}

Episode simulate_quad(const quad::QuadParams& params, const quad::QuadState& initial,
                      const QuadPolicy& policy, double duration, double sample_rate, int substeps,
                      std::uint64_t seed, const QuadSubstepObserver& observer) {
  if (!(duration > 0.0) || !(sample_rate > 0.0) || substeps < 1) {
    throw DomainError("simulate_quad: duration, sample rate and substeps must be positive");
  }
  params.validate();
  const double sample_dt = 1.0 / sample_rate;
  const double h = sample_dt / substeps;
  const auto n = static_cast<Eigen::Index>(std::floor(duration * sample_rate + 1e-9)) + 1;
  Episode ep;
  ep.vehicle = Vehicle::Quad;
  ep.dt = sample_dt;
  ep.seed = seed;
  ep.states.resize(n, quad::kStateDim);
  ep.poses.resize(n, quad::kPoseDim);
  ep.controls.resize(n, quad::kControlDim);

  quad::QuadState state = initial;
  quad::check_envelope(state, params, seed, 0.0);
  Rk4Stages<quad::QuadState::Vector> stages;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * sample_dt;
    const Vec4 c = policy(t, state);
    ep.states.row(k) << state.velocity.transpose(), state.rates.transpose();
    ep.poses.row(k) << state.position.transpose(), state.euler[0], state.euler[1],
        ship::wrap_angle(state.euler[2]);
    ep.controls.row(k) = c.transpose();
    if (k + 1 == n) {
      break;
    }
    for (int i = 0; i < substeps; ++i) {
      const double ts = t + i * h;
      const quad::QuadState before = state;
      state = quad::rk4_step(state, c, h, params, seed, ts, observer ? &stages : nullptr);
      if (observer) {
        observer(ts, before, stages);
      }
    }
  }
  return ep;
}

Episode simulate_quad_episode(double duration, double sample_rate, std::uint64_t seed,
                              const quad::QuadParams& params, const QuadEpisodeOptions& options) {
  Rng rng(derive_seed(seed, 300));
  quad::QuadState initial;
  initial.euler[2] = uniform(rng, -kPi, kPi);
  auto pilot = std::make_shared<quad::Pilot>(params, derive_seed(seed, 200), 1.0 / sample_rate);
  return simulate_quad(
      params, initial, [pilot](double t, const quad::QuadState& s) { return pilot->command(t, s); },
      duration, sample_rate, options.substeps, seed);
}

}  // namespace resmotion
