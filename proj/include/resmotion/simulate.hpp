#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "resmotion/episode.hpp"
#include "resmotion/quad.hpp"
#include "resmotion/sea.hpp"
#include "resmotion/ship.hpp"

namespace resmotion {

/// Called once per internal integrator step with the step start time, the
/// state before the step and the RK4 stage derivatives.
using ShipSubstepObserver = std::function<void(double t, const ship::ShipState& before,
                                               const Rk4Stages<ship::ShipState::Vector>& stages)>;
using QuadSubstepObserver = std::function<void(double t, const quad::QuadState& before,
                                               const Rk4Stages<quad::QuadState::Vector>& stages)>;

struct ShipEpisodeOptions {
  double substep = 0.1;  // internal RK4 step, s
  double warmup = 120.0;  // unrecorded spin-up with the first command held, s
  int wave_components = 64;
  bool calm = false;   // no waves, no wind
  bool idle = false;   // zero commands, start at rest
};

/// Random sea state: Hs in [0.5, 4] m, Tp in [6, 12] s, random wave and
/// wind directions, wind speed in [0, 15] m/s.
SeaState random_sea_state(std::uint64_t seed, int components = 64);

/// Integrates the truth model with zero-order-held `controls` (one per
/// recorded sample) and records states/poses/controls every `sample_dt`.
/// `sample_dt` must be an integer multiple of `substep`.
Episode simulate_ship(const ship::ShipParams& params, const SeaState& sea,
                      const std::vector<Vec4>& controls, const ship::ShipState& initial,
                      double sample_dt, double substep, std::uint64_t seed,
                      double start_time = 0.0, const ShipSubstepObserver& observer = {});

/// One ship episode of `duration` seconds: random sea, scripted operator,
/// warm-up, then floor(duration * sample_rate) + 1 recorded samples.
Episode simulate_ship_episode(double duration, double sample_rate, std::uint64_t seed,
                              const ship::ShipParams& params,
                              const ShipEpisodeOptions& options = {},
                              const ShipSubstepObserver& observer = {});

using QuadPolicy = std::function<Vec4(double t, const quad::QuadState& state)>;

struct QuadEpisodeOptions {
  int substeps = 5;  // internal RK4 steps per recorded sample
};

/// Integrates the quadcopter with rotor commands from `policy`, evaluated
/// once per recorded sample and held in between.
Episode simulate_quad(const quad::QuadParams& params, const quad::QuadState& initial,
                      const QuadPolicy& policy, double duration, double sample_rate, int substeps,
                      std::uint64_t seed, const QuadSubstepObserver& observer = {});

/// One quadcopter episode flown by the scripted pilot from a level hover.
Episode simulate_quad_episode(double duration, double sample_rate, std::uint64_t seed,
                              const quad::QuadParams& params,
                              const QuadEpisodeOptions& options = {});

}  // namespace resmotion
