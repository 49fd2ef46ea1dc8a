#pragma once

#include <cstdint>
#include <vector>

#include "resmotion/common.hpp"

namespace resmotion {

/// One regular wave component of an irregular sea.
struct WaveComponent {
  double frequency = 0.0;  // rad/s
  double amplitude = 0.0;  // m
  double phase = 0.0;      // rad, in [0, 2*pi)
  double direction = 0.0;  // rad, direction of propagation (inertial)
};

struct SeaState {
  double significant_height = 0.0;  // Hs, m
  double peak_period = 0.0;         // Tp, s
  double mean_direction = 0.0;      // rad
  std::vector<WaveComponent> components;
  double wind_speed = 0.0;      // m/s
  double wind_direction = 0.0;  // rad, direction the air moves toward (inertial)

  /// Sum of a_i^2 / 2 over the components (surface elevation variance).
  double variance() const;

  /// Sea with no waves and no wind.
  static SeaState calm();
};

inline constexpr double kJonswapGamma = 3.3;

/// JONSWAP spectral density S(omega) in m^2 s/rad, parameterised by
/// significant wave height and peak period (DNV normalisation
/// A = 1 - 0.287 ln gamma).
double jonswap_density(double omega, double significant_height, double peak_period,
                       double gamma = kJonswapGamma);

/// Discretises the JONSWAP spectrum into `n_components` equally spaced
/// frequencies (cell centres over [0.5, 3] x peak frequency) with amplitudes
/// sqrt(2 S dw), uniform random phases, and directions spread uniformly by
/// +-`spread` around `mean_direction`.
SeaState jonswap_amplitudes(double significant_height, double peak_period, int n_components,
                            std::uint64_t seed, double mean_direction = 0.0,
                            double spread = 0.0);

/// Surface elevation at the origin, sum_i a_i cos(w_i t + phase_i).
double surface_elevation(const SeaState& sea, double t);

}  // namespace resmotion
