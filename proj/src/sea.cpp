#include "resmotion/sea.hpp"

#include <cmath>

namespace resmotion {

double SeaState::variance() const {
  double total = 0.0;
  for (const auto& c : components) {
    total += 0.5 * c.amplitude * c.amplitude;
  }
  return total;
}

SeaState SeaState::calm() { return SeaState{}; }

double jonswap_density(double omega, double significant_height, double peak_period,
                       double gamma) {
  if (omega <= 0.0) {
    return 0.0;
  }
  const double wp = 2.0 * kPi / peak_period;
  const double sigma = omega <= wp ? 0.07 : 0.09;
  const double normalisation = 1.0 - 0.287 * std::log(gamma);
  const double ratio = wp / omega;
  const double pm = 5.0 / 16.0 * significant_height * significant_height * std::pow(wp, 4) *
                    std::pow(omega, -5) * std::exp(-1.25 * std::pow(ratio, 4));
  const double peak = std::exp(-(omega - wp) * (omega - wp) / (2.0 * sigma * sigma * wp * wp));
  return normalisation * pm * std::pow(gamma, peak);
}

SeaState jonswap_amplitudes(double significant_height, double peak_period, int n_components,
                            std::uint64_t seed, double mean_direction, double spread) {
  if (!(significant_height > 0.0) || !(peak_period > 0.0)) {
    throw DomainError("jonswap_amplitudes: Hs and Tp must be positive");
  }
  if (n_components < 16) {
    throw DomainError("jonswap_amplitudes: at least 16 components required");
  }
  SeaState sea;
  sea.significant_height = significant_height;
  sea.peak_period = peak_period;
  sea.mean_direction = mean_direction;

  Rng rng(seed);
  const double wp = 2.0 * kPi / peak_period;
  const double lo = 0.5 * wp;
  const double hi = 3.0 * wp;
  const double dw = (hi - lo) / n_components;
  sea.components.reserve(static_cast<std::size_t>(n_components));
  for (int i = 0; i < n_components; ++i) {
    WaveComponent c;
    c.frequency = lo + (i + 0.5) * dw;
    c.amplitude = std::sqrt(2.0 * jonswap_density(c.frequency, significant_height, peak_period) * dw);
    c.phase = uniform(rng, 0.0, 2.0 * kPi);
    c.direction = mean_direction + uniform(rng, -spread, spread);
    sea.components.push_back(c);
  }
  return sea;
}

double surface_elevation(const SeaState& sea, double t) {
  double eta = 0.0;
  for (const auto& c : sea.components) {
    eta += c.amplitude * std::cos(c.frequency * t + c.phase);
  }
  return eta;
}

}  // namespace resmotion
