#include "resmotion/operator.hpp"

#include <array>
#include <cmath>

#include "resmotion/ship.hpp"

namespace resmotion::ship {

std::vector<std::vector<OperatorSegment>> operator_segments(double duration, std::uint64_t seed,
                                                            const OperatorSettings& settings) {
  if (!(duration > 0.0)) {
    throw DomainError("operator_segments: duration must be positive");
  }
  std::vector<std::vector<OperatorSegment>> channels(kControlDim);
  for (int ch = 0; ch < kControlDim; ++ch) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(ch)));
    const bool revolutions = ch < 2;
    double t = 0.0;
    while (t <= duration) {
      OperatorSegment seg;
      seg.start = t;
      seg.duration = uniform(rng, settings.min_hold, settings.max_hold);
      seg.target = revolutions
                       ? uniform(rng, settings.min_revolutions, settings.max_revolutions)
                       : uniform(rng, -settings.max_rudder, settings.max_rudder);
      channels[static_cast<std::size_t>(ch)].push_back(seg);
      t += seg.duration;
    }
  }
  return channels;
}

std::vector<Vec4> operator_controls(double duration, double dt, std::uint64_t seed,
                                    const OperatorSettings& settings) {
  if (!(dt > 0.0)) {
    throw DomainError("operator_controls: dt must be positive");
  }
  const auto channels = operator_segments(duration, seed, settings);
  const auto n = static_cast<std::size_t>(std::floor(duration / dt + 1e-9)) + 1;
  const double alpha = 1.0 - std::exp(-dt / settings.lag_time_constant);

  std::vector<Vec4> out(n);
  Vec4 command;
  std::array<std::size_t, kControlDim> cursor{};
  for (int ch = 0; ch < kControlDim; ++ch) {
    command[ch] = channels[static_cast<std::size_t>(ch)].front().target;
  }
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * dt;
    out[k] = clamp_controls(command);
    for (int ch = 0; ch < kControlDim; ++ch) {
      const auto& segs = channels[static_cast<std::size_t>(ch)];
      auto& i = cursor[static_cast<std::size_t>(ch)];
      while (i + 1 < segs.size() && segs[i + 1].start <= t) {
        ++i;
      }
      command[ch] += alpha * (segs[i].target - command[ch]);
    }
  }
  return out;
}

}  // namespace resmotion::ship
