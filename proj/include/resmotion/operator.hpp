#pragma once

#include <cstdint>
#include <vector>

#include "resmotion/common.hpp"

namespace resmotion::ship {

/// One held target of the scripted operator on a single actuator channel.
struct OperatorSegment {
  double start = 0.0;     // s
  double duration = 0.0;  // s
  double target = 0.0;    // revolutions fraction or rudder angle (rad)
};

struct OperatorSettings {
  double min_revolutions = 0.3;
  double max_revolutions = 1.0;
  double max_rudder = deg2rad(30.0);
  double min_hold = 30.0;  // s
  double max_hold = 300.0;
  double lag_time_constant = 5.0;
};

/// Piecewise-constant targets per channel ([n_1, n_2, delta_1, delta_2]),
/// covering at least [0, duration]. Each channel draws its own hold times.
std::vector<std::vector<OperatorSegment>> operator_segments(double duration, std::uint64_t seed,
                                                            const OperatorSettings& settings = {});

/// Open-loop operator commands sampled every `dt` over [0, duration]
/// (floor(duration/dt) + 1 samples): held targets passed through a
/// first-order lag and clamped to the actuator limits.
std::vector<Vec4> operator_controls(double duration, double dt, std::uint64_t seed,
                                    const OperatorSettings& settings = {});

}  // namespace resmotion::ship
