#pragma once

#include <vector>

#include "resmotion/episode.hpp"
#include "resmotion/physical.hpp"

namespace resmotion {

/// Per-state RMSE over every step of every sample, in the state's own units.
struct StateRmseReport {
  Vec rmse;
  /// Sum over states of rmse_i / std_i; used for model selection only.
  double normalized_sum = 0.0;
};

/// Throws DomainError on empty input or mismatched shapes. Samples whose
/// prediction contains non-finite values yield an infinite RMSE.
StateRmseReport state_rmse(const std::vector<Mat>& predictions, const std::vector<Mat>& truths,
                           const Vec& state_std = Vec());

/// Dead reckoning of a pose sequence from predicted velocities: RK2 midpoint
/// with velocities linearly interpolated between samples. `initial_state` and
/// `initial_pose` belong to the step before the first row of `states`; row k
/// of the result is the pose at the time of `states` row k.
Mat reconstruct_trajectory(Vehicle vehicle, const Vec& initial_state, const Mat& states,
                           const Vec& initial_pose, double dt);

struct MinuteError {
  std::size_t sample = 0;
  int minute = 0;
  double rmse = 0.0;
};

struct TrajectoryReport {
  double mean = 0.0;
  double ci95 = 0.0;  // normal-approximation half-width, 1.96 std / sqrt(n)
  std::vector<double> per_sample;
  std::vector<MinuteError> per_minute;
};

/// Number of position coordinates compared in trajectory errors: (x, y) for
/// the ship, (x, y, z) for the quadcopter.
int position_dims(Vehicle vehicle);

/// Per sample: mean over steps of the Euclidean position distance; reported
/// as the mean over samples with a 95% interval, plus block means of
/// `block_steps` steps (one minute for the ship).
TrajectoryReport trajectory_rmse(const std::vector<Mat>& predicted, const std::vector<Mat>& truth,
                                 int dims, Eigen::Index block_steps);

/// Linear-interpolation percentile (numpy's default) of unsorted data.
double percentile(std::vector<double> data, double q);

/// 2.5th and 97.5th percentiles of the physical model's one-step
/// (teacher-forced) outputs, raw units.
struct PhysicalOutputRange {
  Vec low;
  Vec high;
};

PhysicalOutputRange physical_output_range(const PhysicalModel& model,
                                          const std::vector<Episode>& episodes,
                                          const std::vector<std::size_t>& which);

struct RelativeThreshold {
  Vec percent;  // per state
  double aggregate = 0.0;
};

/// 100 * 2 beta_i / (high_i - low_i) with beta in raw units; infinite beta
/// gives an infinite threshold. Throws DomainError on a zero-size range.
RelativeThreshold relative_threshold(const PhysicalOutputRange& range, const Vec& beta);

/// Raw-unit bound realizing `percent` on every state.
Vec beta_for_threshold(const PhysicalOutputRange& range, double percent);

}  // namespace resmotion
