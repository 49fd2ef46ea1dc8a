#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "resmotion/episode.hpp"

namespace resmotion {

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

/// Integer part sizes for `n` items: floor of n * ratio, remainder handed out
/// by largest fractional part (ties to the earlier part). 96 at 0.6/0.1/0.3
/// gives (58, 9, 29).
std::array<std::size_t, 3> split_sizes(std::size_t n, const std::array<double, 3>& ratios);

/// Seeded shuffle of the indices 0..n-1 partitioned into train/val/test.
/// Throws DomainError if the ratios are invalid or a nonzero part would be empty.
Split split_dataset(std::size_t n, const std::array<double, 3>& ratios, std::uint64_t seed);

/// An initialization window followed by a prediction horizon, cut from one episode.
/// Controls row k of `horizon_controls` drives the step into `horizon_states` row k.
struct PredictionSample {
  Mat init_states;       // W x n_z
  Mat init_controls;     // W x n_c
  Mat horizon_controls;  // H x n_c, controls at the last init step and onwards
  Mat horizon_states;    // H x n_z
  Mat horizon_poses;     // H x n_pose
  Vec initial_pose;      // pose at the last init step
  std::size_t episode = 0;
  Eigen::Index start = 0;

  Eigen::Index window() const { return init_states.rows(); }
  Eigen::Index horizon() const { return horizon_states.rows(); }
  /// State at the last init step, the starting point of the rollout.
  Vec last_state() const { return init_states.bottomRows(1).transpose(); }
};

/// floor((L - W - H) / stride) + 1 samples, or zero when the episode is too short.
std::vector<PredictionSample> extract_samples(const Episode& episode, Eigen::Index window,
                                              Eigen::Index horizon, Eigen::Index stride,
                                              std::size_t episode_index = 0);

std::vector<PredictionSample> extract_samples(const std::vector<Episode>& episodes,
                                              const std::vector<std::size_t>& which,
                                              Eigen::Index window, Eigen::Index horizon,
                                              Eigen::Index stride);

/// Per-dimension z-scores of states and controls.
struct Normalizer {
  Vec state_mean;
  Vec state_std;
  Vec control_mean;
  Vec control_std;

  Vec normalize_state(const Vec& z) const;
  Vec denormalize_state(const Vec& z) const;
  Vec normalize_control(const Vec& c) const;
  Vec denormalize_control(const Vec& c) const;
  Mat normalize_states(const Mat& rows) const;
  Mat denormalize_states(const Mat& rows) const;
  Mat normalize_controls(const Mat& rows) const;
  Mat denormalize_controls(const Mat& rows) const;

  PredictionSample apply(const PredictionSample& s) const;
  PredictionSample invert(const PredictionSample& s) const;
};

/// Population mean and standard deviation over every sample of the given
/// episodes. Throws DomainError on empty input or a zero-variance dimension.
Normalizer fit_normalizer(const std::vector<Episode>& episodes,
                          const std::vector<std::size_t>& which);
Normalizer fit_normalizer(const std::vector<Episode>& episodes);

/// Plain-text list of file names, one per line.
void write_manifest(const std::filesystem::path& path, const std::vector<std::string>& names);
std::vector<std::string> read_manifest(const std::filesystem::path& path);

}  // namespace resmotion
