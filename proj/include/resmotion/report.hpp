#pragma once

#include <string>
#include <vector>

#include "resmotion/eval.hpp"
#include "resmotion/hybrid.hpp"

namespace resmotion {

/// Steps per block of the per-block trajectory error: one minute for the
/// ship, ten samples (0.1 s) for the quadcopter.
Eigen::Index block_steps(Vehicle vehicle, double dt);

struct ModelEvaluation {
  StateRmseReport states;
  TrajectoryReport trajectory;
  std::vector<Mat> predictions;  // raw states per sample
  std::vector<Mat> poses;        // dead-reckoned poses per sample
  int diverged = 0;
};

/// Free-running predictions over every sample, their state RMSE and the
/// trajectory error of the reconstructed poses.
ModelEvaluation evaluate_model(const HybridModel& model, const std::vector<PredictionSample>& samples);

struct SweepRow {
  double threshold = 0.0;  // percent; infinite for the unconstrained baseline
  std::string variant;     // "unconstrained", "clamped" or "fine-tuned"
  Vec state_rmse;
  double trajectory_rmse = 0.0;
  double relative_threshold = 0.0;  // aggregate, from the raw bound
};

struct SweepConfig {
  std::vector<double> thresholds{0, 5, 10, 15, 25, 50, 100};
  int fine_tune_epochs = 5;
  TrainingConfig training;  // optimizer and batching for fine-tuning
};

/// Error versus relative threshold. The bound of every state is
/// threshold/100 * (high - low) / 2 in raw units. Each threshold is
/// evaluated once with the bound imposed on the trained weights (clamped)
/// and once after fine-tuning under the bound on the free-running objective.
/// The first row is the unconstrained model.
std::vector<SweepRow> threshold_sweep(const HybridModel& unconstrained, const PhysicalOutputRange& range,
                                      const std::vector<PredictionSample>& train,
                                      const std::vector<PredictionSample>& val,
                                      const std::vector<PredictionSample>& test,
                                      const SweepConfig& config);

/// Normalized-unit constraint realizing raw bounds `beta`.
OutputConstraint normalized_constraint(const Vec& beta, const Normalizer& normalizer);

}  // namespace resmotion
