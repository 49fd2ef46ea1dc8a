#include "resmotion/report.hpp"

#include <cmath>
#include <limits>

namespace resmotion {

Eigen::Index block_steps(Vehicle vehicle, double dt) {
  if (vehicle == Vehicle::Quad) {
    return 10;
  }
  return std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::llround(60.0 / dt)));
}

ModelEvaluation evaluate_model(const HybridModel& model, const std::vector<PredictionSample>& samples) {
  if (samples.empty()) {
    throw DomainError("evaluate_model: no samples");
  }
  const Vehicle vehicle = model.physical.vehicle;
  const double dt = model.physical.first.dt;
  ModelEvaluation ev;
  ev.predictions = predict(model, samples);
  std::vector<Mat> truth_states;
  std::vector<Mat> truth_poses;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const PredictionSample& s = samples[i];
    if (!ev.predictions[i].allFinite()) {
      ++ev.diverged;
    }
    ev.poses.push_back(reconstruct_trajectory(vehicle, s.last_state(), ev.predictions[i], s.initial_pose, dt));
    truth_states.push_back(s.horizon_states);
    truth_poses.push_back(s.horizon_poses);
  }
  ev.states = state_rmse(ev.predictions, truth_states, model.normalizer.state_std);
  ev.trajectory = trajectory_rmse(ev.poses, truth_poses, position_dims(vehicle), block_steps(vehicle, dt));
  return ev;
}

OutputConstraint normalized_constraint(const Vec& beta, const Normalizer& normalizer) {
  if (beta.size() != normalizer.state_std.size()) {
    throw DomainError("normalized_constraint: dimension mismatch");
  }
  return OutputConstraint::bounded(beta.cwiseQuotient(normalizer.state_std));
}

std::vector<SweepRow> threshold_sweep(const HybridModel& unconstrained, const PhysicalOutputRange& range,
                                      const std::vector<PredictionSample>& train,
                                      const std::vector<PredictionSample>& val,
                                      const std::vector<PredictionSample>& test,
                                      const SweepConfig& config) {
  if (!unconstrained.has_corrector()) {
    throw DomainError("threshold_sweep: model has no corrector");
  }
  if (config.fine_tune_epochs < 0) {
    throw DomainError("threshold_sweep: negative fine-tuning budget");
  }
  std::vector<SweepRow> rows;
  HybridModel base = unconstrained;
  base.corrector.constraint = OutputConstraint::unconstrained();
  {
    const ModelEvaluation ev = evaluate_model(base, test);
    rows.push_back({std::numeric_limits<double>::infinity(), "unconstrained", ev.states.rmse,
                    ev.trajectory.mean, std::numeric_limits<double>::infinity()});
  }
  for (double pct : config.thresholds) {
    const Vec beta = beta_for_threshold(range, pct);
    const double aggregate = relative_threshold(range, beta).aggregate;
    HybridModel clamped = base;
    clamped.corrector.constraint = normalized_constraint(beta, base.normalizer);
    {
      const ModelEvaluation ev = evaluate_model(clamped, test);
      rows.push_back({pct, "clamped", ev.states.rmse, ev.trajectory.mean, aggregate});
    }
    HybridModel tuned = clamped;
    if (config.fine_tune_epochs > 0) {
      TrainingConfig tc = config.training;
      tc.phase1_epochs = 0;
      tc.phase2_epochs = config.fine_tune_epochs;
      train_one_phase(tuned, train, val, tc);
    }
    const ModelEvaluation ev = evaluate_model(tuned, test);
    rows.push_back({pct, "fine-tuned", ev.states.rmse, ev.trajectory.mean, aggregate});
  }
  return rows;
}

}  // namespace resmotion
