#include "resmotion/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace resmotion {

StateRmseReport state_rmse(const std::vector<Mat>& predictions, const std::vector<Mat>& truths,
                           const Vec& state_std) {
  if (predictions.empty() || predictions.size() != truths.size()) {
    throw DomainError("state_rmse: need equally many nonempty predictions and truths");
  }
  const Eigen::Index dim = truths.front().cols();
  Vec sum = Vec::Zero(dim);
  double count = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const Mat& p = predictions[i];
    const Mat& t = truths[i];
    if (p.rows() != t.rows() || p.cols() != dim || t.cols() != dim || p.rows() == 0) {
      throw DomainError("state_rmse: misaligned prediction and truth");
    }
    if (!p.allFinite()) {
      sum.setConstant(std::numeric_limits<double>::infinity());
    } else {
      sum += (p - t).array().square().colwise().sum().matrix().transpose();
    }
    count += static_cast<double>(p.rows());
  }
  StateRmseReport r;
  r.rmse = (sum / count).cwiseSqrt();
  if (state_std.size() == dim) {
    r.normalized_sum = r.rmse.cwiseQuotient(state_std).sum();
  } else {
    r.normalized_sum = r.rmse.sum();
  }
  return r;
}

namespace {

Vec pose_rate(Vehicle vehicle, const Vec& pose, const Vec& state) {
  if (vehicle == Vehicle::Ship) {
    const ship::Pose p = ship::Pose::from_vector(pose);
    return ship::kinematics_matrix(p) * state.head<4>();
  }
  // Quadcopter: inertial velocities, Euler rates from body rates.
  const double phi = pose[3];
  const double theta = pose[4];
  const double sphi = std::sin(phi);
  const double cphi = std::cos(phi);
  Vec rate(6);
  rate.head<3>() = state.head<3>();
  const double p = state[3];
  const double q = state[4];
  const double r = state[5];
  rate[3] = p + (q * sphi + r * cphi) * std::tan(theta);
  rate[4] = q * cphi - r * sphi;
  rate[5] = (q * sphi + r * cphi) / std::cos(theta);
  return rate;
}

}  // namespace

Mat reconstruct_trajectory(Vehicle vehicle, const Vec& initial_state, const Mat& states,
                           const Vec& initial_pose, double dt) {
  const VehicleLayout lay = layout(vehicle);
  if (initial_pose.size() != lay.pose_dim || states.cols() != lay.state_dim ||
      initial_state.size() != lay.state_dim) {
    throw DomainError("reconstruct_trajectory: dimension mismatch");
  }
  Mat poses(states.rows(), lay.pose_dim);
  Vec pose = initial_pose;
  Vec previous = initial_state;
  for (Eigen::Index k = 0; k < states.rows(); ++k) {
    const Vec next = states.row(k).transpose();
    const Vec k1 = pose_rate(vehicle, pose, previous);
    const Vec mid = pose + 0.5 * dt * k1;
    const Vec k2 = pose_rate(vehicle, mid, 0.5 * (previous + next));
    pose += dt * k2;
    poses.row(k) = pose.transpose();
    previous = next;
  }
  return poses;
}

int position_dims(Vehicle vehicle) { return vehicle == Vehicle::Ship ? 2 : 3; }

TrajectoryReport trajectory_rmse(const std::vector<Mat>& predicted, const std::vector<Mat>& truth,
                                 int dims, Eigen::Index block_steps) {
  if (predicted.empty() || predicted.size() != truth.size()) {
    throw DomainError("trajectory_rmse: need equally many nonempty trajectories");
  }
  if (block_steps < 1) {
    throw DomainError("trajectory_rmse: block length must be positive");
  }
  TrajectoryReport r;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const Mat& p = predicted[i];
    const Mat& t = truth[i];
    if (p.rows() != t.rows() || p.rows() == 0 || p.cols() < dims || t.cols() < dims) {
      throw DomainError("trajectory_rmse: misaligned trajectories");
    }
    const Vec dist = (p.leftCols(dims) - t.leftCols(dims)).rowwise().norm();
    const double mean = p.allFinite() ? dist.mean() : std::numeric_limits<double>::infinity();
    r.per_sample.push_back(mean);
    for (Eigen::Index start = 0, m = 0; start < dist.size(); start += block_steps, ++m) {
      const Eigen::Index n = std::min(block_steps, dist.size() - start);
      const double block = p.allFinite() ? dist.segment(start, n).mean()
                                         : std::numeric_limits<double>::infinity();
      r.per_minute.push_back({i, static_cast<int>(m), block});
    }
  }
  const double n = static_cast<double>(r.per_sample.size());
  double sum = 0.0;
  for (double v : r.per_sample) {
    sum += v;
  }
  r.mean = sum / n;
  if (r.per_sample.size() > 1 && std::isfinite(r.mean)) {
    double sq = 0.0;
    for (double v : r.per_sample) {
      sq += (v - r.mean) * (v - r.mean);
    }
    r.ci95 = 1.96 * std::sqrt(sq / (n - 1.0)) / std::sqrt(n);
  } else if (!std::isfinite(r.mean)) {
    r.ci95 = std::numeric_limits<double>::infinity();
  }
  return r;
}

double percentile(std::vector<double> data, double q) {
  if (data.empty()) {
    throw DomainError("percentile of empty data");
  }
  std::sort(data.begin(), data.end());
  const double pos = q / 100.0 * static_cast<double>(data.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, data.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return data[lo] + frac * (data[hi] - data[lo]);
}

PhysicalOutputRange physical_output_range(const PhysicalModel& model,
                                          const std::vector<Episode>& episodes,
                                          const std::vector<std::size_t>& which) {
  const Eigen::Index nz = model.state_dim();
  std::vector<std::vector<double>> outputs(static_cast<std::size_t>(nz));
  const int h = model.history();
  for (std::size_t e : which) {
    const Episode& ep = episodes.at(e);
    for (Eigen::Index t = h - 1; t + 1 < ep.length(); ++t) {
      const PhysicalStep s =
          model.step(history_rows(ep.states, t, h), history_rows(ep.controls, t, h));
      if (!s.finite) {
        continue;
      }
      for (Eigen::Index i = 0; i < nz; ++i) {
        outputs[static_cast<std::size_t>(i)].push_back(s.z[i]);
      }
    }
  }
  if (outputs.front().empty()) {
    throw DomainError("physical_output_range: no transitions");
  }
  PhysicalOutputRange r{Vec(nz), Vec(nz)};
  for (Eigen::Index i = 0; i < nz; ++i) {
    r.low[i] = percentile(outputs[static_cast<std::size_t>(i)], 2.5);
    r.high[i] = percentile(outputs[static_cast<std::size_t>(i)], 97.5);
  }
  return r;
}

RelativeThreshold relative_threshold(const PhysicalOutputRange& range, const Vec& beta) {
  if (range.low.size() != beta.size() || range.high.size() != beta.size()) {
    throw DomainError("relative_threshold: dimension mismatch");
  }
  RelativeThreshold r;
  r.percent.resize(beta.size());
  for (Eigen::Index i = 0; i < beta.size(); ++i) {
    const double width = range.high[i] - range.low[i];
    if (!(width > 0.0)) {
      throw DomainError("relative_threshold: zero-size physical output range in state " +
                        std::to_string(i));
    }
    r.percent[i] = 100.0 * 2.0 * beta[i] / width;
  }
  r.aggregate = r.percent.mean();
  return r;
}

Vec beta_for_threshold(const PhysicalOutputRange& range, double percent) {
  if (!(percent >= 0.0)) {
    throw DomainError("beta_for_threshold: threshold must be nonnegative");
  }
  return (percent / 100.0) * 0.5 * (range.high - range.low);
}

}  // namespace resmotion
