#include "resmotion/hybrid.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

namespace resmotion {

HybridModel make_hybrid(const PhysicalModel& physical, const Normalizer& normalizer, int hidden,
                        int layers, std::uint64_t seed) {
  HybridModel m;
  m.physical = physical;
  m.normalizer = normalizer;
  const VehicleLayout lay = layout(physical.vehicle);
  Rng rng(seed);
  m.corrector = Corrector::random(lay.state_dim, lay.control_dim, hidden, layers, rng);
  return m;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec normalized(const Vec& x, const Vec& mean, const Vec& std) {
  return (x - mean).cwiseQuotient(std);
}

// Forward (and optionally backward) pass over a batch of samples; the
// columns of every matrix are the samples.
BatchResult run_batch(const HybridModel& model, const std::vector<const PredictionSample*>& batch,
                      RolloutMode mode, Eigen::Index steps, Corrector* grads,
                      std::vector<RolloutResult>* outputs) {
  if (batch.empty()) {
    throw DomainError("run_batch: empty batch");
  }
  const auto B = static_cast<Eigen::Index>(batch.size());
  const Eigen::Index W = batch.front()->window();
  const Eigen::Index H = batch.front()->horizon();
  for (const auto* s : batch) {
    if (s->window() != W || s->horizon() != H) {
      throw DomainError("run_batch: samples of one batch must share window and horizon");
    }
  }
  if (W < 1 || H < 1) {
    throw DomainError("run_batch: empty window or horizon");
  }
  const Eigen::Index T = (steps < 0 || steps > H) ? H : steps;
  const Eigen::Index nz = batch.front()->init_states.cols();
  const Eigen::Index nc = batch.front()->init_controls.cols();
  const Normalizer& norm = model.normalizer;
  const Vec& sd = norm.state_std;
  const Vec& mu = norm.state_mean;
  const bool corr = model.has_corrector();
  const bool need_grad = grads != nullptr && corr;
  const bool free = mode == RolloutMode::FreeRunning;
  const int hist = model.physical.history();
  const Corrector& net = model.corrector;

  std::vector<Mat> zt(static_cast<std::size_t>(B));
  std::vector<Mat> ct(static_cast<std::size_t>(B));
  for (Eigen::Index b = 0; b < B; ++b) {
    const PredictionSample& s = *batch[static_cast<std::size_t>(b)];
    Mat& z = zt[static_cast<std::size_t>(b)];
    z.resize(W + T, nz);
    z.topRows(W) = s.init_states;
    z.bottomRows(T) = s.horizon_states.topRows(T);
    Mat& c = ct[static_cast<std::size_t>(b)];
    c.resize(W - 1 + T, nc);
    c.topRows(W - 1) = s.init_controls.topRows(W - 1);
    c.bottomRows(T) = s.horizon_controls.topRows(T);
  }

  LstmState state;
  std::vector<LstmStepCache> encode_caches;
  if (corr) {
    std::vector<Mat> window(static_cast<std::size_t>(W), Mat(nz + nc, B));
    for (Eigen::Index j = 0; j < W; ++j) {
      for (Eigen::Index b = 0; b < B; ++b) {
        const PredictionSample& s = *batch[static_cast<std::size_t>(b)];
        window[static_cast<std::size_t>(j)].col(b) << normalized(s.init_states.row(j).transpose(), mu, sd),
            normalized(s.init_controls.row(j).transpose(), norm.control_mean, norm.control_std);
      }
    }
    state = net.encode(window, need_grad ? &encode_caches : nullptr);
  }

  const auto Tn = static_cast<std::size_t>(T);
  std::vector<LstmStepCache> caches(need_grad ? Tn : 0);
  std::vector<Mat> raws(need_grad ? Tn : 0);
  std::vector<Mat> tops(need_grad ? Tn : 0);
  std::vector<Mat> errors(Tn);
  // jac[k][b][j] = d z_phy_k / d z_{t-j}
  std::vector<std::vector<std::vector<Mat>>> jac(need_grad && free ? Tn : 0);
  std::vector<Eigen::Index> dead_at(static_cast<std::size_t>(B), -1);
  if (outputs != nullptr) {
    outputs->assign(static_cast<std::size_t>(B), {});
    for (auto& o : *outputs) {
      o.predictions.resize(T, nz);
      o.physical.resize(T, nz);
      o.residual.resize(T, nz);
    }
  }

  Mat z_phy(nz, B);
  Mat z_hat(nz, B);
  Mat x(nc + nz, B);
  for (Eigen::Index k = 0; k < T; ++k) {
    const Eigen::Index t = W - 1 + k;
    const auto ku = static_cast<std::size_t>(k);
    if (need_grad && free) {
      jac[ku].resize(static_cast<std::size_t>(B));
    }
    for (Eigen::Index b = 0; b < B; ++b) {
      const auto bu = static_cast<std::size_t>(b);
      const Vec truth = batch[bu]->horizon_states.row(k).transpose();
      if (dead_at[bu] >= 0) {
        z_phy.col(b) = truth;
        continue;
      }
      const PhysicalStep ps =
          model.physical.step(history_rows(zt[bu], t, hist), history_rows(ct[bu], t, hist),
                              need_grad && free ? &jac[ku][bu] : nullptr);
      if (!ps.finite) {
        dead_at[bu] = k;
        z_phy.col(b) = truth;
      } else {
        z_phy.col(b) = ps.z;
      }
    }
    if (corr) {
      for (Eigen::Index b = 0; b < B; ++b) {
        const auto bu = static_cast<std::size_t>(b);
        x.col(b) << normalized(ct[bu].row(t).transpose(), norm.control_mean, norm.control_std),
            normalized(z_phy.col(b), mu, sd);
      }
      state = net.predictor.step(x, state, need_grad ? &caches[ku] : nullptr);
      const Mat raw = net.projection * state.h.back();
      const Mat o = net.constraint.apply(raw);
      z_hat = z_phy + sd.asDiagonal() * o;
      if (need_grad) {
        raws[ku] = raw;
        tops[ku] = state.h.back();
      }
    } else {
      z_hat = z_phy;
    }
    errors[ku].resize(nz, B);
    for (Eigen::Index b = 0; b < B; ++b) {
      const auto bu = static_cast<std::size_t>(b);
      const Vec truth = batch[bu]->horizon_states.row(k).transpose();
      if (dead_at[bu] < 0) {
        const Vec zn = normalized(z_hat.col(b), mu, sd);
        if (!zn.allFinite() || zn.cwiseAbs().maxCoeff() > model.divergence_bound) {
          dead_at[bu] = k;
        }
      }
      if (dead_at[bu] >= 0) {
        z_hat.col(b) = truth;
        errors[ku].col(b).setZero();
      } else {
        errors[ku].col(b) = (truth - z_hat.col(b)).cwiseQuotient(sd);
      }
      if (free) {
        zt[bu].row(t + 1) = z_hat.col(b).transpose();
      }
      if (outputs != nullptr) {
        RolloutResult& out = (*outputs)[bu];
        if (dead_at[bu] >= 0) {
          out.predictions.row(k).setConstant(std::numeric_limits<double>::quiet_NaN());
          out.physical.row(k).setConstant(std::numeric_limits<double>::quiet_NaN());
          out.residual.row(k).setConstant(std::numeric_limits<double>::quiet_NaN());
        } else {
          out.predictions.row(k) = z_hat.col(b).transpose();
          out.physical.row(k) = z_phy.col(b).transpose();
          out.residual.row(k) = (z_hat.col(b) - z_phy.col(b)).transpose();
        }
      }
    }
  }

  BatchResult result;
  result.samples = static_cast<int>(B);
  double loss_sum = 0.0;
  int alive = 0;
  for (Eigen::Index b = 0; b < B; ++b) {
    const auto bu = static_cast<std::size_t>(b);
    double sample_loss = 0.0;
    for (std::size_t k = 0; k < Tn; ++k) {
      sample_loss += errors[k].col(b).squaredNorm() / static_cast<double>(nz);
    }
    sample_loss /= static_cast<double>(T);
    if (dead_at[bu] >= 0) {
      ++result.diverged;
      sample_loss = kInf;
    } else {
      loss_sum += sample_loss;
      ++alive;
    }
    if (outputs != nullptr) {
      RolloutResult& out = (*outputs)[bu];
      out.loss = sample_loss;
      out.diverged = dead_at[bu] >= 0;
      out.divergence_step = dead_at[bu];
    }
  }
  result.loss = alive > 0 ? loss_sum / alive : kInf;
  if (!need_grad || alive == 0) {
    return result;
  }

  // Reverse pass.
  const double scale = 1.0 / (static_cast<double>(alive) * static_cast<double>(T) * static_cast<double>(nz));
  const Vec inv_sd = sd.cwiseInverse();
  LstmState d_state = LstmState::zeros(net.predictor.layers(), net.predictor.hidden(), B);
  std::vector<Mat> d_timeline(free ? static_cast<std::size_t>(B) : 0, Mat::Zero(W + T, nz));
  for (Eigen::Index k = T - 1; k >= 0; --k) {
    const auto ku = static_cast<std::size_t>(k);
    Mat d_hat = (-2.0 * scale) * (inv_sd.asDiagonal() * errors[ku]);
    for (Eigen::Index b = 0; b < B; ++b) {
      const auto bu = static_cast<std::size_t>(b);
      if (dead_at[bu] >= 0) {
        d_hat.col(b).setZero();
      } else if (free) {
        d_hat.col(b) += d_timeline[bu].row(W + k).transpose();
      }
    }
    const Mat d_raw = (sd.asDiagonal() * d_hat).cwiseProduct(net.constraint.derivative(raws[ku]));
    grads->projection.noalias() += d_raw * tops[ku].transpose();
    d_state.h.back().noalias() += net.projection.transpose() * d_raw;
    const Mat dx = net.predictor.step_backward(caches[ku], d_state, grads->predictor);
    if (free) {
      const Mat d_phy = d_hat + inv_sd.asDiagonal() * dx.bottomRows(nz);
      for (Eigen::Index b = 0; b < B; ++b) {
        const auto bu = static_cast<std::size_t>(b);
        if (dead_at[bu] >= 0) {
          continue;
        }
        for (int j = 0; j < hist; ++j) {
          const Eigen::Index idx = W - 1 + k - j;
          if (idx >= W) {
            d_timeline[bu].row(idx) +=
                (jac[ku][bu][static_cast<std::size_t>(j)].transpose() * d_phy.col(b)).transpose();
          }
        }
      }
    }
  }
  net.encode_backward(encode_caches, d_state, *grads);
  return result;
}

}  // namespace

HybridStepResult hybrid_step(const HybridModel& model, const Mat& states, const Mat& controls,
                             const LstmState& state) {
  HybridStepResult r;
  const PhysicalStep ps = model.physical.step(states, controls);
  r.z_phy = ps.z;
  r.z_lstm = Vec::Zero(ps.z.size());
  r.state = state;
  if (model.has_corrector()) {
    const Normalizer& n = model.normalizer;
    Mat x(controls.cols() + states.cols(), 1);
    x.col(0) << normalized(controls.row(0).transpose(), n.control_mean, n.control_std),
        normalized(ps.z, n.state_mean, n.state_std);
    r.state = model.corrector.predictor.step(x, state);
    const Mat o = model.corrector.constraint.apply(model.corrector.projection * r.state.h.back());
    r.z_lstm = n.state_std.cwiseProduct(o.col(0));
  }
  r.z_hat = r.z_phy + r.z_lstm;
  const Vec zn = normalized(r.z_hat, model.normalizer.state_mean, model.normalizer.state_std);
  r.diverged = !zn.allFinite() || zn.cwiseAbs().maxCoeff() > model.divergence_bound;
  return r;
}

LstmState initial_state(const HybridModel& model, const PredictionSample& sample) {
  const Normalizer& n = model.normalizer;
  std::vector<Mat> window;
  for (Eigen::Index j = 0; j < sample.window(); ++j) {
    Mat x(sample.init_states.cols() + sample.init_controls.cols(), 1);
    x.col(0) << normalized(sample.init_states.row(j).transpose(), n.state_mean, n.state_std),
        normalized(sample.init_controls.row(j).transpose(), n.control_mean, n.control_std);
    window.push_back(x);
  }
  return model.corrector.encode(window);
}

RolloutResult rollout(const HybridModel& model, const PredictionSample& sample, RolloutMode mode,
                      Eigen::Index steps) {
  std::vector<RolloutResult> out;
  run_batch(model, {&sample}, mode, steps, nullptr, &out);
  return out.front();
}

BatchResult batch_loss(const HybridModel& model, const std::vector<const PredictionSample*>& batch,
                       RolloutMode mode, Eigen::Index steps, Corrector* grads) {
  return run_batch(model, batch, mode, steps, grads, nullptr);
}

namespace {

constexpr std::size_t kEvalBatch = 16;

}  // namespace

BatchResult evaluate_loss(const HybridModel& model, const std::vector<PredictionSample>& samples,
                          RolloutMode mode, Eigen::Index steps) {
  BatchResult total;
  if (samples.empty()) {
    total.loss = kInf;
    return total;
  }
  double sum = 0.0;
  for (std::size_t start = 0; start < samples.size(); start += kEvalBatch) {
    std::vector<const PredictionSample*> batch;
    for (std::size_t i = start; i < std::min(samples.size(), start + kEvalBatch); ++i) {
      batch.push_back(&samples[i]);
    }
    const BatchResult r = run_batch(model, batch, mode, steps, nullptr, nullptr);
    total.samples += r.samples;
    total.diverged += r.diverged;
    if (r.samples > r.diverged) {
      sum += r.loss * (r.samples - r.diverged);
    }
  }
  total.loss = total.diverged > 0 ? kInf : sum / total.samples;
  return total;
}

std::vector<Mat> predict(const HybridModel& model, const std::vector<PredictionSample>& samples) {
  std::vector<Mat> out;
  out.reserve(samples.size());
  for (std::size_t start = 0; start < samples.size(); start += kEvalBatch) {
    std::vector<const PredictionSample*> batch;
    for (std::size_t i = start; i < std::min(samples.size(), start + kEvalBatch); ++i) {
      batch.push_back(&samples[i]);
    }
    std::vector<RolloutResult> results;
    run_batch(model, batch, RolloutMode::FreeRunning, -1, nullptr, &results);
    for (auto& r : results) {
      out.push_back(std::move(r.predictions));
    }
  }
  return out;
}

// ---------------------------------------------------------------- training

namespace {

class Trainer {
 public:
  Trainer(HybridModel& model, const std::vector<PredictionSample>& train,
          const std::vector<PredictionSample>& val, const TrainingConfig& config)
      : model_(model), train_(train), val_(val), config_(config), rng_(config.seed) {
    if (train.empty()) {
      throw DomainError("training requires at least one training sample");
    }
    if (val.empty()) {
      throw DomainError("training requires at least one validation sample");
    }
    if (!model.has_corrector()) {
      throw DomainError("training requires a corrector network");
    }
    if (config.batch_size < 1 || !(config.learning_rate > 0.0) || config.phase1_epochs < 0 ||
        config.phase2_epochs < 0 || config.initial_truncation < 1) {
      throw DomainError("invalid training configuration");
    }
    horizon_ = train.front().horizon();
    adam_.learning_rate = config.learning_rate;
  }

  TrainingHistory& history() { return history_; }

  // One pass over the shuffled training set.
  EpochRecord epoch(RolloutMode mode, Eigen::Index truncation) {
    std::vector<std::size_t> order(train_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i) {
      const auto j = std::min(static_cast<std::size_t>(uniform(rng_, 0.0, static_cast<double>(i))), i - 1);
      std::swap(order[i - 1], order[j]);
    }
    EpochRecord rec;
    rec.truncation = truncation;
    double loss_sum = 0.0;
    int counted = 0;
    const auto bs = static_cast<std::size_t>(config_.batch_size);
    for (std::size_t start = 0; start < order.size(); start += bs) {
      std::vector<const PredictionSample*> batch;
      for (std::size_t i = start; i < std::min(order.size(), start + bs); ++i) {
        batch.push_back(&train_[order[i]]);
      }
      Corrector grads = model_.corrector.zeros_like();
      const BatchResult r = batch_loss(model_, batch, mode, truncation, &grads);
      ++rec.batches;
      if (r.diverged > 0) {
        ++rec.diverged_batches;
      }
      const int alive = r.samples - r.diverged;
      if (alive > 0) {
        loss_sum += r.loss * alive;
        counted += alive;
        auto g = grads.tensors();
        clip_global_norm(g, config_.clip_norm);
        adam_update(model_.corrector.tensors(), std::as_const(grads).tensors(), adam_state_, adam_);
      }
    }
    rec.train_loss = counted > 0 ? loss_sum / counted : kInf;
    return rec;
  }

  void phase_one() {
    double best = kInf;
    int stale = 0;
    for (int e = 0; e < config_.phase1_epochs; ++e) {
      EpochRecord rec = epoch(RolloutMode::TeacherForced, horizon_);
      rec.phase = "teacher";
      rec.epoch = static_cast<int>(history_.epochs.size()) + 1;
      rec.val_loss = evaluate_loss(model_, val_, RolloutMode::TeacherForced).loss;
      history_.epochs.push_back(rec);
      if (rec.val_loss < best * (1.0 - config_.min_improvement)) {
        best = rec.val_loss;
        stale = 0;
      } else if (++stale >= config_.plateau_epochs) {
        break;
      }
    }
  }

  void free_running(Eigen::Index truncation, int epochs) {
    double best = evaluate_loss(model_, val_, RolloutMode::FreeRunning).loss;
    Corrector best_params = model_.corrector;
    double reference = best;
    int stale = 0;
    truncation = std::min(truncation, horizon_);
    for (int e = 0; e < epochs; ++e) {
      EpochRecord rec = epoch(RolloutMode::FreeRunning, truncation);
      rec.phase = "free";
      rec.epoch = static_cast<int>(history_.epochs.size()) + 1;
      if (rec.diverged_batches > config_.abort_fraction * rec.batches) {
        rec.val_loss = kInf;
        history_.epochs.push_back(rec);
        history_.aborted = true;
        history_.diagnostic = "training diverged: " + std::to_string(rec.diverged_batches) + " of " +
                              std::to_string(rec.batches) + " free-running batches in epoch " +
                              std::to_string(rec.epoch) + " left the state envelope";
        model_.corrector = best_params;
        history_.best_val_loss = best;
        throw TrainingDivergence(history_.diagnostic, history_);
      }
      rec.val_loss = evaluate_loss(model_, val_, RolloutMode::FreeRunning).loss;
      history_.epochs.push_back(rec);
      if (rec.val_loss < best) {
        best = rec.val_loss;
        best_params = model_.corrector;
      }
      if (rec.val_loss < reference * (1.0 - config_.min_improvement) ||
          (!std::isfinite(reference) && std::isfinite(rec.val_loss))) {
        reference = rec.val_loss;
        stale = 0;
      } else {
        ++stale;
      }
      if (truncation < horizon_) {
        if (stale >= config_.plateau_epochs) {
          truncation = std::min(2 * truncation, horizon_);
          stale = 0;
        }
      } else if (stale >= config_.patience) {
        break;
      }
    }
    model_.corrector = best_params;
    history_.best_val_loss = best;
  }

  Eigen::Index horizon() const { return horizon_; }

 private:
  HybridModel& model_;
  const std::vector<PredictionSample>& train_;
  const std::vector<PredictionSample>& val_;
  TrainingConfig config_;
  Rng rng_;
  AdamSettings adam_;
  AdamState adam_state_;
  TrainingHistory history_;
  Eigen::Index horizon_ = 0;
};

}  // namespace

TrainingHistory train_two_phase(HybridModel& model, const std::vector<PredictionSample>& train,
                                const std::vector<PredictionSample>& val,
                                const TrainingConfig& config) {
  if (config.phase1_epochs == 0 && config.phase2_epochs == 0) {
    return {};
  }
  Trainer trainer(model, train, val, config);
  trainer.phase_one();
  if (config.phase2_epochs > 0) {
    trainer.free_running(config.initial_truncation, config.phase2_epochs);
  } else {
    trainer.history().best_val_loss = evaluate_loss(model, val, RolloutMode::FreeRunning).loss;
  }
  return trainer.history();
}

TrainingHistory train_one_phase(HybridModel& model, const std::vector<PredictionSample>& train,
                                const std::vector<PredictionSample>& val,
                                const TrainingConfig& config) {
  const int epochs = config.phase1_epochs + config.phase2_epochs;
  if (epochs == 0) {
    return {};
  }
  Trainer trainer(model, train, val, config);
  trainer.free_running(trainer.horizon(), epochs);
  return trainer.history();
}

}  // namespace resmotion
