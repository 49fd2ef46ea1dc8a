#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "resmotion/dataset.hpp"
#include "resmotion/neural.hpp"
#include "resmotion/physical.hpp"

namespace resmotion {

/// Physical model in raw units plus a recurrent corrector in normalized
/// units. The corrector's output o is a residual in units of the state
/// standard deviation: z_hat = z_phy + std (.) o.
struct HybridModel {
  PhysicalModel physical;
  Corrector corrector;  // no layers = pure physical model
  Normalizer normalizer;
  /// A free-running rollout is flagged divergent once any normalized state
  /// exceeds this magnitude or becomes non-finite.
  double divergence_bound = 1e6;

  bool has_corrector() const { return corrector.predictor.layers() > 0; }
  Eigen::Index state_dim() const { return physical.state_dim(); }
};

/// Corrector sized for the model's vehicle, with uniform +-1/sqrt(n_h) weights.
HybridModel make_hybrid(const PhysicalModel& physical, const Normalizer& normalizer, int hidden,
                        int layers, std::uint64_t seed);

struct HybridStepResult {
  Vec z_hat;
  Vec z_phy;
  Vec z_lstm;  // raw units
  LstmState state;
  bool diverged = false;
};

/// One step of the hybrid model for a single sequence: the physical model
/// consumes the newest-first state/control history, the LSTM consumes
/// [c_t, z_phy_{t+1}] and its previous state.
HybridStepResult hybrid_step(const HybridModel& model, const Mat& states, const Mat& controls,
                             const LstmState& state);

/// Predictor state after the initialization window of a sample.
LstmState initial_state(const HybridModel& model, const PredictionSample& sample);

enum class RolloutMode { TeacherForced, FreeRunning };

struct RolloutResult {
  double loss = 0.0;  // mean over steps of the mean squared normalized error
  Mat predictions;    // steps x n_z, raw
  Mat physical;       // z_phy per step
  Mat residual;       // z_lstm per step, raw units
  bool diverged = false;
  Eigen::Index divergence_step = -1;
};

/// Rollout over the first `steps` horizon steps (all if negative). Teacher
/// forcing feeds the true previous state to the physical model; free running
/// feeds back z_hat.
RolloutResult rollout(const HybridModel& model, const PredictionSample& sample, RolloutMode mode,
                      Eigen::Index steps = -1);

struct BatchResult {
  double loss = 0.0;  // mean over non-divergent samples
  int samples = 0;
  int diverged = 0;
};

/// Loss of a batch and, if `grads` is given, its exact gradient with respect
/// to every corrector tensor (accumulated into `grads`, same shapes).
/// Divergent samples are excluded from loss and gradient. In free-running
/// mode the gradient flows through the feedback path and the physical model.
BatchResult batch_loss(const HybridModel& model, const std::vector<const PredictionSample*>& batch,
                       RolloutMode mode, Eigen::Index steps, Corrector* grads);

struct TrainingConfig {
  int phase1_epochs = 20;      // E1 (upper bound; stops earlier on plateau)
  int phase2_epochs = 100;     // E2
  Eigen::Index initial_truncation = 25;
  double learning_rate = 2e-3;
  double clip_norm = 5.0;
  int batch_size = 8;
  std::uint64_t seed = 1;
  int patience = 10;           // early stopping on validation loss
  int plateau_epochs = 3;      // phase-1 stop and curriculum step
  double min_improvement = 1e-3;  // relative improvement counted as progress
  double abort_fraction = 0.5;    // of divergent batches in a free-running epoch
};

struct EpochRecord {
  std::string phase;  // "teacher" or "free"
  int epoch = 0;
  Eigen::Index truncation = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  int diverged_batches = 0;
  int batches = 0;
};

struct TrainingHistory {
  std::vector<EpochRecord> epochs;
  double best_val_loss = 0.0;
  bool aborted = false;
  std::string diagnostic;
};

/// Too many batches diverged in a free-running epoch.
class TrainingDivergence : public std::runtime_error {
 public:
  TrainingDivergence(const std::string& what, TrainingHistory history)
      : std::runtime_error(what), history_(std::move(history)) {}
  const TrainingHistory& history() const { return history_; }

 private:
  TrainingHistory history_;
};

/// Phase 1: teacher-forced epochs (at most E1, earlier on a validation
/// plateau). Phase 2: free-running epochs on the first `truncation` horizon
/// steps, doubling from `initial_truncation` to the full horizon whenever the
/// validation loss plateaus; early stopping on the full-horizon free-running
/// validation loss. The model ends with the best validated parameters.
TrainingHistory train_two_phase(HybridModel& model, const std::vector<PredictionSample>& train,
                                const std::vector<PredictionSample>& val,
                                const TrainingConfig& config);

/// Free-running full-horizon training from the first epoch for E1 + E2
/// epochs, with the same optimizer, batching and early stopping.
TrainingHistory train_one_phase(HybridModel& model, const std::vector<PredictionSample>& train,
                                const std::vector<PredictionSample>& val,
                                const TrainingConfig& config);

/// Mean free-running (or teacher-forced) loss over samples, full horizon.
BatchResult evaluate_loss(const HybridModel& model, const std::vector<PredictionSample>& samples,
                          RolloutMode mode, Eigen::Index steps = -1);

/// Free-running predictions (raw units) for every sample.
std::vector<Mat> predict(const HybridModel& model, const std::vector<PredictionSample>& samples);

}  // namespace resmotion
