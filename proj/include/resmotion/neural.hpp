#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "resmotion/common.hpp"

namespace resmotion {

// Stacked LSTM operating on batches: every vector quantity is a matrix whose
// columns are independent sequences.

struct LstmLayer {
  Mat weights;  // 4 n_h x (n_in + n_h); gate blocks i, f, g, o; columns [input | recurrent]
  Mat bias;     // 4 n_h x 1
};

/// Per-layer hidden and cell states, n_h x batch each.
struct LstmState {
  std::vector<Mat> h;
  std::vector<Mat> c;

  static LstmState zeros(int layers, int hidden, Eigen::Index batch);
  Eigen::Index batch() const { return h.empty() ? 0 : h.front().cols(); }
};

/// Values of one step kept for the backward pass.
struct LstmStepCache {
  struct Layer {
    Mat input;   // n_in x B
    Mat h_prev;  // n_h x B
    Mat c_prev;
    Mat i, f, g, o;  // gate activations
    Mat c;
    Mat tanh_c;
  };
  std::vector<Layer> layers;
};

class Lstm {
 public:
  Lstm() = default;
  /// Zero weights and biases.
  Lstm(int input_dim, int hidden, int layers);

  /// Weights uniform in +-1/sqrt(n_h), forget-gate bias 1, other biases 0.
  static Lstm random(int input_dim, int hidden, int layers, Rng& rng);

  int input_dim() const { return input_dim_; }
  int hidden() const { return hidden_; }
  int layers() const { return static_cast<int>(layers_.size()); }
  std::vector<LstmLayer>& layer_params() { return layers_; }
  const std::vector<LstmLayer>& layer_params() const { return layers_; }

  /// One step for a batch of inputs (n_in x B). Fills `cache` if given.
  LstmState step(const Mat& input, const LstmState& state, LstmStepCache* cache = nullptr) const;

  /// Reverse of `step`. On entry `d_state` holds dL/d(returned state); on
  /// exit dL/d(input state). Parameter gradients are accumulated into `grads`
  /// (same shapes as this network); returns dL/d(input).
  Mat step_backward(const LstmStepCache& cache, LstmState& d_state, Lstm& grads) const;

  /// Runs a whole sequence (one matrix per step); returns the top-layer
  /// hidden outputs and stores the final state in `final_state`.
  std::vector<Mat> forward(const std::vector<Mat>& inputs, const LstmState& h0,
                           LstmState* final_state = nullptr,
                           std::vector<LstmStepCache>* caches = nullptr) const;

  /// Same shapes, all zero.
  Lstm zeros_like() const;

 private:
  int input_dim_ = 0;
  int hidden_ = 0;
  std::vector<LstmLayer> layers_;
};

/// Elementwise bound beta * tanh(raw / beta); infinite beta passes raw through,
/// zero beta gives zero.
struct OutputConstraint {
  Vec beta;  // empty = unconstrained

  bool active() const { return beta.size() > 0; }
  static OutputConstraint unconstrained() { return {}; }
  static OutputConstraint bounded(const Vec& beta);

  Mat apply(const Mat& raw) const;
  /// d out / d raw, elementwise.
  Mat derivative(const Mat& raw) const;
};

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

/// Predictor LSTM, initializer LSTM and the linear output projection.
struct Corrector {
  Lstm predictor;     // input [c_t, z_phy_{t+1}] (normalized)
  Lstm initializer;   // input [z_t, c_t] over the initialization window
  Mat projection;     // n_z x n_h, no bias
  OutputConstraint constraint;

  static Corrector random(int state_dim, int control_dim, int hidden, int layers, Rng& rng);
  /// Same architecture with every parameter zero.
  Corrector zeros_like() const;

  /// All trainable tensors in a fixed order.
  std::vector<Mat*> tensors();
  std::vector<const Mat*> tensors() const;
  std::size_t parameter_count() const;

  /// Runs the initializer over a window (one n_z + n_c by B matrix per step)
  /// and returns the predictor's initial state.
  LstmState encode(const std::vector<Mat>& window,
                   std::vector<LstmStepCache>* caches = nullptr) const;

  /// Backpropagates dL/d(initial state) through the initializer, accumulating
  /// into `grads.initializer`.
  void encode_backward(const std::vector<LstmStepCache>& caches, LstmState d_state,
                       Corrector& grads) const;
};

/// Copies between a tensor list and one flat vector (tensor order, column-major).
Vec flatten(const std::vector<const Mat*>& tensors);
void unflatten(const Vec& flat, const std::vector<Mat*>& tensors);

double global_norm(const std::vector<const Mat*>& tensors);
/// Scales the tensors so that their global norm is at most `max_norm`;
/// returns the norm before clipping.
double clip_global_norm(const std::vector<Mat*>& tensors, double max_norm);

struct AdamSettings {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<Mat> m;
  std::vector<Mat> v;
  long step = 0;
};

/// One bias-corrected Adam step on `params` with gradients `grads`.
void adam_update(const std::vector<Mat*>& params, const std::vector<const Mat*>& grads,
                 AdamState& state, const AdamSettings& settings);

}  // namespace resmotion
