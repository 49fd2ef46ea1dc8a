#include "resmotion/neural.hpp"

#include <cmath>

namespace resmotion {

namespace {

Mat sigmoid(const Mat& x) { return (1.0 + (-x.array()).exp()).inverse().matrix(); }

}  // namespace

LstmState LstmState::zeros(int layers, int hidden, Eigen::Index batch) {
  LstmState s;
  s.h.assign(static_cast<std::size_t>(layers), Mat::Zero(hidden, batch));
  s.c.assign(static_cast<std::size_t>(layers), Mat::Zero(hidden, batch));
  return s;
}

Lstm::Lstm(int input_dim, int hidden, int layers) : input_dim_(input_dim), hidden_(hidden) {
  if (input_dim < 1 || hidden < 1 || layers < 1) {
    throw DomainError("Lstm: dimensions must be positive");
  }
  for (int l = 0; l < layers; ++l) {
    const int n_in = l == 0 ? input_dim : hidden;
    layers_.push_back({Mat::Zero(4 * hidden, n_in + hidden), Mat::Zero(4 * hidden, 1)});
  }
}

Lstm Lstm::random(int input_dim, int hidden, int layers, Rng& rng) {
  Lstm net(input_dim, hidden, layers);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (auto& layer : net.layers_) {
    for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) {
      for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) {
        layer.weights(i, j) = uniform(rng, -bound, bound);
      }
    }
    layer.bias.middleRows(hidden, hidden).setOnes();
  }
  return net;
}

Lstm Lstm::zeros_like() const {
  Lstm z = *this;
  for (auto& layer : z.layers_) {
    layer.weights.setZero();
    layer.bias.setZero();
  }
  return z;
}

LstmState Lstm::step(const Mat& input, const LstmState& state, LstmStepCache* cache) const {
  if (input.rows() != input_dim_) {
    throw DomainError("Lstm::step: input has " + std::to_string(input.rows()) +
                      " rows, expected " + std::to_string(input_dim_));
  }
  const int n = hidden_;
  if (cache != nullptr) {
    cache->layers.resize(layers_.size());
  }
  LstmState out;
  out.h.resize(layers_.size());
  out.c.resize(layers_.size());
  const Mat* x = &input;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const LstmLayer& p = layers_[l];
    const Mat& h_prev = state.h[l];
    const Mat& c_prev = state.c[l];
    const Eigen::Index n_in = x->rows();
    Mat z = p.weights.leftCols(n_in) * *x + p.weights.rightCols(n) * h_prev;
    z.colwise() += p.bias.col(0);
    const Mat i = sigmoid(z.topRows(n));
    const Mat f = sigmoid(z.middleRows(n, n));
    const Mat g = z.middleRows(2 * n, n).array().tanh().matrix();
    const Mat o = sigmoid(z.bottomRows(n));
    Mat c = f.cwiseProduct(c_prev) + i.cwiseProduct(g);
    Mat tanh_c = c.array().tanh().matrix();
    out.h[l] = o.cwiseProduct(tanh_c);
    out.c[l] = c;
    if (cache != nullptr) {
      auto& cl = cache->layers[l];
      cl.input = *x;
      cl.h_prev = h_prev;
      cl.c_prev = c_prev;
      cl.i = i;
      cl.f = f;
      cl.g = g;
      cl.o = o;
      cl.c = std::move(c);
      cl.tanh_c = std::move(tanh_c);
    }
    x = &out.h[l];
  }
  return out;
}

Mat Lstm::step_backward(const LstmStepCache& cache, LstmState& d_state, Lstm& grads) const {
  const int n = hidden_;
  Mat d_from_above;
  for (std::size_t li = layers_.size(); li-- > 0;) {
    const auto& cl = cache.layers[li];
    Mat dh = d_state.h[li];
    if (d_from_above.size() > 0) {
      dh += d_from_above;
    }
    const Mat dc =
        d_state.c[li] + dh.cwiseProduct(cl.o).cwiseProduct(
                            (1.0 - cl.tanh_c.array().square()).matrix());
    Mat dz(4 * n, dh.cols());
    dz.topRows(n) = dc.cwiseProduct(cl.g).cwiseProduct(
        cl.i.cwiseProduct((1.0 - cl.i.array()).matrix()));
    dz.middleRows(n, n) = dc.cwiseProduct(cl.c_prev).cwiseProduct(
        cl.f.cwiseProduct((1.0 - cl.f.array()).matrix()));
    dz.middleRows(2 * n, n) =
        dc.cwiseProduct(cl.i).cwiseProduct((1.0 - cl.g.array().square()).matrix());
    dz.bottomRows(n) = dh.cwiseProduct(cl.tanh_c).cwiseProduct(
        cl.o.cwiseProduct((1.0 - cl.o.array()).matrix()));

    const LstmLayer& p = layers_[li];
    LstmLayer& g = grads.layers_[li];
    const Eigen::Index n_in = cl.input.rows();
    g.weights.leftCols(n_in).noalias() += dz * cl.input.transpose();
    g.weights.rightCols(n).noalias() += dz * cl.h_prev.transpose();
    g.bias.col(0) += dz.rowwise().sum();

    d_state.h[li].noalias() = p.weights.rightCols(n).transpose() * dz;
    d_state.c[li] = dc.cwiseProduct(cl.f);
    d_from_above.noalias() = p.weights.leftCols(n_in).transpose() * dz;
  }
  return d_from_above;
}

std::vector<Mat> Lstm::forward(const std::vector<Mat>& inputs, const LstmState& h0,
                               LstmState* final_state, std::vector<LstmStepCache>* caches) const {
  std::vector<Mat> outputs;
  outputs.reserve(inputs.size());
  if (caches != nullptr) {
    caches->assign(inputs.size(), {});
  }
  LstmState s = h0;
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    s = step(inputs[t], s, caches != nullptr ? &(*caches)[t] : nullptr);
    outputs.push_back(s.h.back());
  }
  if (final_state != nullptr) {
    *final_state = s;
  }
  return outputs;
}

OutputConstraint OutputConstraint::bounded(const Vec& beta) {
  if (!(beta.array() >= 0.0).all() || beta.hasNaN()) {
    throw DomainError("OutputConstraint: bounds must be nonnegative");
  }
  return OutputConstraint{beta};
}

Mat OutputConstraint::apply(const Mat& raw) const {
  if (!active()) {
    return raw;
  }
  if (beta.size() != raw.rows()) {
    throw DomainError("OutputConstraint: dimension mismatch");
  }
  Mat out(raw.rows(), raw.cols());
  for (Eigen::Index i = 0; i < raw.rows(); ++i) {
    const double b = beta[i];
    if (std::isinf(b)) {
      out.row(i) = raw.row(i);
    } else if (b == 0.0) {
      out.row(i).setZero();
    } else {
      out.row(i) = b * (raw.row(i).array() / b).tanh();
    }
  }
  return out;
}

Mat OutputConstraint::derivative(const Mat& raw) const {
  if (!active()) {
    return Mat::Ones(raw.rows(), raw.cols());
  }
  Mat d(raw.rows(), raw.cols());
  for (Eigen::Index i = 0; i < raw.rows(); ++i) {
    const double b = beta[i];
    if (std::isinf(b)) {
      d.row(i).setOnes();
    } else if (b == 0.0) {
      d.row(i).setZero();
    } else {
      d.row(i) = 1.0 - (raw.row(i).array() / b).tanh().square();
    }
  }
  return d;
}

Corrector Corrector::random(int state_dim, int control_dim, int hidden, int layers, Rng& rng) {
  Corrector c;
  const int n_in = state_dim + control_dim;
  c.predictor = Lstm::random(n_in, hidden, layers, rng);
  c.initializer = Lstm::random(n_in, hidden, layers, rng);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  c.projection.resize(state_dim, hidden);
  for (Eigen::Index j = 0; j < c.projection.cols(); ++j) {
    for (Eigen::Index i = 0; i < c.projection.rows(); ++i) {
      c.projection(i, j) = uniform(rng, -bound, bound);
    }
  }
  return c;
}

Corrector Corrector::zeros_like() const {
  Corrector z = *this;
  z.predictor = predictor.zeros_like();
  z.initializer = initializer.zeros_like();
  z.projection.setZero();
  return z;
}

std::vector<Mat*> Corrector::tensors() {
  std::vector<Mat*> out;
  for (Lstm* net : {&predictor, &initializer}) {
    for (auto& layer : net->layer_params()) {
      out.push_back(&layer.weights);
      out.push_back(&layer.bias);
    }
  }
  out.push_back(&projection);
  return out;
}

std::vector<const Mat*> Corrector::tensors() const {
  std::vector<const Mat*> out;
  for (Mat* m : const_cast<Corrector*>(this)->tensors()) {
    out.push_back(m);
  }
  return out;
}

std::size_t Corrector::parameter_count() const {
  std::size_t n = 0;
  for (const Mat* m : tensors()) {
    n += static_cast<std::size_t>(m->size());
  }
  return n;
}

LstmState Corrector::encode(const std::vector<Mat>& window, std::vector<LstmStepCache>* caches) const {
  if (window.empty()) {
    throw DomainError("Corrector::encode: empty initialization window");
  }
  const LstmState zero =
      LstmState::zeros(initializer.layers(), initializer.hidden(), window.front().cols());
  LstmState final_state;
  initializer.forward(window, zero, &final_state, caches);
  return final_state;
}

void Corrector::encode_backward(const std::vector<LstmStepCache>& caches, LstmState d_state,
                                Corrector& grads) const {
  for (std::size_t t = caches.size(); t-- > 0;) {
    initializer.step_backward(caches[t], d_state, grads.initializer);
  }
}

Vec flatten(const std::vector<const Mat*>& tensors) {
  Eigen::Index n = 0;
  for (const Mat* m : tensors) {
    n += m->size();
  }
  Vec flat(n);
  Eigen::Index k = 0;
  for (const Mat* m : tensors) {
    flat.segment(k, m->size()) = m->reshaped();
    k += m->size();
  }
  return flat;
}

void unflatten(const Vec& flat, const std::vector<Mat*>& tensors) {
  Eigen::Index k = 0;
  for (Mat* m : tensors) {
    if (k + m->size() > flat.size()) {
      throw DomainError("unflatten: vector too short");
    }
    m->reshaped() = flat.segment(k, m->size());
    k += m->size();
  }
  if (k != flat.size()) {
    throw DomainError("unflatten: vector length mismatch");
  }
}

double global_norm(const std::vector<const Mat*>& tensors) {
  double sq = 0.0;
  for (const Mat* m : tensors) {
    sq += m->squaredNorm();
  }
  return std::sqrt(sq);
}

double clip_global_norm(const std::vector<Mat*>& tensors, double max_norm) {
  std::vector<const Mat*> view(tensors.begin(), tensors.end());
  const double norm = global_norm(view);
  if (norm > max_norm && std::isfinite(norm)) {
    const double scale = max_norm / norm;
    for (Mat* m : tensors) {
      *m *= scale;
    }
  }
  return norm;
}

void adam_update(const std::vector<Mat*>& params, const std::vector<const Mat*>& grads,
                 AdamState& state, const AdamSettings& settings) {
  if (params.size() != grads.size()) {
    throw DomainError("adam_update: parameter/gradient count mismatch");
  }
  if (state.m.empty()) {
    for (const Mat* p : params) {
      state.m.push_back(Mat::Zero(p->rows(), p->cols()));
      state.v.push_back(Mat::Zero(p->rows(), p->cols()));
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(settings.beta1, t);
  const double c2 = 1.0 - std::pow(settings.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    const Mat& g = *grads[k];
    Mat& m = state.m[k];
    Mat& v = state.v[k];
    m = settings.beta1 * m + (1.0 - settings.beta1) * g;
    v = settings.beta2 * v + (1.0 - settings.beta2) * g.cwiseProduct(g);
    params[k]->array() -= settings.learning_rate * (m.array() / c1) /
                          ((v.array() / c2).sqrt() + settings.epsilon);
  }
}

}  // namespace resmotion
