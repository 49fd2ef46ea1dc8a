#include "resmotion/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace resmotion {

std::array<std::size_t, 3> split_sizes(std::size_t n, const std::array<double, 3>& ratios) {
  double total = 0.0;
  for (double r : ratios) {
    if (!(r >= 0.0) || !std::isfinite(r)) {
      throw DomainError("split ratios must be finite and nonnegative");
    }
    total += r;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw DomainError("split ratios must sum to 1");
  }
  std::array<std::size_t, 3> sizes{};
  std::array<double, 3> fraction{};
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double exact = static_cast<double>(n) * ratios[i];
    sizes[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    fraction[i] = exact - static_cast<double>(sizes[i]);
    assigned += sizes[i];
  }
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return fraction[a] > fraction[b] + 1e-12; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) {
    ++sizes[order[k % 3]];
  }
  for (int i = 0; i < 3; ++i) {
    if (ratios[i] > 0.0 && sizes[i] == 0) {
      throw DomainError("too few episodes for the requested split (" + std::to_string(n) + ")");
    }
  }
  return sizes;
}

Split split_dataset(std::size_t n, const std::array<double, 3>& ratios, std::uint64_t seed) {
  const auto sizes = split_sizes(n, ratios);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform(rng, 0.0, static_cast<double>(i)));
    std::swap(idx[i - 1], idx[std::min(j, i - 1)]);
  }
  Split s;
  auto it = idx.begin();
  s.train.assign(it, it + static_cast<std::ptrdiff_t>(sizes[0]));
  it += static_cast<std::ptrdiff_t>(sizes[0]);
  s.val.assign(it, it + static_cast<std::ptrdiff_t>(sizes[1]));
  it += static_cast<std::ptrdiff_t>(sizes[1]);
  s.test.assign(it, idx.end());
  for (auto* part : {&s.train, &s.val, &s.test}) {
    std::sort(part->begin(), part->end());
  }
  return s;
}

std::vector<PredictionSample> extract_samples(const Episode& episode, Eigen::Index window,
                                              Eigen::Index horizon, Eigen::Index stride,
                                              std::size_t episode_index) {
  if (window < 1 || horizon < 1 || stride < 1) {
    throw DomainError("extract_samples: window, horizon and stride must be positive");
  }
  std::vector<PredictionSample> out;
  const Eigen::Index length = episode.length();
  if (length < window + horizon) {
    return out;
  }
  for (Eigen::Index s = 0; s + window + horizon <= length; s += stride) {
    PredictionSample p;
    p.episode = episode_index;
    p.start = s;
    p.init_states = episode.states.middleRows(s, window);
    p.init_controls = episode.controls.middleRows(s, window);
    p.horizon_controls = episode.controls.middleRows(s + window - 1, horizon);
    p.horizon_states = episode.states.middleRows(s + window, horizon);
    p.horizon_poses = episode.poses.middleRows(s + window, horizon);
    p.initial_pose = episode.poses.row(s + window - 1).transpose();
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<PredictionSample> extract_samples(const std::vector<Episode>& episodes,
                                              const std::vector<std::size_t>& which,
                                              Eigen::Index window, Eigen::Index horizon,
                                              Eigen::Index stride) {
  std::vector<PredictionSample> out;
  for (std::size_t i : which) {
    auto part = extract_samples(episodes.at(i), window, horizon, stride, i);
    out.insert(out.end(), std::make_move_iterator(part.begin()),
               std::make_move_iterator(part.end()));
  }
  return out;
}

Vec Normalizer::normalize_state(const Vec& z) const {
  return (z - state_mean).cwiseQuotient(state_std);
}
Vec Normalizer::denormalize_state(const Vec& z) const {
  return z.cwiseProduct(state_std) + state_mean;
}
Vec Normalizer::normalize_control(const Vec& c) const {
  return (c - control_mean).cwiseQuotient(control_std);
}
Vec Normalizer::denormalize_control(const Vec& c) const {
  return c.cwiseProduct(control_std) + control_mean;
}

namespace {

Mat scale_rows(const Mat& rows, const Vec& mean, const Vec& std, bool forward) {
  if (forward) {
    return (rows.rowwise() - mean.transpose()).array().rowwise() / std.transpose().array();
  }
  return (rows.array().rowwise() * std.transpose().array()).matrix().rowwise() + mean.transpose();
}

}  // namespace

Mat Normalizer::normalize_states(const Mat& rows) const {
  return scale_rows(rows, state_mean, state_std, true);
}
Mat Normalizer::denormalize_states(const Mat& rows) const {
  return scale_rows(rows, state_mean, state_std, false);
}
Mat Normalizer::normalize_controls(const Mat& rows) const {
  return scale_rows(rows, control_mean, control_std, true);
}
Mat Normalizer::denormalize_controls(const Mat& rows) const {
  return scale_rows(rows, control_mean, control_std, false);
}

PredictionSample Normalizer::apply(const PredictionSample& s) const {
  PredictionSample out = s;
  out.init_states = normalize_states(s.init_states);
  out.init_controls = normalize_controls(s.init_controls);
  out.horizon_controls = normalize_controls(s.horizon_controls);
  out.horizon_states = normalize_states(s.horizon_states);
  return out;
}

PredictionSample Normalizer::invert(const PredictionSample& s) const {
  PredictionSample out = s;
  out.init_states = denormalize_states(s.init_states);
  out.init_controls = denormalize_controls(s.init_controls);
  out.horizon_controls = denormalize_controls(s.horizon_controls);
  out.horizon_states = denormalize_states(s.horizon_states);
  return out;
}

namespace {

std::pair<Vec, Vec> column_stats(const std::vector<const Mat*>& blocks, const char* what) {
  const Eigen::Index dim = blocks.front()->cols();
  Vec sum = Vec::Zero(dim);
  double count = 0.0;
  for (const Mat* m : blocks) {
    sum += m->colwise().sum().transpose();
    count += static_cast<double>(m->rows());
  }
  const Vec mean = sum / count;
  Vec sq = Vec::Zero(dim);
  for (const Mat* m : blocks) {
    sq += (m->rowwise() - mean.transpose()).colwise().squaredNorm().transpose();
  }
  const Vec std = (sq / count).cwiseSqrt();
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (!(std[i] > 1e-12 * std::max(1.0, std::abs(mean[i])))) {
      throw DomainError(std::string("fit_normalizer: zero variance in ") + what + " dimension " +
                        std::to_string(i));
    }
  }
  return {mean, std};
}

}  // namespace

Normalizer fit_normalizer(const std::vector<Episode>& episodes,
                          const std::vector<std::size_t>& which) {
  if (which.empty()) {
    throw DomainError("fit_normalizer: empty training set");
  }
  std::vector<const Mat*> states;
  std::vector<const Mat*> controls;
  for (std::size_t i : which) {
    states.push_back(&episodes.at(i).states);
    controls.push_back(&episodes.at(i).controls);
  }
  Normalizer n;
  std::tie(n.state_mean, n.state_std) = column_stats(states, "state");
  std::tie(n.control_mean, n.control_std) = column_stats(controls, "control");
  return n;
}

Normalizer fit_normalizer(const std::vector<Episode>& episodes) {
  std::vector<std::size_t> all(episodes.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return fit_normalizer(episodes, all);
}

void write_manifest(const std::filesystem::path& path, const std::vector<std::string>& names) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write manifest " + path.string());
  }
  for (const auto& n : names) {
    out << n << '\n';
  }
  if (!out) {
    throw IoError("failed writing manifest " + path.string());
  }
}

std::vector<std::string> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot read manifest " + path.string());
  }
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
      line.pop_back();
    }
    if (!line.empty()) {
      names.push_back(line);
    }
  }
  return names;
}

}  // namespace resmotion
