#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <set>

#include "resmotion/dataset.hpp"

using namespace resmotion;

namespace {

// Ship-shaped episode whose entries encode their own time index.
Episode indexed_episode(Eigen::Index length, double offset = 0.0) {
  Episode e;
  e.vehicle = Vehicle::Ship;
  e.dt = 1.0;
  e.states.resize(length, 5);
  e.controls.resize(length, 4);
  e.poses.resize(length, 4);
  for (Eigen::Index t = 0; t < length; ++t) {
    for (int j = 0; j < 5; ++j) {
      e.states(t, j) = offset + t + 0.1 * j + std::sin(0.3 * t * (j + 1));
    }
    for (int j = 0; j < 4; ++j) {
      e.controls(t, j) = 1000.0 + t + 0.01 * j + std::cos(0.2 * t * (j + 1));
      e.poses(t, j) = -static_cast<double>(t) - 0.1 * j;
    }
  }
  return e;
}

}  // namespace

TEST_CASE("split sizes") {
  CHECK(split_sizes(96, {0.6, 0.1, 0.3}) == std::array<std::size_t, 3>{58, 9, 29});
  CHECK(split_sizes(8, {0.6, 0.1, 0.3}) == std::array<std::size_t, 3>{5, 1, 2});
  CHECK(split_sizes(7, {1.0, 0.0, 0.0}) == std::array<std::size_t, 3>{7, 0, 0});
  CHECK_THROWS_AS(split_sizes(2, {0.6, 0.1, 0.3}), DomainError);
  CHECK_THROWS_AS(split_sizes(10, {0.6, 0.1, 0.2}), DomainError);
}

TEST_CASE("split is a deterministic disjoint partition") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t n = 5 + seed * 7;
    const Split a = split_dataset(n, {0.6, 0.1, 0.3}, seed);
    const Split b = split_dataset(n, {0.6, 0.1, 0.3}, seed);
    CHECK(a.train == b.train);
    CHECK(a.val == b.val);
    CHECK(a.test == b.test);
    std::set<std::size_t> all;
    for (const auto* part : {&a.train, &a.val, &a.test}) {
      CHECK(std::is_sorted(part->begin(), part->end()));
      all.insert(part->begin(), part->end());
    }
    CHECK(all.size() == n);
    CHECK(*all.rbegin() == n - 1);
    CHECK(a.train.size() + a.val.size() + a.test.size() == n);
  }
  CHECK(split_dataset(96, {0.6, 0.1, 0.3}, 1).train != split_dataset(96, {0.6, 0.1, 0.3}, 2).train);
}

TEST_CASE("sample counts follow the index arithmetic") {
  const auto count = [](Eigen::Index l, Eigen::Index w, Eigen::Index h, Eigen::Index s) {
    return l < w + h ? 0 : (l - w - h) / s + 1;
  };
  CHECK(extract_samples(indexed_episode(3600), 60, 900, 900).size() == 3);
  CHECK(extract_samples(indexed_episode(960), 60, 900, 900).size() == 1);
  CHECK(extract_samples(indexed_episode(962), 60, 900, 1).size() == 3);
  CHECK(extract_samples(indexed_episode(959), 60, 900, 1).empty());
  for (Eigen::Index l : {10, 17, 33}) {
    for (Eigen::Index w : {1, 3}) {
      for (Eigen::Index h : {1, 5}) {
        for (Eigen::Index s : {1, 2, 7}) {
          CHECK(static_cast<Eigen::Index>(extract_samples(indexed_episode(l), w, h, s).size()) ==
                count(l, w, h, s));
        }
      }
    }
  }
  CHECK_THROWS_AS(extract_samples(indexed_episode(10), 0, 2, 1), DomainError);
}

TEST_CASE("sample windows are aligned") {
  const Episode e = indexed_episode(50);
  const auto samples = extract_samples(e, 4, 6, 5, 3);
  REQUIRE(samples.size() == 9);
  const PredictionSample& p = samples[2];
  CHECK(p.start == 10);
  CHECK(p.episode == 3);
  CHECK(p.window() == 4);
  CHECK(p.horizon() == 6);
  CHECK(p.init_states == e.states.middleRows(10, 4));
  CHECK(p.init_controls == e.controls.middleRows(10, 4));
  // c_t drives z_t -> z_{t+1}: horizon step k uses control index 13 + k.
  CHECK(p.horizon_controls == e.controls.middleRows(13, 6));
  CHECK(p.horizon_states == e.states.middleRows(14, 6));
  CHECK(p.horizon_poses == e.poses.middleRows(14, 6));
  CHECK(p.initial_pose == e.pose(13));
  CHECK(p.last_state() == e.state(13));
}

TEST_CASE("samples never straddle episodes") {
  const std::vector<Episode> eps{indexed_episode(30, 0.0), indexed_episode(25, 1e4)};
  const auto samples = extract_samples(eps, {0, 1}, 5, 5, 3);
  for (const auto& s : samples) {
    const double base = s.episode == 0 ? 0.0 : 1e4;
    CHECK(s.horizon_states(s.horizon() - 1, 0) - base < 30.0);
    CHECK(s.init_states(0, 0) - base > -2.0);
  }
}

TEST_CASE("normalizer statistics and round trip") {
  const std::vector<Episode> eps{indexed_episode(200), indexed_episode(100, 5.0), indexed_episode(80, 1e6)};
  const Normalizer n = fit_normalizer(eps, {0, 1});
  Mat all(300, 5);
  all << eps[0].states, eps[1].states;
  const Mat z = n.normalize_states(all);
  for (int j = 0; j < 5; ++j) {
    const double mean = z.col(j).mean();
    const double sd = std::sqrt((z.col(j).array() - mean).square().mean());
    CHECK(std::abs(mean) < 1e-9);
    CHECK(std::abs(sd - 1.0) < 1e-9);
  }
  const auto samples = extract_samples(eps, {2}, 7, 9, 11);
  for (const auto& s : samples) {
    const PredictionSample back = n.invert(n.apply(s));
    CHECK((back.init_states - s.init_states).cwiseAbs().maxCoeff() < 1e-12 * 1e6);
    CHECK((back.horizon_states - s.horizon_states).cwiseAbs().maxCoeff() < 1e-12 * 1e6);
    CHECK(back.horizon_poses == s.horizon_poses);
  }
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    Vec c(4);
    for (int j = 0; j < 4; ++j) {
      c[j] = uniform(rng, -10, 10);
    }
    CHECK((n.denormalize_control(n.normalize_control(c)) - c).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("constant dimension is rejected") {
  Episode e = indexed_episode(20);
  e.states.col(2).setConstant(3.0);
  CHECK_THROWS_AS(fit_normalizer({e}), DomainError);
  CHECK_THROWS_AS(fit_normalizer({e}, {}), DomainError);
}

TEST_CASE("manifest round trip") {
  const auto path = std::filesystem::temp_directory_path() / "resmotion_manifest_test.txt";
  write_manifest(path, {"episode_000.csv", "episode_007.csv"});
  CHECK(read_manifest(path) == std::vector<std::string>{"episode_000.csv", "episode_007.csv"});
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_manifest(path), IoError);
}
