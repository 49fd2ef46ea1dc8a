#include <doctest.h>

#include <cmath>
#include <limits>

#include "resmotion/eval.hpp"
#include "resmotion/report.hpp"
#include "resmotion/simulate.hpp"

using namespace resmotion;

namespace {

Mat random_mat(Rng& rng, Eigen::Index r, Eigen::Index c, double scale) {
  Mat m(r, c);
  for (Eigen::Index j = 0; j < c; ++j) {
    for (Eigen::Index i = 0; i < r; ++i) {
      m(i, j) = uniform(rng, -scale, scale);
    }
  }
  return m;
}

PhysicalOutputRange range_of(std::initializer_list<double> low, std::initializer_list<double> high) {
  PhysicalOutputRange r{Vec(static_cast<Eigen::Index>(low.size())),
                        Vec(static_cast<Eigen::Index>(high.size()))};
  Eigen::Index i = 0;
  for (double v : low) {
    r.low[i++] = v;
  }
  i = 0;
  for (double v : high) {
    r.high[i++] = v;
  }
  return r;
}

}  // namespace

TEST_CASE("state RMSE by hand") {
  Mat a(3, 2), b(3, 2), c(3, 2), d(3, 2);
  a << 1, 2, 3, 4, 5, 6;
  b << 1, 2, 3, 4, 5, 6;
  c << 0, 2, 3, 6, 5, 6;
  d << 1, 3, 3, 4, 5, 4;
  const auto same = state_rmse({a, b}, {a, b});
  CHECK(same.rmse.isZero(0.0));
  // errors dim 0: 0,0,0 | 1,0,0 ; dim 1: 1,0,-2 | 2,0,0 (truth minus prediction)
  const auto r = state_rmse({a, b}, {d, c}, Vec::Constant(2, 2.0));
  CHECK(r.rmse[0] == doctest::Approx(std::sqrt(1.0 / 6.0)));
  CHECK(r.rmse[1] == doctest::Approx(std::sqrt(9.0 / 6.0)));
  CHECK(r.normalized_sum == doctest::Approx((std::sqrt(1.0 / 6.0) + std::sqrt(9.0 / 6.0)) / 2.0));

  Mat off = a;
  off.col(1).array() += 0.5;
  const auto half = state_rmse({off}, {a});
  CHECK(half.rmse[0] == 0.0);
  CHECK(half.rmse[1] == doctest::Approx(0.5));

  Mat bad = a;
  bad(1, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK(std::isinf(state_rmse({bad}, {a}).rmse[0]));
  CHECK_THROWS_AS(state_rmse({}, {}), DomainError);
  CHECK_THROWS_AS(state_rmse({a}, {Mat(2, 2)}), DomainError);
}

TEST_CASE("state RMSE is symmetric") {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Mat> x, y;
    for (int s = 0; s < 3; ++s) {
      x.push_back(random_mat(rng, 7, 5, 3.0));
      y.push_back(random_mat(rng, 7, 5, 3.0));
    }
    CHECK((state_rmse(x, y).rmse - state_rmse(y, x).rmse).norm() == 0.0);
  }
}

TEST_CASE("dead reckoning of simple motions") {
  const Vec4 pose0(3.0, -2.0, 0.1, 0.4);
  const Mat still = Mat::Zero(5, 5);
  const Mat poses = reconstruct_trajectory(Vehicle::Ship, Vec::Zero(5), still, pose0, 1.0);
  for (Eigen::Index k = 0; k < 5; ++k) {
    CHECK(poses.row(k).transpose() == Vec(pose0));
  }

  Mat straight = Mat::Zero(10, 5);
  straight.col(0).setOnes();
  Vec z0 = Vec::Zero(5);
  z0[0] = 1.0;
  const Mat line = reconstruct_trajectory(Vehicle::Ship, z0, straight, Vec::Zero(4), 1.0);
  CHECK(line(9, 0) == doctest::Approx(10.0).epsilon(1e-14));
  CHECK(std::abs(line(9, 1)) < 1e-14);

  // Steady turn: u = 2 m/s, r = 0.02 rad/s traces a circle of radius 100 m.
  Mat turn = Mat::Zero(100, 5);
  turn.col(0).setConstant(2.0);
  turn.col(3).setConstant(0.02);
  const Vec zt = turn.row(0).transpose();
  const Mat arc = reconstruct_trajectory(Vehicle::Ship, zt, turn, Vec::Zero(4), 1.0);
  // Midpoint steps advance u dt along the mid-step heading; the chord shortfall
  // against the circle is u dt (r dt)^2 / 24 per step.
  double x = 0.0, y = 0.0;
  for (Eigen::Index k = 0; k < 100; ++k) {
    const double psi = 0.02 * (k + 1);
    x += 2.0 * std::cos(psi - 0.01);
    y += 2.0 * std::sin(psi - 0.01);
    CHECK(arc(k, 3) == doctest::Approx(psi).epsilon(1e-12));
    CHECK(std::abs(arc(k, 0) - x) < 1e-9);
    CHECK(std::abs(arc(k, 1) - y) < 1e-9);
    CHECK(std::abs(arc(k, 0) - 100.0 * std::sin(psi)) < 5e-3);
    CHECK(std::abs(arc(k, 1) - 100.0 * (1.0 - std::cos(psi))) < 5e-3);
  }

  // Quadcopter velocities are inertial.
  Mat quad = Mat::Zero(4, 6);
  quad.col(0).setConstant(1.0);
  quad.col(2).setConstant(-0.5);
  Vec q0 = quad.row(0).transpose();
  const Mat qp = reconstruct_trajectory(Vehicle::Quad, q0, quad, Vec::Zero(6), 0.01);
  CHECK(qp(3, 0) == doctest::Approx(0.04).epsilon(1e-12));
  CHECK(qp(3, 2) == doctest::Approx(-0.02).epsilon(1e-12));
  CHECK_THROWS_AS(reconstruct_trajectory(Vehicle::Ship, z0, quad, Vec::Zero(4), 1.0), DomainError);
}

TEST_CASE("dead reckoning of true states stays close to the recorded poses") {
  const Episode e = simulate_ship_episode(1200, 1.0, 31, ship::ShipParams::patrol_vessel());
  const auto samples = extract_samples(e, 60, 900, 900);
  REQUIRE(samples.size() == 1);
  const PredictionSample& s = samples.front();
  const Mat poses = reconstruct_trajectory(Vehicle::Ship, s.last_state(), s.horizon_states, s.initial_pose, 1.0);
  const TrajectoryReport r = trajectory_rmse({poses}, {s.horizon_poses}, 2, 60);
  MESSAGE("ship replay error over 900 s: " << r.mean << " m");
  CHECK(r.mean < 2.0);

  const Episode q = simulate_quad_episode(10, 100.0, 32, quad::QuadParams{});
  const auto qs = extract_samples(q, 100, 100, 100);
  REQUIRE(!qs.empty());
  const Mat qposes = reconstruct_trajectory(Vehicle::Quad, qs[0].last_state(), qs[0].horizon_states,
                                            qs[0].initial_pose, 0.01);
  const TrajectoryReport qr = trajectory_rmse({qposes}, {qs[0].horizon_poses}, 3, 10);
  MESSAGE("quadcopter replay error over 1 s: " << qr.mean << " m");
  CHECK(qr.mean < 0.01);
}

TEST_CASE("trajectory error aggregates") {
  Mat p = Mat::Zero(120, 4);
  p.col(0).setLinSpaced(0.0, 50.0);
  const auto same = trajectory_rmse({p, p}, {p, p}, 2, 60);
  CHECK(same.mean == 0.0);
  CHECK(same.ci95 == 0.0);

  Mat shifted = p;
  shifted.col(1).array() += 3.0;
  const auto offset = trajectory_rmse({shifted}, {p}, 2, 60);
  CHECK(offset.mean == doctest::Approx(3.0));
  REQUIRE(offset.per_minute.size() == 2);
  for (const auto& m : offset.per_minute) {
    CHECK(m.rmse == doctest::Approx(3.0));
  }

  // Two samples with mean distances 1 and 3: mean 2, sample std sqrt(2).
  Mat one = p, three = p;
  one.col(0).array() += 1.0;
  three.col(1).array() -= 3.0;
  const auto pair = trajectory_rmse({one, three}, {p, p}, 2, 60);
  CHECK(pair.mean == doctest::Approx(2.0));
  CHECK(pair.ci95 == doctest::Approx(1.96 * std::sqrt(2.0) / std::sqrt(2.0)));
  REQUIRE(pair.per_sample.size() == 2);
  CHECK(pair.per_sample[0] == doctest::Approx(1.0));
  CHECK(pair.per_sample[1] == doctest::Approx(3.0));

  // Only the first `dims` columns count.
  Mat heading = p;
  heading.col(3).array() += 1.0;
  CHECK(trajectory_rmse({heading}, {p}, 2, 60).mean == 0.0);

  Mat nan = p;
  nan(5, 0) = std::numeric_limits<double>::quiet_NaN();
  const auto broken = trajectory_rmse({nan, p}, {p, p}, 2, 60);
  CHECK(std::isinf(broken.mean));
  CHECK_THROWS_AS(trajectory_rmse({}, {}, 2, 60), DomainError);
  CHECK_THROWS_AS(trajectory_rmse({p}, {p.topRows(3)}, 2, 60), DomainError);
}

TEST_CASE("trajectory error is invariant under a common translation") {
  Rng rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const Mat a = random_mat(rng, 50, 6, 20.0);
    const Mat b = random_mat(rng, 50, 6, 20.0);
    Mat ta = a, tb = b;
    const Eigen::RowVectorXd shift = random_mat(rng, 1, 6, 1000.0);
    ta.rowwise() += shift;
    tb.rowwise() += shift;
    CHECK(trajectory_rmse({ta}, {tb}, 3, 10).mean == doctest::Approx(trajectory_rmse({a}, {b}, 3, 10).mean));
  }
}

TEST_CASE("percentiles interpolate linearly") {
  CHECK(percentile({4, 1, 3, 2}, 50) == 2.5);
  CHECK(percentile({4, 1, 3, 2}, 0) == 1.0);
  CHECK(percentile({4, 1, 3, 2}, 100) == 4.0);
  CHECK(percentile({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, 2.5) == doctest::Approx(1.225));
  CHECK(percentile({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, 97.5) == doctest::Approx(9.775));
  CHECK(percentile({7}, 30) == 7.0);
  CHECK_THROWS_AS(percentile({}, 50), DomainError);
}

TEST_CASE("relative threshold") {
  CHECK(relative_threshold(range_of({-5}, {5}), Vec::Constant(1, 1.0)).aggregate == doctest::Approx(20.0));
  CHECK(relative_threshold(range_of({0}, {4}), Vec::Constant(1, 1.0)).aggregate == doctest::Approx(50.0));
  CHECK(relative_threshold(range_of({0}, {4}), Vec::Zero(1)).aggregate == 0.0);
  const auto two = relative_threshold(range_of({-5, 0}, {5, 4}), Vec::Constant(2, 1.0));
  CHECK(two.percent[0] == doctest::Approx(20.0));
  CHECK(two.percent[1] == doctest::Approx(50.0));
  CHECK(two.aggregate == doctest::Approx(35.0));
  CHECK(std::isinf(relative_threshold(range_of({0}, {1}), Vec::Constant(1, kUnbounded)).aggregate));
  CHECK_THROWS_AS(relative_threshold(range_of({2}, {2}), Vec::Ones(1)), DomainError);

  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const double lo = uniform(rng, -10, 0);
    const double hi = uniform(rng, 0.1, 10);
    const double beta = uniform(rng, 0, 5);
    const double k = uniform(rng, 0.01, 100);
    const double base = relative_threshold(range_of({lo}, {hi}), Vec::Constant(1, beta)).aggregate;
    const double scaled = relative_threshold(range_of({k * lo}, {k * hi}), Vec::Constant(1, k * beta)).aggregate;
    CHECK(scaled == doctest::Approx(base).epsilon(1e-12));
    const double pct = uniform(rng, 0, 200);
    const auto range = range_of({lo}, {hi});
    CHECK(relative_threshold(range, beta_for_threshold(range, pct)).aggregate ==
          doctest::Approx(pct).epsilon(1e-12));
  }
}

TEST_CASE("physical output range uses the 2.5 and 97.5 percentiles") {
  Episode e;
  e.vehicle = Vehicle::Ship;
  e.states.resize(101, 5);
  e.controls = Mat::Zero(101, 4);
  e.poses = Mat::Zero(101, 4);
  for (int t = 0; t <= 100; ++t) {
    e.states.row(t).setConstant(t);
  }
  PhysicalModel m;
  m.regression.kind = RegressionKind::Lin;
  for (int i = 0; i < 5; ++i) {
    Vec w = Vec::Zero(10);
    w[4 + i] = 1.0;  // identity map: outputs are z_0 .. z_99
    m.regression.weights.push_back(w);
  }
  const PhysicalOutputRange r = physical_output_range(m, {e}, {0});
  CHECK(r.low[0] == doctest::Approx(2.475));
  CHECK(r.high[4] == doctest::Approx(96.525));
}

TEST_CASE("block lengths") {
  CHECK(block_steps(Vehicle::Ship, 1.0) == 60);
  CHECK(block_steps(Vehicle::Ship, 0.5) == 120);
  CHECK(block_steps(Vehicle::Quad, 0.01) == 10);
}

TEST_CASE("threshold sweep endpoint identities") {
  const auto params = ship::ShipParams::patrol_vessel();
  std::vector<Episode> eps;
  for (std::uint64_t s = 0; s < 3; ++s) {
    eps.push_back(simulate_ship_episode(900, 1.0, 70 + s, params));
  }
  const PhysicalModel phys = build_physical_model(Vehicle::Ship, FirstPrinciplesKind::None,
                                                  RegressionKind::Lin, eps, {0}, 1.0);
  HybridModel model = make_hybrid(phys, fit_normalizer(eps, {0}), 8, 1, 5);
  const auto train = extract_samples(eps, {0}, 10, 60, 30);
  const auto val = extract_samples(eps, {1}, 10, 60, 60);
  const auto test = extract_samples(eps, {2}, 10, 60, 60);
  TrainingConfig tc;
  tc.phase1_epochs = 5;
  tc.phase2_epochs = 5;
  (void)train_two_phase(model, train, val, tc);

  const PhysicalOutputRange range = physical_output_range(phys, eps, {0});
  SweepConfig cfg;
  cfg.thresholds = {0.0, 1e7};
  cfg.fine_tune_epochs = 2;
  cfg.training = tc;
  const auto rows = threshold_sweep(model, range, train, val, test, cfg);
  REQUIRE(rows.size() == 5);
  CHECK(rows[0].variant == "unconstrained");
  CHECK(std::isinf(rows[0].threshold));

  HybridModel pure = model;
  pure.corrector = pure.corrector.zeros_like();
  const ModelEvaluation physics = evaluate_model(pure, test);
  for (int i : {1, 2}) {
    CHECK(rows[static_cast<std::size_t>(i)].threshold == 0.0);
    CHECK(rows[static_cast<std::size_t>(i)].relative_threshold == 0.0);
    CHECK((rows[static_cast<std::size_t>(i)].state_rmse - physics.states.rmse).norm() < 1e-12);
    CHECK(rows[static_cast<std::size_t>(i)].trajectory_rmse == doctest::Approx(physics.trajectory.mean));
  }
  CHECK(rows[1].variant == "clamped");
  CHECK(rows[2].variant == "fine-tuned");
  // A bound that never saturates leaves the model as it was.
  const Vec rel = rows[3].state_rmse.cwiseQuotient(rows[0].state_rmse) - Vec::Ones(5);
  CHECK(rel.cwiseAbs().maxCoeff() < 1e-6);
  // Fine-tuning under it matches fine-tuning without any bound.
  HybridModel free = model;
  TrainingConfig ft = tc;
  ft.phase1_epochs = 0;
  ft.phase2_epochs = cfg.fine_tune_epochs;
  (void)train_one_phase(free, train, val, ft);
  const Vec tuned = rows[4].state_rmse.cwiseQuotient(evaluate_model(free, test).states.rmse) - Vec::Ones(5);
  CHECK(tuned.cwiseAbs().maxCoeff() < 1e-6);
}
