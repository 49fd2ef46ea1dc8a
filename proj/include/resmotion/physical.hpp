#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "resmotion/dataset.hpp"
#include "resmotion/episode.hpp"
#include "resmotion/quad.hpp"
#include "resmotion/ship.hpp"

namespace resmotion {

// Discrete one-step predictors z_phy = FirstPrinciples(c_t, z_t) + Regression(c_t, z_t).
// Everything here works in raw physical units.

enum class FirstPrinciplesKind {
  None,
  Min,    // ship: rigid body + linearized roll restoring
  Pro,    // ship: Min + propulsion and rudder forces
  MinQ,   // quadcopter: rigid body + gravity
  Truth,  // ship: calm-water truth model (adds damping); a diagnostic reference
};

enum class RegressionKind {
  None,
  Lin,   // [c_t, z_t, 1]
  Hyd,   // ship only: per-output hydrodynamic terms, c_t, 1
  Qua,   // [c_t, z_t, c_t^2, z_t^2, 1]
  QLag,  // [z_{t-H+1..t}, c_{t-H+1..t}, c_t^2, 1]
  Bias,  // [1]: a constant predictor, used for the pure-LSTM baseline
};

std::string to_string(FirstPrinciplesKind k);
std::string to_string(RegressionKind k);
FirstPrinciplesKind parse_first_principles(std::string_view s);
RegressionKind parse_regression(std::string_view s);

/// Parameters of the Min model: nothing but mass, inertia and hydrostatics.
struct MinParams {
  ship::RigidBody rigid;
};

/// Parameters of the Pro model: Min plus the actuator model.
struct ProParams {
  ship::RigidBody rigid;
  ship::Actuators actuators;
};

/// Parameters of the MinQ model.
struct MinQParams {
  double mass = 1.0;
  Vec3 inertia{1.0, 1.0, 1.0};
  double gravity = kGravity;
};

// The incomplete first-principles models must not be able to see the
// hydrodynamic damping or the environment.
template <class P>
concept HasDamping = requires(const P& p) { p.damping; };
template <class P>
concept HasEnvironment = requires(const P& p) { p.wind; } || requires(const P& p) { p.waves; };
static_assert(!HasDamping<MinParams> && !HasEnvironment<MinParams>);
static_assert(!HasDamping<ProParams> && !HasEnvironment<ProParams>);
static_assert(!HasDamping<MinQParams> && !HasEnvironment<MinQParams>);

struct FirstPrinciples {
  FirstPrinciplesKind kind = FirstPrinciplesKind::None;
  MinParams min;
  ProParams pro;
  MinQParams minq;
  ship::ShipParams truth;  // Truth only
  double dt = 1.0;         // prediction step, s
  int substeps = 10;       // RK4 substeps per prediction step

  static FirstPrinciples none();
  static FirstPrinciples make_min(const ship::ShipParams& p, double dt = 1.0, int substeps = 10);
  static FirstPrinciples make_pro(const ship::ShipParams& p, double dt = 1.0, int substeps = 10);
  static FirstPrinciples make_truth(const ship::ShipParams& p, double dt = 1.0, int substeps = 10);
  static FirstPrinciples make_minq(const quad::QuadParams& p, double dt = 0.01, int substeps = 2);

  /// Builds the committed model of `kind` for `vehicle` from the truth
  /// parameters at the dataset step `dt`. Throws DomainError on a vehicle mismatch.
  static FirstPrinciples for_vehicle(FirstPrinciplesKind kind, Vehicle vehicle, double dt);

  /// Continuous-time derivative dz/dt of the model state.
  Vec derivative(const Vec& z, const Vec& c) const;

  /// One prediction step; `jacobian` (if given) receives dz_next/dz.
  Vec step(const Vec& z, const Vec& c, Mat* jacobian = nullptr) const;
};

/// Per-output features with their derivatives with respect to the stacked
/// state history [z_t; z_{t-1}; ...].
struct FeatureBlock {
  Vec value;
  Mat jacobian;
};

struct Regression {
  RegressionKind kind = RegressionKind::None;
  int lag = 1;               // QLag window; 1 for every other kind
  std::vector<Vec> weights;  // one weight vector per output dimension

  /// Number of past states/controls needed (row 0 = most recent).
  int history() const { return kind == RegressionKind::QLag ? lag : 1; }

  /// Per-output features. `states`/`controls` hold the history newest-first.
  /// Throws DomainError on insufficient history or a Hyd model on a non-ship state.
  std::vector<FeatureBlock> features(const Mat& states, const Mat& controls,
                                     bool with_jacobian) const;

  /// Prediction; `jacobians[k]` (if given) receives d/dz_{t-k}.
  Vec predict(const Mat& states, const Mat& controls, std::vector<Mat>* jacobians = nullptr) const;
};

/// Names of the hydrodynamic terms per output, in feature order.
std::vector<std::vector<std::string>> hyd_term_names();

/// Per-output feature vector of the regression kind (without Jacobian);
/// convenient for tests and reports.
std::vector<Vec> regression_features(RegressionKind kind, int lag, const Mat& states,
                                     const Mat& controls);

struct PhysicalStep {
  Vec z;           // z_phy
  Vec first;       // first-principles part (zero if None)
  Vec regression;  // regression part (zero if None)
  bool finite = true;
};

struct PhysicalModel {
  Vehicle vehicle = Vehicle::Ship;
  FirstPrinciples first;
  Regression regression;

  int history() const { return regression.history(); }
  Eigen::Index state_dim() const;

  /// z_phy from the newest-first state/control history. `jacobians[k]` (if
  /// given) receives dz_phy/dz_{t-k} for k < history(). Non-finite results
  /// are flagged, not thrown.
  PhysicalStep step(const Mat& states, const Mat& controls,
                    std::vector<Mat>* jacobians = nullptr) const;
};

/// Fits the regression part by least squares on the one-step residual of
/// `first` over every transition of the selected episodes (targets are
/// z_{t+1} itself when `first` is None). Normal equations per output with a
/// 1e-8 ridge; throws FitError when the column-scaled Gram matrix has a
/// condition number above 1e12.
Regression fit_regression(RegressionKind kind, const FirstPrinciples& first,
                          const std::vector<Episode>& episodes,
                          const std::vector<std::size_t>& which, int lag = 4);

/// Builds and fits a complete physical model.
PhysicalModel build_physical_model(Vehicle vehicle, FirstPrinciplesKind fp, RegressionKind reg,
                                   const std::vector<Episode>& episodes,
                                   const std::vector<std::size_t>& train, double dt, int lag = 4);

/// Newest-first history of `rows` states ending at index t (clamped at 0).
Mat history_rows(const Mat& series, Eigen::Index t, int rows);

/// Pure physical rollout over a sample's horizon (free-running, no corrector).
Mat physical_rollout(const PhysicalModel& model, const PredictionSample& sample);

}  // namespace resmotion
