#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "resmotion/common.hpp"
#include "resmotion/integrators.hpp"
#include "resmotion/sea.hpp"

// 4-DOF (surge, sway, roll, yaw) maneuvering model of a twin-screw patrol
// vessel. Body frame: x forward, y starboard, z down. Roll positive
// starboard-down, yaw positive clockwise seen from above.
namespace resmotion::ship {

/// Position/attitude in the inertial frame.
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double phi = 0.0;
  double psi = 0.0;

  Vec4 vector() const { return {x, y, phi, psi}; }
  static Pose from_vector(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }
};

/// Velocities in the body frame.
struct BodyVelocity {
  double u = 0.0;
  double w = 0.0;
  double p = 0.0;
  double r = 0.0;

  Vec4 vector() const { return {u, w, p, r}; }
  static BodyVelocity from_vector(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }
};

/// Number of measured states z = [u, w, p, r, phi].
inline constexpr int kStateDim = 5;
/// Control layout: [n_1, n_2, delta_1, delta_2]; unit 1 is starboard.
inline constexpr int kControlDim = 4;
inline constexpr int kPoseDim = 4;

inline constexpr double kMaxRudder = deg2rad(35.0);

/// Clamps revolutions to [0, 1] and rudder angles to +-35 degrees.
Vec4 clamp_controls(const Vec4& control);

/// Parameters that are cheap to measure: mass, inertia, geometry and
/// hydrostatics. Used by the truth model and by the Min/Pro predictors.
struct RigidBody {
  Mat4 mass;          // M = M_RB + M_A, over (u, w, p, r)
  Mat4 mass_inverse;  // cached M^-1
  double m = 0.0;     // displacement mass, kg
  double x_g = 0.0;   // centre of gravity, m
  double z_g = 0.0;
  double roll_restoring = 0.0;  // G on phi, N m / rad
};

struct Damping {
  Mat4 linear;        // constant part
  Mat4 speed_scaled;  // multiplied by |u|
  Vec4 quadratic;     // diag(|v_i|) coefficients
};

struct Actuators {
  double thrust_coefficient = 0.0;  // N at full revolutions, u = 0
  double wake_fraction = 0.0;
  double pitch_speed = 0.0;  // m/s advance at full revolutions
  double rudder_lift = 0.0;  // N / (m/s)^2 per unit sin(delta)
  double slipstream = 0.0;   // (m/s)^2 added to rudder inflow at full revolutions
  double prop_y = 0.0;       // lateral offset of each unit, m
  double rudder_x = 0.0;     // m, negative aft
  double rudder_z = 0.0;     // m, positive below CG
};

/// Three-term Fourier wind coefficient curves over the relative wind angle
/// gamma (0 = head wind): C_X is a cosine series, C_Y, C_K, C_N sine series.
struct WindModel {
  double air_density = 1.225;
  double frontal_area = 0.0;
  double lateral_area = 0.0;
  double lateral_height = 0.0;  // roll lever of the lateral area, m
  double length = 0.0;
  std::array<double, 3> cx{};
  std::array<double, 3> cy{};
  std::array<double, 3> ck{};
  std::array<double, 3> cn{};
};

/// First-order wave force gains per metre of wave amplitude.
struct WaveGains {
  double surge = 0.0;
  double sway = 0.0;
  double roll = 0.0;
  double yaw = 0.0;
};

struct Envelope {
  double max_surge = 30.0;
  double max_sway = 10.0;
  double max_roll = 0.5 * kPi;
};

struct ShipParams {
  RigidBody rigid;
  Damping damping;
  Actuators actuators;
  WindModel wind;
  WaveGains waves;
  Envelope envelope;

  /// Committed ~52 m, ~360 t twin rudder-propeller patrol vessel.
  static ShipParams patrol_vessel();

  /// Throws DomainError unless M is symmetric positive definite, D is
  /// dissipative and the roll restoring coefficient is nonnegative.
  void validate() const;
};

/// J(eta): eta_dot = J(eta) v for the 4-DOF convention.
Mat4 kinematics_matrix(const Pose& pose);

template <class T>
Eigen::Matrix<T, 4, 1> coriolis_force(const RigidBody& rb, const Eigen::Matrix<T, 4, 1>& v) {
  const T& u = v[0];
  const T& w = v[1];
  const T& p = v[2];
  const T& r = v[3];
  Eigen::Matrix<T, 4, 1> f;
  f[0] = rb.m * rb.z_g * p * r - rb.m * rb.x_g * r * r - rb.m * w * r;
  f[1] = rb.m * u * r;
  f[2] = -rb.m * rb.z_g * u * r;
  f[3] = rb.m * rb.x_g * u * r;
  return f;
}

/// C_RB(v), skew-symmetric so that v' C_RB(v) v = 0.
Mat4 coriolis_matrix(const RigidBody& rb, const Vec4& v);

/// D(v) = D_l + |u| D_u + diag(q_i |v_i|).
Mat4 damping_matrix(const Damping& d, const Vec4& v);

/// Restoring force g(eta), acting on roll only.
template <class T>
Eigen::Matrix<T, 4, 1> restoring_force(const RigidBody& rb, const T& phi) {
  Eigen::Matrix<T, 4, 1> g;
  g << T(0.0), T(0.0), rb.roll_restoring * phi, T(0.0);
  return g;
}

/// Thrust and rudder forces of both rudder-propeller units.
template <class T>
Eigen::Matrix<T, 4, 1> propulsion_force(const Actuators& a, const Vec4& control,
                                        const Eigen::Matrix<T, 4, 1>& v) {
  using std::sin;
  const T& u = v[0];
  T surge = T(0.0);
  T lateral = T(0.0);
  T yaw_from_thrust = T(0.0);
  for (int unit = 0; unit < 2; ++unit) {
    const double n = control[unit];
    const double delta = control[2 + unit];
    const double side = unit == 0 ? a.prop_y : -a.prop_y;
    const T thrust =
        a.thrust_coefficient * n * std::abs(n) * (1.0 - a.wake_fraction * u / (n * a.pitch_speed + 1e-3));
    const T inflow_sq = u * u + a.slipstream * n * n;
    const T lift = -a.rudder_lift * inflow_sq * sin(delta);
    surge += thrust;
    lateral += lift;
    yaw_from_thrust += -side * thrust;
  }
  Eigen::Matrix<T, 4, 1> tau;
  tau << surge, lateral, -a.rudder_z * lateral, a.rudder_x * lateral + yaw_from_thrust;
  return tau;
}

/// Wind force from the relative wind and the Fourier coefficient curves.
Vec4 wind_force(const WindModel& wind, const SeaState& sea, const Pose& pose,
                const BodyVelocity& v);

/// Relative wind angle gamma (0 = wind from ahead) and squared relative speed.
std::pair<double, double> relative_wind(const SeaState& sea, const Pose& pose,
                                        const BodyVelocity& v);

/// First-order wave force: heading-dependent gains times a_i cos(w_i t + phase_i).
Vec4 wave_force(const WaveGains& gains, const SeaState& sea, const Pose& pose, double t);

/// tau_env = tau_wave + tau_wind.
Vec4 environment_forces(const SeaState& sea, const Pose& pose, const BodyVelocity& v, double t,
                        const ShipParams& params);

/// M^-1 (tau_control + tau_env - D(v) v - C_RB(v) v - g(eta)).
/// Throws SimulationDivergence on non-finite output.
Vec4 truth_acceleration(const BodyVelocity& v, const Pose& pose, const Vec4& tau_control,
                        const Vec4& tau_env, const ShipParams& params);

struct ShipState {
  Pose pose;
  BodyVelocity velocity;

  using Vector = Eigen::Matrix<double, 8, 1>;  // [x, y, phi, psi, u, w, p, r]
  Vector vector() const;
  static ShipState from_vector(const Vector& s);
};

/// Time derivative of the coupled kinematics/kinetics system.
ShipState::Vector ship_derivative(const ShipState::Vector& s, const Vec4& control,
                                  const SeaState& sea, double t, const ShipParams& params);

/// Throws SimulationDivergence when the state leaves the envelope.
void check_envelope(const ShipState& state, const Envelope& envelope, std::uint64_t seed, double t);

/// One RK4 step of the full truth model; environment forces are evaluated at
/// every stage time. Throws SimulationDivergence outside the envelope.
ShipState rk4_step(const ShipState& state, const Vec4& control, const SeaState& sea, double t,
                   double dt, const ShipParams& params, std::uint64_t seed = 0,
                   Rk4Stages<ShipState::Vector>* stages = nullptr);

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

}  // namespace resmotion::ship
