#pragma once

#include <cstdint>

#include "resmotion/common.hpp"
#include "resmotion/integrators.hpp"

// Rigid-body quadcopter in "+" configuration. Inertial frame: z up.
// Rotor 1 front (+x), 2 left (+y), 3 back, 4 right. Euler angles ZYX.
namespace resmotion::quad {

/// z = [vx, vy, vz, p, q, r]
inline constexpr int kStateDim = 6;
/// Rotor speeds as fractions of maximum.
inline constexpr int kControlDim = 4;
/// [x, y, z, phi, theta, psi]
inline constexpr int kPoseDim = 6;

struct QuadParams {
  double mass = 1.0;
  Vec3 inertia{0.0082, 0.0082, 0.0149};  // diagonal, kg m^2
  double arm = 0.17;
  double thrust_coefficient = 6.0;   // N per rotor at full speed
  double torque_coefficient = 0.1;   // N m per rotor at full speed
  Vec3 drag{0.25, 0.25, 0.35};       // N / (m/s), inertial axes
  double gravity = kGravity;

  double max_speed = 50.0;
  double max_rate = 35.0;
  double max_tilt = 1.4;

  void validate() const;
  /// Rotor command giving thrust = weight with all rotors equal.
  double hover_command() const;
};

struct QuadState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();  // inertial
  Vec3 euler = Vec3::Zero();     // phi, theta, psi
  Vec3 rates = Vec3::Zero();     // body p, q, r

  using Vector = Eigen::Matrix<double, 12, 1>;
  Vector vector() const;
  static QuadState from_vector(const Vector& s);
};

/// Body-to-inertial rotation R = Rz(psi) Ry(theta) Rx(phi).
Mat3 rotation(const Vec3& euler);

/// Net inertial force: thrust along body z, gravity and linear drag.
Vec3 net_force(const QuadState& state, const Vec4& rotors, const QuadParams& params);

/// Body torques from the rotor speeds.
Vec3 rotor_torque(const Vec4& rotors, const QuadParams& params);

QuadState::Vector quad_derivative(const QuadState::Vector& s, const Vec4& rotors,
                                  const QuadParams& params);

/// Throws SimulationDivergence outside the flight envelope.
void check_envelope(const QuadState& state, const QuadParams& params, std::uint64_t seed, double t);

QuadState rk4_step(const QuadState& state, const Vec4& rotors, double dt, const QuadParams& params,
                   std::uint64_t seed = 0, double t = 0.0,
                   Rk4Stages<QuadState::Vector>* stages = nullptr);

/// Scripted "expert pilot": random attitude/yaw-rate/climb setpoints held
/// for random durations, tracked through a rate PD inner loop and a mixer.
class Pilot {
 public:
  Pilot(const QuadParams& params, std::uint64_t seed, double control_dt);

  /// Rotor commands for the current state; advances the setpoint script.
  Vec4 command(double t, const QuadState& state);

 private:
  void draw_setpoint(double t);

  QuadParams params_;
  Rng rng_;
  double dt_;
  double next_change_ = 0.0;
  double roll_ref_ = 0.0;
  double pitch_ref_ = 0.0;
  double yaw_rate_ref_ = 0.0;
  double climb_ref_ = 0.0;
  Vec3 previous_error_ = Vec3::Zero();
  bool first_ = true;
};

/// Rotor commands realising collective thrust and body torques.
Vec4 mix(double thrust, const Vec3& torque, const QuadParams& params);

}  // namespace resmotion::quad
