#include "resmotion/quad.hpp"

#include <algorithm>
#include <cmath>

namespace resmotion::quad {

void QuadParams::validate() const {
  if (!(mass > 0.0) || !(inertia.array() > 0.0).all() || !(thrust_coefficient > 0.0) ||
      !(arm > 0.0)) {
    throw DomainError("QuadParams: mass, inertia, arm and thrust coefficient must be positive");
  }
}

double QuadParams::hover_command() const {
  return std::sqrt(mass * gravity / (4.0 * thrust_coefficient));
}

QuadState::Vector QuadState::vector() const {
  Vector s;
  s << position, velocity, euler, rates;
  return s;
}

QuadState QuadState::from_vector(const Vector& s) {
  return {s.segment<3>(0), s.segment<3>(3), s.segment<3>(6), s.segment<3>(9)};
}

Mat3 rotation(const Vec3& euler) {
  return (Eigen::AngleAxisd(euler[2], Vec3::UnitZ()) * Eigen::AngleAxisd(euler[1], Vec3::UnitY()) *
          Eigen::AngleAxisd(euler[0], Vec3::UnitX()))
      .toRotationMatrix();
}

Vec3 net_force(const QuadState& state, const Vec4& rotors, const QuadParams& params) {
  const double thrust = params.thrust_coefficient * rotors.squaredNorm();
  return rotation(state.euler) * Vec3(0.0, 0.0, thrust) -
         Vec3(0.0, 0.0, params.mass * params.gravity) -
         params.drag.cwiseProduct(state.velocity);
}

Vec3 rotor_torque(const Vec4& rotors, const QuadParams& params) {
  const Vec4 t = params.thrust_coefficient * rotors.cwiseProduct(rotors);
  const double yaw_ratio = params.torque_coefficient / params.thrust_coefficient;
  return {params.arm * (t[1] - t[3]), params.arm * (t[2] - t[0]),
          yaw_ratio * (t[0] - t[1] + t[2] - t[3])};
}

QuadState::Vector quad_derivative(const QuadState::Vector& s, const Vec4& rotors,
                                  const QuadParams& params) {
  const QuadState state = QuadState::from_vector(s);
  const double phi = state.euler[0];
  const double theta = state.euler[1];
  const Vec3& w = state.rates;

  QuadState::Vector ds;
  ds.segment<3>(0) = state.velocity;
  ds.segment<3>(3) = net_force(state, rotors, params) / params.mass;
  const double sphi = std::sin(phi);
  const double cphi = std::cos(phi);
  const double ctheta = std::cos(theta);
  const double ttheta = std::tan(theta);
  ds[6] = w[0] + (w[1] * sphi + w[2] * cphi) * ttheta;
  ds[7] = w[1] * cphi - w[2] * sphi;
  ds[8] = (w[1] * sphi + w[2] * cphi) / ctheta;
  const Vec3 iw = params.inertia.cwiseProduct(w);
  ds.segment<3>(9) = (rotor_torque(rotors, params) - w.cross(iw)).cwiseQuotient(params.inertia);
  return ds;
}

void check_envelope(const QuadState& state, const QuadParams& params, std::uint64_t seed,
                    double t) {
  if (!state.vector().allFinite()) {
    throw SimulationDivergence("non-finite quadcopter state", seed, t);
  }
  if (state.velocity.norm() >= params.max_speed || state.rates.norm() >= params.max_rate ||
      std::abs(state.euler[0]) >= params.max_tilt || std::abs(state.euler[1]) >= params.max_tilt) {
    throw SimulationDivergence("quadcopter left the flight envelope", seed, t);
  }
}

QuadState rk4_step(const QuadState& state, const Vec4& rotors, double dt, const QuadParams& params,
                   std::uint64_t seed, double t, Rk4Stages<QuadState::Vector>* stages) {
  if (!(dt > 0.0)) {
    throw DomainError("quad rk4_step: dt must be positive");
  }
  const auto next = resmotion::rk4_step(
      state.vector(), t, dt,
      [&](double, const QuadState::Vector& s) { return quad_derivative(s, rotors, params); },
      stages);
  QuadState out = QuadState::from_vector(next);
  check_envelope(out, params, seed, t + dt);
  return out;
}

Vec4 mix(double thrust, const Vec3& torque, const QuadParams& params) {
  const double ratio = params.torque_coefficient / params.thrust_coefficient;
  const double base = 0.25 * thrust;
  const double roll = torque[0] / (2.0 * params.arm);
  const double pitch = torque[1] / (2.0 * params.arm);
  const double yaw = torque[2] / (4.0 * ratio);
  const Vec4 rotor_thrust(base - pitch + yaw, base + roll - yaw, base + pitch + yaw,
                          base - roll - yaw);
  Vec4 out;
  for (int i = 0; i < 4; ++i) {
    out[i] = std::sqrt(std::clamp(rotor_thrust[i] / params.thrust_coefficient, 0.0, 1.0));
  }
  return out;
}

Pilot::Pilot(const QuadParams& params, std::uint64_t seed, double control_dt)
    : params_(params), rng_(seed), dt_(control_dt) {}

void Pilot::draw_setpoint(double t) {
  roll_ref_ = uniform(rng_, -0.5, 0.5);
  pitch_ref_ = uniform(rng_, -0.5, 0.5);
  yaw_rate_ref_ = uniform(rng_, -2.0, 2.0);
  climb_ref_ = uniform(rng_, -1.5, 1.5);
  next_change_ = t + uniform(rng_, 0.2, 1.0);
}

Vec4 Pilot::command(double t, const QuadState& state) {
  if (t >= next_change_) {
    draw_setpoint(t);
  }
  constexpr double kVelocityGain = 0.1;
  constexpr double kAttitudeGain = 6.0;
  constexpr double kRateP = 20.0;
  constexpr double kRateD = 0.05;
  constexpr double kClimbGain = 3.0;

  const double psi = state.euler[2];
  const double v_forward = std::cos(psi) * state.velocity[0] + std::sin(psi) * state.velocity[1];
  const double v_left = -std::sin(psi) * state.velocity[0] + std::cos(psi) * state.velocity[1];
  const double roll_des = std::clamp(roll_ref_ + kVelocityGain * v_left, -0.6, 0.6);
  const double pitch_des = std::clamp(pitch_ref_ - kVelocityGain * v_forward, -0.6, 0.6);

  const Vec3 rate_ref(kAttitudeGain * (roll_des - state.euler[0]),
                      kAttitudeGain * (pitch_des - state.euler[1]), yaw_rate_ref_);
  const Vec3 error = rate_ref - state.rates;
  const Vec3 error_rate = first_ ? Vec3::Zero() : Vec3((error - previous_error_) / dt_);
  previous_error_ = error;
  first_ = false;
  const Vec3 torque = params_.inertia.cwiseProduct(kRateP * error + kRateD * error_rate);

  const double tilt = std::max(std::cos(state.euler[0]) * std::cos(state.euler[1]), 0.5);
  const double thrust = std::clamp(
      params_.mass * (params_.gravity + kClimbGain * (climb_ref_ - state.velocity[2])) / tilt, 0.0,
      3.6 * params_.thrust_coefficient);
  return mix(thrust, torque, params_);
}

}  // namespace resmotion::quad
