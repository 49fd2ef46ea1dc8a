#include "resmotion/ship.hpp"

#include <algorithm>
#include <cmath>

namespace resmotion::ship {

Vec4 clamp_controls(const Vec4& control) {
  Vec4 c = control;
  for (int i = 0; i < 2; ++i) {
    c[i] = std::clamp(c[i], 0.0, 1.0);
    c[2 + i] = std::clamp(c[2 + i], -kMaxRudder, kMaxRudder);
  }
  return c;
}

ShipParams ShipParams::patrol_vessel() {
  ShipParams p;

  const double m = 360.0e3;
  const double beam = 8.6;
  const double length = 52.0;
  const double ixx = m * std::pow(0.35 * beam, 2);
  const double izz = m * std::pow(0.25 * length, 2);

  RigidBody& rb = p.rigid;
  rb.m = m;
  rb.x_g = -0.5;
  rb.z_g = -0.6;
  Mat4 m_rb;
  m_rb << m, 0.0, 0.0, 0.0,
          0.0, m, -m * rb.z_g, m * rb.x_g,
          0.0, -m * rb.z_g, ixx, 0.0,
          0.0, m * rb.x_g, 0.0, izz;
  Mat4 m_a;
  m_a << 0.05 * m, 0.0, 0.0, 0.0,
         0.0, 0.6 * m, 1.0e5, 5.0e5,
         0.0, 1.0e5, 0.25 * ixx, 0.0,
         0.0, 5.0e5, 0.0, 0.5 * izz;
  rb.mass = m_rb + m_a;
  rb.mass_inverse = rb.mass.inverse();
  rb.roll_restoring = m * kGravity * 0.8;  // GM_T = 0.8 m

  Damping& d = p.damping;
  d.linear = Vec4(1.0e4, 3.0e4, 3.0e5, 3.0e6).asDiagonal();
  d.speed_scaled << 0.0, 0.0, 0.0, 0.0,
                    0.0, 2.5e4, 0.0, 1.0e5,
                    0.0, 0.0, 4.0e4, 0.0,
                    0.0, 1.0e5, 0.0, 2.0e6;
  d.quadratic = Vec4(2.5e3, 1.5e5, 1.0e6, 8.0e8);

  Actuators& a = p.actuators;
  a.thrust_coefficient = 2.5e5;
  a.wake_fraction = 0.5;
  a.pitch_speed = 15.0;
  a.rudder_lift = 800.0;
  a.slipstream = 100.0;
  a.prop_y = 3.0;
  a.rudder_x = -22.0;
  a.rudder_z = 2.0;

  WindModel& w = p.wind;
  w.frontal_area = 90.0;
  w.lateral_area = 320.0;
  w.lateral_height = 4.0;
  w.length = length;
  w.cx = {-0.65, 0.05, -0.10};
  w.cy = {-0.80, -0.05, 0.05};
  w.ck = {-0.60, -0.02, 0.04};
  w.cn = {-0.05, -0.10, 0.02};

  p.waves = {2.0e4, 1.2e5, 2.5e5, 8.0e5};
  return p;
}

void ShipParams::validate() const {
  const Mat4& mass = rigid.mass;
  if ((mass - mass.transpose()).norm() > 1e-9 * mass.norm()) {
    throw DomainError("ShipParams: mass matrix not symmetric");
  }
  if (Eigen::LLT<Mat4>(mass).info() != Eigen::Success) {
    throw DomainError("ShipParams: mass matrix not positive definite");
  }
  if ((damping.linear - damping.linear.transpose()).norm() > 0.0 ||
      Eigen::LLT<Mat4>(damping.linear).info() != Eigen::Success) {
    throw DomainError("ShipParams: linear damping must be symmetric positive definite");
  }
  Eigen::SelfAdjointEigenSolver<Mat4> speed(damping.speed_scaled);
  if ((damping.speed_scaled - damping.speed_scaled.transpose()).norm() > 0.0 ||
      speed.eigenvalues().minCoeff() < 0.0) {
    throw DomainError("ShipParams: speed-scaled damping must be symmetric positive semi-definite");
  }
  if ((damping.quadratic.array() < 0.0).any()) {
    throw DomainError("ShipParams: quadratic damping coefficients must be nonnegative");
  }
  if (rigid.roll_restoring < 0.0) {
    throw DomainError("ShipParams: roll restoring coefficient must be nonnegative");
  }
}

Mat4 kinematics_matrix(const Pose& pose) {
  const double cpsi = std::cos(pose.psi);
  const double spsi = std::sin(pose.psi);
  const double cphi = std::cos(pose.phi);
  Mat4 j = Mat4::Zero();
  j(0, 0) = cpsi;
  j(0, 1) = -cphi * spsi;
  j(1, 0) = spsi;
  j(1, 1) = cphi * cpsi;
  j(2, 2) = 1.0;
  j(3, 3) = cphi;
  return j;
}

Mat4 coriolis_matrix(const RigidBody& rb, const Vec4& v) {
  const double u = v[0];
  const double w = v[1];
  const double r = v[3];
  const double m = rb.m;
  Mat4 c = Mat4::Zero();
  c(0, 2) = m * rb.z_g * r;
  c(0, 3) = -m * (rb.x_g * r + w);
  c(1, 3) = m * u;
  c(2, 0) = -m * rb.z_g * r;
  c(3, 0) = m * (rb.x_g * r + w);
  c(3, 1) = -m * u;
  return c;
}

Mat4 damping_matrix(const Damping& d, const Vec4& v) {
  Mat4 out = d.linear + std::abs(v[0]) * d.speed_scaled;
  for (int i = 0; i < 4; ++i) {
    out(i, i) += d.quadratic[i] * std::abs(v[i]);
  }
  return out;
}

std::pair<double, double> relative_wind(const SeaState& sea, const Pose& pose,
                                        const BodyVelocity& v) {
  const double rel = sea.wind_direction - pose.psi;
  const double u_air = sea.wind_speed * std::cos(rel) - v.u;
  const double v_air = sea.wind_speed * std::sin(rel) - v.w;
  const double speed_sq = u_air * u_air + v_air * v_air;
  if (speed_sq == 0.0) {
    return {0.0, 0.0};
  }
  return {std::atan2(-v_air, -u_air), speed_sq};
}

namespace {

double cosine_series(const std::array<double, 3>& a, double gamma) {
  return a[0] * std::cos(gamma) + a[1] * std::cos(2.0 * gamma) + a[2] * std::cos(3.0 * gamma);
}

double sine_series(const std::array<double, 3>& a, double gamma) {
  return a[0] * std::sin(gamma) + a[1] * std::sin(2.0 * gamma) + a[2] * std::sin(3.0 * gamma);
}

}  // namespace

Vec4 wind_force(const WindModel& wind, const SeaState& sea, const Pose& pose,
                const BodyVelocity& v) {
  const auto [gamma, speed_sq] = relative_wind(sea, pose, v);
  if (speed_sq == 0.0) {
    return Vec4::Zero();
  }
  const double q = 0.5 * wind.air_density * speed_sq;
  return {q * cosine_series(wind.cx, gamma) * wind.frontal_area,
          q * sine_series(wind.cy, gamma) * wind.lateral_area,
          q * sine_series(wind.ck, gamma) * wind.lateral_area * wind.lateral_height,
          q * sine_series(wind.cn, gamma) * wind.lateral_area * wind.length};
}

Vec4 wave_force(const WaveGains& gains, const SeaState& sea, const Pose& pose, double t) {
  Vec4 tau = Vec4::Zero();
  for (const auto& c : sea.components) {
    const double heading = c.direction - pose.psi;
    const double elevation = c.amplitude * std::cos(c.frequency * t + c.phase);
    const double s = std::sin(heading);
    tau[0] += gains.surge * std::cos(heading) * elevation;
    tau[1] += gains.sway * s * elevation;
    tau[2] += gains.roll * s * elevation;
    tau[3] += gains.yaw * s * elevation;
  }
  return tau;
}

Vec4 environment_forces(const SeaState& sea, const Pose& pose, const BodyVelocity& v, double t,
                        const ShipParams& params) {
  return wave_force(params.waves, sea, pose, t) + wind_force(params.wind, sea, pose, v);
}

Vec4 truth_acceleration(const BodyVelocity& v, const Pose& pose, const Vec4& tau_control,
                        const Vec4& tau_env, const ShipParams& params) {
  const Vec4 nu = v.vector();
  const Vec4 forces = tau_control + tau_env - damping_matrix(params.damping, nu) * nu -
                      coriolis_force<double>(params.rigid, nu) -
                      restoring_force<double>(params.rigid, pose.phi);
  Vec4 acc = params.rigid.mass_inverse * forces;
  if (!acc.allFinite()) {
    throw SimulationDivergence("non-finite ship acceleration", 0, 0.0);
  }
  return acc;
}

ShipState::Vector ShipState::vector() const {
  Vector s;
  s << pose.x, pose.y, pose.phi, pose.psi, velocity.u, velocity.w, velocity.p, velocity.r;
  return s;
}

ShipState ShipState::from_vector(const Vector& s) {
  return {Pose{s[0], s[1], s[2], s[3]}, BodyVelocity{s[4], s[5], s[6], s[7]}};
}

ShipState::Vector ship_derivative(const ShipState::Vector& s, const Vec4& control,
                                  const SeaState& sea, double t, const ShipParams& params) {
  const ShipState state = ShipState::from_vector(s);
  const Vec4 nu = s.tail<4>();
  const Vec4 tau_control = propulsion_force<double>(params.actuators, control, nu);
  const Vec4 tau_env = environment_forces(sea, state.pose, state.velocity, t, params);
  ShipState::Vector ds;
  ds.head<4>() = kinematics_matrix(state.pose) * nu;
  ds.tail<4>() = truth_acceleration(state.velocity, state.pose, tau_control, tau_env, params);
  return ds;
}

void check_envelope(const ShipState& state, const Envelope& envelope, std::uint64_t seed,
                    double t) {
  const ShipState::Vector s = state.vector();
  if (!s.allFinite()) {
    throw SimulationDivergence("non-finite ship state", seed, t);
  }
  if (std::abs(state.velocity.u) >= envelope.max_surge ||
      std::abs(state.velocity.w) >= envelope.max_sway ||
      std::abs(state.pose.phi) >= envelope.max_roll) {
    throw SimulationDivergence("ship state left the operating envelope", seed, t);
  }
}

ShipState rk4_step(const ShipState& state, const Vec4& control, const SeaState& sea, double t,
                   double dt, const ShipParams& params, std::uint64_t seed,
                   Rk4Stages<ShipState::Vector>* stages) {
  if (!(dt > 0.0)) {
    throw DomainError("rk4_step: dt must be positive");
  }
  ShipState::Vector next;
  try {
    next = resmotion::rk4_step(
        state.vector(), t, dt,
        [&](double time, const ShipState::Vector& s) {
          return ship_derivative(s, control, sea, time, params);
        },
        stages);
  } catch (const SimulationDivergence&) {
    throw SimulationDivergence("non-finite ship acceleration", seed, t);
  }
  ShipState out = ShipState::from_vector(next);
  check_envelope(out, params.envelope, seed, t + dt);
  return out;
}

double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * kPi);
  if (w <= -kPi) {
    w += 2.0 * kPi;
  }
  return w;
}

}  // namespace resmotion::ship
