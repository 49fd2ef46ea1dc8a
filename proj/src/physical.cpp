#include "resmotion/physical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <unsupported/Eigen/AutoDiff>

namespace resmotion {

std::string to_string(FirstPrinciplesKind k) {
  switch (k) {
    case FirstPrinciplesKind::None: return "None";
    case FirstPrinciplesKind::Min: return "Min";
    case FirstPrinciplesKind::Pro: return "Pro";
    case FirstPrinciplesKind::MinQ: return "MinQ";
    case FirstPrinciplesKind::Truth: return "Truth";
  }
  return "?";
}

std::string to_string(RegressionKind k) {
  switch (k) {
    case RegressionKind::None: return "None";
    case RegressionKind::Lin: return "Lin";
    case RegressionKind::Hyd: return "Hyd";
    case RegressionKind::Qua: return "Qua";
    case RegressionKind::QLag: return "QLag";
    case RegressionKind::Bias: return "Bias";
  }
  return "?";
}

FirstPrinciplesKind parse_first_principles(std::string_view s) {
  for (auto k : {FirstPrinciplesKind::None, FirstPrinciplesKind::Min, FirstPrinciplesKind::Pro,
                 FirstPrinciplesKind::MinQ, FirstPrinciplesKind::Truth}) {
    if (s == to_string(k)) {
      return k;
    }
  }
  throw DomainError("unknown first-principles model '" + std::string(s) + "'");
}

RegressionKind parse_regression(std::string_view s) {
  for (auto k : {RegressionKind::None, RegressionKind::Lin, RegressionKind::Hyd,
                 RegressionKind::Qua, RegressionKind::QLag, RegressionKind::Bias}) {
    if (s == to_string(k)) {
      return k;
    }
  }
  throw DomainError("unknown regression model '" + std::string(s) + "'");
}

// ---------------------------------------------------------------- first principles

namespace {

template <class T>
using ShipZ = Eigen::Matrix<T, ship::kStateDim, 1>;
template <class T>
using QuadZ = Eigen::Matrix<T, quad::kStateDim, 1>;
using ShipAd = Eigen::AutoDiffScalar<Eigen::Matrix<double, ship::kStateDim, 1>>;
using QuadAd = Eigen::AutoDiffScalar<Eigen::Matrix<double, quad::kStateDim, 1>>;

template <class T>
Eigen::Matrix<T, 4, 1> damping_force(const ship::Damping& d, const Eigen::Matrix<T, 4, 1>& v) {
  using std::abs;
  Eigen::Matrix<T, 4, 4> m = d.linear.cast<T>() + abs(v[0]) * d.speed_scaled.cast<T>();
  for (int i = 0; i < 4; ++i) {
    m(i, i) += d.quadratic[i] * abs(v[i]);
  }
  return m * v;
}

template <class T>
ShipZ<T> ship_derivative_fp(const FirstPrinciples& fp, const ShipZ<T>& z, const Vec4& c) {
  const ship::RigidBody& rb = fp.kind == FirstPrinciplesKind::Min   ? fp.min.rigid
                              : fp.kind == FirstPrinciplesKind::Pro ? fp.pro.rigid
                                                                    : fp.truth.rigid;
  const Eigen::Matrix<T, 4, 1> v = z.template head<4>();
  Eigen::Matrix<T, 4, 1> force = Eigen::Matrix<T, 4, 1>::Zero();
  if (fp.kind == FirstPrinciplesKind::Pro) {
    force = ship::propulsion_force<T>(fp.pro.actuators, c, v);
  } else if (fp.kind == FirstPrinciplesKind::Truth) {
    force = ship::propulsion_force<T>(fp.truth.actuators, c, v) - damping_force<T>(fp.truth.damping, v);
  }
  force = force - ship::coriolis_force<T>(rb, v) - ship::restoring_force<T>(rb, z[4]);
  ShipZ<T> dz;
  dz.template head<4>() = rb.mass_inverse.cast<T>() * force;
  dz[4] = z[2];
  return dz;
}

template <class T>
QuadZ<T> quad_derivative_fp(const MinQParams& p, const QuadZ<T>& z) {
  QuadZ<T> dz;
  dz[0] = T(0.0);
  dz[1] = T(0.0);
  dz[2] = T(-p.gravity);
  const Eigen::Matrix<T, 3, 1> w = z.template tail<3>();
  const Eigen::Matrix<T, 3, 1> iw = p.inertia.cast<T>().cwiseProduct(w);
  dz.template tail<3>() = (-w.cross(iw)).cwiseQuotient(p.inertia.cast<T>());
  return dz;
}

template <class Z, class F>
Z integrate_fp(const Z& z, double dt, int substeps, F&& f) {
  const double h = dt / substeps;
  Z y = z;
  for (int i = 0; i < substeps; ++i) {
    y = rk4_step(y, 0.0, h, [&](double, const Z& s) { return Z(f(s)); });
  }
  return y;
}

}  // namespace

FirstPrinciples FirstPrinciples::none() { return {}; }

FirstPrinciples FirstPrinciples::make_min(const ship::ShipParams& p, double dt, int substeps) {
  FirstPrinciples fp;
  fp.kind = FirstPrinciplesKind::Min;
  fp.min.rigid = p.rigid;
  fp.dt = dt;
  fp.substeps = substeps;
  return fp;
}

FirstPrinciples FirstPrinciples::make_pro(const ship::ShipParams& p, double dt, int substeps) {
  FirstPrinciples fp;
  fp.kind = FirstPrinciplesKind::Pro;
  fp.pro.rigid = p.rigid;
  fp.pro.actuators = p.actuators;
  fp.dt = dt;
  fp.substeps = substeps;
  return fp;
}

FirstPrinciples FirstPrinciples::make_truth(const ship::ShipParams& p, double dt, int substeps) {
  FirstPrinciples fp;
  fp.kind = FirstPrinciplesKind::Truth;
  fp.truth = p;
  fp.dt = dt;
  fp.substeps = substeps;
  return fp;
}

FirstPrinciples FirstPrinciples::make_minq(const quad::QuadParams& p, double dt, int substeps) {
  FirstPrinciples fp;
  fp.kind = FirstPrinciplesKind::MinQ;
  fp.minq.mass = p.mass;
  fp.minq.inertia = p.inertia;
  fp.minq.gravity = p.gravity;
  fp.dt = dt;
  fp.substeps = substeps;
  return fp;
}

FirstPrinciples FirstPrinciples::for_vehicle(FirstPrinciplesKind kind, Vehicle vehicle,
                                             double dt) {
  const bool ship_kind = kind == FirstPrinciplesKind::Min || kind == FirstPrinciplesKind::Pro ||
                         kind == FirstPrinciplesKind::Truth;
  if (kind == FirstPrinciplesKind::None) {
    FirstPrinciples fp;
    fp.dt = dt;
    return fp;
  }
  if (ship_kind != (vehicle == Vehicle::Ship)) {
    throw DomainError(to_string(kind) + " does not apply to vehicle " + to_string(vehicle));
  }
  // 0.1 s substeps for the ship, 5 ms for the quadcopter.
  const int substeps = std::max(1, static_cast<int>(std::lround(dt / (ship_kind ? 0.1 : 0.005))));
  switch (kind) {
    case FirstPrinciplesKind::Min: return make_min(ship::ShipParams::patrol_vessel(), dt, substeps);
    case FirstPrinciplesKind::Pro: return make_pro(ship::ShipParams::patrol_vessel(), dt, substeps);
    case FirstPrinciplesKind::Truth: return make_truth(ship::ShipParams::patrol_vessel(), dt, substeps);
    default: return make_minq(quad::QuadParams{}, dt, substeps);
  }
}

Vec FirstPrinciples::derivative(const Vec& z, const Vec& c) const {
  switch (kind) {
    case FirstPrinciplesKind::None:
      return Vec::Zero(z.size());
    case FirstPrinciplesKind::MinQ:
      return quad_derivative_fp<double>(minq, QuadZ<double>(z));
    default:
      return ship_derivative_fp<double>(*this, ShipZ<double>(z), Vec4(c));
  }
}

Vec FirstPrinciples::step(const Vec& z, const Vec& c, Mat* jacobian) const {
  if (kind == FirstPrinciplesKind::None) {
    if (jacobian != nullptr) {
      *jacobian = Mat::Zero(z.size(), z.size());
    }
    return Vec::Zero(z.size());
  }
  if (kind == FirstPrinciplesKind::MinQ) {
    if (z.size() != quad::kStateDim) {
      throw DomainError("MinQ expects a 6-dimensional state");
    }
    if (jacobian == nullptr) {
      return integrate_fp(QuadZ<double>(z), dt, substeps,
                          [&](const QuadZ<double>& s) { return quad_derivative_fp<double>(minq, s); });
    }
    QuadZ<QuadAd> za;
    for (int i = 0; i < quad::kStateDim; ++i) {
      za[i] = QuadAd(z[i], quad::kStateDim, i);
    }
    const QuadZ<QuadAd> out = integrate_fp(
        za, dt, substeps, [&](const QuadZ<QuadAd>& s) { return quad_derivative_fp<QuadAd>(minq, s); });
    Vec value(quad::kStateDim);
    jacobian->resize(quad::kStateDim, quad::kStateDim);
    for (int i = 0; i < quad::kStateDim; ++i) {
      value[i] = out[i].value();
      jacobian->row(i) = out[i].derivatives().transpose();
    }
    return value;
  }
  if (z.size() != ship::kStateDim || c.size() != ship::kControlDim) {
    throw DomainError("ship first-principles models expect z in R^5 and c in R^4");
  }
  const Vec4 c4 = c;
  if (jacobian == nullptr) {
    return integrate_fp(ShipZ<double>(z), dt, substeps,
                        [&](const ShipZ<double>& s) { return ship_derivative_fp<double>(*this, s, c4); });
  }
  ShipZ<ShipAd> za;
  for (int i = 0; i < ship::kStateDim; ++i) {
    za[i] = ShipAd(z[i], ship::kStateDim, i);
  }
  const ShipZ<ShipAd> out = integrate_fp(
      za, dt, substeps, [&](const ShipZ<ShipAd>& s) { return ship_derivative_fp<ShipAd>(*this, s, c4); });
  Vec value(ship::kStateDim);
  jacobian->resize(ship::kStateDim, ship::kStateDim);
  for (int i = 0; i < ship::kStateDim; ++i) {
    value[i] = out[i].value();
    jacobian->row(i) = out[i].derivatives().transpose();
  }
  return value;
}

// ---------------------------------------------------------------- regression

namespace {

// Hydrodynamic terms of one output; z = [u, w, p, r, phi].
template <class T>
std::vector<T> hyd_terms(int output, const ShipZ<T>& z) {
  using std::abs;
  const T& u = z[0];
  const T& w = z[1];
  const T& p = z[2];
  const T& r = z[3];
  const T& phi = z[4];
  switch (output) {
    case 0: return {u, abs(u) * u, w * r};
    case 1: return {w, abs(u) * w, u * r, abs(w) * w, abs(r) * w, abs(w) * r, abs(u * w) * phi,
                    u * u * phi};
    case 2: return {p};
    case 3: return {r, abs(u) * w, abs(w) * r, abs(u) * r, abs(r) * r, abs(u * phi) * phi,
                    abs(r) * u * phi};
    default: return {p, phi};
  }
}

void require_history(const Mat& states, const Mat& controls, int rows) {
  if (states.rows() < rows || controls.rows() < rows) {
    throw DomainError("regression features: history of " + std::to_string(rows) +
                      " steps required, got " + std::to_string(states.rows()));
  }
}

}  // namespace

std::vector<std::vector<std::string>> hyd_term_names() {
  return {{"u", "|u|u", "w*r"},
          {"w", "|u|w", "u*r", "|w|w", "|r|w", "|w|r", "|u*w|phi", "u^2*phi"},
          {"p"},
          {"r", "|u|w", "|w|r", "|u|r", "|r|r", "|u*phi|phi", "|r|u*phi"},
          {"p", "phi"}};
}

std::vector<FeatureBlock> Regression::features(const Mat& states, const Mat& controls,
                                               bool with_jacobian) const {
  const int h = history();
  require_history(states, controls, h);
  const Eigen::Index nz = states.cols();
  const Eigen::Index nc = controls.cols();
  const Vec z = states.row(0).transpose();
  const Vec c = controls.row(0).transpose();
  std::vector<FeatureBlock> blocks;

  auto finish = [&](FeatureBlock& b) {
    if (!with_jacobian) {
      b.jacobian.resize(0, 0);
    }
    blocks.push_back(std::move(b));
  };

  switch (kind) {
    case RegressionKind::None:
      break;
    case RegressionKind::Bias: {
      FeatureBlock b{Vec::Ones(1), Mat::Zero(1, nz)};
      finish(b);
      break;
    }
    case RegressionKind::Lin: {
      FeatureBlock b;
      b.value.resize(nc + nz + 1);
      b.value << c, z, 1.0;
      if (with_jacobian) {
        b.jacobian = Mat::Zero(b.value.size(), nz);
        b.jacobian.block(nc, 0, nz, nz).setIdentity();
      }
      finish(b);
      break;
    }
    case RegressionKind::Qua: {
      FeatureBlock b;
      b.value.resize(2 * (nc + nz) + 1);
      b.value << c, z, c.cwiseProduct(c), z.cwiseProduct(z), 1.0;
      if (with_jacobian) {
        b.jacobian = Mat::Zero(b.value.size(), nz);
        b.jacobian.block(nc, 0, nz, nz).setIdentity();
        b.jacobian.block(2 * nc + nz, 0, nz, nz) = (2.0 * z).asDiagonal();
      }
      finish(b);
      break;
    }
    case RegressionKind::QLag: {
      FeatureBlock b;
      b.value.resize(h * (nz + nc) + nc + 1);
      if (with_jacobian) {
        b.jacobian = Mat::Zero(b.value.size(), h * nz);
      }
      // Oldest first: z_{t-h+1}, ..., z_t, c_{t-h+1}, ..., c_t, c_t^2, 1.
      for (int j = 0; j < h; ++j) {
        const int age = h - 1 - j;
        b.value.segment(j * nz, nz) = states.row(age).transpose();
        b.value.segment(h * nz + j * nc, nc) = controls.row(age).transpose();
        if (with_jacobian) {
          b.jacobian.block(j * nz, age * nz, nz, nz).setIdentity();
        }
      }
      b.value.segment(h * (nz + nc), nc) = c.cwiseProduct(c);
      b.value[b.value.size() - 1] = 1.0;
      finish(b);
      break;
    }
    case RegressionKind::Hyd: {
      if (nz != ship::kStateDim) {
        throw DomainError("Hyd features are defined for the ship state only");
      }
      ShipZ<ShipAd> za;
      for (int i = 0; i < ship::kStateDim; ++i) {
        za[i] = ShipAd(z[i], ship::kStateDim, i);
      }
      for (int out = 0; out < ship::kStateDim; ++out) {
        const auto terms = hyd_terms<ShipAd>(out, za);
        const auto nt = static_cast<Eigen::Index>(terms.size());
        FeatureBlock b;
        b.value.resize(nt + nc + 1);
        b.jacobian = Mat::Zero(b.value.size(), nz);
        for (Eigen::Index k = 0; k < nt; ++k) {
          b.value[k] = terms[static_cast<std::size_t>(k)].value();
          b.jacobian.row(k) = terms[static_cast<std::size_t>(k)].derivatives().transpose();
        }
        b.value.segment(nt, nc) = c;
        b.value[nt + nc] = 1.0;
        finish(b);
      }
      break;
    }
  }
  return blocks;
}

Vec Regression::predict(const Mat& states, const Mat& controls, std::vector<Mat>* jacobians) const {
  const Eigen::Index nz = states.cols();
  const int h = history();
  if (jacobians != nullptr) {
    jacobians->assign(static_cast<std::size_t>(h), Mat::Zero(nz, nz));
  }
  if (kind == RegressionKind::None) {
    return Vec::Zero(nz);
  }
  if (static_cast<Eigen::Index>(weights.size()) != nz) {
    throw DomainError("regression weights do not match the state dimension");
  }
  const auto blocks = features(states, controls, jacobians != nullptr);
  Vec out(nz);
  for (Eigen::Index i = 0; i < nz; ++i) {
    const FeatureBlock& b = blocks.size() == 1 ? blocks.front() : blocks[static_cast<std::size_t>(i)];
    const Vec& w = weights[static_cast<std::size_t>(i)];
    if (w.size() != b.value.size()) {
      throw DomainError("regression weight length does not match the feature length");
    }
    out[i] = w.dot(b.value);
    if (jacobians != nullptr) {
      const Eigen::RowVectorXd row = w.transpose() * b.jacobian;
      for (int k = 0; k < h; ++k) {
        (*jacobians)[static_cast<std::size_t>(k)].row(i) = row.segment(k * nz, nz);
      }
    }
  }
  return out;
}

std::vector<Vec> regression_features(RegressionKind kind, int lag, const Mat& states,
                                     const Mat& controls) {
  Regression r;
  r.kind = kind;
  r.lag = kind == RegressionKind::QLag ? lag : 1;
  std::vector<Vec> out;
  for (auto& b : r.features(states, controls, false)) {
    out.push_back(std::move(b.value));
  }
  return out;
}

// ---------------------------------------------------------------- composite model

Eigen::Index PhysicalModel::state_dim() const { return layout(vehicle).state_dim; }

PhysicalStep PhysicalModel::step(const Mat& states, const Mat& controls,
                                 std::vector<Mat>* jacobians) const {
  const Eigen::Index nz = states.cols();
  PhysicalStep s;
  const Vec z = states.row(0).transpose();
  const Vec c = controls.row(0).transpose();
  Mat fp_jac;
  s.first = first.step(z, c, jacobians != nullptr ? &fp_jac : nullptr);
  s.regression = regression.predict(states, controls, jacobians);
  if (jacobians != nullptr) {
    if (jacobians->empty()) {
      jacobians->assign(1, Mat::Zero(nz, nz));
    }
    (*jacobians)[0] += fp_jac;
  }
  s.z = s.first + s.regression;
  s.finite = s.z.allFinite();
  return s;
}

Regression fit_regression(RegressionKind kind, const FirstPrinciples& first,
                          const std::vector<Episode>& episodes,
                          const std::vector<std::size_t>& which, int lag) {
  Regression reg;
  reg.kind = kind;
  reg.lag = kind == RegressionKind::QLag ? lag : 1;
  if (kind == RegressionKind::None) {
    return reg;
  }
  if (reg.lag < 1) {
    throw DomainError("fit_regression: lag must be at least 1");
  }
  if (which.empty()) {
    throw DomainError("fit_regression: no training episodes");
  }
  const int h = reg.history();
  const Eigen::Index nz = episodes.at(which.front()).states.cols();

  std::vector<Mat> gram;
  std::vector<Vec> rhs;
  std::size_t rows = 0;
  for (std::size_t e : which) {
    const Episode& ep = episodes.at(e);
    for (Eigen::Index t = h - 1; t + 1 < ep.length(); ++t) {
      const Mat zs = history_rows(ep.states, t, h);
      const Mat cs = history_rows(ep.controls, t, h);
      const Vec fp = first.step(ep.state(t), ep.control(t));
      const Vec target = ep.state(t + 1) - fp;
      const auto blocks = reg.features(zs, cs, false);
      const bool shared = blocks.size() == 1;
      if (gram.empty()) {
        for (const auto& b : blocks) {
          gram.push_back(Mat::Zero(b.value.size(), b.value.size()));
        }
        for (Eigen::Index i = 0; i < nz; ++i) {
          rhs.push_back(Vec::Zero(blocks[shared ? 0 : static_cast<std::size_t>(i)].value.size()));
        }
      }
      for (std::size_t g = 0; g < blocks.size(); ++g) {
        gram[g].selfadjointView<Eigen::Lower>().rankUpdate(blocks[g].value);
      }
      for (Eigen::Index i = 0; i < nz; ++i) {
        rhs[static_cast<std::size_t>(i)] += target[i] * blocks[shared ? 0 : static_cast<std::size_t>(i)].value;
      }
      ++rows;
    }
  }
  if (rows == 0) {
    throw DomainError("fit_regression: episodes too short for the feature history");
  }

  std::vector<Eigen::LDLT<Mat>> solvers;
  for (Mat& g : gram) {
    g = g.selfadjointView<Eigen::Lower>();
    const Vec d = g.diagonal();
    double condition = std::numeric_limits<double>::infinity();
    if ((d.array() > 0.0).all()) {
      const Vec s = d.cwiseSqrt().cwiseInverse();
      const Mat scaled = s.asDiagonal() * g * s.asDiagonal();
      Eigen::SelfAdjointEigenSolver<Mat> eig(scaled, Eigen::EigenvaluesOnly);
      const double lo = eig.eigenvalues().minCoeff();
      const double hi = eig.eigenvalues().maxCoeff();
      condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    }
    if (!(condition <= 1e12)) {
      throw FitError("fit_regression(" + to_string(kind) + "): ill-conditioned design matrix",
                     condition);
    }
    solvers.emplace_back(g + 1e-8 * Mat::Identity(g.rows(), g.cols()));
  }
  reg.weights.resize(static_cast<std::size_t>(nz));
  for (Eigen::Index i = 0; i < nz; ++i) {
    const auto& solver = solvers.size() == 1 ? solvers.front() : solvers[static_cast<std::size_t>(i)];
    reg.weights[static_cast<std::size_t>(i)] = solver.solve(rhs[static_cast<std::size_t>(i)]);
  }
  return reg;
}

PhysicalModel build_physical_model(Vehicle vehicle, FirstPrinciplesKind fp, RegressionKind reg,
                                   const std::vector<Episode>& episodes,
                                   const std::vector<std::size_t>& train, double dt, int lag) {
  if (fp == FirstPrinciplesKind::None && reg == RegressionKind::None) {
    throw DomainError("a physical model needs a first-principles or a regression part");
  }
  if (reg == RegressionKind::Hyd && vehicle != Vehicle::Ship) {
    throw DomainError("Hyd regression applies to the ship only");
  }
  PhysicalModel m;
  m.vehicle = vehicle;
  m.first = FirstPrinciples::for_vehicle(fp, vehicle, dt);
  m.regression = fit_regression(reg, m.first, episodes, train, lag);
  return m;
}

Mat history_rows(const Mat& series, Eigen::Index t, int rows) {
  Mat out(rows, series.cols());
  for (int j = 0; j < rows; ++j) {
    out.row(j) = series.row(std::max<Eigen::Index>(t - j, 0));
  }
  return out;
}

Mat physical_rollout(const PhysicalModel& model, const PredictionSample& sample) {
  const Eigen::Index w = sample.window();
  const Eigen::Index h = sample.horizon();
  const Eigen::Index nz = sample.init_states.cols();
  const Eigen::Index nc = sample.init_controls.cols();
  Mat states(w + h, nz);
  states.topRows(w) = sample.init_states;
  Mat controls(w - 1 + h, nc);
  controls.topRows(w - 1) = sample.init_controls.topRows(w - 1);
  controls.bottomRows(h) = sample.horizon_controls;
  const int hist = model.history();
  for (Eigen::Index k = 0; k < h; ++k) {
    const Eigen::Index t = w - 1 + k;
    const PhysicalStep s =
        model.step(history_rows(states, t, hist), history_rows(controls, t, hist));
    states.row(t + 1) = s.z.transpose();
  }
  return states.bottomRows(h);
}

}  // namespace resmotion
