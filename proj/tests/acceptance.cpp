// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance [output-dir]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "resmotion/cli.hpp"
#include "resmotion/integrators.hpp"
#include "resmotion/report.hpp"
#include "resmotion/sea.hpp"
#include "resmotion/simulate.hpp"

using namespace resmotion;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

Mat random_mat(Rng& rng, Eigen::Index r, Eigen::Index c, double scale) {
  Mat m(r, c);
  for (Eigen::Index j = 0; j < c; ++j) {
    for (Eigen::Index i = 0; i < r; ++i) {
      m(i, j) = uniform(rng, -scale, scale);
    }
  }
  return m;
}

double rel_error(const Vec& a, const Vec& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-12);
}

// ---------------------------------------------------------------- criterion 1

struct NetProblem {
  std::vector<Mat> window;
  std::vector<Mat> inputs;
  std::vector<Mat> weights;
};

double net_loss(const Corrector& net, const NetProblem& p) {
  const auto hs = net.predictor.forward(p.inputs, net.encode(p.window));
  double loss = 0.0;
  for (std::size_t t = 0; t < hs.size(); ++t) {
    loss += p.weights[t].cwiseProduct(net.constraint.apply(net.projection * hs[t])).sum();
  }
  return loss;
}

Vec net_gradient(const Corrector& net, const NetProblem& p) {
  std::vector<LstmStepCache> enc, caches;
  const LstmState h0 = net.encode(p.window, &enc);
  const auto hs = net.predictor.forward(p.inputs, h0, nullptr, &caches);
  Corrector g = net.zeros_like();
  LstmState d = LstmState::zeros(net.predictor.layers(), net.predictor.hidden(), p.inputs.front().cols());
  for (std::size_t t = hs.size(); t-- > 0;) {
    const Mat draw = p.weights[t].cwiseProduct(net.constraint.derivative(net.projection * hs[t]));
    g.projection += draw * hs[t].transpose();
    d.h.back() += net.projection.transpose() * draw;
    net.predictor.step_backward(caches[t], d, g.predictor);
  }
  net.encode_backward(enc, d, g);
  return flatten(std::as_const(g).tensors());
}

template <class Loss>
Vec central_difference(Corrector& net, Loss&& loss, double h) {
  Vec theta = flatten(std::as_const(net).tensors());
  Vec g(theta.size());
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    const double saved = theta[k];
    theta[k] = saved + h;
    unflatten(theta, net.tensors());
    const double up = loss();
    theta[k] = saved - h;
    unflatten(theta, net.tensors());
    const double down = loss();
    theta[k] = saved;
    g[k] = (up - down) / (2.0 * h);
  }
  unflatten(theta, net.tensors());
  return g;
}

std::string criterion_gradients(bool& pass) {
  Rng rng(101);
  const int nz = 5;
  const int nc = 4;
  Corrector net = Corrector::random(nz, nc, 12, 2, rng);
  net.constraint = OutputConstraint::bounded((Vec(nz) << 0.3, kUnbounded, 1.0, 2.0, 0.5).finished());
  NetProblem p;
  const Eigen::Index batch = 3;
  for (int t = 0; t < 6; ++t) {
    p.window.push_back(random_mat(rng, nz + nc, batch, 1.0));
  }
  for (int t = 0; t < 25; ++t) {
    p.inputs.push_back(random_mat(rng, nc + nz, batch, 1.0));
    p.weights.push_back(random_mat(rng, nz, batch, 1.0));
  }
  const Vec an = net_gradient(net, p);
  const Vec fd = central_difference(net, [&] { return net_loss(net, p); }, 1e-5);
  double network = 0.0;
  Eigen::Index offset = 0;
  for (const Mat* t : std::as_const(net).tensors()) {
    network = std::max(network, rel_error(an.segment(offset, t->size()), fd.segment(offset, t->size())));
    offset += t->size();
  }

  // Coupled system: Pro+Lin physical part, bounded corrector, free-running feedback.
  std::vector<Episode> eps;
  for (int s = 0; s < 2; ++s) {
    eps.push_back(simulate_ship_episode(600, 1.0, 500 + s, ship::ShipParams::patrol_vessel()));
  }
  const PhysicalModel phys =
      build_physical_model(Vehicle::Ship, FirstPrinciplesKind::Pro, RegressionKind::Lin, eps, {0}, 1.0);
  HybridModel model = make_hybrid(phys, fit_normalizer(eps, {0}), 4, 2, 7);
  model.corrector.constraint = OutputConstraint::bounded(Vec::Constant(nz, 0.7));
  const auto samples = extract_samples(eps, {1}, 8, 20, 150);
  std::vector<const PredictionSample*> b;
  for (std::size_t i = 0; i < std::min<std::size_t>(3, samples.size()); ++i) {
    b.push_back(&samples[i]);
  }
  Corrector g = model.corrector.zeros_like();
  batch_loss(model, b, RolloutMode::FreeRunning, -1, &g);
  const Vec an_h = flatten(std::as_const(g).tensors());
  const Vec fd_h = central_difference(
      model.corrector, [&] { return batch_loss(model, b, RolloutMode::FreeRunning, -1, nullptr).loss; }, 1e-6);
  double hybrid = 0.0;
  offset = 0;
  for (const Mat* t : std::as_const(g).tensors()) {
    hybrid = std::max(hybrid, rel_error(an_h.segment(offset, t->size()), fd_h.segment(offset, t->size())));
    offset += t->size();
  }
  pass = network < 1e-5 && hybrid < 1e-4 && !b.empty();
  return "network max rel err " + fmt(network) + " (< 1e-5), hybrid free-running max rel err " + fmt(hybrid) +
         " (< 1e-4)";
}

// ---------------------------------------------------------------- criterion 2

std::string criterion_integrator(bool& pass) {
  // x'' + 2 zeta w x' + w^2 x = 0, x(0) = 1, x'(0) = 0
  const double w = 2.0;
  const double zeta = 0.1;
  const double wd = w * std::sqrt(1.0 - zeta * zeta);
  using State = Eigen::Vector2d;
  const auto f = [&](double, const State& y) { return State(y[1], -2.0 * zeta * w * y[1] - w * w * y[0]); };
  const double t_end = 10.0;
  const double x_exact = std::exp(-zeta * w * t_end) *
                         (std::cos(wd * t_end) + zeta * w / wd * std::sin(wd * t_end));
  const double e1 = std::abs(rk4_integrate(State(1.0, 0.0), 0.0, 0.1, 100, f)[0] - x_exact);
  const double e2 = std::abs(rk4_integrate(State(1.0, 0.0), 0.0, 0.05, 200, f)[0] - x_exact);
  const double ratio = e1 / e2;
  pass = ratio >= 12.0 && ratio <= 20.0;
  return "error ratio " + fmt(ratio) + " (in [12, 20])";
}

// ---------------------------------------------------------------- criterion 3

std::string criterion_regression(bool& pass) {
  Rng rng(303);
  const Mat a = random_mat(rng, 5, 5, 0.15) + 0.5 * Mat::Identity(5, 5);
  const Mat b = random_mat(rng, 5, 4, 0.5);
  const Vec bias = random_mat(rng, 5, 1, 0.2);
  std::vector<Episode> eps;
  for (int e = 0; e < 3; ++e) {
    Episode ep;
    ep.vehicle = Vehicle::Ship;
    ep.dt = 1.0;
    ep.states.resize(400, 5);
    ep.controls = random_mat(rng, 400, 4, 1.0);
    ep.poses = Mat::Zero(400, 4);
    Vec z = random_mat(rng, 5, 1, 1.0);
    for (Eigen::Index t = 0; t < 400; ++t) {
      ep.states.row(t) = z.transpose();
      z = a * z + b * ep.controls.row(t).transpose() + bias;
    }
    eps.push_back(std::move(ep));
  }
  const Regression reg = fit_regression(RegressionKind::Lin, FirstPrinciples::none(), eps, {0, 1, 2});
  double err = 0.0;
  for (Eigen::Index i = 0; i < 5; ++i) {
    Vec expected(10);
    expected << b.row(i).transpose(), a.row(i).transpose(), bias[i];
    err = std::max(err, (reg.weights[static_cast<std::size_t>(i)] - expected).cwiseAbs().maxCoeff());
  }
  pass = err < 1e-8;
  return "max abs weight error " + fmt(err) + " (< 1e-8)";
}

// ---------------------------------------------------------------- criterion 4

std::string criterion_jonswap(bool& pass) {
  pass = true;
  std::string detail;
  for (double hs : {1.0, 2.0, 4.0}) {
    const double target = hs * hs / 16.0;
    const double dev = std::abs(jonswap_amplitudes(hs, 8.0, 256, 17).variance() - target) / target;
    pass = pass && dev < 0.02;
    detail += (detail.empty() ? "" : ", ") + std::string("Hs ") + fmt(hs) + ": " + fmt(100 * dev) + "%";
  }
  return "variance deviation " + detail + " (< 2%)";
}

// ------------------------------------------------------------ desk-scale data

struct Desk {
  Vehicle vehicle;
  std::vector<Episode> episodes;
  Split split;
  Normalizer normalizer;
  std::vector<PredictionSample> train, val, test;
};

Desk make_desk(Vehicle vehicle) {
  Desk d;
  d.vehicle = vehicle;
  const bool ship = vehicle == Vehicle::Ship;
  for (int s = 0; s < 8; ++s) {
    d.episodes.push_back(ship ? simulate_ship_episode(3600, 1.0, 1000 + s, ship::ShipParams::patrol_vessel())
                              : simulate_quad_episode(300, 100.0, 1000 + s, quad::QuadParams{}));
  }
  d.split = split_dataset(d.episodes.size(), {0.6, 0.1, 0.3}, 7);
  d.normalizer = fit_normalizer(d.episodes, d.split.train);
  const Eigen::Index window = ship ? 60 : 100;
  const Eigen::Index horizon = ship ? 300 : 100;
  const Eigen::Index stride = ship ? 60 : 100;
  d.train = extract_samples(d.episodes, d.split.train, window, horizon, stride);
  d.val = extract_samples(d.episodes, d.split.val, window, horizon, horizon);
  d.test = extract_samples(d.episodes, d.split.test, window, horizon, horizon);
  return d;
}

struct Outcome {
  HybridModel model;
  double trajectory = 0.0;
  Vec states;
  bool aborted = false;
};

Outcome fit(const Desk& d, const std::string& name) {
  const ModelSpec spec = parse_model_spec(name);
  const double dt = d.episodes.front().dt;
  const PhysicalModel phys =
      build_physical_model(d.vehicle, spec.first, spec.regression, d.episodes, d.split.train, dt);
  Outcome o;
  const auto t0 = Clock::now();
  if (spec.phase == TrainingPhase::None) {
    o.model.physical = phys;
    o.model.normalizer = d.normalizer;
  } else {
    o.model = make_hybrid(phys, d.normalizer, 32, 1, 11);
    try {
      if (spec.phase == TrainingPhase::TwoP) {
        train_two_phase(o.model, d.train, d.val, TrainingConfig{});
      } else {
        train_one_phase(o.model, d.train, d.val, TrainingConfig{});
      }
    } catch (const TrainingDivergence& e) {
      o.aborted = true;
      o.trajectory = std::numeric_limits<double>::infinity();
      std::cout << "  " << name << ": aborted (" << e.what() << ")\n" << std::flush;
      return o;
    }
  }
  const ModelEvaluation ev = evaluate_model(o.model, d.test);
  o.trajectory = ev.trajectory.mean;
  o.states = ev.states.rmse;
  std::cout << "  " << name << ": trajectory " << fmt(ev.trajectory.mean) << " +- " << fmt(ev.trajectory.ci95)
            << " m, " << fmt(seconds_since(t0)) << " s\n"
            << std::flush;
  return o;
}

void write_sweep(const fs::path& path, const std::vector<SweepRow>& rows, const std::vector<std::string>& names) {
  std::ofstream f(path);
  f << "threshold,variant,state,rmse\n";
  for (const auto& r : rows) {
    for (Eigen::Index i = 0; i < r.state_rmse.size(); ++i) {
      f << r.threshold << ',' << r.variant << ',' << names[static_cast<std::size_t>(i)] << ',' << r.state_rmse[i]
        << '\n';
    }
    f << r.threshold << ',' << r.variant << ",trajectory," << r.trajectory_rmse << '\n';
  }
}

// Smallest threshold at which the fine-tuned model is within 10% of the
// unconstrained one on every listed state; negative when none is.
double matching_threshold(const std::vector<SweepRow>& rows, const std::vector<Eigen::Index>& states) {
  const Vec& base = rows.front().state_rmse;
  for (const auto& r : rows) {
    if (r.variant != "fine-tuned") {
      continue;
    }
    bool ok = true;
    for (Eigen::Index i : states) {
      ok = ok && r.state_rmse[i] <= 1.10 * base[i];
    }
    if (ok) {
      return r.threshold;
    }
  }
  return -1.0;
}

std::vector<SweepRow> sweep(const Desk& d, const Outcome& o) {
  const PhysicalOutputRange range = physical_output_range(o.model.physical, d.episodes, d.split.train);
  SweepConfig sc;
  sc.thresholds = {0, 5, 10, 15, 20, 25, 30};
  return threshold_sweep(o.model, range, d.train, d.val, d.test, sc);
}

// ---------------------------------------------------------------- criterion 5

std::string criterion_identities(const Desk& d, bool& pass) {
  const auto samples = extract_samples(d.episodes, d.split.test, 60, 900, 900);
  const PhysicalModel phys = build_physical_model(Vehicle::Ship, FirstPrinciplesKind::Min, RegressionKind::Lin,
                                                  d.episodes, d.split.train, 1.0);
  HybridModel silent = make_hybrid(phys, d.normalizer, 16, 1, 5);
  silent.corrector.projection.setZero();
  HybridModel zero_threshold = make_hybrid(phys, d.normalizer, 16, 1, 6);
  const PhysicalOutputRange range = physical_output_range(phys, d.episodes, d.split.train);
  zero_threshold.corrector.constraint = normalized_constraint(beta_for_threshold(range, 0.0), d.normalizer);
  int exact = 0;
  for (const auto& s : samples) {
    const Mat reference = physical_rollout(phys, s);
    exact += rollout(silent, s, RolloutMode::FreeRunning).predictions == reference;
    exact += rollout(zero_threshold, s, RolloutMode::FreeRunning).predictions == reference;
  }
  const int total = 2 * static_cast<int>(samples.size());
  pass = !samples.empty() && exact == total;
  return std::to_string(exact) + "/" + std::to_string(total) + " 900-step rollouts bit-identical to physics";
}

// --------------------------------------------------------------- criterion 10

std::vector<std::pair<std::string, std::string>> tree(const fs::path& dir) {
  std::vector<std::pair<std::string, std::string>> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) {
      std::ifstream f(e.path(), std::ios::binary);
      std::stringstream ss;
      ss << f.rdbuf();
      files.emplace_back(fs::relative(e.path(), dir).string(), ss.str());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

int cli(const std::vector<std::string>& args, std::string& out) {
  std::vector<const char*> argv{"resmotion"};
  for (const auto& a : args) {
    argv.push_back(a.c_str());
  }
  std::ostringstream o, e;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), o, e);
  out += o.str();
  return code;
}

std::string criterion_determinism(const fs::path& root, bool& pass) {
  std::vector<std::vector<std::pair<std::string, std::string>>> trees;
  std::vector<std::string> outputs;
  bool ok = true;
  for (int rep = 0; rep < 2; ++rep) {
    const fs::path dir = root / ("determinism_" + std::to_string(rep));
    fs::remove_all(dir);
    const std::string data = (dir / "data").string();
    const std::string qdata = (dir / "qdata").string();
    const std::string run = (dir / "run").string();
    const std::string ck = (dir / "run" / "checkpoint.json").string();
    std::string out;
    ok = ok && cli({"simulate", "--vehicle", "ship", "--hours", "1", "--episode-minutes", "6", "--seed", "4",
                    "--out", data},
                   out) == 0;
    ok = ok && cli({"simulate", "--vehicle", "quad", "--hours", "0.05", "--episode-minutes", "0.3", "--seed",
                    "4", "--out", qdata},
                   out) == 0;
    ok = ok && cli({"train", "--data", data, "--model", "Min+Lin-2P", "--out", run, "--window", "20", "--horizon",
                    "120", "--stride", "60", "--hidden", "6", "--epochs1", "3", "--epochs2", "3"},
                   out) == 0;
    ok = ok && cli({"train", "--data", qdata, "--model", "MinQ+QLag-1P", "--out", (dir / "qrun").string(),
                    "--epochs1", "1", "--epochs2", "2", "--hidden", "4"},
                   out) == 0;
    ok = ok && cli({"evaluate", "--checkpoint", ck, "--data", data, "--out", (dir / "report").string()}, out) == 0;
    ok = ok && cli({"sweep", "--checkpoint", ck, "--data", data, "--thresholds", "0,10,50", "--fine-tune-epochs",
                    "1", "--out", (dir / "sweep").string()},
                   out) == 0;
    trees.push_back(tree(dir));
    outputs.push_back(out);
  }
  pass = ok && trees[0] == trees[1] && outputs[0] == outputs[1] && !trees[0].empty();
  return std::to_string(trees[0].size()) + " files from simulate/train/evaluate/sweep compared byte-wise" +
         (ok ? "" : ", a command failed");
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path out_dir = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_out");
  fs::create_directories(out_dir);
  const auto start = Clock::now();
  std::map<int, std::pair<bool, std::string>> results;
  auto record = [&](int id, const std::function<std::string(bool&)>& check) {
    const auto t0 = Clock::now();
    bool pass = false;
    std::string detail;
    try {
      detail = check(pass);
    } catch (const std::exception& e) {
      pass = false;
      detail = std::string("exception: ") + e.what();
    }
    detail += "; " + fmt(seconds_since(t0)) + " s";
    results[id] = {pass, detail};
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << ": " << detail << '\n' << std::flush;
  };

  record(1, criterion_gradients);
  record(2, criterion_integrator);
  record(3, criterion_regression);
  record(4, criterion_jonswap);
  record(10, [&](bool& pass) { return criterion_determinism(out_dir, pass); });

  std::cout << "building ship desk data\n" << std::flush;
  const Desk ship = make_desk(Vehicle::Ship);
  record(5, [&](bool& pass) { return criterion_identities(ship, pass); });

  std::map<std::string, Outcome> fits;
  record(6, [&](bool& pass) {
    pass = true;
    std::string detail;
    for (const char* base : {"Lin", "Min+Lin", "Pro+Lin"}) {
      const std::string two = std::string(base) + "-2P";
      const std::string one = std::string(base) + "-1P";
      fits[two] = fit(ship, two);
      fits[one] = fit(ship, one);
      const double ratio = fits[two].trajectory / fits[one].trajectory;
      pass = pass && ratio < 0.5;
      detail += two + "/" + one + " " + fmt(ratio) + ", ";
    }
    fits["Hyd-2P"] = fit(ship, "Hyd-2P");
    fits["Hyd-1P"] = fit(ship, "Hyd-1P");
    const bool hyd = fits["Hyd-1P"].aborted || fits["Hyd-1P"].trajectory > 5.0 * fits["Hyd-2P"].trajectory;
    pass = pass && hyd;
    detail += "Hyd-1P " + (fits["Hyd-1P"].aborted ? std::string("aborted")
                                                    : fmt(fits["Hyd-1P"].trajectory / fits["Hyd-2P"].trajectory) +
                                                          "x Hyd-2P");
    return "trajectory ratios 2P/1P (< 0.5 each) " + detail + " (aborted or > 5x)";
  });

  record(7, [&](bool& pass) {
    const Outcome qlag = fit(ship, "QLag-none");
    std::string best;
    for (const auto& [name, o] : fits) {
      if (name.ends_with("-2P") && (best.empty() || o.trajectory < fits[best].trajectory)) {
        best = name;
      }
    }
    if (best.empty()) {
      throw std::runtime_error("no two-phase ship model was trained");
    }
    pass = fits[best].trajectory < 0.5 * qlag.trajectory;
    return "best 2P " + best + " " + fmt(fits[best].trajectory) + " m vs QLag " + fmt(qlag.trajectory) +
           " m, ratio " + fmt(fits[best].trajectory / qlag.trajectory) + " (< 0.5)";
  });

  record(8, [&](bool& pass) {
    if (!fits.contains("Lin-2P")) {
      fits["Lin-2P"] = fit(ship, "Lin-2P");
    }
    const auto rows = sweep(ship, fits["Lin-2P"]);
    write_sweep(out_dir / "ship_sweep.csv", rows, {"u", "w", "p", "r", "phi"});
    const double t = matching_threshold(rows, {0, 1, 3});
    pass = t >= 0.0 && t <= 30.0;
    return "Lin-2P fine-tuned u, w, r within 10% of unconstrained from " +
           (t < 0 ? std::string("no threshold") : fmt(t) + "%") + " (<= 30%), curve in " +
           (out_dir / "ship_sweep.csv").string();
  });

  record(9, [&](bool& pass) {
    std::cout << "building quadcopter desk data\n" << std::flush;
    const Desk quad = make_desk(Vehicle::Quad);
    const Outcome qlag = fit(quad, "QLag-none");
    bool all_better = true;
    std::string detail;
    Outcome best_combo;
    for (const char* name : {"MinQ-2P", "Lin-2P", "Qua-2P", "MinQ+Lin-2P", "MinQ+Qua-2P"}) {
      Outcome o = fit(quad, name);
      all_better = all_better && o.trajectory < qlag.trajectory;
      detail += std::string(name) + " " + fmt(o.trajectory) + ", ";
      if (std::string(name) == "MinQ+Qua-2P") {
        best_combo = std::move(o);
      }
    }
    const auto rows = sweep(quad, best_combo);
    write_sweep(out_dir / "quad_sweep.csv", rows, {"vx", "vy", "vz", "p", "q", "r"});
    const double t = matching_threshold(rows, {0, 1, 2, 3, 4, 5});
    const bool sweep_ok = t >= 0.0 && t <= 30.0;
    pass = all_better && sweep_ok;
    return "trajectory m: " + detail + "QLag " + fmt(qlag.trajectory) + " (every hybrid below QLag: " +
           (all_better ? "yes" : "no") + "); MinQ+Qua-2P within 10% from " +
           (t < 0 ? std::string("no threshold") : fmt(t) + "%") + " (<= 30%)";
  });

  std::cout << "\nsummary (" << fmt(seconds_since(start) / 60.0) << " min)\n";
  int failed = 0;
  for (const auto& [id, r] : results) {
    std::cout << (r.first ? "PASS" : "FAIL") << " criterion " << id << ": " << r.second << '\n';
    failed += r.first ? 0 : 1;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << '\n';
  return failed == 0 ? 0 : 1;
}
