#include "resmotion/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "resmotion/checkpoint.hpp"
#include "resmotion/report.hpp"
#include "resmotion/simulate.hpp"

namespace resmotion {

namespace fs = std::filesystem;

std::string ModelSpec::name() const {
  std::string s;
  if (first != FirstPrinciplesKind::None) {
    s = to_string(first);
  }
  if (regression != RegressionKind::None) {
    if (!s.empty()) {
      s += "+";
    }
    s += regression == RegressionKind::Bias && first == FirstPrinciplesKind::None ? "LSTM"
                                                                                  : to_string(regression);
  }
  switch (phase) {
    case TrainingPhase::None: return s + "-none";
    case TrainingPhase::OneP: return s + "-1P";
    case TrainingPhase::TwoP: return s + "-2P";
  }
  return s;
}

ModelSpec parse_model_spec(std::string_view text) {
  const auto dash = text.rfind('-');
  if (dash == std::string_view::npos) {
    throw DomainError("model '" + std::string(text) + "' lacks a training phase (-1P, -2P or -none)");
  }
  ModelSpec spec;
  const std::string_view phase = text.substr(dash + 1);
  if (phase == "1P") {
    spec.phase = TrainingPhase::OneP;
  } else if (phase == "2P") {
    spec.phase = TrainingPhase::TwoP;
  } else if (phase == "none") {
    spec.phase = TrainingPhase::None;
  } else {
    throw DomainError("unknown training phase '" + std::string(phase) + "'");
  }
  bool have_first = false;
  bool have_regression = false;
  std::string_view rest = text.substr(0, dash);
  while (true) {
    const auto plus = rest.find('+');
    const std::string_view part = rest.substr(0, plus);
    if (part == "none") {
      // explicit empty part
    } else if (part == "Min" || part == "Pro" || part == "MinQ" || part == "Truth") {
      if (have_first) {
        throw DomainError("model '" + std::string(text) + "' has two first-principles parts");
      }
      spec.first = parse_first_principles(part);
      have_first = true;
    } else if (part == "Lin" || part == "Hyd" || part == "Qua" || part == "QLag" || part == "Bias" ||
               part == "LSTM") {
      if (have_regression) {
        throw DomainError("model '" + std::string(text) + "' has two regression parts");
      }
      spec.regression = part == "LSTM" ? RegressionKind::Bias : parse_regression(part);
      have_regression = true;
    } else {
      throw DomainError("unknown model part '" + std::string(part) + "'");
    }
    if (plus == std::string_view::npos) {
      break;
    }
    rest = rest.substr(plus + 1);
  }
  if (spec.first == FirstPrinciplesKind::None && spec.regression == RegressionKind::None) {
    throw DomainError("model '" + std::string(text) + "' has no model part");
  }
  if (spec.regression == RegressionKind::Bias && spec.phase == TrainingPhase::None) {
    throw DomainError("the LSTM model needs a training phase");
  }
  return spec;
}

namespace {

std::string num(double v) {
  if (std::isnan(v)) {
    return "nan";
  }
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

nlohmann::json json_num(double v) {
  if (std::isfinite(v)) {
    return v;
  }
  return num(v);
}

std::vector<std::string> state_names(Vehicle v) {
  if (v == Vehicle::Ship) {
    return {"u", "w", "p", "r", "phi"};
  }
  return {"vx", "vy", "vz", "p", "q", "r"};
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) {
        throw DomainError("");
      }
    } catch (const std::exception&) {
      throw DomainError("cannot parse number '" + item + "' in list '" + text + "'");
    }
  }
  if (values.empty()) {
    throw DomainError("empty list");
  }
  return values;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  return out;
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  }
}

struct Dataset {
  std::vector<Episode> episodes;
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;

  Vehicle vehicle() const { return episodes.front().vehicle; }
  double dt() const { return episodes.front().dt; }
};

Dataset load_dataset(const fs::path& dir) {
  Dataset d;
  const std::pair<const char*, std::vector<std::size_t>*> parts[] = {
      {"train.txt", &d.train}, {"val.txt", &d.val}, {"test.txt", &d.test}};
  for (const auto& [file, which] : parts) {
    for (const std::string& name : read_manifest(dir / file)) {
      which->push_back(d.episodes.size());
      d.episodes.push_back(read_episode(dir / name));
    }
  }
  if (d.episodes.empty()) {
    throw DomainError("dataset " + dir.string() + " lists no episodes");
  }
  for (const Episode& e : d.episodes) {
    if (e.vehicle != d.vehicle() || e.dt != d.dt()) {
      throw FormatError("dataset mixes vehicles or sample rates");
    }
  }
  return d;
}

const std::vector<std::size_t>& part(const Dataset& d, const std::string& name) {
  if (name == "train") {
    return d.train;
  }
  if (name == "val") {
    return d.val;
  }
  if (name == "test") {
    return d.test;
  }
  throw DomainError("unknown manifest '" + name + "' (expected train, val or test)");
}

std::vector<PredictionSample> samples_of(const Dataset& d, const std::vector<std::size_t>& which,
                                         Eigen::Index window, Eigen::Index horizon, Eigen::Index stride,
                                         const std::string& label) {
  auto s = extract_samples(d.episodes, which, window, horizon, stride);
  if (s.empty()) {
    throw DomainError("no " + label + " samples: episodes too short for window " + std::to_string(window) +
                      " and horizon " + std::to_string(horizon));
  }
  return s;
}

// ---------------------------------------------------------------- options

struct SimulateOptions {
  std::string vehicle = "ship";
  double hours = 8.0;
  double episode_minutes = 0.0;  // 0: 60 for the ship, 5 for the quadcopter
  std::uint64_t seed = 1;
  std::string split = "0.6,0.1,0.3";
  std::string out;
};

struct TrainOptions {
  std::string data;
  std::string model;
  std::string out;
  int hidden = 32;
  int layers = 1;
  Eigen::Index window = 0;   // 0: vehicle default
  Eigen::Index horizon = 0;  // 0: vehicle default
  Eigen::Index stride = 0;   // training-sample stride, 0: vehicle default
  int lag = 4;
  TrainingConfig training;
};

struct EvaluateOptions {
  std::string checkpoint;
  std::string data;
  std::string manifest = "test";
  std::string out;
};

struct SweepOptions {
  std::string checkpoint;
  std::string data;
  std::string thresholds = "0,5,10,15,25,50,100";
  int fine_tune_epochs = 5;
  Eigen::Index stride = 0;
  std::string out;
  TrainingConfig training;
};

Eigen::Index default_window(Vehicle v) { return v == Vehicle::Ship ? 60 : 100; }
Eigen::Index default_horizon(Vehicle v) { return v == Vehicle::Ship ? 900 : 100; }
Eigen::Index default_stride(Vehicle v) { return v == Vehicle::Ship ? 60 : 100; }

void add_training_options(CLI::App* app, TrainingConfig& t) {
  app->add_option("--lr", t.learning_rate, "Adam learning rate")->capture_default_str();
  app->add_option("--clip", t.clip_norm, "global gradient-norm clip")->capture_default_str();
  app->add_option("--batch", t.batch_size, "samples per batch")->capture_default_str();
  app->add_option("--seed", t.seed, "training seed (shuffling)")->capture_default_str();
}

// ---------------------------------------------------------------- commands

int cmd_simulate(const SimulateOptions& o, std::ostream& out, std::ostream& err) {
  const Vehicle vehicle = parse_vehicle(o.vehicle);
  if (!(o.hours > 0.0)) {
    throw DomainError("--hours must be positive");
  }
  const double minutes = o.episode_minutes > 0.0 ? o.episode_minutes : (vehicle == Vehicle::Ship ? 60.0 : 5.0);
  const auto count = static_cast<std::size_t>(std::llround(o.hours * 60.0 / minutes));
  if (count == 0) {
    throw DomainError("--hours is shorter than one episode");
  }
  const auto r = parse_list(o.split);
  if (r.size() != 3) {
    throw DomainError("--split needs three ratios");
  }
  const Split split = split_dataset(count, {r[0], r[1], r[2]}, derive_seed(o.seed, 1));
  const fs::path dir = o.out;
  make_dir(dir);
  std::vector<std::string> names(count);
  std::vector<bool> ok(count, true);
  std::vector<std::uint64_t> failed;
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t seed = derive_seed(o.seed, 1000 + i);
    char name[32];
    std::snprintf(name, sizeof name, "episode_%03zu.csv", i);
    names[i] = name;
    try {
      const Episode ep = vehicle == Vehicle::Ship
                             ? simulate_ship_episode(minutes * 60.0, 1.0, seed, ship::ShipParams::patrol_vessel())
                             : simulate_quad_episode(minutes * 60.0, 100.0, seed, quad::QuadParams{});
      write_episode(ep, dir / name);
    } catch (const SimulationDivergence& e) {
      ok[i] = false;
      failed.push_back(seed);
      err << "episode " << i << ": " << e.what() << '\n';
    }
  }
  const auto manifest = [&](const std::vector<std::size_t>& which) {
    std::vector<std::string> list;
    for (std::size_t i : which) {
      if (ok[i]) {
        list.push_back(names[i]);
      }
    }
    return list;
  };
  write_manifest(dir / "train.txt", manifest(split.train));
  write_manifest(dir / "val.txt", manifest(split.val));
  write_manifest(dir / "test.txt", manifest(split.test));
  out << "episodes " << count - failed.size() << " diverged " << failed.size() << '\n';
  if (!failed.empty()) {
    err << "diverged seeds:";
    for (auto s : failed) {
      err << ' ' << s;
    }
    err << '\n';
    return kExitDivergence;
  }
  return kExitOk;
}

void write_history(const fs::path& path, const TrainingHistory& h) {
  std::ofstream f = open_output(path);
  f << "phase,epoch,truncation,train_loss,val_loss,diverged_batches,batches\n";
  for (const EpochRecord& e : h.epochs) {
    f << e.phase << ',' << e.epoch << ',' << e.truncation << ',' << num(e.train_loss) << ','
      << num(e.val_loss) << ',' << e.diverged_batches << ',' << e.batches << '\n';
  }
  if (h.aborted) {
    f << "# aborted: " << h.diagnostic << '\n';
  }
}

int cmd_train(const TrainOptions& o, std::ostream& out, std::ostream& err) {
  const ModelSpec spec = parse_model_spec(o.model);
  const Dataset d = load_dataset(o.data);
  const Vehicle v = d.vehicle();
  if (d.train.empty() || (spec.phase != TrainingPhase::None && d.val.empty())) {
    throw DomainError("dataset needs training and validation episodes");
  }
  if (o.hidden < 1 || o.layers < 1) {
    throw DomainError("--hidden and --layers must be positive");
  }
  const Eigen::Index window = o.window > 0 ? o.window : default_window(v);
  const Eigen::Index horizon = o.horizon > 0 ? o.horizon : default_horizon(v);
  const Eigen::Index stride = o.stride > 0 ? o.stride : default_stride(v);
  const PhysicalModel physical =
      build_physical_model(v, spec.first, spec.regression, d.episodes, d.train, d.dt(), o.lag);
  const Normalizer normalizer = fit_normalizer(d.episodes, d.train);

  Checkpoint cp;
  cp.name = spec.name();
  cp.window = window;
  cp.horizon = horizon;
  const fs::path dir = o.out;
  make_dir(dir);
  TrainingHistory history;
  if (spec.phase == TrainingPhase::None) {
    cp.model.physical = physical;
    cp.model.normalizer = normalizer;
  } else {
    cp.model = make_hybrid(physical, normalizer, o.hidden, o.layers, derive_seed(o.training.seed, 2));
    const auto train = samples_of(d, d.train, window, horizon, stride, "training");
    const auto val = samples_of(d, d.val, window, horizon, horizon, "validation");
    try {
      history = spec.phase == TrainingPhase::TwoP ? train_two_phase(cp.model, train, val, o.training)
                                                  : train_one_phase(cp.model, train, val, o.training);
    } catch (const TrainingDivergence& e) {
      write_history(dir / "history.csv", e.history());
      err << e.what() << '\n';
      return kExitDivergence;
    }
  }
  write_history(dir / "history.csv", history);
  write_checkpoint(cp, dir / "checkpoint.json");
  out << cp.name << ": " << history.epochs.size() << " epochs, best validation loss "
      << num(history.best_val_loss) << '\n';
  return kExitOk;
}

int cmd_evaluate(const EvaluateOptions& o, std::ostream& out, std::ostream&) {
  const Checkpoint cp = read_checkpoint(fs::path(o.checkpoint));
  const Dataset d = load_dataset(o.data);
  if (d.vehicle() != cp.model.physical.vehicle) {
    throw DomainError("checkpoint and dataset are for different vehicles");
  }
  const auto& which = part(d, o.manifest);
  if (which.empty()) {
    throw DomainError("manifest '" + o.manifest + "' is empty");
  }
  const auto samples = samples_of(d, which, cp.window, cp.horizon, cp.horizon, "evaluation");
  const ModelEvaluation ev = evaluate_model(cp.model, samples);
  const fs::path dir = o.out;
  make_dir(dir);
  const auto names = state_names(d.vehicle());
  {
    std::ofstream f = open_output(dir / "report.csv");
    f << "metric,state,value,ci\n";
    for (std::size_t i = 0; i < names.size(); ++i) {
      f << "rmse," << names[i] << ',' << num(ev.states.rmse[static_cast<Eigen::Index>(i)]) << ",\n";
    }
    f << "trajectory_rmse,position," << num(ev.trajectory.mean) << ',' << num(ev.trajectory.ci95) << '\n';
  }
  {
    std::ofstream f = open_output(dir / "trajectory_minutes.csv");
    f << "sample_id,minute,rmse\n";
    for (const MinuteError& m : ev.trajectory.per_minute) {
      f << m.sample << ',' << m.minute << ',' << num(m.rmse) << '\n';
    }
  }
  nlohmann::json s;
  s["model"] = cp.name;
  s["vehicle"] = to_string(d.vehicle());
  s["manifest"] = o.manifest;
  s["samples"] = samples.size();
  s["diverged"] = ev.diverged;
  s["window"] = cp.window;
  s["horizon"] = cp.horizon;
  for (std::size_t i = 0; i < names.size(); ++i) {
    s["state_rmse"][names[i]] = json_num(ev.states.rmse[static_cast<Eigen::Index>(i)]);
  }
  s["normalized_rmse_sum"] = json_num(ev.states.normalized_sum);
  s["trajectory_rmse"] = {{"mean", json_num(ev.trajectory.mean)}, {"ci95", json_num(ev.trajectory.ci95)}};
  open_output(dir / "summary.json") << s.dump(1) << '\n';
  out << cp.name << ": trajectory RMSE " << num(ev.trajectory.mean) << " +- " << num(ev.trajectory.ci95)
      << " over " << samples.size() << " samples\n";
  return kExitOk;
}

int cmd_sweep(const SweepOptions& o, std::ostream& out, std::ostream&) {
  const Checkpoint cp = read_checkpoint(fs::path(o.checkpoint));
  const Dataset d = load_dataset(o.data);
  if (d.vehicle() != cp.model.physical.vehicle) {
    throw DomainError("checkpoint and dataset are for different vehicles");
  }
  if (!cp.model.has_corrector()) {
    throw DomainError("checkpoint " + cp.name + " has no corrector to constrain");
  }
  SweepConfig sc;
  sc.thresholds = parse_list(o.thresholds);
  sc.fine_tune_epochs = o.fine_tune_epochs;
  sc.training = o.training;
  const Eigen::Index stride = o.stride > 0 ? o.stride : default_stride(d.vehicle());
  const auto train = samples_of(d, d.train, cp.window, cp.horizon, stride, "training");
  const auto val = samples_of(d, d.val, cp.window, cp.horizon, cp.horizon, "validation");
  const auto test = samples_of(d, d.test, cp.window, cp.horizon, cp.horizon, "test");
  const PhysicalOutputRange range = physical_output_range(cp.model.physical, d.episodes, d.train);
  const auto rows = threshold_sweep(cp.model, range, train, val, test, sc);
  const fs::path dir = o.out;
  make_dir(dir);
  const auto names = state_names(d.vehicle());
  std::ofstream f = open_output(dir / "sweep.csv");
  f << "threshold,variant,state,rmse\n";
  for (const SweepRow& r : rows) {
    for (std::size_t i = 0; i < names.size(); ++i) {
      f << num(r.threshold) << ',' << r.variant << ',' << names[i] << ','
        << num(r.state_rmse[static_cast<Eigen::Index>(i)]) << '\n';
    }
    f << num(r.threshold) << ',' << r.variant << ",trajectory," << num(r.trajectory_rmse) << '\n';
  }
  out << cp.name << ": " << rows.size() << " sweep rows\n";
  return kExitOk;
}

void add_config_option(CLI::App* app, std::string& path) {
  app->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app->add_option("--config", path, "flat key = value file (keys are option names); flags win");
}

// Turns "key = value" lines of the --config file into "--key value" flags
// placed before the command-line flags, so that explicit flags win.
std::vector<std::string> expand_config(int argc, const char* const* argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    }
  }
  if (path.empty() || args.size() < 2) {
    return args;
  }
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot read config " + path);
  }
  std::vector<std::string> injected;
  std::string line;
  int line_no = 0;
  const auto trim = [](std::string x) {
    const auto b = x.find_first_not_of(" \t\r");
    const auto e = x.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : x.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DomainError(path + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || key == "config") {
      throw DomainError(path + ":" + std::to_string(line_no) + ": bad key");
    }
    injected.push_back("--" + key);
    injected.push_back(value);
  }
  args.insert(args.begin() + 2, injected.begin(), injected.end());
  return args;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Residual hybrid motion models: simulation, training, evaluation"};
  std::string config_path;
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every command");

  SimulateOptions sim;
  auto* s = app.add_subcommand("simulate", "generate episodes and split manifests");
  add_config_option(s, config_path);
  s->add_option("--vehicle", sim.vehicle, "ship or quad")->capture_default_str();
  s->add_option("--hours", sim.hours, "hours of data")->capture_default_str();
  s->add_option("--episode-minutes", sim.episode_minutes, "episode length (default 60 ship, 5 quad)");
  s->add_option("--seed", sim.seed, "dataset seed")->capture_default_str();
  s->add_option("--split", sim.split, "train,val,test ratios")->capture_default_str();
  s->add_option("--out", sim.out, "output directory")->envname("RESMOTION_OUT")->required();

  TrainOptions tr;
  auto* t = app.add_subcommand("train", "fit the physical part and train the corrector");
  add_config_option(t, config_path);
  t->add_option("--data", tr.data, "dataset directory")->required();
  t->add_option("--model", tr.model, "model string, e.g. Pro+Lin-2P")->required();
  t->add_option("--out", tr.out, "run directory")->envname("RESMOTION_OUT")->required();
  t->add_option("--hidden", tr.hidden, "LSTM hidden units")->capture_default_str();
  t->add_option("--layers", tr.layers, "LSTM layers")->capture_default_str();
  t->add_option("--window", tr.window, "initialization window, steps (default 60 ship, 100 quad)");
  t->add_option("--horizon", tr.horizon, "prediction horizon, steps (default 900 ship, 100 quad)");
  t->add_option("--stride", tr.stride, "training-sample stride (default 60 ship, 100 quad)");
  t->add_option("--lag", tr.lag, "QLag window")->capture_default_str();
  t->add_option("--epochs1", tr.training.phase1_epochs, "teacher-forced epochs (upper bound)")->capture_default_str();
  t->add_option("--epochs2", tr.training.phase2_epochs, "free-running epochs")->capture_default_str();
  t->add_option("--truncation", tr.training.initial_truncation, "first free-running truncation")
      ->capture_default_str();
  t->add_option("--patience", tr.training.patience, "early-stopping patience")->capture_default_str();
  add_training_options(t, tr.training);

  EvaluateOptions ev;
  auto* e = app.add_subcommand("evaluate", "state and trajectory errors of a checkpoint");
  add_config_option(e, config_path);
  e->add_option("--checkpoint", ev.checkpoint, "checkpoint.json")->required();
  e->add_option("--data", ev.data, "dataset directory")->required();
  e->add_option("--manifest", ev.manifest, "train, val or test")->capture_default_str();
  e->add_option("--out", ev.out, "report directory")->envname("RESMOTION_OUT")->required();

  SweepOptions sw;
  auto* w = app.add_subcommand("sweep", "error versus relative threshold");
  add_config_option(w, config_path);
  w->add_option("--checkpoint", sw.checkpoint, "checkpoint.json of an unconstrained model")->required();
  w->add_option("--data", sw.data, "dataset directory")->required();
  w->add_option("--thresholds", sw.thresholds, "relative thresholds, percent")->capture_default_str();
  w->add_option("--fine-tune-epochs", sw.fine_tune_epochs, "epochs per threshold")->capture_default_str();
  w->add_option("--stride", sw.stride, "training-sample stride");
  w->add_option("--out", sw.out, "output directory")->envname("RESMOTION_OUT")->required();
  add_training_options(w, sw.training);

  try {
    std::vector<std::string> args;
    try {
      args = expand_config(argc, argv);
    } catch (const IoError& x) {
      err << "error: " << x.what() << '\n';
      return kExitIo;
    } catch (const DomainError& x) {
      err << "error: " << x.what() << '\n';
      return kExitUsage;
    }
    std::vector<const char*> ptrs;
    for (const auto& a : args) {
      ptrs.push_back(a.c_str());
    }
    app.parse(static_cast<int>(ptrs.size()), ptrs.data());
  } catch (const CLI::ParseError& pe) {
    const int code = app.exit(pe, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*s) {
      return cmd_simulate(sim, out, err);
    }
    if (*t) {
      return cmd_train(tr, out, err);
    }
    if (*e) {
      return cmd_evaluate(ev, out, err);
    }
    return cmd_sweep(sw, out, err);
  } catch (const TrainingDivergence& x) {
    err << "error: " << x.what() << '\n';
    return kExitDivergence;
  } catch (const SimulationDivergence& x) {
    err << "error: " << x.what() << '\n';
    return kExitDivergence;
  } catch (const IoError& x) {
    err << "error: " << x.what() << '\n';
    return kExitIo;
  } catch (const DomainError& x) {
    err << "error: " << x.what() << '\n';
    return kExitUsage;
  } catch (const FormatError& x) {
    err << "error: " << x.what() << '\n';
    return kExitUsage;
  } catch (const FitError& x) {
    err << "error: " << x.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace resmotion
