#include "resmotion/checkpoint.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>

namespace resmotion {

using nlohmann::json;

namespace {

json vec_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    a.push_back(v[i]);
  }
  return a;
}

Vec json_vec(const json& a) {
  Vec v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  }
  return v;
}

json mat_json(const Mat& m) {
  json a = json::array();
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      a.push_back(m(i, j));
    }
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", a}};
}

void json_mat(const json& j, Mat& m) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const json& data = j.at("data");
  if (rows != m.rows() || cols != m.cols() || data.size() != static_cast<std::size_t>(rows * cols)) {
    throw FormatError("checkpoint: tensor shape does not match the architecture");
  }
  std::size_t k = 0;
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) {
      m(r, c) = data[k++].get<double>();
    }
  }
}

// JSON has no infinity; unbounded entries are written as "inf".
json beta_json(const Vec& beta) {
  json a = json::array();
  for (Eigen::Index i = 0; i < beta.size(); ++i) {
    if (std::isinf(beta[i])) {
      a.push_back("inf");
    } else {
      a.push_back(beta[i]);
    }
  }
  return a;
}

Vec json_beta(const json& a) {
  Vec v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].is_string()) {
      if (a[i].get<std::string>() != "inf") {
        throw FormatError("checkpoint: bad constraint bound");
      }
      v[static_cast<Eigen::Index>(i)] = kUnbounded;
    } else {
      v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
    }
  }
  return v;
}

}  // namespace

void write_checkpoint(const Checkpoint& checkpoint, std::ostream& out) {
  const HybridModel& m = checkpoint.model;
  const Normalizer& n = m.normalizer;
  json j;
  j["format"] = "resmotion-checkpoint";
  j["version"] = kCheckpointVersion;
  j["name"] = checkpoint.name;
  j["vehicle"] = to_string(m.physical.vehicle);
  j["window"] = checkpoint.window;
  j["horizon"] = checkpoint.horizon;
  j["first_principles"] = {{"kind", to_string(m.physical.first.kind)},
                           {"dt", m.physical.first.dt},
                           {"substeps", m.physical.first.substeps}};
  json weights = json::array();
  for (const Vec& w : m.physical.regression.weights) {
    weights.push_back(vec_json(w));
  }
  j["regression"] = {{"kind", to_string(m.physical.regression.kind)},
                     {"lag", m.physical.regression.lag},
                     {"weights", weights}};
  j["normalizer"] = {{"state_mean", vec_json(n.state_mean)},
                     {"state_std", vec_json(n.state_std)},
                     {"control_mean", vec_json(n.control_mean)},
                     {"control_std", vec_json(n.control_std)}};
  j["divergence_bound"] = m.divergence_bound;
  json corr;
  corr["layers"] = m.corrector.predictor.layers();
  corr["hidden"] = m.corrector.predictor.hidden();
  corr["constraint"] = m.corrector.constraint.active() ? beta_json(m.corrector.constraint.beta) : json();
  json tensors = json::array();
  if (m.has_corrector()) {
    for (const Mat* t : m.corrector.tensors()) {
      tensors.push_back(mat_json(*t));
    }
  }
  corr["tensors"] = tensors;
  j["corrector"] = corr;
  out << j.dump(1) << '\n';
  if (!out) {
    throw IoError("checkpoint: write failed");
  }
}

void write_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  write_checkpoint(checkpoint, out);
}

Checkpoint read_checkpoint(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "resmotion-checkpoint") {
      throw FormatError("checkpoint: not a model checkpoint");
    }
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw FormatError("checkpoint: version " + std::to_string(version) + " is not supported (expected " +
                        std::to_string(kCheckpointVersion) + ")");
    }
    Checkpoint cp;
    cp.name = j.at("name").get<std::string>();
    cp.window = j.at("window").get<Eigen::Index>();
    cp.horizon = j.at("horizon").get<Eigen::Index>();
    HybridModel& m = cp.model;
    m.physical.vehicle = parse_vehicle(j.at("vehicle").get<std::string>());
    const json& fp = j.at("first_principles");
    const FirstPrinciplesKind kind = parse_first_principles(fp.at("kind").get<std::string>());
    m.physical.first = FirstPrinciples::for_vehicle(kind, m.physical.vehicle, fp.at("dt").get<double>());
    m.physical.first.substeps = fp.at("substeps").get<int>();
    const json& reg = j.at("regression");
    m.physical.regression.kind = parse_regression(reg.at("kind").get<std::string>());
    m.physical.regression.lag = reg.at("lag").get<int>();
    for (const json& w : reg.at("weights")) {
      m.physical.regression.weights.push_back(json_vec(w));
    }
    const json& n = j.at("normalizer");
    m.normalizer.state_mean = json_vec(n.at("state_mean"));
    m.normalizer.state_std = json_vec(n.at("state_std"));
    m.normalizer.control_mean = json_vec(n.at("control_mean"));
    m.normalizer.control_std = json_vec(n.at("control_std"));
    m.divergence_bound = j.at("divergence_bound").get<double>();
    const json& corr = j.at("corrector");
    const int layers = corr.at("layers").get<int>();
    if (layers > 0) {
      const VehicleLayout lay = layout(m.physical.vehicle);
      const int hidden = corr.at("hidden").get<int>();
      Rng rng(0);
      m.corrector = Corrector::random(lay.state_dim, lay.control_dim, hidden, layers, rng);
      const auto tensors = m.corrector.tensors();
      const json& data = corr.at("tensors");
      if (data.size() != tensors.size()) {
        throw FormatError("checkpoint: wrong number of corrector tensors");
      }
      for (std::size_t i = 0; i < tensors.size(); ++i) {
        json_mat(data[i], *tensors[i]);
      }
    }
    if (!corr.at("constraint").is_null()) {
      m.corrector.constraint = OutputConstraint::bounded(json_beta(corr.at("constraint")));
    }
    return cp;
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  } catch (const DomainError& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot read " + path.string());
  }
  return read_checkpoint(in);
}

}  // namespace resmotion
