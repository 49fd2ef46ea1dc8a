#include "resmotion/episode.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

namespace resmotion {

std::string to_string(Vehicle v) { return v == Vehicle::Ship ? "ship" : "quad"; }

Vehicle parse_vehicle(std::string_view text) {
  if (text == "ship") {
    return Vehicle::Ship;
  }
  if (text == "quad") {
    return Vehicle::Quad;
  }
  throw DomainError("unknown vehicle '" + std::string(text) + "' (expected ship or quad)");
}

VehicleLayout layout(Vehicle v) {
  return v == Vehicle::Ship ? VehicleLayout{5, 4, 4} : VehicleLayout{6, 4, 6};
}

void Episode::validate() const {
  const VehicleLayout dims = layout(vehicle);
  if (!(dt > 0.0)) {
    throw DomainError("Episode: dt must be positive");
  }
  if (states.cols() != dims.state_dim || controls.cols() != dims.control_dim ||
      poses.cols() != dims.pose_dim) {
    throw DomainError("Episode: column count does not match vehicle layout");
  }
  if (controls.rows() != states.rows() || poses.rows() != states.rows()) {
    throw DomainError("Episode: states, controls and poses differ in length");
  }
}

std::string episode_header(Vehicle v) {
  if (v == Vehicle::Ship) {
    return "t,u,w,p,r,phi,x,y,psi,c1,c2,c3,c4";
  }
  return "t,vx,vy,vz,p,q,r,x,y,z,phi,theta,psi,c1,c2,c3,c4";
}

namespace {

void append_number(std::string& line, double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  if (!line.empty()) {
    line += ',';
  }
  line += buf;
}

std::vector<double> parse_row(const std::string& line, std::size_t line_no) {
  std::vector<double> values;
  const char* p = line.c_str();
  while (*p != '\0') {
    char* end = nullptr;
    const double v = std::strtod(p, &end);
    if (end == p) {
      throw FormatError("episode line " + std::to_string(line_no) + ": expected a number");
    }
    values.push_back(v);
    p = end;
    if (*p == ',') {
      ++p;
    } else if (*p != '\0' && *p != '\r') {
      throw FormatError("episode line " + std::to_string(line_no) + ": unexpected character");
    } else {
      break;
    }
  }
  return values;
}

}  // namespace

void write_episode(const Episode& episode, std::ostream& out) {
  episode.validate();
  char buf[64];
  out << "# seed=" << episode.seed << '\n';
  std::snprintf(buf, sizeof buf, "%.17g", episode.dt);
  out << "# dt=" << buf << '\n';
  out << "# vehicle=" << to_string(episode.vehicle) << '\n';
  out << episode_header(episode.vehicle) << '\n';
  const bool ship = episode.vehicle == Vehicle::Ship;
  std::string line;
  for (Eigen::Index k = 0; k < episode.length(); ++k) {
    line.clear();
    append_number(line, static_cast<double>(k) * episode.dt);
    for (Eigen::Index i = 0; i < episode.states.cols(); ++i) {
      append_number(line, episode.states(k, i));
    }
    if (ship) {
      // phi is already part of the state columns
      append_number(line, episode.poses(k, 0));
      append_number(line, episode.poses(k, 1));
      append_number(line, episode.poses(k, 3));
    } else {
      for (Eigen::Index i = 0; i < episode.poses.cols(); ++i) {
        append_number(line, episode.poses(k, i));
      }
    }
    for (Eigen::Index i = 0; i < episode.controls.cols(); ++i) {
      append_number(line, episode.controls(k, i));
    }
    out << line << '\n';
  }
}

void write_episode(const Episode& episode, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open '" + path.string() + "' for writing");
  }
  write_episode(episode, out);
  if (!out) {
    throw IoError("failed writing '" + path.string() + "'");
  }
}

Episode read_episode(std::istream& in) {
  Episode ep;
  bool have_dt = false;
  bool have_vehicle = false;
  bool have_header = false;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        continue;
      }
      std::string key = line.substr(1, eq - 1);
      key.erase(0, key.find_first_not_of(' '));
      const std::string value = line.substr(eq + 1);
      if (key == "seed") {
        ep.seed = std::stoull(value);
      } else if (key == "dt") {
        ep.dt = std::stod(value);
        have_dt = true;
      } else if (key == "vehicle") {
        ep.vehicle = parse_vehicle(value);
        have_vehicle = true;
      }
      continue;
    }
    if (!have_header) {
      if (!have_vehicle || line != episode_header(ep.vehicle)) {
        throw FormatError("episode: missing vehicle tag or unexpected column header");
      }
      have_header = true;
      continue;
    }
    rows.push_back(parse_row(line, line_no));
  }
  if (!have_dt || !have_header) {
    throw FormatError("episode: missing dt or column header");
  }
  const VehicleLayout dims = layout(ep.vehicle);
  const bool ship = ep.vehicle == Vehicle::Ship;
  const std::size_t columns = 1 + static_cast<std::size_t>(dims.state_dim) +
                              (ship ? 3u : static_cast<std::size_t>(dims.pose_dim)) +
                              static_cast<std::size_t>(dims.control_dim);
  const auto n = static_cast<Eigen::Index>(rows.size());
  ep.states.resize(n, dims.state_dim);
  ep.poses.resize(n, dims.pose_dim);
  ep.controls.resize(n, dims.control_dim);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& row = rows[static_cast<std::size_t>(k)];
    if (row.size() != columns) {
      throw FormatError("episode row " + std::to_string(k) + ": wrong column count");
    }
    std::size_t c = 1;
    for (int i = 0; i < dims.state_dim; ++i) {
      ep.states(k, i) = row[c++];
    }
    if (ship) {
      ep.poses(k, 0) = row[c++];
      ep.poses(k, 1) = row[c++];
      ep.poses(k, 2) = ep.states(k, 4);
      ep.poses(k, 3) = row[c++];
    } else {
      for (int i = 0; i < dims.pose_dim; ++i) {
        ep.poses(k, i) = row[c++];
      }
    }
    for (int i = 0; i < dims.control_dim; ++i) {
      ep.controls(k, i) = row[c++];
    }
  }
  ep.validate();
  return ep;
}

Episode read_episode(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open '" + path.string() + "'");
  }
  return read_episode(in);
}

}  // namespace resmotion
