#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "resmotion/common.hpp"

namespace resmotion {

enum class Vehicle { Ship, Quad };

std::string to_string(Vehicle v);
Vehicle parse_vehicle(std::string_view text);

/// Dimensions of state, control and pose vectors per vehicle.
struct VehicleLayout {
  int state_dim;
  int control_dim;
  int pose_dim;
};
VehicleLayout layout(Vehicle v);

/// Time-aligned sequences recorded at a fixed rate. Row k of each matrix is
/// sample k; controls row k is applied over [t_k, t_{k+1}).
///
/// Ship: states [u, w, p, r, phi], poses [x, y, phi, psi].
/// Quad: states [vx, vy, vz, p, q, r], poses [x, y, z, phi, theta, psi].
struct Episode {
  Vehicle vehicle = Vehicle::Ship;
  double dt = 1.0;
  std::uint64_t seed = 0;
  Mat states;
  Mat controls;
  Mat poses;

  Eigen::Index length() const { return states.rows(); }
  Vec state(Eigen::Index k) const { return states.row(k).transpose(); }
  Vec control(Eigen::Index k) const { return controls.row(k).transpose(); }
  Vec pose(Eigen::Index k) const { return poses.row(k).transpose(); }

  /// Throws DomainError on mismatched lengths/dimensions or dt <= 0.
  void validate() const;
};

/// CSV with `# seed=`, `# dt=`, `# vehicle=` header lines, a column-name row
/// and values printed with 9 significant digits.
void write_episode(const Episode& episode, std::ostream& out);
void write_episode(const Episode& episode, const std::filesystem::path& path);
Episode read_episode(std::istream& in);
Episode read_episode(const std::filesystem::path& path);

/// Column names in file order, e.g. "t,u,w,p,r,phi,x,y,psi,c1,c2,c3,c4".
std::string episode_header(Vehicle v);

}  // namespace resmotion
