#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "resmotion/hybrid.hpp"

namespace resmotion {

inline constexpr int kCheckpointVersion = 1;

/// Everything needed to reproduce a trained model's predictions. The
/// first-principles part is stored by kind and rebuilt from the committed
/// vehicle parameters; every number is written with round-trip precision.
struct Checkpoint {
  std::string name;  // model string, e.g. "Pro+Lin-2P"
  HybridModel model;
  Eigen::Index window = 0;
  Eigen::Index horizon = 0;
};

void write_checkpoint(const Checkpoint& checkpoint, std::ostream& out);
void write_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);

/// Throws FormatError on malformed content or a version other than
/// kCheckpointVersion, IoError if the file cannot be read.
Checkpoint read_checkpoint(std::istream& in);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace resmotion
