#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include "resmotion/physical.hpp"

namespace resmotion {

enum class TrainingPhase { None, OneP, TwoP };

/// Parsed model string FIRSTPRINCIPLES+REGRESSION-PHASE, e.g. "Pro+Lin-2P",
/// "QLag-none", "MinQ-2P". "LSTM" names the corrector on a constant
/// regression (Bias).
struct ModelSpec {
  FirstPrinciplesKind first = FirstPrinciplesKind::None;
  RegressionKind regression = RegressionKind::None;
  TrainingPhase phase = TrainingPhase::TwoP;

  std::string name() const;
};

/// Throws DomainError on an unknown part, two parts of one kind, a missing
/// phase or no model part at all.
ModelSpec parse_model_spec(std::string_view text);

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDivergence = 3;
inline constexpr int kExitIo = 4;

/// Runs the command line (argv[0] is the program name) and returns the exit
/// code. Reports go to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace resmotion
