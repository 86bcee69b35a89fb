#pragma once

// Command-line driver: `run`, `plot`, `diagnose` and `density`.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace dpps {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,    ///< bad arguments, unreadable or invalid config/data
  kExitRuntime = 2,  ///< failure while running or writing outputs
};

/// `args` excludes the program name. Normal output goes to `out`,
/// diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Stick-weight diagnostics for DP(alpha, .) truncated at N atoms.
struct TruncationReport {
  std::vector<double> weights;  ///< one sampled prior draw
  std::size_t below_threshold = 0;
  double expected_tail = 0.0;    ///< E[T_N]
  double expected_tail_u = 0.0;  ///< E[U_N]
  /// Smallest N with E[T_N] <= threshold, or 0 when already satisfied.
  std::size_t recommended_truncation = 0;
};

inline constexpr double kWeightThreshold = 1e-10;

TruncationReport diagnose_truncation(double alpha, std::size_t truncation, double r, std::uint64_t seed);

}  // namespace dpps
