#pragma once

// Plain-text run configuration: `key = value` lines, `#` comments and one
// `[agent NAME]` section per agent. The full schema lives in
// docs/config.md.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "dpps/dp.hpp"
#include "dpps/env.hpp"
#include "dpps/harness.hpp"

namespace dpps {

/// Schema or syntax problem in a config file; the message starts with
/// `origin:line:` when a line is at fault.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses config text. Relative `arm = empirical FILE` paths resolve
/// against `base_dir`; output paths are left as written.
ExperimentConfig parse_run_config(std::string_view text, std::string_view origin = "<config>",
                                  const std::filesystem::path& base_dir = {});

/// Reads and parses a config file. A missing file is a ConfigError.
ExperimentConfig load_run_config(const std::filesystem::path& path);

/// "beta A B", "gaussian MU SIGMA", "uniform LO HI" or "atoms X1 X2 ...".
BaseMeasure parse_base_measure(std::string_view text);

/// "bernoulli P", "scaled_beta MEAN CONCENTRATION", "gaussian MU SIGMA",
/// "empirical FILE" or "mixture W1 COMPONENT | W2 COMPONENT ..." where a
/// component is "point X" or "beta A B".
ArmDistribution parse_arm(std::string_view text, const std::filesystem::path& base_dir = {});

}  // namespace dpps
