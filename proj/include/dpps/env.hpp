#pragma once

// K-arm stochastic reward generators with exact ground-truth means.

#include <cstddef>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dpps/random.hpp"

namespace dpps {

struct BernoulliArm {
  double p;
};

/// Beta(mean * concentration, (1 - mean) * concentration).
struct ScaledBetaArm {
  double mean;
  double concentration;
};

struct GaussianArm {
  double mu;
  double sigma;
};

struct BetaComponent {
  double a;
  double b;
};
struct PointMass {
  double at;
};

struct MixtureComponent {
  double weight;
  std::variant<BetaComponent, PointMass> dist;
};

struct MixtureArm {
  std::vector<MixtureComponent> components;
};

/// Uniform replay, with replacement, of a fixed pool of rewards.
struct EmpiricalArm {
  std::vector<double> pool;
};

using ArmDistribution = std::variant<BernoulliArm, ScaledBetaArm, GaussianArm, MixtureArm, EmpiricalArm>;

/// Analytic mean (pool average for EmpiricalArm). Throws on invalid params.
double arm_mean(const ArmDistribution& arm);
double sample_arm(const ArmDistribution& arm, Rng& rng);
std::string describe_arm(const ArmDistribution& arm);

/// Immutable after construction; sampling takes an explicit generator.
class BanditEnv {
 public:
  explicit BanditEnv(std::vector<ArmDistribution> arms);

  std::size_t num_arms() const { return arms_.size(); }
  std::span<const ArmDistribution> arms() const { return arms_; }
  std::span<const double> true_means() const { return true_means_; }
  double optimal_mean() const { return optimal_mean_; }
  std::size_t optimal_arm() const { return optimal_arm_; }

  /// Throws std::out_of_range for arm >= K.
  double sample_reward(std::size_t arm, Rng& rng) const;
  /// optimal_mean - true_means[arm].
  double instant_regret(std::size_t arm) const;
  /// True when every arm's rewards are confined to [0, 1].
  bool bounded_unit_interval() const;

 private:
  std::vector<ArmDistribution> arms_;
  std::vector<double> true_means_;
  double optimal_mean_ = 0.0;
  std::size_t optimal_arm_ = 0;
};

enum class StandardEnv { kBernoulli6, kBeta6, kGauss7, kCropYield7 };

StandardEnv parse_standard_env(std::string_view name);
std::string_view standard_env_name(StandardEnv env);

/// The built-in environments. Only gauss7 consumes `rng` (its arm means and
/// scales are sampled); the others are fixed tables.
BanditEnv make_standard_env(StandardEnv which, Rng& rng);
BanditEnv make_standard_env(std::string_view name, Rng& rng);

inline constexpr double kScaledBetaConcentration = 5.0;

/// Means of the bernoulli6 and beta6 environments.
inline constexpr double kSixArmMeans[] = {0.3, 0.4, 0.45, 0.5, 0.52, 0.55};

/// Error reading a reward or data file; names the file and, for parse
/// errors, the 1-based line.
class DataFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One real per line; blank lines ignored. Surrounding whitespace allowed.
std::vector<double> read_real_column(const std::filesystem::path& path);

}  // namespace dpps
