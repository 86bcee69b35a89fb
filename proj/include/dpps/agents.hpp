#pragma once

// Arm-selection policies. Every agent follows the same two-call protocol:
// `select(rng)` samples an arm from the current state, `update(arm, reward,
// rng)` folds in the observed reward.

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dpps/dp.hpp"
#include "dpps/random.hpp"

namespace dpps {

class Agent {
 public:
  explicit Agent(std::size_t num_arms);
  virtual ~Agent() = default;

  virtual std::string_view kind() const = 0;

  /// Pure function of (state, rng): equal states and equal generators pick
  /// equal arms.
  virtual std::size_t select(Rng& rng) const = 0;

  /// Validates, applies the agent-specific update, then advances the
  /// per-arm counts and the round counter. A rejected update leaves the
  /// state untouched.
  void update(std::size_t arm, double reward, Rng& rng);

  std::size_t num_arms() const { return counts_.size(); }
  std::span<const std::size_t> counts() const { return counts_; }
  std::size_t rounds() const { return rounds_; }

 protected:
  virtual void apply_update(std::size_t arm, double reward, Rng& rng) = 0;

 private:
  std::vector<std::size_t> counts_;
  std::size_t rounds_ = 0;
};

/// Dirichlet Process Posterior Sampling. Each round draws one posterior
/// random measure per arm and plays the arm whose measure has the largest
/// mean. Priors may differ per arm.
class DppsAgent final : public Agent {
 public:
  explicit DppsAgent(std::vector<DPParams> arm_priors);
  DppsAgent(std::size_t num_arms, const DPParams& prior);

  std::string_view kind() const override { return "dpps"; }
  std::size_t select(Rng& rng) const override;
  const DPArmState& arm_state(std::size_t arm) const { return arms_.at(arm); }

 protected:
  void apply_update(std::size_t arm, double reward, Rng& rng) override;

 private:
  std::vector<DPArmState> arms_;
};

/// Non-parametric Thompson sampling: Dirichlet(1, ..., 1)-weighted average
/// of each arm's history, seeded with pseudo-rewards.
class NptsAgent final : public Agent {
 public:
  /// One pseudo-reward of 1 per arm.
  explicit NptsAgent(std::size_t num_arms);
  /// `initial_histories[k]` must be nonempty.
  explicit NptsAgent(std::vector<std::vector<double>> initial_histories);

  std::string_view kind() const override { return "npts"; }
  std::size_t select(Rng& rng) const override;
  std::span<const double> history(std::size_t arm) const { return histories_.at(arm); }

 protected:
  void apply_update(std::size_t arm, double reward, Rng& rng) override;

 private:
  std::vector<std::vector<double>> histories_;
};

/// Beta-Bernoulli Thompson sampling with a Beta(1, 1) prior. Rewards must
/// be exactly 0 or 1.
class BetaTsAgent : public Agent {
 public:
  explicit BetaTsAgent(std::size_t num_arms);

  std::string_view kind() const override { return "beta_ts"; }
  std::size_t select(Rng& rng) const override;
  double successes(std::size_t arm) const { return successes_.at(arm); }
  double failures(std::size_t arm) const { return failures_.at(arm); }

 protected:
  void apply_update(std::size_t arm, double reward, Rng& rng) override;
  void record(std::size_t arm, bool success);

 private:
  std::vector<double> successes_;
  std::vector<double> failures_;
};

/// Beta-Bernoulli Thompson sampling for rewards in [0, 1]: each reward r is
/// replaced by a Bernoulli(r) trial before the Beta update.
class GeneralizedTsAgent final : public BetaTsAgent {
 public:
  using BetaTsAgent::BetaTsAgent;

  std::string_view kind() const override { return "generalized_ts"; }

 protected:
  void apply_update(std::size_t arm, double reward, Rng& rng) override;
};

/// UCB1: each arm once, then argmax of mean_k + c * sqrt(2 ln t / n_k).
class UcbAgent final : public Agent {
 public:
  explicit UcbAgent(std::size_t num_arms, double exploration = 1.0);

  std::string_view kind() const override { return "ucb"; }
  std::size_t select(Rng& rng) const override;
  double exploration() const { return exploration_; }

 protected:
  void apply_update(std::size_t arm, double reward, Rng& rng) override;

 private:
  double exploration_;
  std::vector<double> sums_;
};

// Declarative agent descriptions used by the experiment harness.

struct DppsSpec {
  double alpha = kDefaultAlpha;
  std::size_t truncation = kDefaultTruncation;
  BaseMeasure base = BaseMeasure::uniform01();
  /// Per-arm overrides of `base`, keyed by 0-based arm index.
  std::map<std::size_t, BaseMeasure> arm_bases;
};

struct NptsSpec {
  /// One value for every arm, or exactly K values.
  std::vector<double> pseudo_rewards{1.0};
};

struct BetaTsSpec {};
struct GeneralizedTsSpec {};
struct UcbSpec {
  double exploration = 1.0;
};

struct AgentSpec {
  std::string name;
  std::variant<DppsSpec, NptsSpec, BetaTsSpec, GeneralizedTsSpec, UcbSpec> kind;
};

/// Throws std::invalid_argument when the spec does not fit a K-arm problem.
std::unique_ptr<Agent> make_agent(const AgentSpec& spec, std::size_t num_arms);

}  // namespace dpps
