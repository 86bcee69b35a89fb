#pragma once

// Reproducible regret experiments: replications, cumulative-regret traces,
// quantile summaries and the Bayesian-regret bound check.
//
// Randomness per replication comes from streams keyed by
// (master_seed, run_index, agent id) for the policy and
// (master_seed, run_index, arm) for rewards, so the j-th pull of arm k
// yields the same reward for every agent in the same run, and results never
// depend on how replications are scheduled across threads.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dpps/agents.hpp"
#include "dpps/env.hpp"

namespace dpps {

struct EnvSpec {
  /// Built-in environment, or empty when `arms` lists the arms inline.
  std::optional<StandardEnv> standard;
  /// Seed for environments whose instance is sampled (gauss7).
  std::uint64_t instance_seed = 0;
  std::vector<ArmDistribution> arms;
};

BanditEnv make_env(const EnvSpec& spec);

struct ExperimentConfig {
  EnvSpec env;
  std::vector<AgentSpec> agents;
  std::size_t horizon = 10000;
  std::size_t replications = 200;
  std::uint64_t master_seed = 1;
  std::size_t threads = 1;
  /// Trace rows and summary points are kept every `thinning` rounds (and
  /// always at the horizon).
  std::size_t thinning = 1;
  std::pair<double, double> quantiles{0.10, 0.90};
  std::filesystem::path trace_path;
  std::filesystem::path summary_path;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// One replication of one agent: cumulative expected regret after each of
/// the T rounds, plus per-arm pull counts and wall-clock time.
struct RegretTrace {
  std::vector<double> cum_regret;
  std::vector<std::size_t> pulls;
  double seconds = 0.0;
};

struct AgentRuns {
  std::string name;
  std::vector<RegretTrace> runs;  ///< indexed by run_index
};

struct AgentSummary {
  std::string name;
  std::vector<std::size_t> t;
  std::vector<double> mean;
  std::vector<double> q_lo;
  std::vector<double> q_hi;
  double runtime_seconds = 0.0;
};

struct ExperimentResult {
  std::vector<AgentRuns> agents;
  std::vector<AgentSummary> summaries;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

RegretTrace run_replication(const BanditEnv& env, Agent& agent, std::size_t horizon,
                            std::uint64_t master_seed, std::size_t run_index, std::size_t agent_id);

/// Runs `replications` independent replications with up to `threads` worker
/// threads; the result is indexed by run and identical for any thread count.
std::vector<RegretTrace> run_replications(const BanditEnv& env, const AgentSpec& spec,
                                          std::size_t horizon, std::size_t replications,
                                          std::uint64_t master_seed, std::size_t agent_id,
                                          std::size_t threads);

/// Runs every agent of the config (agent id = position in `agents`) and
/// summarizes. Does not touch the filesystem; see write_outputs.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Times at which traces and summaries are reported: thinning, 2*thinning,
/// ..., and always the horizon.
std::vector<std::size_t> report_times(std::size_t horizon, std::size_t thinning);

AgentSummary summarize(const AgentRuns& runs, std::size_t horizon, std::size_t thinning,
                       std::pair<double, double> quantiles);

/// CSV with header `agent,run,t,cum_regret`.
void write_trace_csv(const std::filesystem::path& path, const ExperimentResult& result,
                     std::size_t horizon, std::size_t thinning);

/// JSON object {agent -> {t, mean, q_lo, q_hi, runtime_seconds}}.
void write_summary_json(const std::filesystem::path& path, const std::vector<AgentSummary>& summaries);
std::vector<AgentSummary> read_summary_json(const std::filesystem::path& path);

/// Writes `contents` to a sibling temporary file and renames it over `path`.
void write_file_atomically(const std::filesystem::path& path, const std::string& contents);

/// sigma * sqrt(2 K ln(K) T).
double regret_bound(double sigma, std::size_t num_arms, std::size_t horizon);

struct BayesRegretCheck {
  double empirical = 0.0;
  double bound = 0.0;
  bool pass = false;
  std::vector<double> final_regrets;
};

using EnvSampler = std::function<BanditEnv(Rng&)>;
using AgentFactory = std::function<std::unique_ptr<Agent>(const BanditEnv&)>;

/// Samples one environment per replication from `sample_env` (stream keyed
/// by the run index), runs a fresh agent on it and compares the average
/// final regret with regret_bound(sigma, K, T).
BayesRegretCheck bayes_regret_check(const EnvSampler& sample_env, const AgentFactory& make,
                                    std::size_t horizon, std::size_t replications,
                                    std::uint64_t master_seed, double sigma, std::size_t threads = 1);

/// Runs `task(i)` for i in [0, count) on up to `threads` threads. The first
/// exception thrown by any task is rethrown after all workers stop.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& task);

/// Shortest round-trip decimal form of `x`.
std::string format_double(double x);

}  // namespace dpps
