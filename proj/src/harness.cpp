#include "dpps/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <system_error>
#include <thread>

#include "json.hpp"

namespace dpps {

BanditEnv make_env(const EnvSpec& spec) {
  if (spec.standard) {
    Rng rng = make_stream(spec.instance_seed, StreamDomain::kEnvInstance, 0, 0);
    return make_standard_env(*spec.standard, rng);
  }
  return BanditEnv(spec.arms);
}

void ExperimentConfig::validate() const {
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  if (replications < 1) throw std::invalid_argument("replications must be at least 1");
  if (threads < 1) throw std::invalid_argument("threads must be at least 1");
  if (thinning < 1) throw std::invalid_argument("thinning must be at least 1");
  const auto [lo, hi] = quantiles;
  if (!(lo > 0.0 && hi < 1.0 && lo < hi))
    throw std::invalid_argument("quantiles must satisfy 0 < lower < upper < 1");
  if (agents.empty()) throw std::invalid_argument("at least one agent is required");
  if (!env.standard && env.arms.empty()) throw std::invalid_argument("environment has no arms");
  for (std::size_t i = 0; i < agents.size(); ++i)
    for (std::size_t j = i + 1; j < agents.size(); ++j)
      if (agents[i].name == agents[j].name)
        throw std::invalid_argument("duplicate agent name '" + agents[i].name + "'");
}

RegretTrace run_replication(const BanditEnv& env, Agent& agent, std::size_t horizon,
                            std::uint64_t master_seed, std::size_t run_index, std::size_t agent_id) {
  if (agent.num_arms() != env.num_arms())
    throw std::invalid_argument("agent and environment disagree on the number of arms");
  const auto start = std::chrono::steady_clock::now();

  Rng policy_rng = make_stream(master_seed, StreamDomain::kAgent, run_index, agent_id);
  std::vector<Rng> reward_rngs;
  reward_rngs.reserve(env.num_arms());
  for (std::size_t k = 0; k < env.num_arms(); ++k)
    reward_rngs.push_back(make_stream(master_seed, StreamDomain::kArmReward, run_index, k));

  RegretTrace trace;
  trace.cum_regret.resize(horizon);
  trace.pulls.assign(env.num_arms(), 0);
  double cumulative = 0.0;
  for (std::size_t t = 0; t < horizon; ++t) {
    const std::size_t arm = agent.select(policy_rng);
    const double reward = env.sample_reward(arm, reward_rngs[arm]);
    agent.update(arm, reward, policy_rng);
    cumulative += env.instant_regret(arm);
    trace.cum_regret[t] = cumulative;
    ++trace.pulls[arm];
  }
  trace.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return trace;
}

void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& task) {
  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count && !failed; i = next++) {
          try {
            task(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            failed = true;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

std::vector<RegretTrace> run_replications(const BanditEnv& env, const AgentSpec& spec,
                                          std::size_t horizon, std::size_t replications,
                                          std::uint64_t master_seed, std::size_t agent_id,
                                          std::size_t threads) {
  // Fail fast on specs that do not fit the environment.
  make_agent(spec, env.num_arms());
  std::vector<RegretTrace> runs(replications);
  parallel_for(replications, threads, [&](std::size_t run) {
    auto agent = make_agent(spec, env.num_arms());
    runs[run] = run_replication(env, *agent, horizon, master_seed, run, agent_id);
  });
  return runs;
}

std::vector<std::size_t> report_times(std::size_t horizon, std::size_t thinning) {
  std::vector<std::size_t> times;
  for (std::size_t t = thinning; t <= horizon; t += thinning) times.push_back(t);
  if (times.empty() || times.back() != horizon) times.push_back(horizon);
  return times;
}

AgentSummary summarize(const AgentRuns& runs, std::size_t horizon, std::size_t thinning,
                       std::pair<double, double> quantiles) {
  AgentSummary s;
  s.name = runs.name;
  s.t = report_times(horizon, thinning);
  const std::size_t r = runs.runs.size();
  std::vector<double> column(r);
  for (std::size_t t : s.t) {
    double sum = 0.0;
    for (std::size_t i = 0; i < r; ++i) {
      column[i] = runs.runs[i].cum_regret[t - 1];
      sum += column[i];
    }
    s.mean.push_back(sum / static_cast<double>(r));
    s.q_lo.push_back(sample_quantile(column, quantiles.first));
    s.q_hi.push_back(sample_quantile(column, quantiles.second));
  }
  for (const auto& run : runs.runs) s.runtime_seconds += run.seconds;
  return s;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const BanditEnv env = make_env(config.env);
  for (const auto& spec : config.agents) make_agent(spec, env.num_arms());

  ExperimentResult result;
  result.agents.resize(config.agents.size());
  for (std::size_t a = 0; a < config.agents.size(); ++a) {
    result.agents[a].name = config.agents[a].name;
    result.agents[a].runs.resize(config.replications);
  }
  // One task per (agent, run) so every thread stays busy across agents.
  const std::size_t tasks = config.agents.size() * config.replications;
  parallel_for(tasks, config.threads, [&](std::size_t task) {
    const std::size_t a = task / config.replications;
    const std::size_t run = task % config.replications;
    auto agent = make_agent(config.agents[a], env.num_arms());
    result.agents[a].runs[run] =
        run_replication(env, *agent, config.horizon, config.master_seed, run, a);
  });
  for (const auto& runs : result.agents)
    result.summaries.push_back(summarize(runs, config.horizon, config.thinning, config.quantiles));
  return result;
}

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

void write_file_atomically(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write output file '" + path.string() + "'");
    out << contents;
    out.flush();
    if (!out) throw IoError("failed while writing output file '" + path.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into place at '" + path.string() + "'");
  }
}

void write_trace_csv(const std::filesystem::path& path, const ExperimentResult& result,
                     std::size_t horizon, std::size_t thinning) {
  const auto times = report_times(horizon, thinning);
  std::string out = "agent,run,t,cum_regret\n";
  for (const auto& agent : result.agents) {
    for (std::size_t run = 0; run < agent.runs.size(); ++run) {
      const std::string prefix = agent.name + "," + std::to_string(run) + ",";
      for (std::size_t t : times) {
        out += prefix;
        out += std::to_string(t);
        out += ',';
        out += format_double(agent.runs[run].cum_regret[t - 1]);
        out += '\n';
      }
    }
  }
  write_file_atomically(path, out);
}

void write_summary_json(const std::filesystem::path& path, const std::vector<AgentSummary>& summaries) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (const auto& s : summaries) {
    doc[s.name] = {
        {"t", s.t},
        {"mean", s.mean},
        {"q_lo", s.q_lo},
        {"q_hi", s.q_hi},
        {"runtime_seconds", s.runtime_seconds},
    };
  }
  write_file_atomically(path, doc.dump(1) + "\n");
}

std::vector<AgentSummary> read_summary_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open summary file '" + path.string() + "'");
  nlohmann::ordered_json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("summary file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) throw IoError("summary file '" + path.string() + "' must hold a JSON object");
  std::vector<AgentSummary> out;
  for (const auto& [name, entry] : doc.items()) {
    try {
      AgentSummary s;
      s.name = name;
      s.t = entry.at("t").get<std::vector<std::size_t>>();
      s.mean = entry.at("mean").get<std::vector<double>>();
      s.q_lo = entry.at("q_lo").get<std::vector<double>>();
      s.q_hi = entry.at("q_hi").get<std::vector<double>>();
      s.runtime_seconds = entry.at("runtime_seconds").get<double>();
      if (s.mean.size() != s.t.size() || s.q_lo.size() != s.t.size() || s.q_hi.size() != s.t.size())
        throw IoError("arrays of agent '" + name + "' differ in length");
      out.push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      throw IoError("summary file '" + path.string() + "', agent '" + name + "': " + e.what());
    }
  }
  return out;
}

double regret_bound(double sigma, std::size_t num_arms, std::size_t horizon) {
  if (!(sigma > 0.0) || num_arms < 1 || horizon < 1)
    throw std::invalid_argument("regret_bound needs sigma > 0, K >= 1, T >= 1");
  const double k = static_cast<double>(num_arms);
  return sigma * std::sqrt(2.0 * k * std::log(k) * static_cast<double>(horizon));
}

BayesRegretCheck bayes_regret_check(const EnvSampler& sample_env, const AgentFactory& make,
                                    std::size_t horizon, std::size_t replications,
                                    std::uint64_t master_seed, double sigma, std::size_t threads) {
  if (replications < 1) throw std::invalid_argument("bayes_regret_check needs at least one replication");
  BayesRegretCheck check;
  check.final_regrets.resize(replications);
  std::vector<std::size_t> arm_counts(replications);
  parallel_for(replications, threads, [&](std::size_t run) {
    Rng env_rng = make_stream(master_seed, StreamDomain::kEnvInstance, run, 0);
    const BanditEnv env = sample_env(env_rng);
    auto agent = make(env);
    const RegretTrace trace = run_replication(env, *agent, horizon, master_seed, run, 0);
    check.final_regrets[run] = trace.cum_regret.back();
    arm_counts[run] = env.num_arms();
  });
  if (std::adjacent_find(arm_counts.begin(), arm_counts.end(), std::not_equal_to<>()) != arm_counts.end())
    throw std::invalid_argument("bayes_regret_check: sampled environments differ in arm count");
  double sum = 0.0;
  for (double r : check.final_regrets) sum += r;
  check.empirical = sum / static_cast<double>(replications);
  check.bound = regret_bound(sigma, arm_counts.front(), horizon);
  // K = 1 gives a zero bound and zero regret; allow rounding noise.
  check.pass = check.empirical <= check.bound + 1e-9;
  return check;
}

}  // namespace dpps
