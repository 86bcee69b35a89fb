#include "dpps/agents.hpp"

#include <cmath>
#include <stdexcept>

namespace dpps {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::size_t require_arms(std::size_t k) {
  if (k == 0) throw std::invalid_argument("agent needs at least one arm");
  return k;
}

}  // namespace

Agent::Agent(std::size_t num_arms) : counts_(require_arms(num_arms), 0) {}

void Agent::update(std::size_t arm, double reward, Rng& rng) {
  if (arm >= counts_.size()) throw std::out_of_range("agent update: arm index out of range");
  apply_update(arm, reward, rng);
  ++counts_[arm];
  ++rounds_;
}

DppsAgent::DppsAgent(std::vector<DPParams> arm_priors) : Agent(arm_priors.size()) {
  arms_.reserve(arm_priors.size());
  for (auto& p : arm_priors) arms_.emplace_back(std::move(p));
}

DppsAgent::DppsAgent(std::size_t num_arms, const DPParams& prior)
    : DppsAgent(std::vector<DPParams>(require_arms(num_arms), prior)) {}

std::size_t DppsAgent::select(Rng& rng) const {
  std::vector<double> scores(arms_.size());
  for (std::size_t k = 0; k < arms_.size(); ++k) scores[k] = posterior_mean_draw(arms_[k], rng);
  return argmax_random_tie(scores, rng);
}

void DppsAgent::apply_update(std::size_t arm, double reward, Rng&) {
  if (!std::isfinite(reward)) throw std::invalid_argument("dpps: reward must be finite");
  arms_[arm].observe(reward);
}

NptsAgent::NptsAgent(std::size_t num_arms)
    : NptsAgent(std::vector<std::vector<double>>(require_arms(num_arms), std::vector<double>{1.0})) {}

NptsAgent::NptsAgent(std::vector<std::vector<double>> initial_histories)
    : Agent(initial_histories.size()), histories_(std::move(initial_histories)) {
  for (const auto& h : histories_)
    if (h.empty()) throw std::invalid_argument("npts: every arm needs at least one pseudo-reward");
}

std::size_t NptsAgent::select(Rng& rng) const {
  std::vector<double> scores(histories_.size());
  for (std::size_t k = 0; k < histories_.size(); ++k)
    scores[k] = bayesian_bootstrap_mean_draw(histories_[k], rng);
  return argmax_random_tie(scores, rng);
}

void NptsAgent::apply_update(std::size_t arm, double reward, Rng&) {
  if (!std::isfinite(reward)) throw std::invalid_argument("npts: reward must be finite");
  histories_[arm].push_back(reward);
}

BetaTsAgent::BetaTsAgent(std::size_t num_arms)
    : Agent(num_arms), successes_(num_arms, 0.0), failures_(num_arms, 0.0) {}

std::size_t BetaTsAgent::select(Rng& rng) const {
  std::vector<double> scores(successes_.size());
  for (std::size_t k = 0; k < scores.size(); ++k)
    scores[k] = beta(1.0 + successes_[k], 1.0 + failures_[k], rng);
  return argmax_random_tie(scores, rng);
}

void BetaTsAgent::record(std::size_t arm, bool success) {
  if (success)
    successes_[arm] += 1.0;
  else
    failures_[arm] += 1.0;
}

void BetaTsAgent::apply_update(std::size_t arm, double reward, Rng&) {
  if (reward != 0.0 && reward != 1.0)
    throw std::invalid_argument("beta_ts: reward must be 0 or 1 (use generalized_ts for [0, 1] rewards)");
  record(arm, reward == 1.0);
}

void GeneralizedTsAgent::apply_update(std::size_t arm, double reward, Rng& rng) {
  if (!(reward >= 0.0 && reward <= 1.0))
    throw std::invalid_argument("generalized_ts: reward must lie in [0, 1]");
  record(arm, bernoulli(reward, rng));
}

UcbAgent::UcbAgent(std::size_t num_arms, double exploration)
    : Agent(num_arms), exploration_(exploration), sums_(num_arms, 0.0) {
  if (!(exploration >= 0.0) || !std::isfinite(exploration))
    throw std::invalid_argument("ucb: exploration constant must be finite and nonnegative");
}

std::size_t UcbAgent::select(Rng& rng) const {
  const auto n = counts();
  for (std::size_t k = 0; k < n.size(); ++k)
    if (n[k] == 0) return k;
  const double log_t = std::log(static_cast<double>(rounds()));
  std::vector<double> scores(n.size());
  for (std::size_t k = 0; k < n.size(); ++k) {
    const double nk = static_cast<double>(n[k]);
    scores[k] = sums_[k] / nk + exploration_ * std::sqrt(2.0 * log_t / nk);
  }
  return argmax_random_tie(scores, rng);
}

void UcbAgent::apply_update(std::size_t arm, double reward, Rng&) {
  if (!std::isfinite(reward)) throw std::invalid_argument("ucb: reward must be finite");
  sums_[arm] += reward;
}

std::unique_ptr<Agent> make_agent(const AgentSpec& spec, std::size_t num_arms) {
  require_arms(num_arms);
  return std::visit(
      Overloaded{
          [&](const DppsSpec& s) -> std::unique_ptr<Agent> {
            std::vector<DPParams> priors;
            priors.reserve(num_arms);
            for (std::size_t k = 0; k < num_arms; ++k) priors.emplace_back(s.alpha, s.base, s.truncation);
            for (const auto& [arm, base] : s.arm_bases) {
              if (arm >= num_arms)
                throw std::invalid_argument("agent '" + spec.name + "': base override for arm " +
                                            std::to_string(arm) + " but the environment has " +
                                            std::to_string(num_arms) + " arms");
              priors[arm] = DPParams(s.alpha, base, s.truncation);
            }
            return std::make_unique<DppsAgent>(std::move(priors));
          },
          [&](const NptsSpec& s) -> std::unique_ptr<Agent> {
            if (s.pseudo_rewards.size() != 1 && s.pseudo_rewards.size() != num_arms)
              throw std::invalid_argument("agent '" + spec.name + "': pseudo_rewards needs 1 or " +
                                          std::to_string(num_arms) + " values");
            std::vector<std::vector<double>> histories(num_arms);
            for (std::size_t k = 0; k < num_arms; ++k)
              histories[k] = {s.pseudo_rewards.size() == 1 ? s.pseudo_rewards[0] : s.pseudo_rewards[k]};
            return std::make_unique<NptsAgent>(std::move(histories));
          },
          [&](const BetaTsSpec&) -> std::unique_ptr<Agent> { return std::make_unique<BetaTsAgent>(num_arms); },
          [&](const GeneralizedTsSpec&) -> std::unique_ptr<Agent> {
            return std::make_unique<GeneralizedTsAgent>(num_arms);
          },
          [&](const UcbSpec& s) -> std::unique_ptr<Agent> {
            return std::make_unique<UcbAgent>(num_arms, s.exploration);
          },
      },
      spec.kind);
}

}  // namespace dpps
