#include "dpps/agents.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <memory>

#include "dpps/env.hpp"
#include "test_stats.hpp"

namespace dpps {
namespace {

std::vector<double> selection_counts(const Agent& agent, int trials, Rng& rng) {
  std::vector<double> counts(agent.num_arms(), 0.0);
  for (int i = 0; i < trials; ++i) counts[agent.select(rng)] += 1.0;
  return counts;
}

const std::vector<std::vector<double>> kFixedHistory = {
    {0.1, 0.5, 0.9, 0.4},
    {0.3, 0.7},
    {0.6, 0.2, 0.55},
};

TEST(Dpps, SingleArmAlwaysSelectsIt) {
  DppsAgent agent(1, DPParams(2.0, BaseMeasure::uniform01()));
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(agent.select(rng), 0u);
    agent.update(0, 0.3, rng);
  }
  EXPECT_EQ(agent.rounds(), 100u);
  EXPECT_EQ(agent.counts()[0], 100u);
}

TEST(Dpps, NoninformativeLimitMatchesNptsSelectionFrequencies) {
  std::vector<DPParams> priors(3, DPParams(1e-9, BaseMeasure::uniform01()));
  DppsAgent dpps(priors);
  Rng sink(0);
  for (std::size_t k = 0; k < 3; ++k)
    for (double x : kFixedHistory[k]) dpps.update(k, x, sink);
  const NptsAgent npts(kFixedHistory);

  Rng a(2);
  Rng b(3);
  const auto fd = selection_counts(dpps, 10000, a);
  const auto fn = selection_counts(npts, 10000, b);
  EXPECT_GT(testing::chi_square_two_sample_p(fd, fn), 0.01);
}

TEST(Dpps, ConcentratedPosteriorsPickTheBetterArm) {
  DppsAgent agent(2, DPParams(2.0, BaseMeasure::uniform01()));
  Rng rng(4);
  for (int i = 0; i < 50; ++i) {
    agent.update(0, 1.0, rng);
    agent.update(1, 0.0, rng);
  }
  const auto counts = selection_counts(agent, 1000, rng);
  EXPECT_GT(counts[0] / 1000.0, 0.95);
}

TEST(Dpps, UpdateAppendsToOnlyThatArm) {
  DppsAgent agent(2, DPParams(2.0, BaseMeasure::uniform01(), 10));
  Rng rng(5);
  agent.update(1, 0.25, rng);
  const std::vector<double> before(agent.arm_state(1).observations().begin(),
                                   agent.arm_state(1).observations().end());
  agent.update(0, 0.75, rng);
  agent.update(0, 0.5, rng);
  const auto after = agent.arm_state(1).observations();
  ASSERT_EQ(after.size(), before.size());
  EXPECT_EQ(after[0], before[0]);
  EXPECT_EQ(agent.arm_state(0).n(), 2u);
  EXPECT_DOUBLE_EQ(agent.arm_state(0).posterior_concentration(), 4.0);

  // The new reward shows up as an atom of the next posterior draw.
  const RandomMeasure m = posterior_draw(agent.arm_state(0), rng);
  ASSERT_EQ(m.size(), 12u);
  EXPECT_EQ(m.atoms()[10].location, 0.75);
  EXPECT_EQ(m.atoms()[11].location, 0.5);
}

TEST(Dpps, HeterogeneousPriorsAreKeptPerArm) {
  AgentSpec spec{"dpps", DppsSpec{2.0, 100, BaseMeasure::uniform01(), {{2, BaseMeasure(BetaDist{1, 0.1})}}}};
  const auto agent = make_agent(spec, 3);
  const auto& dpps = dynamic_cast<const DppsAgent&>(*agent);
  EXPECT_DOUBLE_EQ(dpps.arm_state(0).params().base.mean(), 0.5);
  EXPECT_NEAR(dpps.arm_state(2).params().base.mean(), 1.0 / 1.1, 1e-15);
  spec.name = "bad";
  std::get<DppsSpec>(spec.kind).arm_bases.emplace(3, BaseMeasure::uniform01());
  EXPECT_THROW(make_agent(spec, 3), std::invalid_argument);
}

TEST(Npts, SinglePseudoRewardIsTheScore) {
  const NptsAgent agent(std::vector<std::vector<double>>{{0.2}, {0.9}, {0.5}});
  Rng rng(6);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(agent.select(rng), 1u);
}

TEST(Npts, SelectionIsArgmaxOfBootstrapMeans) {
  const NptsAgent agent(kFixedHistory);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng a(seed);
    Rng b(seed);
    std::vector<double> scores;
    for (const auto& h : kFixedHistory) scores.push_back(measure_mean(bayesian_bootstrap_draw(h, b)));
    EXPECT_EQ(agent.select(a), argmax_random_tie(scores, b));
  }
}

TEST(Npts, DefaultPseudoRewardIsOne) {
  const NptsAgent agent(4);
  for (std::size_t k = 0; k < 4; ++k) {
    ASSERT_EQ(agent.history(k).size(), 1u);
    EXPECT_EQ(agent.history(k)[0], 1.0);
  }
  EXPECT_THROW(NptsAgent(std::vector<std::vector<double>>{{1.0}, {}}), std::invalid_argument);
}

TEST(Npts, OptimisticStartExploresEveryArmEarly) {
  Rng env_rng(7);
  const BanditEnv env = make_standard_env("bernoulli6", env_rng);
  const int seeds = 1000;
  int covered = 0;
  for (int s = 0; s < seeds; ++s) {
    NptsAgent agent(6);
    Rng rng = make_stream(7, StreamDomain::kGeneric, s, 0);
    for (int t = 0; t < 60; ++t) {
      const std::size_t arm = agent.select(rng);
      agent.update(arm, env.sample_reward(arm, rng), rng);
    }
    covered += std::all_of(agent.counts().begin(), agent.counts().end(), [](std::size_t c) { return c > 0; });
  }
  EXPECT_GE(covered, 0.99 * seeds);
}

TEST(BetaTs, FlatPriorSelectsUniformly) {
  const BetaTsAgent agent(3);
  Rng rng(8);
  const auto counts = selection_counts(agent, 30000, rng);
  for (double c : counts) {
    const double p = c / 30000.0;
    EXPECT_NEAR(p, 1.0 / 3.0, 3.0 * std::sqrt((1.0 / 3.0) * (2.0 / 3.0) / 30000.0));
  }
}

TEST(BetaTs, SeparatedPosteriorsPickTheBetterArm) {
  BetaTsAgent agent(2);
  Rng rng(9);
  for (int i = 0; i < 99; ++i) {
    agent.update(0, 1.0, rng);
    agent.update(1, 0.0, rng);
  }
  agent.update(0, 0.0, rng);
  agent.update(1, 1.0, rng);
  ASSERT_EQ(agent.successes(0), 99.0);
  ASSERT_EQ(agent.failures(0), 1.0);
  const auto counts = selection_counts(agent, 10000, rng);
  EXPECT_GT(counts[0] / 10000.0, 0.999);
}

TEST(BetaTs, UpdateCountsSuccessesAndRejectsNonBinaryRewards) {
  BetaTsAgent agent(2);
  Rng rng(10);
  agent.update(0, 1.0, rng);
  EXPECT_EQ(agent.successes(0), 1.0);
  EXPECT_EQ(agent.failures(0), 0.0);
  EXPECT_THROW(agent.update(0, 0.5, rng), std::invalid_argument);
  EXPECT_EQ(agent.successes(0), 1.0);
  EXPECT_EQ(agent.failures(0), 0.0);
  EXPECT_EQ(agent.rounds(), 1u);
  EXPECT_EQ(agent.counts()[0], 1u);
  EXPECT_THROW(agent.update(2, 1.0, rng), std::out_of_range);
}

TEST(GeneralizedTs, CertainRewardIsAlwaysASuccess) {
  GeneralizedTsAgent agent(1);
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) agent.update(0, 1.0, rng);
  EXPECT_EQ(agent.successes(0), 1000.0);
  EXPECT_EQ(agent.failures(0), 0.0);
}

TEST(GeneralizedTs, HalfRewardsSplitEvenly) {
  GeneralizedTsAgent agent(1);
  Rng rng(12);
  const int n = 10000;
  for (int i = 0; i < n; ++i) agent.update(0, 0.5, rng);
  EXPECT_EQ(agent.successes(0) + agent.failures(0), n);
  EXPECT_NEAR(agent.successes(0), n / 2.0, 4.0 * std::sqrt(n * 0.25));
}

TEST(GeneralizedTs, MatchesBetaTsOnBinaryRewards) {
  BetaTsAgent plain(3);
  GeneralizedTsAgent general(3);
  Rng reward_rng(13);
  Rng a(14);
  Rng b(14);
  for (int t = 0; t < 500; ++t) {
    const std::size_t arm_a = plain.select(a);
    const std::size_t arm_b = general.select(b);
    ASSERT_EQ(arm_a, arm_b);
    const double r = bernoulli(0.3 + 0.2 * static_cast<double>(arm_a), reward_rng) ? 1.0 : 0.0;
    plain.update(arm_a, r, a);
    general.update(arm_b, r, b);
    // Bernoulli(0) and Bernoulli(1) trials consume one uniform; keep streams aligned.
    a();
  }
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(plain.successes(k), general.successes(k));
    EXPECT_EQ(plain.failures(k), general.failures(k));
  }
}

TEST(GeneralizedTs, RejectsRewardsOutsideUnitInterval) {
  GeneralizedTsAgent agent(1);
  Rng rng(15);
  EXPECT_THROW(agent.update(0, 1.5, rng), std::invalid_argument);
  EXPECT_THROW(agent.update(0, -0.1, rng), std::invalid_argument);
  EXPECT_EQ(agent.rounds(), 0u);
}

TEST(Ucb, PullsEveryArmOnceInOrderFirst) {
  UcbAgent agent(4);
  Rng rng(16);
  for (std::size_t t = 0; t < 4; ++t) {
    const std::size_t arm = agent.select(rng);
    EXPECT_EQ(arm, t);
    agent.update(arm, 1.0, rng);
  }
}

TEST(Ucb, LowerCountWinsAtEqualMeans) {
  UcbAgent agent(2);
  Rng rng(17);
  for (int i = 0; i < 10; ++i) agent.update(0, 0.5, rng);
  for (int i = 0; i < 3; ++i) agent.update(1, 0.5, rng);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(agent.select(rng), 1u);
}

TEST(Ucb, RejectsBadExplorationConstant) {
  EXPECT_THROW(UcbAgent(2, -1.0), std::invalid_argument);
  EXPECT_THROW(UcbAgent(2, std::nan("")), std::invalid_argument);
  EXPECT_THROW(UcbAgent(0), std::invalid_argument);
}

std::vector<std::unique_ptr<Agent>> all_agents(std::size_t k) {
  std::vector<std::unique_ptr<Agent>> out;
  out.push_back(make_agent({"dpps", DppsSpec{}}, k));
  out.push_back(make_agent({"npts", NptsSpec{}}, k));
  out.push_back(make_agent({"beta_ts", BetaTsSpec{}}, k));
  out.push_back(make_agent({"gts", GeneralizedTsSpec{}}, k));
  out.push_back(make_agent({"ucb", UcbSpec{}}, k));
  return out;
}

TEST(AllAgents, SelectIsAPureFunctionOfStateAndGenerator) {
  for (auto& agent : all_agents(4)) {
    Rng feed(18);
    for (int t = 0; t < 40; ++t) {
      const std::size_t arm = agent->select(feed);
      agent->update(arm, bernoulli(0.5, feed) ? 1.0 : 0.0, feed);
    }
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      Rng a(seed);
      Rng b(seed);
      EXPECT_EQ(agent->select(a), agent->select(b)) << agent->kind();
    }
  }
}

TEST(AllAgents, CountsTrackUpdates) {
  for (auto& agent : all_agents(3)) {
    Rng rng(19);
    for (int t = 0; t < 30; ++t) agent->update(static_cast<std::size_t>(t % 3), 1.0, rng);
    EXPECT_EQ(agent->rounds(), 30u);
    for (std::size_t c : agent->counts()) EXPECT_EQ(c, 10u);
  }
}

TEST(MakeAgent, ValidatesAgainstArmCount) {
  EXPECT_THROW(make_agent({"npts", NptsSpec{{0.01, 1.0}}}, 3), std::invalid_argument);
  EXPECT_NO_THROW(make_agent({"npts", NptsSpec{{0.01, 0.01, 1.0}}}, 3));
  EXPECT_THROW(make_agent({"x", BetaTsSpec{}}, 0), std::invalid_argument);
  const auto npts = make_agent({"npts", NptsSpec{{0.01, 0.01, 1.0}}}, 3);
  EXPECT_EQ(dynamic_cast<const NptsAgent&>(*npts).history(2)[0], 1.0);
  EXPECT_EQ(dynamic_cast<const NptsAgent&>(*npts).history(0)[0], 0.01);
}

}  // namespace
}  // namespace dpps
