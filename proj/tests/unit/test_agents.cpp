#include <gtest/gtest.h>

#include <cmath>

#include "efalcon/agent.hpp"
#include "efalcon/error.hpp"

using namespace efalcon;

namespace {

constexpr ModelShape kTwoArms{2, 1};

LinUcbConfig ucb_config(double alpha, std::size_t batch = 100) {
  LinUcbConfig c;
  c.shape = kTwoArms;
  c.alpha_ucb = alpha;
  c.batch_size = batch;
  return c;
}

}  // namespace

TEST(UniformAgent, FrequenciesNearOneOverK) {
  UniformAgent agent(4, Rng(3, streams::kAgent));
  const int n = 100000;
  std::vector<int> counts(4, 0);
  for (int t = 1; t <= n; ++t) ++counts[agent.act(static_cast<std::size_t>(t), Context(0.5))];
  for (int c : counts) EXPECT_NEAR(c / double(n), 0.25, 3 * std::sqrt(0.25 * 0.75 / n));
}

TEST(OptimalAgent, PlaysTrueArgmax) {
  EnvSpec spec;
  spec.kind = EnvKind::StepFunction;
  OptimalAgent agent(spec);
  EXPECT_EQ(agent.act(1, Context(0.8)), 0u);
  EXPECT_EQ(agent.act(2, Context(0.2)), 1u);
}

TEST(LinUcb, ModelFrozenBetweenBatches) {
  LinUcb agent(ucb_config(0.0, 10));
  for (std::size_t t = 1; t <= 9; ++t) {
    agent.observe(t, Context(0.1 * t), t % 2, 1.0);
    EXPECT_EQ(agent.model(), LinearModel(kTwoArms)) << t;
  }
  agent.observe(10, Context(0.5), 0, 1.0);
  EXPECT_NE(agent.model(), LinearModel(kTwoArms));
  EXPECT_EQ(agent.snapshots().size(), 2u);
  EXPECT_EQ(agent.epoch_of(10), 1u);
  EXPECT_EQ(agent.epoch_of(11), 2u);
}

TEST(LinUcb, ZeroBonusIsGreedyOnFittedMeans) {
  LinUcb agent(ucb_config(0.0, 1000));
  Rng rng(4);
  for (std::size_t t = 1; t <= 1000; ++t) {
    const double x = rng.uniform();
    const Arm a = rng.below(2);
    agent.observe(t, Context(x), a, a == 0 ? x : 1 - x);
  }
  for (double x : {0.1, 0.3, 0.7, 0.9}) {
    const auto& f = agent.model();
    EXPECT_EQ(agent.act(2000, Context(x)), f.best_arm(Context(x)));
    EXPECT_EQ(agent.act(2000, Context(x)), x > 0.5 ? 0u : 1u);
  }
}

TEST(LinUcb, RidgeEstimateMatchesClosedForm) {
  // One arm, intercept-only data: estimate is sum(r) / (n + ridge) for the
  // intercept when all contexts are 0.
  LinUcb agent(ucb_config(0.0, 5));
  for (std::size_t t = 1; t <= 5; ++t) agent.observe(t, Context(0.0), 0, 2.0);
  EXPECT_NEAR(agent.model().weights(0)[0], 10.0 / 6.0, 1e-12);
  EXPECT_EQ(agent.model().weights(0)[1], 0.0);
}

TEST(LinUcb, BonusShrinksWithData) {
  LinUcb agent(ucb_config(1.0, 1));
  const Context x(0.5);
  double previous = agent.upper_bound(x, 1) - agent.model().predict(x, 1);
  for (std::size_t t = 1; t <= 50; ++t) {
    agent.observe(t, x, 1, 0.0);
    const double width = agent.upper_bound(x, 1) - agent.model().predict(x, 1);
    EXPECT_LT(width, previous);
    previous = width;
  }
}

TEST(LinUcb, Validation) {
  EXPECT_THROW(LinUcb(ucb_config(-1.0)), ConfigError);
  EXPECT_THROW(LinUcb(ucb_config(0.1, 0)), ConfigError);
  LinUcb agent(ucb_config(0.1));
  EXPECT_THROW(agent.observe(1, Context(0.1), 2, 0.0), InvalidArmError);
}
