#include <gtest/gtest.h>

#include <cmath>

#include "efalcon/env.hpp"
#include "efalcon/error.hpp"
#include "efalcon/falcon.hpp"

using namespace efalcon;

namespace {

constexpr ModelShape kTwoArms{2, 1};

FalconConfig config_with(double epsilon, std::size_t tau1 = 4) {
  FalconConfig c;
  c.shape = kTwoArms;
  c.tau1 = tau1;
  c.rates = RateParams::linear(kTwoArms, 0.1);
  c.epsilon = epsilon;
  return c;
}

// Drives an agent through `horizon` rounds of an environment.
std::vector<Arm> drive(Agent& agent, Environment& env, std::size_t horizon) {
  std::vector<Arm> actions;
  for (std::size_t t = 1; t <= horizon; ++t) {
    const auto x = env.sample_context();
    const Arm a = agent.act(t, x);
    agent.observe(t, x, a, env.sample_reward(x, a));
    actions.push_back(a);
  }
  agent.finish(horizon);
  return actions;
}

EnvSpec sensitivity(double theta, std::uint64_t seed) {
  EnvSpec s;
  s.kind = EnvKind::SensitivityFamily;
  s.theta = theta;
  s.seed = seed;
  return s;
}

}  // namespace

TEST(EpochSchedule, Boundaries) {
  const EpochSchedule s(4);
  EXPECT_EQ(s.boundary(0), 0u);
  EXPECT_EQ(s.boundary(1), 4u);
  for (std::size_t m = 1; m < 30; ++m) EXPECT_EQ(s.boundary(m + 1), 2 * s.boundary(m));
  EXPECT_EQ(s.length(1), 4u);
  EXPECT_EQ(s.length(3), 8u);
  EXPECT_THROW(EpochSchedule(3), ConfigError);
}

TEST(EpochSchedule, EpochOfIsSmallestCoveringEpoch) {
  const EpochSchedule s(5);
  for (std::size_t t = 1; t <= 1000; ++t) {
    const auto m = s.epoch_of(t);
    EXPECT_GE(s.boundary(m), t);
    EXPECT_LT(s.boundary(m - 1), t);
  }
  EXPECT_THROW(s.epoch_of(0), SequencingError);
}

TEST(Gamma, FirstEpochIsOne) {
  EXPECT_EQ(gamma_for_epoch(1, EpochSchedule(4), RateParams::linear(kTwoArms), 2), 1.0);
}

TEST(Gamma, SecondEpochHandValue) {
  const double hand = std::sqrt(2.0 * 4.0 / (std::log(10.0) * 4.0));
  const double g = gamma_for_epoch(2, EpochSchedule(4), RateParams::linear(kTwoArms, 0.1), 2);
  EXPECT_NEAR(g, hand, 1e-14);
  EXPECT_NEAR(g, 0.9320, 1e-4);
}

TEST(Gamma, NondecreasingOnceEpochsDouble) {
  const EpochSchedule s(4);
  const auto rates = RateParams::linear(kTwoArms, 0.1);
  // Epochs 1 and 2 have the same length, so only the log term moves.
  EXPECT_LT(gamma_for_epoch(3, s, rates, 2), gamma_for_epoch(2, s, rates, 2));
  double previous = gamma_for_epoch(3, s, rates, 2);
  for (std::size_t m = 4; m <= 20; ++m) {
    const double g = gamma_for_epoch(m, s, rates, 2);
    EXPECT_GE(g, previous) << m;
    const double ratio = std::sqrt(2.0) * std::sqrt(std::log((m - 2) / 0.1) / std::log((m - 1) / 0.1));
    EXPECT_NEAR(g / previous, ratio, 1e-12) << m;
    previous = g;
  }
}

TEST(Gamma, GeneralizedRates) {
  RateParams r;
  r.rho = 0.5;
  r.rho_prime = 2.0;
  r.comp = 3.0;
  r.C3 = 2.0;
  r.delta = 0.2;
  const double length = 8.0;  // tau_2 - tau_1 for tau1 = 8
  const double hand =
      std::sqrt(2.0 * 3 * std::sqrt(length) / (std::pow(std::log(length), 2) * std::log(2 / 0.2) * 3.0));
  EXPECT_NEAR(gamma_for_epoch(3, EpochSchedule(8), r, 3), hand, 1e-13);
}

TEST(Gamma, Errors) {
  EXPECT_THROW(gamma_for_epoch(0, EpochSchedule(4), RateParams{}, 2), ConfigError);
  RateParams r;
  r.delta = 1.0;  // ln((m-1)/delta) = 0 at m = 2
  EXPECT_THROW(gamma_for_epoch(2, EpochSchedule(4), r, 2), ConfigError);
  EXPECT_THROW(r.validate(), ConfigError);
}

TEST(Slack, MatchesFormula) {
  const auto rates = RateParams::linear(kTwoArms, 0.1);
  EXPECT_NEAR(constraint_slack(3, 50, rates), std::log(12.0 * 9 / 0.1) * 4.0 / 50.0, 1e-15);
  EXPECT_THROW(constraint_slack(3, 0, rates), ConfigError);
}

TEST(CeilFraction, Examples) {
  EXPECT_EQ(ceil_fraction(0.25, 4), 1u);
  EXPECT_EQ(ceil_fraction(0.3, 10), 3u);
  EXPECT_EQ(ceil_fraction(0.1, 4), 1u);
  EXPECT_EQ(ceil_fraction(0.0, 1024), 0u);
  EXPECT_EQ(ceil_fraction(0.1, 8192), 820u);
}

TEST(TuneEpsilon, Examples) {
  EXPECT_EQ(tune_epsilon(0.0, 2, 1.0), 0.0);
  EXPECT_NEAR(tune_epsilon(0.025, 2, 1.0), std::pow(2.0, 0.8) * std::pow(0.025, 0.4), 1e-15);
  EXPECT_NEAR(tune_epsilon(0.025, 2, 1.0), 0.3984, 1e-3);
  EXPECT_EQ(tune_epsilon(100.0, 2, 1.0), 0.49);
  EXPECT_THROW(tune_epsilon(-1.0, 2, 1.0), ConfigError);
  EXPECT_THROW(tune_epsilon(0.1, 2, 0.0), ConfigError);
}

TEST(ActionKernel, EqualPredictionsAreUniform) {
  const auto k = action_kernel(LinearModel({3, 1}), Context(0.4), 5.0);
  for (double p : k.probs) EXPECT_NEAR(p, 1.0 / 3, 1e-15);
  EXPECT_EQ(k.best, 0u);
}

TEST(ActionKernel, TwoArmClosedForm) {
  const LinearModel f(kTwoArms, {0.7, 0.0, 0.4, 0.0});
  const auto k = action_kernel(f, Context(0.5), 10.0);
  EXPECT_EQ(k.best, 0u);
  EXPECT_NEAR(k.probs[1], 0.2, 1e-15);
  EXPECT_NEAR(k.probs[0], 0.8, 1e-15);
  const auto greedy = action_kernel(f, Context(0.5), 1e12);
  EXPECT_LT(greedy.probs[1], 1e-11);
  EXPECT_GT(greedy.probs[0], 1 - 1e-11);
  EXPECT_THROW(action_kernel(f, Context(0.5), 0.0), ConfigError);
}

TEST(ActionKernel, InvariantsOnRandomModels) {
  Rng rng(10);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t k = 2 + rng.below(5);
    std::vector<double> w;
    for (std::size_t i = 0; i < 2 * k; ++i) w.push_back(rng.uniform(0, 0.5));
    const LinearModel f({k, 1}, w);
    const double gamma = rng.uniform(0.1, 100);
    const auto kernel = action_kernel(f, Context(rng.uniform()), gamma);
    double total = 0.0;
    for (Arm a = 0; a < k; ++a) {
      const double p = kernel.probs[a];
      total += p;
      ASSERT_GE(p, 1.0 / (k + gamma) - 1e-15);
      ASSERT_LE(p, 1.0);
      ASSERT_LE(p, kernel.probs[kernel.best]);
      if (a != kernel.best) ASSERT_LE(p, 1.0 / k);
    }
    ASSERT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(ActionKernel, SamplingFrequenciesMatch) {
  const LinearModel f({3, 1}, {0.5, 0.2, 0.3, 0.1, 0.6, -0.3});
  const Context x(0.4);
  const auto kernel = action_kernel(f, x, 7.0);
  Rng rng(13);
  const int n = 100000;
  std::vector<int> counts(3, 0);
  for (int i = 0; i < n; ++i) ++counts[sample_arm(kernel, rng)];
  for (Arm a = 0; a < 3; ++a) {
    const double p = kernel.probs[a];
    EXPECT_NEAR(counts[a] / double(n), p, 3 * std::sqrt(p * (1 - p) / n)) << a;
  }
}

TEST(AgentState, InitialState) {
  const auto s = AgentState::initial(kTwoArms, EpochSchedule(4), 0.1);
  EXPECT_EQ(s.epoch, 1u);
  EXPECT_EQ(s.gamma, 1.0);
  EXPECT_EQ(s.model, LinearModel(kTwoArms));
  EXPECT_THROW(AgentState::initial(kTwoArms, EpochSchedule(4), 0.5), ConfigError);
}

TEST(AgentState, PhaseLayoutSecondEpoch) {
  auto s = AgentState::initial(kTwoArms, EpochSchedule(4), 0.25);
  s.epoch = 2;
  EXPECT_EQ(s.phase_of(5), Phase::Active);
  EXPECT_EQ(s.phase_of(6), Phase::Active);
  EXPECT_EQ(s.phase_of(7), Phase::Active);
  EXPECT_EQ(s.phase_of(8), Phase::Passive);
  EXPECT_THROW(s.phase_of(4), SequencingError);
  EXPECT_THROW(s.phase_of(9), SequencingError);
  Rng rng(1);
  EXPECT_THROW(act(s, 9, Context(0.5), rng), SequencingError);
}

TEST(AgentState, FirstEpochIsUniformEvenWhenActive) {
  const auto s = AgentState::initial(kTwoArms, EpochSchedule(100000), 0.0);
  Rng rng(2);
  const int n = 100000;
  int first = 0;
  for (int t = 1; t <= n; ++t) first += act(s, static_cast<std::size_t>(t), Context(0.3), rng) == 0;
  EXPECT_NEAR(first / double(n), 0.5, 3 * 0.5 / std::sqrt(n));
}

TEST(EndOfEpoch, EmptyPassiveFallsBackToOls) {
  auto s = AgentState::initial(kTwoArms, EpochSchedule(4), 0.0);
  Rng rng(3);
  for (int i = 0; i < 4; ++i) {
    const double x = rng.uniform();
    s.active_batch.append(Context(x), i % 2, 0.3 + x);
  }
  const auto update = end_of_epoch_update(s, RateParams::linear(kTwoArms), 1e-6);
  EXPECT_TRUE(update.event.unconstrained_fallback);
  EXPECT_EQ(update.next.model, fit_ols(s.active_batch, kTwoArms).model);
  EXPECT_EQ(update.next.epoch, 2u);
  EXPECT_TRUE(update.next.active_batch.empty());
  EXPECT_NEAR(update.next.gamma, 0.9320, 1e-4);
}

TEST(EndOfEpoch, RealizableWithLargeSlackIsErm) {
  EnvSpec spec;
  spec.kind = EnvKind::RealizableLinear;
  spec.seed = 4;
  Environment env(spec);
  auto s = AgentState::initial(kTwoArms, EpochSchedule(4), 0.25);
  s.epoch = 6;
  for (int i = 0; i < 300; ++i) {
    const auto x = env.sample_context();
    const Arm a = i % 2;
    (i < 200 ? s.active_batch : s.passive_batch).append(x, a, env.sample_reward(x, a));
  }
  RateParams rates = RateParams::linear(kTwoArms);
  rates.C1 = 1e6;
  const auto update = end_of_epoch_update(s, rates, 1e-6);
  EXPECT_FALSE(update.event.unconstrained_fallback);
  EXPECT_EQ(update.event.lambda_star, 0.0);
  EXPECT_EQ(update.next.model, fit_ols(s.active_batch, kTwoArms).model);
}

TEST(EndOfEpoch, ConstraintHoldsBackBiasedActiveFit) {
  const double theta = 0.05;
  const auto spec = sensitivity(theta, 12);
  Environment env(spec);
  const auto& fhat = env.best_linear_fit();
  auto s = AgentState::initial(kTwoArms, EpochSchedule(4), 0.25);
  s.epoch = 8;
  for (int i = 0; i < 10000; ++i) {
    const auto x = env.sample_context();
    const Arm a = fhat.best_arm(x);
    s.active_batch.append(x, a, env.sample_reward(x, a));
  }
  Rng coin(12, streams::kAgent);
  for (int i = 0; i < 10000; ++i) {
    const auto x = env.sample_context();
    const Arm a = coin.below(2);
    s.passive_batch.append(x, a, env.sample_reward(x, a));
  }
  const auto b = *exact_approximation_error(spec);
  const double slack = b + 0.005;

  // Unconstrained: arm 1 is only played where it pays 1, so it fits ~ 1 there.
  const auto erm = fit_ols(s.active_batch, kTwoArms).model;
  EXPECT_NEAR(erm.predict(Context(0.975), 0), 1.0, 0.02);
  const auto cons = make_constraint(s.passive_batch, slack, kTwoArms);
  EXPECT_GT(normalized_sse(erm, s.passive_batch), cons.alpha + slack);

  const auto out = constrained_fit(s.active_batch, cons, 1e-6, kTwoArms);
  EXPECT_LE(normalized_sse(out.model, s.passive_batch), cons.alpha + slack + 1e-6);
  // Arm 1's share of the passive excess is bounded by the budget, and for a
  // least-squares reference the excess is the mean squared prediction gap.
  DataBatch arm0;
  for (const auto& row : s.passive_batch.rows()) {
    if (row.arm == 0) arm0.append(row);
  }
  const auto ref = fit_ols(arm0, kTwoArms).model;
  double excess = 0.0;
  for (const auto& row : arm0.rows()) {
    const double d = out.model.predict(row.x, 0) - ref.predict(row.x, 0);
    excess += d * d;
  }
  EXPECT_LE(excess / double(s.passive_batch.size()), slack + 1e-6);
}

TEST(EpsilonFalconAgent, PassiveCountPerEpoch) {
  for (double eps : {0.1, 0.25, 0.3}) {
    EpsilonFalcon agent(config_with(eps), Rng(5, streams::kAgent));
    Environment env(sensitivity(0.05, 5));
    std::vector<std::size_t> passive(12, 0);
    for (std::size_t t = 1; t <= 4u << 10; ++t) {
      const auto x = env.sample_context();
      if (agent.phase_of(t) == Phase::Passive) ++passive[agent.epoch_of(t)];
      const Arm a = agent.act(t, x);
      agent.observe(t, x, a, env.sample_reward(x, a));
    }
    const EpochSchedule s(4);
    for (std::size_t m = 1; m <= 11; ++m) EXPECT_EQ(passive[m], ceil_fraction(eps, s.length(m)));
    for (const auto& e : agent.events()) {
      EXPECT_EQ(e.passive_rows, ceil_fraction(eps, s.length(e.m)));
      EXPECT_EQ(e.active_rows + e.passive_rows, s.length(e.m));
    }
  }
}

TEST(EpsilonFalconAgent, ConstraintTrackingEveryEpoch) {
  EpsilonFalcon agent(config_with(0.1), Rng(6, streams::kAgent));
  Environment env(sensitivity(0.05, 6));
  drive(agent, env, 1 << 14);
  for (const auto& e : agent.events()) {
    if (!e.complete) continue;
    EXPECT_FALSE(e.unconstrained_fallback);
    EXPECT_LE(e.passive_excess, e.slack + 1e-6) << e.m;
  }
}

TEST(EpsilonFalconAgent, Deterministic) {
  auto run = [] {
    EpsilonFalcon agent(config_with(0.1), Rng(9, streams::kAgent));
    Environment env(sensitivity(0.03, 9));
    return drive(agent, env, 3000);
  };
  EXPECT_EQ(run(), run());
}

TEST(EpsilonFalconAgent, PlainFalconEqualsZeroEpsilon) {
  EpsilonFalcon zero(config_with(0.0), Rng(9, streams::kAgent));
  EpsilonFalcon plain = plain_falcon(config_with(0.3), Rng(9, streams::kAgent));
  EXPECT_EQ(plain.name(), "falcon");
  Environment e1(sensitivity(0.05, 1)), e2(sensitivity(0.05, 1));
  EXPECT_EQ(drive(zero, e1, 5000), drive(plain, e2, 5000));
  for (const auto& e : plain.events()) {
    if (e.complete) EXPECT_TRUE(e.unconstrained_fallback);
  }
}

TEST(EpsilonFalconAgent, SnapshotsAndIncompleteEpoch) {
  EpsilonFalcon agent(config_with(0.1), Rng(2, streams::kAgent));
  Environment env(sensitivity(0.05, 2));
  drive(agent, env, 50);  // epochs end at 4, 8, 16, 32; epoch 5 is partial
  const auto events = agent.events();
  ASSERT_EQ(events.size(), 5u);
  EXPECT_FALSE(events.back().complete);
  EXPECT_EQ(events.back().tau_end, 50u);
  const auto snaps = agent.snapshots();
  ASSERT_EQ(snaps.size(), 5u);
  EXPECT_EQ(snaps[0].gamma, 1.0);
  EXPECT_EQ(snaps[0].model, LinearModel(kTwoArms));
  for (std::size_t i = 1; i < snaps.size(); ++i) {
    EXPECT_EQ(snaps[i].index, i + 1);
    EXPECT_EQ(snaps[i].model, events[i - 1].next_model);
    EXPECT_DOUBLE_EQ(snaps[i].gamma, gamma_for_epoch(i + 1, EpochSchedule(4), config_with(0.1).rates, 2));
  }
}

TEST(EpsilonFalconAgent, RejectsBadConfig) {
  EXPECT_THROW(EpsilonFalcon(config_with(0.6), Rng(1)), ConfigError);
  auto c = config_with(0.1);
  c.rates.delta = 0.7;
  EXPECT_THROW(EpsilonFalcon(c, Rng(1)), ConfigError);
}
