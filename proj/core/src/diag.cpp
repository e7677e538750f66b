#include "efalcon/diag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "efalcon/error.hpp"

namespace efalcon {

RewardFn truth_of(const EnvSpec& spec) {
  auto env = std::make_shared<const Environment>(spec);
  return [env](const Context& x, Arm a) { return env->mean_reward(x, a); };
}

RewardFn model_fn(LinearModel model) {
  return [model = std::move(model)](const Context& x, Arm a) { return model.predict(x, a); };
}

Policy Policy::optimal(const EnvSpec& spec) {
  auto env = std::make_shared<const Environment>(spec);
  return {[env](const Context& x) { return env->optimal_action(x); }, Source::Optimal, "optimal"};
}

Policy Policy::induced(LinearModel model, std::string label) {
  return {[model = std::move(model)](const Context& x) { return model.best_arm(x); },
          Source::Induced, std::move(label)};
}

Policy Policy::constant(Arm arm) {
  return {[arm](const Context&) { return arm; }, Source::Constant,
          "constant_arm_" + std::to_string(arm + 1)};
}

Arm greedy_arm(const RewardFn& f, const Context& x, std::size_t arms) {
  Arm best = 0;
  double best_value = f(x, 0);
  for (Arm a = 1; a < arms; ++a) {
    const double v = f(x, a);
    if (v > best_value) {
      best = a;
      best_value = v;
    }
  }
  return best;
}

std::vector<Context> draw_contexts(std::size_t dim, std::size_t count, std::uint64_t seed) {
  Rng rng(seed, streams::kDiagnostics);
  std::vector<Context> out;
  out.reserve(count);
  std::vector<double> values(dim);
  for (std::size_t i = 0; i < count; ++i) {
    for (auto& v : values) v = rng.uniform();
    out.emplace_back(values);
  }
  return out;
}

Estimate summarize(const std::vector<double>& values) {
  const double n = static_cast<double>(values.size());
  if (values.empty()) return {};
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / n;
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

namespace {

void require_samples(std::size_t num_mc) {
  if (num_mc < 2) throw ConfigError("num_mc: need at least 2 Monte Carlo samples");
}

template <typename F>
Estimate mc_mean(const EnvSpec& spec, std::size_t num_mc, std::uint64_t seed, F&& per_context) {
  require_samples(num_mc);
  const auto contexts = draw_contexts(spec.context_dim, num_mc, seed);
  std::vector<double> values;
  values.reserve(num_mc);
  for (const auto& x : contexts) values.push_back(per_context(x));
  return summarize(values);
}

double inverse_probability(const ActionKernel& kernel, Arm a) {
  const double p = kernel.probs.at(a);
  if (!(p > 0.0)) {
    throw DivergenceError("kernel assigns zero probability to arm " + std::to_string(a + 1));
  }
  return 1.0 / p;
}

}  // namespace

Estimate policy_value(const EnvSpec& spec, const Policy& pi, const RewardFn& f,
                      std::size_t num_mc, std::uint64_t seed) {
  return mc_mean(spec, num_mc, seed, [&](const Context& x) { return f(x, pi(x)); });
}

Estimate policy_regret(const EnvSpec& spec, const Policy& pi, const RewardFn& f,
                       std::size_t num_mc, std::uint64_t seed) {
  return mc_mean(spec, num_mc, seed, [&](const Context& x) {
    return f(x, greedy_arm(f, x, spec.num_arms)) - f(x, pi(x));
  });
}

KernelFn kernel_of(LinearModel model, double gamma) {
  return [model = std::move(model), gamma](const Context& x) {
    return action_kernel(model, x, gamma);
  };
}

Estimate decisional_divergence(const EnvSpec& spec, const KernelFn& kernel, const Policy& pi,
                               std::size_t num_mc, std::uint64_t seed) {
  return mc_mean(spec, num_mc, seed,
                 [&](const Context& x) { return inverse_probability(kernel(x), pi(x)); });
}

Estimate model_mse(const EnvSpec& spec, const RewardFn& f, const RewardFn& g,
                   ArmSampling sampling, std::size_t num_mc, std::uint64_t seed,
                   const KernelFn& kernel) {
  if (sampling == ArmSampling::Kernel && !kernel) {
    throw ConfigError("model_mse: kernel sampling needs a kernel");
  }
  const std::size_t k = spec.num_arms;
  return mc_mean(spec, num_mc, seed, [&](const Context& x) {
    double total = 0.0;
    if (sampling == ArmSampling::Uniform) {
      for (Arm a = 0; a < k; ++a) {
        const double d = f(x, a) - g(x, a);
        total += d * d;
      }
      return total / static_cast<double>(k);
    }
    const auto p = kernel(x);
    for (Arm a = 0; a < k; ++a) {
      const double d = f(x, a) - g(x, a);
      total += p.probs[a] * d * d;
    }
    return total;
  });
}

double linear_model_mse_exact(const LinearModel& f, const LinearModel& g) {
  if (!(f.shape() == g.shape())) throw ConfigError("linear_model_mse_exact: shape mismatch");
  // E[phi phi'] for phi = [1, x] with x uniform on the unit cube.
  const std::size_t p = f.shape().per_arm();
  double total = 0.0;
  for (Arm a = 0; a < f.arms(); ++a) {
    const auto wf = f.weights(a);
    const auto wg = g.weights(a);
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = 0; j < p; ++j) {
        double moment;
        if (i == 0 && j == 0) moment = 1.0;
        else if (i == 0 || j == 0) moment = 0.5;
        else if (i == j) moment = 1.0 / 3.0;
        else moment = 0.25;
        total += (wf[i] - wg[i]) * (wf[j] - wg[j]) * moment;
      }
    }
  }
  return total / static_cast<double>(f.arms());
}

Estimate kernel_estimated_regret(const EnvSpec& spec, const LinearModel& model, double gamma,
                                 std::size_t num_mc, std::uint64_t seed) {
  return mc_mean(spec, num_mc, seed, [&](const Context& x) {
    const auto kernel = action_kernel(model, x, gamma);
    const double top = model.predict(x, kernel.best);
    double total = 0.0;
    for (Arm a = 0; a < kernel.probs.size(); ++a) {
      total += kernel.probs[a] * (top - model.predict(x, a));
    }
    return total;
  });
}

Estimate kernel_true_regret(const EnvSpec& spec, const LinearModel& model, double gamma,
                            std::size_t num_mc, std::uint64_t seed) {
  const Environment env(spec);
  return mc_mean(spec, num_mc, seed, [&](const Context& x) {
    const auto kernel = action_kernel(model, x, gamma);
    const double top = env.mean_reward(x, env.optimal_action(x));
    double total = 0.0;
    for (Arm a = 0; a < kernel.probs.size(); ++a) {
      total += kernel.probs[a] * (top - env.mean_reward(x, a));
    }
    return total;
  });
}

DivergenceSandwich divergence_sandwich(const EnvSpec& spec, const LinearModel& model,
                                       double gamma, const Policy& pi, std::size_t num_mc,
                                       std::uint64_t seed) {
  require_samples(num_mc);
  const auto contexts = draw_contexts(spec.context_dim, num_mc, seed);
  std::vector<double> gaps, inverse, slack;
  gaps.reserve(num_mc);
  inverse.reserve(num_mc);
  slack.reserve(num_mc);
  for (const auto& x : contexts) {
    const auto kernel = action_kernel(model, x, gamma);
    const Arm chosen = pi(x);
    const double g = gamma * (model.predict(x, kernel.best) - model.predict(x, chosen));
    const double v = inverse_probability(kernel, chosen);
    gaps.push_back(g);
    inverse.push_back(v);
    slack.push_back(v - g);
  }
  return {summarize(gaps), summarize(inverse), spec.num_arms, summarize(slack).std_error};
}

bool LemmaReport::all_passed() const {
  for (const auto& c : checks) {
    if (c.asserted && !c.passed) return false;
  }
  return true;
}

LemmaReport lemma_suite(const LemmaInputs& in) {
  constexpr double kSigmas = 3.0;
  const EnvSpec& spec = in.spec;
  const std::size_t n = in.num_mc;
  const double k = static_cast<double>(spec.num_arms);
  LemmaReport report;

  // Some sides hold with equality pointwise (zero standard error), so allow
  // for rounding in the sums.
  auto add = [&](std::string name, std::size_t epoch, double lhs, double rhs, double se,
                 bool asserted = true) {
    const double rounding = 1e-12 * std::max(1.0, std::abs(rhs));
    report.checks.push_back(
        {std::move(name), epoch, lhs, rhs, se, asserted, lhs <= rhs + kSigmas * se + rounding});
  };

  const auto errors = misspecification_errors(spec, n, in.seed);
  const double b = errors.b.monte_carlo.mean;
  const double big_b = errors.B.monte_carlo.mean;
  const double se_b = errors.b.monte_carlo.std_error;
  const double se_big_b = errors.B.monte_carlo.std_error;
  add("bound_B_lower", 0, b, big_b, std::hypot(se_b, se_big_b));
  add("bound_B_upper", 0, big_b, k * b, std::hypot(se_big_b, k * se_b));

  const Environment env(spec);
  const LinearModel fhat_star = env.best_linear_fit();
  const Policy best_pred = Policy::induced(fhat_star, "fhat_star");
  const auto regret = policy_regret(spec, best_pred, truth_of(spec), n, in.seed + 1);
  add("best_pred_regret", 0, regret.mean, 2.0 * std::sqrt(big_b), regret.std_error);

  for (const auto& snap : in.snapshots) {
    if (snap.index < 2 || !(snap.gamma > 0.0)) continue;
    const std::uint64_t seed = in.seed + 16 * snap.index;
    const auto est = kernel_estimated_regret(spec, snap.model, snap.gamma, n, seed);
    add("kernel_est_regret", snap.index, est.mean, k / snap.gamma, est.std_error);

    const auto sandwich = divergence_sandwich(spec, snap.model, snap.gamma, best_pred, n, seed + 1);
    add("divergence_lower", snap.index, sandwich.gamma_gap.mean, sandwich.divergence.mean,
        sandwich.slack_std_error);
    add("divergence_upper", snap.index, sandwich.divergence.mean, k + sandwich.gamma_gap.mean,
        sandwich.slack_std_error);

    const auto self = decisional_divergence(spec, kernel_of(snap.model, snap.gamma),
                                            Policy::induced(snap.model), n, seed + 2);
    add("divergence_self", snap.index, self.mean, k, self.std_error);

    const auto true_regret = kernel_true_regret(spec, snap.model, snap.gamma, n, seed + 3);
    const double trend =
        in.epsilon > 0.0 ? k / snap.gamma + std::sqrt(k * big_b / std::sqrt(in.epsilon))
                         : std::numeric_limits<double>::infinity();
    add("true_regret_trend", snap.index, true_regret.mean, trend, true_regret.std_error, false);
  }
  return report;
}

}  // namespace efalcon
