#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "efalcon/linmodel.hpp"
#include "efalcon/rng.hpp"
#include "efalcon/types.hpp"

namespace efalcon {

enum class EnvKind { StepFunction, SensitivityFamily, RealizableLinear };

std::string_view to_string(EnvKind kind);
/// Accepts "step", "step_function", "sensitivity", "sensitivity_family",
/// "realizable", "realizable_linear". Throws ConfigError otherwise.
EnvKind parse_env_kind(std::string_view text);

struct EnvSpec {
  EnvKind kind = EnvKind::StepFunction;
  /// Jump width of the sensitivity family; only meaningful for that kind.
  double theta = 0.05;
  double noise_sd = 0.1;
  std::size_t num_arms = 2;
  std::size_t context_dim = 1;
  std::uint64_t seed = 0;
  /// Clip noisy rewards into [0, 1]. Off by default.
  bool clip_rewards = false;

  /// Throws ConfigError listing every violated constraint.
  void validate() const;
  ModelShape model_shape() const { return {num_arms, context_dim}; }
};

/// Slope of the sensitivity family's second arm, chosen so the best
/// uniform-arm line of arm 1 meets arm 2 at x = 1 - theta.
double sensitivity_arm2_slope(double theta);

/// Weights of the realizable environment's true model, drawn from the seed
/// so that every mean reward lies in [0, 1].
LinearModel realizable_truth(const EnvSpec& spec);

/// A stochastic contextual bandit with known mean rewards.
///
/// Contexts are uniform on (0,1)^context_dim. The instance owns its random
/// stream; everything else is immutable after construction.
class Environment {
 public:
  explicit Environment(EnvSpec spec);

  const EnvSpec& spec() const noexcept { return spec_; }
  std::size_t num_arms() const noexcept { return spec_.num_arms; }

  Context sample_context();
  /// Noisy reward for one arm. Throws InvalidArmError.
  double sample_reward(const Context& x, Arm a);
  /// Noisy rewards for all arms (the full potential-outcome vector).
  std::vector<double> sample_rewards(const Context& x);

  /// True conditional mean f*(x, a). Throws InvalidArmError.
  double mean_reward(const Context& x, Arm a) const;
  Arm optimal_action(const Context& x) const;

  /// f-hat-star: best model in the linear class under uniform arms.
  const LinearModel& best_linear_fit() const noexcept { return fhat_star_; }

 private:
  EnvSpec spec_;
  Rng rng_;
  LinearModel truth_;      // realizable kind only
  LinearModel fhat_star_;
  double arm2_slope_ = 0.0;  // sensitivity kind only
};

/// Stateless evaluation of f*(x, a). Throws InvalidArmError.
double mean_reward(const EnvSpec& spec, const Context& x, Arm a);
/// argmax_a f*(x, a), ties to the lowest index.
Arm optimal_policy_action(const EnvSpec& spec, const Context& x);

/// Closed-form f-hat-star. Per arm, the least-squares line of a target g on
/// Unif(0,1) has slope 12 Cov(x, g) and intercept E[g] - slope/2. For the
/// realizable kind the truth itself is returned.
LinearModel best_linear_fit_uniform(const EnvSpec& spec);

/// Monte Carlo estimate with its standard error.
struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
};

struct ApproximationError {
  Estimate monte_carlo;
  /// Exact value when the environment admits one (all built-in kinds do).
  std::optional<double> closed_form;
};

/// Exact b for the built-in kinds (piecewise polynomial integral); nullopt
/// when no closed form is implemented.
std::optional<double> exact_approximation_error(const EnvSpec& spec);

/// b = E_x E_{a~Unif} (f-hat-star(x,a) - f*(x,a))^2.
ApproximationError approximation_error_b(const EnvSpec& spec, std::size_t num_mc,
                                         std::uint64_t seed);

/// B = E_x max_a (f-hat-star(x,a) - f*(x,a))^2.
ApproximationError worst_case_error_B(const EnvSpec& spec, std::size_t num_mc,
                                      std::uint64_t seed);

/// b and B estimated from one shared context stream, so that the sample
/// versions satisfy b <= B <= K b exactly.
struct MisspecificationErrors {
  ApproximationError b;
  ApproximationError B;
};
MisspecificationErrors misspecification_errors(const EnvSpec& spec, std::size_t num_mc,
                                               std::uint64_t seed);

}  // namespace efalcon
