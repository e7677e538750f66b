#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "efalcon/env.hpp"
#include "efalcon/linmodel.hpp"
#include "efalcon/rng.hpp"
#include "efalcon/types.hpp"

namespace efalcon {

enum class Phase { Active, Passive };
std::string_view to_string(Phase phase);

/// The model an agent acted on during epoch (or batch) `index`, with the
/// exploration parameter in force. Snapshots are immutable copies.
struct ModelSnapshot {
  std::size_t index = 1;
  double gamma = 0.0;
  LinearModel model;
};

/// Record of one epoch and the model update that closed it.
struct EpochEvent {
  std::size_t m = 1;
  std::size_t tau_start = 0;  // first round of the epoch is tau_start + 1
  std::size_t tau_end = 0;
  double gamma = 1.0;
  double alpha = 0.0;
  double slack = 0.0;
  double lambda_star = 0.0;
  double duality_gap = 0.0;
  /// normalized_sse(next_model, passive) - alpha; compare against slack.
  double passive_excess = 0.0;
  std::size_t active_rows = 0;
  std::size_t passive_rows = 0;
  /// No passive data: plain least squares was used.
  bool unconstrained_fallback = false;
  bool ridge_fallback = false;
  /// False for an epoch cut short by the horizon (no update performed).
  bool complete = true;
  LinearModel next_model;
};

/// A contextual bandit learner driven one round at a time.
class Agent {
 public:
  virtual ~Agent() = default;

  virtual std::string_view name() const = 0;
  /// Chooses the arm for round t (1-based).
  virtual Arm act(std::size_t t, const Context& x) = 0;
  /// Feeds back the observed reward of the arm played in round t.
  virtual void observe(std::size_t t, const Context& x, Arm a, double reward) = 0;

  virtual std::size_t epoch_of(std::size_t /*t*/) const { return 1; }
  virtual Phase phase_of(std::size_t /*t*/) const { return Phase::Active; }

  virtual std::vector<ModelSnapshot> snapshots() const { return {}; }
  virtual std::vector<EpochEvent> events() const { return {}; }
  /// Called once after the last round; records a partial epoch if any.
  virtual void finish(std::size_t /*horizon*/) {}
};

/// Draws arms uniformly and ignores context.
class UniformAgent final : public Agent {
 public:
  UniformAgent(std::size_t arms, Rng rng) : arms_(arms), rng_(rng) {}

  std::string_view name() const override { return "uniform"; }
  Arm act(std::size_t, const Context&) override { return rng_.below(arms_); }
  void observe(std::size_t, const Context&, Arm, double) override {}
  Phase phase_of(std::size_t) const override { return Phase::Passive; }

 private:
  std::size_t arms_;
  Rng rng_;
};

/// Plays the true optimal policy. Reference point for comparisons.
class OptimalAgent final : public Agent {
 public:
  explicit OptimalAgent(EnvSpec spec) : spec_(std::move(spec)) {}

  std::string_view name() const override { return "optimal"; }
  Arm act(std::size_t, const Context& x) override { return optimal_policy_action(spec_, x); }
  void observe(std::size_t, const Context&, Arm, double) override {}

 private:
  EnvSpec spec_;
};

struct LinUcbConfig {
  ModelShape shape{};
  /// Width multiplier of the confidence bonus.
  double alpha_ucb = 0.1;
  /// Ridge on each arm's Gram matrix.
  double ridge = 1.0;
  /// Model refresh period in rounds.
  std::size_t batch_size = 100;
};

/// Disjoint-arm LinUCB with batched model refreshes: the ridge estimate and
/// the inverse Gram matrices used for action choice are only recomputed
/// every `batch_size` observations.
class LinUcb final : public Agent {
 public:
  explicit LinUcb(LinUcbConfig config);

  std::string_view name() const override { return "lin_ucb"; }
  Arm act(std::size_t t, const Context& x) override;
  void observe(std::size_t t, const Context& x, Arm a, double reward) override;
  std::size_t epoch_of(std::size_t t) const override;
  std::vector<ModelSnapshot> snapshots() const override { return snapshots_; }

  /// Estimate currently used for action choice.
  const LinearModel& model() const noexcept { return model_; }
  /// prediction + alpha * sqrt(phi' A^-1 phi) under the frozen estimate.
  double upper_bound(const Context& x, Arm a) const;

 private:
  void refresh();

  LinUcbConfig config_;
  std::size_t observed_ = 0;
  // Accumulated statistics, row-major per arm.
  std::vector<double> gram_;
  std::vector<double> moment_;
  // Frozen between refreshes.
  std::vector<double> gram_inverse_;
  LinearModel model_;
  std::vector<ModelSnapshot> snapshots_;
};

}  // namespace efalcon
