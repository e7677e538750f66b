#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "efalcon/agent.hpp"
#include "efalcon/linmodel.hpp"
#include "efalcon/rng.hpp"

namespace efalcon {

/// Doubling epoch boundaries: tau_0 = 0, tau_m = tau1 * 2^(m-1).
class EpochSchedule {
 public:
  /// Throws ConfigError when tau1 < 4.
  explicit EpochSchedule(std::size_t tau1 = 4);

  std::size_t tau1() const noexcept { return tau1_; }
  /// tau_m for m >= 0.
  std::size_t boundary(std::size_t m) const;
  /// Rounds in epoch m (m >= 1).
  std::size_t length(std::size_t m) const { return boundary(m) - boundary(m - 1); }
  /// Smallest m with tau_m >= t, for t >= 1.
  std::size_t epoch_of(std::size_t t) const;

 private:
  std::size_t tau1_;
};

/// Rate knobs of the generalized algorithm. The linear class uses
/// rho = 1, rho_prime = 0, comp = d.
struct RateParams {
  double rho = 1.0;
  double rho_prime = 0.0;
  double comp = 4.0;
  double C1 = 1.0;
  double C3 = 1.0;
  double delta = 0.1;

  static RateParams linear(ModelShape shape, double delta = 0.1);
  void validate() const;
};

/// Exploration parameter for epoch m: 1 for m = 1, otherwise
/// sqrt(C3 K L^rho / (ln^rho'(L) ln((m-1)/delta) comp)) with
/// L = tau_{m-1} - tau_{m-2}.
double gamma_for_epoch(std::size_t m, const EpochSchedule& schedule, const RateParams& rates,
                       std::size_t arms);

/// Additive budget C1 ln^rho'(n) ln(12 m^2 / delta) comp / n^rho for a
/// passive batch of n rows at the end of epoch m.
double constraint_slack(std::size_t m, std::size_t passive_rows, const RateParams& rates);

/// ceil(fraction * length), with products that land within rounding noise
/// of an integer treated as that integer (0.3 * 10 gives 3, not 4).
std::size_t ceil_fraction(double fraction, std::size_t length);

/// Forced-exploration fraction c K^(4/5) b^(2/5), capped at 0.49.
double tune_epsilon(double b_guess, std::size_t arms, double c);

/// Inverse-gap-weighted action distribution.
struct ActionKernel {
  std::vector<double> probs;
  /// Predicted-best arm.
  Arm best = 0;
};

/// Non-best arms get 1 / (K + gamma * gap); the predicted-best arm gets the
/// rest.
ActionKernel action_kernel(const LinearModel& model, const Context& x, double gamma);
/// Inverse-CDF draw from a kernel.
Arm sample_arm(const ActionKernel& kernel, Rng& rng);

struct AgentState {
  std::size_t epoch = 1;
  LinearModel model;  // f-hat for the current epoch
  double gamma = 1.0;
  DataBatch active_batch;
  DataBatch passive_batch;
  EpochSchedule schedule;
  double epsilon = 0.0;

  /// Fresh state: epoch 1, zero model, gamma 1.
  static AgentState initial(ModelShape shape, EpochSchedule schedule, double epsilon);

  std::size_t passive_rounds(std::size_t m) const {
    return ceil_fraction(epsilon, schedule.length(m));
  }
  std::size_t active_rounds(std::size_t m) const {
    return schedule.length(m) - passive_rounds(m);
  }
  /// Throws SequencingError when t is outside the current epoch.
  Phase phase_of(std::size_t t) const;
};

/// Action for round t: a kernel draw in the active phase, a uniform draw in
/// the passive phase.
Arm act(const AgentState& state, std::size_t t, const Context& x, Rng& rng);

struct EpochUpdate {
  AgentState next;
  EpochEvent event;
};

/// Closes the current epoch: solves the passive-constrained regression on
/// the active batch (or plain least squares when there is no passive data),
/// advances the epoch, recomputes gamma, clears both batches.
EpochUpdate end_of_epoch_update(const AgentState& state, const RateParams& rates, double tol,
                                const DualSearchOptions& dual = {});

struct FalconConfig {
  ModelShape shape{};
  std::size_t tau1 = 4;
  RateParams rates{};
  double epsilon = 0.1;
  /// Constraint residual tolerance of the regression oracle.
  double tol = 1e-6;
  DualSearchOptions dual{};

  void validate() const;
};

/// Epsilon-FALCON. With epsilon = 0 every epoch update is plain least
/// squares, which is the FALCON baseline.
class EpsilonFalcon final : public Agent {
 public:
  EpsilonFalcon(FalconConfig config, Rng rng, std::string name = "epsilon_falcon");

  std::string_view name() const override { return name_; }
  Arm act(std::size_t t, const Context& x) override;
  void observe(std::size_t t, const Context& x, Arm a, double reward) override;
  std::size_t epoch_of(std::size_t t) const override;
  Phase phase_of(std::size_t t) const override;
  std::vector<ModelSnapshot> snapshots() const override;
  std::vector<EpochEvent> events() const override { return events_; }
  void finish(std::size_t horizon) override;

  const AgentState& state() const noexcept { return state_; }
  const FalconConfig& config() const noexcept { return config_; }

 private:
  FalconConfig config_;
  Rng rng_;
  std::string name_;
  AgentState state_;
  std::vector<ModelSnapshot> snapshots_;
  std::vector<EpochEvent> events_;
};

/// Epsilon-FALCON with epsilon = 0.
EpsilonFalcon plain_falcon(FalconConfig config, Rng rng);

}  // namespace efalcon
