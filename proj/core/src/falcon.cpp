#include "efalcon/falcon.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "efalcon/error.hpp"

namespace efalcon {

EpochSchedule::EpochSchedule(std::size_t tau1) : tau1_(tau1) {
  if (tau1 < 4) throw ConfigError("agent.tau1: must be >= 4");
}

std::size_t EpochSchedule::boundary(std::size_t m) const {
  if (m == 0) return 0;
  if (m - 1 >= 63 || tau1_ > (std::size_t{1} << (63 - (m - 1)))) {
    throw ConfigError("epoch boundary overflows for m = " + std::to_string(m));
  }
  return tau1_ << (m - 1);
}

std::size_t EpochSchedule::epoch_of(std::size_t t) const {
  if (t == 0) throw SequencingError("rounds are numbered from 1");
  std::size_t m = 1;
  while (boundary(m) < t) ++m;
  return m;
}

RateParams RateParams::linear(ModelShape shape, double delta) {
  RateParams r;
  r.comp = static_cast<double>(shape.parameters());
  r.delta = delta;
  return r;
}

void RateParams::validate() const {
  std::vector<std::string> problems;
  if (!(rho > 0.0 && rho <= 1.0)) problems.push_back("agent.rho: must lie in (0, 1]");
  if (!(rho_prime >= 0.0)) problems.push_back("agent.rho_prime: must be >= 0");
  if (!(comp > 0.0)) problems.push_back("agent.comp: must be > 0");
  if (!(C1 > 0.0)) problems.push_back("agent.C1: must be > 0");
  if (!(C3 > 0.0)) problems.push_back("agent.C3: must be > 0");
  if (!(delta > 0.0 && delta <= 0.5)) problems.push_back("agent.delta: must lie in (0, 0.5]");
  if (!problems.empty()) throw ConfigError(std::move(problems));
}

double gamma_for_epoch(std::size_t m, const EpochSchedule& schedule, const RateParams& rates,
                       std::size_t arms) {
  if (m == 0) throw ConfigError("gamma_for_epoch: epochs are numbered from 1");
  if (m == 1) return 1.0;
  const double confidence = static_cast<double>(m - 1) / rates.delta;
  if (!(confidence > 1.0)) {
    throw ConfigError("gamma_for_epoch: ln((m-1)/delta) is not positive (m = " +
                      std::to_string(m) + ", delta = " + std::to_string(rates.delta) + ")");
  }
  const double length = static_cast<double>(schedule.boundary(m - 1) - schedule.boundary(m - 2));
  const double log_factor = rates.rho_prime == 0.0 ? 1.0 : std::pow(std::log(length), rates.rho_prime);
  const double numerator = rates.C3 * static_cast<double>(arms) * std::pow(length, rates.rho);
  return std::sqrt(numerator / (log_factor * std::log(confidence) * rates.comp));
}

double constraint_slack(std::size_t m, std::size_t passive_rows, const RateParams& rates) {
  if (passive_rows == 0) throw ConfigError("constraint_slack: empty passive batch");
  const double n = static_cast<double>(passive_rows);
  const double md = static_cast<double>(m);
  const double log_factor = rates.rho_prime == 0.0 ? 1.0 : std::pow(std::log(n), rates.rho_prime);
  return rates.C1 * log_factor * std::log(12.0 * md * md / rates.delta) * rates.comp /
         std::pow(n, rates.rho);
}

std::size_t ceil_fraction(double fraction, std::size_t length) {
  const double exact = fraction * static_cast<double>(length);
  const double nearest = std::round(exact);
  if (std::abs(exact - nearest) <= 1e-9 * std::max(1.0, exact)) {
    return static_cast<std::size_t>(nearest);
  }
  return static_cast<std::size_t>(std::ceil(exact));
}

double tune_epsilon(double b_guess, std::size_t arms, double c) {
  if (!(b_guess >= 0.0)) throw ConfigError("tune_epsilon: b_guess must be >= 0");
  if (!(c > 0.0)) throw ConfigError("tune_epsilon: c must be > 0");
  const double eps = c * std::pow(static_cast<double>(arms), 0.8) * std::pow(b_guess, 0.4);
  return std::min(eps, 0.49);
}

ActionKernel action_kernel(const LinearModel& model, const Context& x, double gamma) {
  if (!(gamma > 0.0)) throw ConfigError("action_kernel: gamma must be > 0");
  const auto predictions = model.predict_all(x);
  const std::size_t k = predictions.size();
  ActionKernel kernel;
  kernel.best = static_cast<Arm>(
      std::max_element(predictions.begin(), predictions.end()) - predictions.begin());
  kernel.probs.assign(k, 0.0);
  double rest = 0.0;
  for (Arm a = 0; a < k; ++a) {
    if (a == kernel.best) continue;
    const double gap = predictions[kernel.best] - predictions[a];
    kernel.probs[a] = 1.0 / (static_cast<double>(k) + gamma * gap);
    rest += kernel.probs[a];
  }
  kernel.probs[kernel.best] = 1.0 - rest;
  return kernel;
}

Arm sample_arm(const ActionKernel& kernel, Rng& rng) {
  const double u = rng.uniform();
  double cumulative = 0.0;
  for (Arm a = 0; a < kernel.probs.size(); ++a) {
    cumulative += kernel.probs[a];
    if (u < cumulative) return a;
  }
  // Rounding left u above the final cumulative sum.
  return kernel.probs.size() - 1;
}

AgentState AgentState::initial(ModelShape shape, EpochSchedule schedule, double epsilon) {
  if (!(epsilon >= 0.0 && epsilon < 0.5)) {
    throw ConfigError("agent.epsilon: must lie in [0, 0.5)");
  }
  AgentState s;
  s.epoch = 1;
  s.model = LinearModel(shape);
  s.gamma = 1.0;
  s.schedule = schedule;
  s.epsilon = epsilon;
  return s;
}

Phase AgentState::phase_of(std::size_t t) const {
  const std::size_t start = schedule.boundary(epoch - 1);
  const std::size_t end = schedule.boundary(epoch);
  if (t <= start || t > end) {
    throw SequencingError("round " + std::to_string(t) + " is outside epoch " +
                          std::to_string(epoch) + " (" + std::to_string(start + 1) + ".." +
                          std::to_string(end) + ")");
  }
  return t <= start + active_rounds(epoch) ? Phase::Active : Phase::Passive;
}

Arm act(const AgentState& state, std::size_t t, const Context& x, Rng& rng) {
  if (state.phase_of(t) == Phase::Passive) return rng.below(state.model.arms());
  return sample_arm(action_kernel(state.model, x, state.gamma), rng);
}

EpochUpdate end_of_epoch_update(const AgentState& state, const RateParams& rates, double tol,
                                const DualSearchOptions& dual) {
  const std::size_t m = state.epoch;
  const ModelShape shape = state.model.shape();

  EpochEvent event;
  event.m = m;
  event.tau_start = state.schedule.boundary(m - 1);
  event.tau_end = state.schedule.boundary(m);
  event.gamma = state.gamma;
  event.active_rows = state.active_batch.size();
  event.passive_rows = state.passive_batch.size();

  LinearModel next_model;
  if (state.passive_batch.empty()) {
    Fit fit = fit_ols(state.active_batch, shape);
    event.unconstrained_fallback = true;
    event.ridge_fallback = fit.ridge_fallback;
    next_model = std::move(fit.model);
  } else {
    const double slack = constraint_slack(m, state.passive_batch.size(), rates);
    const ConstraintSpec cons = make_constraint(state.passive_batch, slack, shape);
    ConstrainedFit result = constrained_fit(state.active_batch, cons, tol, shape, dual);
    event.alpha = cons.alpha;
    event.slack = slack;
    event.lambda_star = result.report.lambda;
    event.duality_gap = result.report.duality_gap;
    event.passive_excess = normalized_sse(result.model, cons.passive) - cons.alpha;
    event.ridge_fallback = result.report.ridge_fallback;
    next_model = std::move(result.model);
  }
  event.next_model = next_model;

  AgentState next;
  next.epoch = m + 1;
  next.model = std::move(next_model);
  next.schedule = state.schedule;
  next.epsilon = state.epsilon;
  next.gamma = gamma_for_epoch(m + 1, state.schedule, rates, shape.arms);
  return {std::move(next), std::move(event)};
}

void FalconConfig::validate() const {
  std::vector<std::string> problems;
  if (shape.arms < 2) problems.push_back("agent: need at least 2 arms");
  if (tau1 < 4) problems.push_back("agent.tau1: must be >= 4");
  if (!(epsilon >= 0.0 && epsilon < 0.5)) problems.push_back("agent.epsilon: must lie in [0, 0.5)");
  if (!(tol > 0.0)) problems.push_back("agent.tol: must be > 0");
  try {
    rates.validate();
  } catch (const ConfigError& e) {
    problems.insert(problems.end(), e.problems().begin(), e.problems().end());
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
}

EpsilonFalcon::EpsilonFalcon(FalconConfig config, Rng rng, std::string name)
    : config_(std::move(config)), rng_(rng), name_(std::move(name)) {
  config_.validate();
  state_ = AgentState::initial(config_.shape, EpochSchedule(config_.tau1), config_.epsilon);
}

Arm EpsilonFalcon::act(std::size_t t, const Context& x) { return efalcon::act(state_, t, x, rng_); }

void EpsilonFalcon::observe(std::size_t t, const Context& x, Arm a, double reward) {
  if (state_.phase_of(t) == Phase::Active) {
    state_.active_batch.append(x, a, reward);
  } else {
    state_.passive_batch.append(x, a, reward);
  }
  if (t == state_.schedule.boundary(state_.epoch)) {
    snapshots_.push_back({state_.epoch, state_.gamma, state_.model});
    auto update = end_of_epoch_update(state_, config_.rates, config_.tol, config_.dual);
    events_.push_back(std::move(update.event));
    state_ = std::move(update.next);
  }
}

std::size_t EpsilonFalcon::epoch_of(std::size_t t) const { return state_.schedule.epoch_of(t); }

Phase EpsilonFalcon::phase_of(std::size_t t) const {
  const std::size_t m = state_.schedule.epoch_of(t);
  const std::size_t start = state_.schedule.boundary(m - 1);
  return t <= start + state_.active_rounds(m) ? Phase::Active : Phase::Passive;
}

std::vector<ModelSnapshot> EpsilonFalcon::snapshots() const {
  auto out = snapshots_;
  out.push_back({state_.epoch, state_.gamma, state_.model});
  return out;
}

void EpsilonFalcon::finish(std::size_t horizon) {
  const std::size_t start = state_.schedule.boundary(state_.epoch - 1);
  if (horizon <= start) return;
  EpochEvent partial;
  partial.m = state_.epoch;
  partial.tau_start = start;
  partial.tau_end = horizon;
  partial.gamma = state_.gamma;
  partial.active_rows = state_.active_batch.size();
  partial.passive_rows = state_.passive_batch.size();
  partial.complete = false;
  partial.next_model = state_.model;
  events_.push_back(std::move(partial));
}

EpsilonFalcon plain_falcon(FalconConfig config, Rng rng) {
  config.epsilon = 0.0;
  return EpsilonFalcon(std::move(config), rng, "falcon");
}

}  // namespace efalcon
