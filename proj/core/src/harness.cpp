#include "efalcon/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include "efalcon/error.hpp"
#include "efalcon/falcon.hpp"

namespace efalcon {

double resolved_comp(const RunConfig& config) {
  if (config.agent.comp > 0.0) return config.agent.comp;
  return static_cast<double>(config.env.model_shape().parameters());
}

double resolved_epsilon(const RunConfig& config) {
  if (config.agent.kind == AgentKind::Falcon) return 0.0;
  if (config.agent.epsilon) return *config.agent.epsilon;
  const auto b = exact_approximation_error(config.env);
  if (!b) throw ConfigError("agent.epsilon: 'auto' needs an environment with a closed-form b");
  return tune_epsilon(*b, config.env.num_arms, config.agent.epsilon_c);
}

namespace {

FalconConfig falcon_config(const RunConfig& config) {
  FalconConfig fc;
  fc.shape = config.env.model_shape();
  fc.tau1 = config.agent.tau1;
  fc.rates.rho = config.agent.rho;
  fc.rates.rho_prime = config.agent.rho_prime;
  fc.rates.comp = resolved_comp(config);
  fc.rates.C1 = config.agent.C1;
  fc.rates.C3 = config.agent.C3;
  fc.rates.delta = config.agent.delta;
  fc.epsilon = resolved_epsilon(config);
  fc.tol = config.agent.tol;
  return fc;
}

}  // namespace

std::unique_ptr<Agent> make_agent(const RunConfig& config, std::uint64_t seed) {
  const Rng rng(seed, streams::kAgent);
  switch (config.agent.kind) {
    case AgentKind::EpsilonFalcon:
      return std::make_unique<EpsilonFalcon>(falcon_config(config), rng);
    case AgentKind::Falcon:
      return std::make_unique<EpsilonFalcon>(plain_falcon(falcon_config(config), rng));
    case AgentKind::LinUcb:
      return std::make_unique<LinUcb>(LinUcbConfig{config.env.model_shape(), config.agent.alpha_ucb,
                                                   config.agent.ridge, config.agent.batch_size});
    case AgentKind::Uniform:
      return std::make_unique<UniformAgent>(config.env.num_arms, rng);
    case AgentKind::Optimal: {
      EnvSpec spec = config.env;
      spec.seed = seed;
      return std::make_unique<OptimalAgent>(spec);
    }
  }
  throw ConfigError("agent.kind: unsupported");
}

RunResult run_one(const RunConfig& config, std::uint64_t seed, const RunOptions& options) {
  config.validate();
  EnvSpec spec = config.env;
  spec.seed = seed;
  Environment env(spec);
  auto agent = make_agent(config, seed);

  RunResult result;
  result.seed = seed;
  result.agent_name = std::string(agent->name());
  result.epsilon = config.agent.kind == AgentKind::EpsilonFalcon ||
                           config.agent.kind == AgentKind::Falcon
                       ? resolved_epsilon(config)
                       : 0.0;
  result.e_regret.reserve(config.horizon);
  if (options.keep_trace) result.trace.rows.reserve(config.horizon);

  double cumulative = 0.0;
  for (std::size_t t = 1; t <= config.horizon; ++t) {
    const Context x = env.sample_context();
    const std::size_t epoch = agent->epoch_of(t);
    const Phase phase = agent->phase_of(t);
    const Arm a = agent->act(t, x);
    const auto rewards = env.sample_rewards(x);
    agent->observe(t, x, a, rewards[a]);

    const Arm star = env.optimal_action(x);
    const double e_regret = env.mean_reward(x, star) - env.mean_reward(x, a);
    cumulative += e_regret;
    result.trace.realized_regret += rewards[star] - rewards[a];
    result.e_regret.push_back(e_regret);
    if (options.keep_trace) {
      result.trace.rows.push_back({t, epoch, phase, x, a, rewards[a], e_regret, cumulative});
    }
  }
  agent->finish(config.horizon);

  result.events = agent->events();
  result.models = agent->snapshots();
  if (options.diagnostics) {
    LemmaInputs inputs;
    inputs.spec = spec;
    inputs.snapshots = result.models;
    inputs.epsilon = result.epsilon;
    inputs.num_mc = config.mc_samples;
    inputs.seed = seed;
    result.lemmas = lemma_suite(inputs);
  }
  return result;
}

SuiteSummary aggregate(const std::vector<std::vector<double>>& series) {
  SuiteSummary out;
  out.replications = series.size();
  if (series.empty()) return out;
  const std::size_t horizon = series.front().size();
  for (const auto& s : series) {
    if (s.size() != horizon) throw ConfigError("aggregate: series lengths differ");
  }
  const double n = static_cast<double>(series.size());
  out.mean_e_regret.assign(horizon, 0.0);
  out.se_e_regret.assign(horizon, 0.0);
  out.mean_cum_e_regret.assign(horizon, 0.0);
  out.se_cum_e_regret.assign(horizon, 0.0);

  std::vector<double> cum(series.size(), 0.0);
  for (std::size_t t = 0; t < horizon; ++t) {
    double sum = 0.0, sum_cum = 0.0;
    for (std::size_t r = 0; r < series.size(); ++r) {
      cum[r] += series[r][t];
      sum += series[r][t];
      sum_cum += cum[r];
    }
    const double mean = sum / n;
    const double mean_cum = sum_cum / n;
    double ss = 0.0, ss_cum = 0.0;
    for (std::size_t r = 0; r < series.size(); ++r) {
      ss += (series[r][t] - mean) * (series[r][t] - mean);
      ss_cum += (cum[r] - mean_cum) * (cum[r] - mean_cum);
    }
    out.mean_e_regret[t] = mean;
    out.mean_cum_e_regret[t] = mean_cum;
    if (series.size() > 1) {
      out.se_e_regret[t] = std::sqrt(ss / (n - 1.0) / n);
      out.se_cum_e_regret[t] = std::sqrt(ss_cum / (n - 1.0) / n);
    }
  }
  return out;
}

namespace {

[[noreturn]] void rethrow_with_index(std::exception_ptr error, std::size_t index) {
  const std::string prefix = "replication " + std::to_string(index) + ": ";
  try {
    std::rethrow_exception(error);
  } catch (const NonConvergenceError& e) {
    throw NonConvergenceError(prefix + e.what());
  } catch (const ConfigError& e) {
    std::vector<std::string> problems;
    for (const auto& p : e.problems()) problems.push_back(prefix + p);
    throw ConfigError(std::move(problems));
  } catch (const std::exception& e) {
    throw Error(prefix + e.what());
  }
}

// Runs every replication; series come back indexed by replication.
std::vector<std::vector<double>> run_replications(const RunConfig& config, std::size_t threads) {
  config.validate();
  const std::size_t reps = config.replications;
  std::vector<std::vector<double>> series(reps);
  std::vector<std::exception_ptr> errors(reps);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t r = next++; r < reps; r = next++) {
      try {
        series[r] = run_one(config, config.replication_seed(r), {false, false}).e_regret;
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, reps);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  for (std::size_t r = 0; r < reps; ++r) {
    if (errors[r]) rethrow_with_index(errors[r], r);
  }
  return series;
}

}  // namespace

SuiteSummary run_suite(const RunConfig& config, std::size_t threads) {
  return aggregate(run_replications(config, threads));
}

std::vector<std::size_t> compare_checkpoints(std::size_t horizon) {
  return {std::max<std::size_t>(1, horizon / 8), std::max<std::size_t>(1, horizon / 4),
          std::max<std::size_t>(1, horizon / 2), horizon};
}

ComparisonTable compare(const std::vector<RunConfig>& configs, std::size_t threads) {
  if (configs.size() < 2) throw ConfigError("compare: need at least two configs");
  const auto& first = configs.front();
  std::vector<std::string> problems;
  for (std::size_t i = 1; i < configs.size(); ++i) {
    const auto& c = configs[i];
    const bool same_env = c.env.kind == first.env.kind && c.env.theta == first.env.theta &&
                          c.env.noise_sd == first.env.noise_sd &&
                          c.env.num_arms == first.env.num_arms &&
                          c.env.context_dim == first.env.context_dim &&
                          c.env.clip_rewards == first.env.clip_rewards;
    if (!same_env) problems.push_back("config " + std::to_string(i) + ": environment differs from config 0");
    if (c.horizon != first.horizon) {
      problems.push_back("config " + std::to_string(i) + ": run.horizon differs from config 0");
    }
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));

  ComparisonTable table;
  table.checkpoints = compare_checkpoints(first.horizon);
  for (std::size_t i = 0; i < configs.size(); ++i) {
    std::string label(to_string(configs[i].agent.kind));
    const auto duplicates = std::count_if(configs.begin(), configs.end(), [&](const RunConfig& c) {
      return c.agent.kind == configs[i].agent.kind;
    });
    if (duplicates > 1) label += "_" + std::to_string(i);
    table.labels.push_back(std::move(label));

    const auto summary = run_suite(configs[i], threads);
    std::vector<Estimate> row;
    for (std::size_t cp : table.checkpoints) {
      row.push_back({summary.mean_cum_e_regret[cp - 1], summary.se_cum_e_regret[cp - 1]});
    }
    table.cells.push_back(std::move(row));
  }
  return table;
}

}  // namespace efalcon
