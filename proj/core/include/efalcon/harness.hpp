#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "efalcon/agent.hpp"
#include "efalcon/config.hpp"
#include "efalcon/diag.hpp"

namespace efalcon {

struct TraceRow {
  std::size_t t = 0;
  std::size_t epoch = 1;
  Phase phase = Phase::Active;
  Context x;
  Arm action = 0;
  double reward = 0.0;
  /// f*(x, pi*(x)) - f*(x, a): expected instantaneous regret.
  double e_regret = 0.0;
  double cum_e_regret = 0.0;
};

struct RegretTrace {
  std::vector<TraceRow> rows;
  /// sum_t r_t(pi*(x_t)) - r_t(a_t) over the realized reward vectors.
  double realized_regret = 0.0;
};

struct RunResult {
  std::uint64_t seed = 0;
  std::string agent_name;
  double epsilon = 0.0;
  RegretTrace trace;
  /// Per-round E-regret; filled even when the trace rows are not kept.
  std::vector<double> e_regret;
  std::vector<EpochEvent> events;
  std::vector<ModelSnapshot> models;
  LemmaReport lemmas;
};

struct RunOptions {
  bool keep_trace = true;
  bool diagnostics = true;
};

/// Forced-exploration fraction after resolving "auto".
double resolved_epsilon(const RunConfig& config);
/// comp(F) after resolving 0 to the parameter count.
double resolved_comp(const RunConfig& config);

std::unique_ptr<Agent> make_agent(const RunConfig& config, std::uint64_t seed);

/// Runs T rounds: context, action, reward vector, feedback, bookkeeping.
RunResult run_one(const RunConfig& config, std::uint64_t seed, const RunOptions& options = {});

struct SuiteSummary {
  std::size_t replications = 0;
  std::vector<double> mean_e_regret;
  std::vector<double> se_e_regret;
  std::vector<double> mean_cum_e_regret;
  std::vector<double> se_cum_e_regret;
};

/// Runs every replication (concurrently when threads > 1; 0 picks the
/// hardware concurrency) and aggregates per round in replication order.
/// A failing replication is rethrown as Error with its index.
SuiteSummary run_suite(const RunConfig& config, std::size_t threads = 0);

/// Per-round aggregation of E-regret series, in the order given.
SuiteSummary aggregate(const std::vector<std::vector<double>>& e_regret_series);

struct ComparisonTable {
  std::vector<std::size_t> checkpoints;
  std::vector<std::string> labels;
  /// cells[i][j]: cumulative E-regret of config i at checkpoint j.
  std::vector<std::vector<Estimate>> cells;
};

/// Checkpoints T/8, T/4, T/2, T (at least round 1).
std::vector<std::size_t> compare_checkpoints(std::size_t horizon);

/// Throws ConfigError when configs disagree on environment or horizon, or
/// fewer than two are given.
ComparisonTable compare(const std::vector<RunConfig>& configs, std::size_t threads = 0);

}  // namespace efalcon
