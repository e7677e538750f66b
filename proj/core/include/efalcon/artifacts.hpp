#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "efalcon/harness.hpp"

namespace efalcon {

/// Column layouts of the CSV files written by the harness.
namespace csv_header {
inline constexpr const char* kTrace = "t,epoch,phase,x,action,reward,e_regret,cum_e_regret";
inline constexpr const char* kEpochs =
    "m,tau_start,tau_end,gamma,alpha,slack,lambda_star,duality_gap,mse_to_fhatstar";
inline constexpr const char* kLemmas = "check,epoch,lhs,rhs,std_error,asserted,status";
inline constexpr const char* kSummary =
    "t,mean_e_regret,se_e_regret,mean_cum_e_regret,se_cum_e_regret";
}  // namespace csv_header

void write_trace_csv(std::ostream& out, const RegretTrace& trace);
/// `fhat_star` feeds the mse_to_fhatstar column (exact uniform MSE of the
/// model produced at the end of each epoch). Incomplete epochs carry "nan"
/// in the update columns.
void write_epochs_csv(std::ostream& out, const std::vector<EpochEvent>& events,
                      const LinearModel& fhat_star);
/// `m,arm,w0,w1,...`, one row per snapshot and arm (arms 1-based).
void write_models_csv(std::ostream& out, const std::vector<ModelSnapshot>& models);
void write_lemmas_csv(std::ostream& out, const LemmaReport& report);
void write_summary_csv(std::ostream& out, const SuiteSummary& summary);
void write_comparison_csv(std::ostream& out, const ComparisonTable& table);

/// Writes config.cfg, trace.csv, epochs.csv, models.csv, lemmas.csv and
/// run.txt into `dir` (created if missing).
void write_run(const std::filesystem::path& dir, const RunConfig& config,
               const RunResult& result);

/// Reads models.csv and epochs.csv back into snapshots (gamma from the
/// epochs file; snapshots without an epoch row get gamma 0).
std::vector<ModelSnapshot> read_snapshots(const std::filesystem::path& dir,
                                          const ModelShape& shape);

/// Re-runs the lemma suite on a stored run directory.
LemmaReport rediagnose(const std::filesystem::path& dir);

}  // namespace efalcon
