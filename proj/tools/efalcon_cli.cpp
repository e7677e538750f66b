// efalcon: command-line experiment runner.
//
//   efalcon run     --config PATH [--seed N] [--out DIR]
//   efalcon suite   --config PATH --reps R --out DIR
//   efalcon compare --config A --config B [...] --out DIR
//   efalcon diag    --run DIR
//   efalcon oracle  --env KIND [--theta X]
//
// Exit codes: 0 success, 1 validation error, 2 numerical non-convergence.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "efalcon/artifacts.hpp"
#include "efalcon/config.hpp"
#include "efalcon/diag.hpp"
#include "efalcon/env.hpp"
#include "efalcon/error.hpp"
#include "efalcon/harness.hpp"

namespace fs = std::filesystem;
using namespace efalcon;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitNonConvergence = 2;

void print_lemmas(const LemmaReport& report) {
  for (const auto& c : report.checks) {
    const char* status = !c.asserted ? "info" : (c.passed ? "PASS" : "FAIL");
    fmt::print("  [{:4}] {:<18} m={:<3} lhs={:.6g} rhs={:.6g} se={:.3g}\n", status, c.name,
               c.epoch, c.lhs, c.rhs, c.std_error);
  }
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed,
            std::optional<std::string> out) {
  RunConfig config = load_config(config_path);
  if (out) config.out_dir = *out;
  const std::uint64_t run_seed = seed.value_or(config.base_seed);
  const RunResult result = run_one(config, run_seed);
  write_run(config.out_dir, config, result);
  const double cum = result.trace.rows.empty() ? 0.0 : result.trace.rows.back().cum_e_regret;
  fmt::print("{} on {}: T={} seed={} cumulative E-regret {:.6g} (realized {:.6g})\n",
             result.agent_name, to_string(config.env.kind), config.horizon, run_seed, cum,
             result.trace.realized_regret);
  print_lemmas(result.lemmas);
  fmt::print("artifacts written to {}\n", config.out_dir);
  return 0;
}

int cmd_suite(const std::string& config_path, std::size_t reps, const std::string& out_dir) {
  RunConfig config = load_config(config_path);
  config.replications = reps;
  config.out_dir = out_dir;
  const SuiteSummary summary = run_suite(config);
  fs::create_directories(out_dir);
  std::ofstream cfg(fs::path(out_dir) / "config.cfg");
  cfg << serialize(config);
  std::ofstream out(fs::path(out_dir) / "summary.csv");
  write_summary_csv(out, summary);
  fmt::print("{} replications of {} on {}: mean cumulative E-regret at T = {:.6g} (se {:.3g})\n",
             reps, to_string(config.agent.kind), to_string(config.env.kind),
             summary.mean_cum_e_regret.back(), summary.se_cum_e_regret.back());
  return 0;
}

int cmd_compare(const std::vector<std::string>& config_paths, const std::string& out_dir) {
  std::vector<RunConfig> configs;
  for (const auto& p : config_paths) configs.push_back(load_config(p));
  const ComparisonTable table = compare(configs);
  fs::create_directories(out_dir);
  std::ofstream out(fs::path(out_dir) / "compare.csv");
  write_comparison_csv(out, table);
  write_comparison_csv(std::cout, table);
  return 0;
}

int cmd_diag(const std::string& run_dir) {
  const LemmaReport report = rediagnose(run_dir);
  std::ofstream out(fs::path(run_dir) / "lemmas.csv");
  write_lemmas_csv(out, report);
  print_lemmas(report);
  return report.all_passed() ? 0 : 3;
}

int cmd_oracle(const std::string& kind, double theta, std::size_t num_mc) {
  EnvSpec spec;
  spec.kind = parse_env_kind(kind);
  spec.theta = theta;
  spec.validate();
  const LinearModel fhat = best_linear_fit_uniform(spec);
  fmt::print("env {}", to_string(spec.kind));
  if (spec.kind == EnvKind::SensitivityFamily) {
    fmt::print(" theta={} m_theta={:.10g}", theta, sensitivity_arm2_slope(theta));
  }
  fmt::print("\n");
  for (Arm a = 0; a < fhat.arms(); ++a) {
    const auto w = fhat.weights(a);
    fmt::print("fhat_star arm {}: intercept={:.10g} slope={:.10g}\n", a + 1, w[0], w[1]);
  }
  const auto errors = misspecification_errors(spec, num_mc, 0);
  fmt::print("b = {:.10g} (monte carlo {:.6g} +- {:.2g})\n", errors.b.closed_form.value_or(NAN),
             errors.b.monte_carlo.mean, errors.b.monte_carlo.std_error);
  fmt::print("B = {:.10g} (monte carlo {:.6g} +- {:.2g})\n", errors.B.closed_form.value_or(NAN),
             errors.B.monte_carlo.mean, errors.B.monte_carlo.std_error);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Epsilon-FALCON contextual bandit experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> run_out;
  auto* run = app.add_subcommand("run", "Run one replication and write its artifacts");
  run->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Run seed (defaults to run.base_seed)");
  run->add_option("--out", run_out, "Output directory (defaults to run.out_dir)");

  std::size_t reps = 1;
  std::string out_dir;
  auto* suite = app.add_subcommand("suite", "Run replications and write summary.csv");
  suite->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  suite->add_option("--reps", reps, "Replications")->required()->check(CLI::PositiveNumber);
  suite->add_option("--out", out_dir, "Output directory")->required();

  std::vector<std::string> compare_paths;
  auto* cmp = app.add_subcommand("compare", "Compare agents at T/8, T/4, T/2, T");
  cmp->add_option("--config", compare_paths, "Config files (two or more)")
      ->required()
      ->check(CLI::ExistingFile);
  cmp->add_option("--out", out_dir, "Output directory")->required();

  std::string run_dir;
  auto* diag = app.add_subcommand("diag", "Re-run the lemma checks on a stored run");
  diag->add_option("--run", run_dir, "Run directory")->required()->check(CLI::ExistingDirectory);

  std::string env_kind;
  double theta = 0.05;
  std::size_t num_mc = 100000;
  auto* oracle = app.add_subcommand("oracle", "Print closed-form fhat_star, b and B");
  oracle->add_option("--env", env_kind, "step | sensitivity | realizable")->required();
  oracle->add_option("--theta", theta, "Sensitivity family jump width");
  oracle->add_option("--mc", num_mc, "Monte Carlo samples for the cross-check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*run) return cmd_run(config_path, seed, run_out);
    if (*suite) return cmd_suite(config_path, reps, out_dir);
    if (*cmp) return cmd_compare(compare_paths, out_dir);
    if (*diag) return cmd_diag(run_dir);
    if (*oracle) return cmd_oracle(env_kind, theta, num_mc);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NonConvergenceError& e) {
    std::cerr << "non-convergence: " << e.what() << '\n';
    return kExitNonConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return 0;
}
