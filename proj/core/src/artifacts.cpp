#include "efalcon/artifacts.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "efalcon/error.hpp"
#include "efalcon/falcon.hpp"

namespace efalcon {

namespace {

std::string format_context(const Context& x) {
  std::string out;
  for (std::size_t i = 0; i < x.dim(); ++i) {
    if (i) out += ';';
    out += fmt::format("{}", x[i]);
  }
  return out;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  return out;
}

}  // namespace

void write_trace_csv(std::ostream& out, const RegretTrace& trace) {
  out << csv_header::kTrace << '\n';
  for (const auto& row : trace.rows) {
    fmt::print(out, "{},{},{},{},{},{},{},{}\n", row.t, row.epoch, to_string(row.phase),
               format_context(row.x), row.action + 1, row.reward, row.e_regret, row.cum_e_regret);
  }
}

void write_epochs_csv(std::ostream& out, const std::vector<EpochEvent>& events,
                      const LinearModel& fhat_star) {
  out << csv_header::kEpochs << '\n';
  for (const auto& e : events) {
    if (!e.complete) {
      fmt::print(out, "{},{},{},{},nan,nan,nan,nan,nan\n", e.m, e.tau_start, e.tau_end, e.gamma);
      continue;
    }
    const double mse = linear_model_mse_exact(e.next_model, fhat_star);
    if (e.unconstrained_fallback) {
      fmt::print(out, "{},{},{},{},nan,nan,0,0,{}\n", e.m, e.tau_start, e.tau_end, e.gamma, mse);
    } else {
      fmt::print(out, "{},{},{},{},{},{},{},{},{}\n", e.m, e.tau_start, e.tau_end, e.gamma,
                 e.alpha, e.slack, e.lambda_star, e.duality_gap, mse);
    }
  }
}

void write_models_csv(std::ostream& out, const std::vector<ModelSnapshot>& models) {
  std::size_t width = models.empty() ? 2 : models.front().model.shape().per_arm();
  out << "m,arm";
  for (std::size_t i = 0; i < width; ++i) out << ",w" << i;
  out << '\n';
  for (const auto& snap : models) {
    for (Arm a = 0; a < snap.model.arms(); ++a) {
      out << snap.index << ',' << a + 1;
      for (double w : snap.model.weights(a)) fmt::print(out, ",{}", w);
      out << '\n';
    }
  }
}

void write_lemmas_csv(std::ostream& out, const LemmaReport& report) {
  out << csv_header::kLemmas << '\n';
  for (const auto& c : report.checks) {
    const char* status = !c.asserted ? "info" : (c.passed ? "pass" : "fail");
    fmt::print(out, "{},{},{},{},{},{},{}\n", c.name, c.epoch, c.lhs, c.rhs, c.std_error,
               c.asserted ? 1 : 0, status);
  }
}

void write_summary_csv(std::ostream& out, const SuiteSummary& summary) {
  out << csv_header::kSummary << '\n';
  for (std::size_t t = 0; t < summary.mean_e_regret.size(); ++t) {
    fmt::print(out, "{},{},{},{},{}\n", t + 1, summary.mean_e_regret[t], summary.se_e_regret[t],
               summary.mean_cum_e_regret[t], summary.se_cum_e_regret[t]);
  }
}

void write_comparison_csv(std::ostream& out, const ComparisonTable& table) {
  out << "checkpoint";
  for (const auto& label : table.labels) out << ',' << label << "_mean," << label << "_se";
  out << '\n';
  for (std::size_t j = 0; j < table.checkpoints.size(); ++j) {
    out << table.checkpoints[j];
    for (const auto& row : table.cells) fmt::print(out, ",{},{}", row[j].mean, row[j].std_error);
    out << '\n';
  }
}

void write_run(const std::filesystem::path& dir, const RunConfig& config, const RunResult& result) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_output(dir / "config.cfg");
    out << serialize(config);
  }
  {
    auto out = open_output(dir / "trace.csv");
    write_trace_csv(out, result.trace);
  }
  {
    auto out = open_output(dir / "epochs.csv");
    write_epochs_csv(out, result.events, best_linear_fit_uniform(config.env));
  }
  {
    auto out = open_output(dir / "models.csv");
    write_models_csv(out, result.models);
  }
  {
    auto out = open_output(dir / "lemmas.csv");
    write_lemmas_csv(out, result.lemmas);
  }
  {
    auto out = open_output(dir / "run.txt");
    const double cum = result.e_regret.empty() ? 0.0 : [&] {
      double s = 0.0;
      for (double v : result.e_regret) s += v;
      return s;
    }();
    fmt::print(out, "seed = {}\nagent = {}\nepsilon = {}\nhorizon = {}\n", result.seed,
               result.agent_name, result.epsilon, config.horizon);
    fmt::print(out, "cum_e_regret = {}\nrealized_regret = {}\n", cum, result.trace.realized_regret);
    for (const auto& e : result.events) {
      if (!e.complete) fmt::print(out, "incomplete_epoch = {}\n", e.m);
    }
    fmt::print(out, "lemmas_passed = {}\n", result.lemmas.all_passed() ? "true" : "false");
  }
}

std::vector<ModelSnapshot> read_snapshots(const std::filesystem::path& dir,
                                          const ModelShape& shape) {
  std::ifstream in(dir / "models.csv");
  if (!in) throw ConfigError("cannot open " + (dir / "models.csv").string());
  std::map<std::size_t, std::vector<double>> weights;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != 2 + shape.per_arm()) {
      throw ConfigError("models.csv: row has " + std::to_string(cells.size()) + " cells");
    }
    const std::size_t m = std::stoul(cells[0]);
    const std::size_t arm = std::stoul(cells[1]);
    auto& w = weights[m];
    if (w.empty()) w.assign(shape.parameters(), 0.0);
    if (arm < 1 || arm > shape.arms) throw ConfigError("models.csv: arm out of range");
    for (std::size_t i = 0; i < shape.per_arm(); ++i) {
      w[(arm - 1) * shape.per_arm() + i] = std::stod(cells[2 + i]);
    }
  }
  std::vector<ModelSnapshot> out;
  for (auto& [m, w] : weights) out.push_back({m, 0.0, LinearModel(shape, std::move(w))});
  return out;
}

LemmaReport rediagnose(const std::filesystem::path& dir) {
  const RunConfig config = load_config(dir / "config.cfg");
  std::uint64_t seed = config.base_seed;
  {
    std::ifstream in(dir / "run.txt");
    std::string line;
    while (std::getline(in, line)) {
      if (line.rfind("seed = ", 0) == 0) seed = std::stoull(line.substr(7));
    }
  }
  auto snapshots = read_snapshots(dir, config.env.model_shape());
  const bool falcon = config.agent.kind == AgentKind::EpsilonFalcon ||
                      config.agent.kind == AgentKind::Falcon;
  if (falcon) {
    const EpochSchedule schedule(config.agent.tau1);
    RateParams rates;
    rates.rho = config.agent.rho;
    rates.rho_prime = config.agent.rho_prime;
    rates.comp = resolved_comp(config);
    rates.C1 = config.agent.C1;
    rates.C3 = config.agent.C3;
    rates.delta = config.agent.delta;
    for (auto& s : snapshots) s.gamma = gamma_for_epoch(s.index, schedule, rates, config.env.num_arms);
  }
  LemmaInputs inputs;
  inputs.spec = config.env;
  inputs.spec.seed = seed;
  if (falcon) inputs.snapshots = std::move(snapshots);
  inputs.epsilon = falcon ? resolved_epsilon(config) : 0.0;
  inputs.num_mc = config.mc_samples;
  inputs.seed = seed;
  return lemma_suite(inputs);
}

}  // namespace efalcon
