#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "efalcon/env.hpp"

namespace efalcon {

enum class AgentKind { EpsilonFalcon, Falcon, LinUcb, Uniform, Optimal };

std::string_view to_string(AgentKind kind);
AgentKind parse_agent_kind(std::string_view text);

struct AgentParams {
  AgentKind kind = AgentKind::EpsilonFalcon;
  /// Forced exploration fraction. nullopt means "auto": tune_epsilon with
  /// the environment's exact b and constant epsilon_c.
  std::optional<double> epsilon = 0.1;
  double epsilon_c = 1.0;
  double delta = 0.1;
  std::size_t tau1 = 4;
  double C1 = 1.0;
  double C3 = 1.0;
  double rho = 1.0;
  double rho_prime = 0.0;
  /// Complexity comp(F); 0 selects the parameter count d.
  double comp = 0.0;
  double tol = 1e-6;
  double alpha_ucb = 0.1;
  double ridge = 1.0;
  std::size_t batch_size = 100;

  friend bool operator==(const AgentParams&, const AgentParams&) = default;
};

/// Everything needed to reproduce a run or a suite of replications.
///
/// Text form is one `key = value` per line with dotted sections:
///
///     env.kind = sensitivity
///     env.theta = 0.05
///     agent.kind = epsilon_falcon
///     agent.epsilon = auto
///     run.horizon = 65536
///
/// Blank lines and `#` comments are ignored. Unknown keys are errors.
struct RunConfig {
  /// env.seed is ignored; each run derives it from the run seed.
  EnvSpec env{};
  AgentParams agent{};
  std::size_t horizon = 1000;
  std::size_t replications = 1;
  std::uint64_t base_seed = 0;
  std::size_t mc_samples = 100000;
  std::string out_dir = "out";

  /// Throws ConfigError naming every invalid field.
  void validate() const;
  /// Seed of replication r: base_seed + r.
  std::uint64_t replication_seed(std::size_t r) const { return base_seed + r; }

  friend bool operator==(const RunConfig&, const RunConfig&);
};

RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);
std::string serialize(const RunConfig& config);

}  // namespace efalcon
