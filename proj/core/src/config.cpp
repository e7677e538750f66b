#include "efalcon/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "efalcon/error.hpp"

namespace efalcon {

std::string_view to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::EpsilonFalcon: return "epsilon_falcon";
    case AgentKind::Falcon: return "falcon";
    case AgentKind::LinUcb: return "lin_ucb";
    case AgentKind::Uniform: return "uniform";
    case AgentKind::Optimal: return "optimal";
  }
  return "unknown";
}

AgentKind parse_agent_kind(std::string_view text) {
  if (text == "epsilon_falcon") return AgentKind::EpsilonFalcon;
  if (text == "falcon") return AgentKind::Falcon;
  if (text == "lin_ucb" || text == "linucb") return AgentKind::LinUcb;
  if (text == "uniform") return AgentKind::Uniform;
  if (text == "optimal") return AgentKind::Optimal;
  throw ConfigError("agent.kind: unknown agent '" + std::string(text) + "'");
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  const auto env_tuple = [](const EnvSpec& e) {
    return std::tie(e.kind, e.theta, e.noise_sd, e.num_arms, e.context_dim, e.clip_rewards);
  };
  return env_tuple(a.env) == env_tuple(b.env) && a.agent == b.agent && a.horizon == b.horizon &&
         a.replications == b.replications && a.base_seed == b.base_seed &&
         a.mc_samples == b.mc_samples && a.out_dir == b.out_dir;
}

void RunConfig::validate() const {
  std::vector<std::string> problems;
  try {
    env.validate();
  } catch (const ConfigError& e) {
    problems.insert(problems.end(), e.problems().begin(), e.problems().end());
  }
  if (agent.epsilon && !(*agent.epsilon >= 0.0 && *agent.epsilon < 0.5)) {
    problems.push_back("agent.epsilon: must lie in [0, 0.5)");
  }
  if (!(agent.epsilon_c > 0.0)) problems.push_back("agent.epsilon_c: must be > 0");
  if (!(agent.delta > 0.0 && agent.delta <= 0.5)) problems.push_back("agent.delta: must lie in (0, 0.5]");
  if (agent.tau1 < 4) problems.push_back("agent.tau1: must be >= 4");
  if (!(agent.rho > 0.0 && agent.rho <= 1.0)) problems.push_back("agent.rho: must lie in (0, 1]");
  if (!(agent.rho_prime >= 0.0)) problems.push_back("agent.rho_prime: must be >= 0");
  if (!(agent.comp >= 0.0)) problems.push_back("agent.comp: must be >= 0 (0 selects d)");
  if (!(agent.C1 > 0.0)) problems.push_back("agent.C1: must be > 0");
  if (!(agent.C3 > 0.0)) problems.push_back("agent.C3: must be > 0");
  if (!(agent.tol > 0.0)) problems.push_back("agent.tol: must be > 0");
  if (!(agent.alpha_ucb >= 0.0)) problems.push_back("agent.alpha_ucb: must be >= 0");
  if (!(agent.ridge > 0.0)) problems.push_back("agent.ridge: must be > 0");
  if (agent.batch_size < 1) problems.push_back("agent.batch_size: must be >= 1");
  if (horizon < 1) problems.push_back("run.horizon: must be >= 1");
  if (replications < 1) problems.push_back("run.replications: must be >= 1");
  if (mc_samples < 2) problems.push_back("run.mc_samples: must be >= 2");
  if (!problems.empty()) throw ConfigError(std::move(problems));
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError(std::string(key) + ": cannot parse '" + std::string(text) + "'");
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(std::string(key) + ": expected true or false, got '" + std::string(text) + "'");
}

using Setter = std::function<void(RunConfig&, std::string_view key, std::string_view value)>;

template <typename T, typename Field>
Setter number(Field field) {
  return [field](RunConfig& c, std::string_view key, std::string_view v) {
    field(c) = parse_number<T>(key, v);
  };
}

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"env.kind", [](RunConfig& c, std::string_view, std::string_view v) { c.env.kind = parse_env_kind(v); }},
      {"env.theta", number<double>([](RunConfig& c) -> double& { return c.env.theta; })},
      {"env.noise_sd", number<double>([](RunConfig& c) -> double& { return c.env.noise_sd; })},
      {"env.num_arms", number<std::size_t>([](RunConfig& c) -> std::size_t& { return c.env.num_arms; })},
      {"env.context_dim", number<std::size_t>([](RunConfig& c) -> std::size_t& { return c.env.context_dim; })},
      {"env.clip", [](RunConfig& c, std::string_view k, std::string_view v) { c.env.clip_rewards = parse_bool(k, v); }},
      {"agent.kind", [](RunConfig& c, std::string_view, std::string_view v) { c.agent.kind = parse_agent_kind(v); }},
      {"agent.epsilon",
       [](RunConfig& c, std::string_view k, std::string_view v) {
         if (v == "auto") {
           c.agent.epsilon.reset();
         } else {
           c.agent.epsilon = parse_number<double>(k, v);
         }
       }},
      {"agent.epsilon_c", number<double>([](RunConfig& c) -> double& { return c.agent.epsilon_c; })},
      {"agent.delta", number<double>([](RunConfig& c) -> double& { return c.agent.delta; })},
      {"agent.tau1", number<std::size_t>([](RunConfig& c) -> std::size_t& { return c.agent.tau1; })},
      {"agent.C1", number<double>([](RunConfig& c) -> double& { return c.agent.C1; })},
      {"agent.C3", number<double>([](RunConfig& c) -> double& { return c.agent.C3; })},
      {"agent.rho", number<double>([](RunConfig& c) -> double& { return c.agent.rho; })},
      {"agent.rho_prime", number<double>([](RunConfig& c) -> double& { return c.agent.rho_prime; })},
      {"agent.comp", number<double>([](RunConfig& c) -> double& { return c.agent.comp; })},
      {"agent.tol", number<double>([](RunConfig& c) -> double& { return c.agent.tol; })},
      {"agent.alpha_ucb", number<double>([](RunConfig& c) -> double& { return c.agent.alpha_ucb; })},
      {"agent.ridge", number<double>([](RunConfig& c) -> double& { return c.agent.ridge; })},
      {"agent.batch_size", number<std::size_t>([](RunConfig& c) -> std::size_t& { return c.agent.batch_size; })},
      {"run.horizon", number<std::size_t>([](RunConfig& c) -> std::size_t& { return c.horizon; })},
      {"run.replications", number<std::size_t>([](RunConfig& c) -> std::size_t& { return c.replications; })},
      {"run.base_seed", number<std::uint64_t>([](RunConfig& c) -> std::uint64_t& { return c.base_seed; })},
      {"run.mc_samples", number<std::size_t>([](RunConfig& c) -> std::size_t& { return c.mc_samples; })},
      {"run.out_dir", [](RunConfig& c, std::string_view, std::string_view v) { c.out_dir = std::string(v); }},
  };
  return table;
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  RunConfig config;
  std::vector<std::string> problems;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto next = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
    pos = next == std::string_view::npos ? text.size() + 1 : next + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      problems.push_back("line " + std::to_string(line_no) + ": expected key = value");
      continue;
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) {
      problems.push_back(std::string(key) + ": unknown key (line " + std::to_string(line_no) + ")");
      continue;
    }
    try {
      it->second(config, key, value);
    } catch (const ConfigError& e) {
      problems.insert(problems.end(), e.problems().begin(), e.problems().end());
    }
  }
  // Range checks run even after parse errors so one pass reports everything.
  try {
    config.validate();
  } catch (const ConfigError& e) {
    problems.insert(problems.end(), e.problems().begin(), e.problems().end());
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string serialize(const RunConfig& c) {
  std::string out;
  auto line = [&out](std::string_view key, const auto& value) {
    out += fmt::format("{} = {}\n", key, value);
  };
  line("env.kind", to_string(c.env.kind));
  line("env.theta", c.env.theta);
  line("env.noise_sd", c.env.noise_sd);
  line("env.num_arms", c.env.num_arms);
  line("env.context_dim", c.env.context_dim);
  line("env.clip", c.env.clip_rewards ? "true" : "false");
  line("agent.kind", to_string(c.agent.kind));
  if (c.agent.epsilon) {
    line("agent.epsilon", *c.agent.epsilon);
  } else {
    line("agent.epsilon", "auto");
  }
  line("agent.epsilon_c", c.agent.epsilon_c);
  line("agent.delta", c.agent.delta);
  line("agent.tau1", c.agent.tau1);
  line("agent.C1", c.agent.C1);
  line("agent.C3", c.agent.C3);
  line("agent.rho", c.agent.rho);
  line("agent.rho_prime", c.agent.rho_prime);
  line("agent.comp", c.agent.comp);
  line("agent.tol", c.agent.tol);
  line("agent.alpha_ucb", c.agent.alpha_ucb);
  line("agent.ridge", c.agent.ridge);
  line("agent.batch_size", c.agent.batch_size);
  line("run.horizon", c.horizon);
  line("run.replications", c.replications);
  line("run.base_seed", c.base_seed);
  line("run.mc_samples", c.mc_samples);
  line("run.out_dir", c.out_dir);
  return out;
}

}  // namespace efalcon
