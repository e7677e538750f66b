#include "efalcon/env.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "efalcon/error.hpp"

namespace efalcon {

std::string_view to_string(EnvKind kind) {
  switch (kind) {
    case EnvKind::StepFunction: return "step";
    case EnvKind::SensitivityFamily: return "sensitivity";
    case EnvKind::RealizableLinear: return "realizable";
  }
  return "unknown";
}

EnvKind parse_env_kind(std::string_view text) {
  if (text == "step" || text == "step_function") return EnvKind::StepFunction;
  if (text == "sensitivity" || text == "sensitivity_family") return EnvKind::SensitivityFamily;
  if (text == "realizable" || text == "realizable_linear") return EnvKind::RealizableLinear;
  throw ConfigError("env.kind: unknown environment '" + std::string(text) + "'");
}

void EnvSpec::validate() const {
  std::vector<std::string> problems;
  if (num_arms < 2) problems.push_back("env.num_arms: need at least 2 arms");
  if (context_dim < 1) problems.push_back("env.context_dim: must be >= 1");
  if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) {
    problems.push_back("env.noise_sd: must be finite and >= 0");
  }
  if (kind != EnvKind::RealizableLinear) {
    if (num_arms != 2) problems.push_back("env.num_arms: step and sensitivity environments have 2 arms");
    if (context_dim != 1) problems.push_back("env.context_dim: step and sensitivity environments are 1-d");
  }
  if (kind == EnvKind::SensitivityFamily && !(theta > 0.0 && theta <= 0.05)) {
    problems.push_back("env.theta: must lie in (0, 0.05]");
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
}

namespace {

// One linear piece c0 + c1 x of a 1-d function on (lo, hi].
struct Piece {
  double lo, hi, c0, c1;
};

// f*(., a) for the 1-d built-in kinds as linear pieces.
std::vector<Piece> truth_pieces(const EnvSpec& spec, Arm a) {
  switch (spec.kind) {
    case EnvKind::StepFunction:
      if (a == 0) return {{0.0, 0.5, 0.0, 0.0}, {0.5, 1.0, 1.0, 0.0}};
      return {{0.0, 1.0, 0.5, 0.0}};
    case EnvKind::SensitivityFamily: {
      const double cut = 1.0 - spec.theta;
      if (a == 0) return {{0.0, cut, 0.1, 0.0}, {cut, 1.0, 1.0, 0.0}};
      return {{0.0, 1.0, 1.0, sensitivity_arm2_slope(spec.theta)}};
    }
    case EnvKind::RealizableLinear: break;
  }
  throw ConfigError("piecewise truth is only defined for the 1-d built-in environments");
}

// Best line on Unif(0,1) for lo + (hi - lo) 1{x > cut}.
std::pair<double, double> step_line(double lo, double hi, double cut) {
  const double jump = hi - lo;
  const double mean = lo + jump * (1.0 - cut);
  const double slope = 6.0 * jump * cut * (1.0 - cut);  // 12 Cov(x, g)
  return {mean - 0.5 * slope, slope};
}

void check_arm(const EnvSpec& spec, Arm a) {
  if (a >= spec.num_arms) {
    throw InvalidArmError("arm index " + std::to_string(a) + " out of range for " +
                          std::to_string(spec.num_arms) + " arms");
  }
}

// Integral of (p + q x)^2 over [u, v].
double square_integral(double p, double q, double u, double v) {
  return p * p * (v - u) + p * q * (v * v - u * u) + q * q * (v * v * v - u * u * u) / 3.0;
}

// Residual lines fhat*(., a) - f*(., a) on a common refinement of (0, 1).
struct ResidualTable {
  std::vector<double> cuts;                       // breakpoints, 0 .. 1
  std::vector<std::vector<std::pair<double, double>>> lines;  // [interval][arm]
};

ResidualTable residual_table(const EnvSpec& spec, const LinearModel& fhat) {
  std::vector<std::vector<Piece>> pieces;
  std::vector<double> cuts{0.0, 1.0};
  for (Arm a = 0; a < spec.num_arms; ++a) {
    pieces.push_back(truth_pieces(spec, a));
    for (const auto& p : pieces.back()) cuts.push_back(p.lo);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  ResidualTable table;
  table.cuts = cuts;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    std::vector<std::pair<double, double>> row;
    for (Arm a = 0; a < spec.num_arms; ++a) {
      const auto w = fhat.weights(a);
      const auto& ps = pieces[a];
      const auto it = std::find_if(ps.begin(), ps.end(),
                                   [&](const Piece& p) { return mid > p.lo && mid <= p.hi; });
      row.emplace_back(w[0] - it->c0, w[1] - it->c1);
    }
    table.lines.push_back(std::move(row));
  }
  return table;
}

double closed_form_b(const EnvSpec& spec, const LinearModel& fhat) {
  if (spec.kind == EnvKind::RealizableLinear) return 0.0;
  const auto table = residual_table(spec, fhat);
  double total = 0.0;
  for (std::size_t i = 0; i < table.lines.size(); ++i) {
    for (const auto& [p, q] : table.lines[i]) {
      total += square_integral(p, q, table.cuts[i], table.cuts[i + 1]);
    }
  }
  return total / static_cast<double>(spec.num_arms);
}

// E max_a r_a(x)^2: split each interval where two squared residuals cross,
// then integrate the pointwise maximum piece by piece.
double closed_form_B(const EnvSpec& spec, const LinearModel& fhat) {
  if (spec.kind == EnvKind::RealizableLinear) return 0.0;
  const auto table = residual_table(spec, fhat);
  double total = 0.0;
  for (std::size_t i = 0; i < table.lines.size(); ++i) {
    const double u = table.cuts[i];
    const double v = table.cuts[i + 1];
    const auto& lines = table.lines[i];
    std::vector<double> split{u, v};
    for (std::size_t a = 0; a < lines.size(); ++a) {
      for (std::size_t b = a + 1; b < lines.size(); ++b) {
        // r_a = r_b and r_a = -r_b.
        for (double sign : {1.0, -1.0}) {
          const double dq = lines[a].second - sign * lines[b].second;
          const double dp = lines[a].first - sign * lines[b].first;
          if (dq != 0.0) {
            const double root = -dp / dq;
            if (root > u && root < v) split.push_back(root);
          }
        }
      }
    }
    std::sort(split.begin(), split.end());
    for (std::size_t k = 0; k + 1 < split.size(); ++k) {
      const double mid = 0.5 * (split[k] + split[k + 1]);
      std::size_t top = 0;
      double top_value = -1.0;
      for (std::size_t a = 0; a < lines.size(); ++a) {
        const double r = lines[a].first + lines[a].second * mid;
        if (r * r > top_value) {
          top_value = r * r;
          top = a;
        }
      }
      total += square_integral(lines[top].first, lines[top].second, split[k], split[k + 1]);
    }
  }
  return total;
}

}  // namespace

double sensitivity_arm2_slope(double theta) {
  const auto [intercept, slope] = step_line(0.1, 1.0, 1.0 - theta);
  const double meet = intercept + slope * (1.0 - theta);
  return (meet - 1.0) / (1.0 - theta);
}

LinearModel realizable_truth(const EnvSpec& spec) {
  Rng rng(spec.seed, streams::kEnvParameters);
  LinearModel model(spec.model_shape());
  const double slope_range = 0.3 / static_cast<double>(spec.context_dim);
  for (Arm a = 0; a < spec.num_arms; ++a) {
    auto w = model.weights(a);
    w[0] = rng.uniform(0.3, 0.7);
    for (std::size_t i = 1; i < w.size(); ++i) w[i] = rng.uniform(-slope_range, slope_range);
  }
  return model;
}

double mean_reward(const EnvSpec& spec, const Context& x, Arm a) {
  check_arm(spec, a);
  const double s = x.scalar();
  switch (spec.kind) {
    case EnvKind::StepFunction:
      return a == 0 ? (s > 0.5 ? 1.0 : 0.0) : 0.5;
    case EnvKind::SensitivityFamily:
      if (a == 0) return s > 1.0 - spec.theta ? 1.0 : 0.1;
      return 1.0 + sensitivity_arm2_slope(spec.theta) * s;
    case EnvKind::RealizableLinear:
      return realizable_truth(spec).predict(x, a);
  }
  return 0.0;
}

Arm optimal_policy_action(const EnvSpec& spec, const Context& x) {
  Arm best = 0;
  double best_value = mean_reward(spec, x, 0);
  for (Arm a = 1; a < spec.num_arms; ++a) {
    const double v = mean_reward(spec, x, a);
    if (v > best_value) {
      best = a;
      best_value = v;
    }
  }
  return best;
}

LinearModel best_linear_fit_uniform(const EnvSpec& spec) {
  switch (spec.kind) {
    case EnvKind::StepFunction: {
      const auto [c0, c1] = step_line(0.0, 1.0, 0.5);
      return LinearModel({2, 1}, {c0, c1, 0.5, 0.0});
    }
    case EnvKind::SensitivityFamily: {
      const auto [c0, c1] = step_line(0.1, 1.0, 1.0 - spec.theta);
      return LinearModel({2, 1}, {c0, c1, 1.0, sensitivity_arm2_slope(spec.theta)});
    }
    case EnvKind::RealizableLinear:
      return realizable_truth(spec);
  }
  throw ConfigError("best_linear_fit_uniform: unsupported environment kind");
}

Environment::Environment(EnvSpec spec)
    : spec_(std::move(spec)), rng_(spec_.seed, streams::kEnvironment) {
  spec_.validate();
  if (spec_.kind == EnvKind::RealizableLinear) truth_ = realizable_truth(spec_);
  if (spec_.kind == EnvKind::SensitivityFamily) arm2_slope_ = sensitivity_arm2_slope(spec_.theta);
  fhat_star_ = best_linear_fit_uniform(spec_);
}

Context Environment::sample_context() {
  std::vector<double> values(spec_.context_dim);
  for (auto& v : values) v = rng_.uniform();
  return Context(std::move(values));
}

double Environment::mean_reward(const Context& x, Arm a) const {
  check_arm(spec_, a);
  const double s = x.scalar();
  switch (spec_.kind) {
    case EnvKind::StepFunction:
      return a == 0 ? (s > 0.5 ? 1.0 : 0.0) : 0.5;
    case EnvKind::SensitivityFamily:
      if (a == 0) return s > 1.0 - spec_.theta ? 1.0 : 0.1;
      return 1.0 + arm2_slope_ * s;
    case EnvKind::RealizableLinear:
      return truth_.predict(x, a);
  }
  return 0.0;
}

Arm Environment::optimal_action(const Context& x) const {
  Arm best = 0;
  double best_value = mean_reward(x, 0);
  for (Arm a = 1; a < spec_.num_arms; ++a) {
    const double v = mean_reward(x, a);
    if (v > best_value) {
      best = a;
      best_value = v;
    }
  }
  return best;
}

double Environment::sample_reward(const Context& x, Arm a) {
  const double mean = mean_reward(x, a);
  const double r = mean + spec_.noise_sd * rng_.normal();
  return spec_.clip_rewards ? std::clamp(r, 0.0, 1.0) : r;
}

std::vector<double> Environment::sample_rewards(const Context& x) {
  std::vector<double> out(spec_.num_arms);
  for (Arm a = 0; a < spec_.num_arms; ++a) out[a] = sample_reward(x, a);
  return out;
}

MisspecificationErrors misspecification_errors(const EnvSpec& spec, std::size_t num_mc,
                                               std::uint64_t seed) {
  spec.validate();
  if (num_mc < 2) throw ConfigError("num_mc: need at least 2 Monte Carlo samples");
  const Environment env(spec);
  const LinearModel& fhat = env.best_linear_fit();
  Rng rng(seed, streams::kDiagnostics);
  const double k = static_cast<double>(spec.num_arms);

  double sum_b = 0.0, sum_b2 = 0.0, sum_B = 0.0, sum_B2 = 0.0;
  std::vector<double> values(spec.context_dim);
  for (std::size_t i = 0; i < num_mc; ++i) {
    for (auto& v : values) v = rng.uniform();
    const Context x(values);
    double mean_sq = 0.0;
    double max_sq = 0.0;
    for (Arm a = 0; a < spec.num_arms; ++a) {
      const double r = fhat.predict(x, a) - env.mean_reward(x, a);
      mean_sq += r * r;
      max_sq = std::max(max_sq, r * r);
    }
    mean_sq /= k;
    sum_b += mean_sq;
    sum_b2 += mean_sq * mean_sq;
    sum_B += max_sq;
    sum_B2 += max_sq * max_sq;
  }
  const double n = static_cast<double>(num_mc);
  auto estimate = [n](double sum, double sum_sq) {
    const double mean = sum / n;
    const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
    return Estimate{mean, std::sqrt(var / n)};
  };
  MisspecificationErrors out;
  out.b.monte_carlo = estimate(sum_b, sum_b2);
  out.B.monte_carlo = estimate(sum_B, sum_B2);
  if (spec.kind == EnvKind::RealizableLinear || spec.context_dim == 1) {
    out.b.closed_form = closed_form_b(spec, fhat);
    out.B.closed_form = closed_form_B(spec, fhat);
  }
  return out;
}

std::optional<double> exact_approximation_error(const EnvSpec& spec) {
  spec.validate();
  if (spec.kind != EnvKind::RealizableLinear && spec.context_dim != 1) return std::nullopt;
  return closed_form_b(spec, best_linear_fit_uniform(spec));
}

ApproximationError approximation_error_b(const EnvSpec& spec, std::size_t num_mc,
                                         std::uint64_t seed) {
  return misspecification_errors(spec, num_mc, seed).b;
}

ApproximationError worst_case_error_B(const EnvSpec& spec, std::size_t num_mc,
                                      std::uint64_t seed) {
  return misspecification_errors(spec, num_mc, seed).B;
}

}  // namespace efalcon
