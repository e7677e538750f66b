#include "efalcon/linmodel.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "efalcon/error.hpp"

namespace efalcon {

ConfigError::ConfigError(std::vector<std::string> problems)
    : Error([&] {
        std::string what = "invalid configuration:";
        for (const auto& p : problems) what += "\n  " + p;
        return what;
      }()),
      problems_(std::move(problems)) {}

LinearModel::LinearModel(ModelShape shape)
    : shape_(shape), w_(shape.parameters(), 0.0) {}

LinearModel::LinearModel(ModelShape shape, std::vector<double> flat_weights)
    : shape_(shape), w_(std::move(flat_weights)) {
  if (w_.size() != shape_.parameters()) {
    throw ConfigError("model weight count " + std::to_string(w_.size()) +
                      " does not match shape (" + std::to_string(shape_.parameters()) + ")");
  }
}

std::span<const double> LinearModel::weights(Arm a) const {
  if (a >= shape_.arms) throw InvalidArmError("arm index " + std::to_string(a) + " out of range");
  return std::span<const double>(w_).subspan(a * shape_.per_arm(), shape_.per_arm());
}

std::span<double> LinearModel::weights(Arm a) {
  if (a >= shape_.arms) throw InvalidArmError("arm index " + std::to_string(a) + " out of range");
  return std::span<double>(w_).subspan(a * shape_.per_arm(), shape_.per_arm());
}

double LinearModel::predict(const Context& x, Arm a) const {
  const auto w = weights(a);
  double value = w[0];
  const std::size_t n = std::min(x.dim(), shape_.context_dim);
  for (std::size_t i = 0; i < n; ++i) value += w[i + 1] * x[i];
  return value;
}

std::vector<double> LinearModel::predict_all(const Context& x) const {
  std::vector<double> out(shape_.arms);
  for (Arm a = 0; a < shape_.arms; ++a) out[a] = predict(x, a);
  return out;
}

Arm LinearModel::best_arm(const Context& x) const {
  Arm best = 0;
  double best_value = predict(x, 0);
  for (Arm a = 1; a < shape_.arms; ++a) {
    const double v = predict(x, a);
    if (v > best_value) {
      best = a;
      best_value = v;
    }
  }
  return best;
}

double sse(const LinearModel& f, const DataBatch& batch) {
  double total = 0.0;
  for (const auto& s : batch.rows()) {
    const double r = f.predict(s.x, s.arm) - s.reward;
    total += r * r;
  }
  return total;
}

double normalized_sse(const LinearModel& f, const DataBatch& batch) {
  if (batch.empty()) return 0.0;
  return sse(f, batch) / static_cast<double>(batch.size());
}

namespace {

struct ArmSystem {
  Eigen::MatrixXd gram;
  Eigen::VectorXd moment;
  std::size_t weighted_rows = 0;
};

void accumulate(std::vector<ArmSystem>& systems, const DataBatch& batch, double weight,
                const ModelShape& shape) {
  if (weight == 0.0) return;
  Eigen::VectorXd phi(static_cast<Eigen::Index>(shape.per_arm()));
  for (const auto& s : batch.rows()) {
    if (s.arm >= shape.arms) {
      throw InvalidArmError("batch row has arm " + std::to_string(s.arm) + " but the model has " +
                            std::to_string(shape.arms) + " arms");
    }
    phi[0] = 1.0;
    for (std::size_t i = 0; i < shape.context_dim; ++i) {
      phi[static_cast<Eigen::Index>(i + 1)] = i < s.x.dim() ? s.x[i] : 0.0;
    }
    auto& sys = systems[s.arm];
    sys.gram.noalias() += weight * phi * phi.transpose();
    sys.moment.noalias() += (weight * s.reward) * phi;
    ++sys.weighted_rows;
  }
}

// Solves one arm's normal equations. Returns true if the ridge was needed.
bool solve_arm(ArmSystem& sys, std::span<double> out) {
  const auto p = sys.gram.rows();
  if (sys.weighted_rows == 0) {
    std::fill(out.begin(), out.end(), 0.0);
    return false;
  }
  bool ridge = static_cast<Eigen::Index>(sys.weighted_rows) < p;
  Eigen::VectorXd w;
  if (!ridge) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(sys.gram);
    const double scale = sys.gram.diagonal().cwiseAbs().maxCoeff();
    const auto d = ldlt.vectorD();
    // Treat a pivot below a relative 1e-12 as a collinear design.
    if (ldlt.info() != Eigen::Success || d.minCoeff() <= 1e-12 * scale) {
      ridge = true;
    } else {
      w = ldlt.solve(sys.moment);
    }
  }
  if (ridge) {
    Eigen::MatrixXd regularized = sys.gram;
    regularized.diagonal().array() += kRidgeFallback;
    w = regularized.ldlt().solve(sys.moment);
  }
  for (Eigen::Index i = 0; i < p; ++i) out[static_cast<std::size_t>(i)] = w[i];
  return ridge;
}

}  // namespace

Fit fit_weighted(const DataBatch& active, const DataBatch& passive, double lambda,
                 ModelShape shape) {
  if (!(lambda >= 0.0)) throw ConfigError("fit_weighted: lambda must be >= 0");
  const auto p = static_cast<Eigen::Index>(shape.per_arm());
  std::vector<ArmSystem> systems(shape.arms);
  for (auto& sys : systems) {
    sys.gram = Eigen::MatrixXd::Zero(p, p);
    sys.moment = Eigen::VectorXd::Zero(p);
  }
  if (!active.empty()) accumulate(systems, active, 1.0 / static_cast<double>(active.size()), shape);
  if (!passive.empty()) {
    accumulate(systems, passive, lambda / static_cast<double>(passive.size()), shape);
  }

  Fit fit{LinearModel(shape), false};
  for (Arm a = 0; a < shape.arms; ++a) {
    fit.ridge_fallback |= solve_arm(systems[a], fit.model.weights(a));
  }
  return fit;
}

Fit fit_ols(const DataBatch& batch, ModelShape shape) {
  return fit_weighted(batch, DataBatch{}, 0.0, shape);
}

ConstraintSpec make_constraint(DataBatch passive, double slack, ModelShape shape) {
  const double alpha = normalized_sse(fit_ols(passive, shape).model, passive);
  return ConstraintSpec{std::move(passive), alpha, slack};
}

double lagrangian_dual(const DataBatch& active, const ConstraintSpec& cons, double lambda,
                       ModelShape shape) {
  const auto fit = fit_weighted(active, cons.passive, lambda, shape);
  return normalized_sse(fit.model, active) +
         lambda * (normalized_sse(fit.model, cons.passive) - cons.alpha - cons.slack);
}

ConstrainedFit constrained_fit(const DataBatch& active, const ConstraintSpec& cons, double tol,
                               ModelShape shape, const DualSearchOptions& options) {
  if (!(cons.slack > 0.0)) {
    throw ConfigError("constrained_fit: slack must be > 0 for strict feasibility");
  }
  if (!(tol > 0.0)) throw ConfigError("constrained_fit: tol must be > 0");

  DualReport report;
  const double budget = cons.alpha + cons.slack;

  // One weighted-regression call: model at lambda and its constraint residual.
  auto evaluate = [&](double lambda) {
    ++report.oracle_calls;
    Fit fit = fit_weighted(active, cons.passive, lambda, shape);
    const double residual = normalized_sse(fit.model, cons.passive) - budget;
    return std::pair{std::move(fit), residual};
  };

  auto finish = [&](double lambda, Fit fit, double residual) {
    report.lambda = lambda;
    report.constraint_residual = residual;
    report.ridge_fallback = fit.ridge_fallback;
    report.primal_objective = normalized_sse(fit.model, active);
    report.dual_objective = report.primal_objective + lambda * residual;
    report.duality_gap = report.primal_objective - report.dual_objective;
    return ConstrainedFit{std::move(fit.model), report};
  };

  auto [unconstrained, r0] = evaluate(0.0);
  if (r0 <= 0.0) return finish(0.0, std::move(unconstrained), r0);

  // g is concave with supergradient equal to the residual, so g increases
  // while the weighted fit is still infeasible. Bracket by doubling.
  double lo = 0.0;
  double hi = 1.0;
  auto [hi_fit, hi_residual] = evaluate(hi);
  while (hi_residual > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > options.lambda_max) {
      throw NonConvergenceError(
          "constrained_fit: dual multiplier exceeded lambda_max = " +
          std::to_string(options.lambda_max) + " with constraint residual " +
          std::to_string(hi_residual) + " (alpha " + std::to_string(cons.alpha) + ", slack " +
          std::to_string(cons.slack) + ")");
    }
    std::tie(hi_fit, hi_residual) = evaluate(hi);
  }

  // Bisection keeps hi feasible. Stop on a narrow bracket, or once the
  // feasible end is within tol of the budget and its duality gap
  // (-lambda * residual) is below tol as well.
  const double width_tol = std::min(options.lambda_tol, tol);
  auto settled = [&] { return hi_residual >= -tol * std::min(1.0, 1.0 / hi); };
  int iterations = 0;
  while (hi - lo >= width_tol * std::max(1.0, hi) && !settled()) {
    if (++iterations > options.max_iterations) {
      throw NonConvergenceError("constrained_fit: bisection did not converge in " +
                                std::to_string(options.max_iterations) + " iterations");
    }
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    auto [mid_fit, mid_residual] = evaluate(mid);
    if (mid_residual > 0.0) {
      lo = mid;
    } else {
      hi = mid;
      hi_fit = std::move(mid_fit);
      hi_residual = mid_residual;
    }
  }
  return finish(hi, std::move(hi_fit), hi_residual);
}

}  // namespace efalcon
