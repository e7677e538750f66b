#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "efalcon/types.hpp"

namespace efalcon {

/// Number of arms and context coordinates a model is built for.
struct ModelShape {
  std::size_t arms = 2;
  std::size_t context_dim = 1;

  /// Parameters per arm: intercept plus one slope per coordinate.
  std::size_t per_arm() const noexcept { return context_dim + 1; }
  /// Total parameter count d.
  std::size_t parameters() const noexcept { return arms * per_arm(); }

  friend bool operator==(const ModelShape&, const ModelShape&) = default;
};

/// Per-arm linear reward model f(x, a) = w_a . [1, x_1, ..., x_dx].
class LinearModel {
 public:
  LinearModel() = default;
  /// The zero model (f == 0).
  explicit LinearModel(ModelShape shape);
  LinearModel(ModelShape shape, std::vector<double> flat_weights);

  const ModelShape& shape() const noexcept { return shape_; }
  std::size_t arms() const noexcept { return shape_.arms; }

  std::span<const double> weights(Arm a) const;
  std::span<double> weights(Arm a);
  std::span<const double> flat() const noexcept { return w_; }

  /// Throws InvalidArmError when a >= arms().
  double predict(const Context& x, Arm a) const;
  /// Predictions for every arm.
  std::vector<double> predict_all(const Context& x) const;
  /// Arm with the largest prediction; ties go to the lowest index.
  Arm best_arm(const Context& x) const;

  friend bool operator==(const LinearModel&, const LinearModel&) = default;

 private:
  ModelShape shape_{};
  std::vector<double> w_;
};

/// One observed (context, arm, reward) triple.
struct Sample {
  Context x;
  Arm arm = 0;
  double reward = 0.0;
};

/// Append-only collection of observations (an epoch's active or passive data).
class DataBatch {
 public:
  DataBatch() = default;
  explicit DataBatch(std::vector<Sample> rows) : rows_(std::move(rows)) {}

  void append(Sample s) { rows_.push_back(std::move(s)); }
  void append(const Context& x, Arm a, double r) { rows_.push_back({x, a, r}); }
  void clear() noexcept { rows_.clear(); }

  std::size_t size() const noexcept { return rows_.size(); }
  bool empty() const noexcept { return rows_.empty(); }
  const std::vector<Sample>& rows() const noexcept { return rows_; }
  const Sample& operator[](std::size_t i) const { return rows_[i]; }

 private:
  std::vector<Sample> rows_;
};

/// A least-squares fit together with the rank-deficiency flag.
struct Fit {
  LinearModel model;
  /// True when at least one arm's normal equations needed the ridge term.
  bool ridge_fallback = false;
};

/// Ridge added to an arm's normal equations when its weighted design is
/// rank deficient.
inline constexpr double kRidgeFallback = 1e-8;

/// Sum of squared residuals. Empty batch gives 0.
double sse(const LinearModel& f, const DataBatch& batch);
/// Mean squared residual; 0 for an empty batch.
double normalized_sse(const LinearModel& f, const DataBatch& batch);

/// Per-arm least squares on `batch` (normalized objective). Arms without
/// rows get zero weights.
Fit fit_ols(const DataBatch& batch, ModelShape shape);

/// Minimizer of mean SSE on `active` + lambda * mean SSE on `passive`.
/// Row weights are 1/|active| and lambda/|passive|.
Fit fit_weighted(const DataBatch& active, const DataBatch& passive, double lambda,
                 ModelShape shape);

/// Passive-data constraint: normalized_sse(f, passive) <= alpha + slack.
struct ConstraintSpec {
  DataBatch passive;
  /// Best achievable normalized SSE on `passive` over the model class.
  double alpha = 0.0;
  /// Additive budget on top of alpha; must be > 0 for strict feasibility.
  double slack = 0.0;
};

/// Builds a ConstraintSpec, computing alpha from a fresh least-squares fit.
ConstraintSpec make_constraint(DataBatch passive, double slack, ModelShape shape);

struct DualSearchOptions {
  /// Bisection stops once the lambda bracket is narrower than this.
  double lambda_tol = 1e-8;
  /// Doubling gives up past this multiplier.
  double lambda_max = 1e12;
  int max_iterations = 400;
};

/// Diagnostics of the dual search.
struct DualReport {
  double lambda = 0.0;
  /// normalized_sse(f, passive) - alpha - slack; <= 0 when feasible.
  double constraint_residual = 0.0;
  /// Mean SSE of the returned model on the active batch.
  double primal_objective = 0.0;
  /// Lagrangian dual g(lambda) at the returned multiplier.
  double dual_objective = 0.0;
  double duality_gap = 0.0;
  /// Weighted-regression oracle calls made.
  int oracle_calls = 0;
  bool ridge_fallback = false;
};

struct ConstrainedFit {
  LinearModel model;
  DualReport report;
};

/// Minimizes the mean SSE on `active` subject to the passive constraint.
///
/// If the unconstrained minimizer is feasible it is returned with lambda 0.
/// Otherwise the Lagrangian dual g(lambda) is maximized: lambda is doubled
/// from 1 until the bracket contains the maximizer, then bisected. The
/// ascent test at each step is the sign of g's supergradient, which is the
/// constraint residual of the weighted fit. The returned model is exactly
/// fit_weighted(active, passive, report.lambda).
///
/// `tol` is the accepted constraint residual; it also bounds the lambda
/// bracket width when smaller than options.lambda_tol.
///
/// Throws ConfigError when slack <= 0 or tol <= 0, NonConvergenceError when
/// lambda_max is exceeded before the constraint becomes satisfiable.
ConstrainedFit constrained_fit(const DataBatch& active, const ConstraintSpec& cons,
                               double tol, ModelShape shape,
                               const DualSearchOptions& options = {});

/// Lagrangian dual value g(lambda) = min_f L(f, lambda), evaluated with one
/// weighted fit. Exposed for concavity checks.
double lagrangian_dual(const DataBatch& active, const ConstraintSpec& cons,
                       double lambda, ModelShape shape);

}  // namespace efalcon
