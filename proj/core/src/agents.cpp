#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "efalcon/agent.hpp"
#include "efalcon/error.hpp"

namespace efalcon {

std::string_view to_string(Phase phase) {
  return phase == Phase::Active ? "active" : "passive";
}

namespace {

Eigen::VectorXd features(const Context& x, std::size_t context_dim) {
  Eigen::VectorXd phi(static_cast<Eigen::Index>(context_dim + 1));
  phi[0] = 1.0;
  for (std::size_t i = 0; i < context_dim; ++i) {
    phi[static_cast<Eigen::Index>(i + 1)] = i < x.dim() ? x[i] : 0.0;
  }
  return phi;
}

}  // namespace

LinUcb::LinUcb(LinUcbConfig config) : config_(config), model_(config.shape) {
  std::vector<std::string> problems;
  if (config_.shape.arms < 2) problems.push_back("agent: need at least 2 arms");
  if (!(config_.alpha_ucb >= 0.0)) problems.push_back("agent.alpha_ucb: must be >= 0");
  if (!(config_.ridge > 0.0)) problems.push_back("agent.ridge: must be > 0");
  if (config_.batch_size == 0) problems.push_back("agent.batch_size: must be >= 1");
  if (!problems.empty()) throw ConfigError(std::move(problems));

  const std::size_t p = config_.shape.per_arm();
  gram_.assign(config_.shape.arms * p * p, 0.0);
  moment_.assign(config_.shape.arms * p, 0.0);
  for (Arm a = 0; a < config_.shape.arms; ++a) {
    for (std::size_t i = 0; i < p; ++i) gram_[a * p * p + i * p + i] = config_.ridge;
  }
  gram_inverse_.resize(gram_.size());
  for (std::size_t i = 0; i < gram_.size(); ++i) gram_inverse_[i] = gram_[i] / (config_.ridge * config_.ridge);
  snapshots_.push_back({1, 0.0, model_});
}

double LinUcb::upper_bound(const Context& x, Arm a) const {
  const std::size_t p = config_.shape.per_arm();
  const Eigen::VectorXd phi = features(x, config_.shape.context_dim);
  const Eigen::Map<const Eigen::MatrixXd> inverse(gram_inverse_.data() + a * p * p,
                                                  static_cast<Eigen::Index>(p),
                                                  static_cast<Eigen::Index>(p));
  const double width = std::sqrt(std::max(0.0, phi.dot(inverse * phi)));
  return model_.predict(x, a) + config_.alpha_ucb * width;
}

Arm LinUcb::act(std::size_t, const Context& x) {
  Arm best = 0;
  double best_value = upper_bound(x, 0);
  for (Arm a = 1; a < config_.shape.arms; ++a) {
    const double v = upper_bound(x, a);
    if (v > best_value) {
      best = a;
      best_value = v;
    }
  }
  return best;
}

void LinUcb::observe(std::size_t, const Context& x, Arm a, double reward) {
  if (a >= config_.shape.arms) throw InvalidArmError("LinUcb: arm out of range");
  const std::size_t p = config_.shape.per_arm();
  const Eigen::VectorXd phi = features(x, config_.shape.context_dim);
  Eigen::Map<Eigen::MatrixXd> gram(gram_.data() + a * p * p, static_cast<Eigen::Index>(p),
                                   static_cast<Eigen::Index>(p));
  Eigen::Map<Eigen::VectorXd> moment(moment_.data() + a * p, static_cast<Eigen::Index>(p));
  gram.noalias() += phi * phi.transpose();
  moment.noalias() += reward * phi;
  if (++observed_ % config_.batch_size == 0) refresh();
}

void LinUcb::refresh() {
  const std::size_t p = config_.shape.per_arm();
  const auto n = static_cast<Eigen::Index>(p);
  for (Arm a = 0; a < config_.shape.arms; ++a) {
    const Eigen::Map<const Eigen::MatrixXd> gram(gram_.data() + a * p * p, n, n);
    const Eigen::Map<const Eigen::VectorXd> moment(moment_.data() + a * p, n);
    const Eigen::LLT<Eigen::MatrixXd> llt(gram);
    Eigen::Map<Eigen::MatrixXd> inverse(gram_inverse_.data() + a * p * p, n, n);
    inverse = llt.solve(Eigen::MatrixXd::Identity(n, n));
    const Eigen::VectorXd theta = llt.solve(moment);
    auto w = model_.weights(a);
    for (std::size_t i = 0; i < p; ++i) w[i] = theta[static_cast<Eigen::Index>(i)];
  }
  snapshots_.push_back({observed_ / config_.batch_size + 1, 0.0, model_});
}

std::size_t LinUcb::epoch_of(std::size_t t) const {
  return t == 0 ? 1 : (t - 1) / config_.batch_size + 1;
}

}  // namespace efalcon
