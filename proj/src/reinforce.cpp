#include "falsify/reinforce.hpp"

#include <algorithm>
#include <cmath>

#include "falsify/errors.hpp"

namespace falsify {

namespace {
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
}  // namespace

std::string_view to_string(Optimizer opt) { return opt == Optimizer::Sgd ? "sgd" : "adam"; }

Optimizer optimizer_from_string(std::string_view text) {
  if (text == "sgd") return Optimizer::Sgd;
  if (text == "adam") return Optimizer::Adam;
  throw ConfigError("train.optimizer must be \"sgd\" or \"adam\"");
}

void TrainConfig::validate() const {
  if (!(alpha > 0.0)) throw ConfigError("train.alpha must be > 0");
  if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (!(baseline_decay >= 0.0 && baseline_decay < 1.0)) throw ConfigError("train.baseline_decay must be in [0, 1)");
  if (total_episodes < 1) throw ConfigError("train.total_episodes must be >= 1");
  if (hidden < 1) throw ConfigError("train.hidden must be >= 1");
  if (layers < 1) throw ConfigError("train.layers must be >= 1");
  if (!(init_scale >= 0.0)) throw ConfigError("train.init_scale must be >= 0");
}

std::vector<double> policy_gradient_serial(const Policy& policy, std::span<const BatchItem> batch, double baseline) {
  if (batch.empty()) throw UsageError("policy gradient needs a non-empty batch");
  std::vector<double> grad(policy.num_params(), 0.0);
  std::vector<double> item_grad(policy.num_params());
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (const auto& item : batch) {
    std::fill(item_grad.begin(), item_grad.end(), 0.0);
    accumulate_grad_log_prob(policy, item.prev_action, item.action, (item.ret - baseline) * inv_n, item_grad);
    for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += item_grad[j];
  }
  return grad;
}

Reinforce::Reinforce(TrainConfig cfg) : cfg_(cfg) { cfg_.validate(); }

void Reinforce::update(Policy& policy, std::span<const BatchItem> batch) {
  const auto grad = policy_gradient_serial(policy, batch, effective_baseline());
  apply(policy, grad, batch);
}

void Reinforce::apply(Policy& policy, std::span<const double> gradient, std::span<const BatchItem> batch) {
  if (batch.empty()) throw UsageError("reinforce update needs a non-empty batch");
  if (gradient.size() != policy.num_params()) throw ConfigError("gradient does not match policy size");
  auto theta = policy.params();
  ++updates_;

  if (cfg_.optimizer == Optimizer::Sgd) {
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] += cfg_.alpha * gradient[i];
  } else {
    if (m_.size() != theta.size()) {
      m_.assign(theta.size(), 0.0);
      v_.assign(theta.size(), 0.0);
    }
    const double t = static_cast<double>(updates_);
    const double c1 = 1.0 - std::pow(kAdamBeta1, t);
    const double c2 = 1.0 - std::pow(kAdamBeta2, t);
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double g = gradient[i];
      m_[i] = kAdamBeta1 * m_[i] + (1.0 - kAdamBeta1) * g;
      v_[i] = kAdamBeta2 * v_[i] + (1.0 - kAdamBeta2) * g * g;
      theta[i] += cfg_.alpha * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + kAdamEps);
    }
  }

  double mean = 0.0;
  for (const auto& item : batch) mean += item.ret;
  mean /= static_cast<double>(batch.size());
  baseline_ = cfg_.baseline_decay * baseline_ + (1.0 - cfg_.baseline_decay) * mean;
}

}  // namespace falsify
