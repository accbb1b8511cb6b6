#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "falsify/policy.hpp"

namespace falsify {

enum class Optimizer { Sgd, Adam };

std::string_view to_string(Optimizer opt);
Optimizer optimizer_from_string(std::string_view text);

struct TrainConfig {
  double alpha = 5e-3;
  std::size_t batch_size = 25;
  bool use_baseline = true;
  double baseline_decay = 0.9;
  std::size_t total_episodes = 4000;
  std::size_t hidden = 64;
  std::size_t layers = 1;
  double init_scale = 0.08;
  Optimizer optimizer = Optimizer::Adam;
  std::size_t checkpoint_every = 20;  ///< updates between checkpoints; 0 disables periodic checkpoints
  bool early_stop = false;

  void validate() const;
};

/// One episode's contribution to a policy-gradient batch.
struct BatchItem {
  std::vector<std::size_t> prev_action;
  std::vector<std::size_t> action;
  double ret = 0.0;
};

/// (1/N) sum_i grad log pi(a_i | s_i) * (R_i - baseline), single-threaded.
std::vector<double> policy_gradient_serial(const Policy& policy, std::span<const BatchItem> batch, double baseline);

/// REINFORCE update rule with an optional moving-average baseline.
///
/// With the baseline disabled and the SGD optimizer this is the plain Monte-Carlo policy
/// gradient step theta <- theta + alpha * grad J. The baseline is updated after each step:
/// b <- decay * b + (1 - decay) * mean(R).
class Reinforce {
public:
  explicit Reinforce(TrainConfig cfg);

  const TrainConfig& config() const { return cfg_; }
  double baseline() const { return baseline_; }
  std::size_t updates() const { return updates_; }

  /// Estimates the gradient with the serial kernel and applies it.
  void update(Policy& policy, std::span<const BatchItem> batch);

  /// Applies an already estimated ascent direction, then advances the baseline.
  void apply(Policy& policy, std::span<const double> gradient, std::span<const BatchItem> batch);

  /// Baseline used for the next gradient estimate (0 when disabled).
  double effective_baseline() const { return cfg_.use_baseline ? baseline_ : 0.0; }

private:
  TrainConfig cfg_;
  double baseline_ = 0.0;
  std::size_t updates_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

}  // namespace falsify
