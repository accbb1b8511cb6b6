#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "falsify/rng.hpp"

namespace falsify {

/// Architecture of the controller: one categorical head per parameter slot.
struct PolicyShape {
  std::vector<std::size_t> head_sizes;
  std::size_t hidden = 64;
  std::size_t layers = 1;

  bool operator==(const PolicyShape&) const = default;
  void validate() const;
};

/// Recurrent categorical policy over a discretized parameter space.
///
/// The previous action is fed in one slot at a time: slot k's input is the embedding of
/// the previous action's bin index for parameter k. A stack of tanh recurrent layers
/// carries its hidden state across slots, and head k maps the top hidden state at slot k
/// to K_k logits. All parameters live in one flat vector theta:
///
///   embeddings  E_k   [K_k x H]        for each slot k
///   per layer   Wx_l  [H x H], Wh_l [H x H], b_l [H]
///   heads       Wo_k  [K_k x H], c_k [K_k]
///
/// Matrices are row-major, output index first.
class Policy {
public:
  /// All-zero parameters.
  explicit Policy(PolicyShape shape);

  /// Weights uniform in [-scale, scale], biases zero.
  static Policy initialized(PolicyShape shape, Rng& rng, double scale = 0.08);

  const PolicyShape& shape() const { return shape_; }
  std::size_t slots() const { return shape_.head_sizes.size(); }
  std::size_t hidden() const { return shape_.hidden; }
  std::size_t layers() const { return shape_.layers; }
  std::size_t num_params() const { return theta_.size(); }

  std::span<double> params() { return theta_; }
  std::span<const double> params() const { return theta_; }

  std::size_t embedding_offset(std::size_t slot) const { return embed_off_[slot]; }
  std::size_t wx_offset(std::size_t layer) const { return layer_off_[layer]; }
  std::size_t wh_offset(std::size_t layer) const { return layer_off_[layer] + shape_.hidden * shape_.hidden; }
  std::size_t bias_offset(std::size_t layer) const { return layer_off_[layer] + 2 * shape_.hidden * shape_.hidden; }
  std::size_t head_w_offset(std::size_t slot) const { return head_off_[slot]; }
  std::size_t head_b_offset(std::size_t slot) const { return head_off_[slot] + shape_.head_sizes[slot] * shape_.hidden; }

  /// Throws ConfigError unless `head_sizes` equals this policy's head sizes.
  void check_compatible(std::span<const std::size_t> head_sizes) const;

private:
  PolicyShape shape_;
  std::vector<std::size_t> embed_off_;
  std::vector<std::size_t> layer_off_;
  std::vector<std::size_t> head_off_;
  std::vector<double> theta_;
};

/// Activations of one forward pass, kept for backpropagation.
struct ForwardPass {
  std::vector<std::vector<double>> logits;  ///< per head
  std::vector<std::vector<double>> probs;   ///< per head, softmax of logits
  std::vector<double> hidden;               ///< [slot][layer][H] post-tanh states
};

ForwardPass forward(const Policy& policy, std::span<const std::size_t> prev_action);

/// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> logits);

struct ActionSample {
  std::vector<std::size_t> indices;
  std::vector<double> log_probs;
  double total_log_prob = 0.0;
};

/// Independent categorical draw per head.
ActionSample sample_action(const std::vector<std::vector<double>>& probs, Rng& rng);

/// log pi(action | prev_action).
double log_prob(const Policy& policy, std::span<const std::size_t> prev_action,
                std::span<const std::size_t> action);

/// Adds scale * grad_theta log pi(action | prev_action) into `grad`.
void accumulate_grad_log_prob(const Policy& policy, std::span<const std::size_t> prev_action,
                              std::span<const std::size_t> action, double scale, std::span<double> grad);

std::vector<double> grad_log_prob(const Policy& policy, std::span<const std::size_t> prev_action,
                                  std::span<const std::size_t> action);

/// Most probable index of each head.
std::vector<std::size_t> modal_action(const ForwardPass& pass);

void save_checkpoint(std::ostream& out, const Policy& policy, std::uint64_t space_fingerprint);

/// Reads a checkpoint; throws ValidationError when it was written for a different space.
Policy load_checkpoint(std::istream& in, std::uint64_t expected_fingerprint);

}  // namespace falsify
