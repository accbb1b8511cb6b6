#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "falsify/metrics.hpp"
#include "falsify/param_space.hpp"
#include "falsify/reinforce.hpp"
#include "falsify/reward.hpp"
#include "falsify/sim.hpp"

namespace falsify {

/// Everything needed to turn a concrete scenario into a scored episode.
struct Problem {
  ParameterSpace space;
  WorldConfig world;
  SutConfig sut;
  SafetyRequirement requirement;
  RssParams rss;
  RewardConfig reward;

  void validate() const;
  Trace simulate(const ConcreteScenario& scenario) const;
};

/// Scored result of one episode. A faulted episode carries zero reward.
struct EpisodeEval {
  ConcreteScenario scenario;
  Outcome outcome = Outcome::Timeout;
  bool faulted = false;
  std::string fault;
  double final_dist = 0.0;
  std::size_t high_risk_count = 0;
  std::size_t total_steps = 0;
  double second_half_fraction = 0.0;
  RewardBreakdown reward;
  bool stl_satisfied = true;
};

EpisodeEval evaluate(const Problem& problem, const ConcreteScenario& scenario);

// Serial references and their OpenMP counterparts. Each pair returns identical results:
// the parallel versions only partition independent work and combine it in a fixed order.

std::vector<EpisodeEval> evaluate_batch_serial(const Problem& problem, std::span<const ConcreteScenario> scenarios);
std::vector<EpisodeEval> evaluate_batch_parallel(const Problem& problem, std::span<const ConcreteScenario> scenarios);

/// 1 for every cell of the space whose episode violates the requirement, in ravel order.
std::vector<std::uint8_t> label_violations_serial(const Problem& problem);
std::vector<std::uint8_t> label_violations_parallel(const Problem& problem);

/// Per-item gradients are computed concurrently and summed in batch order.
std::vector<double> policy_gradient_parallel(const Policy& policy, std::span<const BatchItem> batch, double baseline);

/// Number of OpenMP threads available to the parallel kernels.
int max_threads();

}  // namespace falsify
