#include "falsify/kernels.hpp"

#include <omp.h>

#include <cmath>

#include "falsify/errors.hpp"

namespace falsify {

void Problem::validate() const {
  world.validate();
  sut.validate();
  requirement.validate();
  rss.validate();
  reward.validate();
  for (const char* name : {param::kEgoOffsetPos, param::kPedAccel, param::kPedVel, param::kPedOffsetPos,
                           param::kWeather}) {
    space.index_of(name);
  }
  for (double w : space.bins(space.index_of(param::kWeather))) {
    sut.range_multiplier(static_cast<int>(std::lround(w)));
  }
}

Trace Problem::simulate(const ConcreteScenario& scenario) const {
  return run_episode(bind_scenario(space, scenario), world, sut, requirement);
}

EpisodeEval evaluate(const Problem& problem, const ConcreteScenario& scenario) {
  EpisodeEval e;
  e.scenario = scenario;
  try {
    const Trace trace = problem.simulate(scenario);
    const RiskProfile profile = classify_timesteps(trace, problem.rss);
    e.outcome = trace.outcome;
    e.final_dist = trace.final_dist;
    e.high_risk_count = profile.high_risk_count;
    e.total_steps = profile.total_steps;
    e.second_half_fraction = profile.second_half_fraction;
    e.reward = total_reward(trace, profile, problem.reward);
    e.stl_satisfied = stl_satisfied(trace, problem.requirement);
  } catch (const SimulationFault& fault) {
    e.faulted = true;
    e.fault = fault.what();
    e.reward = RewardBreakdown{};
  }
  return e;
}

std::vector<EpisodeEval> evaluate_batch_serial(const Problem& problem, std::span<const ConcreteScenario> scenarios) {
  std::vector<EpisodeEval> out;
  out.reserve(scenarios.size());
  for (const auto& s : scenarios) out.push_back(evaluate(problem, s));
  return out;
}

std::vector<EpisodeEval> evaluate_batch_parallel(const Problem& problem,
                                                 std::span<const ConcreteScenario> scenarios) {
  std::vector<EpisodeEval> out(scenarios.size());
  const auto n = static_cast<std::ptrdiff_t>(scenarios.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = evaluate(problem, scenarios[static_cast<std::size_t>(i)]);
  }
  return out;
}

namespace {

std::uint8_t violates(const Problem& problem, std::uint64_t cell) {
  const auto scenario = decode(problem.space, unravel(problem.space, cell));
  return stl_satisfied(problem.simulate(scenario), problem.requirement) ? 0 : 1;
}

}  // namespace

std::vector<std::uint8_t> label_violations_serial(const Problem& problem) {
  const std::uint64_t cells = problem.space.cardinality();
  std::vector<std::uint8_t> labels(cells);
  for (std::uint64_t c = 0; c < cells; ++c) labels[c] = violates(problem, c);
  return labels;
}

std::vector<std::uint8_t> label_violations_parallel(const Problem& problem) {
  const auto cells = static_cast<std::int64_t>(problem.space.cardinality());
  std::vector<std::uint8_t> labels(static_cast<std::size_t>(cells));
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < cells; ++c) {
    labels[static_cast<std::size_t>(c)] = violates(problem, static_cast<std::uint64_t>(c));
  }
  return labels;
}

std::vector<double> policy_gradient_parallel(const Policy& policy, std::span<const BatchItem> batch, double baseline) {
  if (batch.empty()) throw UsageError("policy gradient needs a non-empty batch");
  const std::size_t p = policy.num_params();
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  std::vector<double> partial(batch.size() * p, 0.0);
  const auto n = static_cast<std::ptrdiff_t>(batch.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& item = batch[static_cast<std::size_t>(i)];
    std::span<double> g(partial.data() + static_cast<std::size_t>(i) * p, p);
    accumulate_grad_log_prob(policy, item.prev_action, item.action, (item.ret - baseline) * inv_n, g);
  }
  // Each component sums the items in batch order, matching the serial reference bit for bit.
  std::vector<double> grad(p, 0.0);
  const auto np = static_cast<std::ptrdiff_t>(p);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < np; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) sum += partial[i * p + static_cast<std::size_t>(j)];
    grad[static_cast<std::size_t>(j)] = sum;
  }
  return grad;
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace falsify
