#include <gtest/gtest.h>

#include <omp.h>

#include "falsify/config.hpp"
#include "falsify/errors.hpp"
#include "falsify/kernels.hpp"

using namespace falsify;

namespace {

Problem small_problem() {
  RunConfig cfg = load_config(FALSIFY_TEST_DATA "/small_rigged.json");
  return cfg.make_problem();
}

void expect_same(const EpisodeEval& a, const EpisodeEval& b) {
  EXPECT_EQ(a.scenario, b.scenario);
  EXPECT_EQ(a.outcome, b.outcome);
  EXPECT_EQ(a.faulted, b.faulted);
  EXPECT_EQ(a.final_dist, b.final_dist);
  EXPECT_EQ(a.high_risk_count, b.high_risk_count);
  EXPECT_EQ(a.total_steps, b.total_steps);
  EXPECT_EQ(a.second_half_fraction, b.second_half_fraction);
  EXPECT_EQ(a.reward.total, b.reward.total);
  EXPECT_EQ(a.stl_satisfied, b.stl_satisfied);
}

}  // namespace

TEST(Kernels, BatchEvaluationSerialEqualsParallel) {
  const auto problem = small_problem();
  Rng rng(77);
  std::vector<ConcreteScenario> batch;
  for (int i = 0; i < 64; ++i) batch.push_back(random_scenario(problem.space, rng));
  const auto a = evaluate_batch_serial(problem, batch);
  for (int threads : {1, 2, 4}) {
    omp_set_num_threads(threads);
    const auto b = evaluate_batch_parallel(problem, batch);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) expect_same(a[i], b[i]);
  }
}

TEST(Kernels, LabelsSerialEqualsParallel) {
  const auto problem = small_problem();
  const auto a = label_violations_serial(problem);
  omp_set_num_threads(3);
  EXPECT_EQ(a, label_violations_parallel(problem));
  EXPECT_EQ(a.size(), 108u);
}

TEST(Kernels, SmallRiggedSpaceHasRareViolations) {
  const auto labels = label_violations_serial(small_problem());
  std::size_t violating = 0;
  for (auto v : labels) violating += v;
  EXPECT_GE(violating, 1u);
  EXPECT_LE(violating, 20u);
}

TEST(Kernels, GradientSerialEqualsParallel) {
  Rng rng(5);
  const auto policy = Policy::initialized({{3, 3, 3, 2, 2}, 16, 2}, rng, 0.3);
  std::vector<BatchItem> batch;
  std::uniform_real_distribution<double> u(-0.02, 0.27);
  std::vector<std::size_t> prev(5, 0);
  for (int i = 0; i < 25; ++i) {
    const auto s = sample_action(forward(policy, prev).probs, rng);
    batch.push_back({prev, s.indices, u(rng)});
    prev = s.indices;
  }
  const auto a = policy_gradient_serial(policy, batch, 0.05);
  for (int threads : {1, 2, 4}) {
    omp_set_num_threads(threads);
    EXPECT_EQ(a, policy_gradient_parallel(policy, batch, 0.05));
  }
}

TEST(Kernels, GradientRejectsEmptyBatch) {
  Rng rng(1);
  const auto policy = Policy::initialized({{2}, 2, 1}, rng);
  EXPECT_THROW(policy_gradient_parallel(policy, {}, 0.0), UsageError);
  EXPECT_THROW(policy_gradient_serial(policy, {}, 0.0), UsageError);
}

TEST(Kernels, EvaluateAgreesWithStlAndOutcome) {
  const auto problem = small_problem();
  for (std::uint64_t c = 0; c < problem.space.cardinality(); ++c) {
    const auto e = evaluate(problem, decode(problem.space, unravel(problem.space, c)));
    ASSERT_FALSE(e.faulted);
    EXPECT_EQ(e.stl_satisfied, e.outcome != Outcome::Collision);
    EXPECT_EQ(e.reward.collision_term > 0.0, e.outcome == Outcome::Collision);
  }
}

TEST(Kernels, FaultedEpisodeScoresZero) {
  Problem problem = small_problem();
  problem.world.ego_init_speed = std::numeric_limits<double>::infinity();
  const auto e = evaluate(problem, decode(problem.space, std::vector<std::size_t>(5, 0)));
  EXPECT_TRUE(e.faulted);
  EXPECT_FALSE(e.fault.empty());
  EXPECT_EQ(e.reward.total, 0.0);
}
