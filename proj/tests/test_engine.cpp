#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "falsify/config.hpp"
#include "falsify/engine.hpp"
#include "falsify/errors.hpp"

using namespace falsify;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class TempDir {
public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("falsify_test_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

RunConfig small_config(std::size_t episodes = 200) {
  RunConfig cfg = load_config(FALSIFY_TEST_DATA "/small_rigged.json");
  cfg.train.total_episodes = episodes;
  return cfg;
}

RunConfig single_bin_config() {
  RunConfig cfg = small_config(60);
  for (auto& p : cfg.parameters) p.sample_count = 1;
  return cfg;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + FALSIFY_CLI + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_json(const fs::path& path, const json& j) {
  std::ofstream(path) << j.dump(2);
  return path;
}

}  // namespace

TEST(Config, DefaultsMatchReferenceTable) {
  const RunConfig cfg;
  EXPECT_EQ(cfg.parameters.size(), 5u);
  EXPECT_EQ(cfg.train.batch_size, 25u);
  EXPECT_EQ(cfg.train.total_episodes, 4000u);
  EXPECT_EQ(cfg.train.hidden, 64u);
  EXPECT_EQ(cfg.requirement.eps_dist, 1.0);
  EXPECT_EQ(cfg.make_problem().space.cardinality(), 100000u);
}

TEST(Config, ReferenceFileLoads) {
  const RunConfig cfg = load_config(FALSIFY_REFERENCE_CONFIG);
  EXPECT_EQ(cfg.make_problem().space.bin_counts(), (std::vector<std::size_t>{10, 10, 25, 4, 10}));
  EXPECT_EQ(cfg.train.alpha, 0.005);
}

TEST(Config, UnknownKeyIsError) {
  json j = json::parse(R"({"train": {"alpha": 0.01, "learning_rate": 0.1}})");
  try {
    config_from_json(j);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("learning_rate"), std::string::npos);
  }
  EXPECT_THROW(config_from_json(json::parse(R"({"colour": 1})")), ConfigError);
}

TEST(Config, WrongTypeIsError) {
  EXPECT_THROW(config_from_json(json::parse(R"({"train": {"alpha": "fast"}})")), ConfigError);
}

TEST(Config, InvalidSectionRejectedBeforeRun) {
  RunConfig cfg = small_config();
  cfg.reward.range_lo = 1.0;
  EXPECT_THROW(run_falsification(cfg), ConfigError);
}

TEST(Config, JsonRoundTrip) {
  RunConfig cfg = small_config(321);
  cfg.seed = 99;
  cfg.train.optimizer = Optimizer::Sgd;
  const RunConfig back = config_from_json(config_to_json(cfg));
  EXPECT_EQ(config_to_json(back), config_to_json(cfg));
  EXPECT_EQ(back.effective_bins_seed(), 12u);
}

TEST(Engine, SingleBinSpaceRepeatsTheOnlyScenario) {
  const auto cfg = single_bin_config();
  const auto r = run_falsification(cfg);
  const auto b = run_random_baseline(cfg);
  ASSERT_EQ(r.episodes.size(), 60u);
  for (const auto& e : r.episodes) EXPECT_EQ(e.eval.scenario, r.episodes[0].eval.scenario);
  EXPECT_EQ(r.summary.best_scenario, r.episodes[0].eval.scenario);
  EXPECT_EQ(r.summary.best_episode, 0u);
  ASSERT_EQ(b.episodes.size(), r.episodes.size());
  for (std::size_t i = 0; i < r.episodes.size(); ++i) {
    EXPECT_EQ(b.episodes[i].eval.reward.total, r.episodes[i].eval.reward.total);
  }
}

TEST(Engine, LogCompleteAndSummarySound) {
  const auto r = run_falsification(small_config(210));
  ASSERT_EQ(r.episodes.size(), 210u);
  std::size_t violating = 0;
  for (std::size_t i = 0; i < r.episodes.size(); ++i) {
    EXPECT_EQ(r.episodes[i].episode, i);
    EXPECT_LE(r.episodes[i].eval.reward.total, r.summary.best_reward);
    violating += r.episodes[i].eval.stl_satisfied ? 0 : 1;
  }
  EXPECT_EQ(violating, r.summary.violating_episodes);
  for (std::size_t i = 0; i < r.summary.best_episode; ++i) {
    EXPECT_LT(r.episodes[i].eval.reward.total, r.summary.best_reward);
  }
  EXPECT_EQ(r.summary.moving_average.size(), 210u);
}

TEST(Engine, ReproducibleEpisodesCsv) {
  TempDir a, b;
  auto cfg = small_config(150);
  cfg.output_dir = a.path() / "run";
  run_falsification(cfg);
  cfg.output_dir = b.path() / "run";
  run_falsification(cfg);
  EXPECT_EQ(slurp(a.path() / "run" / kEpisodesFile), slurp(b.path() / "run" / kEpisodesFile));
  EXPECT_EQ(slurp(a.path() / "run" / kBinsFile), slurp(b.path() / "run" / kBinsFile));
}

TEST(Engine, SeedChangesSequenceNotSchema) {
  TempDir a, b;
  auto cfg = small_config(100);
  cfg.output_dir = a.path();
  run_random_baseline(cfg);
  cfg.seed = 2;
  cfg.output_dir = b.path();
  run_random_baseline(cfg);
  const auto ea = slurp(a.path() / kEpisodesFile), eb = slurp(b.path() / kEpisodesFile);
  EXPECT_NE(ea, eb);
  EXPECT_EQ(ea.substr(0, ea.find('\n')), eb.substr(0, eb.find('\n')));
  const auto sa = json::parse(slurp(a.path() / kSummaryFile));
  const auto sb = json::parse(slurp(b.path() / kSummaryFile));
  std::set<std::string> ka, kb;
  for (auto& [k, v] : sa.items()) ka.insert(k);
  for (auto& [k, v] : sb.items()) kb.insert(k);
  EXPECT_EQ(ka, kb);
}

TEST(Engine, RunDirectoryLayout) {
  TempDir dir;
  auto cfg = small_config(100);
  cfg.output_dir = dir.path();
  cfg.train.checkpoint_every = 2;
  const auto r = run_falsification(cfg);
  for (const char* f : {kConfigSnapshot, kBinsFile, kEpisodesFile, kSummaryFile}) {
    EXPECT_TRUE(fs::exists(dir.path() / f)) << f;
  }
  EXPECT_TRUE(fs::exists(dir.path() / kCheckpointDir / "update_000002.ckpt"));
  EXPECT_TRUE(fs::exists(dir.path() / kCheckpointDir / "final.ckpt"));
  EXPECT_TRUE(fs::exists(trace_path(dir.path(), r.summary.best_episode)));

  std::ifstream ckpt(dir.path() / kCheckpointDir / "final.ckpt");
  const auto problem = cfg.make_problem();
  const Policy loaded = load_checkpoint(ckpt, problem.space.fingerprint());
  ASSERT_TRUE(r.policy.has_value());
  EXPECT_TRUE(std::equal(loaded.params().begin(), loaded.params().end(), r.policy->params().begin()));
}

TEST(Engine, StoreTracesWritesEveryEpisode) {
  TempDir dir;
  auto cfg = small_config(30);
  cfg.output_dir = dir.path();
  cfg.store_traces = true;
  run_random_baseline(cfg);
  for (std::size_t e = 0; e < 30; ++e) EXPECT_TRUE(fs::exists(trace_path(dir.path(), e))) << e;
}

TEST(Engine, UnwritableOutputIsIoError) {
  TempDir dir;
  const fs::path blocker = dir.path() / "file";
  std::ofstream(blocker) << "x";
  auto cfg = small_config(10);
  cfg.output_dir = blocker / "run";
  EXPECT_THROW(run_falsification(cfg), IoError);
}

TEST(Engine, BaselineViolationRateMatchesCellCount) {
  auto cfg = small_config(2000);
  const auto labels = label_violations_serial(cfg.make_problem());
  double p = 0.0;
  for (auto v : labels) p += v;
  p /= static_cast<double>(labels.size());
  const auto r = run_random_baseline(cfg);
  const double n = static_cast<double>(r.episodes.size());
  const double sigma = std::sqrt(n * p * (1.0 - p));
  EXPECT_NEAR(static_cast<double>(r.summary.violating_episodes), n * p, 3.0 * sigma);
}

TEST(Replay, BestEpisodeReproducesLoggedReward) {
  TempDir dir;
  auto cfg = small_config(150);
  cfg.output_dir = dir.path();
  const auto r = run_falsification(cfg);
  const auto rep = replay_episode(dir.path(), r.summary.best_episode);
  EXPECT_EQ(rep.reward.total, r.summary.best_reward);
  const auto logged = load_run(dir.path());
  EXPECT_EQ(logged.episodes[r.summary.best_episode].eval.reward.total, r.summary.best_reward);
}

TEST(Replay, CollisionStaysCollision) {
  TempDir dir;
  auto cfg = small_config(400);
  cfg.output_dir = dir.path();
  const auto r = run_falsification(cfg);
  std::size_t checked = 0;
  for (const auto& e : r.episodes) {
    if (e.eval.outcome != Outcome::Collision || checked >= 5) continue;
    EXPECT_EQ(replay_episode(dir.path(), e.episode).trace.outcome, Outcome::Collision);
    ++checked;
  }
  EXPECT_GT(checked, 0u);
}

TEST(Replay, TraceMatchesStoredArtifactBytes) {
  TempDir dir;
  auto cfg = small_config(50);
  cfg.output_dir = dir.path();
  cfg.store_traces = true;
  run_falsification(cfg);
  const auto run = load_run(dir.path());
  for (std::size_t e : {0u, 17u, 49u}) {
    std::ostringstream out;
    write_annotated_trace(out, replay_episode(dir.path(), e).trace, run.problem.rss);
    EXPECT_EQ(out.str(), slurp(trace_path(dir.path(), e))) << e;
  }
}

TEST(Replay, DoubledEpsilonKeepsRiskFlags) {
  const auto problem = small_config().make_problem();
  Problem wide = problem;
  wide.requirement.eps_dist *= 2.0;
  for (std::uint64_t c = 0; c < problem.space.cardinality(); c += 7) {
    const auto s = decode(problem.space, unravel(problem.space, c));
    const auto a = replay(problem, s);
    const auto b = replay(wide, s);
    const std::size_t common = std::min(a.profile.flags.size(), b.profile.flags.size());
    for (std::size_t i = 0; i < common; ++i) EXPECT_EQ(a.profile.flags[i], b.profile.flags[i]);
    if (!a.stl_satisfied) EXPECT_FALSE(b.stl_satisfied);
  }
}

TEST(Replay, ScenarioFileByIndicesAndValues) {
  TempDir dir;
  const auto problem = small_config().make_problem();
  const auto expected = decode(problem.space, std::vector<std::size_t>{1, 0, 2, 1, 0});
  const auto by_idx = write_json(dir.path() / "a.json", json{{"indices", expected.indices}});
  const auto by_val = write_json(dir.path() / "b.json", json{{"values", expected.values}});
  EXPECT_EQ(load_scenario_file(by_idx, problem.space), expected);
  EXPECT_EQ(load_scenario_file(by_val, problem.space), expected);
  const auto bad = write_json(dir.path() / "c.json", json{{"indices", {1, 0, 2}}});
  EXPECT_THROW(load_scenario_file(bad, problem.space), ValidationError);
  const auto oob = write_json(dir.path() / "d.json", json{{"indices", {9, 0, 0, 0, 0}}});
  EXPECT_THROW(load_scenario_file(oob, problem.space), ValidationError);
}

TEST(Report, MovingAverageWindow) {
  std::vector<double> v(250);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
  const auto ma = moving_average(v);
  EXPECT_EQ(ma[0], 0.0);
  EXPECT_EQ(ma[9], 4.5);
  EXPECT_EQ(ma[99], 49.5);
  EXPECT_EQ(ma[100], 50.5);
  EXPECT_EQ(ma[249], 199.5);
}

TEST(Report, ConvergenceEpisode) {
  std::vector<double> ma(100, 0.0);
  for (std::size_t i = 40; i < 100; ++i) ma[i] = 0.25;
  ma[60] = 0.245;
  EXPECT_EQ(convergence_episode(ma, 0.01), 40u);
  EXPECT_EQ(convergence_episode(ma, 0.001), 61u);
}

TEST(Report, MedianEpisodeIsLowerMedian) {
  std::vector<EpisodeLog> eps(4);
  const double rewards[] = {0.3, -0.1, 0.2, 0.2};
  for (std::size_t i = 0; i < 4; ++i) {
    eps[i].episode = i;
    eps[i].eval.reward.total = rewards[i];
  }
  EXPECT_EQ(median_episode(eps, [](const EpisodeLog&) { return true; }), 2u);
  EXPECT_EQ(median_episode(eps, [](const EpisodeLog&) { return false; }), std::nullopt);
}

TEST(Report, BundleFromRiggedRun) {
  TempDir dir;
  auto cfg = small_config(600);
  cfg.output_dir = dir.path();
  run_falsification(cfg);
  const auto files = write_report(dir.path());
  EXPECT_EQ(files.size(), 4u);
  for (const auto& f : files) EXPECT_TRUE(fs::exists(f)) << f;

  const auto data = build_report(load_run(dir.path()), 14);
  const auto* best = data.find("best");
  const auto* median = data.find("median");
  ASSERT_TRUE(best && median);
  EXPECT_GT(best->replay.profile.second_half_fraction, median->replay.profile.second_half_fraction);
  EXPECT_LE(data.recent.size(), 14u);
  std::set<std::vector<std::size_t>> distinct;
  for (const auto& s : data.recent) distinct.insert(s.replay.scenario.indices);
  EXPECT_EQ(distinct.size(), data.recent.size());
}

TEST(Report, ZeroViolationRunStillProducesBundle) {
  TempDir dir;
  auto cfg = small_config(50);
  cfg.sut = SutConfig{};
  cfg.sut.brake_decel = 9.0;
  cfg.output_dir = dir.path();
  const auto r = run_random_baseline(cfg);
  ASSERT_EQ(r.summary.violating_episodes, 0u);
  write_report(dir.path());
  std::ifstream in(dir.path() / "report" / "recent_scenarios.csv");
  std::string line;
  std::getline(in, line);
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    ASSERT_EQ(cells.size(), 6u);
    EXPECT_EQ(cells[3], "0");
    ++rows;
  }
  EXPECT_GT(rows, 0u);
}

TEST(Report, MissingArtifactNamed) {
  TempDir dir;
  auto cfg = small_config(20);
  cfg.output_dir = dir.path();
  run_random_baseline(cfg);
  fs::remove(dir.path() / kBinsFile);
  try {
    write_report(dir.path());
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find(kBinsFile), std::string::npos);
  }
}

TEST(Cli, ExitCodes) {
  TempDir dir;
  const std::string data = FALSIFY_TEST_DATA;
  const std::string run_dir = (dir.path() / "run").string();
  EXPECT_EQ(run_cli("run --config " + data + "/small_rigged.json --episodes 50 --out " + run_dir), 0);
  EXPECT_EQ(run_cli("report --run " + run_dir), 0);
  EXPECT_EQ(run_cli("replay --run " + run_dir + " --episode 3 --out " + (dir.path() / "t.csv").string()), 0);
  EXPECT_EQ(run_cli("baseline --config " + data + "/small_rigged.json --episodes 50 --out " +
                    (dir.path() / "base").string()),
            0);

  const auto bad = write_json(dir.path() / "bad.json", json{{"train", {{"alpha", -1.0}}}});
  EXPECT_EQ(run_cli("run --config " + bad.string() + " --out " + (dir.path() / "x").string()), 1);
  const auto unknown = write_json(dir.path() / "unknown.json", json{{"sut", {{"laser", true}}}});
  EXPECT_EQ(run_cli("run --config " + unknown.string()), 1);
  EXPECT_EQ(run_cli("run"), 1);
  EXPECT_EQ(run_cli("replay --run " + run_dir + " --episode 999999"), 1);

  EXPECT_EQ(run_cli("report --run " + (dir.path() / "missing").string()), 2);
  const fs::path blocker = dir.path() / "blocker";
  std::ofstream(blocker) << "x";
  EXPECT_EQ(run_cli("run --config " + data + "/small_rigged.json --episodes 10 --out " + (blocker / "r").string()), 2);
}
