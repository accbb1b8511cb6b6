#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "falsify/config.hpp"
#include "falsify/kernels.hpp"
#include "falsify/policy.hpp"

namespace falsify {

/// Window of the reward moving average used for reporting and early stopping.
inline constexpr std::size_t kMovingAverageWindow = 100;

struct EpisodeLog {
  std::size_t episode = 0;
  EpisodeEval eval;
};

struct RunSummary {
  std::string method;  ///< "reinforce" or "random"
  std::size_t total_episodes = 0;
  std::size_t best_episode = 0;
  ConcreteScenario best_scenario;
  double best_reward = 0.0;
  std::size_t violating_episodes = 0;
  std::vector<double> moving_average;
  std::optional<std::size_t> convergence_episode;
  std::vector<std::size_t> final_modal_action;  ///< reinforce only
  double wall_time_s = 0.0;
};

struct RunResult {
  RunSummary summary;
  std::vector<EpisodeLog> episodes;
  std::optional<Policy> policy;
};

/// Trailing mean over min(e + 1, window) points for every episode e.
std::vector<double> moving_average(const std::vector<double>& values, std::size_t window = kMovingAverageWindow);

/// First episode after which the moving average stays within `tolerance` of its final value.
std::optional<std::size_t> convergence_episode(const std::vector<double>& ma, double tolerance = 0.01);

/// Policy-gradient search. Writes the run directory when `config.output_dir` is set.
RunResult run_falsification(const RunConfig& config);

/// Same loop and log schema with uniform random scenarios and no learning.
RunResult run_random_baseline(const RunConfig& config);

// Run directory artifacts.

inline constexpr const char* kConfigSnapshot = "config.snapshot";
inline constexpr const char* kBinsFile = "bins.csv";
inline constexpr const char* kEpisodesFile = "episodes.csv";
inline constexpr const char* kSummaryFile = "summary.json";
inline constexpr const char* kCheckpointDir = "checkpoints";
inline constexpr const char* kTraceDir = "traces";

void write_episodes_header(std::ostream& out, std::size_t num_params);
void write_episode_row(std::ostream& out, const EpisodeLog& log);
void write_bins_csv(std::ostream& out, const ParameterSpace& space);

/// Trace CSV with two derived columns: the RSS safe distance and the high-risk flag.
void write_annotated_trace(std::ostream& out, const Trace& trace, const RssParams& rss);

std::filesystem::path trace_path(const std::filesystem::path& run_dir, std::size_t episode);

/// A logged run read back from its directory.
struct RunArtifacts {
  RunConfig config;
  Problem problem;
  std::vector<EpisodeLog> episodes;
};

/// Loads config snapshot, bins and episodes; throws IoError naming any missing file.
RunArtifacts load_run(const std::filesystem::path& run_dir);

struct ReplayResult {
  ConcreteScenario scenario;
  Trace trace;
  RiskProfile profile;
  RewardBreakdown reward;
  bool stl_satisfied = true;
};

ReplayResult replay(const Problem& problem, const ConcreteScenario& scenario);
ReplayResult replay_episode(const std::filesystem::path& run_dir, std::size_t episode);

/// Scenario file: JSON with either "indices" or "values", one entry per parameter.
ConcreteScenario load_scenario_file(const std::filesystem::path& path, const ParameterSpace& space);

/// A logged scenario re-simulated for reporting.
struct ReportedScenario {
  std::string role;
  std::size_t episode = 0;
  ReplayResult replay;
};

struct ReportData {
  std::vector<double> rewards;
  std::vector<double> moving_average;
  /// "best", "median", and when present "best_collision" and "median_non_collision".
  std::vector<ReportedScenario> roles;
  /// Most recent distinct index vectors, newest first.
  std::vector<ReportedScenario> recent;

  const ReportedScenario* find(std::string_view role) const;
};

/// Median by total reward (ties by episode index, lower median); nullopt when empty.
std::optional<std::size_t> median_episode(const std::vector<EpisodeLog>& episodes, bool (*keep)(const EpisodeLog&));

ReportData build_report(const RunArtifacts& run, std::size_t recent_count);

/// Writes the report bundle into run_dir/report and returns the files written.
std::vector<std::filesystem::path> write_report(const std::filesystem::path& run_dir);

}  // namespace falsify
