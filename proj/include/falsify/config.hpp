#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "falsify/kernels.hpp"
#include "falsify/metrics.hpp"
#include "falsify/param_space.hpp"
#include "falsify/reinforce.hpp"
#include "falsify/reward.hpp"
#include "falsify/sim.hpp"

namespace falsify {

/// Full description of a falsification run.
///
/// On disk this is a JSON document with sections `parameters` (list of
/// {name, dist, params, samples[, integer]}), `world`, `sut`, `rss`, `requirement`,
/// `reward`, `train`, and top-level `seed`, `bins_seed`, `output_dir`, `store_traces`,
/// `report_recent`. Every key is optional except where a section is present and
/// malformed; missing keys take the defaults below. Unknown keys are errors.
struct RunConfig {
  std::vector<ParameterSpec> parameters = reference_specs();
  WorldConfig world;
  SutConfig sut;
  RssParams rss;
  SafetyRequirement requirement;
  RewardConfig reward;
  TrainConfig train;
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> bins_seed;  ///< defaults to `seed`
  std::string output_dir;                  ///< empty: keep results in memory only
  bool store_traces = false;               ///< store every episode's trace, not just the best
  std::size_t report_recent = 14;          ///< distinct scenarios in the recent-scenario overlay

  std::uint64_t effective_bins_seed() const { return bins_seed.value_or(seed); }

  /// Validates every section against its module's invariants.
  void validate() const;

  /// Builds the frozen parameter space and the scoring problem.
  Problem make_problem() const;
};

RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& cfg);

/// Reads and validates a config file; throws ConfigError on any problem.
RunConfig load_config(const std::filesystem::path& path);

}  // namespace falsify
