#include "falsify/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "falsify/errors.hpp"

namespace falsify {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::size_t kEarlyStopSpan = 500;
constexpr double kEarlyStopDelta = 1e-4;

/// Single writer for everything a run puts on disk.
class RunWriter {
public:
  RunWriter(const RunConfig& cfg, const Problem& problem) : cfg_(cfg), problem_(problem) {
    if (cfg.output_dir.empty()) return;
    dir_ = cfg.output_dir;
    std::error_code ec;
    fs::create_directories(dir_ / kCheckpointDir, ec);
    fs::create_directories(dir_ / kTraceDir, ec);
    if (ec) throw IoError("cannot create run directory " + dir_.string() + ": " + ec.message());

    write_file(kConfigSnapshot, [&](std::ostream& out) { out << config_to_json(cfg).dump(2) << '\n'; });
    write_file(kBinsFile, [&](std::ostream& out) { write_bins_csv(out, problem.space); });
    episodes_.open(dir_ / kEpisodesFile, std::ios::binary | std::ios::trunc);
    if (!episodes_) throw IoError("cannot open " + (dir_ / kEpisodesFile).string());
    write_episodes_header(episodes_, problem.space.size());
  }

  bool enabled() const { return !dir_.empty(); }

  void episode(const EpisodeLog& log) {
    if (!enabled()) return;
    write_episode_row(episodes_, log);
    if (cfg_.store_traces && !log.eval.faulted) store_trace(log);
    if (!episodes_) throw IoError("failed writing " + (dir_ / kEpisodesFile).string());
  }

  void flush() {
    if (enabled()) episodes_.flush();
  }

  void checkpoint(const Policy& policy, const std::string& name) {
    if (!enabled()) return;
    write_file(fs::path(kCheckpointDir) / name,
               [&](std::ostream& out) { save_checkpoint(out, policy, problem_.space.fingerprint()); });
  }

  void store_trace(const EpisodeLog& log) {
    if (!enabled()) return;
    const Trace trace = problem_.simulate(log.eval.scenario);
    write_file(fs::relative(trace_path(dir_, log.episode), dir_),
               [&](std::ostream& out) { write_annotated_trace(out, trace, problem_.rss); });
  }

  void summary(const RunSummary& s) {
    if (!enabled()) return;
    json j;
    j["method"] = s.method;
    j["total_episodes"] = s.total_episodes;
    j["best_episode"] = s.best_episode;
    j["best_indices"] = s.best_scenario.indices;
    j["best_values"] = s.best_scenario.values;
    j["best_reward"] = s.best_reward;
    j["violating_episodes"] = s.violating_episodes;
    j["convergence_episode"] = s.convergence_episode ? json(*s.convergence_episode) : json(nullptr);
    if (!s.final_modal_action.empty()) j["final_modal_action"] = s.final_modal_action;
    j["moving_average_window"] = kMovingAverageWindow;
    j["moving_average"] = s.moving_average;
    j["wall_time_s"] = s.wall_time_s;
    j["threads"] = max_threads();
    write_file(kSummaryFile, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
  }

private:
  template <typename Fn>
  void write_file(const fs::path& rel, Fn&& fn) {
    const fs::path path = dir_ / rel;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string());
    fn(out);
    out.flush();
    if (!out) throw IoError("failed writing " + path.string());
  }

  const RunConfig& cfg_;
  const Problem& problem_;
  fs::path dir_;
  std::ofstream episodes_;
};

/// Shared bookkeeping of both search methods.
class RunLoop {
public:
  RunLoop(const RunConfig& cfg, const Problem& problem, std::string method)
      : cfg_(cfg), writer_(cfg, problem), start_(std::chrono::steady_clock::now()) {
    result_.summary.method = std::move(method);
    result_.episodes.reserve(cfg.train.total_episodes);
  }

  std::size_t done() const { return result_.episodes.size(); }
  std::size_t remaining() const { return cfg_.train.total_episodes - done(); }
  RunWriter& writer() { return writer_; }

  void record(std::vector<EpisodeEval>&& evals) {
    for (auto& e : evals) {
      EpisodeLog log{done(), std::move(e)};
      rewards_.push_back(log.eval.reward.total);
      writer_.episode(log);
      result_.episodes.push_back(std::move(log));
    }
  }

  /// Early-stop test: moving average flat to within 1e-4 over the last 500 episodes.
  bool plateaued() const {
    if (!cfg_.train.early_stop || rewards_.size() < kEarlyStopSpan + kMovingAverageWindow) return false;
    const auto ma = moving_average(rewards_);
    return std::abs(ma.back() - ma[ma.size() - 1 - kEarlyStopSpan]) < kEarlyStopDelta;
  }

  RunResult finish() {
    auto& s = result_.summary;
    s.total_episodes = done();
    s.moving_average = moving_average(rewards_);
    s.convergence_episode = convergence_episode(s.moving_average);
    bool have_best = false;
    for (const auto& log : result_.episodes) {
      if (!log.eval.stl_satisfied) ++s.violating_episodes;
      if (log.eval.faulted) continue;
      if (!have_best || log.eval.reward.total > s.best_reward) {
        have_best = true;
        s.best_reward = log.eval.reward.total;
        s.best_episode = log.episode;
        s.best_scenario = log.eval.scenario;
      }
    }
    writer_.flush();
    if (have_best) writer_.store_trace(result_.episodes[s.best_episode]);
    s.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    writer_.summary(s);
    return std::move(result_);
  }

  RunResult& result() { return result_; }

private:
  const RunConfig& cfg_;
  RunWriter writer_;
  RunResult result_;
  std::vector<double> rewards_;
  std::chrono::steady_clock::time_point start_;
};

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("cannot parse " + what + " '" + s + "'");
  }
}

std::size_t parse_size(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw ValidationError("cannot parse " + what + " '" + s + "'");
  }
}

}  // namespace

std::vector<double> moving_average(const std::vector<double>& values, std::size_t window) {
  std::vector<double> ma(values.size());
  for (std::size_t e = 0; e < values.size(); ++e) {
    const std::size_t count = std::min(e + 1, window);
    double sum = 0.0;
    for (std::size_t i = e + 1 - count; i <= e; ++i) sum += values[i];
    ma[e] = sum / static_cast<double>(count);
  }
  return ma;
}

std::optional<std::size_t> convergence_episode(const std::vector<double>& ma, double tolerance) {
  if (ma.empty()) return std::nullopt;
  const double final_value = ma.back();
  std::size_t e = ma.size();
  while (e > 0 && std::abs(ma[e - 1] - final_value) <= tolerance) --e;
  return e;
}

RunResult run_falsification(const RunConfig& config) {
  const Problem problem = config.make_problem();
  const auto& tc = config.train;

  Rng init_rng = make_rng(config.seed, Stream::Init);
  Policy policy = Policy::initialized({problem.space.bin_counts(), tc.hidden, tc.layers}, init_rng, tc.init_scale);
  Reinforce trainer(tc);
  Rng policy_rng = make_rng(config.seed, Stream::Policy);

  RunLoop loop(config, problem, "reinforce");
  std::vector<std::size_t> prev(problem.space.size(), 0);

  while (loop.remaining() > 0) {
    const std::size_t n = std::min(tc.batch_size, loop.remaining());
    std::vector<BatchItem> batch;
    std::vector<ConcreteScenario> scenarios;
    batch.reserve(n);
    scenarios.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto pass = forward(policy, prev);
      auto sample = sample_action(pass.probs, policy_rng);
      scenarios.push_back(decode(problem.space, sample.indices));
      batch.push_back({prev, sample.indices, 0.0});
      prev = std::move(sample.indices);
    }

    auto evals = evaluate_batch_parallel(problem, scenarios);
    for (std::size_t i = 0; i < n; ++i) batch[i].ret = evals[i].reward.total;
    loop.record(std::move(evals));

    const auto grad = policy_gradient_parallel(policy, batch, trainer.effective_baseline());
    trainer.apply(policy, grad, batch);

    if (tc.checkpoint_every > 0 && trainer.updates() % tc.checkpoint_every == 0) {
      std::ostringstream name;
      name << "update_" << std::setw(6) << std::setfill('0') << trainer.updates() << ".ckpt";
      loop.writer().checkpoint(policy, name.str());
    }
    if (loop.plateaued()) break;
  }

  loop.writer().checkpoint(policy, "final.ckpt");
  loop.result().summary.final_modal_action = modal_action(forward(policy, prev));
  loop.result().policy = std::move(policy);
  return loop.finish();
}

RunResult run_random_baseline(const RunConfig& config) {
  const Problem problem = config.make_problem();
  Rng rng = make_rng(config.seed, Stream::Baseline);
  RunLoop loop(config, problem, "random");
  while (loop.remaining() > 0) {
    const std::size_t n = std::min(config.train.batch_size, loop.remaining());
    std::vector<ConcreteScenario> scenarios;
    scenarios.reserve(n);
    for (std::size_t i = 0; i < n; ++i) scenarios.push_back(random_scenario(problem.space, rng));
    loop.record(evaluate_batch_parallel(problem, scenarios));
  }
  return loop.finish();
}

void write_episodes_header(std::ostream& out, std::size_t num_params) {
  out << "episode";
  for (std::size_t k = 0; k < num_params; ++k) out << ",idx_" << k;
  for (std::size_t k = 0; k < num_params; ++k) out << ",val_" << k;
  out << ",outcome,final_dist,high_risk_count,total_steps,second_half_fraction,risk_term,distance_term,"
         "collision_term,total_reward,stl_satisfied\n";
}

void write_episode_row(std::ostream& out, const EpisodeLog& log) {
  const auto& e = log.eval;
  out << log.episode;
  for (auto i : e.scenario.indices) out << ',' << i;
  for (double v : e.scenario.values) out << ',' << format_double(v);
  out << ',' << (e.faulted ? std::string_view("Fault") : to_string(e.outcome)) << ',' << format_double(e.final_dist)
      << ',' << e.high_risk_count << ',' << e.total_steps << ',' << format_double(e.second_half_fraction) << ','
      << format_double(e.reward.risk_term) << ',' << format_double(e.reward.distance_term) << ','
      << format_double(e.reward.collision_term) << ',' << format_double(e.reward.total) << ','
      << (e.stl_satisfied ? 1 : 0) << '\n';
}

void write_bins_csv(std::ostream& out, const ParameterSpace& space) {
  out << "parameter,index,value\n";
  for (std::size_t k = 0; k < space.size(); ++k) {
    const auto& bins = space.bins(k);
    for (std::size_t i = 0; i < bins.size(); ++i) {
      out << space.spec(k).name << ',' << i << ',' << format_double(bins[i]) << '\n';
    }
  }
}

void write_annotated_trace(std::ostream& out, const Trace& trace, const RssParams& rss) {
  const RiskProfile profile = classify_timesteps(trace, rss);
  out << "t,ego_x,ego_speed,ped_x,ped_y,dist,detected,braking,rss_dmin,high_risk\n";
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& s = trace.steps[i];
    out << format_double(s.t) << ',' << format_double(s.ego_x) << ',' << format_double(s.ego_speed) << ','
        << format_double(s.ped_x) << ',' << format_double(s.ped_y) << ',' << format_double(s.dist) << ','
        << (s.detected ? 1 : 0) << ',' << (s.braking ? 1 : 0) << ','
        << format_double(rss_min_distance(s.ego_speed, 0.0, rss)) << ',' << int(profile.flags[i]) << '\n';
  }
}

fs::path trace_path(const fs::path& run_dir, std::size_t episode) {
  std::ostringstream name;
  name << "episode_" << std::setw(6) << std::setfill('0') << episode << ".csv";
  return run_dir / kTraceDir / name.str();
}

RunArtifacts load_run(const fs::path& run_dir) {
  for (const char* f : {kConfigSnapshot, kBinsFile, kEpisodesFile}) {
    if (!fs::exists(run_dir / f)) throw IoError("run directory is missing " + (run_dir / f).string());
  }
  RunConfig cfg = load_config(run_dir / kConfigSnapshot);

  // Bins are read back rather than regenerated so a run stays replayable across library versions.
  std::ifstream bins_in(run_dir / kBinsFile);
  std::string line;
  std::getline(bins_in, line);
  std::vector<std::vector<double>> bins(cfg.parameters.size());
  while (std::getline(bins_in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 3) throw ValidationError("malformed bins.csv line '" + line + "'");
    std::size_t k = 0;
    while (k < cfg.parameters.size() && cfg.parameters[k].name != cells[0]) ++k;
    if (k == cfg.parameters.size()) throw ValidationError("bins.csv names unknown parameter '" + cells[0] + "'");
    if (parse_size(cells[1], "bin index") != bins[k].size()) throw ValidationError("bins.csv indices out of order");
    bins[k].push_back(parse_double(cells[2], "bin value"));
  }
  Problem problem{ParameterSpace::from_bins(cfg.parameters, std::move(bins), cfg.effective_bins_seed()),
                  cfg.world, cfg.sut, cfg.requirement, cfg.rss, cfg.reward};
  problem.validate();

  const std::size_t n = problem.space.size();
  std::vector<EpisodeLog> episodes;
  std::ifstream ep_in(run_dir / kEpisodesFile);
  std::getline(ep_in, line);
  while (std::getline(ep_in, line)) {
    if (line.empty()) continue;
    const auto c = split_csv(line);
    if (c.size() != 1 + 2 * n + 10) throw ValidationError("malformed episodes.csv line '" + line + "'");
    EpisodeLog log;
    log.episode = parse_size(c[0], "episode");
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < n; ++k) idx.push_back(parse_size(c[1 + k], "index"));
    log.eval.scenario = decode(problem.space, idx);
    std::size_t p = 1 + 2 * n;
    if (c[p] == "Fault") {
      log.eval.faulted = true;
    } else {
      log.eval.outcome = outcome_from_string(c[p]);
    }
    log.eval.final_dist = parse_double(c[p + 1], "final_dist");
    log.eval.high_risk_count = parse_size(c[p + 2], "high_risk_count");
    log.eval.total_steps = parse_size(c[p + 3], "total_steps");
    log.eval.second_half_fraction = parse_double(c[p + 4], "second_half_fraction");
    log.eval.reward.risk_term = parse_double(c[p + 5], "risk_term");
    log.eval.reward.distance_term = parse_double(c[p + 6], "distance_term");
    log.eval.reward.collision_term = parse_double(c[p + 7], "collision_term");
    log.eval.reward.total = parse_double(c[p + 8], "total_reward");
    log.eval.stl_satisfied = c[p + 9] == "1";
    if (log.episode != episodes.size()) throw ValidationError("episodes.csv indices are not contiguous");
    episodes.push_back(std::move(log));
  }
  return {std::move(cfg), std::move(problem), std::move(episodes)};
}

ReplayResult replay(const Problem& problem, const ConcreteScenario& scenario) {
  ReplayResult r;
  r.scenario = scenario;
  r.trace = problem.simulate(scenario);
  r.profile = classify_timesteps(r.trace, problem.rss);
  r.reward = total_reward(r.trace, r.profile, problem.reward);
  r.stl_satisfied = stl_satisfied(r.trace, problem.requirement);
  return r;
}

ReplayResult replay_episode(const fs::path& run_dir, std::size_t episode) {
  const auto run = load_run(run_dir);
  if (episode >= run.episodes.size()) {
    throw ValidationError("run has " + std::to_string(run.episodes.size()) + " episodes; no episode " +
                          std::to_string(episode));
  }
  return replay(run.problem, run.episodes[episode].eval.scenario);
}

ConcreteScenario load_scenario_file(const fs::path& path, const ParameterSpace& space) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("scenario file is not valid JSON: " + std::string(e.what()));
  }
  try {
    if (j.contains("indices")) {
      const auto idx = j.at("indices").get<std::vector<std::size_t>>();
      if (idx.size() != space.size()) throw ValidationError("scenario has " + std::to_string(idx.size()) +
                                                            " indices, space has " + std::to_string(space.size()));
      return decode(space, idx);
    }
    if (j.contains("values")) {
      const auto values = j.at("values").get<std::vector<double>>();
      return decode(space, encode(space, values));
    }
  } catch (const json::exception& e) {
    throw ValidationError("malformed scenario file: " + std::string(e.what()));
  } catch (const BoundsError& e) {
    throw ValidationError(e.what());
  }
  throw ValidationError("scenario file needs \"indices\" or \"values\"");
}

}  // namespace falsify
