#include <algorithm>
#include <fstream>
#include <set>

#include "falsify/engine.hpp"
#include "falsify/errors.hpp"

namespace falsify {

namespace fs = std::filesystem;

namespace {

bool any_episode(const EpisodeLog& e) { return !e.eval.faulted; }
bool collision_episode(const EpisodeLog& e) { return !e.eval.faulted && e.eval.outcome == Outcome::Collision; }
bool non_collision_episode(const EpisodeLog& e) { return !e.eval.faulted && e.eval.outcome != Outcome::Collision; }

std::optional<std::size_t> best_episode(const std::vector<EpisodeLog>& episodes, bool (*keep)(const EpisodeLog&)) {
  std::optional<std::size_t> best;
  for (const auto& e : episodes) {
    if (!keep(e)) continue;
    if (!best || e.eval.reward.total > episodes[*best].eval.reward.total) best = e.episode;
  }
  return best;
}

std::string join_indices(const std::vector<std::size_t>& idx) {
  std::string s;
  for (std::size_t i = 0; i < idx.size(); ++i) s += (i ? "-" : "") + std::to_string(idx[i]);
  return s;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string());
  return out;
}

void write_distance_rows(std::ostream& out, const ReportedScenario& s) {
  const auto& steps = s.replay.trace.steps;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    out << s.role << ',' << s.episode << ',' << format_double(steps[i].t) << ',' << format_double(steps[i].dist) << ','
        << int(s.replay.profile.flags[i]) << '\n';
  }
}

}  // namespace

const ReportedScenario* ReportData::find(std::string_view role) const {
  for (const auto& r : roles) {
    if (r.role == role) return &r;
  }
  return nullptr;
}

std::optional<std::size_t> median_episode(const std::vector<EpisodeLog>& episodes, bool (*keep)(const EpisodeLog&)) {
  std::vector<std::size_t> order;
  for (const auto& e : episodes) {
    if (keep(e)) order.push_back(e.episode);
  }
  if (order.empty()) return std::nullopt;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ra = episodes[a].eval.reward.total;
    const double rb = episodes[b].eval.reward.total;
    return ra != rb ? ra < rb : a < b;
  });
  return order[(order.size() - 1) / 2];
}

ReportData build_report(const RunArtifacts& run, std::size_t recent_count) {
  ReportData data;
  for (const auto& e : run.episodes) data.rewards.push_back(e.eval.reward.total);
  data.moving_average = moving_average(data.rewards);

  auto add_role = [&](const char* role, std::optional<std::size_t> episode) {
    if (!episode) return;
    data.roles.push_back({role, *episode, replay(run.problem, run.episodes[*episode].eval.scenario)});
  };
  add_role("best", best_episode(run.episodes, any_episode));
  add_role("median", median_episode(run.episodes, any_episode));
  add_role("best_collision", best_episode(run.episodes, collision_episode));
  add_role("median_non_collision", median_episode(run.episodes, non_collision_episode));

  std::set<std::vector<std::size_t>> seen;
  for (auto it = run.episodes.rbegin(); it != run.episodes.rend() && data.recent.size() < recent_count; ++it) {
    if (it->eval.faulted || !seen.insert(it->eval.scenario.indices).second) continue;
    data.recent.push_back({"recent", it->episode, replay(run.problem, it->eval.scenario)});
  }
  return data;
}

std::vector<fs::path> write_report(const fs::path& run_dir) {
  const RunArtifacts run = load_run(run_dir);
  const ReportData data = build_report(run, run.config.report_recent);

  const fs::path dir = run_dir / "report";
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::vector<fs::path> written;

  {
    const auto path = dir / "reward_per_episode.csv";
    auto out = open_out(path);
    out << "episode,total_reward,moving_average\n";
    for (std::size_t e = 0; e < data.rewards.size(); ++e) {
      out << e << ',' << format_double(data.rewards[e]) << ',' << format_double(data.moving_average[e]) << '\n';
    }
    written.push_back(path);
  }
  {
    const auto path = dir / "distance_best_vs_median.csv";
    auto out = open_out(path);
    out << "role,episode,t,dist,high_risk\n";
    for (const char* role : {"best", "median"}) {
      if (const auto* s = data.find(role)) write_distance_rows(out, *s);
    }
    written.push_back(path);
  }
  {
    const auto path = dir / "second_half_risk.csv";
    auto out = open_out(path);
    out << "role,episode,outcome,high_risk_count,total_steps,second_half_fraction,second_half_pct\n";
    for (const auto& s : data.roles) {
      const auto& p = s.replay.profile;
      out << s.role << ',' << s.episode << ',' << to_string(s.replay.trace.outcome) << ',' << p.high_risk_count << ','
          << p.total_steps << ',' << format_double(p.second_half_fraction) << ','
          << format_double(100.0 * p.second_half_fraction) << '\n';
    }
    written.push_back(path);
  }
  {
    const auto path = dir / "recent_scenarios.csv";
    auto out = open_out(path);
    out << "rank,episode,indices,violated,t,dist\n";
    for (std::size_t r = 0; r < data.recent.size(); ++r) {
      const auto& s = data.recent[r];
      const int violated = s.replay.stl_satisfied ? 0 : 1;
      for (const auto& step : s.replay.trace.steps) {
        out << r << ',' << s.episode << ',' << join_indices(s.replay.scenario.indices) << ',' << violated << ','
            << format_double(step.t) << ',' << format_double(step.dist) << '\n';
      }
    }
    written.push_back(path);
  }
  return written;
}

}  // namespace falsify
