// Command-line front end: run, baseline, replay, report, enumerate.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "falsify/engine.hpp"
#include "falsify/errors.hpp"

namespace {

namespace fs = std::filesystem;
using namespace falsify;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct RunArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::size_t> episodes;
};

RunConfig resolve(const RunArgs& args) {
  RunConfig cfg = load_config(args.config);
  if (args.seed) cfg.seed = *args.seed;
  if (!args.out.empty()) cfg.output_dir = args.out;
  if (args.episodes) cfg.train.total_episodes = *args.episodes;
  if (cfg.output_dir.empty()) cfg.output_dir = "runs/seed_" + std::to_string(cfg.seed);
  cfg.validate();
  return cfg;
}

void print_summary(const RunSummary& s, const std::string& dir) {
  std::cout << "method            " << s.method << '\n'
            << "episodes          " << s.total_episodes << '\n'
            << "violating         " << s.violating_episodes << '\n'
            << "best episode      " << s.best_episode << " (reward " << format_double(s.best_reward) << ")\n"
            << "convergence       "
            << (s.convergence_episode ? std::to_string(*s.convergence_episode) : std::string("-")) << '\n'
            << "wall time [s]     " << s.wall_time_s << '\n'
            << "run directory     " << dir << '\n';
}

void emit_replay(const ReplayResult& r, const RssParams& rss, const std::string& out_path) {
  if (out_path.empty()) {
    write_annotated_trace(std::cout, r.trace, rss);
  } else {
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + out_path);
    write_annotated_trace(out, r.trace, rss);
  }
  std::cerr << "outcome " << to_string(r.trace.outcome) << ", final_dist " << format_double(r.trace.final_dist)
            << ", high_risk " << r.profile.high_risk_count << '/' << r.profile.total_steps << ", reward "
            << format_double(r.reward.total) << ", stl " << (r.stl_satisfied ? "satisfied" : "violated") << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Policy-gradient falsification of an emergency-braking stand-in at a pedestrian crossing"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "REINFORCE search for requirement-violating scenarios");
  run->add_option("--config", run_args.config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", run_args.seed, "Root seed");
  run->add_option("--out", run_args.out, "Run directory");
  run->add_option("--episodes", run_args.episodes, "Total episodes");

  RunArgs base_args;
  auto* baseline = app.add_subcommand("baseline", "Uniform random search with the same logging");
  baseline->add_option("--config", base_args.config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  baseline->add_option("--seed", base_args.seed, "Root seed");
  baseline->add_option("--out", base_args.out, "Run directory");
  baseline->add_option("--episodes", base_args.episodes, "Total episodes");

  std::string replay_run, replay_scenario, replay_config, replay_out;
  std::size_t replay_ep = 0;
  auto* rep = app.add_subcommand("replay", "Re-simulate one scenario and print its annotated trace");
  auto* opt_run = rep->add_option("--run", replay_run, "Run directory");
  auto* opt_ep = rep->add_option("--episode", replay_ep, "Episode index within the run");
  auto* opt_scn = rep->add_option("--scenario", replay_scenario, "Scenario file (JSON indices or values)");
  auto* opt_cfg = rep->add_option("--config", replay_config, "Run configuration for --scenario");
  rep->add_option("--out", replay_out, "Write the trace CSV here instead of stdout");
  opt_run->needs(opt_ep)->excludes(opt_scn);
  opt_scn->needs(opt_cfg);

  std::string report_run;
  auto* report = app.add_subcommand("report", "Export the CSV report bundle of a run");
  report->add_option("--run", report_run, "Run directory")->required();

  std::string enum_config;
  auto* enumerate = app.add_subcommand("enumerate", "Label every cell of the space by brute force");
  enumerate->add_option("--config", enum_config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) {
      const auto cfg = resolve(run_args);
      print_summary(run_falsification(cfg).summary, cfg.output_dir);
    } else if (*baseline) {
      const auto cfg = resolve(base_args);
      print_summary(run_random_baseline(cfg).summary, cfg.output_dir);
    } else if (*rep) {
      if (!replay_run.empty()) {
        const auto artifacts = load_run(replay_run);
        emit_replay(replay_episode(replay_run, replay_ep), artifacts.problem.rss, replay_out);
      } else if (!replay_scenario.empty()) {
        const auto cfg = load_config(replay_config);
        const auto problem = cfg.make_problem();
        emit_replay(replay(problem, load_scenario_file(replay_scenario, problem.space)), problem.rss, replay_out);
      } else {
        throw UsageError("replay needs --run/--episode or --scenario/--config");
      }
    } else if (*report) {
      for (const auto& p : write_report(report_run)) std::cout << p.string() << '\n';
    } else if (*enumerate) {
      const auto problem = load_config(enum_config).make_problem();
      const auto labels = label_violations_parallel(problem);
      std::size_t violating = 0;
      std::cout << "cell,indices,violating\n";
      for (std::uint64_t c = 0; c < labels.size(); ++c) {
        violating += labels[c];
        const auto idx = unravel(problem.space, c);
        std::cout << c << ',';
        for (std::size_t k = 0; k < idx.size(); ++k) std::cout << (k ? "-" : "") << idx[k];
        std::cout << ',' << int(labels[c]) << '\n';
      }
      std::cerr << violating << " of " << labels.size() << " cells violate the requirement\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}
