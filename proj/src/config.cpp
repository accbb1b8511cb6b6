#include "falsify/config.hpp"

#include <fstream>
#include <set>

#include "falsify/errors.hpp"

namespace falsify {

using nlohmann::json;

namespace {

/// Reads typed keys from one JSON object and rejects anything it was not asked about.
class Section {
public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError("section '" + name_ + "' must be an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      throw ConfigError(name_ + "." + key + " has the wrong type");
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown key '" + key + "' in section '" + name_ + "'");
    }
  }

private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

ParameterSpec spec_from_json(const json& j, std::size_t position) {
  Section s(j, "parameters[" + std::to_string(position) + "]");
  ParameterSpec spec;
  std::string dist;
  std::vector<double> params;
  s.read("name", spec.name);
  s.read("dist", dist);
  s.read("params", params);
  s.read("samples", spec.sample_count);
  s.read("integer", spec.integer);
  s.finish();

  const std::string where = "parameter '" + spec.name + "'";
  if (params.size() != 2) throw ConfigError(where + ": params must hold two numbers");
  if (dist == "uniform") {
    spec.distribution = Uniform{params[0], params[1]};
  } else if (dist == "normal") {
    spec.distribution = Normal{params[0], params[1]};
  } else {
    throw ConfigError(where + ": dist must be \"uniform\" or \"normal\"");
  }
  spec.validate();
  return spec;
}

json spec_to_json(const ParameterSpec& spec) {
  json j;
  j["name"] = spec.name;
  if (const auto* u = std::get_if<Uniform>(&spec.distribution)) {
    j["dist"] = "uniform";
    j["params"] = {u->lo, u->hi};
  } else {
    const auto& n = std::get<Normal>(spec.distribution);
    j["dist"] = "normal";
    j["params"] = {n.mean, n.stddev};
  }
  j["samples"] = spec.sample_count;
  if (spec.integer) j["integer"] = true;
  return j;
}

}  // namespace

void RunConfig::validate() const {
  if (parameters.empty()) throw ConfigError("parameters must not be empty");
  for (const auto& p : parameters) p.validate();
  world.validate();
  sut.validate();
  rss.validate();
  requirement.validate();
  reward.validate();
  train.validate();
}

Problem RunConfig::make_problem() const {
  validate();
  Problem problem{ParameterSpace(parameters, effective_bins_seed()), world, sut, requirement, rss, reward};
  problem.validate();
  return problem;
}

RunConfig config_from_json(const json& j) {
  RunConfig cfg;
  Section top(j, "config");

  if (const json* params = top.child("parameters")) {
    if (!params->is_array()) throw ConfigError("parameters must be a list");
    cfg.parameters.clear();
    for (std::size_t i = 0; i < params->size(); ++i) cfg.parameters.push_back(spec_from_json((*params)[i], i));
  }
  if (const json* w = top.child("world")) {
    Section s(*w, "world");
    s.read("crossing_x", cfg.world.crossing_x);
    s.read("ego_base_x", cfg.world.ego_base_x);
    s.read("ego_init_speed", cfg.world.ego_init_speed);
    s.read("lane_center_y", cfg.world.lane_center_y);
    s.read("ped_base_y", cfg.world.ped_base_y);
    s.read("far_side_y", cfg.world.far_side_y);
    s.read("pass_margin", cfg.world.pass_margin);
    s.read("dt", cfg.world.dt);
    s.read("max_steps", cfg.world.max_steps);
    s.finish();
  }
  if (const json* u = top.child("sut")) {
    Section s(*u, "sut");
    s.read("detect_range", cfg.sut.detect_range);
    s.read("fov_half_angle", cfg.sut.fov_half_angle);
    s.read("brake_decel", cfg.sut.brake_decel);
    s.read("reaction_steps", cfg.sut.reaction_steps);
    if (const json* table = s.child("weather_range_mult")) {
      if (!table->is_object()) throw ConfigError("sut.weather_range_mult must map preset to multiplier");
      cfg.sut.weather_range_mult.clear();
      for (const auto& [key, value] : table->items()) {
        int preset = 0;
        try {
          std::size_t used = 0;
          preset = std::stoi(key, &used);
          if (used != key.size()) throw std::invalid_argument(key);
        } catch (const std::exception&) {
          throw ConfigError("sut.weather_range_mult key '" + key + "' is not an integer preset");
        }
        if (!value.is_number()) throw ConfigError("sut.weather_range_mult[" + key + "] must be a number");
        cfg.sut.weather_range_mult[preset] = value.get<double>();
      }
    }
    s.finish();
  }
  if (const json* r = top.child("rss")) {
    Section s(*r, "rss");
    s.read("rho", cfg.rss.rho);
    s.read("a_max_accel", cfg.rss.a_max_accel);
    s.read("a_min_brake", cfg.rss.a_min_brake);
    s.read("a_max_brake", cfg.rss.a_max_brake);
    s.finish();
  }
  if (const json* q = top.child("requirement")) {
    Section s(*q, "requirement");
    s.read("eps_dist", cfg.requirement.eps_dist);
    s.finish();
  }
  if (const json* r = top.child("reward")) {
    Section s(*r, "reward");
    s.read("range_lo", cfg.reward.range_lo);
    s.read("range_hi", cfg.reward.range_hi);
    s.read("collision_bonus", cfg.reward.collision_bonus);
    s.read("dist_ref", cfg.reward.dist_ref);
    s.finish();
  }
  if (const json* t = top.child("train")) {
    Section s(*t, "train");
    std::string optimizer(to_string(cfg.train.optimizer));
    s.read("alpha", cfg.train.alpha);
    s.read("batch_size", cfg.train.batch_size);
    s.read("use_baseline", cfg.train.use_baseline);
    s.read("baseline_decay", cfg.train.baseline_decay);
    s.read("total_episodes", cfg.train.total_episodes);
    s.read("hidden", cfg.train.hidden);
    s.read("layers", cfg.train.layers);
    s.read("init_scale", cfg.train.init_scale);
    s.read("optimizer", optimizer);
    s.read("checkpoint_every", cfg.train.checkpoint_every);
    s.read("early_stop", cfg.train.early_stop);
    s.finish();
    cfg.train.optimizer = optimizer_from_string(optimizer);
  }
  top.read("seed", cfg.seed);
  if (const json* b = top.child("bins_seed")) {
    if (!b->is_number_unsigned()) throw ConfigError("bins_seed must be a non-negative integer");
    cfg.bins_seed = b->get<std::uint64_t>();
  }
  top.read("output_dir", cfg.output_dir);
  top.read("store_traces", cfg.store_traces);
  top.read("report_recent", cfg.report_recent);
  top.finish();

  cfg.validate();
  return cfg;
}

json config_to_json(const RunConfig& cfg) {
  json j;
  j["parameters"] = json::array();
  for (const auto& p : cfg.parameters) j["parameters"].push_back(spec_to_json(p));
  j["world"] = {{"crossing_x", cfg.world.crossing_x},     {"ego_base_x", cfg.world.ego_base_x},
                {"ego_init_speed", cfg.world.ego_init_speed}, {"lane_center_y", cfg.world.lane_center_y},
                {"ped_base_y", cfg.world.ped_base_y},     {"far_side_y", cfg.world.far_side_y},
                {"pass_margin", cfg.world.pass_margin},   {"dt", cfg.world.dt},
                {"max_steps", cfg.world.max_steps}};
  json table = json::object();
  for (const auto& [preset, mult] : cfg.sut.weather_range_mult) table[std::to_string(preset)] = mult;
  j["sut"] = {{"detect_range", cfg.sut.detect_range},
              {"fov_half_angle", cfg.sut.fov_half_angle},
              {"brake_decel", cfg.sut.brake_decel},
              {"reaction_steps", cfg.sut.reaction_steps},
              {"weather_range_mult", table}};
  j["rss"] = {{"rho", cfg.rss.rho},
              {"a_max_accel", cfg.rss.a_max_accel},
              {"a_min_brake", cfg.rss.a_min_brake},
              {"a_max_brake", cfg.rss.a_max_brake}};
  j["requirement"] = {{"eps_dist", cfg.requirement.eps_dist}};
  j["reward"] = {{"range_lo", cfg.reward.range_lo},
                 {"range_hi", cfg.reward.range_hi},
                 {"collision_bonus", cfg.reward.collision_bonus},
                 {"dist_ref", cfg.reward.dist_ref}};
  j["train"] = {{"alpha", cfg.train.alpha},
                {"batch_size", cfg.train.batch_size},
                {"use_baseline", cfg.train.use_baseline},
                {"baseline_decay", cfg.train.baseline_decay},
                {"total_episodes", cfg.train.total_episodes},
                {"hidden", cfg.train.hidden},
                {"layers", cfg.train.layers},
                {"init_scale", cfg.train.init_scale},
                {"optimizer", std::string(to_string(cfg.train.optimizer))},
                {"checkpoint_every", cfg.train.checkpoint_every},
                {"early_stop", cfg.train.early_stop}};
  j["seed"] = cfg.seed;
  j["bins_seed"] = cfg.effective_bins_seed();
  j["output_dir"] = cfg.output_dir;
  j["store_traces"] = cfg.store_traces;
  j["report_recent"] = cfg.report_recent;
  return j;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

}  // namespace falsify
