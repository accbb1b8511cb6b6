#include "falsify/sim.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "falsify/errors.hpp"

namespace falsify {

namespace {

constexpr double kMinPedSpeed = 0.01;

bool finite_state(const EgoState& e, const PedestrianState& p) {
  return std::isfinite(e.x) && std::isfinite(e.speed) && std::isfinite(p.x) && std::isfinite(p.y) &&
         std::isfinite(p.speed) && std::isfinite(p.accel);
}

}  // namespace

void WorldConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("world.dt must be > 0");
  if (max_steps < 1) throw ConfigError("world.max_steps must be >= 1");
  if (!(ego_base_x < crossing_x)) throw ConfigError("world.ego_base_x must be < world.crossing_x");
  if (!(ego_init_speed >= 0.0)) throw ConfigError("world.ego_init_speed must be >= 0");
  if (!(pass_margin > 0.0)) throw ConfigError("world.pass_margin must be > 0");
  const bool lane_between = (ped_base_y - lane_center_y) * (far_side_y - lane_center_y) < 0.0;
  if (!lane_between) throw ConfigError("world.far_side_y must lie across the lane from world.ped_base_y");
}

std::map<int, double> SutConfig::default_weather_table() {
  std::map<int, double> table;
  for (int p = 0; p <= 14; ++p) table[p] = 1.0 - 0.5 * static_cast<double>(p) / 14.0;
  return table;
}

void SutConfig::validate() const {
  if (!(detect_range >= 0.0) || !std::isfinite(detect_range)) throw ConfigError("sut.detect_range must be >= 0");
  if (!(fov_half_angle > 0.0 && fov_half_angle <= 90.0)) {
    throw ConfigError("sut.fov_half_angle must be in (0, 90]");
  }
  if (!(brake_decel > 0.0)) throw ConfigError("sut.brake_decel must be > 0");
  if (reaction_steps < 0) throw ConfigError("sut.reaction_steps must be >= 0");
  for (const auto& [preset, mult] : weather_range_mult) {
    if (!(mult > 0.0 && mult <= 1.0)) {
      throw ConfigError("sut.weather_range_mult[" + std::to_string(preset) + "] must be in (0, 1]");
    }
  }
}

double SutConfig::range_multiplier(int preset) const {
  const auto it = weather_range_mult.find(preset);
  if (it == weather_range_mult.end()) {
    throw ConfigError("sut.weather_range_mult has no entry for weather preset " + std::to_string(preset));
  }
  return it->second;
}

ScenarioValues bind_scenario(const ParameterSpace& space, const ConcreteScenario& scenario) {
  if (scenario.values.size() != space.size()) throw ValidationError("scenario does not match parameter space");
  ScenarioValues v;
  v.ego_offset_pos = scenario.values[space.index_of(param::kEgoOffsetPos)];
  v.ped_accel = scenario.values[space.index_of(param::kPedAccel)];
  v.ped_vel = scenario.values[space.index_of(param::kPedVel)];
  v.ped_offset_pos = scenario.values[space.index_of(param::kPedOffsetPos)];
  v.weather = static_cast<int>(std::lround(scenario.values[space.index_of(param::kWeather)]));
  return v;
}

SutDecision sut_step(const Observation& obs, const SutConfig& sut, int weather, SutMemory& memory) {
  const double reach = sut.detect_range * sut.range_multiplier(weather);
  const double range = std::hypot(obs.rel_x, obs.rel_y);
  const double bearing = std::atan2(std::abs(obs.rel_y), obs.rel_x) * 180.0 / std::numbers::pi;

  SutDecision decision;
  decision.detected = obs.rel_x > 0.0 && range < reach && bearing <= sut.fov_half_angle;
  if (decision.detected && !memory.first_detection) memory.first_detection = memory.step;
  if (memory.first_detection && memory.step >= *memory.first_detection + sut.reaction_steps) {
    decision.control = Control::Brake;
  }
  ++memory.step;
  return decision;
}

KinematicState integrate_step(const EgoState& ego, const PedestrianState& ped, double dt, Control control,
                              double brake_decel) {
  KinematicState next{ego, ped};

  next.ego.braking = control == Control::Brake;
  next.ego.x = ego.x + ego.speed * dt;
  if (next.ego.braking) next.ego.speed = std::max(0.0, ego.speed - brake_decel * dt);

  const double remaining = ped.stop_y - ped.y;
  if (remaining != 0.0) {
    const double step = ped.speed * dt;
    if (step >= std::abs(remaining)) {
      next.ped.y = ped.stop_y;
      next.ped.speed = 0.0;
      next.ped.accel = 0.0;
    } else {
      next.ped.y = ped.y + std::copysign(step, remaining);
      next.ped.speed = std::max(0.0, ped.speed + ped.accel * dt);
    }
  }
  return next;
}

Trace run_episode(const ScenarioValues& scenario, const WorldConfig& world, const SutConfig& sut,
                  const SafetyRequirement& req) {
  EgoState ego{world.ego_base_x + scenario.ego_offset_pos, world.ego_init_speed, false};
  PedestrianState ped;
  ped.x = world.crossing_x;
  // The pedestrian starts ped_offset_pos behind the near curb, on the side away from the lane.
  const double outward = world.ped_base_y >= world.lane_center_y ? 1.0 : -1.0;
  ped.y = world.ped_base_y + outward * scenario.ped_offset_pos;
  ped.speed = scenario.ped_vel > 0.0 ? scenario.ped_vel : kMinPedSpeed;
  ped.accel = scenario.ped_accel;
  ped.stop_y = world.far_side_y;

  sut.range_multiplier(scenario.weather);  // unknown presets fail before the first step

  Trace trace;
  trace.steps.reserve(static_cast<std::size_t>(world.max_steps));
  SutMemory memory;
  bool terminated = false;

  for (int i = 0; i < world.max_steps; ++i) {
    if (!finite_state(ego, ped)) {
      throw SimulationFault("non-finite state at step " + std::to_string(i) + " (ego_x=" +
                            std::to_string(ego.x) + ", ped_y=" + std::to_string(ped.y) + ")");
    }
    const Observation obs{ped.x - ego.x, ped.y - world.lane_center_y, ego.speed};
    const SutDecision decision = sut_step(obs, sut, scenario.weather, memory);
    ego.braking = decision.control == Control::Brake;

    TraceStep rec;
    rec.t = static_cast<double>(i) * world.dt;
    rec.ego_x = ego.x;
    rec.ego_speed = ego.speed;
    rec.ped_x = ped.x;
    rec.ped_y = ped.y;
    rec.dist = euclid({ego.x, world.lane_center_y}, {ped.x, ped.y});
    rec.detected = decision.detected;
    rec.braking = ego.braking;
    trace.steps.push_back(rec);

    if (rec.dist < req.eps_dist) {
      trace.outcome = Outcome::Collision;
      terminated = true;
    } else if (ego.speed <= 0.0 && ego.x < world.crossing_x) {
      trace.outcome = Outcome::StoppedBeforeCrossing;
      terminated = true;
    } else if (ego.x > world.crossing_x + world.pass_margin) {
      trace.outcome = Outcome::PassedCrossing;
      terminated = true;
    }
    if (terminated) break;

    const auto next = integrate_step(ego, ped, world.dt, decision.control, sut.brake_decel);
    ego = next.ego;
    ped = next.ped;
  }

  if (!terminated) trace.outcome = Outcome::Timeout;
  trace.final_dist = trace.steps.back().dist;
  if (!std::isfinite(trace.final_dist)) throw SimulationFault("non-finite final distance");
  return trace;
}

}  // namespace falsify
