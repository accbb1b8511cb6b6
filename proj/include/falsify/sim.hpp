#pragma once

#include <map>
#include <optional>

#include "falsify/metrics.hpp"
#include "falsify/param_space.hpp"
#include "falsify/trace.hpp"

namespace falsify {

/// Scene geometry of the pedestrian crossing. The road runs along +x; the ego drives on
/// y = lane_center_y and the pedestrian crosses at x = crossing_x from the curb at
/// ped_base_y (across the oncoming lane, on the ego's left) to the curb at far_side_y.
struct WorldConfig {
  double crossing_x = 60.0;
  double ego_base_x = 0.0;
  double ego_init_speed = 8.33;
  double lane_center_y = 0.0;
  double ped_base_y = 5.25;
  double far_side_y = -1.75;
  double pass_margin = 5.0;  ///< ego_x beyond crossing_x + pass_margin ends the episode
  double dt = 0.05;
  int max_steps = 400;

  void validate() const;
};

/// Range- and FOV-limited emergency braking stand-in.
struct SutConfig {
  double detect_range = 25.0;   ///< [m]; 0 gives a blind SUT
  double fov_half_angle = 30.0; ///< [deg]
  double brake_decel = 3.0;     ///< [m/s^2], positive magnitude
  int reaction_steps = 2;
  std::map<int, double> weather_range_mult = default_weather_table();

  /// Presets 0..14 mapped linearly from 1.0 down to 0.5.
  static std::map<int, double> default_weather_table();

  void validate() const;
  /// Multiplier for `preset`; throws ConfigError when the preset has no entry.
  double range_multiplier(int preset) const;
};

struct EgoState {
  double x = 0.0;
  double speed = 0.0;
  bool braking = false;
};

struct PedestrianState {
  double x = 0.0;
  double y = 0.0;
  double speed = 0.0;  ///< along the crossing direction
  double accel = 0.0;
  double stop_y = 0.0; ///< far curb; the pedestrian halts on reaching it
};

enum class Control { Cruise, Brake };

struct Observation {
  double rel_x = 0.0;  ///< pedestrian position relative to the ego, ego heading along +x
  double rel_y = 0.0;
  double own_speed = 0.0;
};

/// Detection latch carried across steps of one episode.
struct SutMemory {
  int step = 0;
  std::optional<int> first_detection;
};

struct SutDecision {
  bool detected = false;
  Control control = Control::Cruise;
};

/// Scenario values addressed by role rather than by position in the space.
struct ScenarioValues {
  double ego_offset_pos = 0.0;
  double ped_accel = 0.0;
  double ped_vel = 0.0;
  double ped_offset_pos = 0.0;
  int weather = 0;
};

/// Resolves the five reference parameters by name.
ScenarioValues bind_scenario(const ParameterSpace& space, const ConcreteScenario& scenario);

SutDecision sut_step(const Observation& obs, const SutConfig& sut, int weather, SutMemory& memory);

struct KinematicState {
  EgoState ego;
  PedestrianState ped;
};

/// One explicit Euler step.
KinematicState integrate_step(const EgoState& ego, const PedestrianState& ped, double dt, Control control,
                              double brake_decel);

/// Simulates one episode. Pure: identical inputs give bit-identical traces.
Trace run_episode(const ScenarioValues& scenario, const WorldConfig& world, const SutConfig& sut,
                  const SafetyRequirement& req);

}  // namespace falsify
