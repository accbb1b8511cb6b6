#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "falsify/trace.hpp"

namespace falsify {

/// Constants of the RSS safe longitudinal distance.
struct RssParams {
  double rho = 0.5;          ///< response time [s]
  double a_max_accel = 2.0;  ///< max acceleration of the front agent [m/s^2]
  double a_min_brake = 4.0;  ///< minimum reasonable braking of the ego [m/s^2]
  double a_max_brake = 8.0;  ///< max braking of the front agent [m/s^2]

  void validate() const;
};

/// The no-collision requirement: always dist(ped, ego) >= eps_dist.
struct SafetyRequirement {
  double eps_dist = 1.0;

  void validate() const;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Min-max rescaling of [in_min, in_max] onto [out_lo, out_hi].
struct NormalizationSpec {
  double out_lo = -0.01;
  double out_hi = 0.01;
  double in_min = 0.0;
  double in_max = 1.0;

  void validate() const;
};

struct RiskProfile {
  std::vector<std::uint8_t> flags;
  std::size_t high_risk_count = 0;
  std::size_t total_steps = 0;
  double second_half_fraction = 0.0;
};

/// Minimum safe longitudinal distance, clamped at zero.
double rss_min_distance(double v_rear, double v_front, const RssParams& p);

double euclid(Point2 p, Point2 q);

/// Marks every step whose distance is below the RSS minimum safe distance.
/// The pedestrian offers no longitudinal escape, so the front-agent speed is 0.
RiskProfile classify_timesteps(const Trace& trace, const RssParams& p);

/// Boolean monitor for "always not clash" over the finite trace.
bool stl_satisfied(const Trace& trace, const SafetyRequirement& req);

double normalize(double x, const NormalizationSpec& spec);

/// Fraction of high-risk steps among indices >= ceil(total/2). Requires total >= 2.
double second_half_fraction(const RiskProfile& profile);

}  // namespace falsify
