#pragma once

#include "falsify/metrics.hpp"
#include "falsify/trace.hpp"

namespace falsify {

struct RewardConfig {
  double range_lo = -0.01;
  double range_hi = 0.01;
  double collision_bonus = 0.25;
  double dist_ref = 20.0;  ///< final distance at which the distance term saturates at range_lo [m]

  void validate() const;
};

struct RewardBreakdown {
  double risk_term = 0.0;
  double distance_term = 0.0;
  double collision_term = 0.0;
  double total = 0.0;
};

/// High-risk step count rescaled from [0, total_steps] onto [range_lo, range_hi].
double risk_reward(const RiskProfile& profile, const RewardConfig& cfg);

/// Linear in the final distance: range_hi at contact, range_lo at and beyond dist_ref.
double distance_reward(double final_dist, const RewardConfig& cfg);

double collision_reward(Outcome outcome, const RewardConfig& cfg = {});

RewardBreakdown total_reward(const Trace& trace, const RiskProfile& profile, const RewardConfig& cfg);

}  // namespace falsify
