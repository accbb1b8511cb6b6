#include "falsify/reward.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "falsify/errors.hpp"

namespace falsify {

void RewardConfig::validate() const {
  if (!(range_lo < range_hi)) throw ConfigError("reward.range_lo must be < reward.range_hi");
  if (!(collision_bonus > range_hi)) throw ConfigError("reward.collision_bonus must exceed reward.range_hi");
  if (!(dist_ref > 0.0)) throw ConfigError("reward.dist_ref must be > 0");
}

double risk_reward(const RiskProfile& profile, const RewardConfig& cfg) {
  if (profile.total_steps == 0) throw DomainError("risk_reward: empty risk profile");
  const NormalizationSpec spec{cfg.range_lo, cfg.range_hi, 0.0, static_cast<double>(profile.total_steps)};
  return normalize(static_cast<double>(profile.high_risk_count), spec);
}

double distance_reward(double final_dist, const RewardConfig& cfg) {
  if (!(final_dist >= 0.0)) throw DomainError("distance_reward: negative distance " + std::to_string(final_dist));
  const double clipped = std::min(final_dist, cfg.dist_ref);
  return cfg.range_hi - (cfg.range_hi - cfg.range_lo) * clipped / cfg.dist_ref;
}

double collision_reward(Outcome outcome, const RewardConfig& cfg) {
  return outcome == Outcome::Collision ? cfg.collision_bonus : 0.0;
}

RewardBreakdown total_reward(const Trace& trace, const RiskProfile& profile, const RewardConfig& cfg) {
  cfg.validate();
  RewardBreakdown r;
  r.risk_term = risk_reward(profile, cfg);
  r.distance_term = distance_reward(trace.final_dist, cfg);
  r.collision_term = collision_reward(trace.outcome, cfg);
  r.total = r.risk_term + r.distance_term + r.collision_term;
  return r;
}

}  // namespace falsify
