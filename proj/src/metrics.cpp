#include "falsify/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "falsify/errors.hpp"

namespace falsify {

namespace {

void require_positive(double v, const char* field) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("rss.") + field + " must be > 0");
}

std::size_t second_half_start(std::size_t total) { return (total + 1) / 2; }

}  // namespace

void RssParams::validate() const {
  require_positive(rho, "rho");
  require_positive(a_max_accel, "a_max_accel");
  require_positive(a_min_brake, "a_min_brake");
  require_positive(a_max_brake, "a_max_brake");
}

void SafetyRequirement::validate() const {
  if (!(eps_dist > 0.0) || !std::isfinite(eps_dist)) throw ConfigError("eps_dist must be > 0");
}

void NormalizationSpec::validate() const {
  if (!(out_lo < out_hi)) throw ConfigError("normalization requires out_lo < out_hi");
  if (!(in_min < in_max)) throw ConfigError("normalization requires in_min < in_max");
}

double rss_min_distance(double v_rear, double v_front, const RssParams& p) {
  p.validate();
  const double rho = p.rho;
  const double reach = v_rear + rho * p.a_max_accel;
  const double d = v_rear * rho + 0.5 * p.a_max_accel * rho * rho + reach * reach / (2.0 * p.a_min_brake) -
                   v_front * v_front / (2.0 * p.a_max_brake);
  return std::max(0.0, d);
}

double euclid(Point2 p, Point2 q) { return std::hypot(p.x - q.x, p.y - q.y); }

RiskProfile classify_timesteps(const Trace& trace, const RssParams& p) {
  RiskProfile profile;
  profile.total_steps = trace.steps.size();
  profile.flags.reserve(trace.steps.size());
  for (const auto& s : trace.steps) {
    const bool high = s.dist < rss_min_distance(s.ego_speed, 0.0, p);
    profile.flags.push_back(high ? 1 : 0);
    profile.high_risk_count += high ? 1 : 0;
  }
  if (profile.total_steps >= 2) {
    profile.second_half_fraction = second_half_fraction(profile);
  } else if (profile.total_steps == 1) {
    profile.second_half_fraction = profile.flags[0] ? 1.0 : 0.0;
  }
  return profile;
}

bool stl_satisfied(const Trace& trace, const SafetyRequirement& req) {
  return std::none_of(trace.steps.begin(), trace.steps.end(),
                      [&](const TraceStep& s) { return s.dist < req.eps_dist; });
}

double normalize(double x, const NormalizationSpec& spec) {
  spec.validate();
  if (!(x >= spec.in_min && x <= spec.in_max)) {
    throw DomainError("normalize: x=" + std::to_string(x) + " outside [" + std::to_string(spec.in_min) +
                      ", " + std::to_string(spec.in_max) + "]");
  }
  return (spec.out_hi - spec.out_lo) * (x - spec.in_min) / (spec.in_max - spec.in_min) + spec.out_lo;
}

double second_half_fraction(const RiskProfile& profile) {
  const std::size_t total = profile.total_steps;
  if (total < 2) throw DomainError("second_half_fraction needs at least two steps");
  if (profile.flags.size() != total) throw DomainError("risk profile flags do not match total_steps");
  const std::size_t start = second_half_start(total);
  std::size_t count = 0;
  for (std::size_t i = start; i < total; ++i) count += profile.flags[i] ? 1 : 0;
  return static_cast<double>(count) / static_cast<double>(total - start);
}

}  // namespace falsify
