#pragma once

#include <cstddef>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace falsify {

enum class Outcome {
  Collision,
  StoppedBeforeCrossing,
  PassedCrossing,
  Timeout,
};

std::string_view to_string(Outcome outcome);
Outcome outcome_from_string(std::string_view text);

struct TraceStep {
  double t = 0.0;
  double ego_x = 0.0;
  double ego_speed = 0.0;
  double ped_x = 0.0;
  double ped_y = 0.0;
  double dist = 0.0;
  bool detected = false;
  bool braking = false;
};

/// Per-timestep record of one episode plus its terminal outcome.
struct Trace {
  std::vector<TraceStep> steps;
  Outcome outcome = Outcome::Timeout;
  double final_dist = 0.0;

  std::size_t size() const { return steps.size(); }
  double min_dist() const;
};

/// Writes the trace as CSV: t,ego_x,ego_speed,ped_x,ped_y,dist,detected,braking.
void write_trace_csv(std::ostream& out, const Trace& trace);

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

}  // namespace falsify
