#include "falsify/trace.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <limits>
#include <ostream>
#include <string>

#include "falsify/errors.hpp"

namespace falsify {

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Collision:
      return "Collision";
    case Outcome::StoppedBeforeCrossing:
      return "StoppedBeforeCrossing";
    case Outcome::PassedCrossing:
      return "PassedCrossing";
    case Outcome::Timeout:
      return "Timeout";
  }
  return "Unknown";
}

Outcome outcome_from_string(std::string_view text) {
  for (auto o : {Outcome::Collision, Outcome::StoppedBeforeCrossing, Outcome::PassedCrossing,
                 Outcome::Timeout}) {
    if (to_string(o) == text) return o;
  }
  throw ValidationError("unknown outcome '" + std::string(text) + "'");
}

double Trace::min_dist() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& s : steps) m = std::min(m, s.dist);
  return m;
}

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) return "nan";
  return std::string(buf.data(), end);
}

void write_trace_csv(std::ostream& out, const Trace& trace) {
  out << "t,ego_x,ego_speed,ped_x,ped_y,dist,detected,braking\n";
  for (const auto& s : trace.steps) {
    out << format_double(s.t) << ',' << format_double(s.ego_x) << ',' << format_double(s.ego_speed)
        << ',' << format_double(s.ped_x) << ',' << format_double(s.ped_y) << ','
        << format_double(s.dist) << ',' << (s.detected ? 1 : 0) << ',' << (s.braking ? 1 : 0)
        << '\n';
  }
}

}  // namespace falsify
