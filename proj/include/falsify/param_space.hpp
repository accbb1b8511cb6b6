#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "falsify/rng.hpp"

namespace falsify {

struct Uniform {
  double lo = 0.0;
  double hi = 1.0;
};

struct Normal {
  double mean = 0.0;
  double stddev = 1.0;
};

using Distribution = std::variant<Uniform, Normal>;

/// One row of the logical scenario: a named distribution and how many bins to draw from it.
///
/// `integer` marks a categorical preset parameter (weather): bins are then distinct
/// integers drawn without replacement from {lo, ..., hi} of a Uniform distribution.
struct ParameterSpec {
  std::string name;
  Distribution distribution = Uniform{};
  std::size_t sample_count = 1;
  bool integer = false;

  void validate() const;
};

/// Draws `spec.sample_count` values from the distribution, sorted ascending.
/// Normal draws are not truncated; continuous Uniform draws lie in [lo, hi).
std::vector<double> discretize(const ParameterSpec& spec, Rng& rng);

/// The discretized search space. Bins are drawn once at construction and never resampled.
class ParameterSpace {
public:
  ParameterSpace(std::vector<ParameterSpec> specs, std::uint64_t seed);

  /// Rebuilds a space from previously exported bins.
  static ParameterSpace from_bins(std::vector<ParameterSpec> specs,
                                  std::vector<std::vector<double>> bins, std::uint64_t seed);

  std::size_t size() const { return specs_.size(); }
  const std::vector<ParameterSpec>& specs() const { return specs_; }
  const ParameterSpec& spec(std::size_t k) const { return specs_.at(k); }
  const std::vector<double>& bins(std::size_t k) const { return bins_.at(k); }
  const std::vector<std::vector<double>>& all_bins() const { return bins_; }
  std::uint64_t seed() const { return seed_; }

  /// Bin count of every parameter, in order.
  std::vector<std::size_t> bin_counts() const;

  /// Product of all bin counts.
  std::uint64_t cardinality() const;

  /// Position of the named parameter; throws ConfigError if absent.
  std::size_t index_of(const std::string& name) const;
  bool contains(const std::string& name) const;

  /// FNV-1a hash of names and bin values; ties checkpoints to the space they were trained on.
  std::uint64_t fingerprint() const;

private:
  ParameterSpace() = default;

  std::vector<ParameterSpec> specs_;
  std::vector<std::vector<double>> bins_;
  std::uint64_t seed_ = 0;
};

/// A concrete scenario: one bin index and its value per parameter.
struct ConcreteScenario {
  std::vector<std::size_t> indices;
  std::vector<double> values;

  bool operator==(const ConcreteScenario&) const = default;
};

ConcreteScenario decode(const ParameterSpace& space, std::span<const std::size_t> indices);

/// Inverse of decode: looks each value up in its bin list.
std::vector<std::size_t> encode(const ParameterSpace& space, std::span<const double> values);

/// Uniform draw over the discrete index grid.
ConcreteScenario random_scenario(const ParameterSpace& space, Rng& rng);

/// Mixed-radix conversion between a flat cell number and an index vector
/// (last parameter varies fastest).
std::vector<std::size_t> unravel(const ParameterSpace& space, std::uint64_t flat);
std::uint64_t ravel(const ParameterSpace& space, std::span<const std::size_t> indices);

/// The five parameters of the pedestrian-crossing scenario, in the reference order.
namespace param {
inline constexpr const char* kEgoOffsetPos = "ego_offset_pos";
inline constexpr const char* kPedAccel = "ped_accel";
inline constexpr const char* kPedVel = "ped_vel";
inline constexpr const char* kPedOffsetPos = "ped_offset_pos";
inline constexpr const char* kWeather = "weather";
}  // namespace param

/// Reference logical scenario: 10 x 10 x 25 x 4 x 10 = 100,000 cells.
std::vector<ParameterSpec> reference_specs();

}  // namespace falsify
