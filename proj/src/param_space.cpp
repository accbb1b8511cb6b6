#include "falsify/param_space.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "falsify/errors.hpp"

namespace falsify {

namespace {

struct SpecValidator {
  const ParameterSpec& spec;

  void operator()(const Uniform& u) const {
    if (!std::isfinite(u.lo) || !std::isfinite(u.hi) || !(u.lo < u.hi)) {
      throw ConfigError("parameter '" + spec.name + "': uniform requires lo < hi");
    }
    if (spec.integer) {
      if (u.lo != std::floor(u.lo) || u.hi != std::floor(u.hi)) {
        throw ConfigError("parameter '" + spec.name + "': integer presets need integral lo/hi");
      }
      const auto available = static_cast<std::size_t>(u.hi - u.lo) + 1;
      if (spec.sample_count > available) {
        throw ConfigError("parameter '" + spec.name + "': samples exceeds number of presets");
      }
    }
  }

  void operator()(const Normal& n) const {
    if (!std::isfinite(n.mean) || !std::isfinite(n.stddev) || !(n.stddev > 0.0)) {
      throw ConfigError("parameter '" + spec.name + "': normal requires std > 0");
    }
    if (spec.integer) {
      throw ConfigError("parameter '" + spec.name + "': integer presets require a uniform range");
    }
  }
};

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

void ParameterSpec::validate() const {
  if (name.empty()) throw ConfigError("parameter name must not be empty");
  if (sample_count == 0) throw ConfigError("parameter '" + name + "': samples must be >= 1");
  std::visit(SpecValidator{*this}, distribution);
}

std::vector<double> discretize(const ParameterSpec& spec, Rng& rng) {
  spec.validate();
  std::vector<double> values;
  values.reserve(spec.sample_count);

  if (const auto* u = std::get_if<Uniform>(&spec.distribution)) {
    if (spec.integer) {
      std::vector<int> presets(static_cast<std::size_t>(u->hi - u->lo) + 1);
      std::iota(presets.begin(), presets.end(), static_cast<int>(u->lo));
      std::vector<int> chosen;
      std::sample(presets.begin(), presets.end(), std::back_inserter(chosen), spec.sample_count, rng);
      for (int p : chosen) values.push_back(static_cast<double>(p));
    } else {
      std::uniform_real_distribution<double> dist(u->lo, u->hi);
      for (std::size_t i = 0; i < spec.sample_count; ++i) values.push_back(dist(rng));
    }
  } else {
    const auto& n = std::get<Normal>(spec.distribution);
    std::normal_distribution<double> dist(n.mean, n.stddev);
    for (std::size_t i = 0; i < spec.sample_count; ++i) values.push_back(dist(rng));
  }

  std::sort(values.begin(), values.end());
  return values;
}

ParameterSpace::ParameterSpace(std::vector<ParameterSpec> specs, std::uint64_t seed)
    : specs_(std::move(specs)), seed_(seed) {
  if (specs_.empty()) throw ConfigError("parameter space needs at least one parameter");
  bins_.reserve(specs_.size());
  for (std::size_t k = 0; k < specs_.size(); ++k) {
    for (std::size_t j = 0; j < k; ++j) {
      if (specs_[j].name == specs_[k].name) {
        throw ConfigError("duplicate parameter '" + specs_[k].name + "'");
      }
    }
    // Each parameter gets its own stream so adding a row does not perturb the others.
    Rng rng(derive_seed(seed, Stream::Bins, k));
    bins_.push_back(discretize(specs_[k], rng));
  }
}

ParameterSpace ParameterSpace::from_bins(std::vector<ParameterSpec> specs,
                                         std::vector<std::vector<double>> bins,
                                         std::uint64_t seed) {
  if (specs.size() != bins.size()) throw ValidationError("bins do not match parameter count");
  for (std::size_t k = 0; k < specs.size(); ++k) {
    specs[k].validate();
    if (bins[k].size() != specs[k].sample_count) {
      throw ValidationError("parameter '" + specs[k].name + "': bin count mismatch");
    }
    if (!std::is_sorted(bins[k].begin(), bins[k].end())) {
      throw ValidationError("parameter '" + specs[k].name + "': bins not sorted");
    }
  }
  ParameterSpace space;
  space.specs_ = std::move(specs);
  space.bins_ = std::move(bins);
  space.seed_ = seed;
  return space;
}

std::vector<std::size_t> ParameterSpace::bin_counts() const {
  std::vector<std::size_t> counts;
  counts.reserve(bins_.size());
  for (const auto& b : bins_) counts.push_back(b.size());
  return counts;
}

std::uint64_t ParameterSpace::cardinality() const {
  std::uint64_t n = 1;
  for (const auto& b : bins_) n *= b.size();
  return n;
}

std::size_t ParameterSpace::index_of(const std::string& name) const {
  for (std::size_t k = 0; k < specs_.size(); ++k) {
    if (specs_[k].name == name) return k;
  }
  throw ConfigError("parameter space has no parameter '" + name + "'");
}

bool ParameterSpace::contains(const std::string& name) const {
  return std::any_of(specs_.begin(), specs_.end(),
                     [&](const ParameterSpec& s) { return s.name == name; });
}

std::uint64_t ParameterSpace::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t k = 0; k < specs_.size(); ++k) {
    h = fnv1a(h, specs_[k].name.data(), specs_[k].name.size());
    for (double v : bins_[k]) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, sizeof bits);
      h = fnv1a(h, &bits, sizeof bits);
    }
  }
  return h;
}

ConcreteScenario decode(const ParameterSpace& space, std::span<const std::size_t> indices) {
  if (indices.size() != space.size()) {
    throw BoundsError("index vector has " + std::to_string(indices.size()) + " entries, space has " +
                      std::to_string(space.size()));
  }
  ConcreteScenario s;
  s.indices.assign(indices.begin(), indices.end());
  s.values.reserve(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const auto& bins = space.bins(k);
    if (indices[k] >= bins.size()) {
      throw BoundsError("index " + std::to_string(indices[k]) + " out of range for parameter '" +
                        space.spec(k).name + "' (" + std::to_string(bins.size()) + " bins)");
    }
    s.values.push_back(bins[indices[k]]);
  }
  return s;
}

std::vector<std::size_t> encode(const ParameterSpace& space, std::span<const double> values) {
  if (values.size() != space.size()) throw ValidationError("value vector length does not match space");
  std::vector<std::size_t> indices(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    const auto& bins = space.bins(k);
    const auto it = std::find(bins.begin(), bins.end(), values[k]);
    if (it == bins.end()) {
      throw ValidationError("value for parameter '" + space.spec(k).name + "' is not a bin value");
    }
    indices[k] = static_cast<std::size_t>(it - bins.begin());
  }
  return indices;
}

ConcreteScenario random_scenario(const ParameterSpace& space, Rng& rng) {
  std::vector<std::size_t> indices(space.size());
  for (std::size_t k = 0; k < space.size(); ++k) {
    std::uniform_int_distribution<std::size_t> pick(0, space.bins(k).size() - 1);
    indices[k] = pick(rng);
  }
  return decode(space, indices);
}

std::vector<std::size_t> unravel(const ParameterSpace& space, std::uint64_t flat) {
  if (flat >= space.cardinality()) throw BoundsError("cell number out of range");
  std::vector<std::size_t> indices(space.size());
  for (std::size_t k = space.size(); k-- > 0;) {
    const auto n = space.bins(k).size();
    indices[k] = static_cast<std::size_t>(flat % n);
    flat /= n;
  }
  return indices;
}

std::uint64_t ravel(const ParameterSpace& space, std::span<const std::size_t> indices) {
  if (indices.size() != space.size()) throw BoundsError("index vector length does not match space");
  std::uint64_t flat = 0;
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const auto n = space.bins(k).size();
    if (indices[k] >= n) throw BoundsError("index out of range for parameter '" + space.spec(k).name + "'");
    flat = flat * n + indices[k];
  }
  return flat;
}

std::vector<ParameterSpec> reference_specs() {
  return {
      {param::kEgoOffsetPos, Uniform{1.0, 10.0}, 10, false},
      {param::kPedAccel, Uniform{0.0, 0.1}, 10, false},
      {param::kPedVel, Normal{1.46, 0.24}, 25, false},
      {param::kPedOffsetPos, Uniform{3.0, 4.5}, 4, false},
      {param::kWeather, Uniform{0.0, 14.0}, 10, true},
  };
}

}  // namespace falsify
