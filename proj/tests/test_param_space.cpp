#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "falsify/errors.hpp"
#include "falsify/param_space.hpp"

using namespace falsify;

namespace {

ParameterSpace toy_space(std::vector<std::size_t> counts, std::uint64_t seed = 3) {
  std::vector<ParameterSpec> specs;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    specs.push_back({"p" + std::to_string(k), Uniform{0.0, 1.0}, counts[k], false});
  }
  return ParameterSpace(specs, seed);
}

// Box-Muller over a separate engine; shares nothing with std::normal_distribution.
double box_muller(std::minstd_rand& gen, double mean, double stddev) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double u1 = 1.0 - u(gen);
  const double u2 = u(gen);
  return mean + stddev * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

TEST(Discretize, UniformBinsSortedInHalfOpenRange) {
  ParameterSpec spec{"ped_offset_pos", Uniform{3.0, 4.5}, 4, false};
  Rng rng(11);
  const auto bins = discretize(spec, rng);
  ASSERT_EQ(bins.size(), 4u);
  EXPECT_TRUE(std::is_sorted(bins.begin(), bins.end()));
  for (double v : bins) {
    EXPECT_GE(v, 3.0);
    EXPECT_LT(v, 4.5);
  }
}

TEST(Discretize, SingleBin) {
  ParameterSpec spec{"x", Uniform{0.0, 1.0}, 1, false};
  Rng rng(5);
  const auto bins = discretize(spec, rng);
  ASSERT_EQ(bins.size(), 1u);
  EXPECT_GE(bins[0], 0.0);
  EXPECT_LT(bins[0], 1.0);
}

TEST(Discretize, NormalSampleMeanConcentrates) {
  const ParameterSpec spec{"ped_vel", Normal{1.46, 0.24}, 25, false};
  int hits = 0, oracle_hits = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng(seed);
    const auto bins = discretize(spec, rng);
    double mean = 0.0;
    for (double v : bins) mean += v;
    mean /= 25.0;
    hits += std::abs(mean - 1.46) < 0.24 ? 1 : 0;

    std::minstd_rand gen(static_cast<unsigned>(seed + 1));
    double oracle_mean = 0.0;
    for (int i = 0; i < 25; ++i) oracle_mean += box_muller(gen, 1.46, 0.24);
    oracle_mean /= 25.0;
    oracle_hits += std::abs(oracle_mean - 1.46) < 0.24 ? 1 : 0;
  }
  EXPECT_GE(hits, 950);
  EXPECT_GE(oracle_hits, 950);
}

TEST(Discretize, NormalDrawsNotTruncated) {
  // A distribution centred at zero must produce negative bins.
  ParameterSpec spec{"v", Normal{0.0, 1.0}, 50, false};
  Rng rng(2);
  const auto bins = discretize(spec, rng);
  EXPECT_LT(bins.front(), 0.0);
}

TEST(Discretize, WeatherPresetsDistinctIntegers) {
  ParameterSpec spec{"weather", Uniform{0.0, 14.0}, 10, true};
  Rng rng(8);
  const auto bins = discretize(spec, rng);
  ASSERT_EQ(bins.size(), 10u);
  std::set<double> unique(bins.begin(), bins.end());
  EXPECT_EQ(unique.size(), 10u);
  for (double v : bins) {
    EXPECT_EQ(v, std::floor(v));
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 14.0);
  }
}

TEST(Discretize, InvalidSpecsNameTheField) {
  Rng rng(1);
  auto expect_error = [&](ParameterSpec spec, const std::string& fragment) {
    try {
      discretize(spec, rng);
      FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
    }
  };
  expect_error({"bad_uniform", Uniform{2.0, 2.0}, 3, false}, "lo < hi");
  expect_error({"bad_normal", Normal{0.0, 0.0}, 3, false}, "std > 0");
  expect_error({"no_samples", Uniform{0.0, 1.0}, 0, false}, "samples");
  expect_error({"too_many", Uniform{0.0, 3.0}, 5, true}, "samples");
}

TEST(ParameterSpace, ReferenceCardinality) {
  const ParameterSpace space(reference_specs(), 1);
  EXPECT_EQ(space.cardinality(), 100000u);
  EXPECT_EQ(space.bin_counts(), (std::vector<std::size_t>{10, 10, 25, 4, 10}));
}

TEST(ParameterSpace, DeterministicForSeed) {
  const ParameterSpace a(reference_specs(), 42);
  const ParameterSpace b(reference_specs(), 42);
  const ParameterSpace c(reference_specs(), 43);
  EXPECT_EQ(a.all_bins(), b.all_bins());
  EXPECT_EQ(a.fingerprint(), b.fingerprint());
  EXPECT_NE(a.all_bins(), c.all_bins());
  EXPECT_NE(a.fingerprint(), c.fingerprint());
}

TEST(ParameterSpace, BinsSortedAndSized) {
  const ParameterSpace space(reference_specs(), 9);
  for (std::size_t k = 0; k < space.size(); ++k) {
    EXPECT_EQ(space.bins(k).size(), space.spec(k).sample_count);
    EXPECT_TRUE(std::is_sorted(space.bins(k).begin(), space.bins(k).end()));
  }
}

TEST(ParameterSpace, DuplicateNamesRejected) {
  std::vector<ParameterSpec> specs{{"a", Uniform{0, 1}, 2, false}, {"a", Uniform{0, 1}, 2, false}};
  EXPECT_THROW(ParameterSpace(specs, 1), ConfigError);
}

TEST(Decode, Corners) {
  const ParameterSpace space(reference_specs(), 4);
  const auto lo = decode(space, std::vector<std::size_t>(5, 0));
  const auto hi = decode(space, std::vector<std::size_t>{9, 9, 24, 3, 9});
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_EQ(lo.values[k], space.bins(k).front());
    EXPECT_EQ(hi.values[k], space.bins(k).back());
  }
}

TEST(Decode, OutOfRangeNamesParameter) {
  const ParameterSpace space(reference_specs(), 4);
  try {
    decode(space, std::vector<std::size_t>{0, 0, 25, 0, 0});
    FAIL() << "expected BoundsError";
  } catch (const BoundsError& e) {
    EXPECT_NE(std::string(e.what()).find("ped_vel"), std::string::npos);
  }
}

TEST(Decode, RoundTripExhaustiveToySpace) {
  const auto space = toy_space({2, 2, 2});
  std::set<std::vector<double>> seen;
  for (std::uint64_t c = 0; c < space.cardinality(); ++c) {
    const auto idx = unravel(space, c);
    const auto s = decode(space, idx);
    EXPECT_EQ(decode(space, encode(space, s.values)), s);
    EXPECT_EQ(ravel(space, idx), c);
    seen.insert(s.values);
  }
  EXPECT_EQ(seen.size(), 8u);  // injective
}

TEST(Decode, MonotoneInIndex) {
  const ParameterSpace space(reference_specs(), 5);
  std::vector<std::size_t> idx(5, 0);
  for (std::size_t i = 1; i < 25; ++i) {
    auto prev = idx;
    prev[2] = i - 1;
    idx[2] = i;
    EXPECT_LE(decode(space, prev).values[2], decode(space, idx).values[2]);
  }
}

TEST(RandomScenario, SingleCellSpace) {
  const auto space = toy_space({1, 1, 1, 1, 1});
  Rng rng(0);
  const auto first = random_scenario(space, rng);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(random_scenario(space, rng), first);
}

TEST(RandomScenario, UniformOverGrid) {
  const auto space = toy_space({10, 10});
  Rng rng(2024);
  std::vector<int> counts(100, 0);
  constexpr int kDraws = 1'000'000;
  for (int i = 0; i < kDraws; ++i) counts[ravel(space, random_scenario(space, rng).indices)]++;
  const double expected = kDraws / 100.0;
  const double sigma = std::sqrt(kDraws * 0.01 * 0.99);
  double chi2 = 0.0;
  for (int c : counts) {
    EXPECT_LT(std::abs(c - expected), 3.0 * sigma);
    chi2 += (c - expected) * (c - expected) / expected;
  }
  // 99 degrees of freedom: the 0.999 quantile is about 148.2.
  EXPECT_LT(chi2, 148.2);
}

TEST(RandomScenario, ReferenceIndicesInRange) {
  const ParameterSpace space(reference_specs(), 1);
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const auto s = random_scenario(space, rng);
    for (std::size_t k = 0; k < 5; ++k) EXPECT_LT(s.indices[k], space.spec(k).sample_count);
  }
}
