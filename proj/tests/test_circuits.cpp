#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "mswres/circuits.hpp"
#include "mswres/model_io.hpp"
#include "mswres/units.hpp"

using namespace mswres;

namespace {

double series_c_for(double l, double f0) {
  const double w = kTwoPi * f0;
  return 1.0 / (w * w * l);
}

std::vector<std::size_t> local_extrema(const ComplexSpectrum& z, bool maxima) {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i + 1 < z.size(); ++i) {
    const double a = std::abs(z[i - 1]), b = std::abs(z[i]), c = std::abs(z[i + 1]);
    if (maxima ? (b > a && b > c) : (b < a && b < c)) out.push_back(i);
  }
  return out;
}

}  // namespace

TEST(ParallelRLC, ResonanceIsPureResistance) {
  const ParallelRLC b{500.0, 0.5e-9, 200e-15};
  const double f0 = 1.0 / (kTwoPi * std::sqrt(0.5e-9 * 200e-15));
  EXPECT_NEAR(f0, 15.915494e9, 1e3);
  EXPECT_DOUBLE_EQ(b.resonance_hz(), f0);
  const Complex z = z_parallel_rlc(b, f0);
  EXPECT_NEAR(z.real(), 500.0, 1e-9);
  EXPECT_NEAR(z.imag(), 0.0, 1e-9);
  EXPECT_NEAR(std::abs(z), 500.0, 1e-9);
  EXPECT_NEAR(b.q(), 10.0, 1e-12);
}

TEST(ParallelRLC, InductorShortsAtLowFrequency) {
  const ParallelRLC b{500.0, 0.5e-9, 200e-15};
  EXPECT_LT(std::abs(z_parallel_rlc(b, 1e3)), 1e-5);
}

TEST(ParallelRLC, InvariantsRejectNonPositive) {
  EXPECT_THROW(CircuitModel::rhyg({1, 1e-9, 1e-12}, {{0.0, 1e-9, 1e-12}}), InvariantError);
  EXPECT_THROW(CircuitModel::rhyg({1, 1e-9, 1e-12}, {{1.0, -1e-9, 1e-12}}), InvariantError);
  EXPECT_THROW(CircuitModel::rhyg({1, 1e-9, 1e-12}, {{1.0, 1e-9, 0.0}}), InvariantError);
}

TEST(SeriesLCR, ResonanceIsResistanceMinimum) {
  const SeriesLCR s{1.0, 1e-9, 1e-12};
  const Complex z = z_series_lcr(s, 5.0329e9);
  EXPECT_NEAR(z.real(), 1.0, 1e-12);
  EXPECT_NEAR(z.imag(), 0.0, 0.01);
  const double f0 = s.resonance_hz();
  EXPECT_NEAR(std::abs(z_series_lcr(s, f0) - Complex(1.0, 0.0)), 0.0, 1e-9);
  EXPECT_GT(std::abs(z_series_lcr(s, 1e3)), 1e7);
}

TEST(SeriesLCR, ZeroResistanceAllowedNegativeRejected) {
  EXPECT_NO_THROW(CircuitModel::rhyg({0.0, 1e-9, 1e-12}));
  EXPECT_THROW(CircuitModel::rhyg({-1.0, 1e-9, 1e-12}), InvariantError);
}

TEST(ShortedLine, QuarterWaveIsOpen) {
  const double f = 10e9;
  const TLineSection t{50.0, 0.0, 0.25 / f};
  EXPECT_GT(std::abs(z_shorted_tline(t, f)), 1e12);
}

TEST(ShortedLine, ZeroLengthIsShort) {
  const TLineSection t{50.0, 0.0, 1e-18};
  EXPECT_LT(std::abs(z_shorted_tline(t, 1e6)), 1e-9);
}

TEST(ShortedLine, EighthWaveGivesReactanceEqualToZc) {
  const double f = 4e9;
  const TLineSection t{75.0, 0.0, 0.125 / f};
  const Complex z = z_shorted_tline(t, f);
  EXPECT_NEAR(z.real(), 0.0, 1e-9);
  EXPECT_NEAR(z.imag(), 75.0, 1e-9);
}

TEST(ShortedLine, LargeLossSaturatesToCharacteristicImpedance) {
  const TLineSection t{50.0, 1e6, 1e-10};
  const Complex z = z_shorted_tline(t, 10e9);
  EXPECT_TRUE(std::isfinite(z.real()));
  EXPECT_NEAR(std::abs(z - Complex(50.0, 0.0)), 0.0, 1e-9);
}

TEST(ShortedLine, LoadEqualToZcIsMatched) {
  const TLineSection t{50.0, 0.3, 3.3e-11};
  for (double f : {1e9, 7e9, 13e9})
    EXPECT_NEAR(std::abs(z_shorted_tline(t, f, Complex(50.0, 0.0)) - 50.0), 0.0, 1e-9);
}

TEST(ZModel, RhygWithoutBranchesEqualsSeriesLCR) {
  const SeriesLCR s{2.0, 0.8e-9, series_c_for(0.8e-9, 10.5e9)};
  const auto g = FrequencyGrid::linear(1e9, 20e9, 101);
  const auto z = z_model(CircuitModel::rhyg(s), g);
  EXPECT_EQ(z.kind(), SpectrumKind::Impedance);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(z[i], z_series_lcr(s, g[i]));
}

TEST(ZModel, LosslessHygIsPurelyReactive) {
  const auto m = CircuitModel::hyg({50.0, 0.0, 20e-12});
  const auto z = z_model(m, FrequencyGrid::linear(0.5e9, 20e9, 400));
  for (const auto& v : z.values()) EXPECT_LE(std::abs(v.real()), 1e-9 * std::abs(v));
}

TEST(ZModel, RhygWithBranchShowsMaxBetweenTwoMinima) {
  const double l0 = 0.8e-9, cm = 2e-12;
  const double lm = 1.0 / std::pow(kTwoPi * 10.4e9, 2) / cm;
  const auto m = CircuitModel::rhyg({2.0, l0, series_c_for(l0, 10.5e9)}, {{2000.0, lm, cm}});
  const auto z = z_model(m, FrequencyGrid::linear(5e9, 15e9, 100001));
  const auto maxima = local_extrema(z, true);
  const auto minima = local_extrema(z, false);
  ASSERT_EQ(maxima.size(), 1u);
  ASSERT_EQ(minima.size(), 2u);
  EXPECT_LT(minima[0], maxima[0]);
  EXPECT_GT(minima[1], maxima[0]);
}

TEST(ZModel, BranchAdditivity) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto g = FrequencyGrid::linear(1e9, 20e9, 257);
  for (int trial = 0; trial < 50; ++trial) {
    const SeriesLCR s{5 * u(rng), 1e-9 * (0.2 + u(rng)), 1e-12 * (0.1 + u(rng))};
    const ParallelRLC a{100 + 5000 * u(rng), 1e-10 * (0.1 + u(rng)), 1e-12 * (0.1 + u(rng))};
    const ParallelRLC b{100 + 5000 * u(rng), 1e-10 * (0.1 + u(rng)), 1e-12 * (0.1 + u(rng))};
    const auto ab = CircuitModel::rhyg(s, {a, b});
    const auto only_a = CircuitModel::rhyg(s, {a});
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Complex lhs = z_model_at(ab, g[i]);
      const Complex rhs = z_model_at(only_a, g[i]) + z_parallel_rlc(b, g[i]);
      EXPECT_LE(std::abs(lhs - rhs), 1e-12 * std::max(1.0, std::abs(lhs)));
    }
  }
}

TEST(ZModel, ShortedBranchConvergesToBranchless) {
  const SeriesLCR s{2.0, 0.8e-9, 2.9e-13};
  const TLineSection t{50.0, 0.2, 2e-11};
  const auto g = FrequencyGrid::linear(1e9, 20e9, 64);
  double prev_r = 0.0, prev_l = 0.0;
  for (double r : {1.0, 1e-3, 1e-6, 1e-9}) {
    const ParallelRLC b{r, 1e-10, 1e-12};
    double worst_r = 0.0, worst_l = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      worst_r = std::max(worst_r, std::abs(z_model_at(CircuitModel::rhyg(s, {b}), g[i]) -
                                           z_series_lcr(s, g[i])));
      worst_l = std::max(worst_l, std::abs(z_model_at(CircuitModel::hyg(t, {b}), g[i]) -
                                           z_shorted_tline(t, g[i])));
    }
    EXPECT_LE(worst_r, r * 1.0000001);
    if (prev_r > 0.0) {
      EXPECT_LT(worst_r, prev_r);
      EXPECT_LT(worst_l, prev_l);
    }
    prev_r = worst_r;
    prev_l = worst_l;
  }
  EXPECT_LT(prev_r, 1e-8);
  EXPECT_LT(prev_l, 1e-6);
}

TEST(ZModel, PassiveForRandomValidParameters) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto g = FrequencyGrid::linear(0.1e9, 30e9, 500);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ParallelRLC> br;
    for (int k = 0; k < 1 + trial % 3; ++k)
      br.push_back({10 + 1e4 * u(rng), 1e-11 * (0.1 + 10 * u(rng)), 1e-13 * (0.1 + 50 * u(rng))});
    const auto hyg = CircuitModel::hyg({10 + 100 * u(rng), 2 * u(rng), 1e-11 * (0.1 + 5 * u(rng))}, br);
    const auto rhyg = CircuitModel::rhyg({5 * u(rng), 1e-9 * (0.1 + u(rng)), 1e-12 * (0.05 + u(rng))}, br);
    for (const auto* m : {&hyg, &rhyg})
      for (double f : g.points()) {
        const Complex z = z_model_at(*m, f);
        EXPECT_GE(z.real(), -1e-9 * std::abs(z));
      }
  }
}

TEST(ZModel, LumpedElementsAreConjugateSymmetric) {
  const SeriesLCR s{2.0, 0.8e-9, 2.9e-13};
  const ParallelRLC b{700.0, 1e-10, 2e-12};
  const auto m = CircuitModel::rhyg(s, {b});
  for (double f : {1e9, 9.3e9, 17e9}) {
    EXPECT_LE(std::abs(z_parallel_rlc(b, -f) - std::conj(z_parallel_rlc(b, f))), 1e-9);
    EXPECT_LE(std::abs(z_series_lcr(s, -f) - std::conj(z_series_lcr(s, f))), 1e-9);
    EXPECT_LE(std::abs(z_model_at(m, -f) - std::conj(z_model_at(m, f))), 1e-9);
  }
}

TEST(CircuitModel, TopologyAndBranchCap) {
  const ParallelRLC b{1, 1e-10, 1e-12};
  EXPECT_NO_THROW(CircuitModel::rhyg({1, 1e-9, 1e-12}, std::vector<ParallelRLC>(8, b)));
  EXPECT_THROW(CircuitModel::rhyg({1, 1e-9, 1e-12}, std::vector<ParallelRLC>(9, b)), InvariantError);
  EXPECT_THROW(CircuitModel::hyg({0.0, 0.1, 1e-11}), InvariantError);
  EXPECT_THROW(CircuitModel::hyg({50.0, -0.1, 1e-11}), InvariantError);
  EXPECT_THROW(CircuitModel::hyg({50.0, 0.1, 0.0}), InvariantError);
  const auto h = CircuitModel::hyg({50.0, 0.1, 1e-11}, {b});
  EXPECT_TRUE(h.line().has_value());
  EXPECT_FALSE(h.series().has_value());
}

TEST(CircuitModel, ParameterViewRoundTrip) {
  const auto m = CircuitModel::hyg({50.0, 0.1, 1e-11}, {{1, 1e-10, 1e-12}, {2, 2e-10, 3e-12}});
  const auto names = parameter_names(m);
  ASSERT_EQ(names.size(), 9u);
  EXPECT_EQ(names[0], "line.z_c");
  EXPECT_EQ(names[8], "branch1.c_m");
  const auto v = parameter_values(m);
  EXPECT_EQ(with_parameter_values(m, v), m);
  EXPECT_THROW(with_parameter_values(m, std::vector<double>(3, 1.0)), InvariantError);
}

TEST(ModelIo, JsonRoundTripAndEngineeringSuffixes) {
  const Json j = Json::parse(R"({
    "topology": "rhyg",
    "series": {"r_0": 2, "l_0": "0.8n", "c_0": "287.19f"},
    "msw_branches": [{"r_m": "2k", "l_m": "0.1n", "c_m": "2p"}]
  })");
  const auto m = model_from_json(j);
  EXPECT_DOUBLE_EQ(m.series()->l_0, 0.8e-9);
  EXPECT_DOUBLE_EQ(m.series()->c_0, 287.19e-15);
  EXPECT_DOUBLE_EQ(m.branches()[0].r_m, 2000.0);
  EXPECT_EQ(model_from_json(model_to_json(m)), m);

  const auto h = CircuitModel::hyg({50.0, 0.1, 1e-11, 10e9});
  EXPECT_EQ(model_from_json(model_to_json(h)), h);
}

TEST(ModelIo, RejectsInconsistentDocuments) {
  EXPECT_THROW(model_from_json(Json::parse(R"({"topology":"bvd"})")), InvariantError);
  EXPECT_THROW(model_from_json(Json::parse(R"({"topology":"hyg"})")), InvariantError);
  EXPECT_THROW(model_from_json(Json::parse(
                   R"({"topology":"rhyg","series":{"r_0":1,"l_0":1e-9,"c_0":1e-12},"line":{}})")),
               InvariantError);
  EXPECT_THROW(model_from_json(Json::parse(
                   R"({"topology":"rhyg","series":{"r_0":1,"l_0":-1e-9,"c_0":1e-12}})")),
               InvariantError);
}

TEST(Units, EngineeringSuffixes) {
  EXPECT_DOUBLE_EQ(parse_engineering("0.8n"), 0.8e-9);
  EXPECT_DOUBLE_EQ(parse_engineering("200f"), 200e-15);
  EXPECT_DOUBLE_EQ(parse_engineering("2p"), 2e-12);
  EXPECT_DOUBLE_EQ(parse_engineering("4.7u"), 4.7e-6);
  EXPECT_DOUBLE_EQ(parse_engineering("3m"), 3e-3);
  EXPECT_DOUBLE_EQ(parse_engineering("2k"), 2e3);
  EXPECT_DOUBLE_EQ(parse_engineering("10.5G"), 10.5e9);
  EXPECT_DOUBLE_EQ(parse_engineering("1M"), 1e6);
  EXPECT_DOUBLE_EQ(parse_engineering("1e3"), 1e3);
  EXPECT_THROW(parse_engineering(""), InvariantError);
  EXPECT_THROW(parse_engineering("abc"), InvariantError);
  EXPECT_THROW(parse_engineering("1x"), InvariantError);
}
