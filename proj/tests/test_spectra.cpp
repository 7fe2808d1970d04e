#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "mswres/spectra.hpp"

using namespace mswres;

namespace {

ComplexSpectrum reflection(std::vector<Complex> v, double z_ref = 50.0) {
  std::vector<double> f;
  for (std::size_t i = 0; i < v.size(); ++i) f.push_back(1e9 * static_cast<double>(i + 1));
  return ComplexSpectrum(FrequencyGrid(f), std::move(v), SpectrumKind::Reflection, z_ref);
}

ComplexSpectrum impedance(std::vector<Complex> v, double z_ref = 50.0) {
  std::vector<double> f;
  for (std::size_t i = 0; i < v.size(); ++i) f.push_back(1e9 * static_cast<double>(i + 1));
  return ComplexSpectrum(FrequencyGrid(f), std::move(v), SpectrumKind::Impedance, z_ref);
}

}  // namespace

TEST(FrequencyGrid, RejectsShortUnorderedOrNonPositive) {
  EXPECT_THROW(FrequencyGrid({1e9}), InvariantError);
  EXPECT_THROW(FrequencyGrid({2e9, 1e9}), InvariantError);
  EXPECT_THROW(FrequencyGrid({1e9, 1e9}), InvariantError);
  EXPECT_THROW(FrequencyGrid({0.0, 1e9}), InvariantError);
  EXPECT_THROW(FrequencyGrid({-1.0, 1e9}), InvariantError);
  EXPECT_NO_THROW(FrequencyGrid({1.0, 2.0}));
}

TEST(FrequencyGrid, LinearEndpointsExact) {
  const auto g = FrequencyGrid::linear(1e9, 20e9, 20001);
  EXPECT_EQ(g.size(), 20001u);
  EXPECT_EQ(g.front(), 1e9);
  EXPECT_EQ(g.back(), 20e9);
}

TEST(ComplexSpectrum, LengthAndReferenceInvariants) {
  const FrequencyGrid g({1e9, 2e9});
  EXPECT_THROW(ComplexSpectrum(g, {Complex(0, 0)}, SpectrumKind::Reflection), InvariantError);
  EXPECT_THROW(ComplexSpectrum(g, {0.0, 0.0}, SpectrumKind::Reflection, 0.0), InvariantError);
  EXPECT_THROW(ComplexSpectrum(g, {}, SpectrumKind::Reflection), InvariantError);
}

TEST(ComplexSpectrum, PassivityIsAWarningNotAnError) {
  const auto s = reflection({1.01, 0.5});
  EXPECT_TRUE(s.is_passive());
  const auto hot = reflection({1.05, 0.5});
  EXPECT_FALSE(hot.is_passive());
  EXPECT_NEAR(hot.max_passivity_excess(), 0.05, 1e-12);
  EXPECT_TRUE(hot.is_passive(0.1));
}

TEST(BiasSweep, BiasesSortedDistinctSharedGrid) {
  const auto a = reflection({0.1, 0.2});
  const auto b = reflection({0.1, 0.2, 0.3});
  EXPECT_NO_THROW(BiasSweep({{0.3, a, false}, {0.4, a, false}}));
  EXPECT_THROW(BiasSweep({{0.4, a, false}, {0.3, a, false}}), InvariantError);
  EXPECT_THROW(BiasSweep({{0.4, a, false}, {0.4, a, false}}), InvariantError);
  EXPECT_THROW(BiasSweep({{0.3, a, false}, {0.4, b, false}}), InvariantError);
}

TEST(SToZ, MatchedShortAndRealLoad) {
  const auto z = s_to_z(reflection({0.0, -1.0, 0.5}));
  EXPECT_EQ(z.kind(), SpectrumKind::Impedance);
  EXPECT_NEAR(std::abs(z[0] - Complex(50, 0)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(z[1]), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(z[2] - Complex(150, 0)), 0.0, 1e-12);
}

TEST(SToZ, OpenCircuitIsSingularAndNamesFrequency) {
  try {
    s_to_z(reflection({0.0, 1.0}));
    FAIL() << "expected a singular-point error";
  } catch (const SingularPointError& e) {
    EXPECT_EQ(e.frequency(), 2e9);
    EXPECT_NE(std::string(e.what()).find("2e+09"), std::string::npos);
  }
}

TEST(ZToS, MatchedShortAndRealLoad) {
  const auto s = z_to_s(impedance({50.0, 0.0, 150.0}));
  EXPECT_EQ(s.kind(), SpectrumKind::Reflection);
  EXPECT_NEAR(std::abs(s[0]), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(s[1] - Complex(-1, 0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(s[2] - Complex(0.5, 0)), 0.0, 1e-15);
}

TEST(ZToS, MinusReferenceIsSingular) {
  EXPECT_THROW(z_to_s(impedance({10.0, -50.0})), SingularPointError);
}

TEST(Conversions, KindIsChecked) {
  EXPECT_THROW(s_to_z(impedance({1.0, 2.0})), DomainError);
  EXPECT_THROW(z_to_s(reflection({0.1, 0.2})), DomainError);
}

TEST(Conversions, RoundTripsOnRandomNonSingularData) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Complex> v;
    for (int i = 0; i < 16; ++i) {
      Complex x(u(rng), u(rng));
      if (std::abs(x) > 0.99) x *= 0.99 / std::abs(x);
      v.push_back(x);
    }
    const auto s = reflection(v, 25.0 + 50.0 * (u(rng) + 1.0));
    const auto back = z_to_s(s_to_z(s));
    for (std::size_t i = 0; i < v.size(); ++i)
      EXPECT_LE(std::abs(back[i] - s[i]), 1e-12 * std::max(1.0, std::abs(s[i])));

    const auto z = s_to_z(s);
    const auto zz = s_to_z(z_to_s(z));
    for (std::size_t i = 0; i < v.size(); ++i)
      EXPECT_LE(std::abs(zz[i] - z[i]), 1e-12 * std::max(1.0, std::abs(z[i])));
  }
}

TEST(TlineLoss, Examples) {
  const auto loss = tline_loss(reflection({0.0, -1.0, Complex(0.6, 0.8) * 0.5}));
  ASSERT_EQ(loss.size(), 3u);
  EXPECT_DOUBLE_EQ(loss[0].loss, 1.0);
  EXPECT_DOUBLE_EQ(loss[1].loss, 0.0);
  EXPECT_NEAR(loss[2].loss, 0.75, 1e-15);
  EXPECT_EQ(loss[2].frequency_hz, 3e9);
}

TEST(TlineLoss, StaysInUnitIntervalForPassiveData) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> mag(0.0, 1.0), ph(-3.2, 3.2);
  std::vector<Complex> v;
  for (int i = 0; i < 500; ++i) v.push_back(std::polar(mag(rng), ph(rng)));
  for (const auto& p : tline_loss(reflection(v))) {
    EXPECT_GE(p.loss, 0.0);
    EXPECT_LE(p.loss, 1.0);
  }
}

TEST(TlineLoss, ActiveDataReportedAsIs) {
  const auto loss = tline_loss(reflection({1.1, 0.0}));
  EXPECT_NEAR(loss[0].loss, 1.0 - 1.21, 1e-12);
}

TEST(Csv, HeaderCrlfAndRoundTrip) {
  const auto s = reflection({Complex(0.125, -0.5), Complex(1.0 / 3.0, 2e-17)});
  std::ostringstream os;
  write_csv(os, s);
  const std::string text = os.str();
  EXPECT_EQ(text.rfind("freq_Hz,re,im\r\n", 0), 0u);
  EXPECT_EQ(text.find(';'), std::string::npos);
  std::istringstream is(text);
  const auto back = read_csv(is, SpectrumKind::Reflection);
  EXPECT_EQ(back, s);
}

TEST(Csv, MissingHeaderRejected) {
  std::istringstream is("1e9,0,0\r\n2e9,0,0\r\n");
  EXPECT_THROW(read_csv(is, SpectrumKind::Reflection), Error);
}
