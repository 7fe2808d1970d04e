#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "mswres/touchstone.hpp"

using namespace mswres;
using Code = TouchstoneError::Code;

namespace {

std::string fixture(const std::string& name) {
  std::ifstream f(std::filesystem::path(MSWRES_FIXTURE_DIR) / name);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST(ParseTouchstone, RiIdentity) {
  const auto s = parse_touchstone("# GHz S RI R 50\n1.0 0.0 0.0\n2.0 0.0 0.0\n");
  EXPECT_EQ(s.kind(), SpectrumKind::Reflection);
  EXPECT_EQ(s.frequency(0), 1e9);
  EXPECT_EQ(s[0], Complex(0.0, 0.0));
  EXPECT_EQ(s.z_ref(), 50.0);
}

TEST(ParseTouchstone, MagnitudeAngleUnitCircle) {
  const auto s = parse_touchstone("# MHz S MA R 50\n500 1.0 180\n600 1.0 90\n");
  EXPECT_EQ(s.frequency(0), 5e8);
  EXPECT_NEAR(s[0].real(), -1.0, 1e-15);
  EXPECT_NEAR(s[0].imag(), 0.0, 1e-15);
  EXPECT_NEAR(s[1].imag(), 1.0, 1e-15);
}

TEST(ParseTouchstone, DecibelAngle) {
  const auto s = parse_touchstone("# Hz S DB R 50\n1e9 -6.0205999 0\n2e9 0 0\n");
  EXPECT_NEAR(s[0].real(), 0.5, 1e-8);
  EXPECT_NEAR(s[0].imag(), 0.0, 1e-15);
}

TEST(ParseTouchstone, DefaultsAndCaseInsensitiveOptions) {
  const auto d = parse_touchstone("#\n1 1 0\n2 1 90\n");
  EXPECT_EQ(d.frequency(0), 1e9);  // GHz
  EXPECT_NEAR(d[1].imag(), 1.0, 1e-15);  // MA
  EXPECT_EQ(d.z_ref(), 50.0);
  const auto l = parse_touchstone("# khz s ri r 75\n1 0.1 0\n2 0.2 0\n");
  EXPECT_EQ(l.frequency(1), 2e3);
  EXPECT_EQ(l.z_ref(), 75.0);
}

TEST(ParseTouchstone, CommentsPreservedButIgnoredForEquality) {
  const auto s = parse_touchstone("! vna export\n# GHz S RI R 50\n1 0 0 ! inline\n2 0 0\n");
  ASSERT_EQ(s.comments().size(), 2u);
  EXPECT_EQ(s.comments()[0], " vna export");
  EXPECT_EQ(s, parse_touchstone("# GHz S RI R 50\n1 0 0\n2 0 0\n"));
}

TEST(ParseTouchstone, CrlfLinesAccepted) {
  const auto s = parse_touchstone("# GHz S RI R 50\r\n1 0.5 0\r\n2 0.25 0\r\n");
  EXPECT_EQ(s[1], Complex(0.25, 0.0));
}

TEST(ParseTouchstone, ErrorsCarryCodeAndLine) {
  struct Case {
    const char* text;
    Code code;
    std::size_t line;
  };
  const Case cases[] = {
      {"# GHz S FOO R 50\n1 0 0\n2 0 0\n", Code::MalformedOptionLine, 1},
      {"# GHz S RI R\n1 0 0\n2 0 0\n", Code::MalformedOptionLine, 1},
      {"# GHz Z RI R 50\n1 0 0\n2 0 0\n", Code::MalformedOptionLine, 1},
      {"# GHz S RI R 50\n1 0 0\n# GHz S RI R 50\n2 0 0\n", Code::DuplicateOptionLine, 3},
      {"1 0 0\n# GHz S RI R 50\n", Code::MissingOptionLine, 1},
      {"# GHz S RI R 50\n2 0 0\n1 0 0\n", Code::NonMonotonicFrequency, 3},
      {"# GHz S RI R 50\n1 0 0\n2 0 0\n2 0 0\n", Code::NonMonotonicFrequency, 4},
      {"# GHz S RI R 50\n1 0 0 0 0\n", Code::WrongPortCount, 2},
      {"# GHz S RI R 50\n1 0 x\n", Code::UnparseableRow, 2},
      {"# GHz S RI R 50\n1 0\n", Code::UnparseableRow, 2},
      {"# GHz S RI R 50\n-1 0 0\n", Code::UnparseableRow, 2},
      {"[Version] 2.0\n", Code::UnsupportedVersion, 1},
      {"# GHz S RI R 50\n1 0 0\n", Code::NoData, 0},
      {"! only comments\n", Code::MissingOptionLine, 0},
  };
  for (const auto& c : cases) {
    try {
      parse_touchstone(c.text);
      ADD_FAILURE() << "no error for: " << c.text;
    } catch (const TouchstoneError& e) {
      EXPECT_EQ(e.code(), c.code) << c.text;
      EXPECT_EQ(e.line(), c.line) << c.text;
      if (c.line) EXPECT_NE(std::string(e.what()).find("line " + std::to_string(c.line)),
                            std::string::npos);
    }
  }
}

TEST(WriteTouchstone, ThreePointStructure) {
  const ComplexSpectrum s(FrequencyGrid({1e9, 2e9, 3e9}), {0.1, Complex(0.2, -0.3), -0.5},
                          SpectrumKind::Reflection);
  const std::string text = write_touchstone(s);
  std::istringstream is(text);
  std::string line;
  int options = 0, rows = 0;
  while (std::getline(is, line)) {
    if (line.rfind('#', 0) == 0) ++options;
    else if (!line.empty() && line[0] != '!') ++rows;
  }
  EXPECT_EQ(options, 1);
  EXPECT_EQ(rows, 3);
}

TEST(WriteTouchstone, ImpedanceRejected) {
  const ComplexSpectrum z(FrequencyGrid({1e9, 2e9}), {50.0, 60.0}, SpectrumKind::Impedance);
  EXPECT_THROW(write_touchstone(z), DomainError);
}

TEST(WriteTouchstone, RoundTripAllFormatsRandomData) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> mag(1e-4, 1.0), ph(-3.14159, 3.14159);
  std::vector<double> f;
  std::vector<Complex> v;
  for (int i = 0; i < 300; ++i) {
    f.push_back(1e9 + 3.7e6 * i + 0.001 * i * i);
    v.push_back(std::polar(mag(rng), ph(rng)));
  }
  const ComplexSpectrum s(FrequencyGrid(f), v, SpectrumKind::Reflection, 42.5);
  for (auto fmt : {TouchstoneFormat::RI, TouchstoneFormat::MA, TouchstoneFormat::DB}) {
    const auto back = parse_touchstone(write_touchstone(s, fmt));
    EXPECT_EQ(back.z_ref(), 42.5);
    ASSERT_EQ(back.size(), s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      EXPECT_LE(std::abs(back.frequency(i) - s.frequency(i)), 1e-9 * s.frequency(i));
      EXPECT_LE(std::abs(back[i] - s[i]), 1e-9);
    }
  }
  EXPECT_EQ(parse_touchstone(write_touchstone(s)), s);  // RI is bit-exact
}

TEST(Fixtures, AllUnitsGiveIdenticalGrids) {
  const auto ref = parse_touchstone(fixture("sweep_ri_hz.s1p"));
  for (const char* fmt : {"ri", "ma", "db"}) {
    const auto base = parse_touchstone(fixture(std::string("sweep_") + fmt + "_ghz.s1p"));
    for (const char* unit : {"hz", "khz", "mhz", "ghz"}) {
      const auto s = parse_touchstone(fixture(std::string("sweep_") + fmt + "_" + unit + ".s1p"));
      EXPECT_EQ(s.grid(), ref.grid()) << fmt << ' ' << unit;
      EXPECT_EQ(s, base) << fmt << ' ' << unit;
      for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(std::abs(s[i] - ref[i]), 0.0, 1e-12);
    }
  }
}

TEST(Fixtures, MalformedCorpusDesignatedErrors) {
  const std::pair<const char*, std::pair<Code, std::size_t>> cases[] = {
      {"bad_option_line.s1p", {Code::MalformedOptionLine, 2}},
      {"duplicate_option_line.s1p", {Code::DuplicateOptionLine, 4}},
      {"missing_option_line.s1p", {Code::MissingOptionLine, 3}},
      {"non_monotonic.s1p", {Code::NonMonotonicFrequency, 5}},
      {"wrong_port_count.s1p", {Code::WrongPortCount, 3}},
      {"unparseable_row.s1p", {Code::UnparseableRow, 4}},
  };
  for (const auto& [name, expect] : cases) {
    try {
      parse_touchstone(fixture(name));
      ADD_FAILURE() << name << " parsed";
    } catch (const TouchstoneError& e) {
      EXPECT_EQ(e.code(), expect.first) << name;
      EXPECT_EQ(e.line(), expect.second) << name;
    }
  }
}
