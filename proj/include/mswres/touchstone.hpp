#pragma once

// Touchstone v1 one-port (.s1p) reader and writer.

#include <cctype>
#include <cmath>
#include <cstddef>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mswres/error.hpp"
#include "mswres/numfmt.hpp"
#include "mswres/spectra.hpp"

namespace mswres {

enum class TouchstoneFormat { RI, MA, DB };

inline const char* to_string(TouchstoneFormat f) {
  switch (f) {
    case TouchstoneFormat::RI: return "RI";
    case TouchstoneFormat::MA: return "MA";
    case TouchstoneFormat::DB: return "DB";
  }
  return "?";
}

class TouchstoneError : public Error {
 public:
  enum class Code {
    MalformedOptionLine,
    DuplicateOptionLine,
    MissingOptionLine,
    NonMonotonicFrequency,
    WrongPortCount,
    UnparseableRow,
    UnsupportedVersion,
    NoData,
  };

  TouchstoneError(Code code, std::size_t line, const std::string& msg)
      : Error(line ? "line " + std::to_string(line) + ": " + msg : msg),
        code_(code),
        line_(line) {}

  Code code() const noexcept { return code_; }
  /// 1-based line number, 0 when the error concerns the whole document.
  std::size_t line() const noexcept { return line_; }

 private:
  Code code_;
  std::size_t line_;
};

namespace detail {

inline std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

// Applies the unit exponent in decimal before rounding, so "1.5 GHz" and
// "1500 MHz" land on the same double.
inline std::optional<double> parse_scaled(std::string_view token, int exp10) {
  std::string mant(token);
  int e = exp10;
  auto epos = mant.find_first_of("eE");
  if (epos != std::string::npos) {
    auto ev = parse_double(std::string_view(mant).substr(epos + 1));
    if (!ev || *ev != std::floor(*ev) || std::abs(*ev) > 400) return std::nullopt;
    e += static_cast<int>(*ev);
    mant.resize(epos);
  }
  if (mant.empty() || mant.find_first_of("eEnNiI") != std::string::npos) return std::nullopt;
  return parse_double(mant + "e" + std::to_string(e));
}

}  // namespace detail

/// Parses a one-port Touchstone v1 document into a reflection spectrum in Hz.
inline ComplexSpectrum parse_touchstone(std::istream& in) {
  using Code = TouchstoneError::Code;
  int exp10 = 9;  // Touchstone default unit is GHz
  TouchstoneFormat format = TouchstoneFormat::MA;
  double z_ref = 50.0;
  bool have_options = false;
  std::vector<std::string> comments;
  std::vector<double> freqs;
  std::vector<Complex> values;

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto bang = line.find('!'); bang != std::string_view::npos) {
      comments.emplace_back(line.substr(bang + 1));
      line = line.substr(0, bang);
    }
    auto tokens = detail::split_ws(line);
    if (tokens.empty()) continue;

    if (tokens[0].front() == '[')
      throw TouchstoneError(Code::UnsupportedVersion, line_no,
                            "Touchstone v2 keyword '" + std::string(tokens[0]) +
                                "' found; only v1 one-port files are supported");

    if (tokens[0].front() == '#') {
      if (have_options)
        throw TouchstoneError(Code::DuplicateOptionLine, line_no, "second option line");
      if (!freqs.empty())
        throw TouchstoneError(Code::MalformedOptionLine, line_no,
                              "option line must precede the data");
      have_options = true;
      std::vector<std::string> opts;
      if (tokens[0].size() > 1) opts.push_back(detail::upper(tokens[0].substr(1)));
      for (std::size_t i = 1; i < tokens.size(); ++i) opts.push_back(detail::upper(tokens[i]));
      for (std::size_t i = 0; i < opts.size(); ++i) {
        const auto& t = opts[i];
        if (t == "HZ") exp10 = 0;
        else if (t == "KHZ") exp10 = 3;
        else if (t == "MHZ") exp10 = 6;
        else if (t == "GHZ") exp10 = 9;
        else if (t == "S") {}
        else if (t == "Y" || t == "Z" || t == "H" || t == "G")
          throw TouchstoneError(Code::MalformedOptionLine, line_no,
                                "parameter type '" + t + "' not supported; expected S");
        else if (t == "RI") format = TouchstoneFormat::RI;
        else if (t == "MA") format = TouchstoneFormat::MA;
        else if (t == "DB") format = TouchstoneFormat::DB;
        else if (t == "R") {
          if (i + 1 >= opts.size())
            throw TouchstoneError(Code::MalformedOptionLine, line_no,
                                  "option 'R' needs a reference resistance");
          auto r = parse_double(opts[++i]);
          if (!r || !(*r > 0.0))
            throw TouchstoneError(Code::MalformedOptionLine, line_no,
                                  "invalid reference resistance '" + opts[i] + "'");
          z_ref = *r;
        } else {
          throw TouchstoneError(Code::MalformedOptionLine, line_no,
                                "unrecognized option token '" + t + "'");
        }
      }
      continue;
    }

    if (!have_options)
      throw TouchstoneError(Code::MissingOptionLine, line_no, "data row before option line");

    if (tokens.size() != 3) {
      if (tokens.size() >= 5 && tokens.size() % 2 == 1)
        throw TouchstoneError(Code::WrongPortCount, line_no,
                              "row has " + std::to_string(tokens.size()) +
                                  " values; a one-port row has 3");
      throw TouchstoneError(Code::UnparseableRow, line_no,
                            "expected 3 values, found " + std::to_string(tokens.size()));
    }
    auto f = detail::parse_scaled(tokens[0], exp10);
    auto a = parse_double(tokens[1]);
    auto b = parse_double(tokens[2]);
    if (!f || !a || !b || !std::isfinite(*f) || !(*f > 0.0))
      throw TouchstoneError(Code::UnparseableRow, line_no, "cannot parse data row");
    if (!freqs.empty() && !(*f > freqs.back()))
      throw TouchstoneError(Code::NonMonotonicFrequency, line_no,
                            "frequency " + std::string(tokens[0]) +
                                " does not increase over the previous row");
    Complex v;
    switch (format) {
      case TouchstoneFormat::RI: v = Complex(*a, *b); break;
      case TouchstoneFormat::MA: v = std::polar(*a, *b * std::numbers::pi / 180.0); break;
      case TouchstoneFormat::DB:
        v = std::polar(std::pow(10.0, *a / 20.0), *b * std::numbers::pi / 180.0);
        break;
    }
    freqs.push_back(*f);
    values.push_back(v);
  }

  if (!have_options) throw TouchstoneError(Code::MissingOptionLine, 0, "no option line found");
  if (freqs.size() < 2)
    throw TouchstoneError(Code::NoData, 0, "at least 2 data rows are required");

  ComplexSpectrum out(FrequencyGrid(std::move(freqs)), std::move(values),
                      SpectrumKind::Reflection, z_ref);
  out.set_comments(std::move(comments));
  return out;
}

inline ComplexSpectrum parse_touchstone(std::string_view text) {
  std::istringstream is{std::string(text)};
  return parse_touchstone(is);
}

/// Writes frequencies in Hz with shortest round-trip decimals.
inline void write_touchstone(std::ostream& os, const ComplexSpectrum& s,
                             TouchstoneFormat format = TouchstoneFormat::RI) {
  if (s.kind() != SpectrumKind::Reflection)
    throw DomainError("write_touchstone needs reflection data; convert impedance with z_to_s");
  for (const auto& c : s.comments()) os << '!' << c << '\n';
  os << "# Hz S " << to_string(format) << " R " << format_double(s.z_ref()) << '\n';
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Complex v = s[i];
    double a = 0.0, b = 0.0;
    switch (format) {
      case TouchstoneFormat::RI: a = v.real(); b = v.imag(); break;
      case TouchstoneFormat::MA: a = std::abs(v); b = std::arg(v) * 180.0 / std::numbers::pi; break;
      case TouchstoneFormat::DB:
        a = 20.0 * std::log10(std::abs(v));
        b = std::arg(v) * 180.0 / std::numbers::pi;
        break;
    }
    os << format_double(s.frequency(i)) << ' ' << format_double(a) << ' ' << format_double(b)
       << '\n';
  }
}

inline std::string write_touchstone(const ComplexSpectrum& s,
                                    TouchstoneFormat format = TouchstoneFormat::RI) {
  std::ostringstream os;
  write_touchstone(os, s, format);
  return os.str();
}

}  // namespace mswres
