#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mswres/error.hpp"
#include "mswres/numfmt.hpp"

namespace mswres {

using Complex = std::complex<double>;

/// Strictly increasing list of positive frequencies in Hz, at least two points.
class FrequencyGrid {
 public:
  explicit FrequencyGrid(std::vector<double> points) : points_(std::move(points)) {
    if (points_.size() < 2) throw InvariantError("frequency grid needs at least 2 points");
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (!(points_[i] > 0.0) || !std::isfinite(points_[i]))
        throw InvariantError("frequency grid values must be finite and > 0 (index " +
                             std::to_string(i) + ")");
      if (i > 0 && !(points_[i] > points_[i - 1]))
        throw InvariantError("frequency grid must be strictly increasing (index " +
                             std::to_string(i) + ")");
    }
  }

  /// `n` evenly spaced points from `start` to `stop` inclusive.
  static FrequencyGrid linear(double start, double stop, std::size_t n) {
    if (n < 2) throw InvariantError("linear grid needs n >= 2");
    std::vector<double> pts(n);
    const double step = (stop - start) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) pts[i] = start + step * static_cast<double>(i);
    pts.back() = stop;
    return FrequencyGrid(std::move(pts));
  }

  std::span<const double> points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  double operator[](std::size_t i) const { return points_[i]; }
  double front() const { return points_.front(); }
  double back() const { return points_.back(); }

  friend bool operator==(const FrequencyGrid&, const FrequencyGrid&) = default;

 private:
  std::vector<double> points_;
};

enum class SpectrumKind { Reflection, Impedance };

inline const char* to_string(SpectrumKind k) {
  return k == SpectrumKind::Reflection ? "reflection" : "impedance";
}

/// One-port frequency-domain data: S11 (dimensionless) or Z11 (ohms).
class ComplexSpectrum {
 public:
  ComplexSpectrum(FrequencyGrid grid, std::vector<Complex> values, SpectrumKind kind,
                  double z_ref = 50.0)
      : grid_(std::move(grid)), values_(std::move(values)), kind_(kind), z_ref_(z_ref) {
    if (values_.size() != grid_.size())
      throw InvariantError("spectrum has " + std::to_string(values_.size()) +
                           " values for " + std::to_string(grid_.size()) + " frequencies");
    if (!(z_ref_ > 0.0) || !std::isfinite(z_ref_))
      throw InvariantError("reference impedance must be > 0");
  }

  const FrequencyGrid& grid() const noexcept { return grid_; }
  std::span<const Complex> values() const noexcept { return values_; }
  SpectrumKind kind() const noexcept { return kind_; }
  double z_ref() const noexcept { return z_ref_; }
  std::size_t size() const noexcept { return values_.size(); }
  double frequency(std::size_t i) const { return grid_[i]; }
  const Complex& operator[](std::size_t i) const { return values_[i]; }

  // Comment lines carried over from a parsed file. Not part of equality.
  const std::vector<std::string>& comments() const noexcept { return comments_; }
  void set_comments(std::vector<std::string> c) { comments_ = std::move(c); }

  /// Largest |S| - 1 over the sweep (reflection data only; 0 for impedance).
  double max_passivity_excess() const {
    if (kind_ != SpectrumKind::Reflection) return 0.0;
    double worst = 0.0;
    for (const auto& v : values_) worst = std::max(worst, std::abs(v) - 1.0);
    return worst;
  }

  /// False when reflection data exceeds |S| = 1 + eps anywhere. Callers warn; never fatal.
  bool is_passive(double eps = 0.02) const { return max_passivity_excess() <= eps; }

  friend bool operator==(const ComplexSpectrum& a, const ComplexSpectrum& b) {
    return a.kind_ == b.kind_ && a.z_ref_ == b.z_ref_ && a.grid_ == b.grid_ &&
           a.values_ == b.values_;
  }

 private:
  FrequencyGrid grid_;
  std::vector<Complex> values_;
  SpectrumKind kind_;
  double z_ref_;
  std::vector<std::string> comments_;
};

struct BiasEntry {
  double bias_t;  // tesla
  ComplexSpectrum spectrum;
  bool branchless = false;  // bias at or below the MSW band edge
};

/// Spectra measured at several bias fields on one shared grid.
class BiasSweep {
 public:
  explicit BiasSweep(std::vector<BiasEntry> entries) : entries_(std::move(entries)) {
    for (std::size_t i = 1; i < entries_.size(); ++i) {
      if (!(entries_[i].bias_t > entries_[i - 1].bias_t))
        throw InvariantError("bias sweep must be sorted by strictly increasing bias");
      if (!(entries_[i].spectrum.grid() == entries_[0].spectrum.grid()))
        throw InvariantError("all spectra in a bias sweep must share one frequency grid");
    }
  }

  std::span<const BiasEntry> entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  const BiasEntry& operator[](std::size_t i) const { return entries_[i]; }

 private:
  std::vector<BiasEntry> entries_;
};

/// Z = z_ref (1 + S) / (1 - S), pointwise.
inline ComplexSpectrum s_to_z(const ComplexSpectrum& s) {
  if (s.kind() != SpectrumKind::Reflection)
    throw DomainError("s_to_z expects a reflection spectrum");
  std::vector<Complex> z(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Complex den = 1.0 - s[i];
    if (std::abs(den) < 1e-12)
      throw SingularPointError("S = 1 (open circuit) at " + format_double(s.frequency(i)) +
                                   " Hz; impedance is unbounded",
                               s.frequency(i));
    z[i] = s.z_ref() * (1.0 + s[i]) / den;
  }
  ComplexSpectrum out(s.grid(), std::move(z), SpectrumKind::Impedance, s.z_ref());
  out.set_comments(s.comments());
  return out;
}

/// S = (Z - z_ref) / (Z + z_ref), pointwise.
inline ComplexSpectrum z_to_s(const ComplexSpectrum& z) {
  if (z.kind() != SpectrumKind::Impedance)
    throw DomainError("z_to_s expects an impedance spectrum");
  std::vector<Complex> s(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const Complex den = z[i] + z.z_ref();
    if (den == Complex(0.0, 0.0))
      throw SingularPointError("Z = -z_ref at " + format_double(z.frequency(i)) + " Hz",
                               z.frequency(i));
    s[i] = (z[i] - z.z_ref()) / den;
  }
  ComplexSpectrum out(z.grid(), std::move(s), SpectrumKind::Reflection, z.z_ref());
  out.set_comments(z.comments());
  return out;
}

struct LossPoint {
  double frequency_hz;
  double loss;
};

/// Absorbed power fraction 1 - |S|^2. Non-passive points come out negative, unclamped.
inline std::vector<LossPoint> tline_loss(const ComplexSpectrum& s) {
  if (s.kind() != SpectrumKind::Reflection)
    throw DomainError("tline_loss expects a reflection spectrum");
  std::vector<LossPoint> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = {s.frequency(i), 1.0 - std::norm(s[i])};
  return out;
}

// CSV: header "freq_Hz,re,im", one row per point, shortest round-trip decimals.
inline void write_csv(std::ostream& os, const ComplexSpectrum& s) {
  os << "freq_Hz,re,im\r\n";
  for (std::size_t i = 0; i < s.size(); ++i)
    os << format_double(s.frequency(i)) << ',' << format_double(s[i].real()) << ','
       << format_double(s[i].imag()) << "\r\n";
}

inline ComplexSpectrum read_csv(std::istream& is, SpectrumKind kind, double z_ref = 50.0) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> f;
  std::vector<Complex> v;
  bool header_seen = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != "freq_Hz,re,im")
        throw Error("line " + std::to_string(line_no) + ": expected CSV header freq_Hz,re,im");
      header_seen = true;
      continue;
    }
    std::stringstream ss(line);
    std::string a, b, c, extra;
    std::getline(ss, a, ',');
    std::getline(ss, b, ',');
    std::getline(ss, c, ',');
    auto fa = parse_double(a), fb = parse_double(b), fc = parse_double(c);
    if (!fa || !fb || !fc || std::getline(ss, extra, ','))
      throw Error("line " + std::to_string(line_no) + ": malformed CSV row");
    f.push_back(*fa);
    v.emplace_back(*fb, *fc);
  }
  if (!header_seen) throw Error("empty CSV document");
  return ComplexSpectrum(FrequencyGrid(std::move(f)), std::move(v), kind, z_ref);
}

}  // namespace mswres
