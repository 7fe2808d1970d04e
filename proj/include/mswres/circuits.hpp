#pragma once

// Equivalent-circuit impedance models of hairclip MSW resonators.

#include <cmath>
#include <complex>
#include <limits>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mswres/error.hpp"
#include "mswres/spectra.hpp"

namespace mswres {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// MSW mode branch: R, L, C in parallel.
struct ParallelRLC {
  double r_m;
  double l_m;
  double c_m;

  void validate() const {
    if (!(r_m > 0.0) || !(l_m > 0.0) || !(c_m > 0.0))
      throw InvariantError("parallel RLC branch needs r_m, l_m, c_m > 0");
  }
  double resonance_hz() const { return 1.0 / (kTwoPi * std::sqrt(l_m * c_m)); }
  double q() const { return r_m * std::sqrt(c_m / l_m); }
  friend bool operator==(const ParallelRLC&, const ParallelRLC&) = default;
};

/// Self-resonant transducer: R, L, C in series.
struct SeriesLCR {
  double r_0;
  double l_0;
  double c_0;

  void validate() const {
    if (!(r_0 >= 0.0) || !(l_0 > 0.0) || !(c_0 > 0.0))
      throw InvariantError("series LCR needs r_0 >= 0 and l_0, c_0 > 0");
  }
  double resonance_hz() const { return 1.0 / (kTwoPi * std::sqrt(l_0 * c_0)); }
  friend bool operator==(const SeriesLCR&, const SeriesLCR&) = default;
};

/// Lossy transmission-line section. Attenuation scales as alpha * sqrt(f / f_ref).
struct TLineSection {
  double z_c;
  double alpha;       // total one-way attenuation at f_ref, nepers
  double beta_delay;  // one-way delay, s
  double f_ref = 10e9;

  void validate() const {
    if (!(z_c > 0.0) || !(alpha >= 0.0) || !(beta_delay > 0.0) || !(f_ref > 0.0))
      throw InvariantError("transmission line needs z_c > 0, alpha >= 0, beta_delay > 0");
  }
  friend bool operator==(const TLineSection&, const TLineSection&) = default;
};

enum class Topology { HygShortedLine, RhygSeries };

inline const char* to_string(Topology t) {
  return t == Topology::HygShortedLine ? "hyg" : "rhyg";
}

inline constexpr std::size_t kMaxBranches = 8;

class CircuitModel {
 public:
  /// Shorted line terminated by the series-connected MSW branches.
  static CircuitModel hyg(TLineSection line, std::vector<ParallelRLC> branches = {}) {
    CircuitModel m(Topology::HygShortedLine, line, std::nullopt, std::move(branches));
    m.validate();
    return m;
  }

  /// Series LCR transducer plus series-connected MSW branches.
  static CircuitModel rhyg(SeriesLCR series, std::vector<ParallelRLC> branches = {}) {
    CircuitModel m(Topology::RhygSeries, std::nullopt, series, std::move(branches));
    m.validate();
    return m;
  }

  Topology topology() const noexcept { return topology_; }
  const std::optional<TLineSection>& line() const noexcept { return line_; }
  const std::optional<SeriesLCR>& series() const noexcept { return series_; }
  std::span<const ParallelRLC> branches() const noexcept { return branches_; }

  CircuitModel with_branches(std::vector<ParallelRLC> branches) const {
    CircuitModel m(topology_, line_, series_, std::move(branches));
    m.validate();
    return m;
  }
  CircuitModel without_branches() const { return with_branches({}); }

  friend bool operator==(const CircuitModel&, const CircuitModel&) = default;

 private:
  CircuitModel(Topology t, std::optional<TLineSection> line, std::optional<SeriesLCR> series,
               std::vector<ParallelRLC> branches)
      : topology_(t), line_(line), series_(series), branches_(std::move(branches)) {}

  void validate() const {
    if (topology_ == Topology::HygShortedLine) {
      if (!line_ || series_) throw InvariantError("hyg topology needs a line and no series LCR");
      line_->validate();
    } else {
      if (!series_ || line_) throw InvariantError("rhyg topology needs a series LCR and no line");
      series_->validate();
    }
    if (branches_.size() > kMaxBranches)
      throw InvariantError("at most " + std::to_string(kMaxBranches) + " MSW branches");
    for (const auto& b : branches_) b.validate();
  }

  Topology topology_;
  std::optional<TLineSection> line_;
  std::optional<SeriesLCR> series_;
  std::vector<ParallelRLC> branches_;
};

inline Complex z_parallel_rlc(const ParallelRLC& b, double f) {
  const double w = kTwoPi * f;
  const Complex y(1.0 / b.r_m, w * b.c_m - 1.0 / (w * b.l_m));
  return 1.0 / y;
}

inline Complex z_series_lcr(const SeriesLCR& s, double f) {
  const double w = kTwoPi * f;
  return Complex(s.r_0, w * s.l_0 - 1.0 / (w * s.c_0));
}

namespace detail {

// tanh(a + jb) = (sinh 2a + j sin 2b) / (cosh 2a + cos 2b); saturates for large a.
inline Complex guarded_tanh(Complex x) {
  const double a = x.real(), b = x.imag();
  if (std::abs(a) > 20.0) return Complex(a > 0 ? 1.0 : -1.0, 0.0);
  const double den = std::cosh(2.0 * a) + std::cos(2.0 * b);
  if (den == 0.0) return Complex(0.0, std::numeric_limits<double>::infinity());
  return Complex(std::sinh(2.0 * a) / den, std::sin(2.0 * b) / den);
}

}  // namespace detail

/// Input impedance of a line of impedance z_c terminated in `load`.
inline Complex z_shorted_tline(const TLineSection& t, double f, Complex load = {}) {
  const Complex gl(t.alpha * std::sqrt(f / t.f_ref), kTwoPi * f * t.beta_delay);
  const Complex th = detail::guarded_tanh(gl);
  if (load == Complex(0.0, 0.0)) return t.z_c * th;
  if (!std::isfinite(th.real()) || !std::isfinite(th.imag())) return t.z_c * t.z_c / load;
  return t.z_c * (load + t.z_c * th) / (t.z_c + load * th);
}

inline Complex z_model_at(const CircuitModel& m, double f) {
  Complex branches{};
  for (const auto& b : m.branches()) branches += z_parallel_rlc(b, f);
  if (m.topology() == Topology::HygShortedLine) return z_shorted_tline(*m.line(), f, branches);
  return z_series_lcr(*m.series(), f) + branches;
}

/// Evaluates into `out` (same length as `freqs`); each point is independent.
inline void z_model_into(const CircuitModel& m, std::span<const double> freqs,
                         std::span<Complex> out) {
  for (std::size_t i = 0; i < freqs.size(); ++i) out[i] = z_model_at(m, freqs[i]);
}

inline ComplexSpectrum z_model(const CircuitModel& m, const FrequencyGrid& grid,
                               double z_ref = 50.0) {
  std::vector<Complex> z(grid.size());
  z_model_into(m, grid.points(), z);
  return ComplexSpectrum(grid, std::move(z), SpectrumKind::Impedance, z_ref);
}

// Flat parameter view used by the fitter and the model-file format.

inline std::vector<std::string> parameter_names(const CircuitModel& m) {
  std::vector<std::string> names;
  if (m.topology() == Topology::HygShortedLine)
    names = {"line.z_c", "line.alpha", "line.beta_delay"};
  else
    names = {"series.r_0", "series.l_0", "series.c_0"};
  for (std::size_t i = 0; i < m.branches().size(); ++i) {
    const std::string p = "branch" + std::to_string(i) + ".";
    names.push_back(p + "r_m");
    names.push_back(p + "l_m");
    names.push_back(p + "c_m");
  }
  return names;
}

inline std::vector<double> parameter_values(const CircuitModel& m) {
  std::vector<double> v;
  if (m.topology() == Topology::HygShortedLine)
    v = {m.line()->z_c, m.line()->alpha, m.line()->beta_delay};
  else
    v = {m.series()->r_0, m.series()->l_0, m.series()->c_0};
  for (const auto& b : m.branches()) {
    v.push_back(b.r_m);
    v.push_back(b.l_m);
    v.push_back(b.c_m);
  }
  return v;
}

/// Same topology and branch count as `m`, parameters taken from `v`.
inline CircuitModel with_parameter_values(const CircuitModel& m, std::span<const double> v) {
  if (v.size() != 3 + 3 * m.branches().size())
    throw InvariantError("parameter vector length does not match model");
  std::vector<ParallelRLC> br(m.branches().size());
  for (std::size_t i = 0; i < br.size(); ++i) br[i] = {v[3 + 3 * i], v[4 + 3 * i], v[5 + 3 * i]};
  if (m.topology() == Topology::HygShortedLine)
    return CircuitModel::hyg({v[0], v[1], v[2], m.line()->f_ref}, std::move(br));
  return CircuitModel::rhyg({v[0], v[1], v[2]}, std::move(br));
}

}  // namespace mswres
