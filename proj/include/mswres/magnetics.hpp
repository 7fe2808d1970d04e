#pragma once

// Bias-field tuning of the MSW branch, photon-magnon anti-crossing and
// synthetic bias sweeps.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "mswres/circuits.hpp"
#include "mswres/error.hpp"
#include "mswres/extraction.hpp"
#include "mswres/spectra.hpp"

namespace mswres {

/// Linear MSW frequency law f = gamma_eff (B - b_off).
struct TuningModel {
  double gamma_eff = 29.9e9;  // Hz/T
  double b_off = 0.193;       // T

  void validate() const {
    if (!(gamma_eff > 0.0) || !(b_off >= 0.0))
      throw InvariantError("tuning model needs gamma_eff > 0 and b_off >= 0");
  }
};

class BelowBandError : public Error {
 public:
  using Error::Error;
};

inline double msw_frequency(const TuningModel& t, double bias_t) {
  t.validate();
  if (!(bias_t > t.b_off))
    throw BelowBandError("bias " + format_double(bias_t) + " T is at or below the band offset " +
                         format_double(t.b_off) + " T");
  return t.gamma_eff * (bias_t - t.b_off);
}

struct TuningCalibration {
  TuningModel model;
  std::vector<double> relative_residuals;  // (fit - measured) / measured
};

/// Ordinary least squares of frequency on bias.
inline TuningCalibration calibrate_tuning(std::span<const std::pair<double, double>> pairs) {
  if (pairs.size() < 2) throw DomainError("tuning calibration needs at least 2 (bias, f) pairs");
  const double n = static_cast<double>(pairs.size());
  double mb = 0.0, mf = 0.0;
  for (const auto& [b, f] : pairs) {
    mb += b;
    mf += f;
  }
  mb /= n;
  mf /= n;
  double sbb = 0.0, sbf = 0.0;
  for (const auto& [b, f] : pairs) {
    sbb += (b - mb) * (b - mb);
    sbf += (b - mb) * (f - mf);
  }
  if (!(sbb > 0.0)) throw DomainError("tuning calibration needs distinct bias values");
  const double slope = sbf / sbb;
  const double intercept = mf - slope * mb;
  TuningModel m{slope, -intercept / slope};
  m.validate();
  TuningCalibration out{m, {}};
  for (const auto& [b, f] : pairs) out.relative_residuals.push_back((slope * b + intercept - f) / f);
  return out;
}

/// Fixed photon (circuit) resonance f_c coupled at rate g to a magnon mode.
struct CoupledModes {
  double f_c;
  double g;

  void validate() const {
    if (!(f_c > 0.0) || !(g >= 0.0)) throw InvariantError("coupled modes need f_c > 0, g >= 0");
  }
};

struct Eigenfrequencies {
  double f_minus;
  double f_plus;
};

inline Eigenfrequencies anticross_eigenfreqs(const CoupledModes& c, double f_m) {
  c.validate();
  if (!(f_m > 0.0)) throw DomainError("magnon frequency must be > 0");
  const double mean = 0.5 * (c.f_c + f_m);
  const double half = 0.5 * (c.f_c - f_m);
  const double s = std::hypot(half, c.g);
  return {mean - s, mean + s};
}

/// Coupling of a series-LCR transducer to an MSW branch. Near the crossing
/// the reactance zeros obey (w - wc)(w - wm) = 1 / (4 L0 Cm), so
/// g = 1 / (4 pi sqrt(L0 Cm)) in Hz.
inline CoupledModes coupled_modes(const CircuitModel& m) {
  if (m.topology() != Topology::RhygSeries || m.branches().empty())
    throw DomainError("coupled modes need an rhyg model with one MSW branch");
  const auto& s = *m.series();
  return {s.resonance_hz(), 1.0 / (2.0 * kTwoPi * std::sqrt(s.l_0 * m.branches()[0].c_m))};
}

/// Branch capacitance that realizes coupling rate g (Hz) against series inductance l_0.
inline double branch_capacitance_for_coupling(double l_0, double g_hz) {
  const double wg = kTwoPi * g_hz;
  return 1.0 / (4.0 * l_0 * wg * wg);
}

/// Copy of `m` with the branch inductances rescaled so branch 0 resonates at
/// the tuned frequency; other branches keep their frequency ratio to branch 0.
/// Returns the branchless model when the bias is below band.
inline std::optional<CircuitModel> tuned_model(const CircuitModel& m, const TuningModel& t,
                                               double bias_t) {
  if (m.branches().empty()) throw DomainError("tuned_model needs at least one MSW branch");
  if (!(bias_t > t.b_off)) return std::nullopt;
  const double f0 = msw_frequency(t, bias_t);
  const double ref = m.branches()[0].resonance_hz();
  std::vector<ParallelRLC> br(m.branches().begin(), m.branches().end());
  for (auto& b : br) {
    const double w = kTwoPi * f0 * (b.resonance_hz() / ref);
    b.l_m = 1.0 / (w * w * b.c_m);
  }
  return m.with_branches(std::move(br));
}

struct NoiseSpec {
  double snr_db = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;
};

/// Adds circular complex Gaussian noise to S with total power mean|S|^2 / 10^(snr/10).
inline ComplexSpectrum add_noise(const ComplexSpectrum& s, double snr_db, std::mt19937_64& rng) {
  if (!std::isfinite(snr_db)) return s;
  double p = 0.0;
  for (const auto& v : s.values()) p += std::norm(v);
  p /= static_cast<double>(s.size());
  const double sigma = std::sqrt(p / std::pow(10.0, snr_db / 10.0) / 2.0);
  std::normal_distribution<double> gauss(0.0, sigma);
  std::vector<Complex> v(s.values().begin(), s.values().end());
  for (auto& x : v) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    x += Complex(re, im);
  }
  return ComplexSpectrum(s.grid(), std::move(v), s.kind(), s.z_ref());
}

inline BiasSweep synth_sweep(const CircuitModel& model, const TuningModel& tuning,
                             std::span<const double> biases, const FrequencyGrid& grid,
                             const NoiseSpec& noise = {}, double z_ref = 50.0) {
  if (model.branches().empty()) throw DomainError("synth_sweep needs at least one MSW branch");
  tuning.validate();
  std::mt19937_64 rng(noise.seed);
  std::vector<BiasEntry> entries;
  for (double b : biases) {
    const auto tuned = tuned_model(model, tuning, b);
    const CircuitModel eval = tuned ? *tuned : model.without_branches();
    auto s = z_to_s(z_model(eval, grid, z_ref));
    s = add_noise(s, noise.snr_db, rng);
    entries.push_back({b, std::move(s), !tuned.has_value()});
  }
  return BiasSweep(std::move(entries));
}

/// |Z| on the bias x frequency lattice, row-major with one row per bias.
struct Heatmap {
  std::vector<double> biases;
  std::vector<double> freqs;
  std::vector<double> magnitude;

  double at(std::size_t bias_index, std::size_t freq_index) const {
    return magnitude[bias_index * freqs.size() + freq_index];
  }
};

inline Heatmap heatmap(const CircuitModel& model, const TuningModel& tuning,
                       std::span<const double> b_grid, const FrequencyGrid& f_grid) {
  if (model.topology() != Topology::RhygSeries)
    throw DomainError("heatmap needs an rhyg (self-resonant transducer) model");
  Heatmap h{{b_grid.begin(), b_grid.end()}, {f_grid.points().begin(), f_grid.points().end()}, {}};
  h.magnitude.resize(h.biases.size() * h.freqs.size());
  for (std::size_t bi = 0; bi < h.biases.size(); ++bi) {
    std::optional<CircuitModel> tuned;
    if (!model.branches().empty()) tuned = tuned_model(model, tuning, h.biases[bi]);
    const CircuitModel m = tuned ? *tuned : model.without_branches();
    for (std::size_t fi = 0; fi < h.freqs.size(); ++fi)
      h.magnitude[bi * h.freqs.size() + fi] = std::abs(z_model_at(m, h.freqs[fi]));
  }
  return h;
}

class NoAntiCrossingError : public Error {
 public:
  using Error::Error;
};

struct Splitting {
  double two_g;      // Hz
  double bias_t;     // bias of the closest approach
  double f_lower;
  double f_upper;
};

/// Minimum over bias of the spacing between the two deepest |Z| dips.
inline Splitting extract_splitting(const Heatmap& hm) {
  const std::size_t nf = hm.freqs.size();
  if (nf < 3) throw DomainError("heatmap needs at least 3 frequency points");
  std::optional<Splitting> best;
  for (std::size_t bi = 0; bi < hm.biases.size(); ++bi) {
    const double* row = hm.magnitude.data() + bi * nf;
    std::vector<std::pair<double, double>> dips;  // (|Z|, refined f)
    for (std::size_t i = 1; i + 1 < nf; ++i) {
      if (row[i] < row[i - 1] && row[i] <= row[i + 1]) {
        const auto v = detail::parabola_vertex(hm.freqs[i - 1], row[i - 1], hm.freqs[i], row[i],
                                               hm.freqs[i + 1], row[i + 1]);
        dips.emplace_back(row[i], v.x);
      }
    }
    if (dips.size() < 2) continue;
    std::partial_sort(dips.begin(), dips.begin() + 2, dips.end());
    const double fa = std::min(dips[0].second, dips[1].second);
    const double fb = std::max(dips[0].second, dips[1].second);
    if (!best || fb - fa < best->two_g) best = Splitting{fb - fa, hm.biases[bi], fa, fb};
  }
  if (!best) throw NoAntiCrossingError("no bias row shows two |Z| dips; no anti-crossing found");
  return *best;
}

}  // namespace mswres
