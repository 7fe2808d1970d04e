#pragma once

// Resonance location and figure-of-merit extraction from impedance spectra.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mswres/error.hpp"
#include "mswres/numfmt.hpp"
#include "mswres/spectra.hpp"

namespace mswres {

/// Series resonance (|Z| minimum) next to a parallel resonance (|Z| maximum).
struct ResonancePair {
  double f_s;
  double f_p;
  Complex z_at_fs;
  Complex z_at_fp;
};

/// MSW peak flanked by two anti-resonances: f_s1 < f_m < f_s2.
struct ResonantTriple {
  double f_s1;
  double f_m;
  double f_s2;
};

using ResonanceGroup = std::variant<ResonancePair, ResonantTriple>;

struct Extremum {
  std::size_t index;   // nearest grid sample
  double frequency;    // refined, Hz
  double magnitude;    // refined |Z|, ohms
  Complex z;           // interpolated at `frequency`
  bool is_maximum;
  double prominence;   // relative, in [0, 1]
};

struct ResonanceSet {
  std::vector<Extremum> extrema;      // sorted by frequency
  std::vector<ResonanceGroup> groups; // one per maximum that has a neighbouring minimum
};

struct ResonanceMetrics {
  double frequency;
  double q;
  double kt2;
  double fom;
};

class OneSidedBandwidthError : public Error {
 public:
  enum class Side { Lower, Upper };
  OneSidedBandwidthError(Side side, double peak_hz)
      : Error(std::string("half-power level not reached on the ") +
              (side == Side::Lower ? "lower" : "upper") + " side of the peak at " +
              format_double(peak_hz) + " Hz"),
        side_(side) {}
  Side side() const noexcept { return side_; }

 private:
  Side side_;
};

namespace detail {

struct Vertex {
  double x;
  double y;
};

// Vertex of the parabola through three points with distinct x.
inline Vertex parabola_vertex(double x0, double y0, double x1, double y1, double x2, double y2) {
  const double d01 = (y1 - y0) / (x1 - x0);
  const double d12 = (y2 - y1) / (x2 - x1);
  const double a = (d12 - d01) / (x2 - x0);
  if (a == 0.0) return {x1, y1};
  const double b = d01 - a * (x0 + x1);
  double xv = -b / (2.0 * a);
  xv = std::clamp(xv, x0, x2);
  const double yv = y0 + d01 * (xv - x0) + a * (xv - x0) * (xv - x1);
  return {xv, yv};
}

// Lorentzian-shaped extrema are parabolic in 1/|Z|^2 (maxima) or |Z|^2
// (minima); the vertex is taken on that scale and mapped back to |Z|.
inline Vertex refine_extremum(std::span<const double> f, const std::vector<double>& mag,
                              std::size_t i, bool is_max) {
  auto fwd = [is_max](double m) { return is_max ? 1.0 / (m * m) : m * m; };
  auto inv = [is_max](double y) { return is_max ? 1.0 / std::sqrt(y) : std::sqrt(y); };
  const auto v = parabola_vertex(f[i - 1], fwd(mag[i - 1]), f[i], fwd(mag[i]), f[i + 1],
                                 fwd(mag[i + 1]));
  if (!(v.y > 0.0) || !std::isfinite(v.y)) return {f[i], mag[i]};
  return {v.x, inv(v.y)};
}

inline Complex lerp_at(const ComplexSpectrum& z, std::size_t i, double f) {
  std::size_t j = (f >= z.frequency(i)) ? i : i - 1;
  if (j + 1 >= z.size()) return z[z.size() - 1];
  const double t = (f - z.frequency(j)) / (z.frequency(j + 1) - z.frequency(j));
  return z[j] + t * (z[j + 1] - z[j]);
}

// Topographic prominence of sample i on series y, treating it as a peak.
inline double peak_prominence(const std::vector<double>& y, std::size_t i) {
  const double h = y[i];
  double left_min = h;
  for (std::size_t k = i; k-- > 0;) {
    if (y[k] > h) break;
    left_min = std::min(left_min, y[k]);
  }
  double right_min = h;
  for (std::size_t k = i + 1; k < y.size(); ++k) {
    if (y[k] > h) break;
    right_min = std::min(right_min, y[k]);
  }
  return h - std::max(left_min, right_min);
}

}  // namespace detail

/// Locates |Z| extrema whose prominence (on log10|Z|, relative to the
/// spectrum's full log range) is at least `prominence`, then groups them.
inline ResonanceSet find_resonances(const ComplexSpectrum& z, double prominence = 0.05) {
  if (z.kind() != SpectrumKind::Impedance)
    throw DomainError("find_resonances expects an impedance spectrum");
  const std::size_t n = z.size();
  if (n < 5) throw DomainError("find_resonances needs at least 5 grid points");

  std::vector<double> mag(n), logm(n);
  for (std::size_t i = 0; i < n; ++i) {
    mag[i] = std::abs(z[i]);
    logm[i] = std::log10(std::max(mag[i], 1e-300));
  }
  const auto [lo, hi] = std::minmax_element(logm.begin(), logm.end());
  const double range = *hi - *lo;
  ResonanceSet out;
  if (!(range > 0.0) || !std::isfinite(range)) return out;

  std::vector<double> neg(n);
  for (std::size_t i = 0; i < n; ++i) neg[i] = -logm[i];

  // Plateaus collapse onto their lowest-frequency sample.
  std::size_t i = 1;
  while (i + 1 < n) {
    std::size_t j = i;
    while (j + 1 < n && logm[j + 1] == logm[i]) ++j;
    if (j + 1 >= n) break;
    const bool is_max = logm[i - 1] < logm[i] && logm[j + 1] < logm[i];
    const bool is_min = logm[i - 1] > logm[i] && logm[j + 1] > logm[i];
    if (is_max || is_min) {
      const double prom =
          (is_max ? detail::peak_prominence(logm, i) : detail::peak_prominence(neg, i)) / range;
      if (prom >= prominence) {
        detail::Vertex v{z.frequency(i), mag[i]};
        if (j == i) v = detail::refine_extremum(z.grid().points(), mag, i, is_max);
        out.extrema.push_back({i, v.x, v.y, detail::lerp_at(z, i, v.x), is_max, prom});
      }
    }
    i = j + 1;
  }

  const auto& ex = out.extrema;
  for (std::size_t k = 0; k < ex.size(); ++k) {
    if (!ex[k].is_maximum) continue;
    const bool left = k > 0 && !ex[k - 1].is_maximum;
    const bool right = k + 1 < ex.size() && !ex[k + 1].is_maximum;
    if (left && right) {
      out.groups.emplace_back(ResonantTriple{ex[k - 1].frequency, ex[k].frequency,
                                             ex[k + 1].frequency});
    } else if (left || right) {
      const auto& m = left ? ex[k - 1] : ex[k + 1];
      out.groups.emplace_back(ResonancePair{m.frequency, ex[k].frequency, m.z, ex[k].z});
    }
  }
  return out;
}

/// Q = f_peak / (f_hi - f_lo) with f_lo, f_hi the nearest |Z|_peak/sqrt(2) crossings.
inline double q_3db(const ComplexSpectrum& z, double peak_hz) {
  if (z.kind() != SpectrumKind::Impedance) throw DomainError("q_3db expects an impedance spectrum");
  const std::size_t n = z.size();
  const auto pts = z.grid().points();
  std::size_t i = static_cast<std::size_t>(
      std::lower_bound(pts.begin(), pts.end(), peak_hz) - pts.begin());
  if (i >= n) i = n - 1;
  if (i > 0 && std::abs(pts[i - 1] - peak_hz) <= std::abs(pts[i] - peak_hz)) --i;
  auto mag = [&](std::size_t k) { return std::abs(z[k]); };
  // Snap to the sample maximum next to the requested frequency.
  if (i > 0 && mag(i - 1) > mag(i)) --i;
  else if (i + 1 < n && mag(i + 1) > mag(i)) ++i;
  if (i == 0 || i + 1 >= n || mag(i - 1) > mag(i) || mag(i + 1) > mag(i))
    throw DomainError("q_3db: " + format_double(peak_hz) + " Hz is not a local maximum of |Z|");

  std::vector<double> m3 = {mag(i - 1), mag(i), mag(i + 1)};
  const auto v = detail::refine_extremum(pts.subspan(i - 1, 3), m3, 1, true);
  // Detuning coordinate u = sqrt((|Z|_peak/|Z|)^2 - 1) is linear in f for a
  // Lorentzian line; the half-power points sit at u = 1.
  const double peak = v.y;
  auto u = [&](std::size_t k) {
    const double r = peak / mag(k);
    return std::sqrt(std::max(0.0, r * r - 1.0));
  };

  std::optional<double> f_lo, f_hi;
  for (std::size_t k = i; k-- > 0;) {
    if (u(k) > 1.0) {
      f_lo = pts[k] + (1.0 - u(k)) * (pts[k + 1] - pts[k]) / (u(k + 1) - u(k));
      break;
    }
  }
  if (!f_lo) throw OneSidedBandwidthError(OneSidedBandwidthError::Side::Lower, v.x);
  for (std::size_t k = i + 1; k < n; ++k) {
    if (u(k) > 1.0) {
      f_hi = pts[k - 1] + (1.0 - u(k - 1)) * (pts[k] - pts[k - 1]) / (u(k) - u(k - 1));
      break;
    }
  }
  if (!f_hi) throw OneSidedBandwidthError(OneSidedBandwidthError::Side::Upper, v.x);
  return v.x / (*f_hi - *f_lo);
}

/// kt^2 = (pi/2) r cot((pi/2) r) for a sub-unity frequency ratio r.
inline double kt2_from_ratio(double r) {
  if (!(r > 0.0)) throw DomainError("frequency ratio must be > 0");
  if (!(r < 1.0)) throw DomainError("frequency ratio must be < 1");
  const double x = 0.5 * std::numbers::pi * r;
  return x / std::tan(x);
}

inline double coupling(const ResonancePair& p) {
  if (!(p.f_s > 0.0) || !(p.f_p > 0.0)) throw DomainError("resonance frequencies must be > 0");
  if (p.f_s == p.f_p) throw DomainError("series and parallel resonance coincide");
  return kt2_from_ratio(std::min(p.f_s, p.f_p) / std::max(p.f_s, p.f_p));
}

/// Uses whichever anti-resonance sits closer (in ratio) to the MSW peak.
inline double coupling_resonant(const ResonantTriple& t) {
  if (!(t.f_s1 > 0.0) || !(t.f_s1 < t.f_m) || !(t.f_m < t.f_s2))
    throw DomainError("resonant triple needs 0 < f_s1 < f_m < f_s2");
  return kt2_from_ratio(std::max(t.f_s1 / t.f_m, t.f_m / t.f_s2));
}

inline double fom(double q, double kt2) {
  if (!(q > 0.0)) throw DomainError("Q must be > 0");
  if (!(kt2 >= 0.0) || !(kt2 < 1.0)) throw DomainError("kt2 must lie in [0, 1)");
  return q * kt2;
}

inline ResonanceMetrics make_metrics(double frequency, double q, double kt2) {
  return {frequency, q, kt2, fom(q, kt2)};
}

struct QCircleOptions {
  double min_loop_length = 0.05;  // arc length in the unit disc
  double min_turning = std::numbers::pi;
};

struct QCircle {
  std::vector<Complex> trajectory;
  int loops = 0;
};

/// S-plane trajectory plus the number of closed sub-loops (self-intersections
/// whose enclosed arc turns by at least `min_turning` and is long enough).
inline QCircle q_circle(const ComplexSpectrum& s, const QCircleOptions& opt = {}) {
  if (s.kind() != SpectrumKind::Reflection)
    throw DomainError("q_circle expects a reflection spectrum");
  QCircle out;
  out.trajectory.assign(s.values().begin(), s.values().end());

  // Drop repeated points so every segment has a direction.
  std::vector<Complex> p;
  for (const auto& v : out.trajectory)
    if (p.empty() || v != p.back()) p.push_back(v);
  if (p.size() < 4) return out;
  const std::size_t nseg = p.size() - 1;

  std::vector<double> heading(nseg), turn_prefix(nseg, 0.0), len_prefix(nseg + 1, 0.0);
  for (std::size_t k = 0; k < nseg; ++k) {
    heading[k] = std::arg(p[k + 1] - p[k]);
    len_prefix[k + 1] = len_prefix[k] + std::abs(p[k + 1] - p[k]);
  }
  for (std::size_t k = 1; k < nseg; ++k) {
    double d = heading[k] - heading[k - 1];
    d = std::remainder(d, 2.0 * std::numbers::pi);
    turn_prefix[k] = turn_prefix[k - 1] + d;
  }

  double xmin = p[0].real(), xmax = xmin, ymin = p[0].imag(), ymax = ymin;
  for (const auto& v : p) {
    xmin = std::min(xmin, v.real());
    xmax = std::max(xmax, v.real());
    ymin = std::min(ymin, v.imag());
    ymax = std::max(ymax, v.imag());
  }
  const double extent = std::max(xmax - xmin, ymax - ymin);
  if (!(extent > 0.0)) return out;
  const std::size_t cells = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::sqrt(static_cast<double>(nseg))), 1, 1024);
  const double h = extent / static_cast<double>(cells) * (1.0 + 1e-9);
  auto cell_of = [&](double x, double lo) {
    return std::min(cells - 1, static_cast<std::size_t>((x - lo) / h));
  };
  std::vector<std::vector<std::size_t>> bucket(cells * cells);
  for (std::size_t k = 0; k < nseg; ++k) {
    const auto cx0 = cell_of(std::min(p[k].real(), p[k + 1].real()), xmin);
    const auto cx1 = cell_of(std::max(p[k].real(), p[k + 1].real()), xmin);
    const auto cy0 = cell_of(std::min(p[k].imag(), p[k + 1].imag()), ymin);
    const auto cy1 = cell_of(std::max(p[k].imag(), p[k + 1].imag()), ymin);
    for (auto cx = cx0; cx <= cx1; ++cx)
      for (auto cy = cy0; cy <= cy1; ++cy) bucket[cx * cells + cy].push_back(k);
  }

  auto cross = [](Complex a, Complex b) { return a.real() * b.imag() - a.imag() * b.real(); };
  auto intersects = [&](std::size_t a, std::size_t b) {
    const Complex p1 = p[a], p2 = p[a + 1], q1 = p[b], q2 = p[b + 1];
    const double d1 = cross(p2 - p1, q1 - p1), d2 = cross(p2 - p1, q2 - p1);
    const double d3 = cross(q2 - q1, p1 - q1), d4 = cross(q2 - q1, p2 - q1);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 &&
           d4 != 0;
  };
  // A pair sharing several cells is only examined in the first one.
  auto first_shared_cell = [&](std::size_t a, std::size_t b) {
    auto lo_hi = [&](std::size_t k) {
      return std::array<std::size_t, 4>{
          cell_of(std::min(p[k].real(), p[k + 1].real()), xmin),
          cell_of(std::max(p[k].real(), p[k + 1].real()), xmin),
          cell_of(std::min(p[k].imag(), p[k + 1].imag()), ymin),
          cell_of(std::max(p[k].imag(), p[k + 1].imag()), ymin)};
    };
    const auto A = lo_hi(a), B = lo_hi(b);
    return std::max(A[0], B[0]) * cells + std::max(A[2], B[2]);
  };

  std::vector<std::pair<std::size_t, std::size_t>> candidates;
  for (std::size_t c = 0; c < bucket.size(); ++c) {
    const auto& segs = bucket[c];
    for (std::size_t u = 0; u < segs.size(); ++u) {
      for (std::size_t w = u + 1; w < segs.size(); ++w) {
        const std::size_t a = std::min(segs[u], segs[w]), b = std::max(segs[u], segs[w]);
        if (b <= a + 1) continue;
        if (first_shared_cell(a, b) != c) continue;
        if (!intersects(a, b)) continue;
        const double turning = turn_prefix[b] - turn_prefix[a];
        const double length = len_prefix[b] - len_prefix[a + 1];
        if (std::abs(turning) >= opt.min_turning && length >= opt.min_loop_length)
          candidates.emplace_back(a, b);
      }
    }
  }

  // Keep a laminar family: shortest loops first; a candidate that partially
  // overlaps an accepted loop is a crossing between two loops, not a loop.
  std::sort(candidates.begin(), candidates.end(), [](const auto& x, const auto& y) {
    return std::pair(x.second - x.first, x.first) < std::pair(y.second - y.first, y.first);
  });
  std::vector<std::pair<std::size_t, std::size_t>> accepted;
  for (const auto& c : candidates) {
    bool ok = true;
    for (const auto& a : accepted) {
      const bool partial = (c.first < a.first && a.first < c.second && c.second < a.second) ||
                           (a.first < c.first && c.first < a.second && a.second < c.second) ||
                           c.first == a.first || c.second == a.second;
      if (partial) {
        ok = false;
        break;
      }
    }
    if (ok) accepted.push_back(c);
  }
  out.loops = static_cast<int>(accepted.size());
  return out;
}

}  // namespace mswres
