#pragma once

// Minimal deterministic SVG emitter: line charts, Smith-plane trajectories
// and heatmaps. Output depends only on the input data (fixed decimals, no
// timestamps), so files can be compared byte for byte.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "mswres/numfmt.hpp"
#include "mswres/spectra.hpp"

namespace mswres::svg {

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Series {
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  std::string label;
  bool dashed = false;
};

struct Marker {
  double x;
  double y;
  std::string label;
  std::string color = "#d62728";
};

/// XY line chart with optional log10 y axis.
class LineChart {
 public:
  LineChart(std::string title, std::string x_label, std::string y_label, bool log_y = false)
      : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)),
        log_y_(log_y) {}

  void add(Series s) { series_.push_back(std::move(s)); }
  void mark(Marker m) { markers_.push_back(std::move(m)); }

  std::string render() const {
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto& s : series_) {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        const double y = ty(s.y[i]);
        if (!std::isfinite(y) || !std::isfinite(s.x[i])) continue;
        x0 = std::min(x0, s.x[i]);
        x1 = std::max(x1, s.x[i]);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
      }
    }
    if (!(x1 > x0)) { x0 -= 0.5; x1 += 0.5; }
    if (!(y1 > y0)) { y0 -= 0.5; y1 += 0.5; }
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;

    auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * kPlotW; };
    auto py = [&](double y) { return kTop + (1.0 - (ty(y) - y0) / (y1 - y0)) * kPlotH; };

    std::ostringstream os;
    header(os, kWidth, kHeight);
    os << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
       << escape(title_) << "</text>\n";
    os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kPlotW << "\" height=\""
       << kPlotH << "\" fill=\"none\" stroke=\"#000\"/>\n";
    for (int k = 0; k <= 5; ++k) {
      const double xv = x0 + (x1 - x0) * k / 5.0;
      const double yv = y0 + (y1 - y0) * k / 5.0;
      const double gx = kLeft + kPlotW * k / 5.0;
      const double gy = kTop + kPlotH * (1.0 - k / 5.0);
      os << "<line x1=\"" << format_fixed(gx, 2) << "\" y1=\"" << kTop << "\" x2=\""
         << format_fixed(gx, 2) << "\" y2=\"" << kTop + kPlotH
         << "\" stroke=\"#ddd\"/>\n";
      os << "<line x1=\"" << kLeft << "\" y1=\"" << format_fixed(gy, 2) << "\" x2=\""
         << kLeft + kPlotW << "\" y2=\"" << format_fixed(gy, 2) << "\" stroke=\"#ddd\"/>\n";
      os << "<text x=\"" << format_fixed(gx, 2) << "\" y=\"" << kTop + kPlotH + 18
         << "\" text-anchor=\"middle\" font-size=\"11\">" << tick(xv) << "</text>\n";
      os << "<text x=\"" << kLeft - 6 << "\" y=\"" << format_fixed(gy + 4, 2)
         << "\" text-anchor=\"end\" font-size=\"11\">"
         << (log_y_ ? tick(std::pow(10.0, yv)) : tick(yv)) << "</text>\n";
    }
    os << "<text x=\"" << kLeft + kPlotW / 2 << "\" y=\"" << kHeight - 12
       << "\" text-anchor=\"middle\" font-size=\"13\">" << escape(x_label_) << "</text>\n";
    os << "<text x=\"16\" y=\"" << kTop + kPlotH / 2 << "\" text-anchor=\"middle\" "
       << "font-size=\"13\" transform=\"rotate(-90 16 " << kTop + kPlotH / 2 << ")\">"
       << escape(y_label_) << "</text>\n";

    int legend = 0;
    for (const auto& s : series_) {
      os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.2\""
         << (s.dashed ? " stroke-dasharray=\"5,3\"" : "") << " points=\"";
      bool first = true;
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        const double yy = py(s.y[i]);
        if (!std::isfinite(yy)) continue;
        os << (first ? "" : " ") << format_fixed(px(s.x[i]), 2) << ',' << format_fixed(yy, 2);
        first = false;
      }
      os << "\"/>\n";
      if (!s.label.empty()) {
        const int ly = kTop + 14 + 16 * legend++;
        os << "<line x1=\"" << kLeft + kPlotW - 150 << "\" y1=\"" << ly - 4 << "\" x2=\""
           << kLeft + kPlotW - 130 << "\" y2=\"" << ly - 4 << "\" stroke=\"" << s.color
           << "\"/>\n<text x=\"" << kLeft + kPlotW - 125 << "\" y=\"" << ly
           << "\" font-size=\"11\">" << escape(s.label) << "</text>\n";
      }
    }
    for (const auto& m : markers_) {
      const double yy = py(m.y);
      if (!std::isfinite(yy)) continue;
      os << "<circle cx=\"" << format_fixed(px(m.x), 2) << "\" cy=\"" << format_fixed(yy, 2)
         << "\" r=\"4\" fill=\"none\" stroke=\"" << m.color << "\"/>\n";
      os << "<text x=\"" << format_fixed(px(m.x) + 6, 2) << "\" y=\"" << format_fixed(yy - 6, 2)
         << "\" font-size=\"11\" fill=\"" << m.color << "\">" << escape(m.label) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
  }

 private:
  static constexpr int kWidth = 720, kHeight = 480, kLeft = 80, kTop = 40, kPlotW = 600,
                       kPlotH = 380;

  double ty(double y) const {
    if (!log_y_) return y;
    return y > 0.0 ? std::log10(y) : -std::numeric_limits<double>::infinity();
  }

 public:
  static std::string tick(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
  }

  static void header(std::ostringstream& os, int w, int h) {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
       << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n";
  }

 private:
  std::string title_, x_label_, y_label_;
  bool log_y_;
  std::vector<Series> series_;
  std::vector<Marker> markers_;
};

/// Reflection trajectory on the unit disc with reference circles.
inline std::string smith_plot(std::span<const Complex> s, const std::string& title) {
  constexpr int size = 520, c = 260, r = 220;
  std::ostringstream os;
  LineChart::header(os, size, size + 30);
  os << "<text x=\"" << c << "\" y=\"22\" text-anchor=\"middle\" font-size=\"16\">"
     << escape(title) << "</text>\n";
  const int cy = c + 30;
  os << "<circle cx=\"" << c << "\" cy=\"" << cy << "\" r=\"" << r
     << "\" fill=\"none\" stroke=\"#000\"/>\n";
  for (double rr : {0.2, 1.0, 5.0}) {
    const double rad = r / (1.0 + rr);
    os << "<circle cx=\"" << format_fixed(c + r * rr / (1.0 + rr), 2) << "\" cy=\"" << cy
       << "\" r=\"" << format_fixed(rad, 2) << "\" fill=\"none\" stroke=\"#ddd\"/>\n";
  }
  os << "<line x1=\"" << c - r << "\" y1=\"" << cy << "\" x2=\"" << c + r << "\" y2=\"" << cy
     << "\" stroke=\"#ddd\"/>\n";
  os << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1\" points=\"";
  for (std::size_t i = 0; i < s.size(); ++i)
    os << (i ? " " : "") << format_fixed(c + r * s[i].real(), 2) << ','
       << format_fixed(cy - r * s[i].imag(), 2);
  os << "\"/>\n</svg>\n";
  return os.str();
}

/// Colour-mapped matrix; rows are biases (y axis), columns frequencies (x axis).
inline std::string heatmap_plot(std::span<const double> biases, std::span<const double> freqs,
                                std::span<const double> values, const std::string& title,
                                bool log_scale) {
  constexpr int w = 720, h = 520, left = 80, top = 40, pw = 560, ph = 420;
  std::vector<double> v(values.begin(), values.end());
  for (auto& x : v) x = log_scale ? std::log10(std::max(x, 1e-300)) : x;
  double lo = 1e300, hi = -1e300;
  for (double x : v) {
    if (!std::isfinite(x)) continue;
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  if (!(hi > lo)) hi = lo + 1.0;

  auto color = [&](double x) {
    // Dark blue -> teal -> yellow.
    double t = std::clamp((x - lo) / (hi - lo), 0.0, 1.0);
    const double r = t < 0.5 ? 68 + (33 - 68) * t * 2 : 33 + (253 - 33) * (t - 0.5) * 2;
    const double g = t < 0.5 ? 1 + (145 - 1) * t * 2 : 145 + (231 - 145) * (t - 0.5) * 2;
    const double b = t < 0.5 ? 84 + (140 - 84) * t * 2 : 140 + (37 - 140) * (t - 0.5) * 2;
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", static_cast<int>(std::lround(r)),
                  static_cast<int>(std::lround(g)), static_cast<int>(std::lround(b)));
    return std::string(buf);
  };

  std::ostringstream os;
  LineChart::header(os, w, h);
  os << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
     << escape(title) << "</text>\n";
  const std::size_t nb = biases.size(), nf = freqs.size();
  // Downsample to at most 200 x 200 cells.
  const std::size_t sb = std::max<std::size_t>(1, (nb + 199) / 200);
  const std::size_t sf = std::max<std::size_t>(1, (nf + 199) / 200);
  const std::size_t cb = (nb + sb - 1) / sb, cf = (nf + sf - 1) / sf;
  const double cw = static_cast<double>(pw) / static_cast<double>(cf);
  const double ch = static_cast<double>(ph) / static_cast<double>(cb);
  for (std::size_t bi = 0; bi < cb; ++bi) {
    for (std::size_t fi = 0; fi < cf; ++fi) {
      const double x = v[(bi * sb) * nf + fi * sf];
      os << "<rect x=\"" << format_fixed(left + fi * cw, 2) << "\" y=\""
         << format_fixed(top + ph - (bi + 1) * ch, 2) << "\" width=\"" << format_fixed(cw + 0.05, 2)
         << "\" height=\"" << format_fixed(ch + 0.05, 2) << "\" fill=\"" << color(x) << "\"/>\n";
    }
  }
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << h - 18
     << "\" text-anchor=\"middle\" font-size=\"13\">frequency (GHz): "
     << LineChart::tick(freqs.front() / 1e9) << " to " << LineChart::tick(freqs.back() / 1e9)
     << "</text>\n";
  os << "<text x=\"16\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" font-size=\"13\" "
     << "transform=\"rotate(-90 16 " << top + ph / 2 << ")\">bias (mT): "
     << LineChart::tick(biases.front() * 1e3) << " to " << LineChart::tick(biases.back() * 1e3)
     << "</text>\n";
  os << "<text x=\"" << left + pw + 10 << "\" y=\"" << top + 12 << "\" font-size=\"11\">"
     << (log_scale ? "log10 |Z|" : "|Z| (ohm)") << "</text>\n";
  for (int k = 0; k <= 10; ++k) {
    const double x = lo + (hi - lo) * (10 - k) / 10.0;
    os << "<rect x=\"" << left + pw + 10 << "\" y=\"" << top + 20 + k * 20
       << "\" width=\"16\" height=\"20\" fill=\"" << color(x) << "\"/>\n";
    os << "<text x=\"" << left + pw + 30 << "\" y=\"" << top + 34 + k * 20
       << "\" font-size=\"10\">" << LineChart::tick(x) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace mswres::svg
