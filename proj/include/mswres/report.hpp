#pragma once

// CSV and JSON forms of spectra, metrics, fit results and heatmaps.
// CSV follows RFC 4180 (CRLF, mandatory header, '.' decimals).

#include <cmath>
#include <cstddef>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mswres/extraction.hpp"
#include "mswres/fitting.hpp"
#include "mswres/magnetics.hpp"
#include "mswres/model_io.hpp"
#include "mswres/numfmt.hpp"
#include "mswres/spectra.hpp"

namespace mswres {

// ---- spectra ---------------------------------------------------------------

inline Json spectrum_to_json(const ComplexSpectrum& s) {
  Json j;
  j["kind"] = to_string(s.kind());
  j["z_ref"] = s.z_ref();
  Json f = Json::array(), re = Json::array(), im = Json::array();
  for (std::size_t i = 0; i < s.size(); ++i) {
    f.push_back(s.frequency(i));
    re.push_back(s[i].real());
    im.push_back(s[i].imag());
  }
  j["freq_Hz"] = std::move(f);
  j["re"] = std::move(re);
  j["im"] = std::move(im);
  return j;
}

inline ComplexSpectrum spectrum_from_json(const Json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  SpectrumKind k;
  if (kind == "reflection") k = SpectrumKind::Reflection;
  else if (kind == "impedance") k = SpectrumKind::Impedance;
  else throw InvariantError("unknown spectrum kind '" + kind + "'");
  const auto f = j.at("freq_Hz").get<std::vector<double>>();
  const auto re = j.at("re").get<std::vector<double>>();
  const auto im = j.at("im").get<std::vector<double>>();
  if (re.size() != f.size() || im.size() != f.size())
    throw InvariantError("spectrum arrays differ in length");
  std::vector<Complex> v(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) v[i] = {re[i], im[i]};
  return ComplexSpectrum(FrequencyGrid(f), std::move(v), k, j.value("z_ref", 50.0));
}

// ---- resonance metrics -------------------------------------------------------

/// One row per |Z| maximum. Fields that cannot be determined stay empty.
struct MetricsRow {
  std::optional<double> bias_mt;
  std::optional<double> f_s;
  double f_p;
  std::optional<double> q;
  std::optional<double> kt2;
  std::optional<double> fom;
};

inline std::vector<MetricsRow> extract_metrics(const ComplexSpectrum& z, double prominence,
                                               std::optional<double> bias_mt,
                                               std::vector<std::string>* warnings = nullptr) {
  const auto set = find_resonances(z, prominence);
  std::vector<MetricsRow> rows;
  for (std::size_t k = 0; k < set.extrema.size(); ++k) {
    const auto& e = set.extrema[k];
    if (!e.is_maximum) continue;
    MetricsRow row{bias_mt, std::nullopt, e.frequency, std::nullopt, std::nullopt, std::nullopt};
    const bool left = k > 0 && !set.extrema[k - 1].is_maximum;
    const bool right = k + 1 < set.extrema.size() && !set.extrema[k + 1].is_maximum;
    if (left && right) {
      const ResonantTriple t{set.extrema[k - 1].frequency, e.frequency,
                             set.extrema[k + 1].frequency};
      row.kt2 = coupling_resonant(t);
      row.f_s = (t.f_s1 / t.f_m >= t.f_m / t.f_s2) ? t.f_s1 : t.f_s2;
    } else if (left || right) {
      const auto& m = left ? set.extrema[k - 1] : set.extrema[k + 1];
      row.f_s = m.frequency;
      row.kt2 = coupling({m.frequency, e.frequency, m.z, e.z});
    }
    try {
      row.q = q_3db(z, e.frequency);
    } catch (const Error& err) {
      if (warnings) warnings->push_back(err.what());
    }
    if (row.q && row.kt2) row.fom = fom(*row.q, *row.kt2);
    rows.push_back(row);
  }
  return rows;
}

inline void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows) {
  auto cell = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  os << "bias_mT,f_s_Hz,f_p_Hz,Q,kt2,FOM\r\n";
  for (const auto& r : rows)
    os << cell(r.bias_mt) << ',' << cell(r.f_s) << ',' << format_double(r.f_p) << ','
       << cell(r.q) << ',' << cell(r.kt2) << ',' << cell(r.fom) << "\r\n";
}

inline Json metrics_to_json(const std::vector<MetricsRow>& rows) {
  auto val = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
  Json arr = Json::array();
  for (const auto& r : rows)
    arr.push_back({{"bias_mT", val(r.bias_mt)},
                   {"f_s_Hz", val(r.f_s)},
                   {"f_p_Hz", r.f_p},
                   {"Q", val(r.q)},
                   {"kt2", val(r.kt2)},
                   {"FOM", val(r.fom)}});
  return arr;
}

// ---- fitting ----------------------------------------------------------------

inline Json fit_result_to_json(const FitResult& r) {
  Json params = Json::object();
  for (const auto& [name, value] : r.parameters) params[name] = value;
  return {{"model", model_to_json(r.model)},
          {"parameters", params},
          {"residual_rms", r.residual_rms},
          {"rms_ohms", r.rms_ohms},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"termination", to_string(r.termination)},
          {"start_index", r.start_index}};
}

inline ParamSpec param_spec_from_json(const Json& j) {
  ParamSpec s{j.at("name").get<std::string>(), json_number(j, "initial"), 0.0, 0.0,
              j.value("frozen", false)};
  s.lower = json_number_or(j, "lower", s.initial);
  s.upper = json_number_or(j, "upper", s.initial);
  return s;
}

inline FitOptions fit_options_from_json(const Json& j, FitOptions base = {}) {
  if (j.contains("seed")) base.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("n_starts")) base.n_starts = j.at("n_starts").get<unsigned>();
  if (j.contains("gradient_tol")) base.gradient_tol = json_number(j, "gradient_tol");
  if (j.contains("step_tol")) base.step_tol = json_number(j, "step_tol");
  if (j.contains("max_iterations")) base.max_iterations = j.at("max_iterations").get<int>();
  return base;
}

// ---- heatmaps -----------------------------------------------------------------

/// Header row "bias_T\freq_Hz,f0,f1,...", then one row per bias.
inline void write_heatmap_csv(std::ostream& os, const Heatmap& hm) {
  os << "bias_T\\freq_Hz";
  for (double f : hm.freqs) os << ',' << format_double(f);
  os << "\r\n";
  for (std::size_t b = 0; b < hm.biases.size(); ++b) {
    os << format_double(hm.biases[b]);
    for (std::size_t f = 0; f < hm.freqs.size(); ++f) os << ',' << format_double(hm.at(b, f));
    os << "\r\n";
  }
}

inline Json heatmap_to_json(const Heatmap& hm) {
  Json rows = Json::array();
  for (std::size_t b = 0; b < hm.biases.size(); ++b) {
    Json row = Json::array();
    for (std::size_t f = 0; f < hm.freqs.size(); ++f) row.push_back(hm.at(b, f));
    rows.push_back(std::move(row));
  }
  return {{"bias_T", hm.biases}, {"freq_Hz", hm.freqs}, {"abs_z_ohm", std::move(rows)}};
}

}  // namespace mswres
