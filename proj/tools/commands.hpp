#pragma once

// Subcommand bodies for the mswres tool. Each command fills an OutputSet in
// memory; files are written only once the whole command has succeeded.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mswres/circuits.hpp"
#include "mswres/error.hpp"
#include "mswres/extraction.hpp"
#include "mswres/fitting.hpp"
#include "mswres/magnetics.hpp"
#include "mswres/model_io.hpp"
#include "mswres/numfmt.hpp"
#include "mswres/report.hpp"
#include "mswres/spectra.hpp"
#include "mswres/svg.hpp"
#include "mswres/touchstone.hpp"
#include "mswres/units.hpp"

namespace mswres::cli {

namespace fs = std::filesystem;

struct RunConfig {
  std::string command;
  std::string input;
  std::string zero_bias;
  std::string manifest;
  std::string out;
  std::string topology = "rhyg";
  std::uint64_t seed = 0;
  unsigned n_starts = 8;
  double prominence = 0.05;
  bool log_mag = true;
  // convert
  bool to_z = false;
  bool to_s = false;
  std::string input_kind = "s";
  // synth / anticross payload, taken verbatim from the config file
  Json model;
  Json tuning;
  Json biases;
  Json grid;
  Json bias_grid;
  double snr_db = std::numeric_limits<double>::infinity();
  double z_ref = 50.0;
  Json fit;  // optional tolerances
};

inline Json to_json(const RunConfig& c) {
  Json j{{"command", c.command},   {"input", c.input},           {"zero_bias", c.zero_bias},
         {"manifest", c.manifest}, {"out", c.out},               {"topology", c.topology},
         {"seed", c.seed},         {"n_starts", c.n_starts},     {"prominence", c.prominence},
         {"log_mag", c.log_mag}};
  if (c.command == "convert") {
    j["z"] = c.to_z;
    j["to_s"] = c.to_s;
    j["input_kind"] = c.input_kind;
  }
  if (!c.model.is_null()) j["model"] = c.model;
  if (!c.tuning.is_null()) j["tuning"] = c.tuning;
  if (!c.biases.is_null()) j["biases"] = c.biases;
  if (!c.grid.is_null()) j["grid"] = c.grid;
  if (!c.bias_grid.is_null()) j["bias_grid"] = c.bias_grid;
  if (c.command == "synth") {
    j["snr_db"] = std::isfinite(c.snr_db) ? Json(c.snr_db) : Json(nullptr);
    j["z_ref"] = c.z_ref;
  }
  if (!c.fit.is_null()) j["fit"] = c.fit;
  return j;
}

/// Loads config-file values into `c`; flags given on the command line win.
inline void apply_config(RunConfig& c, const Json& j, const std::map<std::string, bool>& given) {
  auto take = [&](const char* key, auto& field) {
    if (j.contains(key) && !given.count(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  take("input", c.input);
  take("zero_bias", c.zero_bias);
  take("manifest", c.manifest);
  take("out", c.out);
  take("topology", c.topology);
  take("seed", c.seed);
  take("n_starts", c.n_starts);
  take("log_mag", c.log_mag);
  if (j.contains("prominence") && !given.count("prominence")) c.prominence = json_number(j, "prominence");
  for (const auto& [key, field] : {std::pair{"model", &c.model}, {"tuning", &c.tuning},
                                   {"biases", &c.biases}, {"grid", &c.grid},
                                   {"bias_grid", &c.bias_grid}, {"fit", &c.fit}})
    if (j.contains(key)) *field = j.at(key);
  if (j.contains("snr_db") && !j.at("snr_db").is_null()) c.snr_db = json_number(j, "snr_db");
  if (j.contains("z_ref")) c.z_ref = json_number(j, "z_ref");
}

/// Files produced by one run, keyed by path.
class OutputSet {
 public:
  void add(const fs::path& p, std::string content) { files_[p] = std::move(content); }
  void commit() const {
    for (const auto& [p, text] : files_) {
      if (p.has_parent_path()) fs::create_directories(p.parent_path());
      std::ofstream f(p, std::ios::binary);
      if (!f) throw Error("cannot write " + p.string());
      f << text;
      if (!f) throw Error("write failed for " + p.string());
    }
  }

 private:
  std::map<fs::path, std::string> files_;
};

inline std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw Error("cannot open " + p.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline std::string extension(const fs::path& p) {
  std::string e = p.extension().string();
  for (auto& ch : e) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return e;
}

inline ComplexSpectrum read_spectrum(const fs::path& p, const std::string& csv_kind = "s") {
  const std::string ext = extension(p);
  const std::string text = slurp(p);
  try {
    if (ext == ".s1p") return parse_touchstone(text);
    if (ext == ".json") return spectrum_from_json(Json::parse(text));
    if (ext == ".csv") {
      std::istringstream is(text);
      return read_csv(is, csv_kind == "z" ? SpectrumKind::Impedance : SpectrumKind::Reflection);
    }
  } catch (const Error& e) {
    throw Error(p.string() + ": " + e.what());
  } catch (const Json::exception& e) {
    throw Error(p.string() + ": " + e.what());
  }
  throw Error(p.string() + ": unsupported extension '" + ext + "' (expected .s1p, .csv or .json)");
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

inline FrequencyGrid grid_from_json(const Json& g, const char* what) {
  if (!g.is_object()) throw InvariantError(std::string("config needs a '") + what + "' object");
  const auto n = g.at("points").get<std::size_t>();
  return FrequencyGrid::linear(json_number(g, "start"), json_number(g, "stop"), n);
}

inline TuningModel tuning_from_json(const Json& j) {
  TuningModel t;
  if (j.is_object()) {
    t.gamma_eff = json_number_or(j, "gamma_eff", t.gamma_eff);
    t.b_off = json_number_or(j, "b_off", t.b_off);
  }
  t.validate();
  return t;
}

inline FitOptions fit_options(const RunConfig& c) {
  FitOptions o;
  if (c.fit.is_object()) o = fit_options_from_json(c.fit, o);
  o.seed = c.seed;
  o.n_starts = c.n_starts;
  return o;
}

struct Manifest {
  fs::path zero_bias;
  std::vector<std::pair<double, fs::path>> entries;
};

inline Manifest read_manifest(const fs::path& p) {
  Json j;
  try {
    j = Json::parse(slurp(p));
  } catch (const Json::exception& e) {
    throw Error(p.string() + ": " + e.what());
  }
  const fs::path dir = p.parent_path();
  Manifest m;
  if (j.contains("zero_bias") && j.at("zero_bias").is_string())
    m.zero_bias = dir / j.at("zero_bias").get<std::string>();
  for (const auto& e : j.at("entries"))
    m.entries.emplace_back(json_number(e, "bias_T"), dir / e.at("path").get<std::string>());
  std::sort(m.entries.begin(), m.entries.end());
  return m;
}

// ---- convert ------------------------------------------------------------------

inline int cmd_convert(const RunConfig& c) {
  if (c.input.empty() || c.out.empty()) throw Error("convert needs --input and --out");
  if (c.to_z && c.to_s) throw Error("--z and --to-s are mutually exclusive");
  ComplexSpectrum s = read_spectrum(c.input, c.input_kind);
  if (c.to_z) s = as_impedance(s);
  if (c.to_s && s.kind() == SpectrumKind::Impedance) s = z_to_s(s);

  const fs::path out = c.out;
  const std::string ext = extension(out);
  OutputSet set;
  if (ext == ".csv") {
    std::ostringstream os;
    write_csv(os, s);
    set.add(out, os.str());
  } else if (ext == ".json") {
    set.add(out, dump(spectrum_to_json(s)));
  } else if (ext == ".s1p") {
    if (s.kind() == SpectrumKind::Impedance)
      throw Error("impedance data cannot be written as .s1p; add --to-s");
    set.add(out, write_touchstone(s));
  } else {
    throw Error("unsupported output extension '" + ext + "'");
  }
  set.commit();
  return 0;
}

// ---- extract ------------------------------------------------------------------

inline std::string magnitude_svg(const ComplexSpectrum& z, const ResonanceSet& res,
                                 const std::string& title, bool log_mag) {
  svg::LineChart chart(title, "frequency (GHz)", "|Z| (ohm)", log_mag);
  svg::Series s;
  s.label = "|Z|";
  for (std::size_t i = 0; i < z.size(); ++i) {
    s.x.push_back(z.frequency(i) * 1e-9);
    s.y.push_back(std::abs(z[i]));
  }
  chart.add(std::move(s));
  for (const auto& e : res.extrema)
    chart.mark({e.frequency * 1e-9, e.magnitude, e.is_maximum ? "fp" : "fs",
                e.is_maximum ? "#d62728" : "#2ca02c"});
  return chart.render();
}

inline int cmd_extract(const RunConfig& c) {
  if (c.out.empty()) throw Error("extract needs --out");
  std::vector<std::pair<std::optional<double>, ComplexSpectrum>> inputs;
  if (!c.manifest.empty()) {
    for (const auto& [b, p] : read_manifest(c.manifest).entries)
      inputs.emplace_back(b * 1e3, read_spectrum(p));
  } else if (!c.input.empty()) {
    inputs.emplace_back(std::nullopt, read_spectrum(c.input, c.input_kind));
  } else {
    throw Error("extract needs --input or --manifest");
  }

  const fs::path out = c.out;
  OutputSet set;
  std::vector<MetricsRow> rows;
  std::vector<std::string> warnings;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const auto& [bias_mt, spec] = inputs[k];
    const auto z = as_impedance(spec);
    const auto found = extract_metrics(z, c.prominence, bias_mt, &warnings);
    rows.insert(rows.end(), found.begin(), found.end());
    const std::string tag = inputs.size() == 1 ? std::string() : "_" + std::to_string(k);
    const std::string title = bias_mt ? "|Z| at " + format_double(*bias_mt) + " mT" : "|Z|";
    set.add(out / ("magnitude" + tag + ".svg"),
            magnitude_svg(z, find_resonances(z, c.prominence), title, c.log_mag));
    const auto s = spec.kind() == SpectrumKind::Reflection ? spec : z_to_s(spec);
    const auto qc = q_circle(s);
    set.add(out / ("qcircle" + tag + ".svg"),
            svg::smith_plot(qc.trajectory, "S11 (" + std::to_string(qc.loops) + " loops)"));
  }
  if (rows.empty()) warnings.push_back("no resonances detected; metrics table is empty");

  std::ostringstream csv;
  write_metrics_csv(csv, rows);
  set.add(out / "metrics.csv", csv.str());
  set.add(out / "metrics.json", dump(metrics_to_json(rows)));
  set.add(out / "resolved_config.json", dump(to_json(c)));
  set.commit();
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  return 0;
}

// ---- fit --------------------------------------------------------------------

inline int cmd_fit(const RunConfig& c) {
  if (c.out.empty()) throw Error("fit needs --out");
  if (c.manifest.empty()) throw Error("fit needs --manifest");
  const Manifest m = read_manifest(c.manifest);
  fs::path zb = c.zero_bias.empty() ? m.zero_bias : fs::path(c.zero_bias);
  if (zb.empty()) throw Error("fit needs --zero-bias (or a manifest naming one)");
  const auto zero = read_spectrum(zb);
  std::vector<BiasEntry> entries;
  for (const auto& [b, p] : m.entries) entries.push_back({b, read_spectrum(p), false});
  const BiasSweep sweep(std::move(entries));

  TwoStageOptions opt;
  opt.fit = fit_options(c);
  opt.prominence = c.prominence;
  if (c.fit.is_object() && c.fit.contains("n_branches"))
    opt.n_branches = c.fit.at("n_branches").get<std::size_t>();
  const auto res = two_stage_fit(zero, sweep, parse_topology(c.topology), opt);

  const fs::path out = c.out;
  OutputSet set;
  Json per = Json::array();
  std::ostringstream csv;
  csv << "bias_T,branch,r_m,l_m,c_m,f0_Hz,Q,residual_rms\r\n";
  std::vector<std::string> warnings;
  for (std::size_t k = 0; k < res.per_bias.size(); ++k) {
    const auto& bf = res.per_bias[k];
    const auto z = as_impedance(sweep[k].spectrum);
    double data_sq = 0.0;
    for (const auto& v : z.values()) data_sq += std::norm(v);
    Json j = fit_result_to_json(bf.result);
    j["bias_T"] = bf.bias_t;
    j["no_resonance"] = bf.no_resonance;
    j["data_rms_ohms"] = std::sqrt(data_sq / static_cast<double>(z.size()));
    per.push_back(std::move(j));
    if (bf.no_resonance) warnings.push_back("no resonance at " + format_double(bf.bias_t) + " T");
    if (!bf.result.converged)
      warnings.push_back("fit at " + format_double(bf.bias_t) + " T did not converge (" +
                         to_string(bf.result.termination) + ")");
    const auto& br = bf.result.model.branches();
    for (std::size_t i = 0; i < br.size(); ++i)
      csv << format_double(bf.bias_t) << ',' << i << ',' << format_double(br[i].r_m) << ','
          << format_double(br[i].l_m) << ',' << format_double(br[i].c_m) << ','
          << format_double(br[i].resonance_hz()) << ',' << format_double(br[i].q()) << ','
          << format_double(bf.result.residual_rms) << "\r\n";

    svg::LineChart chart("fit at " + format_double(bf.bias_t) + " T", "frequency (GHz)",
                         "|Z| (ohm)", c.log_mag);
    svg::Series meas, fitted;
    meas.label = "measured";
    fitted.label = "fitted";
    fitted.color = "#ff7f0e";
    fitted.dashed = true;
    const auto zf = z_model(bf.result.model, z.grid(), z.z_ref());
    for (std::size_t i = 0; i < z.size(); ++i) {
      meas.x.push_back(z.frequency(i) * 1e-9);
      meas.y.push_back(std::abs(z[i]));
      fitted.x.push_back(z.frequency(i) * 1e-9);
      fitted.y.push_back(std::abs(zf[i]));
    }
    chart.add(std::move(meas));
    chart.add(std::move(fitted));
    set.add(out / ("overlay_" + std::to_string(k) + ".svg"), chart.render());
  }
  Json doc{{"baseline", fit_result_to_json(res.baseline)}, {"per_bias", std::move(per)}};
  set.add(out / "fit_results.json", dump(doc));
  set.add(out / "branch_params.csv", csv.str());
  set.add(out / "resolved_config.json", dump(to_json(c)));
  set.commit();
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  return 0;
}

// ---- synth ------------------------------------------------------------------

/// Zero-bias data uses `seed`; bias entry i uses seed + 1 + i.
inline int cmd_synth(const RunConfig& c) {
  if (c.out.empty()) throw Error("synth needs --out");
  if (c.model.is_null()) throw Error("synth needs a 'model' in the config");
  const CircuitModel model = model_from_json(c.model);
  const TuningModel tuning = tuning_from_json(c.tuning);
  const FrequencyGrid grid = grid_from_json(c.grid, "grid");
  if (!c.biases.is_array() || c.biases.empty()) throw Error("synth needs a non-empty 'biases' array");
  std::vector<double> biases;
  for (const auto& b : c.biases) biases.push_back(b.is_string() ? parse_engineering(b.get<std::string>()) : b.get<double>());
  if (model.branches().empty()) throw InvariantError("synth model needs at least one MSW branch");

  const fs::path out = c.out;
  OutputSet set;
  std::mt19937_64 rng0(c.seed);
  const auto zero = add_noise(z_to_s(z_model(model.without_branches(), grid, c.z_ref)), c.snr_db, rng0);
  set.add(out / "zero_bias.s1p", write_touchstone(zero));

  Json entries = Json::array();
  for (std::size_t i = 0; i < biases.size(); ++i) {
    const std::uint64_t seed_i = c.seed + 1 + i;
    const double b[] = {biases[i]};
    const BiasSweep one = synth_sweep(model, tuning, b, grid, {c.snr_db, seed_i}, c.z_ref);
    const std::string name = "bias_" + std::to_string(i) + ".s1p";
    set.add(out / name, write_touchstone(one[0].spectrum));
    entries.push_back({{"bias_T", biases[i]}, {"path", name}, {"seed", seed_i},
                       {"branchless", one[0].branchless}});
    if (one[0].branchless)
      std::cerr << "warning: bias " << format_double(biases[i]) << " T is below band\n";
  }
  set.add(out / "manifest.json",
          dump({{"zero_bias", "zero_bias.s1p"}, {"seed", c.seed}, {"entries", std::move(entries)}}));
  set.add(out / "resolved_config.json", dump(to_json(c)));
  set.commit();
  return 0;
}

// ---- anticross ----------------------------------------------------------------

inline int cmd_anticross(const RunConfig& c) {
  if (c.out.empty()) throw Error("anticross needs --out");
  if (c.model.is_null()) throw Error("anticross needs a 'model' in the config");
  const CircuitModel model = model_from_json(c.model);
  if (model.topology() != Topology::RhygSeries) throw DomainError("anticross needs an rhyg model");
  const TuningModel tuning = tuning_from_json(c.tuning);
  const FrequencyGrid fg = grid_from_json(c.grid, "grid");
  const FrequencyGrid bg = grid_from_json(c.bias_grid, "bias_grid");
  const Heatmap hm = heatmap(model, tuning, bg.points(), fg);

  const fs::path out = c.out;
  OutputSet set;
  std::ostringstream csv;
  write_heatmap_csv(csv, hm);
  set.add(out / "heatmap.csv", csv.str());
  set.add(out / "heatmap.json", dump(heatmap_to_json(hm)));
  set.add(out / "heatmap.svg",
          svg::heatmap_plot(hm.biases, hm.freqs, hm.magnitude, "|Z| vs bias", c.log_mag));

  Json sp{{"found", false}};
  if (!model.branches().empty()) sp["g_constructed_Hz"] = coupled_modes(model).g;
  std::string warning;
  try {
    const Splitting s = extract_splitting(hm);
    sp["found"] = true;
    sp["two_g_Hz"] = s.two_g;
    sp["bias_T"] = s.bias_t;
    sp["f_lower_Hz"] = s.f_lower;
    sp["f_upper_Hz"] = s.f_upper;
  } catch (const NoAntiCrossingError& e) {
    warning = e.what();
  }
  set.add(out / "splitting.json", dump(sp));
  set.add(out / "resolved_config.json", dump(to_json(c)));
  set.commit();
  if (!warning.empty()) std::cout << "no anti-crossing found: " << warning << "\n";
  return 0;
}

}  // namespace mswres::cli
