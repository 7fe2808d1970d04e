#pragma once

// JSON model files.
//
//   {
//     "topology": "hyg" | "rhyg",
//     "line":   { "z_c": 50, "alpha": 0.02, "beta_delay": "5p", "f_ref": "10G" },   // hyg only
//     "series": { "r_0": 2, "l_0": "0.8n", "c_0": "0.287p" },                      // rhyg only
//     "msw_branches": [ { "r_m": "2k", "l_m": "36p", "c_m": "6.4p" } ]
//   }
//
// Values are SI numbers or strings with an engineering suffix (f p n u m k M G).
// Writers always emit plain numbers.

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mswres/circuits.hpp"
#include "mswres/error.hpp"
#include "mswres/units.hpp"

namespace mswres {

using Json = nlohmann::ordered_json;

inline double json_number(const Json& j, const std::string& key) {
  if (!j.contains(key)) throw InvariantError("missing field '" + key + "'");
  const auto& v = j.at(key);
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return parse_engineering(v.get<std::string>());
  throw InvariantError("field '" + key + "' must be a number or an engineering string");
}

inline double json_number_or(const Json& j, const std::string& key, double fallback) {
  return j.contains(key) ? json_number(j, key) : fallback;
}

inline Topology parse_topology(const std::string& s) {
  if (s == "hyg") return Topology::HygShortedLine;
  if (s == "rhyg") return Topology::RhygSeries;
  throw InvariantError("unknown topology '" + s + "' (expected hyg or rhyg)");
}

inline CircuitModel model_from_json(const Json& j) {
  if (!j.contains("topology") || !j.at("topology").is_string())
    throw InvariantError("model needs a string 'topology'");
  std::vector<ParallelRLC> branches;
  if (j.contains("msw_branches")) {
    for (const auto& b : j.at("msw_branches"))
      branches.push_back({json_number(b, "r_m"), json_number(b, "l_m"), json_number(b, "c_m")});
  }
  const Topology t = parse_topology(j.at("topology").get<std::string>());
  if (t == Topology::HygShortedLine) {
    if (!j.contains("line")) throw InvariantError("hyg model needs a 'line' object");
    if (j.contains("series")) throw InvariantError("hyg model must not have 'series'");
    const auto& l = j.at("line");
    return CircuitModel::hyg({json_number(l, "z_c"), json_number(l, "alpha"),
                              json_number(l, "beta_delay"), json_number_or(l, "f_ref", 10e9)},
                             std::move(branches));
  }
  if (!j.contains("series")) throw InvariantError("rhyg model needs a 'series' object");
  if (j.contains("line")) throw InvariantError("rhyg model must not have 'line'");
  const auto& s = j.at("series");
  return CircuitModel::rhyg({json_number(s, "r_0"), json_number(s, "l_0"), json_number(s, "c_0")},
                            std::move(branches));
}

inline Json model_to_json(const CircuitModel& m) {
  Json j;
  j["topology"] = to_string(m.topology());
  if (m.line()) {
    const auto& l = *m.line();
    j["line"] = {{"z_c", l.z_c}, {"alpha", l.alpha}, {"beta_delay", l.beta_delay}, {"f_ref", l.f_ref}};
  }
  if (m.series()) {
    const auto& s = *m.series();
    j["series"] = {{"r_0", s.r_0}, {"l_0", s.l_0}, {"c_0", s.c_0}};
  }
  j["msw_branches"] = Json::array();
  for (const auto& b : m.branches())
    j["msw_branches"].push_back({{"r_m", b.r_m}, {"l_m", b.l_m}, {"c_m", b.c_m}});
  return j;
}

}  // namespace mswres
