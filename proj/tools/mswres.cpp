// mswres: batch front end for resonance extraction, circuit fitting and
// bias-sweep synthesis.

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

using mswres::cli::RunConfig;

void add_common(CLI::App& sub, RunConfig& c) {
  sub.add_option("--input", c.input, "input spectrum (.s1p, .csv, .json)");
  sub.add_option("--zero-bias", c.zero_bias, "zero-bias reference spectrum");
  sub.add_option("--manifest", c.manifest, "bias sweep manifest (JSON)");
  sub.add_option("--out", c.out, "output directory (file for convert)");
  sub.add_option("--topology", c.topology, "circuit topology")
      ->check(CLI::IsMember({"hyg", "rhyg"}));
  sub.add_option("--seed", c.seed, "seed for every stochastic step");
  sub.add_option("--n-starts", c.n_starts, "multi-start count")->check(CLI::PositiveNumber);
  sub.add_option("--prominence", c.prominence, "minimum peak prominence (0..1)")
      ->check(CLI::Range(0.0, 1.0));
  sub.add_flag("--log-mag,!--no-log-mag", c.log_mag, "log |Z| axes in plots");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MSW resonator characterization and modeling"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string config_path;

  struct Sub {
    const char* name;
    const char* help;
    int (*run)(const RunConfig&);
  };
  const Sub subs[] = {
      {"convert", "convert between .s1p, CSV and JSON; optionally S<->Z",
       mswres::cli::cmd_convert},
      {"extract", "resonance metrics (fs, fp, Q, kt2, FOM) with plots", mswres::cli::cmd_extract},
      {"fit", "two-stage equivalent-circuit fit over a bias sweep", mswres::cli::cmd_fit},
      {"synth", "synthesize a bias sweep from a model config", mswres::cli::cmd_synth},
      {"anticross", "|Z| heatmap and anti-crossing splitting", mswres::cli::cmd_anticross},
  };
  std::vector<CLI::App*> apps;
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    add_common(*sub, cfg);
    sub->add_option("--config", config_path, "JSON config mirroring the flags");
    if (std::string(s.name) == "convert") {
      sub->add_flag("--z", cfg.to_z, "convert S to Z before writing");
      sub->add_flag("--to-s", cfg.to_s, "convert Z to S before writing");
      sub->add_option("--input-kind", cfg.input_kind, "kind of CSV input data")
          ->check(CLI::IsMember({"s", "z"}));
    }
    apps.push_back(sub);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    std::size_t chosen = 0;
    while (!apps[chosen]->parsed()) ++chosen;
    CLI::App* sub = apps[chosen];
    cfg.command = subs[chosen].name;
    if (!config_path.empty()) {
      std::map<std::string, bool> given;
      for (const char* flag : {"input", "zero-bias", "manifest", "out", "topology", "seed",
                               "n-starts", "prominence", "log-mag"}) {
        if (sub->count(std::string("--") + flag) > 0 ||
            (std::string(flag) == "log-mag" && sub->count("--no-log-mag") > 0)) {
          std::string key(flag);
          for (auto& ch : key)
            if (ch == '-') ch = '_';
          given[key] = true;
        }
      }
      mswres::Json j;
      try {
        j = mswres::Json::parse(mswres::cli::slurp(config_path));
      } catch (const mswres::Json::exception& e) {
        throw mswres::Error(config_path + ": " + e.what());
      }
      mswres::cli::apply_config(cfg, j, given);
      mswres::parse_topology(cfg.topology);
    }
    return subs[chosen].run(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
