// gamblet: transform / denoise / graph / selftest front end.

#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "gamblet/gamblet.hpp"

namespace {

struct Overrides {
  // Flag name -> config key, in declaration order.
  std::vector<std::pair<std::string, std::string>> keys = {
      {"problem", "problem"},     {"q", "q"},
      {"sigma", "sigma"},         {"M", "M"},
      {"methods", "methods"},     {"trials", "trials"},
      {"seed", "seed"},           {"coefficient", "coefficient"},
      {"coefficient-file", "coefficient_file"},
      {"signal", "signal"},       {"out", "out"},
      {"trunc", "trunc"},         {"threads", "threads"},
      {"confidence", "confidence"},
      {"tuning-trials", "tuning_trials"},
      {"graph", "graph_file"},    {"ground", "ground"},
      {"synthetic-grid", "synthetic_grid"},
      {"sigma-rms-factor", "sigma_rms_factor"},
  };
  std::map<std::string, std::string> values;
  std::string config;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "key = value config file")->check(CLI::ExistingFile);
    for (const auto& [flag, key] : keys) app->add_option("--" + flag, values[key], "sets `" + key + "`");
  }

  gamblet::ExperimentConfig resolve(CLI::App* app, const std::string& problem) const {
    gamblet::ExperimentConfig cfg;
    if (!problem.empty()) cfg.problem = problem;
    if (!config.empty()) cfg = gamblet::read_config_file(config, cfg);
    // Flags win over the file.
    for (const auto& [flag, key] : keys)
      if (app->count("--" + flag) > 0) gamblet::apply_setting(cfg, key, values.at(key));
    return cfg;
  }
};

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("gamblet");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("GAMBLET_LOG")) {
    const auto level = spdlog::level::from_str(env);
    spdlog::set_level(level);
  }
}

void log_sink(const std::string& level, const std::string& msg) {
  if (level == "warn") {
    spdlog::warn("{}", msg);
  } else {
    spdlog::info("{}", msg);
  }
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Operator-adapted wavelet transforms and denoising experiments"};
  app.require_subcommand(1);

  Overrides transform_flags;
  Overrides denoise_flags;
  Overrides graph_flags;
  auto* transform = app.add_subcommand("transform", "compute (or reuse) the gamblet system for a problem");
  auto* denoise = app.add_subcommand("denoise", "Monte-Carlo comparison of the four recovery methods");
  auto* graph = app.add_subcommand("graph", "denoising on a grounded graph Laplacian");
  auto* selftest = app.add_subcommand("selftest", "run the invariant suite on small problems");
  transform_flags.attach(transform);
  denoise_flags.attach(denoise);
  graph_flags.attach(graph);

  CLI11_PARSE(app, argc, argv);

  try {
    if (transform->parsed()) {
      const auto cfg = transform_flags.resolve(transform, "");
      const auto res = gamblet::cmd_transform(cfg, log_sink);
      std::cout << "levels " << res.sys.levels() << (res.cache_hit ? " (cached)" : "") << "\n";
      for (int k = 1; k <= res.sys.levels(); ++k)
        std::cout << "  k=" << k << " |I|=" << res.sys.hierarchy->size(k) << " |J|=" << res.sys.hierarchy->detail_size(k)
                  << "\n";
    } else if (denoise->parsed()) {
      const auto cfg = denoise_flags.resolve(denoise, "");
      const auto res = gamblet::cmd_denoise(cfg, log_sink);
      std::cout << "l_dagger " << res.stats.level << ", noise energy " << res.stats.noise_energy_avg << "\n";
      for (const auto& m : res.stats.methods)
        std::cout << "  " << m.method << ": energy " << m.energy_avg << " +- " << m.energy_std << ", L2 " << m.l2_avg
                  << "\n";
    } else if (graph->parsed()) {
      const auto cfg = graph_flags.resolve(graph, "graph");
      const auto res = gamblet::cmd_graph(cfg, log_sink);
      const auto& r = res.run;
      std::cout << "H " << r.estimate.H << ", d_eff " << r.estimate.d_eff << ", l_dagger " << r.level << ", sigma "
                << r.sigma << "\n";
      std::cout << "  noise energy " << r.stats.noise_energy_avg << "\n";
      for (const auto& m : r.stats.methods) std::cout << "  " << m.method << ": energy " << m.energy_avg << "\n";
    } else if (selftest->parsed()) {
      bool ok = true;
      for (const auto& line : gamblet::cmd_selftest()) {
        std::cout << (line.pass ? "PASS " : "FAIL ") << line.name << ": " << line.detail << "\n";
        ok = ok && line.pass;
      }
      return ok ? 0 : 1;
    }
  } catch (const gamblet::Error& e) {
    spdlog::error("{}", e.what());
    return 1;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
