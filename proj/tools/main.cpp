#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "ehcoop/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "Stability-region bounds and slot-level simulation for a cognitive "
      "radio network with an energy-harvesting cooperative relay"};

  std::string config_path;
  std::string mode;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::uint64_t horizon = 0;
  double f_step = 0.0;

  app.add_option("--config", config_path, "key=value configuration file")
      ->check(CLI::ExistingFile);
  auto* mode_opt =
      app.add_option("--mode", mode,
                     "bounds, inner-envelope, outer-envelope, simulate, "
                     "validate, fig1, fig2, fig3 or fig4");
  auto* seed_opt = app.add_option("--seed", seed, "master RNG seed");
  auto* out_opt = app.add_option("--out", out_dir, "output directory");
  auto* fstep_opt =
      app.add_option("--f-step", f_step, "admission probability grid step");
  auto* horizon_opt =
      app.add_option("--horizon", horizon, "simulation length in slots");

  CLI11_PARSE(app, argc, argv);

  try {
    ehcoop::ExperimentConfig cfg;
    if (!config_path.empty()) {
      cfg = ehcoop::ExperimentConfig::from_file(config_path);
    }
    if (*mode_opt) cfg.set("mode", mode);
    if (*seed_opt) cfg.set("seed", std::to_string(seed));
    if (*out_opt) cfg.set("out_dir", out_dir);
    if (*fstep_opt) cfg.set("f_step", ehcoop::format_number(f_step));
    if (*horizon_opt) cfg.set("horizon", std::to_string(horizon));
    return ehcoop::run_experiment(cfg);
  } catch (const ehcoop::ConfigError& err) {
    std::cerr << "config error: " << err.what() << '\n';
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
}
