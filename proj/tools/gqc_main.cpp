#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gqc/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Numerical convexity analysis of stored-energy potentials on matrix Lie groups"};

  std::string config_path;
  gqc::RunOverrides ov;
  std::uint64_t seed = 0;
  long samples = 0;
  std::string out_path, fd_order;
  double fd_step = 0.0;
  bool richardson = false;

  app.add_option("--config", config_path, "JSON run configuration")->required();
  auto* seed_opt = app.add_option("--seed", seed, "override the config seed");
  auto* samples_opt = app.add_option("--samples", samples, "override the sampling budget");
  auto* out_opt = app.add_option("--out", out_path, "report output path");
  app.add_flag("--dump-witnesses", ov.dump_witnesses, "emit the full witness stream");
  auto* step_opt = app.add_option("--fd-step", fd_step, "finite-difference step");
  auto* order_opt = app.add_option("--fd-order", fd_order, "central2 | central4");
  auto* rich_opt = app.add_flag("--richardson", richardson, "Richardson extrapolation");

  CLI11_PARSE(app, argc, argv);

  std::ifstream f(config_path);
  if (!f) {
    std::cerr << "error: cannot open config " << config_path << "\n";
    return 2;
  }
  nlohmann::json config;
  try {
    f >> config;
  } catch (const std::exception& e) {
    std::cerr << "error: bad config JSON: " << e.what() << "\n";
    return 2;
  }

  if (seed_opt->count()) ov.seed = seed;
  if (samples_opt->count()) ov.samples = samples;
  if (out_opt->count()) ov.out = out_path;
  if (step_opt->count()) ov.fd_step = fd_step;
  if (order_opt->count()) ov.fd_order = fd_order;
  if (rich_opt->count()) ov.richardson = richardson;

  return gqc::run_config(config, ov, std::cout);
}
