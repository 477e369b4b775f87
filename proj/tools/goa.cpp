// goa: search, map, simulate and train-demo front end.
//
// Exit codes: 0 success, 1 user error, 2 infeasible, 3 internal invariant.
// Log verbosity comes from SPDLOG_LEVEL (default warn), e.g. SPDLOG_LEVEL=info.

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <spdlog/cfg/env.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "goa/commands.hpp"

namespace {

std::string join_args(int argc, char** argv) {
  std::string out = "goa";
  for (int i = 1; i < argc; ++i) {
    out += ' ';
    out += argv[i];
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("goa"));
  spdlog::set_level(spdlog::level::warn);
  spdlog::cfg::load_env_levels();

  CLI::App app{"Hybrid general-purpose optical accelerator toolkit"};
  app.require_subcommand(1);

  goa::CommandOptions opts;
  std::uint64_t seed = 0;
  std::string out = "out";

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", out, "Output directory")->capture_default_str();
    sub->add_option("--seed", seed, "Override the seed in the config");
    sub->add_option("--device-params", opts.device_params, "Device parameter table (JSON)");
  };

  auto* search = app.add_subcommand("search", "Genetic search over (m, n, k)");
  search->add_option("--config", opts.config, "Search config (JSON)")->required();
  add_common(search);

  auto* map = app.add_subcommand("map", "Pack a network onto a GOA and estimate its cost");
  map->add_option("--arch", opts.arch, "Architecture (JSON)")->required();
  map->add_option("--network", opts.network, "Network layer shapes (JSON)")->required();
  map->add_option("--config", opts.config, "Unused; accepted for symmetry");
  add_common(map);

  auto* simulate = app.add_subcommand("simulate", "Run matrices through the simulated grid");
  simulate->add_option("--arch", opts.arch, "Architecture (JSON)")->required();
  simulate->add_option("--plan", opts.plan, "Mapping plan (JSON); packed from the matrices when absent");
  simulate->add_option("--matrices", opts.matrices, "Weight matrices (JSON)")->required();
  simulate->add_option("--input", opts.input, "Input vectors (JSON)")->required();
  add_common(simulate);

  auto* train = app.add_subcommand("train-demo", "Hardware-aware training on a toy dataset");
  train->add_option("--config", opts.config, "Training config (JSON)")->required();
  add_common(train);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  opts.out = out;
  opts.command_line = join_args(argc, argv);
  for (auto* sub : {search, map, simulate, train}) {
    if (sub->parsed() && sub->count("--seed") > 0) opts.seed = seed;
  }

  try {
    if (search->parsed()) goa::cmd_search(opts);
    if (map->parsed()) goa::cmd_map(opts);
    if (simulate->parsed()) goa::cmd_simulate(opts);
    if (train->parsed()) goa::cmd_train_demo(opts);
  } catch (const goa::Error& e) {
    std::cerr << "goa: error: " << e.what() << '\n';
    return goa::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "goa: internal error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
