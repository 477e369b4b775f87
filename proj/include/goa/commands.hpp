#pragma once

// Subcommand implementations behind the `goa` executable. Each writes its
// artifacts plus run_report.json into the output directory and returns the
// report; failures surface as goa::Error.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "goa/io.hpp"
#include "goa/trainer.hpp"

namespace goa {

struct CommandOptions {
  std::string command_line;  // echoed into the run report
  std::filesystem::path config;
  std::filesystem::path arch;
  std::filesystem::path network;
  std::filesystem::path device_params;
  std::filesystem::path plan;
  std::filesystem::path matrices;
  std::filesystem::path input;
  std::filesystem::path out = "out";
  std::optional<std::uint64_t> seed;
};

RunReport cmd_search(const CommandOptions& options);
RunReport cmd_map(const CommandOptions& options);
RunReport cmd_simulate(const CommandOptions& options);
RunReport cmd_train_demo(const CommandOptions& options);

struct TrainDemoConfig {
  BlobSpec blobs;
  std::filesystem::path train_csv;       // optional external data
  std::filesystem::path validation_csv;  // required with train_csv
  std::vector<std::size_t> hidden{16, 16};
  Activation activation = Activation::relu;
  std::uint64_t init_seed = 3;
  TrainSchedule schedule;
  GoaArch arch{8, 16, 4, 8};
  /// Restoration budgets to sweep after hardware-aware training; "all" in
  /// JSON reads as every column of the net.
  std::vector<std::size_t> restoration_budgets;

  friend bool operator==(const TrainDemoConfig&, const TrainDemoConfig&) = default;
};

Json to_json(const TrainDemoConfig& config);
TrainDemoConfig train_demo_config_from_json(const JsonReader& in);

/// Summary table printed by `map` and written to summary.txt.
std::string plan_summary(const MappingPlan& plan, const std::vector<std::string>& layer_names);

}  // namespace goa
