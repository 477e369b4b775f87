#include "goa/commands.hpp"

#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "goa/execution.hpp"

namespace goa {

namespace {

constexpr std::size_t kAllColumns = std::numeric_limits<std::size_t>::max();
constexpr double kSimulationTolerance = 1e-8;

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::invalid_argument, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void require(const std::filesystem::path& p, std::string_view flag) {
  if (p.empty()) throw Error(ErrorKind::invalid_argument, "missing required option " + std::string(flag));
}

/// Hash over every input document (in flag order) plus the seed override.
std::string config_hash(const std::vector<std::filesystem::path>& inputs, const std::optional<std::uint64_t>& seed) {
  std::string blob;
  for (const auto& p : inputs) {
    if (p.empty()) continue;
    blob += read_text(p);
    blob += '\0';
  }
  if (seed) blob += "seed=" + std::to_string(*seed);
  return sha256_hex(blob);
}

RunReport finish(const CommandOptions& opts, std::string hash, std::map<std::string, std::string> outputs) {
  RunReport report;
  report.command = opts.command_line;
  report.config_hash = std::move(hash);
  report.outputs = std::move(outputs);
  write_json_file(opts.out / "run_report.json", to_json(report));
  return report;
}

std::vector<std::string> layer_names(const Network& net) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < net.size(); ++i) {
    names.push_back(net[i].name.empty() ? "layer " + std::to_string(i) : net[i].name);
  }
  return names;
}

}  // namespace

std::string plan_summary(const MappingPlan& plan, const std::vector<std::string>& names) {
  std::string out = fmt::format("GOA m={} n={} k={} W={}\n", plan.arch.m, plan.arch.n, plan.arch.k,
                                plan.arch.wavelengths);
  out += fmt::format("{:<14} {:>9} {:>9} {:>9} {:>8}\n", "layer", "footprint", "restored", "segments", "passes");
  for (std::size_t c = 0; c < plan.clusters.size(); ++c) {
    const auto& shape = plan.clusters[c];
    const auto segs = plan.segments(c);
    std::string passes;
    for (const auto& s : segs) passes += (passes.empty() ? "" : ",") + std::to_string(s.pass + 1);
    const std::string name = shape.layer < names.size() ? names[shape.layer] : "layer " + std::to_string(shape.layer);
    out += fmt::format("{:<14} {:>9} {:>9} {:>9} {:>8}\n", name,
                       fmt::format("{}x{}", shape.cols_mod, shape.rows_mod), shape.restored.size(), segs.size(),
                       passes);
  }
  out += fmt::format("mapping cost (passes): {}\n", mapping_cost(plan));
  out += fmt::format("E/O conversions:       {}\n", eo_conversions(plan));
  out += fmt::format("utilization:           {:.1f}%\n", 100.0 * utilization(plan));
  return out;
}

RunReport cmd_map(const CommandOptions& opts) {
  require(opts.arch, "--arch");
  require(opts.network, "--network");
  const ArchSpec arch = load_arch(opts.arch);
  const Network net = load_network(opts.network);
  DeviceParams params;
  params.note = "no device parameters supplied; all figures zero";
  if (!opts.device_params.empty()) params = load_device_params(opts.device_params);

  std::vector<ClusterShape> shapes;
  for (const auto& [index, shape] : weight_shapes(net)) shapes.push_back(cluster_shape(index, shape, arch.arch.k));
  MappingPlan plan = pack(shapes, arch.arch);
  const CostReport cost = estimate(plan, params);
  const std::string summary = plan_summary(plan, layer_names(net));
  spdlog::info("map: {} clusters in {} passes", plan.clusters.size(), mapping_cost(plan));

  write_json_file(opts.out / "plan.json", to_json(plan));
  write_json_file(opts.out / "cost.json", to_json(cost));
  write_text_file(opts.out / "summary.txt", summary);
  std::cout << summary;
  return finish(opts, config_hash({opts.arch, opts.network, opts.device_params}, opts.seed),
                {{"plan", "plan.json"}, {"cost", "cost.json"}, {"summary", "summary.txt"}});
}

RunReport cmd_search(const CommandOptions& opts) {
  require(opts.config, "--config");
  SearchConfig config = load_search_config(opts.config);
  if (opts.seed) config.seed = *opts.seed;
  if (!opts.device_params.empty()) config.device = load_device_params(opts.device_params);
  spdlog::info("search: budget {} MZIs, W = {}, population {}, {} generations", config.mzi_budget,
               config.wavelengths, config.population, config.generations);
  const SearchResult result = ga_search(config);
  spdlog::info("search: best m={} n={} k={} fitness {}", result.best.m, result.best.n, result.best.k,
               result.best.fitness);
  Json out = to_json(result);
  out["seed"] = config.seed;
  write_json_file(opts.out / "search.json", out);
  return finish(opts, config_hash({opts.config, opts.device_params}, opts.seed), {{"search", "search.json"}});
}

RunReport cmd_simulate(const CommandOptions& opts) {
  require(opts.arch, "--arch");
  require(opts.matrices, "--matrices");
  require(opts.input, "--input");
  const ArchSpec arch = load_arch(opts.arch);
  const JsonDocument mdoc = read_json_file(opts.matrices);
  const JsonDocument idoc = read_json_file(opts.input);

  std::vector<std::size_t> layers;
  const std::vector<Matrix> weights = with_locations(mdoc, [&](const JsonReader& root) {
    std::vector<Matrix> out;
    const JsonReader list = root.at("matrices");
    for (std::size_t i = 0; i < list.size(); ++i) {
      layers.push_back(list.at(i).size_or("layer", i));
      out.push_back(matrix_from_json(list.at(i).at("values")));
    }
    return out;
  });
  const std::vector<Vector> inputs = with_locations(idoc, [&](const JsonReader& root) {
    std::vector<Vector> out;
    const JsonReader list = root.at("inputs");
    for (std::size_t i = 0; i < list.size(); ++i) out.push_back(vector_from_json(list.at(i)));
    return out;
  });

  MappingPlan plan;
  if (!opts.plan.empty()) {
    plan = load_plan(opts.plan);
    if (!(plan.arch == arch.arch)) {
      throw Error(ErrorKind::invalid_argument, "plan was built for a different architecture than --arch");
    }
  } else {
    std::vector<ClusterShape> shapes;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      const MatrixShape s{static_cast<std::size_t>(weights[i].rows()), static_cast<std::size_t>(weights[i].cols())};
      shapes.push_back(cluster_shape(layers[i], s, arch.arch.k));
    }
    plan = pack(shapes, arch.arch);
  }

  const PlanExecution run = execute_plan(plan, weights, inputs, arch.row_wavelengths);
  Json outputs = Json::array();
  double worst = 0.0;
  for (std::size_t c = 0; c < weights.size(); ++c) {
    const Vector oracle = hardware_matrix(weights[c], arch.arch.k, plan.clusters[c].restored) * inputs[c];
    const Vector exact = weights[c] * inputs[c];
    const double err = (run.simulated[c] - oracle).cwiseAbs().maxCoeff();
    worst = std::max(worst, err);
    outputs.push_back(Json{{"layer", plan.clusters[c].layer},
                           {"simulated", to_json(run.simulated[c])},
                           {"oracle", to_json(oracle)},
                           {"exact", to_json(exact)},
                           {"max_abs_error", err}});
  }
  Json doc{{"schema_version", kSchemaVersion},
           {"activations", run.activations},
           {"tolerance", kSimulationTolerance},
           {"max_abs_error", worst},
           {"outputs", std::move(outputs)}};
  write_json_file(opts.out / "simulation.json", doc);
  spdlog::info("simulate: {} activations, max |simulated - oracle| = {:.3e}", run.activations, worst);
  if (worst > kSimulationTolerance) {
    throw Error(ErrorKind::invariant,
                fmt::format("simulation deviates from the dense oracle by {:.3e} (> {:.0e})", worst,
                            kSimulationTolerance));
  }
  return finish(opts, config_hash({opts.arch, opts.plan, opts.matrices, opts.input}, opts.seed),
                {{"simulation", "simulation.json"}});
}

// ---- train-demo ----

namespace {

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::identity: return "identity";
  }
  return "relu";
}

Json train_result_json(const TrainResult& r) {
  return Json{{"final_accuracy", r.final_accuracy}, {"projections", r.projections}, {"trace", to_json(r.trace)}};
}

}  // namespace

Json to_json(const TrainDemoConfig& c) {
  Json blobs{{"classes", c.blobs.classes},
             {"train_per_class", c.blobs.train_per_class},
             {"validation_per_class", c.blobs.validation_per_class},
             {"radius", c.blobs.radius},
             {"spread", c.blobs.spread},
             {"width", c.blobs.width},
             {"seed", c.blobs.seed}};
  Json budgets = Json::array();
  for (std::size_t b : c.restoration_budgets) {
    if (b == kAllColumns) {
      budgets.push_back("all");
    } else {
      budgets.push_back(b);
    }
  }
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["blobs"] = std::move(blobs);
  if (!c.train_csv.empty()) {
    j["train_csv"] = c.train_csv.string();
    j["validation_csv"] = c.validation_csv.string();
  }
  j["hidden"] = c.hidden;
  j["activation"] = activation_name(c.activation);
  j["init_seed"] = c.init_seed;
  j["schedule"] = to_json(c.schedule);
  Json arch = to_json(ArchSpec{c.arch, {}});
  arch.erase("schema_version");
  j["arch"] = std::move(arch);
  j["restoration_budgets"] = std::move(budgets);
  return j;
}

TrainDemoConfig train_demo_config_from_json(const JsonReader& in) {
  if (auto v = in.find("schema_version"); v && v->as_size() != static_cast<std::size_t>(kSchemaVersion)) {
    v->fail("unsupported schema_version");
  }
  TrainDemoConfig c;
  if (auto b = in.find("blobs")) {
    c.blobs.classes = b->size_or("classes", c.blobs.classes);
    c.blobs.train_per_class = b->size_or("train_per_class", c.blobs.train_per_class);
    c.blobs.validation_per_class = b->size_or("validation_per_class", c.blobs.validation_per_class);
    c.blobs.radius = b->double_or("radius", c.blobs.radius);
    c.blobs.spread = b->double_or("spread", c.blobs.spread);
    c.blobs.width = b->size_or("width", c.blobs.width);
    c.blobs.seed = b->size_or("seed", c.blobs.seed);
  }
  if (auto t = in.find("train_csv")) {
    c.train_csv = t->as_string();
    c.validation_csv = in.string_at("validation_csv");
  }
  if (auto h = in.find("hidden")) {
    c.hidden.clear();
    for (std::size_t i = 0; i < h->size(); ++i) c.hidden.push_back(h->at(i).as_size());
  }
  if (auto a = in.find("activation")) {
    const std::string name = a->as_string();
    if (name == "relu") {
      c.activation = Activation::relu;
    } else if (name == "tanh") {
      c.activation = Activation::tanh;
    } else if (name == "identity") {
      c.activation = Activation::identity;
    } else {
      a->fail("expected relu, tanh or identity");
    }
  }
  c.init_seed = in.size_or("init_seed", c.init_seed);
  if (auto s = in.find("schedule")) c.schedule = schedule_from_json(*s);
  if (auto a = in.find("arch")) c.arch = arch_from_json(*a).arch;
  if (auto b = in.find("restoration_budgets")) {
    for (std::size_t i = 0; i < b->size(); ++i) {
      const JsonReader v = b->at(i);
      if (v.json().is_string()) {
        if (v.as_string() != "all") v.fail("expected a count or \"all\"");
        c.restoration_budgets.push_back(kAllColumns);
      } else {
        c.restoration_budgets.push_back(v.as_size());
      }
    }
  }
  const std::size_t k = c.arch.k;
  auto check_width = [&](std::size_t w, const std::string& what) {
    if (w == 0 || w % k != 0) in.fail(what + " (" + std::to_string(w) + ") must be a positive multiple of k");
  };
  if (c.train_csv.empty()) check_width(c.blobs.width, "blobs.width");
  for (std::size_t h : c.hidden) check_width(h, "hidden width");
  return c;
}

RunReport cmd_train_demo(const CommandOptions& opts) {
  require(opts.config, "--config");
  const JsonDocument doc = read_json_file(opts.config);
  TrainDemoConfig config = with_locations(doc, [](const JsonReader& r) { return train_demo_config_from_json(r); });
  if (opts.seed) {
    config.schedule.seed = *opts.seed;
    config.init_seed = *opts.seed;
  }
  const std::size_t k = config.arch.k;

  Dataset train;
  Dataset validation;
  std::size_t classes = config.blobs.classes;
  if (!config.train_csv.empty()) {
    const auto base = opts.config.parent_path();
    train = load_csv(base / config.train_csv);
    validation = load_csv(base / config.validation_csv);
    classes = 0;
    for (std::size_t y : train.labels) classes = std::max(classes, y + 1);
    if (static_cast<std::size_t>(train.x.rows()) % k != 0) {
      throw Error(ErrorKind::invalid_argument, "dataset feature width must be a multiple of k");
    }
  } else {
    BlobData blobs = make_blobs(config.blobs);
    train = std::move(blobs.train);
    validation = std::move(blobs.validation);
  }

  std::vector<std::size_t> dims{static_cast<std::size_t>(train.x.rows())};
  dims.insert(dims.end(), config.hidden.begin(), config.hidden.end());
  dims.push_back(ceil_div(classes, k) * k);
  const ToyNet initial = ToyNet::random(dims, classes, config.activation, config.init_seed);

  Json out;
  out["schema_version"] = kSchemaVersion;
  out["config"] = to_json(config);
  const auto trace_path = opts.out / "trace.json";
  auto run_stage = [&](const std::string& stage, auto&& fn) {
    try {
      return fn();
    } catch (const TrainingDiverged& e) {
      out["diverged"] = Json{{"stage", stage}, {"message", e.what()}, {"partial_trace", to_json(e.trace())}};
      write_json_file(trace_path, out);
      throw;
    }
  };

  const TrainResult baseline =
      run_stage("float", [&] { return train_float(initial, train, validation, config.schedule); });
  out["float_baseline"] = train_result_json(baseline);
  const TrainResult hw =
      run_stage("hardware", [&] { return hw_aware_train(initial, train, validation, config.schedule, k); });
  out["hardware"] = train_result_json(hw);
  spdlog::info("train-demo: float accuracy {:.4f}, hardware-form accuracy {:.4f}", baseline.final_accuracy,
               hw.final_accuracy);

  const RestorationSelection ranking = rank_columns(layer_residuals(hw.net, k));
  double total_error = 0.0;
  for (const auto& c : ranking.columns) total_error += c.error;
  Json sweep = Json::array();
  for (std::size_t budget : config.restoration_budgets) {
    TrainSchedule schedule = config.schedule;
    schedule.restoration_budget = budget;
    const RestorationResult rr = run_stage("restoration", [&] {
      return restore_and_retrain(hw.net, train, validation, schedule, config.arch);
    });
    double covered = 0.0;
    Json restored = Json::array();
    for (const auto& c : rr.selection.columns) {
      covered += c.error;
      restored.push_back(Json{{"layer", c.ref.layer}, {"column", c.ref.column}, {"error", c.error}});
    }
    Json entry = train_result_json(rr.retrained);
    entry["budget"] = budget == kAllColumns ? Json("all") : Json(budget);
    entry["restored"] = std::move(restored);
    entry["shortfall"] = rr.selection.shortfall;
    entry["residual_coverage"] = total_error > 0.0 ? covered / total_error : 1.0;
    sweep.push_back(std::move(entry));
  }
  out["restoration"] = std::move(sweep);
  write_json_file(trace_path, out);
  return finish(opts, config_hash({opts.config}, opts.seed), {{"trace", "trace.json"}});
}

}  // namespace goa
