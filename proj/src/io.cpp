#include "goa/io.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <openssl/evp.h>

namespace goa {

namespace {

std::string child_pointer(const std::string& base, std::string_view key) {
  std::string escaped;
  for (char c : key) {
    if (c == '~') {
      escaped += "~0";
    } else if (c == '/') {
      escaped += "~1";
    } else {
      escaped += c;
    }
  }
  return base + "/" + escaped;
}

std::vector<std::string> split_pointer(std::string_view pointer) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < pointer.size() && pointer[pos] == '/') {
    const std::size_t next = pointer.find('/', pos + 1);
    std::string token(pointer.substr(pos + 1, next == std::string_view::npos ? std::string_view::npos : next - pos - 1));
    std::string unescaped;
    for (std::size_t i = 0; i < token.size(); ++i) {
      if (token[i] == '~' && i + 1 < token.size()) {
        unescaped += token[i + 1] == '1' ? '/' : '~';
        ++i;
      } else {
        unescaped += token[i];
      }
    }
    out.push_back(std::move(unescaped));
    if (next == std::string_view::npos) break;
    pos = next;
  }
  return out;
}

/// Minimal scanner over already-validated JSON text, used only to map a
/// pointer back to a byte offset.
class TextScanner {
 public:
  explicit TextScanner(std::string_view text) : text_(text) {}

  std::size_t locate(const std::vector<std::string>& tokens) {
    pos_ = 0;
    skip_ws();
    std::size_t best = pos_;
    for (const auto& token : tokens) {
      if (!descend(token)) break;
      best = pos_;
    }
    return best;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::string read_string() {
    std::string out;
    ++pos_;  // opening quote
    while (pos_ < text_.size() && text_[pos_] != '"') {
      if (text_[pos_] == '\\') ++pos_;
      if (pos_ < text_.size()) out += text_[pos_++];
    }
    ++pos_;
    return out;
  }

  void skip_value() {
    skip_ws();
    if (pos_ >= text_.size()) return;
    const char c = text_[pos_];
    if (c == '"') {
      read_string();
    } else if (c == '{' || c == '[') {
      int depth = 0;
      while (pos_ < text_.size()) {
        const char d = text_[pos_];
        if (d == '"') {
          read_string();
          continue;
        }
        if (d == '{' || d == '[') ++depth;
        if (d == '}' || d == ']') {
          if (--depth == 0) {
            ++pos_;
            return;
          }
        }
        ++pos_;
      }
    } else {
      while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != '}' && text_[pos_] != ']') ++pos_;
    }
  }

  // Moves pos_ to the start of the child value named by `token`.
  bool descend(const std::string& token) {
    skip_ws();
    if (pos_ >= text_.size()) return false;
    if (text_[pos_] == '{') {
      ++pos_;
      while (true) {
        skip_ws();
        if (pos_ >= text_.size() || text_[pos_] != '"') return false;
        const std::string key = read_string();
        skip_ws();
        ++pos_;  // colon
        skip_ws();
        if (key == token) return true;
        skip_value();
        skip_ws();
        if (pos_ >= text_.size() || text_[pos_] != ',') return false;
        ++pos_;
      }
    }
    if (text_[pos_] == '[') {
      std::size_t index = 0;
      try {
        index = std::stoul(token);
      } catch (const std::exception&) {
        return false;
      }
      ++pos_;
      for (std::size_t i = 0; i < index; ++i) {
        skip_value();
        skip_ws();
        if (pos_ >= text_.size() || text_[pos_] != ',') return false;
        ++pos_;
      }
      skip_ws();
      return true;
    }
    return false;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::size_t line_at(std::string_view text, std::size_t offset) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

void check_schema(const JsonReader& in) {
  if (auto v = in.find("schema_version")) {
    if (v->as_size() != static_cast<std::size_t>(kSchemaVersion)) {
      v->fail("unsupported schema_version (expected " + std::to_string(kSchemaVersion) + ")");
    }
  }
}

Json with_schema(Json body) {
  Json out;
  out["schema_version"] = kSchemaVersion;
  for (auto& [key, value] : body.items()) out[key] = std::move(value);
  return out;
}

template <class T, class Fn>
T load_file(const std::filesystem::path& path, Fn&& parse) {
  const JsonDocument doc = read_json_file(path);
  return with_locations(doc, [&](const JsonReader& root) -> T { return parse(root); });
}

}  // namespace

JsonReader JsonReader::at(std::string_view key) const {
  if (!json_->is_object()) fail("expected an object");
  const auto it = json_->find(std::string(key));
  if (it == json_->end()) fail("missing required key '" + std::string(key) + "'");
  return JsonReader(*it, child_pointer(pointer_, key));
}

std::optional<JsonReader> JsonReader::find(std::string_view key) const {
  if (!json_->is_object()) fail("expected an object");
  const auto it = json_->find(std::string(key));
  if (it == json_->end() || it->is_null()) return std::nullopt;
  return JsonReader(*it, child_pointer(pointer_, key));
}

JsonReader JsonReader::at(std::size_t index) const {
  if (!json_->is_array()) fail("expected an array");
  if (index >= json_->size()) fail("index " + std::to_string(index) + " out of range");
  return JsonReader((*json_)[index], pointer_ + "/" + std::to_string(index));
}

std::size_t JsonReader::size() const {
  if (!json_->is_array()) fail("expected an array");
  return json_->size();
}

std::size_t JsonReader::as_size() const {
  if (json_->is_number_unsigned()) return json_->get<std::size_t>();
  if (json_->is_number_integer()) fail("expected a nonnegative integer, got " + json_->dump());
  fail("expected a nonnegative integer");
}

double JsonReader::as_double() const {
  if (json_->is_null()) return std::numeric_limits<double>::infinity();
  if (!json_->is_number()) fail("expected a number");
  return json_->get<double>();
}

bool JsonReader::as_bool() const {
  if (!json_->is_boolean()) fail("expected true or false");
  return json_->get<bool>();
}

std::string JsonReader::as_string() const {
  if (!json_->is_string()) fail("expected a string");
  return json_->get<std::string>();
}

std::size_t JsonReader::size_or(std::string_view key, std::size_t fallback) const {
  auto v = find(key);
  return v ? v->as_size() : fallback;
}

double JsonReader::double_or(std::string_view key, double fallback) const {
  auto v = find(key);
  return v ? v->as_double() : fallback;
}

bool JsonReader::bool_or(std::string_view key, bool fallback) const {
  auto v = find(key);
  return v ? v->as_bool() : fallback;
}

void JsonReader::fail(const std::string& message) const { throw SchemaError(pointer_, message); }

std::size_t JsonDocument::line_of(std::string_view pointer) const {
  TextScanner scanner(text);
  return line_at(text, scanner.locate(split_pointer(pointer)));
}

JsonDocument parse_json_text(std::string text, std::filesystem::path origin) {
  JsonDocument doc;
  doc.path = std::move(origin);
  doc.text = std::move(text);
  try {
    doc.json = Json::parse(doc.text);
  } catch (const Json::parse_error& e) {
    const std::size_t line = line_at(doc.text, e.byte == 0 ? 0 : e.byte - 1);
    std::string what = e.what();
    if (const auto cut = what.find("parse error"); cut != std::string::npos) what = what.substr(cut);
    throw Error(ErrorKind::invalid_argument, doc.path.string() + ":" + std::to_string(line) + ": " + what);
  }
  return doc;
}

JsonDocument read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::invalid_argument, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str(), path);
}

std::string dump(const Json& json) { return json.dump(2) + "\n"; }

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::invalid_argument, "cannot write " + path.string());
  out << text;
}

void write_json_file(const std::filesystem::path& path, const Json& json) { write_text_file(path, dump(json)); }

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::invariant, "SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

// ---- network ----

namespace {

std::string_view kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::conv: return "conv";
    case LayerKind::dense: return "dense";
    case LayerKind::pool: return "pool";
  }
  return "conv";
}

}  // namespace

Json to_json(const Network& network) {
  Json layers = Json::array();
  for (const auto& l : network) {
    Json j;
    j["kind"] = kind_name(l.kind);
    if (!l.name.empty()) j["name"] = l.name;
    if (l.kind == LayerKind::pool) {
      j["pool_ratio"] = l.pool_ratio;
    } else {
      j["filters"] = l.filters;
      j["kernel"] = l.kernel;
      j["depth"] = l.depth;
      if (l.branch) j["branch"] = true;
    }
    layers.push_back(std::move(j));
  }
  return with_schema(Json{{"layers", std::move(layers)}});
}

Network network_from_json(const JsonReader& in) {
  check_schema(in);
  const JsonReader layers = in.at("layers");
  Network net;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const JsonReader l = layers.at(i);
    LayerSpec spec;
    const std::string kind = l.string_at("kind");
    if (kind == "conv") {
      spec.kind = LayerKind::conv;
    } else if (kind == "dense") {
      spec.kind = LayerKind::dense;
    } else if (kind == "pool") {
      spec.kind = LayerKind::pool;
    } else {
      l.at("kind").fail("unknown layer kind '" + kind + "' (expected conv, dense or pool)");
    }
    if (auto name = l.find("name")) spec.name = name->as_string();
    if (spec.kind == LayerKind::pool) {
      spec.pool_ratio = l.size_or("pool_ratio", 1);
    } else {
      spec.filters = l.size_at("filters");
      spec.kernel = l.size_or("kernel", 1);
      spec.depth = l.size_at("depth");
      spec.branch = l.bool_or("branch", false);
    }
    net.push_back(std::move(spec));
  }
  try {
    validate_network(net);
  } catch (const Error& e) {
    layers.fail(e.what());
  }
  return net;
}

Network load_network(const std::filesystem::path& path) {
  return load_file<Network>(path, [](const JsonReader& r) { return network_from_json(r); });
}

// ---- architecture ----

Json to_json(const ArchSpec& spec) {
  Json j{{"m", spec.arch.m}, {"n", spec.arch.n}, {"k", spec.arch.k}, {"wavelengths", spec.arch.wavelengths}};
  if (!spec.row_wavelengths.empty()) j["row_wavelengths"] = spec.row_wavelengths;
  return with_schema(std::move(j));
}

ArchSpec arch_from_json(const JsonReader& in) {
  check_schema(in);
  ArchSpec spec;
  spec.arch.m = in.size_at("m");
  spec.arch.n = in.size_at("n");
  spec.arch.k = in.size_at("k");
  spec.arch.wavelengths = in.size_or("wavelengths", spec.arch.m);
  try {
    spec.arch.validate();
  } catch (const Error& e) {
    in.fail(e.what());
  }
  if (auto rw = in.find("row_wavelengths")) {
    if (rw->size() != spec.arch.m) rw->fail("expected one wavelength per module row");
    for (std::size_t i = 0; i < rw->size(); ++i) {
      const std::size_t w = rw->at(i).as_size();
      if (w >= spec.arch.wavelengths) rw->at(i).fail("wavelength index exceeds the channel count");
      spec.row_wavelengths.push_back(w);
    }
  }
  return spec;
}

ArchSpec load_arch(const std::filesystem::path& path) {
  return load_file<ArchSpec>(path, [](const JsonReader& r) { return arch_from_json(r); });
}

// ---- device params ----

Json to_json(const DeviceParams& p) {
  Json components;
  for (Component c : kComponents) {
    const auto& e = p[c];
    components[std::string(component_name(c))] = Json{{"area_um2", e.area_um2},
                                                      {"static_power_mw", e.static_power_mw},
                                                      {"dynamic_energy_pj", e.dynamic_energy_pj},
                                                      {"latency_ns", e.latency_ns}};
  }
  Json j;
  j["note"] = p.note;
  j["components"] = std::move(components);
  j["eo_conversion"] = Json{{"latency_ns", p.eo_latency_ns}, {"energy_pj", p.eo_energy_pj}};
  return with_schema(std::move(j));
}

DeviceParams device_params_from_json(const JsonReader& in) {
  check_schema(in);
  DeviceParams p;
  if (auto note = in.find("note")) p.note = note->as_string();
  const JsonReader components = in.at("components");
  for (Component c : kComponents) {
    const JsonReader e = components.at(component_name(c));
    p[c] = {e.double_at("area_um2"), e.double_at("static_power_mw"), e.double_at("dynamic_energy_pj"),
            e.double_at("latency_ns")};
  }
  if (auto eo = in.find("eo_conversion")) {
    p.eo_latency_ns = eo->double_at("latency_ns");
    p.eo_energy_pj = eo->double_at("energy_pj");
  }
  try {
    p.validate();
  } catch (const Error& e) {
    in.fail(e.what());
  }
  return p;
}

DeviceParams load_device_params(const std::filesystem::path& path) {
  return load_file<DeviceParams>(path, [](const JsonReader& r) { return device_params_from_json(r); });
}

// ---- plan ----

Json to_json(const MappingPlan& plan) {
  Json clusters = Json::array();
  for (const auto& c : plan.clusters) {
    clusters.push_back(Json{{"layer", c.layer},
                            {"rows_mod", c.rows_mod},
                            {"cols_mod", c.cols_mod},
                            {"restored", std::vector<std::size_t>(c.restored.begin(), c.restored.end())}});
  }
  Json passes = Json::array();
  for (const auto& pass : plan.passes) {
    Json placements = Json::array();
    for (const auto& p : pass) {
      placements.push_back(Json{{"cluster", p.cluster},
                                {"row", p.row},
                                {"col", p.col},
                                {"height", p.height},
                                {"width", p.width},
                                {"segment", p.segment},
                                {"block_begin", p.block_begin}});
    }
    passes.push_back(std::move(placements));
  }
  Json arch = to_json(ArchSpec{plan.arch, {}});
  arch.erase("schema_version");
  return with_schema(Json{{"arch", std::move(arch)},
                          {"mapping_cost", mapping_cost(plan)},
                          {"eo_conversions", eo_conversions(plan)},
                          {"clusters", std::move(clusters)},
                          {"passes", std::move(passes)}});
}

MappingPlan plan_from_json(const JsonReader& in) {
  check_schema(in);
  MappingPlan plan;
  plan.arch = arch_from_json(in.at("arch")).arch;
  const JsonReader clusters = in.at("clusters");
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    const JsonReader c = clusters.at(i);
    ClusterShape shape{c.size_at("layer"), c.size_at("rows_mod"), c.size_at("cols_mod"), {}};
    if (auto restored = c.find("restored")) {
      for (std::size_t r = 0; r < restored->size(); ++r) {
        const std::size_t col = restored->at(r).as_size();
        if (col >= shape.rows_mod) restored->at(r).fail("restored column out of range");
        shape.restored.insert(col);
      }
    }
    plan.clusters.push_back(std::move(shape));
  }
  const JsonReader passes = in.at("passes");
  for (std::size_t p = 0; p < passes.size(); ++p) {
    const JsonReader pass = passes.at(p);
    std::vector<Placement> placements;
    for (std::size_t i = 0; i < pass.size(); ++i) {
      const JsonReader e = pass.at(i);
      Placement pl{e.size_at("cluster"), p,          e.size_at("row"),     e.size_at("col"),
                   e.size_at("height"),  e.size_at("width"), e.size_at("segment"), e.size_at("block_begin")};
      if (pl.cluster >= plan.clusters.size()) e.at("cluster").fail("cluster index out of range");
      placements.push_back(pl);
    }
    plan.passes.push_back(std::move(placements));
  }
  const auto violations = plan_violations(plan);
  if (!violations.empty()) in.at("passes").fail("illegal plan: " + violations.front());
  return plan;
}

MappingPlan load_plan(const std::filesystem::path& path) {
  return load_file<MappingPlan>(path, [](const JsonReader& r) { return plan_from_json(r); });
}

// ---- cost report ----

Json to_json(const CostReport& r) {
  Json counts;
  for (Component c : kComponents) counts[std::string(component_name(c))] = r.counts[c];
  return with_schema(Json{{"counts", std::move(counts)},
                          {"area_um2", r.area_um2},
                          {"power_mw", r.power_mw},
                          {"latency_ns", r.latency_ns},
                          {"energy_pj", r.energy_pj},
                          {"passes", r.passes},
                          {"eo_conversions", r.eo_conversions},
                          {"programmed_mzis", r.programmed_mzis},
                          {"pass_latency_ns", r.pass_latency_ns},
                          {"formulas", r.formulas}});
}

CostReport cost_report_from_json(const JsonReader& in) {
  check_schema(in);
  CostReport r;
  const JsonReader counts = in.at("counts");
  for (Component c : kComponents) r.counts[c] = counts.size_at(component_name(c));
  r.area_um2 = in.double_at("area_um2");
  r.power_mw = in.double_at("power_mw");
  r.latency_ns = in.double_at("latency_ns");
  r.energy_pj = in.double_at("energy_pj");
  r.passes = in.size_at("passes");
  r.eo_conversions = in.size_at("eo_conversions");
  r.programmed_mzis = in.size_at("programmed_mzis");
  r.pass_latency_ns = in.double_at("pass_latency_ns");
  r.formulas = in.string_at("formulas");
  return r;
}

// ---- search ----

namespace {

Json range_json(const IntRange& r) { return Json::array({r.lo, r.hi}); }

IntRange range_from(const JsonReader& in) {
  if (in.size() != 2) in.fail("expected [lo, hi]");
  IntRange r{in.at(std::size_t{0}).as_size(), in.at(std::size_t{1}).as_size()};
  if (r.lo > r.hi) in.fail("range lo exceeds hi");
  return r;
}

Json candidate_json(const Candidate& c) {
  return Json{{"m", c.m}, {"n", c.n}, {"k", c.k}, {"fitness", c.fitness}, {"feasible", c.feasible}};
}

}  // namespace

Json to_json(const SearchConfig& c) {
  Json workloads = Json::array();
  for (const auto& w : c.workloads) workloads.push_back(to_json(w));
  Json j{{"weights", {{"alpha", c.weights.alpha}, {"beta", c.weights.beta}, {"gamma", c.weights.gamma},
                      {"delta", c.weights.delta}}},
         {"mzi_budget", c.mzi_budget},
         {"wavelengths", c.wavelengths},
         {"k_range", range_json(c.k_range)}};
  if (c.m_range) j["m_range"] = range_json(*c.m_range);
  if (c.n_range) j["n_range"] = range_json(*c.n_range);
  j["population"] = c.population;
  j["generations"] = c.generations;
  j["crossover_rate"] = c.crossover_rate;
  j["mutation_rate"] = c.mutation_rate;
  j["seed"] = c.seed;
  j["normalization"] = c.normalization == Normalization::raw ? "raw" : "reference";
  j["workloads"] = std::move(workloads);
  j["device_params"] = to_json(c.device);
  return with_schema(std::move(j));
}

SearchConfig search_config_from_json(const JsonReader& in, const std::filesystem::path& base_dir) {
  check_schema(in);
  SearchConfig c;
  if (auto w = in.find("weights")) {
    c.weights = {w->double_or("alpha", 1.0), w->double_or("beta", 0.0), w->double_or("gamma", 0.0),
                 w->double_or("delta", 0.0)};
  }
  c.mzi_budget = in.size_at("mzi_budget");
  c.wavelengths = in.size_at("wavelengths");
  c.k_range = range_from(in.at("k_range"));
  if (auto r = in.find("m_range")) c.m_range = range_from(*r);
  if (auto r = in.find("n_range")) c.n_range = range_from(*r);
  c.population = in.size_or("population", c.population);
  c.generations = in.size_or("generations", c.generations);
  c.crossover_rate = in.double_or("crossover_rate", c.crossover_rate);
  c.mutation_rate = in.double_or("mutation_rate", c.mutation_rate);
  c.seed = in.size_or("seed", c.seed);
  if (auto n = in.find("normalization")) {
    const std::string mode = n->as_string();
    if (mode == "raw") {
      c.normalization = Normalization::raw;
    } else if (mode != "reference") {
      n->fail("expected \"reference\" or \"raw\"");
    }
  }
  const JsonReader workloads = in.at("workloads");
  for (std::size_t i = 0; i < workloads.size(); ++i) {
    const JsonReader w = workloads.at(i);
    if (w.json().is_string()) {
      try {
        c.workloads.push_back(load_network(base_dir / w.as_string()));
      } catch (const Error& e) {
        w.fail(e.what());
      }
    } else {
      c.workloads.push_back(network_from_json(w));
    }
  }
  if (auto d = in.find("device_params")) {
    if (d->json().is_string()) {
      try {
        c.device = load_device_params(base_dir / d->as_string());
      } catch (const Error& e) {
        d->fail(e.what());
      }
    } else {
      c.device = device_params_from_json(*d);
    }
  }
  try {
    c.validate();
  } catch (const Error& e) {
    in.fail(e.what());
  }
  return c;
}

SearchConfig load_search_config(const std::filesystem::path& path) {
  const auto base = path.parent_path();
  return load_file<SearchConfig>(path, [&](const JsonReader& r) { return search_config_from_json(r, base); });
}

Json to_json(const SearchResult& r) {
  Json j{{"best", candidate_json(r.best)}, {"history", r.history}, {"evaluations", r.evaluations}};
  if (r.reference) {
    j["reference"] = Json{{"m", r.reference->m}, {"n", r.reference->n}, {"k", r.reference->k},
                          {"wavelengths", r.reference->wavelengths}};
  } else {
    j["reference"] = nullptr;
  }
  return with_schema(std::move(j));
}

SearchResult search_result_from_json(const JsonReader& in) {
  check_schema(in);
  SearchResult r;
  const JsonReader best = in.at("best");
  r.best = {best.size_at("m"), best.size_at("n"), best.size_at("k"), best.double_at("fitness"),
            best.at("feasible").as_bool()};
  const JsonReader history = in.at("history");
  for (std::size_t i = 0; i < history.size(); ++i) r.history.push_back(history.at(i).as_double());
  r.evaluations = in.size_at("evaluations");
  if (auto ref = in.find("reference")) {
    r.reference = GoaArch{ref->size_at("m"), ref->size_at("n"), ref->size_at("k"), ref->size_at("wavelengths")};
  }
  return r;
}

// ---- training ----

Json to_json(const TrainSchedule& s) {
  return Json{{"epochs", s.epochs},
              {"period", s.period},
              {"learning_rate", s.learning_rate},
              {"batch_size", s.batch_size},
              {"restoration_budget", s.restoration_budget},
              {"seed", s.seed},
              {"loss", s.loss == Loss::mse ? "mse" : "cross_entropy"}};
}

TrainSchedule schedule_from_json(const JsonReader& in) {
  TrainSchedule s;
  s.epochs = in.size_or("epochs", s.epochs);
  s.period = in.size_or("period", s.period);
  s.learning_rate = in.double_or("learning_rate", s.learning_rate);
  s.batch_size = in.size_or("batch_size", s.batch_size);
  s.restoration_budget = in.size_or("restoration_budget", s.restoration_budget);
  s.seed = in.size_or("seed", s.seed);
  if (auto l = in.find("loss")) {
    const std::string kind = l->as_string();
    if (kind == "mse") {
      s.loss = Loss::mse;
    } else if (kind != "cross_entropy") {
      l->fail("expected \"cross_entropy\" or \"mse\"");
    }
  }
  try {
    s.validate();
  } catch (const Error& e) {
    in.fail(e.what());
  }
  return s;
}

Json to_json(const std::vector<TraceEntry>& trace) {
  Json out = Json::array();
  for (const auto& e : trace) {
    out.push_back(Json{{"epoch", e.epoch},
                       {"loss", e.loss},
                       {"accuracy", e.accuracy},
                       {"projected", e.projected},
                       {"projected_accuracy", e.projected_accuracy},
                       {"final_projection", e.final_projection}});
  }
  return out;
}

std::vector<TraceEntry> trace_from_json(const JsonReader& in) {
  std::vector<TraceEntry> out;
  for (std::size_t i = 0; i < in.size(); ++i) {
    const JsonReader e = in.at(i);
    out.push_back({e.size_at("epoch"), e.double_at("loss"), e.double_at("accuracy"), e.at("projected").as_bool(),
                   e.double_at("projected_accuracy"), e.at("final_projection").as_bool()});
  }
  return out;
}

// ---- dense numerics ----

Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const JsonReader& in) {
  const std::size_t rows = in.size();
  const std::size_t cols = rows == 0 ? 0 : in.at(std::size_t{0}).size();
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    const JsonReader row = in.at(i);
    if (row.size() != cols) row.fail("ragged matrix row");
    for (std::size_t j = 0; j < cols; ++j) {
      const double v = row.at(j).as_double();
      if (!std::isfinite(v)) row.at(j).fail("matrix entries must be finite");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }
  return m;
}

Json to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Vector vector_from_json(const JsonReader& in) {
  Vector v(static_cast<Eigen::Index>(in.size()));
  for (std::size_t i = 0; i < in.size(); ++i) {
    const double x = in.at(i).as_double();
    if (!std::isfinite(x)) in.at(i).fail("vector entries must be finite");
    v(static_cast<Eigen::Index>(i)) = x;
  }
  return v;
}

// ---- run report ----

Json to_json(const RunReport& r) {
  Json j;
  j["schema_version"] = r.schema_version;
  j["command"] = r.command;
  j["config_hash"] = r.config_hash;
  j["outputs"] = r.outputs;
  j["tool_version"] = r.tool_version;
  return j;
}

RunReport run_report_from_json(const JsonReader& in) {
  check_schema(in);
  RunReport r;
  r.schema_version = static_cast<int>(in.size_or("schema_version", kSchemaVersion));
  r.command = in.string_at("command");
  r.config_hash = in.string_at("config_hash");
  const JsonReader outputs = in.at("outputs");
  if (!outputs.json().is_object()) outputs.fail("expected an object");
  for (const auto& [key, value] : outputs.json().items()) {
    r.outputs[key] = JsonReader(value, outputs.pointer() + "/" + key).as_string();
  }
  r.tool_version = in.string_at("tool_version");
  return r;
}

}  // namespace goa
