#pragma once

// JSON artifacts. Every document carries "schema_version"; readers report
// file:line anchored messages for both syntax and schema errors.

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "goa/arch_search.hpp"
#include "goa/costmodel.hpp"
#include "goa/error.hpp"
#include "goa/mapper.hpp"
#include "goa/trainer.hpp"
#include "goa/workload.hpp"

namespace goa {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;
inline constexpr std::string_view kToolVersion = "0.1.0";

/// Schema error carrying the JSON pointer of the offending value.
class SchemaError : public Error {
 public:
  SchemaError(std::string pointer, const std::string& message)
      : Error(ErrorKind::invalid_argument, (pointer.empty() ? "/" : pointer) + ": " + message),
        pointer_(std::move(pointer)) {}
  const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string pointer_;
};

/// Typed, path-tracking view of a JSON value.
class JsonReader {
 public:
  explicit JsonReader(const Json& json, std::string pointer = {}) : json_(&json), pointer_(std::move(pointer)) {}

  const Json& json() const noexcept { return *json_; }
  const std::string& pointer() const noexcept { return pointer_; }

  JsonReader at(std::string_view key) const;
  std::optional<JsonReader> find(std::string_view key) const;
  JsonReader at(std::size_t index) const;
  std::size_t size() const;  // requires an array

  std::size_t as_size() const;
  double as_double() const;  // null reads as +infinity
  bool as_bool() const;
  std::string as_string() const;

  std::size_t size_at(std::string_view key) const { return at(key).as_size(); }
  double double_at(std::string_view key) const { return at(key).as_double(); }
  std::string string_at(std::string_view key) const { return at(key).as_string(); }
  std::size_t size_or(std::string_view key, std::size_t fallback) const;
  double double_or(std::string_view key, double fallback) const;
  bool bool_or(std::string_view key, bool fallback) const;

  [[noreturn]] void fail(const std::string& message) const;

 private:
  const Json* json_;
  std::string pointer_;
};

/// A parsed file with the text kept for line lookups.
struct JsonDocument {
  std::filesystem::path path;
  std::string text;
  Json json;

  JsonReader root() const { return JsonReader(json); }
  /// Best-effort source line of a JSON pointer (1-based).
  std::size_t line_of(std::string_view pointer) const;
};

JsonDocument read_json_file(const std::filesystem::path& path);
JsonDocument parse_json_text(std::string text, std::filesystem::path origin = "<input>");

/// Runs `fn` on the document root and rewrites SchemaError messages to
/// "file:line: ...".
template <class Fn>
auto with_locations(const JsonDocument& doc, Fn&& fn) -> decltype(fn(doc.root())) {
  try {
    return fn(doc.root());
  } catch (const SchemaError& e) {
    throw Error(ErrorKind::invalid_argument,
                doc.path.string() + ":" + std::to_string(doc.line_of(e.pointer())) + ": " + e.what());
  }
}

/// Two-space indented dump with a trailing newline.
std::string dump(const Json& json);
void write_json_file(const std::filesystem::path& path, const Json& json);
void write_text_file(const std::filesystem::path& path, const std::string& text);

std::string sha256_hex(std::string_view data);

Json to_json(const Network& network);
Network network_from_json(const JsonReader& in);
Network load_network(const std::filesystem::path& path);

struct ArchSpec {
  GoaArch arch;
  std::vector<std::size_t> row_wavelengths;  // empty: row r uses channel r

  friend bool operator==(const ArchSpec&, const ArchSpec&) = default;
};

Json to_json(const ArchSpec& arch);
ArchSpec arch_from_json(const JsonReader& in);
ArchSpec load_arch(const std::filesystem::path& path);

Json to_json(const DeviceParams& params);
DeviceParams device_params_from_json(const JsonReader& in);
DeviceParams load_device_params(const std::filesystem::path& path);

Json to_json(const MappingPlan& plan);
MappingPlan plan_from_json(const JsonReader& in);
MappingPlan load_plan(const std::filesystem::path& path);

Json to_json(const CostReport& report);
CostReport cost_report_from_json(const JsonReader& in);

/// Workloads and device params may be given inline or as paths relative to
/// `base_dir`; serialization always writes them inline.
Json to_json(const SearchConfig& config);
SearchConfig search_config_from_json(const JsonReader& in, const std::filesystem::path& base_dir);
SearchConfig load_search_config(const std::filesystem::path& path);

Json to_json(const SearchResult& result);
SearchResult search_result_from_json(const JsonReader& in);

Json to_json(const TrainSchedule& schedule);
TrainSchedule schedule_from_json(const JsonReader& in);
Json to_json(const std::vector<TraceEntry>& trace);
std::vector<TraceEntry> trace_from_json(const JsonReader& in);

Json to_json(const Matrix& m);
Matrix matrix_from_json(const JsonReader& in);
Json to_json(const Vector& v);
Vector vector_from_json(const JsonReader& in);

struct RunReport {
  std::string command;
  std::string config_hash;  // SHA-256 of the concatenated input documents
  std::map<std::string, std::string> outputs;
  std::string tool_version{kToolVersion};
  int schema_version = kSchemaVersion;

  friend bool operator==(const RunReport&, const RunReport&) = default;
};

Json to_json(const RunReport& report);
RunReport run_report_from_json(const JsonReader& in);

}  // namespace goa
