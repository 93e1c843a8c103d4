#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "json.hpp"

#include "cisc/harness.hpp"

namespace cisc {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr std::string_view kToolVersion = "1.0.0";

/// Everything needed to rerun a command: its flags, the tool version, the
/// seed and a hash of the input bytes.
struct RunManifest {
  std::string tool_version{kToolVersion};
  std::string command;
  std::map<std::string, std::string> config;
  std::uint64_t base_seed = 0;
  std::string input_hash;  // fnv1a64 of the input file, hex
  std::optional<std::string> started_at;
  std::optional<std::string> finished_at;

  friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

std::string hash_file(const std::string& path);

nlohmann::json report_to_json(const EvalReport& report, const std::optional<RunManifest>& manifest = std::nullopt);
/// Throws std::invalid_argument on a schema_version mismatch or missing fields.
EvalReport report_from_json(const nlohmann::json& doc);
std::optional<RunManifest> manifest_from_json(const nlohmann::json& doc);

/// One row per strategy x budget.
void write_report_csv(std::ostream& out, const EvalReport& report);

/// Human-readable headline table (budget, SC acc, CISC acc, cost reduction,
/// accuracy improvement).
void write_headline(std::ostream& out, const EvalReport& report);

bool operator==(const EvalReport& a, const EvalReport& b);

}  // namespace cisc
