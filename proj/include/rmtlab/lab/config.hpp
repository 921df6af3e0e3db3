#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace rmtlab::lab {

using json = nlohmann::json;

enum class Suite { Sample, Flow, Fc, MomentFlow, Verify };

std::string to_string(Suite s);
/// Throws ConfigError on an unknown tag.
Suite parse_suite(const std::string& tag);

struct ExperimentConfig {
  std::string name;
  Suite suite = Suite::Sample;
  json parameters = json::object();
  std::vector<std::uint64_t> seeds;
  std::filesystem::path output_dir;
  /// The document the config was parsed from; hashed and persisted verbatim.
  json document;
};

/// Validates the common schema and the required keys of the suite.
/// Seeds are either a list or {"base": b, "count": c}.
ExperimentConfig parse_config(const json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

/// FNV-1a 64 of the compact, key-sorted dump, as 16 hex digits.
std::string config_hash(const json& doc);

/// Required parameter accessors; missing or mistyped keys raise ConfigError
/// naming the key.
double require_number(const json& params, const std::string& key);
std::int64_t require_integer(const json& params, const std::string& key);
std::string require_string(const json& params, const std::string& key);
double number_or(const json& params, const std::string& key, double fallback);
std::int64_t integer_or(const json& params, const std::string& key, std::int64_t fallback);
std::string string_or(const json& params, const std::string& key, const std::string& fallback);
bool bool_or(const json& params, const std::string& key, bool fallback);

}  // namespace rmtlab::lab
