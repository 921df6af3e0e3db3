#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rmtlab/lab/config.hpp"

namespace rmtlab::lab {

std::string tool_version();

struct SeedRecord {
  std::uint64_t seed = 0;
  bool ok = true;
  /// Suite output on success; {error_type, message} otherwise.
  json payload;
};

struct RunResult {
  std::string config_hash;
  std::string tool_version;
  std::filesystem::path directory;  // empty for in-memory runs
  std::vector<SeedRecord> seeds;
  json aggregate;
  double wall_clock_seconds = 0.0;

  std::size_t failures() const;
  /// The "error_type" of the first failed seed, or empty.
  std::string first_error_type() const;
  /// aggregate["pass"] when the suite reports one, true otherwise.
  bool passed() const;
};

struct RunOptions {
  unsigned threads = 0;  // 0 = worker_count()
};

/// Runs every seed without touching the filesystem.
RunResult execute(const ExperimentConfig& config, const RunOptions& options = {});

/// execute() plus persistence under output_dir/<name>-<hash>/: config.json,
/// seed-<seed>.json per seed, and aggregate.json written atomically last.
RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Aggregate document as persisted: suite keys plus config_hash, suite,
/// tool_version, seeds, failed_seeds, complete, wall_clock_seconds.
json aggregate_document(const ExperimentConfig& config, const RunResult& result);
json seed_document(const RunResult& result, const SeedRecord& record);

}  // namespace rmtlab::lab
