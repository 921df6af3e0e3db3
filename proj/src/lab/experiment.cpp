#include "rmtlab/lab/experiment.hpp"

#include <chrono>
#include <exception>

#include "rmtlab/errors.hpp"
#include "rmtlab/lab/suites.hpp"
#include "rmtlab/matrix_io.hpp"
#include "rmtlab/parallel.hpp"

namespace rmtlab::lab {

std::string tool_version() { return RMTLAB_VERSION; }

std::size_t RunResult::failures() const {
  std::size_t n = 0;
  for (const auto& s : seeds)
    if (!s.ok) ++n;
  return n;
}

std::string RunResult::first_error_type() const {
  for (const auto& s : seeds)
    if (!s.ok) return s.payload.value("error_type", "");
  return "";
}

bool RunResult::passed() const {
  return !aggregate.is_object() || !aggregate.contains("pass") || aggregate.at("pass").get<bool>();
}

namespace {

std::string error_type(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const ConfigError&) {
    return "config";
  } catch (const StepSizeError&) {
    return "step_size";
  } catch (const ConvergenceError&) {
    return "convergence";
  } catch (const CollisionError&) {
    return "collision";
  } catch (const SamplingError&) {
    return "sampling";
  } catch (const ContractViolation&) {
    return "contract";
  } catch (const ParameterError&) {
    return "parameter";
  } catch (...) {
    return "internal";
  }
}

std::string error_message(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const std::exception& x) {
    return x.what();
  } catch (...) {
    return "unknown error";
  }
}

}  // namespace

RunResult execute(const ExperimentConfig& config, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  RunResult result;
  result.config_hash = config_hash(config.document);
  result.tool_version = tool_version();
  const auto runner = make_runner(config.suite);
  result.seeds.resize(config.seeds.size());
  parallel_for(
      config.seeds.size(),
      [&](std::size_t k) {
        SeedRecord& rec = result.seeds[k];
        rec.seed = config.seeds[k];
        try {
          rec.payload = runner->run_seed(config.parameters, rec.seed);
        } catch (...) {
          const auto e = std::current_exception();
          rec.ok = false;
          rec.payload = {{"error_type", error_type(e)}, {"message", error_message(e)}};
        }
      },
      options.threads == 0 ? worker_count() : options.threads);

  // A config error is the same for every seed; report it as such.
  for (const auto& rec : result.seeds)
    if (!rec.ok && rec.payload.at("error_type") == "config") runner->run_seed(config.parameters, rec.seed);

  std::vector<json> ok;
  for (const auto& rec : result.seeds)
    if (rec.ok) ok.push_back(rec.payload);
  result.aggregate = runner->aggregate(config.parameters, ok);
  result.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

json seed_document(const RunResult& result, const SeedRecord& record) {
  json doc{{"config_hash", result.config_hash}, {"seed", record.seed},
           {"status", record.ok ? "ok" : "error"}, {"tool_version", result.tool_version}};
  doc[record.ok ? "result" : "error"] = record.payload;
  return doc;
}

json aggregate_document(const ExperimentConfig& config, const RunResult& result) {
  json doc = result.aggregate.is_object() ? result.aggregate : json{{"result", result.aggregate}};
  json failed = json::array();
  for (const auto& s : result.seeds)
    if (!s.ok) failed.push_back(s.seed);
  doc["config_hash"] = result.config_hash;
  doc["suite"] = to_string(config.suite);
  doc["name"] = config.name;
  doc["tool_version"] = result.tool_version;
  doc["seeds"] = config.seeds;
  doc["failed_seeds"] = failed;
  doc["complete"] = true;
  doc["wall_clock_seconds"] = result.wall_clock_seconds;
  return doc;
}

RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  const std::string hash = config_hash(config.document);
  const std::filesystem::path dir = config.output_dir / (config.name + "-" + hash);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ParameterError("cannot create output directory " + dir.string() + ": " + ec.message());
  // A stale aggregate from an earlier run must not survive a partial rerun.
  std::filesystem::remove(dir / "aggregate.json", ec);
  io::write_file_atomic(dir / "config.json", config.document.dump(2) + "\n");

  RunResult result = execute(config, options);
  result.directory = dir;
  for (const auto& rec : result.seeds)
    io::write_file_atomic(dir / ("seed-" + std::to_string(rec.seed) + ".json"), seed_document(result, rec).dump(2) + "\n");
  io::write_file_atomic(dir / "aggregate.json", aggregate_document(config, result).dump(2) + "\n");
  return result;
}

}  // namespace rmtlab::lab
