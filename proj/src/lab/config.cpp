#include "rmtlab/lab/config.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "rmtlab/errors.hpp"

namespace rmtlab::lab {

std::string to_string(Suite s) {
  switch (s) {
    case Suite::Sample: return "sample";
    case Suite::Flow: return "flow";
    case Suite::Fc: return "fc";
    case Suite::MomentFlow: return "momentflow";
    case Suite::Verify: return "verify";
  }
  return "sample";
}

Suite parse_suite(const std::string& tag) {
  if (tag == "sample") return Suite::Sample;
  if (tag == "flow") return Suite::Flow;
  if (tag == "fc") return Suite::Fc;
  if (tag == "momentflow") return Suite::MomentFlow;
  if (tag == "verify") return Suite::Verify;
  throw ConfigError("suite", "unknown suite tag '" + tag + "'");
}

namespace {

const json& lookup(const json& params, const std::string& key) {
  if (!params.is_object() || !params.contains(key)) throw ConfigError(key, "required key missing");
  return params.at(key);
}

const std::vector<std::string>& required_keys(Suite s) {
  static const std::vector<std::string> sample{"model", "n", "p"};
  static const std::vector<std::string> flow{"model", "n", "p", "variant", "t"};
  static const std::vector<std::string> fc{"t", "grid"};
  static const std::vector<std::string> momentflow{"n_sites", "n_particles", "t0", "t1", "dt"};
  static const std::vector<std::string> verify{"kind", "model", "n"};
  switch (s) {
    case Suite::Sample: return sample;
    case Suite::Flow: return flow;
    case Suite::Fc: return fc;
    case Suite::MomentFlow: return momentflow;
    case Suite::Verify: return verify;
  }
  return sample;
}

}  // namespace

double require_number(const json& params, const std::string& key) {
  const json& v = lookup(params, key);
  if (!v.is_number()) throw ConfigError(key, "expected a number");
  return v.get<double>();
}

std::int64_t require_integer(const json& params, const std::string& key) {
  const json& v = lookup(params, key);
  if (!v.is_number_integer()) throw ConfigError(key, "expected an integer");
  return v.get<std::int64_t>();
}

std::string require_string(const json& params, const std::string& key) {
  const json& v = lookup(params, key);
  if (!v.is_string()) throw ConfigError(key, "expected a string");
  return v.get<std::string>();
}

double number_or(const json& params, const std::string& key, double fallback) {
  return params.contains(key) ? require_number(params, key) : fallback;
}

std::int64_t integer_or(const json& params, const std::string& key, std::int64_t fallback) {
  return params.contains(key) ? require_integer(params, key) : fallback;
}

std::string string_or(const json& params, const std::string& key, const std::string& fallback) {
  return params.contains(key) ? require_string(params, key) : fallback;
}

bool bool_or(const json& params, const std::string& key, bool fallback) {
  if (!params.contains(key)) return fallback;
  if (!params.at(key).is_boolean()) throw ConfigError(key, "expected a boolean");
  return params.at(key).get<bool>();
}

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("<root>", "config must be a JSON object");
  ExperimentConfig c;
  c.document = doc;
  c.name = require_string(doc, "name");
  if (c.name.empty() || c.name.find_first_of("/\\") != std::string::npos)
    throw ConfigError("name", "must be a nonempty plain file name");
  c.suite = parse_suite(require_string(doc, "suite"));
  c.parameters = doc.contains("parameters") ? doc.at("parameters") : json::object();
  if (!c.parameters.is_object()) throw ConfigError("parameters", "expected an object");
  for (const auto& key : required_keys(c.suite))
    if (!c.parameters.contains(key)) throw ConfigError("parameters." + key, "required key missing for suite " + to_string(c.suite));

  if (c.suite == Suite::Verify) {
    const std::string kind = require_string(c.parameters, "kind");
    if (kind != "normality" && kind != "que" && kind != "rigidity" && kind != "locallaw" && kind != "general")
      throw ConfigError("parameters.kind", "unknown verify kind '" + kind + "'");
  }

  const json& seeds = lookup(doc, "seeds");
  if (seeds.is_array()) {
    for (const auto& s : seeds) {
      if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0))
        throw ConfigError("seeds", "seed entries must be nonnegative integers");
      c.seeds.push_back(s.get<std::uint64_t>());
    }
  } else if (seeds.is_object()) {
    const auto base = require_integer(seeds, "base");
    const auto count = require_integer(seeds, "count");
    if (base < 0 || count < 0) throw ConfigError("seeds", "base and count must be nonnegative");
    for (std::int64_t k = 0; k < count; ++k) c.seeds.push_back(static_cast<std::uint64_t>(base + k));
  } else {
    throw ConfigError("seeds", "expected a list or {base, count}");
  }
  if (c.seeds.empty()) throw ConfigError("seeds", "seed list is empty");
  c.output_dir = string_or(doc, "output_dir", "results");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

std::string config_hash(const json& doc) {
  const std::string text = doc.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

}  // namespace rmtlab::lab
