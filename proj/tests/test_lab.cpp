#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <sys/wait.h>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rmtlab/errors.hpp"
#include "rmtlab/lab/config.hpp"
#include "rmtlab/lab/experiment.hpp"
#include "rmtlab/lab/plot_data.hpp"
#include "rmtlab/lab/suites.hpp"

using namespace rmtlab;
using namespace rmtlab::lab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("rmtlab_lab_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  json doc;
  in >> doc;
  return doc;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

json sample_config(const fs::path& out) {
  return {{"name", "er-small"},
          {"suite", "sample"},
          {"parameters", {{"model", "er"}, {"n", 60}, {"p", 6.0}}},
          {"seeds", {{"base", 10}, {"count", 4}}},
          {"output_dir", out.string()}};
}

std::string config_error_key(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "";
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(RMTLAB_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("config schema") {
  const json ok = sample_config("out");
  const auto c = parse_config(ok);
  CHECK(c.suite == Suite::Sample);
  CHECK(c.seeds == std::vector<std::uint64_t>{10, 11, 12, 13});

  json bad = ok;
  bad["suite"] = "teleport";
  CHECK(config_error_key(bad) == "suite");
  bad = ok;
  bad["parameters"].erase("p");
  CHECK(config_error_key(bad) == "parameters.p");
  bad = ok;
  bad["seeds"] = json::array();
  CHECK(config_error_key(bad) == "seeds");
  bad = ok;
  bad.erase("name");
  CHECK(config_error_key(bad) == "name");
  bad = ok;
  bad["suite"] = "verify";
  bad["parameters"] = {{"kind", "astrology"}, {"model", "er"}, {"n", 10}};
  CHECK(config_error_key(bad) == "parameters.kind");

  json listed = ok;
  listed["seeds"] = {3, 1, 4};
  CHECK(parse_config(listed).seeds == std::vector<std::uint64_t>{3, 1, 4});
}

TEST_CASE("config hash") {
  const json a = sample_config("out");
  const std::string h = config_hash(a);
  CHECK(h.size() == 16);
  CHECK(h.find_first_not_of("0123456789abcdef") == std::string::npos);
  CHECK(config_hash(json::parse(a.dump())) == h);
  json b = a;
  b["parameters"]["p"] = 7.0;
  CHECK(config_hash(b) != h);
}

TEST_CASE("run_experiment persists per-seed files and an aggregate") {
  const fs::path out = scratch("persist");
  const auto config = parse_config(sample_config(out));
  const auto result = run_experiment(config);
  CHECK(result.failures() == 0);
  const fs::path dir = result.directory;
  CHECK(dir.filename().string() == "er-small-" + result.config_hash);
  for (std::uint64_t s = 10; s < 14; ++s) {
    const json doc = read_json(dir / ("seed-" + std::to_string(s) + ".json"));
    CHECK(doc.at("config_hash") == result.config_hash);
    CHECK(doc.at("status") == "ok");
  }
  const json agg = read_json(dir / "aggregate.json");
  CHECK(agg.at("config_hash") == result.config_hash);
  CHECK(agg.at("complete") == true);
  CHECK(agg.at("tool_version") == tool_version());
  CHECK(config_hash(read_json(dir / "config.json")) == result.config_hash);
  fs::remove_all(out);
}

TEST_CASE("same config twice gives the same aggregate up to wall-clock") {
  const fs::path out = scratch("determinism");
  json doc = sample_config(out);
  doc["suite"] = "flow";
  doc["parameters"] = {{"model", "er"}, {"n", 50}, {"p", 5.0}, {"variant", "ou"}, {"t", 0.4}};
  const auto config = parse_config(doc);
  const auto first = run_experiment(config);
  json a = read_json(first.directory / "aggregate.json");
  const auto second = run_experiment(config);
  json b = read_json(second.directory / "aggregate.json");
  a.erase("wall_clock_seconds");
  b.erase("wall_clock_seconds");
  CHECK(a.dump() == b.dump());

  RunOptions single;
  single.threads = 1;
  json c = aggregate_document(config, execute(config, single));
  c.erase("wall_clock_seconds");
  CHECK(c.dump() == a.dump());
  fs::remove_all(out);
}

TEST_CASE("20-seed normality run writes 20 seed files and one aggregate") {
  const fs::path out = scratch("normality");
  const json doc{{"name", "normality"},
                 {"suite", "verify"},
                 {"parameters", {{"kind", "normality"}, {"model", "er"}, {"n", 1000}, {"p", 40.0}, {"indices", 40}}},
                 {"seeds", {{"base", 0}, {"count", 20}}},
                 {"output_dir", out.string()}};
  const auto result = run_experiment(parse_config(doc));
  std::size_t seed_files = 0, aggregates = 0;
  for (const auto& entry : fs::directory_iterator(result.directory)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("seed-", 0) == 0) ++seed_files;
    if (name == "aggregate.json") ++aggregates;
  }
  CHECK(seed_files == 20);
  CHECK(aggregates == 1);

  const json agg = read_json(result.directory / "aggregate.json");
  const std::string csv = emit_plot_data(agg, PlotKind::Histogram);
  CHECK(csv.rfind("bin_left,bin_right,empirical_density,chisq1_density\n", 0) == 0);
  fs::remove_all(out);
}

TEST_CASE("failing seeds produce error records") {
  const fs::path out = scratch("failures");
  const json doc{{"name", "mf"},
                 {"suite", "momentflow"},
                 {"parameters", {{"n_sites", 4}, {"n_particles", 1}, {"t0", 0.0}, {"t1", 1.0}, {"dt", 0.5},
                                 {"lambdas", {0.0, 0.01, 0.02, 0.03}}}},
                 {"seeds", {1, 2}},
                 {"output_dir", out.string()}};
  const auto result = run_experiment(parse_config(doc));
  CHECK(result.failures() == 2);
  CHECK(result.first_error_type() == "step_size");
  const json rec = read_json(result.directory / "seed-1.json");
  CHECK(rec.at("status") == "error");
  CHECK(rec.at("error").at("error_type") == "step_size");
  const json agg = read_json(result.directory / "aggregate.json");
  CHECK(agg.at("failed_seeds").size() == 2);
  fs::remove_all(out);
}

TEST_CASE("config errors inside suite parameters name the key") {
  json doc = sample_config("unused");
  doc["parameters"]["model"] = "hypercube";
  const auto config = parse_config(doc);
  try {
    execute(config);
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "model");
  }
}

TEST_CASE("momentflow suite conserves pi-mass") {
  const json params{{"n_sites", 5}, {"n_particles", 2}, {"t0", 0.0}, {"t1", 0.2}, {"dt", 1e-3}, {"init", "delta:3"}};
  const auto runner = make_runner(Suite::MomentFlow);
  const json r = runner->run_seed(params, 4);
  CHECK(r.at("pi_mass_drift").get<double>() <= 1e-10);
  CHECK(r.at("max_nonincreasing") == true);
}

TEST_CASE("plot data") {
  json agg{{"complete", true},
           {"trend", json::array({{{"N", 500}, {"statistic", 0.7}}})},
           {"envelope", json::array({{{"eta", 0.5}, {"error", 0.01}, {"envelope", 0.2}},
                                     {{"eta", 0.01}, {"error", 0.05}, {"envelope", 0.9}},
                                     {{"eta", 0.1}, {"error", 0.02}, {"envelope", 0.4}}})},
           {"histogram", histogram({0.1, 0.2, 0.5, 1.5, 9.0}, 2.0, 4)}};
  const std::string trend = emit_plot_data(agg, PlotKind::Trend);
  CHECK(trend == "N,statistic\n500,0.7\n");

  std::istringstream env(emit_plot_data(agg, PlotKind::Envelope));
  std::string line;
  std::getline(env, line);
  CHECK(line == "eta,error,envelope");
  std::vector<double> etas;
  while (std::getline(env, line)) etas.push_back(std::stod(line.substr(0, line.find(','))));
  CHECK(etas == std::vector<double>{0.01, 0.1, 0.5});

  std::istringstream hist(emit_plot_data(agg, PlotKind::Histogram));
  std::getline(hist, line);
  CHECK(line == "bin_left,bin_right,empirical_density,chisq1_density");
  std::getline(hist, line);
  // First bin [0, 0.5): two of five samples over width 0.5.
  CHECK(line.rfind("0,0.5,0.8,", 0) == 0);

  json partial = agg;
  partial["complete"] = false;
  CHECK_THROWS_AS(emit_plot_data(partial, PlotKind::Trend), ParameterError);
  json missing{{"complete", true}};
  CHECK_THROWS_AS(emit_plot_data(missing, PlotKind::Envelope), ParameterError);
  CHECK_THROWS_AS(parse_plot_kind("pie"), ParameterError);
}

TEST_CASE("fc report") {
  const json r = fc_report(EmpiricalMeasure::single_atom(0.0), 1.0, {0.0, 1.0, 0.01, 1.0, 5, 4});
  CHECK(r.at("m_re").size() == 5);
  CHECK(r.at("m_im").at(0).size() == 4);
  CHECK(r.at("residual_max").get<double>() <= 1e-12);
  CHECK(r.at("gamma").size() == 1);
}

TEST_CASE("command line exit codes") {
  const fs::path dir = scratch("cli");
  CHECK(run_cli("--version") == 0);
  CHECK(run_cli("sample --model er --n 40 --p 4 --seed 1 --out " + (dir / "h.mat").string()) == 0);
  CHECK(run_cli("flow --in " + (dir / "h.mat").string() + " --variant ou --t 0.5 --seed 2 --out " +
                (dir / "h2.mat").string() + " --trajectory " + (dir / "tr.csv").string()) == 0);
  CHECK(fs::exists(dir / "tr.csv"));
  CHECK(run_cli("flow --in " + (dir / "h.mat").string() + " --variant sideways --t 0.5 --out x") == 2);
  CHECK(run_cli("sample --model er") == 2);

  {
    std::ofstream atoms(dir / "atoms.txt");
    atoms << "-1\n0\n1\n";
  }
  CHECK(run_cli("fc --atoms " + (dir / "atoms.txt").string() + " --t 0.5 --grid 0,1,0.05,1,4,3 --out " +
                (dir / "fc.json").string()) == 0);
  const json fc = read_json(dir / "fc.json");
  for (const char* key : {"t", "grid", "m_re", "m_im", "residual_max", "gamma"}) CHECK(fc.contains(key));

  json bad = sample_config(dir);
  bad["suite"] = "teleport";
  {
    std::ofstream cfg(dir / "bad.json");
    cfg << bad.dump();
  }
  CHECK(run_cli("run --config " + (dir / "bad.json").string()) == 2);

  {
    std::ofstream cfg(dir / "good.json");
    cfg << sample_config(dir / "runs").dump();
  }
  CHECK(run_cli("run --config " + (dir / "good.json").string()) == 0);

  CHECK(run_cli("verify rigidity --model goe --n 200 --t 0.3 --seeds 3 --out " + (dir / "rig.json").string()) == 0);
  const json rig = read_json(dir / "rig.json");
  CHECK(rig.at("trend").size() == 1);
  CHECK(run_cli("plot --in " + (dir / "rig.json").string() + " --kind trend --out " + (dir / "trend.csv").string()) ==
        0);
  const std::string trend = read_text(dir / "trend.csv");
  CHECK(std::count(trend.begin(), trend.end(), '\n') == 2);
  CHECK(run_cli("plot --in " + (dir / "rig.json").string() + " --kind envelope --out " + (dir / "e.csv").string()) ==
        2);
  fs::remove_all(dir);
}
