#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "rmtlab/dyson_flow.hpp"
#include "rmtlab/ensembles.hpp"
#include "rmtlab/errors.hpp"
#include "rmtlab/free_convolution.hpp"
#include "rmtlab/lab/config.hpp"
#include "rmtlab/lab/experiment.hpp"
#include "rmtlab/lab/plot_data.hpp"
#include "rmtlab/lab/suites.hpp"
#include "rmtlab/matrix_io.hpp"
#include "rmtlab/rng.hpp"

namespace {

using namespace rmtlab;
using lab::json;

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kNumericFailure = 3;
constexpr int kAcceptanceFailure = 4;

std::vector<double> split_reals(const std::string& csv) {
  std::vector<double> out;
  std::stringstream in(csv);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ParameterError("cannot parse '" + item + "' as a number");
    }
  }
  return out;
}

void write_json(const std::string& path, const json& doc) { io::write_file_atomic(path, doc.dump(2) + "\n"); }

int exit_code_for(const lab::RunResult& r) {
  if (r.failures() > 0) return r.first_error_type() == "config" || r.first_error_type() == "parameter" ? kConfigError
                                                                                                      : kNumericFailure;
  return r.passed() ? kOk : kAcceptanceFailure;
}

struct SampleArgs {
  std::string model;
  long n = 0;
  double p = 0.0;
  std::uint64_t seed = 0;
  std::string out;
};

int run_sample(const SampleArgs& a) {
  const SampleModel model = parse_sample_model(a.model);
  EnsembleParams e;
  e.N = a.n;
  e.p = a.p;
  SymmetricMatrix h;
  switch (model) {
    case SampleModel::ErdosRenyi: h = normalize_er(sample_er(e, a.seed)); break;
    case SampleModel::Regular: h = normalize_regular(sample_regular(e, a.seed)); break;
    case SampleModel::Goe: h = sample_goe(a.n, a.seed); break;
  }
  io::write_matrix(a.out, h.dense());
  return kOk;
}

struct FlowArgs {
  std::string in;
  std::string variant;
  double t = 0.0;
  double dt = 0.0;
  std::uint64_t seed = 0;
  std::string out;
  double f = 0.0;
  std::string trajectory;
};

SymmetricMatrix flow_step(FlowVariant v, const SymmetricMatrix& h, double t, double f, std::uint64_t seed) {
  switch (v) {
    case FlowVariant::Additive: return dbm_exact_sample(h, t, seed);
    case FlowVariant::OrnsteinUhlenbeck: return ou_flow_sample(h, t, f, seed);
    case FlowVariant::Constrained: return constrained_flow_regular(h, t, seed);
  }
  throw ParameterError("unknown flow variant");
}

int run_flow(const FlowArgs& a) {
  FlowParams fp;
  fp.variant = parse_flow_variant(a.variant);
  fp.t = a.t;
  fp.f = a.f;
  if (a.dt > 0.0) fp.dt = a.dt;
  fp.validate();
  const SymmetricMatrix h0 = SymmetricMatrix::from_dense(io::read_matrix(a.in));
  if (a.trajectory.empty()) {
    io::write_matrix(a.out, flow_step(fp.variant, h0, fp.t, fp.f, a.seed).dense());
    return kOk;
  }
  // Path sampling by exact Markov transitions over steps of length dt.
  const double dt = a.dt > 0.0 ? a.dt : fp.t / 100.0;
  const long steps = std::max(1L, static_cast<long>(std::ceil(fp.t / dt - 1e-9)));
  CounterRng step_seeds(a.seed, Stream::Flow, 1);
  std::ofstream csv(a.trajectory);
  if (!csv) throw ParameterError("cannot write " + a.trajectory);
  csv << std::setprecision(17) << "t";
  for (Index i = 0; i < h0.dim(); ++i) csv << ",lambda_" << (i + 1);
  csv << '\n';
  auto record = [&](double t, const SymmetricMatrix& h) {
    const Vector lam = eigenvalues_only(h);
    csv << t;
    for (Index i = 0; i < lam.size(); ++i) csv << ',' << lam(i);
    csv << '\n';
  };
  SymmetricMatrix h = h0;
  record(0.0, h);
  double t = 0.0;
  for (long k = 0; k < steps; ++k) {
    const double h_step = std::min(dt, fp.t - t);
    h = flow_step(fp.variant, h, h_step, fp.f, step_seeds());
    t = k + 1 == steps ? fp.t : t + h_step;
    record(t, h);
  }
  io::write_matrix(a.out, h.dense());
  return kOk;
}

struct FcArgs {
  std::string atoms;
  double t = 0.0;
  std::string grid;
  std::string out;
};

int run_fc(const FcArgs& a) {
  const auto atoms = io::read_reals(a.atoms);
  if (atoms.empty()) throw ParameterError("atom file is empty");
  const EmpiricalMeasure mu(Eigen::Map<const Vector>(atoms.data(), static_cast<Index>(atoms.size())));
  write_json(a.out, lab::fc_report(mu, a.t, split_reals(a.grid)));
  return kOk;
}

struct MomentFlowArgs {
  long sites = 0;
  long particles = 1;
  std::string lambda_path;
  long ell = 1;
  std::string range = "all";
  double prefactor = 2.0;
  double t0 = 0.0;
  double t1 = 0.0;
  double dt = 0.0;
  std::string init = "flat";
  std::uint64_t seed = 0;
  std::string out;
};

int run_momentflow(const MomentFlowArgs& a) {
  json params{{"n_sites", a.sites}, {"n_particles", a.particles}, {"ell", a.ell}, {"range", a.range},
              {"prefactor", a.prefactor}, {"t0", a.t0}, {"t1", a.t1}, {"dt", a.dt}, {"init", a.init}};
  if (!a.lambda_path.empty()) params["lambda_path"] = a.lambda_path;
  json doc = lab::make_runner(lab::Suite::MomentFlow)->run_seed(params, a.seed);
  doc["parameters"] = params;
  write_json(a.out, doc);
  return kOk;
}

struct VerifyArgs {
  std::string kind;
  std::string model = "er";
  std::string n;
  double p = 0.0;
  double p_exponent = 0.0;
  double t = 0.0;
  double kappa = 0.1;
  long indices = 0;
  long seeds = 20;
  std::uint64_t base_seed = 0;
  std::string out;
  bool raw = false;
};

int run_verify(const VerifyArgs& a, const CLI::App& cmd) {
  json params{{"kind", a.kind}, {"model", a.model}, {"t", a.t}, {"kappa", a.kappa}};
  const auto ns = split_reals(a.n);
  if (ns.size() == 1) {
    params["n"] = static_cast<long>(ns.front());
  } else {
    params["n"] = json::array();
    for (double v : ns) params["n"].push_back(static_cast<long>(v));
  }
  if (cmd.count("--p-exponent")) params["p_exponent"] = a.p_exponent;
  else params["p"] = a.p;
  if (a.indices > 0) params["indices"] = a.indices;
  json doc{{"name", "verify-" + a.kind}, {"suite", "verify"}, {"parameters", params},
           {"seeds", {{"base", a.base_seed}, {"count", a.seeds}}}};
  const lab::ExperimentConfig config = lab::parse_config(doc);
  const lab::RunResult result = lab::execute(config);
  json report = lab::aggregate_document(config, result);
  if (a.raw) {
    json raw = json::array();
    for (const auto& rec : result.seeds) raw.push_back(lab::seed_document(result, rec));
    report["per_seed"] = raw;
  }
  write_json(a.out, report);
  std::cout << "verify " << a.kind << ": " << (result.passed() ? "pass" : "fail") << " (" << result.failures()
            << " failed seeds)\n";
  return exit_code_for(result);
}

int run_config(const std::string& path) {
  const lab::ExperimentConfig config = lab::load_config(path);
  const lab::RunResult result = lab::run_experiment(config);
  std::cout << result.directory.string() << '\n';
  if (result.failures() > 0) std::cerr << result.failures() << " seed(s) failed\n";
  return exit_code_for(result);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random-matrix eigenvector laboratory"};
  app.set_version_flag("--version", lab::tool_version());
  app.require_subcommand(1);

  SampleArgs sample;
  auto* c_sample = app.add_subcommand("sample", "Sample a normalized ensemble matrix");
  c_sample->add_option("--model", sample.model, "er, regular or goe")->required();
  c_sample->add_option("--n", sample.n, "dimension")->required();
  c_sample->add_option("--p", sample.p, "expected or exact degree");
  c_sample->add_option("--seed", sample.seed);
  c_sample->add_option("--out", sample.out)->required();

  FlowArgs flow;
  auto* c_flow = app.add_subcommand("flow", "Run a matrix flow from a stored matrix");
  c_flow->add_option("--in", flow.in)->required();
  c_flow->add_option("--variant", flow.variant, "additive, ou or constrained")->required();
  c_flow->add_option("--t", flow.t)->required();
  c_flow->add_option("--dt", flow.dt, "trajectory step");
  c_flow->add_option("--seed", flow.seed);
  c_flow->add_option("--out", flow.out)->required();
  c_flow->add_option("--f", flow.f, "OU mean level");
  c_flow->add_option("--trajectory", flow.trajectory, "eigenvalue trajectory CSV");

  FcArgs fc;
  auto* c_fc = app.add_subcommand("fc", "Solve the free-convolution fixed point on a grid");
  c_fc->add_option("--atoms", fc.atoms)->required();
  c_fc->add_option("--t", fc.t)->required();
  c_fc->add_option("--grid", fc.grid, "E0,r,eta_min,eta_max,nE,nEta")->required();
  c_fc->add_option("--out", fc.out)->required();

  MomentFlowArgs mf;
  auto* c_mf = app.add_subcommand("momentflow", "Integrate the moment-flow master equation");
  c_mf->add_option("--n-sites", mf.sites)->required();
  c_mf->add_option("--n-particles", mf.particles)->required();
  c_mf->add_option("--lambda-path", mf.lambda_path, "eigenvalue path file; frozen GOE spectrum when absent");
  c_mf->add_option("--ell", mf.ell);
  c_mf->add_option("--range", mf.range, "all, short or long");
  c_mf->add_option("--prefactor", mf.prefactor);
  c_mf->add_option("--t0", mf.t0);
  c_mf->add_option("--t1", mf.t1)->required();
  c_mf->add_option("--dt", mf.dt)->required();
  c_mf->add_option("--init", mf.init, "flat or delta:IDX");
  c_mf->add_option("--seed", mf.seed);
  c_mf->add_option("--out", mf.out)->required();

  VerifyArgs verify;
  auto* c_verify = app.add_subcommand("verify", "Run a statistical verification suite");
  c_verify->add_option("kind", verify.kind, "normality, que, rigidity, locallaw or general")->required();
  c_verify->add_option("--model", verify.model);
  c_verify->add_option("--n", verify.n, "dimension, or a comma list for que/rigidity")->required();
  c_verify->add_option("--p", verify.p);
  c_verify->add_option("--p-exponent", verify.p_exponent, "p = N^x");
  c_verify->add_option("--t", verify.t);
  c_verify->add_option("--kappa", verify.kappa);
  c_verify->add_option("--indices", verify.indices);
  c_verify->add_option("--seeds", verify.seeds);
  c_verify->add_option("--base-seed", verify.base_seed);
  c_verify->add_option("--out", verify.out)->required();
  c_verify->add_flag("--raw", verify.raw, "embed per-seed records");

  std::string config_path;
  auto* c_run = app.add_subcommand("run", "Run an experiment config");
  c_run->add_option("--config", config_path)->required();

  std::string plot_in, plot_kind, plot_out;
  auto* c_plot = app.add_subcommand("plot", "Emit plot CSV from an aggregate report");
  c_plot->add_option("--in", plot_in)->required();
  c_plot->add_option("--kind", plot_kind, "histogram, envelope or trend")->required();
  c_plot->add_option("--out", plot_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*c_sample) return run_sample(sample);
    if (*c_flow) return run_flow(flow);
    if (*c_fc) return run_fc(fc);
    if (*c_mf) return run_momentflow(mf);
    if (*c_verify) return run_verify(verify, *c_verify);
    if (*c_run) return run_config(config_path);
    if (*c_plot) {
      lab::emit_plot_file(plot_in, lab::parse_plot_kind(plot_kind), plot_out);
      return kOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << '\n';
    return kConfigError;
  } catch (const Error& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumericFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumericFailure;
  }
  return kOk;
}
