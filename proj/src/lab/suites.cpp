#include "rmtlab/lab/suites.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "rmtlab/dyson_flow.hpp"
#include "rmtlab/ensembles.hpp"
#include "rmtlab/errors.hpp"
#include "rmtlab/matrix_io.hpp"
#include "rmtlab/moment_flow.hpp"
#include "rmtlab/statistics.hpp"

namespace rmtlab::lab {

namespace {

json vector_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

SampleModel model_param(const json& params) {
  const std::string name = require_string(params, "model");
  try {
    return parse_sample_model(name);
  } catch (const ParameterError&) {
    throw ConfigError("model", "unknown model '" + name + "'");
  }
}

Index dimension_from(const json& v) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 2) throw ConfigError("n", "expected an integer >= 2");
  return static_cast<Index>(v.get<std::int64_t>());
}

std::vector<Index> dimensions(const json& params, bool allow_list) {
  if (!params.contains("n")) throw ConfigError("n", "required key missing");
  const json& v = params.at("n");
  std::vector<Index> out;
  if (v.is_array()) {
    if (!allow_list) throw ConfigError("n", "a list of dimensions is only accepted by the que and rigidity kinds");
    for (const auto& x : v) out.push_back(dimension_from(x));
    if (out.empty()) throw ConfigError("n", "empty dimension list");
  } else {
    out.push_back(dimension_from(v));
  }
  return out;
}

/// p is either given directly or as "p_exponent" with p = N^x.
EnsembleParams ensemble_params(const json& params, SampleModel model, Index N) {
  EnsembleParams e;
  e.N = N;
  if (model == SampleModel::Goe) return e;
  if (params.contains("p_exponent")) {
    e.p = std::pow(static_cast<double>(N), require_number(params, "p_exponent"));
    if (model == SampleModel::Regular) {
      e.p = std::round(e.p);
      if (static_cast<long long>(e.p) * N % 2 != 0) e.p += 1.0;
    }
  } else {
    e.p = require_number(params, "p");
  }
  return e;
}

json law_point_json(const LawPoint& p) {
  return {{"E", p.E}, {"eta", p.eta}, {"error", p.error}, {"envelope", p.envelope}, {"ratio", p.ratio}};
}

double fraction_true(const std::vector<json>& per_seed, const std::string& key) {
  if (per_seed.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& s : per_seed)
    if (s.at(key).get<bool>()) ++hits;
  return static_cast<double>(hits) / static_cast<double>(per_seed.size());
}

std::vector<double> collect(const std::vector<json>& per_seed, const std::string& key) {
  std::vector<double> out;
  for (const auto& s : per_seed) out.push_back(s.at(key).get<double>());
  return out;
}

json summary(const std::vector<double>& v) {
  if (v.empty()) return {{"count", 0}};
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const MeanEstimate m = mean_estimate(v);
  return {{"count", v.size()}, {"mean", m.mean}, {"standard_error", m.standard_error}, {"median", median(v)},
          {"min", *lo}, {"max", *hi}};
}

// --- sample ------------------------------------------------------------

class SampleRunner final : public SuiteRunner {
 public:
  json run_seed(const json& params, std::uint64_t seed) const override {
    const SampleModel model = model_param(params);
    const Index N = dimensions(params, false).front();
    const EnsembleParams e = ensemble_params(params, model, N);
    json out{{"N", N}, {"p", e.p}};
    SymmetricMatrix h;
    if (model == SampleModel::Goe) {
      h = sample_goe(N, seed);
    } else {
      const GraphModel g = model == SampleModel::ErdosRenyi ? GraphModel::ErdosRenyi : GraphModel::Regular;
      const AdjacencySample a = g == GraphModel::ErdosRenyi ? sample_er(e, seed) : sample_regular(e, seed);
      out["edges"] = a.edge_count();
      out["mean_degree"] = 2.0 * static_cast<double>(a.edge_count()) / static_cast<double>(N);
      h = g == GraphModel::ErdosRenyi ? normalize_er(a) : normalize_regular(a);
    }
    const Vector lam = eigenvalues_only(h);
    out["lambda_min"] = lam(0);
    out["lambda_max"] = lam(N - 1);
    out["lambda_second"] = lam(N - 2);
    out["mean_square_entry"] = h.dense().squaredNorm() / static_cast<double>(N * N);
    return out;
  }

  json aggregate(const json&, const std::vector<json>& per_seed) const override {
    json out{{"lambda_min", summary(collect(per_seed, "lambda_min"))},
             {"lambda_max", summary(collect(per_seed, "lambda_max"))},
             {"lambda_second", summary(collect(per_seed, "lambda_second"))},
             {"mean_square_entry", summary(collect(per_seed, "mean_square_entry"))}};
    if (!per_seed.empty() && per_seed.front().contains("mean_degree"))
      out["mean_degree"] = summary(collect(per_seed, "mean_degree"));
    return out;
  }
};

// --- flow --------------------------------------------------------------

class FlowRunner final : public SuiteRunner {
 public:
  json run_seed(const json& params, std::uint64_t seed) const override {
    const SampleModel model = model_param(params);
    const Index N = dimensions(params, false).front();
    const EnsembleParams e = ensemble_params(params, model, N);
    FlowVariant variant;
    try {
      variant = parse_flow_variant(require_string(params, "variant"));
    } catch (const ParameterError&) {
      throw ConfigError("variant", "unknown flow variant");
    }
    const double t = require_number(params, "t");
    const SymmetricMatrix h0 = sample_model_matrix(model, e, 0.0, seed);
    SymmetricMatrix h;
    double f = 0.0;
    switch (variant) {
      case FlowVariant::Additive: h = dbm_exact_sample(h0, t, seed); break;
      case FlowVariant::OrnsteinUhlenbeck:
        f = params.contains("f") ? require_number(params, "f")
                                 : (model == SampleModel::ErdosRenyi ? ou_mean_level(e.p, N) : 0.0);
        h = ou_flow_sample(h0, t, f, seed);
        break;
      case FlowVariant::Constrained: h = constrained_flow_regular(h0, t, seed); break;
    }
    double sum = 0.0, sq = 0.0;
    long count = 0;
    for (Index a = 0; a < N; ++a)
      for (Index b = a + 1; b < N; ++b) {
        sum += h(a, b);
        sq += h(a, b) * h(a, b);
        ++count;
      }
    const double mean = sum / static_cast<double>(count);
    const Vector lam = eigenvalues_only(h);
    return {{"N", N}, {"t", t}, {"f", f}, {"offdiag_mean", mean},
            {"offdiag_variance", sq / static_cast<double>(count) - mean * mean},
            {"lambda_min", lam(0)}, {"lambda_max", lam(N - 1)}};
  }

  json aggregate(const json&, const std::vector<json>& per_seed) const override {
    return {{"offdiag_mean", summary(collect(per_seed, "offdiag_mean"))},
            {"offdiag_variance", summary(collect(per_seed, "offdiag_variance"))},
            {"lambda_min", summary(collect(per_seed, "lambda_min"))},
            {"lambda_max", summary(collect(per_seed, "lambda_max"))}};
  }
};

// --- fc ----------------------------------------------------------------

std::vector<double> grid_param(const json& params) {
  const json& g = params.at("grid");
  std::vector<double> out;
  if (g.is_array()) {
    for (const auto& x : g) {
      if (!x.is_number()) throw ConfigError("grid", "expected numbers");
      out.push_back(x.get<double>());
    }
  } else if (g.is_object()) {
    for (const char* key : {"E0", "r", "eta_min", "eta_max", "nE", "nEta"}) out.push_back(require_number(g, key));
  } else {
    throw ConfigError("grid", "expected [E0, r, eta_min, eta_max, nE, nEta] or an object");
  }
  if (out.size() != 6) throw ConfigError("grid", "expected six entries");
  return out;
}

class FcRunner final : public SuiteRunner {
 public:
  json run_seed(const json& params, std::uint64_t seed) const override {
    const double t = require_number(params, "t");
    const std::vector<double> grid = grid_param(params);
    const bool with_gamma = bool_or(params, "gamma", true);
    EmpiricalMeasure mu;
    if (params.contains("atoms")) {
      const json& a = params.at("atoms");
      if (a.is_string()) {
        const auto v = io::read_reals(a.get<std::string>());
        mu = EmpiricalMeasure(Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size())));
      } else if (a.is_array()) {
        const auto v = a.get<std::vector<double>>();
        mu = EmpiricalMeasure(Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size())));
      } else {
        throw ConfigError("atoms", "expected a file path or a list of reals");
      }
    } else {
      const SampleModel model = model_param(params);
      const Index N = dimensions(params, false).front();
      mu = EmpiricalMeasure(eigenvalues_only(sample_model_matrix(model, ensemble_params(params, model, N), 0.0, seed)));
    }
    return fc_report(mu, t, grid, with_gamma);
  }

  json aggregate(const json&, const std::vector<json>& per_seed) const override {
    std::vector<double> res = collect(per_seed, "residual_max");
    return {{"residual_max", res.empty() ? 0.0 : *std::max_element(res.begin(), res.end())},
            {"residual_bound", 1e-12}};
  }
};

// --- momentflow --------------------------------------------------------

RangeSelection range_param(const json& params) {
  const std::string r = string_or(params, "range", "all");
  if (r == "all") return RangeSelection::All;
  if (r == "short") return RangeSelection::Short;
  if (r == "long") return RangeSelection::Long;
  throw ConfigError("range", "expected all, short or long");
}

class MomentFlowRunner final : public SuiteRunner {
 public:
  json run_seed(const json& params, std::uint64_t seed) const override {
    const auto N = static_cast<Index>(require_integer(params, "n_sites"));
    const auto n = static_cast<int>(require_integer(params, "n_particles"));
    if (N < 2) throw ConfigError("n_sites", "need at least two sites");
    if (n < 1) throw ConfigError("n_particles", "need at least one particle");
    const double t0 = require_number(params, "t0");
    const double t1 = require_number(params, "t1");
    const double dt = require_number(params, "dt");

    EigenvaluePath path;
    if (params.contains("lambda_path")) {
      path = EigenvaluePath::read(require_string(params, "lambda_path"));
    } else if (params.contains("lambdas")) {
      const auto v = params.at("lambdas").get<std::vector<double>>();
      path = EigenvaluePath::frozen(Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size())));
    } else {
      path = EigenvaluePath::frozen(eigenvalues_only(sample_goe(N, seed)));
    }
    if (path.dim() != N) throw ConfigError("n_sites", "does not match the eigenvalue path dimension");

    auto space = std::make_shared<const ConfigurationSpace>(N, n);
    const std::string init = string_or(params, "init", "flat");
    MomentFunction f0;
    if (init == "flat") {
      f0 = MomentFunction::constant(space);
    } else if (init.rfind("delta:", 0) == 0) {
      const long idx = std::stol(init.substr(6));
      if (idx < 0 || static_cast<std::size_t>(idx) >= space->size()) throw ConfigError("init", "state index out of range");
      f0 = MomentFunction::delta(space, static_cast<std::size_t>(idx));
    } else {
      throw ConfigError("init", "expected flat or delta:IDX");
    }

    MasterOptions opts;
    opts.generator.range = range_param(params);
    opts.generator.ell = static_cast<Index>(integer_or(params, "ell", 1));
    opts.generator.prefactor = number_or(params, "prefactor", 2.0);
    const double mass0 = f0.pi_mass();
    double prev_max = f0.values.maxCoeff();
    double mass_drift = 0.0;
    bool max_nonincreasing = true;
    double max_increase = 0.0;
    opts.observer = [&](double, const Vector& f) {
      double mass = 0.0;
      for (Index k = 0; k < f.size(); ++k) mass += space->equilibrium()(k) * f(k);
      mass_drift = std::max(mass_drift, std::abs(mass - mass0));
      const double m = f.maxCoeff();
      if (m > prev_max + 1e-12) max_nonincreasing = false;
      max_increase = std::max(max_increase, m - prev_max);
      prev_max = m;
    };
    const MomentFunction f1 = evolve_master(f0, path, t0, t1, dt, opts);
    return {{"states", space->size()}, {"pi_mass_initial", mass0}, {"pi_mass_final", f1.pi_mass()},
            {"pi_mass_drift", mass_drift}, {"max_nonincreasing", max_nonincreasing},
            {"max_increase", max_increase}, {"f_final", vector_json(f1.values)}};
  }

  json aggregate(const json&, const std::vector<json>& per_seed) const override {
    std::vector<double> drift = collect(per_seed, "pi_mass_drift");
    const double worst = drift.empty() ? 0.0 : *std::max_element(drift.begin(), drift.end());
    return {{"pi_mass_drift_max", worst}, {"max_principle_fraction", fraction_true(per_seed, "max_nonincreasing")},
            {"conserved", worst <= 1e-10}};
  }
};

// --- verify ------------------------------------------------------------

class VerifyRunner final : public SuiteRunner {
 public:
  json run_seed(const json& params, std::uint64_t seed) const override {
    const std::string kind = require_string(params, "kind");
    if (kind == "normality") return normality_seed(params, seed);
    if (kind == "que") return que_seed(params, seed);
    if (kind == "rigidity" || kind == "locallaw") return law_seed_json(params, seed, kind == "locallaw");
    if (kind == "general") return general_seed(params, seed);
    throw ConfigError("kind", "unknown verify kind '" + kind + "'");
  }

  json aggregate(const json& params, const std::vector<json>& per_seed) const override {
    const std::string kind = require_string(params, "kind");
    json out;
    if (kind == "normality") out = normality_aggregate(params, per_seed);
    else if (kind == "que") out = que_aggregate(per_seed);
    else if (kind == "rigidity" || kind == "locallaw") out = law_aggregate(params, per_seed, kind == "locallaw");
    else out = general_aggregate(per_seed);
    out["kind"] = kind;
    return out;
  }

 private:
  static ProjectionRequest projection_request(const json& params, Index N, std::uint64_t seed) {
    ProjectionRequest req;
    req.model = model_param(params);
    req.params = ensemble_params(params, req.model, N);
    req.t = number_or(params, "t", 0.0);
    req.kappa = number_or(params, "kappa", 0.1);
    req.indices = bulk_indices(N, req.kappa, static_cast<Index>(integer_or(params, "indices", 40)));
    req.seeds = {seed};
    req.direction_seed = static_cast<std::uint64_t>(integer_or(params, "direction_seed", 0));
    req.allow_q_along_e = bool_or(params, "allow_q_along_e", false);
    req.threads = 1;
    return req;
  }

  static json normality_seed(const json& params, std::uint64_t seed) {
    const Index N = dimensions(params, false).front();
    const ProjectionSampleSet set = projection_samples(projection_request(params, N, seed));
    std::vector<double> idx(set.indices.begin(), set.indices.end());
    return {{"N", N}, {"indices", idx}, {"values", vector_json(set.values.row(0).transpose())},
            {"parseval_error", set.parseval_max_error}};
  }

  static json normality_aggregate(const json& params, const std::vector<json>& per_seed) {
    if (per_seed.empty()) return {{"pass", false}};
    const auto width = per_seed.front().at("values").size();
    Matrix values(static_cast<Index>(per_seed.size()), static_cast<Index>(width));
    for (std::size_t s = 0; s < per_seed.size(); ++s) {
      const auto row = per_seed[s].at("values").get<std::vector<double>>();
      for (std::size_t k = 0; k < width; ++k) values(static_cast<Index>(s), static_cast<Index>(k)) = row[k];
    }
    std::vector<double> pooled(values.data(), values.data() + values.size());
    json out;
    const Index N = per_seed.front().at("N").get<Index>();
    out["N"] = N;
    out["samples"] = pooled.size();
    out["histogram"] = histogram(pooled);
    if (pooled.size() < 1000) {
      out["pass"] = false;
      out["note"] = "fewer than 1000 pooled samples; moment and KS tests skipped";
      return out;
    }
    const NormalityReport report = normality_report(pooled, number_or(params, "ks_threshold", 0.01));
    out["normality"] = to_json(report);
    const auto pairs = joint_pair_tests(values, 20, number_or(params, "joint_slack", 0.1));
    json lines = json::array();
    std::size_t passing = 0;
    for (const auto& l : pairs) {
      lines.push_back(to_json(l));
      if (l.pass) ++passing;
    }
    const auto required = static_cast<std::size_t>(integer_or(params, "joint_pairs_required", 5));
    out["joint"] = {{"pairs", lines}, {"passing", passing}, {"required", required}, {"pass", passing >= required}};
    out["trend"] = json::array({{{"N", N}, {"statistic", report.ks.statistic}}});
    out["pass"] = report.pass() && passing >= required;
    return out;
  }

  static json que_seed(const json& params, std::uint64_t seed) {
    const SampleModel model = model_param(params);
    const double t = number_or(params, "t", 0.0);
    const double kappa = number_or(params, "kappa", 0.1);
    const auto count = static_cast<Index>(integer_or(params, "indices", 20));
    json levels = json::array();
    for (Index N : dimensions(params, true)) {
      const EnsembleParams e = ensemble_params(params, model, N);
      const SpectralDecomposition s = eigendecompose(sample_model_matrix(model, e, t, seed));
      const Vector a = alternating_weights(N);
      std::vector<double> stats;
      for (Index i : bulk_indices(N, kappa, count)) stats.push_back(std::abs(que_statistic(s.vector(i), a)));
      levels.push_back({{"N", N}, {"p", e.p}, {"abs_statistic", stats}});
    }
    return {{"levels", levels}};
  }

  static json que_aggregate(const std::vector<json>& per_seed) {
    if (per_seed.empty()) return {{"pass", false}};
    json trend = json::array();
    const std::size_t L = per_seed.front().at("levels").size();
    std::vector<double> medians;
    for (std::size_t l = 0; l < L; ++l) {
      std::vector<double> pooled;
      for (const auto& s : per_seed) {
        const auto v = s.at("levels").at(l).at("abs_statistic").get<std::vector<double>>();
        pooled.insert(pooled.end(), v.begin(), v.end());
      }
      medians.push_back(median(pooled));
      trend.push_back({{"N", per_seed.front().at("levels").at(l).at("N")}, {"statistic", medians.back()}});
    }
    bool decreasing = true;
    for (std::size_t l = 1; l < medians.size(); ++l) decreasing = decreasing && medians[l] < medians[l - 1];
    return {{"trend", trend}, {"strictly_decreasing", decreasing}, {"pass", decreasing}};
  }

  static LawSetup law_setup(const json& params, Index N) {
    LawSetup setup;
    setup.model = params.contains("model") ? model_param(params) : SampleModel::Goe;
    setup.params = ensemble_params(params, setup.model, N);
    setup.t = number_or(params, "t", 0.3);
    setup.psi_exponent = number_or(params, "psi_exponent", 0.1);
    setup.kappa = number_or(params, "kappa", 0.1);
    setup.E0 = number_or(params, "E0", 0.0);
    setup.r = number_or(params, "r", 1.0);
    setup.nE = static_cast<Index>(integer_or(params, "nE", 10));
    setup.nEta = static_cast<Index>(integer_or(params, "nEta", 10));
    return setup;
  }

  static json law_seed_json(const json& params, std::uint64_t seed, bool laws) {
    const double factor = number_or(params, "rigidity_factor", 10.0);
    json levels = json::array();
    for (Index N : dimensions(params, !laws)) {
      LawSetup setup = law_setup(params, N);
      setup.laws = laws;
      const LawResult r = law_seed(setup, seed);
      json level{{"N", N}, {"psi", r.psi}, {"rigidity", r.rigidity.max_scaled_error},
                 {"rigidity_argmax", r.rigidity.argmax}, {"rigidity_pass", r.rigidity.max_scaled_error <= factor * r.psi}};
      if (laws) {
        level["isotropic"] = to_json(r.isotropic, true);
        level["local"] = to_json(r.local, true);
        level["isotropic_pass"] = r.isotropic.max_ratio <= 1.0;
        level["fc_residual_max"] = r.fc_residual_max;
      }
      levels.push_back(level);
    }
    return {{"levels", levels}};
  }

  static json law_aggregate(const json& params, const std::vector<json>& per_seed, bool laws) {
    if (per_seed.empty()) return {{"pass", false}};
    const double required = number_or(params, "seed_fraction", 0.9);
    json trend = json::array();
    json out;
    bool pass = true;
    const std::size_t L = per_seed.front().at("levels").size();
    for (std::size_t l = 0; l < L; ++l) {
      std::vector<json> level;
      for (const auto& s : per_seed) level.push_back(s.at("levels").at(l));
      const double rig_fraction = fraction_true(level, "rigidity_pass");
      const double rig_median = median(collect(level, "rigidity"));
      trend.push_back({{"N", level.front().at("N")}, {"statistic", rig_median}});
      pass = pass && rig_fraction >= required;
      out["rigidity_fraction"] = rig_fraction;
      out["rigidity_median"] = rig_median;
      if (laws) {
        const double iso_fraction = fraction_true(level, "isotropic_pass");
        out["isotropic_fraction"] = iso_fraction;
        pass = pass && iso_fraction >= required;
        std::vector<double> ratios;
        for (const auto& s : level) ratios.push_back(s.at("isotropic").at("max_ratio").get<double>());
        out["isotropic_ratio"] = summary(ratios);
        out["envelope"] = envelope_rows(level);
      }
    }
    out["trend"] = trend;
    out["required_fraction"] = required;
    out["pass"] = pass;
    return out;
  }

  /// Per eta: median over seeds of the largest isotropic error across
  /// energies, next to the median of the smallest envelope across energies.
  static json envelope_rows(const std::vector<json>& level) {
    std::map<double, std::pair<std::vector<double>, std::vector<double>>> by_eta;
    for (const auto& s : level) {
      std::map<double, std::pair<double, double>> local;
      for (const auto& p : s.at("isotropic").at("points")) {
        const double eta = p.at("eta").get<double>();
        auto [it, fresh] = local.try_emplace(eta, p.at("error").get<double>(), p.at("envelope").get<double>());
        if (!fresh) {
          it->second.first = std::max(it->second.first, p.at("error").get<double>());
          it->second.second = std::min(it->second.second, p.at("envelope").get<double>());
        }
      }
      for (const auto& [eta, v] : local) {
        by_eta[eta].first.push_back(v.first);
        by_eta[eta].second.push_back(v.second);
      }
    }
    json rows = json::array();
    for (const auto& [eta, v] : by_eta)
      rows.push_back({{"eta", eta}, {"error", median(v.first)}, {"envelope", median(v.second)}});
    return rows;
  }

  static json general_seed(const json& params, std::uint64_t seed) {
    const SampleModel model = model_param(params);
    const Index N = dimensions(params, false).front();
    const EnsembleParams e = ensemble_params(params, model, N);
    const SpectralDecomposition s = eigendecompose(sample_model_matrix(model, e, number_or(params, "t", 0.0), seed));
    const Vector q = default_direction(N, static_cast<std::uint64_t>(integer_or(params, "direction_seed", 0)),
                                       model != SampleModel::Goe);
    const GeneralReport r = general_check(s, q, number_or(params, "c", 0.1), number_or(params, "C", 10.0));
    return {{"N", N}, {"max_entry_overlap", r.max_entry_overlap}, {"max_direction_overlap", r.max_direction_overlap},
            {"delocalization_bound", r.delocalization_bound}, {"max_count_ratio", r.max_count_ratio},
            {"delocalized", r.delocalized}, {"direction_delocalized", r.direction_delocalized},
            {"no_accumulation", r.no_accumulation}, {"general", r.general()}};
  }

  static json general_aggregate(const std::vector<json>& per_seed) {
    if (per_seed.empty()) return {{"pass", false}};
    const double frac = fraction_true(per_seed, "general");
    return {{"general_fraction", frac}, {"max_entry_overlap", summary(collect(per_seed, "max_entry_overlap"))},
            {"max_count_ratio", summary(collect(per_seed, "max_count_ratio"))},
            {"trend", json::array({{{"N", per_seed.front().at("N")}, {"statistic", frac}}})},
            {"pass", frac == 1.0}};
  }
};

}  // namespace

std::unique_ptr<SuiteRunner> make_runner(Suite suite) {
  switch (suite) {
    case Suite::Sample: return std::make_unique<SampleRunner>();
    case Suite::Flow: return std::make_unique<FlowRunner>();
    case Suite::Fc: return std::make_unique<FcRunner>();
    case Suite::MomentFlow: return std::make_unique<MomentFlowRunner>();
    case Suite::Verify: return std::make_unique<VerifyRunner>();
  }
  throw ConfigError("suite", "unknown suite");
}

json fc_report(const EmpiricalMeasure& mu, double t, const std::vector<double>& grid, bool with_gamma) {
  if (grid.size() != 6) throw ParameterError("fc grid needs E0, r, eta_min, eta_max, nE, nEta");
  SpectralDomain d;
  d.E0 = grid[0];
  d.r = grid[1];
  d.kappa = 0.0;
  d.eta_min = grid[2];
  d.eta_max = grid[3];
  const auto nE = static_cast<Index>(grid[4]);
  const auto nEta = static_cast<Index>(grid[5]);
  if (!(d.r > 0.0) || !(d.eta_min > 0.0) || d.eta_max < d.eta_min || nE < 1 || nEta < 1)
    throw ParameterError("malformed fc grid");
  const FreeConvolutionState state = solve_grid(mu, t, d, nE, nEta);
  state.assert_residuals(1e-12);
  json re = json::array(), im = json::array(), energies = json::array(), etas = json::array();
  for (Index i = 0; i < nE; ++i) {
    std::vector<double> r_row, i_row;
    for (Index k = 0; k < nEta; ++k) {
      const auto idx = static_cast<std::size_t>(i * nEta + k);
      r_row.push_back(state.solutions[idx].real());
      i_row.push_back(state.solutions[idx].imag());
      if (i == 0) etas.push_back(state.points[idx].eta);
    }
    energies.push_back(state.points[static_cast<std::size_t>(i * nEta)].E);
    re.push_back(r_row);
    im.push_back(i_row);
  }
  json out{{"t", t},
           {"grid", {{"E0", d.E0}, {"r", d.r}, {"eta_min", d.eta_min}, {"eta_max", d.eta_max}, {"nE", nE},
                     {"nEta", nEta}, {"energies", energies}, {"etas", etas}}},
           {"m_re", re},
           {"m_im", im},
           {"residual_max", state.residual_max()}};
  out["gamma"] = with_gamma ? vector_json(classical_locations(mu, t, mu.size()).gamma) : json::array();
  return out;
}

LawResult law_seed(const LawSetup& setup, std::uint64_t seed) {
  const Index N = setup.params.N;
  LawResult out;
  out.N = N;
  const SymmetricMatrix h0 = sample_model_matrix(setup.model, setup.params, 0.0, seed);
  const SpectralDecomposition s0 = eigendecompose(h0);
  const EmpiricalMeasure mu(s0.eigenvalues);
  const SpectralDecomposition s = eigendecompose(dbm_exact_sample(h0, setup.t, seed));
  const SpectralDomain domain = SpectralDomain::standard(N, setup.E0, setup.r, setup.kappa, setup.psi_exponent);
  out.psi = domain.psi(N);
  out.rigidity = rigidity_error(s.eigenvalues, classical_locations(mu, setup.t, N), bulk_window(N, setup.kappa));
  if (!setup.laws) return out;
  const FreeConvolutionState fc = solve_grid(mu, setup.t, domain, setup.nE, setup.nEta);
  fc.assert_residuals(1e-12);
  out.fc_residual_max = fc.residual_max();
  const Vector q = default_direction(N, seed, setup.model != SampleModel::Goe);
  out.isotropic = isotropic_law_error(s, q, s0, mu, fc, out.psi);
  out.local = local_law_error(s, fc, out.psi);
  return out;
}

json to_json(const NormalityReport& r) {
  json moments = json::array();
  for (const auto& m : r.moments)
    moments.push_back({{"degree", m.degree}, {"target", m.target}, {"empirical", m.empirical},
                       {"standard_error", m.standard_error}, {"deviation", m.deviation}, {"slack", m.slack},
                       {"sigmas", m.sigmas}, {"pass", m.pass}});
  return {{"moments", moments},
          {"ks", {{"statistic", r.ks.statistic}, {"p_value", r.ks.p_value}, {"n", r.ks.n},
                  {"threshold", r.ks_threshold}, {"pass", r.ks_pass}}},
          {"samples", r.samples},
          {"pass", r.pass()}};
}

json to_json(const JointMomentLine& line) {
  return {{"first", line.first}, {"second", line.second}, {"target", line.target}, {"empirical", line.empirical},
          {"standard_error", line.standard_error}, {"slack", line.slack}, {"pass", line.pass}};
}

json to_json(const LocalLawReport& r, bool with_points) {
  json out{{"psi", r.psi}, {"max_ratio", r.max_ratio}, {"max_error", r.max_error}};
  if (with_points) {
    json pts = json::array();
    for (const auto& p : r.points) pts.push_back(law_point_json(p));
    out["points"] = pts;
  }
  return out;
}

std::vector<JointMomentLine> joint_pair_tests(const Matrix& values, std::size_t max_pairs, double slack) {
  std::vector<JointMomentLine> out;
  for (Index k = 0; k + 1 < values.cols() && out.size() < max_pairs; k += 2) {
    std::vector<double> x(values.rows()), y(values.rows());
    for (Index s = 0; s < values.rows(); ++s) {
      x[static_cast<std::size_t>(s)] = values(s, k);
      y[static_cast<std::size_t>(s)] = values(s, k + 1);
    }
    JointMomentLine line = joint_moment_test(x, y, 1, 1, slack);
    line.first = k;
    line.second = k + 1;
    out.push_back(line);
  }
  return out;
}

json histogram(const std::vector<double>& samples, double upper, int bins) {
  if (!(upper > 0.0) || bins < 1) throw ParameterError("histogram needs upper > 0 and bins >= 1");
  std::vector<double> edges(static_cast<std::size_t>(bins) + 1);
  for (int b = 0; b <= bins; ++b) edges[static_cast<std::size_t>(b)] = upper * b / bins;
  std::vector<long> counts(static_cast<std::size_t>(bins), 0);
  for (double x : samples) {
    if (x < 0.0 || x >= upper) continue;
    ++counts[static_cast<std::size_t>(std::min(bins - 1, static_cast<int>(x / upper * bins)))];
  }
  return {{"bin_edges", edges}, {"counts", counts}, {"total", samples.size()}};
}

}  // namespace rmtlab::lab
