#include "rmtlab/spectral_stats.hpp"

#include <algorithm>
#include <cmath>

#include "rmtlab/moment_flow.hpp"
#include "rmtlab/parallel.hpp"
#include "rmtlab/rng.hpp"

namespace rmtlab {

BulkWindow bulk_window(Index N, double kappa) {
  if (N < 1) throw ParameterError("bulk window needs N >= 1");
  if (!(kappa >= 0.0 && kappa < 0.5)) throw ParameterError("bulk window needs 0 <= kappa < 1/2");
  const double n = static_cast<double>(N);
  const Index lo1 = std::max<Index>(1, static_cast<Index>(std::ceil(kappa * n - 1e-9)));
  const Index hi1 = std::min<Index>(N, static_cast<Index>(std::floor((1.0 - kappa) * n + 1e-9)));
  if (hi1 < lo1) throw ParameterError("bulk window is empty");
  return {lo1 - 1, hi1 - 1};
}

std::vector<Index> bulk_indices(Index N, double kappa, Index count) {
  const BulkWindow w = bulk_window(N, kappa);
  if (count < 1 || count > w.size()) throw ParameterError("requested more bulk indices than the window holds");
  std::vector<Index> out;
  for (Index k = 0; k < count; ++k) {
    const double frac = count == 1 ? 0.5 : static_cast<double>(k) / static_cast<double>(count - 1);
    out.push_back(w.lo + static_cast<Index>(std::llround(frac * static_cast<double>(w.size() - 1))));
  }
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Vector default_direction(Index N, std::uint64_t seed, bool orthogonal_to_e) {
  if (N < 2) throw ParameterError("direction needs N >= 2");
  CounterRng rng(seed, Stream::Direction);
  Vector q(N);
  for (Index i = 0; i < N; ++i) q(i) = rng.normal();
  if (orthogonal_to_e) q.array() -= q.mean();
  q.normalize();
  return q;
}

std::string to_string(SampleModel m) {
  switch (m) {
    case SampleModel::ErdosRenyi: return "er";
    case SampleModel::Regular: return "regular";
    case SampleModel::Goe: return "goe";
  }
  return "er";
}

SampleModel parse_sample_model(const std::string& name) {
  if (name == "er" || name == "erdos_renyi") return SampleModel::ErdosRenyi;
  if (name == "regular") return SampleModel::Regular;
  if (name == "goe") return SampleModel::Goe;
  throw ParameterError("unknown model '" + name + "'");
}

std::vector<double> ProjectionSampleSet::pooled() const {
  std::vector<double> out(values.data(), values.data() + values.size());
  return out;
}

std::vector<double> ProjectionSampleSet::column(Index k) const {
  std::vector<double> out(static_cast<std::size_t>(values.rows()));
  for (Index s = 0; s < values.rows(); ++s) out[static_cast<std::size_t>(s)] = values(s, k);
  return out;
}

SymmetricMatrix sample_model_matrix(SampleModel model, const EnsembleParams& params, double t, std::uint64_t seed) {
  switch (model) {
    case SampleModel::ErdosRenyi: {
      SymmetricMatrix h = normalize_er(sample_er(params, seed));
      if (t > 0.0) h = ou_flow_sample(h, t, ou_mean_level(params.p, params.N), seed);
      return h;
    }
    case SampleModel::Regular: {
      SymmetricMatrix h = normalize_regular(sample_regular(params, seed));
      if (t > 0.0) h = constrained_flow_regular(h, t, seed);
      return h;
    }
    case SampleModel::Goe: {
      SymmetricMatrix h = sample_goe(params.N, seed);
      if (t > 0.0) h = dbm_exact_sample(h, t, seed);
      return h;
    }
  }
  throw ParameterError("unknown model");
}

ProjectionSampleSet projection_samples(const ProjectionRequest& request) {
  const Index N = request.params.N;
  if (request.seeds.empty()) throw ParameterError("projection sampling needs at least one seed");
  if (request.indices.empty()) throw ParameterError("projection sampling needs at least one index");
  if (!(request.t >= 0.0)) throw ParameterError("flow time must be >= 0");
  ProjectionSampleSet set;
  set.window = bulk_window(N, request.kappa);
  for (Index i : request.indices)
    if (!set.window.contains(i)) throw ParameterError("index " + std::to_string(i) + " lies outside the bulk window");
  set.q = request.q ? *request.q : default_direction(N, request.direction_seed);
  if (set.q.size() != N) throw ParameterError("direction length differs from N");
  require_unit(set.q);
  if (request.model != SampleModel::Goe && !request.allow_q_along_e) {
    const double along = std::abs(set.q.sum()) / std::sqrt(static_cast<double>(N));
    if (along > 1e-10)
      throw ParameterError("q must be orthogonal to e for graph models (|<q,e>| = " + std::to_string(along) + ")");
  }
  set.indices = request.indices;
  set.model = request.model;
  set.N = N;
  set.p = request.params.p;
  set.t = request.t;
  set.seeds = request.seeds;
  set.values.resize(static_cast<Index>(request.seeds.size()), static_cast<Index>(request.indices.size()));
  std::vector<double> parseval(request.seeds.size(), 0.0);
  const double n = static_cast<double>(N);
  parallel_for(
      request.seeds.size(),
      [&](std::size_t s) {
        const std::uint64_t seed = request.seeds[s];
        const SymmetricMatrix h = sample_model_matrix(request.model, request.params, request.t, seed);
        CounterRng signs(seed, Stream::Signs);
        const SpectralDecomposition sd =
            request.random_signs ? eigendecompose(h, SignConvention::Rademacher, &signs) : eigendecompose(h);
        const Vector z2 = n * sd.overlaps(set.q).array().square().matrix();
        parseval[s] = std::abs(z2.sum() - n);
        for (std::size_t k = 0; k < request.indices.size(); ++k)
          set.values(static_cast<Index>(s), static_cast<Index>(k)) = z2(request.indices[k]);
      },
      request.threads ? request.threads : worker_count());
  set.parseval_max_error = *std::max_element(parseval.begin(), parseval.end());
  if (set.parseval_max_error > 1e-8)
    throw ContractViolation("Parseval ledger broken: |sum N<q,u_i>^2 - N| = " + std::to_string(set.parseval_max_error));
  return set;
}

double default_moment_slack(int degree) {
  switch (degree) {
    case 1: return 0.05;
    case 2: return 0.2;
    case 3: return 3.0;
    default: return 0.0;
  }
}

std::vector<MomentLine> moment_test(const std::vector<double>& samples, const std::vector<int>& degrees,
                                    const std::vector<double>& slack, double sigmas) {
  if (samples.size() < 1000) throw ParameterError("moment test needs at least 1000 samples");
  if (!slack.empty() && slack.size() != degrees.size()) throw ParameterError("one slack per degree expected");
  std::vector<MomentLine> out;
  std::vector<double> powered(samples.size());
  for (std::size_t d = 0; d < degrees.size(); ++d) {
    const int j = degrees[d];
    if (j < 1) throw ParameterError("moment degrees must be >= 1");
    for (std::size_t k = 0; k < samples.size(); ++k) powered[k] = std::pow(samples[k], j);
    const MeanEstimate e = mean_estimate(powered);
    MomentLine line;
    line.degree = j;
    line.target = odd_double_factorial(j);
    line.empirical = e.mean;
    line.standard_error = e.standard_error;
    line.deviation = e.mean - line.target;
    line.slack = slack.empty() ? default_moment_slack(j) : slack[d];
    line.sigmas = sigmas;
    line.pass = std::abs(line.deviation) <= sigmas * e.standard_error + line.slack;
    out.push_back(line);
  }
  return out;
}

JointMomentLine joint_moment_test(const std::vector<double>& x, const std::vector<double>& y, int j1, int j2,
                                  double slack, double sigmas) {
  if (x.size() != y.size()) throw ParameterError("joint moment test needs seed-aligned samples of equal length");
  if (x.size() < 2) throw ParameterError("joint moment test needs at least two samples");
  std::vector<double> prod(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) prod[k] = std::pow(x[k], j1) * std::pow(y[k], j2);
  const MeanEstimate e = mean_estimate(prod);
  JointMomentLine line;
  line.degree_first = j1;
  line.degree_second = j2;
  line.target = odd_double_factorial(j1) * odd_double_factorial(j2);
  line.empirical = e.mean;
  line.standard_error = e.standard_error;
  line.slack = slack;
  line.pass = std::abs(e.mean - line.target) <= sigmas * e.standard_error + slack;
  return line;
}

KsResult ks_test_chisq(const std::vector<double>& samples) {
  if (samples.size() < 1000) throw ParameterError("KS test needs at least 1000 samples");
  return ks_one_sample(samples, chisq1_cdf);
}

bool NormalityReport::pass() const {
  for (const auto& m : moments)
    if (!m.pass) return false;
  return ks_pass;
}

NormalityReport normality_report(const std::vector<double>& samples, double ks_threshold) {
  NormalityReport r;
  r.samples = samples.size();
  r.moments = moment_test(samples);
  r.ks = ks_test_chisq(samples);
  r.ks_threshold = ks_threshold;
  r.ks_pass = r.ks.p_value > ks_threshold;
  return r;
}

double que_statistic(const Vector& u, const Vector& a) {
  if (u.size() != a.size()) throw ParameterError("QUE weights and eigenvector differ in length");
  const double l1 = a.cwiseAbs().sum();
  if (!(l1 > 0.0)) throw ParameterError("QUE weights must not vanish");
  if (std::abs(a.sum()) > 1e-12) throw ParameterError("QUE weights must sum to zero");
  if (a.cwiseAbs().maxCoeff() > 1.0) throw ParameterError("QUE weights must satisfy max|a_i| <= 1");
  return static_cast<double>(u.size()) / l1 * a.dot(u.array().square().matrix());
}

Vector alternating_weights(Index N) {
  Vector a(N);
  for (Index i = 0; i < N; ++i) a(i) = i % 2 ? -1.0 : 1.0;
  if (N % 2) a(N - 1) = 0.0;
  return a;
}

RigidityResult rigidity_error(const Vector& eigenvalues, const ClassicalLocations& gamma, const BulkWindow& window) {
  if (gamma.gamma.size() != eigenvalues.size()) throw ParameterError("classical locations and spectrum differ in size");
  if (window.lo < 0 || window.hi >= eigenvalues.size()) throw ParameterError("window exceeds the spectrum");
  RigidityResult r;
  const double n = static_cast<double>(eigenvalues.size());
  for (Index i = window.lo; i <= window.hi; ++i) {
    const double e = n * std::abs(eigenvalues(i) - gamma.gamma(i));
    if (e > r.max_scaled_error) {
      r.max_scaled_error = e;
      r.argmax = i;
    }
  }
  return r;
}

namespace {

void check_grid(const FreeConvolutionState& fc, Index N, double psi) {
  const double floor = std::pow(psi, 4) / static_cast<double>(N);
  for (const auto& z : fc.points)
    if (z.eta < floor * (1.0 - 1e-12))
      throw ParameterError("grid point eta=" + std::to_string(z.eta) + " below psi^4/N=" + std::to_string(floor));
}

void finish(LocalLawReport& r) {
  for (const auto& p : r.points) {
    r.max_ratio = std::max(r.max_ratio, p.ratio);
    r.max_error = std::max(r.max_error, p.error);
  }
}

}  // namespace

LocalLawReport local_law_error(const SpectralDecomposition& s, const FreeConvolutionState& fc, double psi) {
  if (!(psi > 0.0)) throw ParameterError("psi must be positive");
  check_grid(fc, s.dim(), psi);
  fc.assert_residuals();
  LocalLawReport r;
  r.psi = psi;
  const double n = static_cast<double>(s.dim());
  for (std::size_t k = 0; k < fc.size(); ++k) {
    const auto& z = fc.points[k];
    LawPoint p{z.E, z.eta};
    p.error = std::abs(stieltjes_transform(s, z) - fc.solutions[k]);
    p.envelope = psi / (n * z.eta);
    p.ratio = p.error / p.envelope;
    r.points.push_back(p);
  }
  finish(r);
  return r;
}

LocalLawReport isotropic_law_error(const SpectralDecomposition& s, const Vector& q,
                                   const SpectralDecomposition& initial, const EmpiricalMeasure& mu,
                                   const FreeConvolutionState& fc, double psi) {
  if (!(psi > 0.0)) throw ParameterError("psi must be positive");
  const Index N = s.dim();
  if (initial.dim() != N || mu.size() != N || q.size() != N)
    throw ParameterError("spectrum, initial data and free-convolution measure differ in dimension");
  const double scale = std::max(1.0, mu.atoms().cwiseAbs().maxCoeff());
  if ((initial.eigenvalues - mu.atoms()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw ParameterError("initial spectrum does not match the free-convolution atoms");
  check_grid(fc, N, psi);
  fc.assert_residuals();
  const Vector w = initial.overlaps(q).array().square().matrix();
  LocalLawReport r;
  r.psi = psi;
  const double n = static_cast<double>(N);
  for (std::size_t k = 0; k < fc.size(); ++k) {
    const auto& z = fc.points[k];
    const auto g = g_weights(mu, fc.t, z, fc.solutions[k]);
    Complex target = 0.0;
    for (Index i = 0; i < N; ++i) target += w(i) * g[static_cast<std::size_t>(i)];
    LawPoint p{z.E, z.eta};
    p.error = std::abs(isotropic_form(s, q, z) - target);
    p.envelope = psi * psi / std::sqrt(n * z.eta) * target.imag();
    p.ratio = p.error / p.envelope;
    r.points.push_back(p);
  }
  finish(r);
  return r;
}

double q_quantity(const Vector& eigenvalues, Index i) {
  const Index N = eigenvalues.size();
  if (i < 0 || i >= N) throw ParameterError("eigenvalue index out of range");
  double sum = 0.0;
  for (Index j = 0; j < N; ++j) {
    if (j == i) continue;
    const double g = eigenvalues(j) - eigenvalues(i);
    if (!(std::abs(g) > 1e-12)) throw CollisionError("degenerate eigenvalue in Q_i", std::min(i, j), std::max(i, j), std::abs(g));
    sum += 1.0 / (g * g);
  }
  return sum / (static_cast<double>(N) * static_cast<double>(N));
}

PerturbationDerivatives perturbation_derivatives(const SpectralDecomposition& s, const Vector& q, Index i, Index a,
                                                 Index b) {
  const Index N = s.dim();
  if (i < 0 || i >= N || a < 0 || a >= N || b < 0 || b >= N) throw ParameterError("index out of range");
  const Matrix& U = s.eigenvectors;
  const Vector& lam = s.eigenvalues;
  auto vform = [&](Index j, Index k) {  // u_j^T V u_k
    return a == b ? U(a, j) * U(a, k) : U(a, j) * U(b, k) + U(b, j) * U(a, k);
  };
  PerturbationDerivatives d;
  d.dlambda = vform(i, i);
  const Vector overlaps = s.overlaps(q);
  double dproj = 0.0;
  double dq = 0.0;
  for (Index j = 0; j < N; ++j) {
    if (j == i) continue;
    const double gap = lam(i) - lam(j);
    if (!(std::abs(gap) > 1e-12)) throw CollisionError("degenerate eigenvalue in derivative", std::min(i, j), std::max(i, j), std::abs(gap));
    dproj += overlaps(j) * vform(j, i) / gap;
    const double dgap = vform(j, j) - d.dlambda;  // d(lambda_j - lambda_i)
    dq += -2.0 * dgap / (-gap * gap * gap);
  }
  d.dprojection = 2.0 * overlaps(i) * dproj;
  d.dQ = dq / (static_cast<double>(N) * static_cast<double>(N));
  return d;
}

GeneralReport general_check(const SpectralDecomposition& s, const Vector& q, double c_exponent, double C) {
  if (!(c_exponent > 0.0) || !(C > 0.0)) throw ParameterError("general_check needs c > 0 and C > 0");
  const Index N = s.dim();
  const double n = static_cast<double>(N);
  GeneralReport r;
  r.delocalization_bound = C * std::pow(n, -1.0 + c_exponent);
  r.max_entry_overlap = s.eigenvectors.array().square().maxCoeff();
  r.max_direction_overlap = s.overlaps(q).array().square().maxCoeff();
  r.delocalized = r.max_entry_overlap <= r.delocalization_bound;
  r.direction_delocalized = r.max_direction_overlap <= r.delocalization_bound;

  const Vector& lam = s.eigenvalues;
  const double lo = lam(0), hi = lam(N - 1);
  const double min_len = std::pow(n, -1.0 + c_exponent);
  const double span = std::max(hi - lo, min_len);
  for (int m = static_cast<int>(std::ceil(std::log2(min_len))); std::ldexp(1.0, m) <= 4.0 * span; ++m) {
    const double len = std::ldexp(1.0, m);
    const auto k0 = static_cast<long long>(std::floor(lo / len));
    const auto k1 = static_cast<long long>(std::floor(hi / len));
    for (long long k = k0; k <= k1; ++k) {
      const double a = static_cast<double>(k) * len, b = a + len;
      const auto count = std::lower_bound(lam.data(), lam.data() + N, b) - std::lower_bound(lam.data(), lam.data() + N, a);
      r.max_count_ratio = std::max(r.max_count_ratio, static_cast<double>(count) / (n * len));
    }
  }
  r.no_accumulation = r.max_count_ratio <= C;
  return r;
}

namespace {

template <class F>
void scan_box(double E0, double r, double eta_lo, double eta_hi, Index nE, Index nEta, F&& f) {
  for (Index i = 0; i < nE; ++i) {
    const double E = nE == 1 ? E0 : E0 - r + 2.0 * r * static_cast<double>(i) / static_cast<double>(nE - 1);
    for (Index k = 0; k < nEta; ++k) {
      const double frac = nEta == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(nEta - 1);
      f(HalfPlanePoint(E, eta_lo * std::pow(eta_hi / eta_lo, frac)));
    }
  }
}

}  // namespace

ImBoundReport check_bounded_im(const SpectralDecomposition& s, double E0, double r, double eta_star, double a,
                               Index nE, Index nEta) {
  if (!(eta_star > 0.0 && eta_star <= 1.0)) throw ParameterError("eta_star must lie in (0, 1]");
  ImBoundReport rep;
  rep.norm = s.eigenvalues.cwiseAbs().maxCoeff();
  rep.min_im = std::numeric_limits<double>::infinity();
  scan_box(E0, r, eta_star, 1.0, nE, nEta, [&](const HalfPlanePoint& z) {
    const double im = stieltjes_transform(s, z).imag();
    rep.min_im = std::min(rep.min_im, im);
    rep.max_im = std::max(rep.max_im, im);
  });
  rep.pass = rep.norm <= std::pow(static_cast<double>(s.dim()), a) && rep.min_im >= 1.0 / a && rep.max_im <= a;
  return rep;
}

DirectionReport check_direction_delocalized(const SpectralDecomposition& s, const Vector& q, double E0, double r,
                                            double eta_star, double b, Index nE, Index nEta) {
  if (!(eta_star > 0.0 && eta_star <= r)) throw ParameterError("eta_star must lie in (0, r]");
  DirectionReport rep;
  rep.bound = std::pow(static_cast<double>(s.dim()), -b);
  scan_box(E0, r, eta_star, r, nE, nEta, [&](const HalfPlanePoint& z) {
    rep.max_deviation = std::max(rep.max_deviation, std::abs(isotropic_form(s, q, z) - stieltjes_transform(s, z)));
  });
  rep.pass = rep.max_deviation <= rep.bound;
  return rep;
}

}  // namespace rmtlab
