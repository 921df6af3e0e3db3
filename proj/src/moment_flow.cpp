#include "rmtlab/moment_flow.hpp"

#include <algorithm>
#include <cmath>

#include "rmtlab/rng.hpp"

namespace rmtlab {

ParticleConfiguration::ParticleConfiguration(std::vector<int> occupations) : occ_(std::move(occupations)) {
  if (occ_.empty()) throw ParameterError("configuration needs at least one site");
  for (int k : occ_) {
    if (k < 0) throw ParameterError("occupation numbers must be nonnegative");
    n_ += k;
  }
}

ParticleConfiguration ParticleConfiguration::single_site(Index N, Index site, int n) {
  if (site < 0 || site >= N) throw ParameterError("site index out of range");
  std::vector<int> occ(static_cast<std::size_t>(N), 0);
  occ[static_cast<std::size_t>(site)] = n;
  return ParticleConfiguration(std::move(occ));
}

std::vector<Index> ParticleConfiguration::positions() const {
  std::vector<Index> x;
  x.reserve(static_cast<std::size_t>(n_));
  for (std::size_t p = 0; p < occ_.size(); ++p)
    for (int k = 0; k < occ_[p]; ++k) x.push_back(static_cast<Index>(p));
  return x;
}

bool ParticleConfiguration::supported_in(Index a, Index b) const {
  for (std::size_t p = 0; p < occ_.size(); ++p)
    if (occ_[p] > 0 && (static_cast<Index>(p) < a || static_cast<Index>(p) > b)) return false;
  return true;
}

ParticleConfiguration config_jump(const ParticleConfiguration& eta, Index i, Index j) {
  if (i < 0 || j < 0 || i >= eta.sites() || j >= eta.sites()) throw ParameterError("jump site out of range");
  if (i == j) throw ParameterError("jump needs distinct sites");
  if (eta[i] == 0) throw ParameterError("invalid jump: no particle at site " + std::to_string(i));
  std::vector<int> occ = eta.occupations();
  --occ[static_cast<std::size_t>(i)];
  ++occ[static_cast<std::size_t>(j)];
  return ParticleConfiguration(std::move(occ));
}

double phi(int k) {
  if (k < 0) throw ParameterError("phi needs k >= 0");
  double value = 1.0;
  for (int i = 1; i <= k; ++i) value *= 1.0 - 1.0 / (2.0 * i);
  return value;
}

double odd_double_factorial(int k) {
  double value = 1.0;
  for (int i = 1; i <= k; ++i) value *= 2.0 * i - 1.0;
  return value;
}

double equilibrium_measure(const ParticleConfiguration& eta) {
  double value = 1.0;
  for (int k : eta.occupations())
    if (k > 0) value *= phi(k);
  return value;
}

double ConfigurationSpace::count(Index N, int n) {
  if (N == 0) return n == 0 ? 1.0 : 0.0;
  // C(N + n - 1, n)
  double c = 1.0;
  for (int k = 1; k <= n; ++k) c = c * static_cast<double>(N - 1 + k) / static_cast<double>(k);
  return std::round(c);
}

ConfigurationSpace::ConfigurationSpace(Index N, int n) : N_(N), n_(n) {
  if (N < 1) throw ParameterError("configuration space needs N >= 1");
  if (n < 0) throw ParameterError("configuration space needs n >= 0");
  const double total = count(N, n);
  if (total > static_cast<double>(kMaxStates))
    throw ParameterError("configuration space has " + std::to_string(static_cast<long long>(total)) +
                         " states, above the master-equation limit " + std::to_string(kMaxStates));
  counts_.assign(static_cast<std::size_t>(N + 1), std::vector<double>(static_cast<std::size_t>(n + 1)));
  for (Index m = 0; m <= N; ++m)
    for (int r = 0; r <= n; ++r) counts_[static_cast<std::size_t>(m)][static_cast<std::size_t>(r)] = count(m, r);

  states_.reserve(static_cast<std::size_t>(total));
  std::vector<int> occ(static_cast<std::size_t>(N), 0);
  // Lexicographic ascending: site 0 is the most significant digit.
  std::function<void(Index, int)> fill = [&](Index p, int remaining) {
    if (p == N - 1) {
      occ[static_cast<std::size_t>(p)] = remaining;
      states_.emplace_back(occ);
      return;
    }
    for (int v = 0; v <= remaining; ++v) {
      occ[static_cast<std::size_t>(p)] = v;
      fill(p + 1, remaining - v);
    }
  };
  fill(0, n);
  pi_.resize(static_cast<Index>(states_.size()));
  for (std::size_t k = 0; k < states_.size(); ++k) pi_(static_cast<Index>(k)) = equilibrium_measure(states_[k]);
}

std::size_t ConfigurationSpace::index_of(const ParticleConfiguration& eta) const {
  if (eta.sites() != N_ || eta.particles() != n_) throw ParameterError("configuration does not belong to this space");
  double rank = 0.0;
  int remaining = n_;
  for (Index p = 0; p + 1 < N_; ++p) {
    const int v = eta[p];
    for (int w = 0; w < v; ++w)
      rank += counts_[static_cast<std::size_t>(N_ - p - 1)][static_cast<std::size_t>(remaining - w)];
    remaining -= v;
  }
  return static_cast<std::size_t>(rank);
}

MomentFunction MomentFunction::constant(SpacePtr space, double value) {
  const auto size = static_cast<Index>(space->size());
  return MomentFunction{std::move(space), Vector::Constant(size, value)};
}

MomentFunction MomentFunction::delta(SpacePtr space, std::size_t state) {
  if (state >= space->size()) throw ParameterError("delta state index out of range");
  const auto size = static_cast<Index>(space->size());
  MomentFunction f{std::move(space), Vector::Zero(size)};
  f.values(static_cast<Index>(state)) = 1.0;
  return f;
}

double MomentFunction::pi_mass() const { return space->equilibrium().dot(values); }

namespace {

bool in_range(const GeneratorOptions& o, Index i, Index j) {
  const Index d = i > j ? i - j : j - i;
  switch (o.range) {
    case RangeSelection::All: return true;
    case RangeSelection::Short: return d <= o.ell;
    case RangeSelection::Long: return d > o.ell;
  }
  return true;
}

Matrix rate_constants(const Vector& lambdas) {
  const Index N = lambdas.size();
  Matrix c = Matrix::Zero(N, N);
  for (Index i = 0; i < N; ++i)
    for (Index j = i + 1; j < N; ++j) {
      const double g = lambdas(i) - lambdas(j);
      if (!(std::abs(g) > 1e-12)) throw CollisionError("eigenvalue collision in the moment-flow generator", i, j, std::abs(g));
      c(i, j) = c(j, i) = 1.0 / (static_cast<double>(N) * g * g);
    }
  return c;
}

}  // namespace

GeneratorMatrix::GeneratorMatrix(SpacePtr space, const Vector& lambdas, const GeneratorOptions& options)
    : space_(std::move(space)), options_(options) {
  if (!space_) throw ParameterError("generator needs a configuration space");
  if (lambdas.size() != space_->sites()) throw ParameterError("eigenvalue vector length differs from the site count");
  if (options_.range != RangeSelection::All && options_.ell < 1) throw ParameterError("short-range cutoff needs ell >= 1");
  if (!(options_.prefactor > 0.0)) throw ParameterError("rate prefactor must be positive");
  const Index N = space_->sites();
  for (std::size_t k = 0; k < space_->size(); ++k) {
    const auto& eta = space_->state(k);
    for (Index i = 0; i < N; ++i) {
      if (eta[i] == 0) continue;
      for (Index j = 0; j < N; ++j) {
        if (j == i || !in_range(options_, i, j)) continue;
        const auto to = space_->index_of(config_jump(eta, i, j));
        transitions_.push_back({static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(to),
                                static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                                options_.prefactor * eta[i] * (1.0 + 2.0 * eta[j]), 0.0});
      }
    }
  }
  set_lambdas(lambdas);
}

void GeneratorMatrix::set_lambdas(const Vector& lambdas) {
  if (lambdas.size() != space_->sites()) throw ParameterError("eigenvalue vector length differs from the site count");
  lambdas_ = lambdas;
  c_ = rate_constants(lambdas);
  diagonal_ = Vector::Zero(static_cast<Index>(space_->size()));
  for (auto& tr : transitions_) {
    tr.rate = c_(tr.i, tr.j) * tr.weight;
    diagonal_(tr.from) -= tr.rate;
  }
}

double GeneratorMatrix::max_abs_diagonal() const { return diagonal_.size() ? diagonal_.cwiseAbs().maxCoeff() : 0.0; }

double GeneratorMatrix::c(Index i, Index j) const { return c_(i, j); }

Vector GeneratorMatrix::apply(const Vector& f) const {
  Vector out = Vector::Zero(f.size());
  for (const auto& tr : transitions_) out(tr.from) += tr.rate * (f(tr.to) - f(tr.from));
  return out;
}

double GeneratorMatrix::rate(std::size_t from, std::size_t to) const {
  // Transitions are generated state by state, so those of `from` are contiguous.
  auto lo = std::lower_bound(transitions_.begin(), transitions_.end(), from,
                             [](const Transition& tr, std::size_t k) { return tr.from < k; });
  double total = 0.0;
  for (; lo != transitions_.end() && lo->from == from; ++lo)
    if (lo->to == to) total += lo->rate;
  return total;
}

Matrix GeneratorMatrix::to_dense() const {
  const auto n = static_cast<Index>(space_->size());
  Matrix B = Matrix::Zero(n, n);
  for (const auto& tr : transitions_) B(tr.from, tr.to) += tr.rate;
  B.diagonal() += diagonal_;
  return B;
}

GeneratorMatrix build_generator(SpacePtr space, const Vector& lambdas, const GeneratorOptions& options) {
  return GeneratorMatrix(std::move(space), lambdas, options);
}

double stable_master_step(const GeneratorMatrix& gen) {
  const double d = gen.max_abs_diagonal();
  return d > 0.0 ? 0.09 / d : std::numeric_limits<double>::infinity();
}

MomentFunction evolve_master(const MomentFunction& f0, const EigenvaluePath& path, double t0, double t1, double dt,
                             const MasterOptions& options) {
  if (!f0.space) throw ParameterError("moment function without a space");
  if (!(dt > 0.0)) throw ParameterError("master-equation step must be positive");
  if (t1 < t0) throw ParameterError("master equation needs t1 >= t0");
  if (!path.covers(t0, t1)) throw ParameterError("eigenvalue path does not cover [t0, t1]");
  MomentFunction f = f0;
  if (t1 == t0) return f;
  const long steps = std::max(1L, static_cast<long>(std::ceil((t1 - t0) / dt - 1e-9)));
  const double h = (t1 - t0) / static_cast<double>(steps);
  GeneratorMatrix gen(f0.space, path.at(t0), options.generator);
  auto at = [&](double t) {
    if (!path.is_frozen()) gen.set_lambdas(path.at(t));
    if (h * gen.max_abs_diagonal() > 0.1)
      throw StepSizeError("master-equation step violates dt*max|diag| <= 0.1 (dt=" + std::to_string(h) +
                          ", max|diag|=" + std::to_string(gen.max_abs_diagonal()) + ")");
  };
  Vector& v = f.values;
  for (long s = 0; s < steps; ++s) {
    const double t = t0 + h * static_cast<double>(s);
    at(t);
    const Vector k1 = gen.apply(v);
    at(t + 0.5 * h);
    const Vector k2 = gen.apply(v + 0.5 * h * k1);
    const Vector k3 = gen.apply(v + 0.5 * h * k2);
    at(t + h);
    const Vector k4 = gen.apply(v + h * k3);
    v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (options.observer) options.observer(s + 1 == steps ? t1 : t + h, v);
  }
  return f;
}

double moment_observable_from_z2(const Vector& z2, const ParticleConfiguration& eta) {
  if (z2.size() != eta.sites()) throw ParameterError("projection vector length differs from the site count");
  double value = 1.0;
  for (Index p = 0; p < eta.sites(); ++p) {
    const int k = eta[p];
    if (k > 0) value *= std::pow(z2(p), k) / odd_double_factorial(k);
  }
  return value;
}

double moment_observable(const SpectralDecomposition& s, const Vector& q, const ParticleConfiguration& eta) {
  require_unit(q);
  const Vector overlaps = s.overlaps(q);
  const Vector z2 = static_cast<double>(s.dim()) * overlaps.array().square().matrix();
  return moment_observable_from_z2(z2, eta);
}

DualityReport duality_check(const EigenvaluePath& path, const Vector& q, SpacePtr space, double horizon,
                            long mc_samples, std::uint64_t seed, const DualityOptions& options) {
  if (!space) throw ParameterError("duality check needs a configuration space");
  if (mc_samples < 2) throw ParameterError("duality check needs at least two samples");
  if (!(horizon >= 0.0)) throw ParameterError("duality horizon must be >= 0");
  require_unit(q);
  const Index N = space->sites();
  if (q.size() != N || path.dim() != N) throw ParameterError("dimension mismatch in duality check");
  const double t0 = options.t0;
  const double t1 = t0 + horizon;
  const auto S = static_cast<Index>(space->size());
  const double n = static_cast<double>(N);

  Vector sum0 = Vector::Zero(S), sum1 = Vector::Zero(S), sq1 = Vector::Zero(S);
  for (long m = 0; m < mc_samples; ++m) {
    CounterRng rng(seed, Stream::MonteCarlo, static_cast<std::uint64_t>(m));
    Matrix U = options.initial == InitialFrame::Haar ? haar_orthogonal(N, rng) : Matrix::Identity(N, N);
    const Vector z2_start = n * (U.transpose() * q).array().square().matrix();
    integrate_vector_flow(path, U, t0, t1, options.sde_dt, rng);
    const Vector z2_end = n * (U.transpose() * q).array().square().matrix();
    for (Index k = 0; k < S; ++k) {
      const auto& eta = space->state(static_cast<std::size_t>(k));
      sum0(k) += moment_observable_from_z2(z2_start, eta);
      const double v = moment_observable_from_z2(z2_end, eta);
      sum1(k) += v;
      sq1(k) += v * v;
    }
  }
  const double M = static_cast<double>(mc_samples);
  DualityReport r;
  r.states = space->size();
  r.samples = mc_samples;
  r.horizon = horizon;
  r.initial_moments = sum0 / M;
  r.mc_moments = sum1 / M;
  r.mc_standard_error.resize(S);
  for (Index k = 0; k < S; ++k) {
    const double var = std::max(0.0, (sq1(k) - M * r.mc_moments(k) * r.mc_moments(k)) / (M - 1.0));
    r.mc_standard_error(k) = std::sqrt(var / M);
  }
  MomentFunction f0{space, r.initial_moments};
  if (horizon > 0.0) {
    double dt = options.master_dt;
    if (!(dt > 0.0)) {
      const GeneratorMatrix gen(space, path.at(t0), options.generator);
      dt = std::min(horizon / 100.0, 0.5 * stable_master_step(gen));
    }
    MasterOptions mo;
    mo.generator = options.generator;
    r.master = evolve_master(f0, path, t0, t1, dt, mo).values;
  } else {
    r.master = r.initial_moments;
  }
  r.within_three_se = true;
  for (Index k = 0; k < S; ++k) {
    const double d = std::abs(r.mc_moments(k) - r.master(k));
    r.max_discrepancy = std::max(r.max_discrepancy, d);
    r.max_ratio = std::max(r.max_ratio, d / std::max(r.mc_standard_error(k), 1e-300));
    if (d > 3.0 * r.mc_standard_error(k)) r.within_three_se = false;
  }
  return r;
}

double dirichlet_form(const MomentFunction& f, const GeneratorMatrix& gen) {
  if (f.space.get() != gen.space().get() && (f.space->sites() != gen.space()->sites() ||
                                             f.space->particles() != gen.space()->particles()))
    throw ParameterError("moment function and generator live on different spaces");
  const Vector& pi = gen.space()->equilibrium();
  double total = 0.0;
  for (const auto& tr : gen.transitions()) {
    const double diff = f.values(tr.to) - f.values(tr.from);
    total += pi(tr.from) * tr.rate * diff * diff;
  }
  return 0.5 * total;
}

long config_distance(const ParticleConfiguration& eta, const ParticleConfiguration& xi) {
  if (eta.particles() != xi.particles()) throw ParameterError("distance needs equal particle counts");
  const auto x = eta.positions();
  const auto y = xi.positions();
  long d = 0;
  for (std::size_t a = 0; a < x.size(); ++a) d += std::labs(static_cast<long>(x[a] - y[a]));
  return d;
}

long efficient_distance(const ParticleConfiguration& eta, const ParticleConfiguration& xi,
                        const ClassicalLocations& gamma, const SpectralDomain& window) {
  if (eta.particles() != xi.particles()) throw ParameterError("distance needs equal particle counts");
  if (gamma.gamma.size() < eta.sites()) throw ParameterError("classical locations shorter than the site count");
  const auto x = eta.positions();
  const auto y = xi.positions();
  long best = 0;
  for (std::size_t a = 0; a < x.size(); ++a) {
    const Index lo = std::min(x[a], y[a]);
    const Index hi = std::max(x[a], y[a]);
    long count = 0;
    for (Index i = lo; i <= hi; ++i) count += window.in_window(gamma.gamma(i)) ? 1 : 0;
    best = std::max(best, count);
  }
  return best;
}

double flatten_coefficient(const ParticleConfiguration& eta, Index b1, Index b2, Index d) {
  if (d < 1) throw ParameterError("flattening width must be >= 1");
  Index hits = 0;
  for (Index a = 1; a <= d; ++a) hits += eta.supported_in(b1 - a, b2 + a) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(d);
}

MomentFunction flatten_average(const MomentFunction& f, Index b1, Index b2, Index d) {
  if (d < 1 || b1 > b2) throw ParameterError("flattening needs d >= 1 and b1 <= b2");
  if (b1 - d < 0 || b2 + d > f.space->sites() - 1) throw ParameterError("flattening window leaves the site range");
  MomentFunction out = f;
  for (std::size_t k = 0; k < f.space->size(); ++k) {
    const double a = flatten_coefficient(f.space->state(k), b1, b2, d);
    const auto idx = static_cast<Index>(k);
    out.values(idx) = a * f.values(idx) + (1.0 - a);
  }
  return out;
}

FiniteSpeedReport finite_speed_probe(SpacePtr space, const EigenvaluePath& path, Index ell, double t0, double t1,
                                     const ParticleConfiguration& source, const FiniteSpeedOptions& options) {
  if (options.gamma.has_value() != options.window.has_value())
    throw ParameterError("efficient-distance shells need both classical locations and a window");
  GeneratorOptions go;
  go.range = RangeSelection::Short;
  go.ell = ell;
  const GeneratorMatrix gen(space, path.at(t0), go);
  double max_rate = 0.0;
  for (const auto& tr : gen.transitions()) max_rate = std::max(max_rate, tr.rate);

  const std::size_t S = space->size();
  std::vector<long> shell(S);
  long max_shell = 0;
  for (std::size_t k = 0; k < S; ++k) {
    shell[k] = options.gamma ? efficient_distance(space->state(k), source, *options.gamma, *options.window)
                             : config_distance(space->state(k), source);
    max_shell = std::max(max_shell, shell[k]);
  }
  FiniteSpeedReport r;
  r.max_rate = max_rate;
  for (long d = 0; d <= max_shell; ++d) {
    const auto size = static_cast<std::size_t>(std::count(shell.begin(), shell.end(), d));
    if (size == 0) continue;
    r.shell_distance.push_back(d);
    r.shell_size.push_back(size);
    r.shell_max.push_back(0.0);
  }
  auto slot = [&](long d) {
    return static_cast<std::size_t>(std::lower_bound(r.shell_distance.begin(), r.shell_distance.end(), d) -
                                    r.shell_distance.begin());
  };
  auto observe = [&](double t, const Vector& f) {
    r.times.push_back(t);
    for (std::size_t k = 0; k < S; ++k) {
      auto& m = r.shell_max[slot(shell[k])];
      m = std::max(m, f(static_cast<Index>(k)));
    }
  };
  const MomentFunction f0 = MomentFunction::delta(space, space->index_of(source));
  observe(t0, f0.values);
  if (t1 > t0) {
    double dt = options.dt;
    if (!(dt > 0.0)) dt = std::min((t1 - t0) / 100.0, 0.5 * stable_master_step(gen));
    MasterOptions mo;
    mo.generator = go;
    mo.observer = observe;
    evolve_master(f0, path, t0, t1, dt, mo);
  }
  return r;
}

}  // namespace rmtlab
