#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "rmtlab/dyson_flow.hpp"
#include "rmtlab/free_convolution.hpp"
#include "rmtlab/linalg.hpp"

namespace rmtlab {

/// Occupation vector eta over N sites (0-based site indices).
class ParticleConfiguration {
 public:
  ParticleConfiguration() = default;
  explicit ParticleConfiguration(std::vector<int> occupations);
  /// All n particles on one site.
  static ParticleConfiguration single_site(Index N, Index site, int n = 1);

  Index sites() const noexcept { return static_cast<Index>(occ_.size()); }
  int particles() const noexcept { return n_; }
  int operator[](Index p) const { return occ_[static_cast<std::size_t>(p)]; }
  const std::vector<int>& occupations() const noexcept { return occ_; }
  /// Particle positions x_1 <= ... <= x_n.
  std::vector<Index> positions() const;
  /// Every occupied site lies in [a, b].
  bool supported_in(Index a, Index b) const;

  friend bool operator==(const ParticleConfiguration&, const ParticleConfiguration&) = default;

 private:
  std::vector<int> occ_;
  int n_ = 0;
};

/// eta^{ij}: one particle moved from i to j. Throws ParameterError if
/// eta_i = 0 or i == j.
ParticleConfiguration config_jump(const ParticleConfiguration& eta, Index i, Index j);

/// phi(k) = prod_{i<=k} (1 - 1/(2i)) = (2k-1)!!/(2k)!!.
double phi(int k);
/// (2k-1)!!, with (-1)!! = 1.
double odd_double_factorial(int k);
double equilibrium_measure(const ParticleConfiguration& eta);

class ConfigurationSpace {
 public:
  static constexpr std::size_t kMaxStates = 100000;

  /// Throws ParameterError when C(N+n-1, n) exceeds kMaxStates.
  ConfigurationSpace(Index N, int n);

  static double count(Index N, int n);

  Index sites() const noexcept { return N_; }
  int particles() const noexcept { return n_; }
  std::size_t size() const noexcept { return states_.size(); }
  const ParticleConfiguration& state(std::size_t k) const { return states_[k]; }
  /// Lexicographic rank of eta among all occupation vectors of this space.
  std::size_t index_of(const ParticleConfiguration& eta) const;
  const Vector& equilibrium() const noexcept { return pi_; }

 private:
  Index N_;
  int n_;
  std::vector<ParticleConfiguration> states_;
  std::vector<std::vector<double>> counts_;
  Vector pi_;
};

using SpacePtr = std::shared_ptr<const ConfigurationSpace>;

struct MomentFunction {
  SpacePtr space;
  Vector values;

  static MomentFunction constant(SpacePtr space, double value = 1.0);
  static MomentFunction delta(SpacePtr space, std::size_t state);
  double operator()(const ParticleConfiguration& eta) const { return values(static_cast<Index>(space->index_of(eta))); }
  /// sum_eta pi(eta) f(eta).
  double pi_mass() const;
};

enum class RangeSelection {
  All,
  /// 0 < |i - j| <= ell.
  Short,
  /// |i - j| > ell.
  Long,
};

struct GeneratorOptions {
  RangeSelection range = RangeSelection::All;
  Index ell = 1;
  /// Jump rate is c_ij * prefactor * eta_i (1 + 2 eta_j).
  double prefactor = 2.0;
};

/// B f(eta) = sum_{i != j} c_ij * prefactor * eta_i (1 + 2 eta_j) (f(eta^{ij}) - f(eta)),
/// c_ij = 1/(N (lambda_i - lambda_j)^2), stored as a list of transitions.
class GeneratorMatrix {
 public:
  struct Transition {
    std::uint32_t from;
    std::uint32_t to;
    std::uint32_t i;
    std::uint32_t j;
    double weight;  // prefactor * eta_i (1 + 2 eta_j)
    double rate;
  };

  GeneratorMatrix(SpacePtr space, const Vector& lambdas, const GeneratorOptions& options = {});

  /// Recompute rates for new eigenvalues; the transition structure is unchanged.
  void set_lambdas(const Vector& lambdas);

  const SpacePtr& space() const noexcept { return space_; }
  const Vector& lambda_snapshot() const noexcept { return lambdas_; }
  const GeneratorOptions& options() const noexcept { return options_; }
  const std::vector<Transition>& transitions() const noexcept { return transitions_; }
  const Vector& diagonal() const noexcept { return diagonal_; }
  double max_abs_diagonal() const;

  Vector apply(const Vector& f) const;
  /// Rate of the jump between two state indices (0 if absent).
  double rate(std::size_t from, std::size_t to) const;
  Matrix to_dense() const;
  double c(Index i, Index j) const;

 private:
  SpacePtr space_;
  GeneratorOptions options_;
  Vector lambdas_;
  Matrix c_;
  std::vector<Transition> transitions_;
  Vector diagonal_;
};

GeneratorMatrix build_generator(SpacePtr space, const Vector& lambdas, const GeneratorOptions& options = {});

struct MasterOptions {
  GeneratorOptions generator;
  /// Called after every RK4 step with (time, f_t).
  std::function<void(double, const Vector&)> observer;
};

/// RK4 for d/dt f = B(t) f on [t0, t1], rebuilding the rates at every
/// substep from the piecewise-linear eigenvalue path. Throws StepSizeError
/// when dt * max|diagonal| > 0.1.
MomentFunction evolve_master(const MomentFunction& f0, const EigenvaluePath& path, double t0, double t1, double dt,
                             const MasterOptions& options = {});

/// prod_{eta_p > 0} (N <q,u_p>^2)^{eta_p} / (2 eta_p - 1)!!.
double moment_observable(const SpectralDecomposition& s, const Vector& q, const ParticleConfiguration& eta);
/// Same observable from squared rescaled projections z_p^2 = N <q,u_p>^2.
double moment_observable_from_z2(const Vector& z2, const ParticleConfiguration& eta);

enum class InitialFrame {
  /// U_0 = I.
  Identity,
  /// Independent Haar-distributed frame per sample.
  Haar,
};

struct DualityOptions {
  double t0 = 0.0;
  double sde_dt = 2e-5;
  double master_dt = 0.0;  // 0 picks a stable step automatically
  InitialFrame initial = InitialFrame::Identity;
  /// Prefactor 1 matches the Ito generator of the vector flow.
  GeneratorOptions generator{RangeSelection::All, 1, 1.0};
};

struct DualityReport {
  std::size_t states = 0;
  long samples = 0;
  double horizon = 0.0;
  Vector initial_moments;
  Vector mc_moments;
  Vector mc_standard_error;
  Vector master;
  double max_discrepancy = 0.0;
  /// max over states of |MC - master| / SE (SE floored at 1e-300).
  double max_ratio = 0.0;
  bool within_three_se = false;
};

/// Monte Carlo of the vector flow against the fixed eigenvalue path versus the
/// master equation started from the t0 empirical moments.
DualityReport duality_check(const EigenvaluePath& path, const Vector& q, SpacePtr space, double horizon,
                            long mc_samples, std::uint64_t seed, const DualityOptions& options = {});

/// (1/2) sum_eta pi(eta) sum_jumps rate (f(eta^{ij}) - f(eta))^2, which for
/// prefactor 2 is sum pi sum c_ij eta_i (1 + 2 eta_j) (f(eta^{ij}) - f(eta))^2.
double dirichlet_form(const MomentFunction& f, const GeneratorMatrix& gen);

/// sum_alpha |x_alpha - y_alpha| over sorted particle positions.
long config_distance(const ParticleConfiguration& eta, const ParticleConfiguration& xi);

/// max_alpha #{i in [min(x_a,y_a), max(x_a,y_a)] : gamma_i in the window}.
long efficient_distance(const ParticleConfiguration& eta, const ParticleConfiguration& xi,
                        const ClassicalLocations& gamma, const SpectralDomain& window);

/// a_eta = (1/d) #{a in 1..d : eta supported in [b1 - a, b2 + a]}.
double flatten_coefficient(const ParticleConfiguration& eta, Index b1, Index b2, Index d);
/// (1/d) sum_{a=1}^d Flat_a f = a_eta f + (1 - a_eta). Throws ParameterError
/// unless [b1 - d, b2 + d] lies inside the sites.
MomentFunction flatten_average(const MomentFunction& f, Index b1, Index b2, Index d);

struct FiniteSpeedReport {
  std::vector<long> shell_distance;
  std::vector<std::size_t> shell_size;
  /// max over [t0, t1] and over the shell of U(t0, s) delta_source.
  std::vector<double> shell_max;
  double max_rate = 0.0;
  std::vector<double> times;
};

struct FiniteSpeedOptions {
  double dt = 0.0;  // 0 picks a stable step
  /// When set, shells are measured with the efficient distance.
  std::optional<ClassicalLocations> gamma;
  std::optional<SpectralDomain> window;
};

FiniteSpeedReport finite_speed_probe(SpacePtr space, const EigenvaluePath& path, Index ell, double t0, double t1,
                                     const ParticleConfiguration& source, const FiniteSpeedOptions& options = {});

/// Largest step satisfying the RK4 stability bound for the generator, with margin.
double stable_master_step(const GeneratorMatrix& gen);

}  // namespace rmtlab
