#pragma once

#include <vector>

#include "rmtlab/linalg.hpp"

namespace rmtlab {

/// Empirical spectral measure (1/N) sum_i delta_{lambda_i}.
class EmpiricalMeasure {
 public:
  EmpiricalMeasure() = default;
  /// Atoms are sorted on construction; non-finite atoms are rejected.
  explicit EmpiricalMeasure(Vector atoms);
  static EmpiricalMeasure single_atom(double location = 0.0) { return EmpiricalMeasure(Vector::Constant(1, location)); }

  const Vector& atoms() const noexcept { return atoms_; }
  Index size() const noexcept { return atoms_.size(); }
  double min() const { return atoms_(0); }
  double max() const { return atoms_(atoms_.size() - 1); }

  /// m_0(w) = (1/N) sum 1/(lambda_i - w).
  Complex stieltjes(Complex w) const;
  /// m_0(w) together with m_0'(w) = (1/N) sum 1/(lambda_i - w)^2.
  void stieltjes_with_derivative(Complex w, Complex& value, Complex& derivative) const;

 private:
  Vector atoms_;
};

struct MfcOptions {
  double damping = 0.5;
  long max_iterations = 10000;
  double tolerance = 1e-12;
  double eta_floor = 1e-14;
};

struct MfcSolution {
  Complex m;
  double residual = 0.0;
  long iterations = 0;
  /// An iterate left the upper half plane and was projected back.
  bool projected = false;
};

/// |m - m_0(z + t m)|.
double mfc_residual(const EmpiricalMeasure& mu, double t, Complex z, Complex m);

/// Solves m = m_0(z + t m) on the Im m > 0 branch. Without a warm start the
/// solve runs a continuation in eta from a scale where the damped Picard map
/// contracts down to Im z; each level is finished by Newton steps. Throws
/// ConvergenceError if the residual target is not met.
MfcSolution solve_mfc_detailed(const EmpiricalMeasure& mu, double t, const HalfPlanePoint& z,
                               const MfcOptions& options = {}, const Complex* warm_start = nullptr);
Complex solve_mfc(const EmpiricalMeasure& mu, double t, const HalfPlanePoint& z);

/// m_fc,t on a grid; points are stored in SpectralDomain::grid order.
struct FreeConvolutionState {
  double t = 0.0;
  Index nE = 0;
  Index nEta = 0;
  std::vector<HalfPlanePoint> points;
  std::vector<Complex> solutions;
  std::vector<double> residuals;
  std::vector<bool> projected;

  std::size_t size() const noexcept { return points.size(); }
  double residual_max() const;
  /// Throws ContractViolation if any stored residual exceeds `tolerance`.
  void assert_residuals(double tolerance = 1e-12) const;
};

/// Each vertical line of the grid is solved from its largest eta downward,
/// warm-starting every point from its neighbour.
FreeConvolutionState solve_grid(const EmpiricalMeasure& mu, double t, const SpectralDomain& domain, Index nE,
                                Index nEta, const MfcOptions& options = {});
FreeConvolutionState solve_points(const EmpiricalMeasure& mu, double t, const std::vector<HalfPlanePoint>& points,
                                  const MfcOptions& options = {});

/// g_i = 1/(lambda_i - z - t m_fc). Throws ContractViolation if m_fc is not a
/// fixed point within `stale_tolerance`.
std::vector<Complex> g_weights(const EmpiricalMeasure& mu, double t, const HalfPlanePoint& z, Complex m_fc,
                               double stale_tolerance = 1e-10);

struct DensityOptions {
  double relative_change = 1e-4;
  double start_eta = 1e-2;
  double shrink = 0.5;
};

/// Im m_fc,t(E + i eta)/pi, eta shrunk until the value settles or reaches the
/// floor 1e-7 max(1, sqrt t).
double fc_density(const EmpiricalMeasure& mu, double t, double E, const DensityOptions& options = {});

struct ClassicalLocations {
  double t = 0.0;
  Vector gamma;
};

/// Boundary values of the subordination function w = z + t m_fc at real u:
/// w = u + i v(u), with E(u) = u - t Re m_0(w) increasing in u.
struct BoundaryPoint {
  double u = 0.0;
  double v = 0.0;
  double energy = 0.0;
  double cdf = 0.0;
  double density = 0.0;
};
BoundaryPoint fc_boundary(const EmpiricalMeasure& mu, double t, double u);

/// Quantiles gamma_i = inf{x : F(x) >= i/N}, i = 1..N, of rho_fc,t.
ClassicalLocations classical_locations(const EmpiricalMeasure& mu, double t, Index N);

/// Distribution function of rho_fc,t at energy E.
double fc_cdf(const EmpiricalMeasure& mu, double t, double E);

struct FcDiagnostics {
  double t = 0.0;
  double constant = 0.0;
  double min_im_m = 0.0;
  double max_im_m = 0.0;
  double max_mean_abs_g = 0.0;
  double log_n = 0.0;
  double residual_max = 0.0;
  bool im_bound_violated = false;
  bool g_sum_bound_violated = false;
  Index points = 0;
};

/// Checks C^-1 <= Im m_fc,t <= C and (1/N) sum |g_i| <= C log N over the grid.
FcDiagnostics fc_diagnostics(const EmpiricalMeasure& mu, double t, const SpectralDomain& domain, double constant,
                             Index nE = 10, Index nEta = 10);

}  // namespace rmtlab
