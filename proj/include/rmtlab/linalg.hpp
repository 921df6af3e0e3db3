#pragma once

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <vector>

#include "rmtlab/errors.hpp"

namespace rmtlab {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Complex = std::complex<double>;

/// Dense real symmetric matrix. Every write goes to both (a,b) and (b,a), so
/// the stored array is exactly symmetric at all times.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(Index dim);

  /// Throws ParameterError unless `m` is square and exactly symmetric.
  static SymmetricMatrix from_dense(const Matrix& m);
  /// Copies the lower triangle of `m` into both halves.
  static SymmetricMatrix from_lower(const Matrix& m);

  Index dim() const noexcept { return entries_.rows(); }
  double operator()(Index a, Index b) const { return entries_(a, b); }
  void set(Index a, Index b, double value);
  void add(Index a, Index b, double value);
  const Matrix& dense() const noexcept { return entries_; }
  double max_abs() const;

  SymmetricMatrix& operator+=(const SymmetricMatrix& other);
  SymmetricMatrix& operator*=(double scale);
  friend SymmetricMatrix operator+(SymmetricMatrix lhs, const SymmetricMatrix& rhs) {
    lhs += rhs;
    return lhs;
  }
  friend SymmetricMatrix operator*(double scale, SymmetricMatrix m) {
    m *= scale;
    return m;
  }

 private:
  Matrix entries_;
};

/// Eigenvalues in ascending order and the orthogonal matrix whose column i
/// is the unit eigenvector u_i.
struct SpectralDecomposition {
  Vector eigenvalues;
  Matrix eigenvectors;

  Index dim() const noexcept { return eigenvalues.size(); }
  auto vector(Index i) const { return eigenvectors.col(i); }
  /// <q, u_i> for every i.
  Vector overlaps(const Vector& q) const { return eigenvectors.transpose() * q; }
};

enum class SignConvention {
  /// Largest-magnitude entry of each column made positive, ties to the lowest index.
  Canonical,
  /// Canonical, then every column multiplied by an independent random sign.
  Rademacher,
};

class CounterRng;

/// Dense symmetric eigensolver. Throws ConvergenceError if the underlying
/// LAPACK routine fails to converge.
SpectralDecomposition eigendecompose(const SymmetricMatrix& m);
SpectralDecomposition eigendecompose(const SymmetricMatrix& m, SignConvention convention,
                                     CounterRng* sign_rng = nullptr);
Vector eigenvalues_only(const SymmetricMatrix& m);
void canonicalize_signs(Matrix& eigenvectors);

struct HalfPlanePoint {
  double E;
  double eta;

  HalfPlanePoint(double energy, double scale);
  Complex z() const noexcept { return {E, eta}; }
};

/// Spectral window around E0 plus a range of scales, used both for the
/// local-law grid and for the "bulk" window I_kappa^r(E0).
struct SpectralDomain {
  double E0 = 0.0;
  double r = 1.0;
  double kappa = 0.1;
  double eta_min = 1e-2;
  double eta_max = 1.0;
  double psi_exponent = 0.1;

  /// eta range [psi^4 / N, 1 - kappa r] for dimension N.
  static SpectralDomain standard(Index N, double E0, double r, double kappa, double psi_exponent = 0.1);

  double psi(Index N) const;
  /// Throws ParameterError if the domain is malformed or eta_min < psi^4/N.
  void validate(Index N) const;
  double window_low() const noexcept { return E0 - (1.0 - kappa) * r; }
  double window_high() const noexcept { return E0 + (1.0 - kappa) * r; }
  bool in_window(double energy) const noexcept {
    return energy >= window_low() && energy <= window_high();
  }
  /// nE evenly spaced energies across the window times nEta geometrically
  /// spaced scales in [eta_min, eta_max]; energy-major ordering.
  std::vector<HalfPlanePoint> grid(Index nE, Index nEta) const;
};

double control_parameter(Index N, double exponent);

Complex stieltjes_transform(std::span<const double> eigenvalues, Complex z);
Complex stieltjes_transform(const SpectralDecomposition& s, const HalfPlanePoint& z);

/// sum_i <q,u_i>^2 / (lambda_i - z). q must be a unit vector (within 1e-12).
Complex isotropic_form(const SpectralDecomposition& s, const Vector& q, const HalfPlanePoint& z);
Complex isotropic_form_from_weights(const Vector& eigenvalues, const Vector& squared_overlaps, Complex z);

Complex green_entry(const SpectralDecomposition& s, Index a, Index b, const HalfPlanePoint& z);

/// Stieltjes transform of the semicircle law of the given variance: the root
/// of variance*m^2 + z m + 1 = 0 with Im m > 0 (for Im z > 0).
Complex semicircle_stieltjes(Complex z, double variance = 1.0);
Complex semicircle_stieltjes(const HalfPlanePoint& z, double variance = 1.0);
double semicircle_density(double x, double variance = 1.0);

void require_unit(const Vector& q, double tolerance = 1e-12);

}  // namespace rmtlab
