#include "rmtlab/linalg.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rmtlab/rng.hpp"

namespace rmtlab {

SymmetricMatrix::SymmetricMatrix(Index dim) {
  if (dim < 1) throw ParameterError("SymmetricMatrix dimension must be >= 1");
  entries_ = Matrix::Zero(dim, dim);
}

SymmetricMatrix SymmetricMatrix::from_dense(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() < 1) throw ParameterError("matrix must be square and non-empty");
  for (Index a = 0; a < m.rows(); ++a)
    for (Index b = 0; b < a; ++b)
      if (m(a, b) != m(b, a))
        throw ParameterError("matrix is not exactly symmetric at (" + std::to_string(a) + "," +
                             std::to_string(b) + ")");
  SymmetricMatrix out;
  out.entries_ = m;
  return out;
}

SymmetricMatrix SymmetricMatrix::from_lower(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() < 1) throw ParameterError("matrix must be square and non-empty");
  SymmetricMatrix out;
  out.entries_ = m.selfadjointView<Eigen::Lower>();
  return out;
}

void SymmetricMatrix::set(Index a, Index b, double value) {
  entries_(a, b) = value;
  entries_(b, a) = value;
}

void SymmetricMatrix::add(Index a, Index b, double value) {
  entries_(a, b) += value;
  if (a != b) entries_(b, a) += value;
}

double SymmetricMatrix::max_abs() const { return entries_.cwiseAbs().maxCoeff(); }

SymmetricMatrix& SymmetricMatrix::operator+=(const SymmetricMatrix& other) {
  if (other.dim() != dim()) throw ParameterError("dimension mismatch in SymmetricMatrix sum");
  entries_ += other.entries_;
  return *this;
}

SymmetricMatrix& SymmetricMatrix::operator*=(double scale) {
  entries_ *= scale;
  return *this;
}

void canonicalize_signs(Matrix& eigenvectors) {
  for (Index j = 0; j < eigenvectors.cols(); ++j) {
    Index best = 0;
    double best_abs = -1.0;
    for (Index i = 0; i < eigenvectors.rows(); ++i) {
      const double v = std::abs(eigenvectors(i, j));
      if (v > best_abs) {
        best_abs = v;
        best = i;
      }
    }
    if (eigenvectors(best, j) < 0) eigenvectors.col(j) *= -1.0;
  }
}

SpectralDecomposition eigendecompose(const SymmetricMatrix& m) {
  return eigendecompose(m, SignConvention::Canonical);
}

SpectralDecomposition eigendecompose(const SymmetricMatrix& m, SignConvention convention,
                                     CounterRng* sign_rng) {
  const Index n = m.dim();
  if (!m.dense().allFinite()) throw ParameterError("eigendecompose: non-finite matrix entries");
  SpectralDecomposition s;
  s.eigenvectors = m.dense();
  s.eigenvalues.resize(n);
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', static_cast<lapack_int>(n),
                                         s.eigenvectors.data(), static_cast<lapack_int>(n),
                                         s.eigenvalues.data());
  if (info != 0)
    throw ConvergenceError("dsyevd failed to converge", info, std::numeric_limits<double>::quiet_NaN());
  canonicalize_signs(s.eigenvectors);
  if (convention == SignConvention::Rademacher) {
    if (sign_rng == nullptr) throw ParameterError("Rademacher sign convention needs an RNG");
    for (Index j = 0; j < n; ++j) s.eigenvectors.col(j) *= sign_rng->rademacher();
  }
  return s;
}

Vector eigenvalues_only(const SymmetricMatrix& m) {
  const Index n = m.dim();
  Matrix work = m.dense();
  Vector w(n);
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'L', static_cast<lapack_int>(n),
                                         work.data(), static_cast<lapack_int>(n), w.data());
  if (info != 0)
    throw ConvergenceError("dsyevd failed to converge", info, std::numeric_limits<double>::quiet_NaN());
  return w;
}

HalfPlanePoint::HalfPlanePoint(double energy, double scale) : E(energy), eta(scale) {
  if (!(scale > 0.0)) throw ParameterError("HalfPlanePoint requires eta > 0");
}

double control_parameter(Index N, double exponent) {
  return std::pow(static_cast<double>(N), exponent);
}

SpectralDomain SpectralDomain::standard(Index N, double E0, double r, double kappa, double psi_exponent) {
  SpectralDomain d;
  d.E0 = E0;
  d.r = r;
  d.kappa = kappa;
  d.psi_exponent = psi_exponent;
  d.eta_min = std::pow(control_parameter(N, psi_exponent), 4) / static_cast<double>(N);
  d.eta_max = 1.0 - kappa * r;
  return d;
}

double SpectralDomain::psi(Index N) const { return control_parameter(N, psi_exponent); }

void SpectralDomain::validate(Index N) const {
  if (!(r > 0.0) || !(kappa > 0.0 && kappa < 1.0)) throw ParameterError("domain needs r > 0 and kappa in (0,1)");
  if (!(eta_min > 0.0) || eta_max < eta_min) throw ParameterError("domain needs 0 < eta_min <= eta_max");
  if (!(psi_exponent > 0.0)) throw ParameterError("domain needs psi exponent > 0");
  const double floor = std::pow(psi(N), 4) / static_cast<double>(N);
  if (eta_min < floor * (1.0 - 1e-12))
    throw ParameterError("domain eta_min=" + std::to_string(eta_min) + " below psi^4/N=" + std::to_string(floor));
}

std::vector<HalfPlanePoint> SpectralDomain::grid(Index nE, Index nEta) const {
  if (nE < 1 || nEta < 1) throw ParameterError("grid sizes must be positive");
  std::vector<HalfPlanePoint> points;
  points.reserve(static_cast<std::size_t>(nE * nEta));
  const double lo = window_low();
  const double hi = window_high();
  for (Index i = 0; i < nE; ++i) {
    const double energy = nE == 1 ? E0 : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(nE - 1);
    for (Index k = 0; k < nEta; ++k) {
      const double frac = nEta == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(nEta - 1);
      points.emplace_back(energy, eta_min * std::pow(eta_max / eta_min, frac));
    }
  }
  return points;
}

Complex stieltjes_transform(std::span<const double> eigenvalues, Complex z) {
  Complex sum = 0.0;
  for (double lambda : eigenvalues) sum += 1.0 / (lambda - z);
  return sum / static_cast<double>(eigenvalues.size());
}

Complex stieltjes_transform(const SpectralDecomposition& s, const HalfPlanePoint& z) {
  return stieltjes_transform(std::span<const double>(s.eigenvalues.data(), static_cast<std::size_t>(s.dim())), z.z());
}

void require_unit(const Vector& q, double tolerance) {
  if (std::abs(q.norm() - 1.0) > tolerance)
    throw ContractViolation("direction vector is not a unit vector (norm=" + std::to_string(q.norm()) + ")");
}

Complex isotropic_form_from_weights(const Vector& eigenvalues, const Vector& squared_overlaps, Complex z) {
  Complex sum = 0.0;
  for (Index i = 0; i < eigenvalues.size(); ++i) sum += squared_overlaps[i] / (eigenvalues[i] - z);
  return sum;
}

Complex isotropic_form(const SpectralDecomposition& s, const Vector& q, const HalfPlanePoint& z) {
  if (q.size() != s.dim()) throw ParameterError("isotropic_form: dimension mismatch");
  require_unit(q);
  const Vector weights = s.overlaps(q).array().square();
  return isotropic_form_from_weights(s.eigenvalues, weights, z.z());
}

Complex green_entry(const SpectralDecomposition& s, Index a, Index b, const HalfPlanePoint& z) {
  if (a < 0 || b < 0 || a >= s.dim() || b >= s.dim()) throw ParameterError("green_entry: index out of range");
  Complex sum = 0.0;
  for (Index i = 0; i < s.dim(); ++i) sum += s.eigenvectors(a, i) * s.eigenvectors(b, i) / (s.eigenvalues[i] - z.z());
  return sum;
}

Complex semicircle_stieltjes(Complex z, double variance) {
  if (!(variance > 0.0)) throw ParameterError("semicircle variance must be positive");
  // Roots of variance*m^2 + z m + 1 = 0 multiply to 1/variance; the
  // physical root is the small one, computed as the reciprocal of the large
  // one to avoid cancellation.
  Complex s = std::sqrt(z * z - 4.0 * variance);
  if (std::real(std::conj(z) * s) < 0.0) s = -s;
  const Complex big = (-z - s) / (2.0 * variance);
  return 1.0 / (variance * big);
}

Complex semicircle_stieltjes(const HalfPlanePoint& z, double variance) {
  return semicircle_stieltjes(z.z(), variance);
}

double semicircle_density(double x, double variance) {
  const double edge2 = 4.0 * variance;
  if (x * x >= edge2) return 0.0;
  return std::sqrt(edge2 - x * x) / (2.0 * std::numbers::pi * variance);
}

}  // namespace rmtlab
