#include "rmtlab/dyson_flow.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rmtlab/ensembles.hpp"

namespace rmtlab {

std::string to_string(FlowVariant v) {
  switch (v) {
    case FlowVariant::Additive: return "additive";
    case FlowVariant::OrnsteinUhlenbeck: return "ou";
    case FlowVariant::Constrained: return "constrained";
  }
  return "additive";
}

FlowVariant parse_flow_variant(const std::string& name) {
  if (name == "additive") return FlowVariant::Additive;
  if (name == "ou") return FlowVariant::OrnsteinUhlenbeck;
  if (name == "constrained") return FlowVariant::Constrained;
  throw ParameterError("unknown flow variant '" + name + "'");
}

void FlowParams::validate() const {
  if (!(t >= 0.0)) throw ParameterError("flow time must be >= 0");
  if (!(dt > 0.0)) throw ParameterError("flow step must be positive");
  if (t > 0.0 && dt > t) throw ParameterError("flow step exceeds the horizon");
  if (!std::isfinite(f)) throw ParameterError("OU mean level must be finite");
}

SymmetricMatrix dbm_exact_sample(const SymmetricMatrix& h0, double t, std::uint64_t seed) {
  if (!(t >= 0.0)) throw ParameterError("DBM time must be >= 0");
  if (t == 0.0) return h0;
  return h0 + std::sqrt(t) * sample_goe(h0.dim(), seed, Stream::Flow);
}

double ou_mean_level(double p, Index N) {
  const double n = static_cast<double>(N);
  if (!(p > 0.0) || !(p < n)) throw ParameterError("OU mean level needs 0 < p < N");
  return (p / n) / std::sqrt(p * (1.0 - p / n));
}

GaussianDivisibleParts gaussian_divisible_decompose(const SymmetricMatrix& h0, double t, double f,
                                                    std::uint64_t seed) {
  if (!(t >= 0.0)) throw ParameterError("OU time must be >= 0");
  const double decay = std::exp(-0.5 * t);
  const Matrix shifted = (h0.dense().array() - f) * decay + f;
  GaussianDivisibleParts parts{SymmetricMatrix::from_lower(shifted), SymmetricMatrix(h0.dim())};
  if (t > 0.0) parts.gaussian = std::sqrt(-std::expm1(-t)) * sample_goe(h0.dim(), seed, Stream::Flow);
  return parts;
}

SymmetricMatrix ou_flow_sample(const SymmetricMatrix& h0, double t, double f, std::uint64_t seed) {
  if (t == 0.0) return h0;
  return gaussian_divisible_decompose(h0, t, f, seed).sum();
}

Matrix regular_projector(Index N) {
  if (N < 2) throw ParameterError("projector needs N >= 2");
  const double rn = std::sqrt(static_cast<double>(N));
  const double c = 1.0 / (rn - 1.0);
  Matrix P(N - 1, N);
  for (Index i = 0; i < N - 1; ++i)
    for (Index j = 0; j < N; ++j)
      P(i, j) = (i == j ? 1.0 : 0.0) - c * (1.0 / rn - (j == N - 1 ? 1.0 : 0.0));
  return P;
}

double constant_row_sum(const SymmetricMatrix& h0, double tolerance) {
  const Vector sums = h0.dense().rowwise().sum();
  const double c = sums.mean();
  const double scale = std::max(1.0, h0.max_abs());
  if ((sums.array() - c).abs().maxCoeff() > tolerance * scale * static_cast<double>(h0.dim()))
    throw ParameterError("constrained flow needs constant row sums (h0 e = c e)");
  return c;
}

SymmetricMatrix constrained_flow_regular(const SymmetricMatrix& h0, double t, std::uint64_t seed) {
  if (!(t >= 0.0)) throw ParameterError("constrained flow time must be >= 0");
  const Index N = h0.dim();
  const double c = constant_row_sum(h0);
  const Matrix P = regular_projector(N);
  Matrix M = std::exp(-0.5 * t) * (P * h0.dense() * P.transpose());
  if (t > 0.0) {
    const double scale = std::sqrt(-std::expm1(-t)) *
                         std::sqrt(static_cast<double>(N - 1) / static_cast<double>(N));
    M += scale * sample_goe(N - 1, seed, Stream::Flow).dense();
  }
  Matrix H = P.transpose() * M * P;
  H.array() += c / static_cast<double>(N);
  return SymmetricMatrix::from_lower(H);
}

EigenvaluePath::EigenvaluePath(std::vector<double> times, std::vector<Vector> values)
    : times_(std::move(times)), values_(std::move(values)) {
  if (times_.empty() || times_.size() != values_.size())
    throw ParameterError("eigenvalue path needs matching, nonempty time and value lists");
  for (std::size_t k = 1; k < times_.size(); ++k) {
    if (!(times_[k] > times_[k - 1])) throw ParameterError("eigenvalue path times must increase");
    if (values_[k].size() != values_[0].size()) throw ParameterError("eigenvalue path has ragged rows");
  }
}

EigenvaluePath EigenvaluePath::frozen(Vector lambdas) {
  EigenvaluePath path({0.0}, {std::move(lambdas)});
  path.frozen_ = true;
  return path;
}

EigenvaluePath EigenvaluePath::read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open eigenvalue path file '" + path + "'");
  std::vector<double> times;
  std::vector<Vector> values;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::vector<double> row;
    double x;
    while (ls >> x) row.push_back(x);
    if (row.empty()) continue;
    if (row.size() < 2) throw ParameterError("eigenvalue path line needs a time and at least one eigenvalue");
    times.push_back(row[0]);
    values.push_back(Eigen::Map<Vector>(row.data() + 1, static_cast<Index>(row.size() - 1)));
  }
  if (times.size() == 1) return frozen(values[0]);
  return EigenvaluePath(std::move(times), std::move(values));
}

bool EigenvaluePath::covers(double t0, double t1) const {
  if (values_.empty()) return false;
  if (frozen_) return true;
  const double slack = 1e-12 * std::max(1.0, std::abs(times_.back()));
  return t0 >= times_.front() - slack && t1 <= times_.back() + slack;
}

double EigenvaluePath::start() const { return frozen_ ? -std::numeric_limits<double>::infinity() : times_.front(); }
double EigenvaluePath::end() const { return frozen_ ? std::numeric_limits<double>::infinity() : times_.back(); }

Vector EigenvaluePath::at(double t) const {
  if (values_.empty()) throw ParameterError("empty eigenvalue path");
  if (frozen_ || times_.size() == 1) return values_.front();
  if (!covers(t, t)) throw ParameterError("time " + std::to_string(t) + " outside the eigenvalue path");
  if (t <= times_.front()) return values_.front();
  if (t >= times_.back()) return values_.back();
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const auto k = static_cast<std::size_t>(it - times_.begin());
  const double w = (t - times_[k - 1]) / (times_[k] - times_[k - 1]);
  return (1.0 - w) * values_[k - 1] + w * values_[k];
}

double min_gap(const Vector& lambdas, Index* lower) {
  double best = std::numeric_limits<double>::infinity();
  for (Index i = 0; i + 1 < lambdas.size(); ++i) {
    const double g = lambdas(i + 1) - lambdas(i);
    if (g < best) {
      best = g;
      if (lower) *lower = i;
    }
  }
  return best;
}

void reorthonormalize(Matrix& frame) {
  const Index n = frame.cols();
  for (int pass = 0; pass < 2; ++pass) {
    for (Index k = 0; k < n; ++k) {
      for (Index j = 0; j < k; ++j) frame.col(k) -= frame.col(j).dot(frame.col(k)) * frame.col(j);
      const double norm = frame.col(k).norm();
      if (!(norm > 0.0)) throw ConvergenceError("eigenvector frame became degenerate", pass, norm);
      frame.col(k) /= norm;
    }
  }
}

namespace {

// 1/(lambda_k - lambda_l) off the diagonal, 0 on it.
Matrix inverse_gaps(const Vector& lambdas) {
  const Index N = lambdas.size();
  Matrix D = Matrix::Zero(N, N);
  for (Index k = 0; k < N; ++k)
    for (Index l = 0; l < N; ++l)
      if (k != l) {
        const double g = lambdas(k) - lambdas(l);
        if (g == 0.0) throw CollisionError("coincident eigenvalues in the vector flow", k, l, 0.0);
        D(k, l) = 1.0 / g;
      }
  return D;
}

// Frame increment U <- U (I + A) for symmetric noise dB (only off-diagonal used).
void apply_vector_step(Matrix& frame, const Matrix& D, const Matrix& dB, double h, double n) {
  const Index N = frame.cols();
  const double inv_sqrt_n = 1.0 / std::sqrt(n);
  Matrix A(N, N);
  for (Index k = 0; k < N; ++k) {
    double repulsion = 0.0;
    for (Index l = 0; l < N; ++l) {
      if (l == k) continue;
      A(l, k) = dB(k, l) * D(k, l) * inv_sqrt_n;
      repulsion += D(k, l) * D(k, l);
    }
    A(k, k) = 1.0 - 0.5 * h * repulsion / n;
  }
  frame = frame * A;
}

}  // namespace

void integrate_vector_flow(const EigenvaluePath& path, Matrix& frame, double t0, double t1, double dt,
                           CounterRng& rng, const VectorFlowOptions& options) {
  if (!(dt > 0.0)) throw ParameterError("vector flow step must be positive");
  if (t1 < t0) throw ParameterError("vector flow needs t1 >= t0");
  if (!path.covers(t0, t1)) throw ParameterError("eigenvalue path does not cover the integration window");
  const Index N = frame.cols();
  if (path.dim() != N || frame.rows() != N) throw ParameterError("frame and eigenvalue path dimensions differ");
  if (t1 == t0) return;
  const long steps = std::max(1L, static_cast<long>(std::ceil((t1 - t0) / dt - 1e-9)));
  const double h = (t1 - t0) / static_cast<double>(steps);
  const double sd = std::sqrt(h);
  const double n = static_cast<double>(N);
  Matrix D = inverse_gaps(path.at(t0));
  Matrix dB = Matrix::Zero(N, N);
  for (long s = 0; s < steps; ++s) {
    if (!path.is_frozen() && s > 0) D = inverse_gaps(path.at(t0 + h * static_cast<double>(s)));
    if (!options.zero_noise)
      for (Index k = 0; k < N; ++k)
        for (Index l = k + 1; l < N; ++l) dB(k, l) = dB(l, k) = sd * rng.normal();
    apply_vector_step(frame, D, dB, h, n);
    reorthonormalize(frame);
  }
}

EigenFlowTrajectory integrate_eigen_sde(const SpectralDecomposition& s0, double horizon, double dt,
                                        std::uint64_t seed, const EigenSdeOptions& options,
                                        CoupledMatrixPath* matrix_path) {
  if (!(horizon >= 0.0)) throw ParameterError("SDE horizon must be >= 0");
  if (!(dt > 0.0)) throw ParameterError("SDE step must be positive");
  if (options.store_every < 1) throw ParameterError("store_every must be >= 1");
  const Index N = s0.dim();
  const double n = static_cast<double>(N);
  Index lower = 0;
  const double gap0 = min_gap(s0.eigenvalues, &lower);
  if (N > 1 && !(gap0 > 10.0 * std::sqrt(dt / n)))
    throw CollisionError("initial eigenvalues closer than 10 sqrt(dt/N)", lower, lower + 1, gap0, 0);

  EigenFlowTrajectory traj;
  Vector lambda = s0.eigenvalues;
  Matrix U = s0.eigenvectors;
  SymmetricMatrix H;
  if (options.pathwise_coupling) {
    H = SymmetricMatrix::from_lower(U * lambda.asDiagonal() * U.transpose());
  }
  auto record = [&](double time) {
    traj.times.push_back(time);
    traj.lambdas.push_back(lambda);
    if (options.store_vectors) traj.vectors.push_back(U);
    if (matrix_path) {
      matrix_path->times.push_back(time);
      matrix_path->matrices.push_back(H);
    }
  };
  record(0.0);
  if (options.observer) options.observer(0.0, lambda, U);

  CounterRng rng(seed, Stream::Flow, 1);
  const double inv_sqrt_n = 1.0 / std::sqrt(n);
  double t = 0.0;
  Matrix dB(N, N);
  Matrix dW(N, N);
  while (t < horizon) {
    double h = std::min(dt, horizon - t);
    int halvings = 0;
    Vector next;
    for (;;) {
      const double sd = std::sqrt(h);
      if (options.zero_noise) {
        dB.setZero();
        dW.setZero();
      } else if (options.pathwise_coupling) {
        for (Index a = 0; a < N; ++a) {
          for (Index b = 0; b < a; ++b) dW(a, b) = dW(b, a) = sd * rng.normal();
          dW(a, a) = std::sqrt(2.0) * sd * rng.normal();
        }
        dB = U.transpose() * dW * U;
      } else {
        for (Index k = 0; k < N; ++k) {
          for (Index l = 0; l < k; ++l) dB(k, l) = dB(l, k) = sd * rng.normal();
          dB(k, k) = std::sqrt(2.0) * sd * rng.normal();
        }
      }
      next.resize(N);
      for (Index k = 0; k < N; ++k) {
        double drift = 0.0;
        for (Index l = 0; l < N; ++l)
          if (l != k) drift += 1.0 / (lambda(k) - lambda(l));
        next(k) = lambda(k) + dB(k, k) * inv_sqrt_n + drift * h / n;
      }
      bool ordered = true;
      for (Index k = 0; k + 1 < N; ++k) ordered = ordered && next(k + 1) > next(k);
      const double gap = N > 1 ? min_gap(next, &lower) : std::numeric_limits<double>::infinity();
      if (ordered && gap >= 5.0 * std::sqrt(h / n)) break;
      if (++halvings > options.max_halvings)
        throw CollisionError("eigenvalue collision: step halving exhausted", lower, lower + 1,
                             ordered ? gap : 0.0, traj.steps);
      ++traj.halvings;
      h *= 0.5;
    }
    const Matrix D = inverse_gaps(lambda);
    apply_vector_step(U, D, dB, h, n);
    traj.max_orthonormality_drift = std::max(
        traj.max_orthonormality_drift, (U.transpose() * U - Matrix::Identity(N, N)).cwiseAbs().maxCoeff());
    reorthonormalize(U);
    lambda = next;
    if (options.pathwise_coupling && !options.zero_noise) H += SymmetricMatrix::from_lower(dW * inv_sqrt_n);
    t += h;
    if (horizon - t < 1e-14 * std::max(1.0, horizon)) t = horizon;
    ++traj.steps;
    if (options.observer) options.observer(t, lambda, U);
    if (traj.steps % options.store_every == 0 || t >= horizon) record(t);
  }
  return traj;
}

Matrix haar_orthogonal(Index N, CounterRng& rng) {
  Matrix G(N, N);
  for (Index j = 0; j < N; ++j)
    for (Index i = 0; i < N; ++i) G(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(G);
  Matrix Q = qr.householderQ() * Matrix::Identity(N, N);
  const Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < N; ++j)
    if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
  return Q;
}

}  // namespace rmtlab
