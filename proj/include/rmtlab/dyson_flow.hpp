#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rmtlab/linalg.hpp"
#include "rmtlab/rng.hpp"

namespace rmtlab {

enum class FlowVariant { Additive, OrnsteinUhlenbeck, Constrained };

std::string to_string(FlowVariant v);
FlowVariant parse_flow_variant(const std::string& name);

struct FlowParams {
  double t = 0.0;
  double dt = 1e-4;
  double f = 0.0;
  FlowVariant variant = FlowVariant::Additive;

  void validate() const;
};

/// H_0 + sqrt(t) W with W a fresh GOE draw (stream Flow of `seed`).
SymmetricMatrix dbm_exact_sample(const SymmetricMatrix& h0, double t, std::uint64_t seed);

/// f = (p/N)/sqrt(p(1-p/N)), the mean of an off-diagonal normalized ER entry.
double ou_mean_level(double p, Index N);

struct GaussianDivisibleParts {
  /// f + e^{-t/2}(H_0 - f), entrywise.
  SymmetricMatrix deterministic;
  /// sqrt(1 - e^{-t}) G.
  SymmetricMatrix gaussian;

  SymmetricMatrix sum() const { return deterministic + gaussian; }
};

/// Both draw G from stream Flow of `seed`, so for equal seeds
/// ou_flow_sample(h0, t, f, s) == gaussian_divisible_decompose(h0, t, f, s).sum().
SymmetricMatrix ou_flow_sample(const SymmetricMatrix& h0, double t, double f, std::uint64_t seed);
GaussianDivisibleParts gaussian_divisible_decompose(const SymmetricMatrix& h0, double t, double f,
                                                    std::uint64_t seed);

/// (N-1) x N matrix P_ij = delta_ij - (1/(sqrt N - 1))(1/sqrt N - delta_jN),
/// an isometry from e-perp onto R^{N-1} with P e = 0.
Matrix regular_projector(Index N);

/// Constant row sum c of h0 (h0 e = c e); throws ParameterError otherwise.
double constant_row_sum(const SymmetricMatrix& h0, double tolerance = 1e-10);

/// P H_t P^T = e^{-t/2} P H_0 P^T + sqrt(1 - e^{-t}) G with G an (N-1)-dim GOE
/// of entry variance (1 + delta)/N, and H_t = P^T (P H_t P^T) P + c e e^T.
SymmetricMatrix constrained_flow_regular(const SymmetricMatrix& h0, double t, std::uint64_t seed);

/// Piecewise-linear eigenvalue trajectory t -> lambda(t).
class EigenvaluePath {
 public:
  EigenvaluePath() = default;
  EigenvaluePath(std::vector<double> times, std::vector<Vector> values);
  /// Time-independent path valid for every t.
  static EigenvaluePath frozen(Vector lambdas);
  /// Lines "t lambda_1 ... lambda_N"; '#' starts a comment.
  static EigenvaluePath read(const std::string& path);

  Index dim() const { return values_.empty() ? 0 : values_.front().size(); }
  bool is_frozen() const noexcept { return frozen_; }
  bool covers(double t0, double t1) const;
  double start() const;
  double end() const;
  Vector at(double t) const;
  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<Vector>& values() const noexcept { return values_; }

 private:
  std::vector<double> times_;
  std::vector<Vector> values_;
  bool frozen_ = false;
};

/// Smallest gap and the pair realising it; lambdas must be sorted.
double min_gap(const Vector& lambdas, Index* lower = nullptr);

/// Gram-Schmidt on the columns (modified variant, two passes).
void reorthonormalize(Matrix& frame);

struct VectorFlowOptions {
  /// Brownian increments forced to zero.
  bool zero_noise = false;
};

/// Euler-Maruyama for the Dyson vector flow driven by the eigenvalues of
/// `path` (evaluated at the left end of each step), re-orthonormalizing the
/// frame after every step. Columns of `frame` are the u_k.
void integrate_vector_flow(const EigenvaluePath& path, Matrix& frame, double t0, double t1, double dt,
                           CounterRng& rng, const VectorFlowOptions& options = {});

struct EigenFlowTrajectory {
  std::vector<double> times;
  std::vector<Vector> lambdas;
  std::vector<Matrix> vectors;
  /// Largest ||U^T U - I||_max before re-orthonormalization, over all steps.
  double max_orthonormality_drift = 0.0;
  long steps = 0;
  long halvings = 0;
};

struct EigenSdeOptions {
  bool zero_noise = false;
  /// Drive the step with a sampled matrix increment dW and set dB = U^T dW U;
  /// the matching matrix path H_0 + W_t is recorded in `matrix_path`.
  bool pathwise_coupling = false;
  bool store_vectors = true;
  /// Store every k-th accepted step (the final state is always stored).
  long store_every = 1;
  int max_halvings = 20;
  std::function<void(double, const Vector&, const Matrix&)> observer;
};

struct CoupledMatrixPath {
  std::vector<double> times;
  std::vector<SymmetricMatrix> matrices;
};

/// Coupled eigenvalue/eigenvector SDEs on [0, horizon]. Requires min gap
/// > 10 sqrt(dt/N) at the start; dt is halved (at most max_halvings times)
/// while a step would bring a gap below 5 sqrt(dt/N) or break the ordering.
/// Throws CollisionError with the step index and gap when halving runs out.
EigenFlowTrajectory integrate_eigen_sde(const SpectralDecomposition& s0, double horizon, double dt,
                                        std::uint64_t seed, const EigenSdeOptions& options = {},
                                        CoupledMatrixPath* matrix_path = nullptr);

/// Uniform random orthogonal matrix (QR of a Gaussian matrix with sign fix).
Matrix haar_orthogonal(Index N, CounterRng& rng);

}  // namespace rmtlab
