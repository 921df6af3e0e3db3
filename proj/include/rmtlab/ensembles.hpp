#pragma once

#include <cstdint>
#include <string>

#include "rmtlab/linalg.hpp"
#include "rmtlab/rng.hpp"

namespace rmtlab {

enum class GraphModel { ErdosRenyi, Regular };

std::string to_string(GraphModel model);
GraphModel parse_graph_model(const std::string& name);

struct EnsembleParams {
  Index N = 0;
  /// Expected degree for Erdos-Renyi, exact degree for regular graphs.
  double p = 0.0;
  /// Lower sparsity exponent: the supported range starts at N^delta.
  double delta = 0.0;

  /// Supported ranges: ER max(1, N^delta) <= p <= N/2; regular integer p with
  /// 3 <= p <= N-1, N*p even. Throws ParameterError otherwise.
  void validate(GraphModel model) const;
};

using AdjacencyMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

struct AdjacencySample {
  Index dim = 0;
  AdjacencyMatrix edges;
  GraphModel model = GraphModel::ErdosRenyi;
  double p = 0.0;
  std::uint64_t seed = 0;

  long edge_count() const;
  Index degree(Index vertex) const;
  Matrix as_real() const { return edges.cast<double>(); }
};

/// Each pair {a,b}, a != b, joined independently with probability p/N; no
/// self-loops. Accepts the degenerate range 0 <= p <= N.
AdjacencySample sample_er(const EnsembleParams& params, std::uint64_t seed);

/// H = A / sqrt(p (1 - p/N)). Rejects p = 0 and p = N.
SymmetricMatrix normalize_er(const AdjacencySample& a);

enum class RegularMethod {
  /// Pairing model when the simple-graph acceptance probability is workable
  /// (p <= 5), switch chain otherwise.
  Auto,
  /// Configuration model with full rejection: exactly uniform.
  PairingRejection,
  /// Steger-Wormald construction mixed by the degree-preserving switch chain.
  SwitchChain,
};

struct RegularSamplerOptions {
  RegularMethod method = RegularMethod::Auto;
  long max_attempts = 10000;
  /// Switch-chain proposals per edge after the initial construction.
  long switches_per_edge = 20;
};

struct RegularSamplerStats {
  RegularMethod method_used = RegularMethod::PairingRejection;
  long attempts = 0;
  long accepted_switches = 0;
};

/// Asymptotic probability that a uniform pairing is simple,
/// exp(-(p-1)/2 - (p-1)^2/4).
double pairing_acceptance_probability(int p);

AdjacencySample sample_regular(const EnsembleParams& params, std::uint64_t seed,
                               const RegularSamplerOptions& options = {},
                               RegularSamplerStats* stats = nullptr);

/// H = A / sqrt(p - 1); H e = p / sqrt(p - 1) e for e = (1,...,1)/sqrt(N).
SymmetricMatrix normalize_regular(const AdjacencySample& a);

/// Centered Gaussian entries with Var = (1 + delta_ab) / N.
SymmetricMatrix sample_goe(Index N, std::uint64_t seed, Stream stream = Stream::Goe);

/// Sample + normalize in one step.
SymmetricMatrix sample_normalized(GraphModel model, const EnsembleParams& params, std::uint64_t seed);

/// e = (1, ..., 1) / sqrt(N).
Vector flat_unit_vector(Index N);

}  // namespace rmtlab
