#include "rmtlab/ensembles.hpp"

#include <cmath>
#include <vector>

#include "rmtlab/rng.hpp"

namespace rmtlab {

std::string to_string(GraphModel model) {
  return model == GraphModel::ErdosRenyi ? "er" : "regular";
}

GraphModel parse_graph_model(const std::string& name) {
  if (name == "er" || name == "erdos_renyi") return GraphModel::ErdosRenyi;
  if (name == "regular") return GraphModel::Regular;
  throw ParameterError("unknown graph model '" + name + "'");
}

void EnsembleParams::validate(GraphModel model) const {
  if (N < 2) throw ParameterError("ensemble needs N >= 2");
  const double n = static_cast<double>(N);
  if (model == GraphModel::ErdosRenyi) {
    const double low = std::max(1.0, std::pow(n, delta));
    if (p < low || p > n / 2.0)
      throw ParameterError("ER sparsity p=" + std::to_string(p) + " outside [" + std::to_string(low) + ", N/2]");
    return;
  }
  if (p != std::floor(p)) throw ParameterError("regular degree must be an integer");
  const auto degree = static_cast<long>(p);
  if (degree < 3 || degree > N - 1) throw ParameterError("regular degree must satisfy 3 <= p <= N-1");
  if ((N * degree) % 2 != 0) throw ParameterError("regular graph needs N*p even");
}

long AdjacencySample::edge_count() const {
  long total = 0;
  for (Index a = 0; a < dim; ++a)
    for (Index b = a + 1; b < dim; ++b) total += edges(a, b);
  return total;
}

Index AdjacencySample::degree(Index vertex) const {
  Index d = 0;
  for (Index b = 0; b < dim; ++b) d += edges(vertex, b);
  return d;
}

AdjacencySample sample_er(const EnsembleParams& params, std::uint64_t seed) {
  const Index N = params.N;
  if (N < 1) throw ParameterError("sample_er needs N >= 1");
  if (params.p < 0.0 || params.p > static_cast<double>(N))
    throw ParameterError("sample_er needs 0 <= p <= N (got p=" + std::to_string(params.p) + ")");
  AdjacencySample a;
  a.dim = N;
  a.edges = AdjacencyMatrix::Zero(N, N);
  a.model = GraphModel::ErdosRenyi;
  a.p = params.p;
  a.seed = seed;
  const double prob = params.p / static_cast<double>(N);
  for (Index row = 0; row < N; ++row) {
    CounterRng rng(seed, Stream::Graph, static_cast<std::uint64_t>(row));
    for (Index col = row + 1; col < N; ++col)
      if (rng.bernoulli(prob)) a.edges(row, col) = a.edges(col, row) = 1;
  }
  return a;
}

SymmetricMatrix normalize_er(const AdjacencySample& a) {
  if (a.model != GraphModel::ErdosRenyi) throw ParameterError("normalize_er needs an Erdos-Renyi sample");
  const double n = static_cast<double>(a.dim);
  if (!(a.p > 0.0) || !(a.p < n)) throw ParameterError("normalize_er needs 0 < p < N (p(1-p/N) vanishes)");
  const double scale = 1.0 / std::sqrt(a.p * (1.0 - a.p / n));
  return SymmetricMatrix::from_dense(a.as_real() * scale);
}

double pairing_acceptance_probability(int p) {
  const double d = static_cast<double>(p - 1);
  return std::exp(-d / 2.0 - d * d / 4.0);
}

namespace {

void check_regular_params(const EnsembleParams& params) {
  if (params.p != std::floor(params.p) || params.p < 1) throw ParameterError("regular degree must be a positive integer");
  if (params.p > static_cast<double>(params.N - 1)) throw ParameterError("regular degree must be <= N-1");
  if ((params.N * static_cast<Index>(params.p)) % 2 != 0) throw ParameterError("regular graph needs N*p even");
}

// One uniform perfect matching of the N*p half-edges, abandoned as soon as a
// loop or a repeated edge appears.
bool try_pairing(Index N, int p, CounterRng& rng, AdjacencyMatrix& adj) {
  const Index points = N * p;
  std::vector<Index> pts(static_cast<std::size_t>(points));
  for (Index k = 0; k < points; ++k) pts[static_cast<std::size_t>(k)] = k;
  adj.setZero(N, N);
  for (Index k = 0; k < points; k += 2) {
    const auto r = k + 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(points - k - 1)));
    std::swap(pts[static_cast<std::size_t>(k + 1)], pts[static_cast<std::size_t>(r)]);
    const Index u = pts[static_cast<std::size_t>(k)] / p;
    const Index v = pts[static_cast<std::size_t>(k + 1)] / p;
    if (u == v || adj(u, v)) return false;
    adj(u, v) = adj(v, u) = 1;
  }
  return true;
}

bool any_suitable_pair(const std::vector<Index>& stubs, const AdjacencyMatrix& adj) {
  for (std::size_t i = 0; i < stubs.size(); ++i)
    for (std::size_t j = i + 1; j < stubs.size(); ++j)
      if (stubs[i] != stubs[j] && !adj(stubs[i], stubs[j])) return true;
  return false;
}

bool try_steger_wormald(Index N, int p, CounterRng& rng, AdjacencyMatrix& adj, std::vector<std::pair<Index, Index>>& edge_list) {
  std::vector<Index> stubs;
  stubs.reserve(static_cast<std::size_t>(N * p));
  for (Index v = 0; v < N; ++v)
    for (int k = 0; k < p; ++k) stubs.push_back(v);
  adj.setZero(N, N);
  edge_list.clear();
  long misses = 0;
  while (!stubs.empty()) {
    const auto i = static_cast<std::size_t>(rng.below(stubs.size()));
    auto j = static_cast<std::size_t>(rng.below(stubs.size() - 1));
    if (j >= i) ++j;
    const Index u = stubs[i];
    const Index v = stubs[j];
    if (u == v || adj(u, v)) {
      if (++misses > 64) {
        if (!any_suitable_pair(stubs, adj)) return false;
        misses = 0;
      }
      continue;
    }
    misses = 0;
    adj(u, v) = adj(v, u) = 1;
    edge_list.emplace_back(u, v);
    // Remove the larger position first so the smaller stays valid.
    for (auto pos : {std::max(i, j), std::min(i, j)}) {
      stubs[pos] = stubs.back();
      stubs.pop_back();
    }
  }
  return true;
}

long mix_by_switches(CounterRng& rng, AdjacencyMatrix& adj, std::vector<std::pair<Index, Index>>& edge_list, long proposals) {
  long accepted = 0;
  const auto m = static_cast<std::uint64_t>(edge_list.size());
  if (m < 2) return 0;
  for (long s = 0; s < proposals; ++s) {
    const auto e1 = static_cast<std::size_t>(rng.below(m));
    auto e2 = static_cast<std::size_t>(rng.below(m - 1));
    if (e2 >= e1) ++e2;
    auto [a, b] = edge_list[e1];
    auto [c, d] = edge_list[e2];
    if (rng() >> 63) std::swap(c, d);
    if (a == c || b == d || adj(a, c) || adj(b, d)) continue;
    adj(a, b) = adj(b, a) = 0;
    adj(c, d) = adj(d, c) = 0;
    adj(a, c) = adj(c, a) = 1;
    adj(b, d) = adj(d, b) = 1;
    edge_list[e1] = {a, c};
    edge_list[e2] = {b, d};
    ++accepted;
  }
  return accepted;
}

}  // namespace

AdjacencySample sample_regular(const EnsembleParams& params, std::uint64_t seed,
                               const RegularSamplerOptions& options, RegularSamplerStats* stats) {
  check_regular_params(params);
  const Index N = params.N;
  const int p = static_cast<int>(params.p);
  AdjacencySample a;
  a.dim = N;
  a.model = GraphModel::Regular;
  a.p = params.p;
  a.seed = seed;
  a.edges = AdjacencyMatrix::Zero(N, N);

  RegularMethod method = options.method;
  if (method == RegularMethod::Auto)
    method = p <= 5 ? RegularMethod::PairingRejection : RegularMethod::SwitchChain;

  RegularSamplerStats local;
  local.method_used = method;
  CounterRng rng(seed, Stream::Graph);
  if (method == RegularMethod::PairingRejection) {
    bool ok = false;
    while (local.attempts < options.max_attempts) {
      ++local.attempts;
      if (try_pairing(N, p, rng, a.edges)) {
        ok = true;
        break;
      }
    }
    if (stats) *stats = local;
    if (!ok) throw SamplingError("pairing-model rejection sampler exhausted its retry budget", local.attempts);
    return a;
  }

  std::vector<std::pair<Index, Index>> edge_list;
  bool ok = false;
  while (local.attempts < options.max_attempts) {
    ++local.attempts;
    if (try_steger_wormald(N, p, rng, a.edges, edge_list)) {
      ok = true;
      break;
    }
  }
  if (!ok) {
    if (stats) *stats = local;
    throw SamplingError("Steger-Wormald construction exhausted its retry budget", local.attempts);
  }
  local.accepted_switches =
      mix_by_switches(rng, a.edges, edge_list, options.switches_per_edge * static_cast<long>(edge_list.size()));
  if (stats) *stats = local;
  return a;
}

SymmetricMatrix normalize_regular(const AdjacencySample& a) {
  if (a.model != GraphModel::Regular) throw ParameterError("normalize_regular needs a regular-graph sample");
  if (a.p < 2) throw ParameterError("normalize_regular needs p >= 2");
  return SymmetricMatrix::from_dense(a.as_real() / std::sqrt(a.p - 1.0));
}

SymmetricMatrix sample_goe(Index N, std::uint64_t seed, Stream stream) {
  SymmetricMatrix w(N);
  const double sd_off = 1.0 / std::sqrt(static_cast<double>(N));
  const double sd_diag = std::sqrt(2.0) * sd_off;
  for (Index a = 0; a < N; ++a) {
    CounterRng rng(seed, stream, static_cast<std::uint64_t>(a));
    for (Index b = 0; b < a; ++b) w.set(a, b, sd_off * rng.normal());
    w.set(a, a, sd_diag * rng.normal());
  }
  return w;
}

SymmetricMatrix sample_normalized(GraphModel model, const EnsembleParams& params, std::uint64_t seed) {
  return model == GraphModel::ErdosRenyi ? normalize_er(sample_er(params, seed))
                                         : normalize_regular(sample_regular(params, seed));
}

Vector flat_unit_vector(Index N) {
  return Vector::Constant(N, 1.0 / std::sqrt(static_cast<double>(N)));
}

}  // namespace rmtlab
