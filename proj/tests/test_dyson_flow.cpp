#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "rmtlab/dyson_flow.hpp"
#include "rmtlab/ensembles.hpp"
#include "rmtlab/statistics.hpp"

using namespace rmtlab;

namespace {

double semicircle_cdf(double x) {
  x = std::clamp(x, -2.0, 2.0);
  return 0.5 + (x * std::sqrt(4.0 - x * x) / 4.0 + std::asin(x / 2.0)) / M_PI;
}

SymmetricMatrix diagonal(const std::vector<double>& d) {
  SymmetricMatrix m(static_cast<Index>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i) m.set(static_cast<Index>(i), static_cast<Index>(i), d[i]);
  return m;
}

}  // namespace

TEST_CASE("DBM: t = 0 is the identity and increments have variance (1+delta) t / N") {
  const SymmetricMatrix h0 = sample_goe(6, 1);
  CHECK((dbm_exact_sample(h0, 0.0, 3).dense() - h0.dense()).cwiseAbs().maxCoeff() == 0.0);
  const Index N = 10;
  const double t = 0.7;
  const SymmetricMatrix zero(N);
  std::vector<double> off, diag;
  for (std::uint64_t s = 0; off.size() < 100000; ++s) {
    const auto h = dbm_exact_sample(zero, t, s);
    for (Index a = 0; a < N; ++a) {
      diag.push_back(h(a, a) * h(a, a));
      for (Index b = a + 1; b < N; ++b) off.push_back(h(a, b) * h(a, b));
    }
  }
  const auto mo = mean_estimate(off), md = mean_estimate(diag);
  CHECK(std::abs(mo.mean - t / N) <= 3.0 * mo.standard_error);
  CHECK(std::abs(md.mean - 2.0 * t / N) <= 3.0 * md.standard_error);
}

TEST_CASE("DBM from zero gives a sqrt(t)-scaled semicircle") {
  const double t = 2.0;
  const Vector lam = eigenvalues_only(dbm_exact_sample(SymmetricMatrix(2000), t, 4));
  const std::vector<double> v(lam.data(), lam.data() + lam.size());
  CHECK(ks_one_sample(v, [&](double x) { return semicircle_cdf(x / std::sqrt(t)); }).statistic <= 0.02);
}

TEST_CASE("OU flow moments") {
  SymmetricMatrix h0 = sample_goe(8, 2);
  CHECK((ou_flow_sample(h0, 0.0, 0.3, 1).dense() - h0.dense()).cwiseAbs().maxCoeff() == 0.0);

  const Index N = 20;
  const double f = 0.25;
  std::vector<double> mean_samples, var_samples;
  for (std::uint64_t s = 0; mean_samples.size() < 100000; ++s) {
    const auto h = ou_flow_sample(SymmetricMatrix(N), 30.0, f, s);
    for (Index a = 0; a < N; ++a)
      for (Index b = a + 1; b < N; ++b) mean_samples.push_back(h(a, b));
  }
  const auto m = mean_estimate(mean_samples);
  CHECK(std::abs(m.mean - f) <= 3.0 * m.standard_error);

  for (double t : {0.5, 2.0}) {
    var_samples.clear();
    for (std::uint64_t s = 0; var_samples.size() < 100000; ++s) {
      const auto h = ou_flow_sample(sample_goe(N, 50000 + s), t, 0.0, s);
      for (Index a = 0; a < N; ++a)
        for (Index b = a + 1; b < N; ++b) var_samples.push_back(h(a, b) * h(a, b));
    }
    const auto v = mean_estimate(var_samples);
    CHECK(std::abs(v.mean - 1.0 / N) <= 3.0 * v.standard_error);
  }
}

TEST_CASE("Gaussian-divisible decomposition") {
  const SymmetricMatrix h0 = normalize_er(sample_er({30, 6.0, 0.0}, 7));
  const double f = ou_mean_level(6.0, 30);
  const auto parts = gaussian_divisible_decompose(h0, 0.8, f, 11);
  CHECK((parts.sum().dense() - ou_flow_sample(h0, 0.8, f, 11).dense()).cwiseAbs().maxCoeff() == 0.0);
  const auto other = gaussian_divisible_decompose(h0, 0.8, f, 12);
  CHECK((parts.deterministic.dense() - other.deterministic.dense()).cwiseAbs().maxCoeff() == 0.0);
  const double decay = std::exp(-0.4);
  CHECK(parts.deterministic(0, 1) == doctest::Approx(f + decay * (h0(0, 1) - f)));

  std::vector<double> a, b;
  const SymmetricMatrix base = sample_goe(5, 3);
  for (std::uint64_t s = 0; s < 10000; ++s) {
    a.push_back(gaussian_divisible_decompose(base, 0.5, 0.1, s).sum()(0, 1));
    b.push_back(ou_flow_sample(base, 0.5, 0.1, 1000000 + s)(0, 1));
  }
  CHECK(ks_two_sample(a, b).p_value > 0.01);
}

TEST_CASE("eigenvalue SDE: drift and zero-noise repulsion ODE") {
  const SymmetricMatrix h = diagonal({-1.0, 1.0});
  const auto s0 = eigendecompose(h);
  EigenSdeOptions opts;
  opts.zero_noise = true;
  const double dt = 1e-6;
  const auto one = integrate_eigen_sde(s0, dt, dt, 1, opts);
  CHECK((one.lambdas.back()(0) - (-1.0)) / dt == doctest::Approx(-0.25).epsilon(1e-4));

  const auto traj = integrate_eigen_sde(s0, 0.5, 1e-5, 1, opts);
  const double gap = traj.lambdas.back()(1) - traj.lambdas.back()(0);
  CHECK(gap == doctest::Approx(std::sqrt(4.0 + 4.0 * 0.5 / 2.0)).epsilon(1e-5));
  const Matrix& U = traj.vectors.back();
  CHECK((U.transpose() * U - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(traj.max_orthonormality_drift <= 1e-4);
}

TEST_CASE("eigenvalue SDE marginals agree with the matrix flow") {
  const SymmetricMatrix h0 = diagonal({-1.5, -0.5, 0.5, 1.5});
  const auto s0 = eigendecompose(h0);
  EigenSdeOptions opts;
  opts.store_vectors = false;
  opts.store_every = 1000000;
  const int seeds = 2000;
  std::vector<std::vector<double>> sde(4), exact(4);
  for (int s = 0; s < seeds; ++s) {
    const auto traj = integrate_eigen_sde(s0, 0.05, 1e-5, static_cast<std::uint64_t>(s), opts);
    const Vector ex = eigenvalues_only(dbm_exact_sample(h0, 0.05, 900000 + static_cast<std::uint64_t>(s)));
    for (int k = 0; k < 4; ++k) {
      sde[k].push_back(traj.lambdas.back()(k));
      exact[k].push_back(ex(k));
    }
  }
  for (int k = 0; k < 4; ++k) CHECK(ks_two_sample(sde[k], exact[k]).p_value > 0.01);
}

TEST_CASE("eigenvalue SDE rejects colliding starts") {
  const auto s0 = eigendecompose(diagonal({0.0, 1e-6, 1.0}));
  CHECK_THROWS(integrate_eigen_sde(s0, 0.01, 1e-4, 1));
}

TEST_CASE("vector flow keeps an orthonormal frame") {
  const auto path = EigenvaluePath::frozen((Vector(4) << -1.2, -0.3, 0.4, 1.3).finished());
  Matrix frame = Matrix::Identity(4, 4);
  CounterRng rng(3, Stream::MonteCarlo);
  integrate_vector_flow(path, frame, 0.0, 0.05, 1e-4, rng);
  CHECK((frame.transpose() * frame - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-12);

  Matrix still = Matrix::Identity(4, 4);
  VectorFlowOptions quiet;
  quiet.zero_noise = true;
  integrate_vector_flow(path, still, 0.0, 0.05, 1e-4, rng, quiet);
  CHECK((still - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("eigenvalue path interpolation") {
  std::vector<double> times{0.0, 1.0};
  std::vector<Vector> values{(Vector(2) << 0.0, 1.0).finished(), (Vector(2) << 1.0, 3.0).finished()};
  const EigenvaluePath path(times, values);
  CHECK(path.at(0.25)(1) == doctest::Approx(1.5));
  CHECK(path.covers(0.0, 1.0));
  CHECK_FALSE(path.covers(0.0, 1.5));
  CHECK(EigenvaluePath::frozen(values[0]).covers(-5.0, 5.0));
}

TEST_CASE("constrained flow for regular graphs") {
  const Index N = 50;
  const Matrix P = regular_projector(N);
  CHECK((P * P.transpose() - Matrix::Identity(N - 1, N - 1)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((P * Vector::Ones(N)).cwiseAbs().maxCoeff() <= 1e-12);

  const double p = 6.0;
  const auto h0 = normalize_regular(sample_regular({N, p, 0.0}, 5));
  const auto ht = constrained_flow_regular(h0, 0.7, 9);
  const Vector e = flat_unit_vector(N);
  const double top = p / std::sqrt(p - 1.0);
  CHECK((ht.dense() * e - top * e).cwiseAbs().maxCoeff() <= 1e-12);

  const Matrix inner = P * ht.dense() * P.transpose();
  const Vector projected = eigenvalues_only(SymmetricMatrix::from_lower(inner));
  Vector full = eigenvalues_only(ht);
  std::vector<double> rest(full.data(), full.data() + N);
  const auto it = std::min_element(rest.begin(), rest.end(), [&](double a, double b) {
    return std::abs(a - top) < std::abs(b - top);
  });
  rest.erase(it);
  for (Index i = 0; i < N - 1; ++i) CHECK(std::abs(projected(i) - rest[static_cast<std::size_t>(i)]) <= 1e-10);

  CHECK_THROWS_AS(constrained_flow_regular(sample_goe(10, 1), 0.5, 1), ParameterError);
}
