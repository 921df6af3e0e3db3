#include <doctest.h>

#include <cmath>

#include "rmtlab/dyson_flow.hpp"
#include "rmtlab/ensembles.hpp"
#include "rmtlab/free_convolution.hpp"
#include "rmtlab/spectral_stats.hpp"
#include "rmtlab/statistics.hpp"

using namespace rmtlab;

namespace {

std::vector<double> chisq_draws(std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed, Stream::Synthetic);
  std::vector<double> out(n);
  for (auto& x : out) {
    const double g = rng.normal();
    x = g * g;
  }
  return out;
}

SpectralDecomposition perturbed(const SymmetricMatrix& h, Index a, Index b, double eps) {
  SymmetricMatrix m = h;
  m.add(a, b, eps);
  return eigendecompose(m);
}

}  // namespace

TEST_CASE("bulk window and indices") {
  const auto w = bulk_window(100, 0.1);
  CHECK(w.lo == 9);
  CHECK(w.hi == 89);
  for (Index i : bulk_indices(100, 0.1, 30)) CHECK(w.contains(i));
  const auto idx = bulk_indices(100, 0.1, 30);
  for (std::size_t k = 1; k < idx.size(); ++k) CHECK(idx[k] > idx[k - 1]);
}

TEST_CASE("default direction is a unit vector orthogonal to e") {
  const Vector q = default_direction(50, 3);
  CHECK(q.norm() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(q.sum()) <= 1e-12);
}

TEST_CASE("GOE projections are sphere marginals") {
  ProjectionRequest req;
  req.model = SampleModel::Goe;
  req.params.N = 200;
  req.indices = bulk_indices(200, 0.1, 20);
  for (std::uint64_t s = 0; s < 60; ++s) req.seeds.push_back(s);
  const auto set = projection_samples(req);
  const auto pooled = set.pooled();
  REQUIRE(pooled.size() == 1200);
  CHECK(set.parseval_max_error <= 1e-8);
  const auto m = mean_estimate(pooled);
  CHECK(std::abs(m.mean - 1.0) <= 3.0 * m.standard_error);

  // Direct sphere sampling: N <q, v>^2 for v uniform on S^{N-1}.
  CounterRng rng(77, Stream::Synthetic);
  std::vector<double> direct;
  for (int k = 0; k < 4000; ++k) {
    Vector g(200);
    for (Index i = 0; i < 200; ++i) g(i) = rng.normal();
    direct.push_back(200.0 * g(0) * g(0) / g.squaredNorm());
  }
  CHECK(ks_two_sample(pooled, direct).p_value > 0.01);
}

TEST_CASE("q = e on a regular graph is rejected unless overridden") {
  ProjectionRequest req;
  req.model = SampleModel::Regular;
  req.params = {40, 3.0, 0.0};
  req.indices = bulk_indices(40, 0.1, 5);
  req.seeds = {1};
  req.q = flat_unit_vector(40);
  CHECK_THROWS_AS(projection_samples(req), ParameterError);
  req.allow_q_along_e = true;
  CHECK_NOTHROW(projection_samples(req));
}

TEST_CASE("moment test") {
  const auto lines = moment_test(chisq_draws(20000, 1));
  REQUIRE(lines.size() == 3);
  CHECK(lines[0].target == 1.0);
  CHECK(lines[1].target == 3.0);
  CHECK(lines[2].target == 15.0);
  for (const auto& l : lines) CHECK(l.pass);

  CounterRng rng(2, Stream::Synthetic);
  std::vector<double> uni(20000);
  for (auto& x : uni) x = 2.0 * rng.uniform();
  const auto bad = moment_test(uni);
  CHECK(bad[1].empirical == doctest::Approx(4.0 / 3.0).epsilon(0.02));
  CHECK_FALSE(bad[1].pass);
  CHECK_THROWS_AS(moment_test(chisq_draws(100, 3)), ParameterError);
}

TEST_CASE("joint moment test") {
  const auto x = chisq_draws(5000, 4), y = chisq_draws(5000, 5);
  const auto l11 = joint_moment_test(x, y, 1, 1);
  CHECK(l11.target == 1.0);
  CHECK(l11.pass);
  const auto l21 = joint_moment_test(x, y, 2, 1, 0.3);
  CHECK(l21.target == 3.0);
  CHECK(l21.pass);
  const auto same = joint_moment_test(x, x, 1, 1);
  CHECK(same.empirical == doctest::Approx(3.0).epsilon(0.1));
  CHECK_FALSE(same.pass);
}

TEST_CASE("KS against chi-square(1)") {
  int passing = 0;
  for (std::uint64_t r = 0; r < 100; ++r)
    if (ks_test_chisq(chisq_draws(1000, 100 + r)).p_value > 0.01) ++passing;
  CHECK(passing >= 98);

  CHECK(ks_test_chisq(std::vector<double>(1000, 1.0)).p_value < 1e-6);

  CounterRng rng(9, Stream::Synthetic);
  std::vector<double> expo(10000);
  for (auto& x : expo) x = -std::log(rng.uniform_open());
  CHECK(ks_test_chisq(expo).p_value <= 0.01);
}

TEST_CASE("normality report on synthetic data") {
  const auto r = normality_report(chisq_draws(20000, 6));
  CHECK(r.pass());
  CHECK(r.ks_pass);
}

TEST_CASE("QUE statistic") {
  const Index N = 10;
  Vector a = Vector::Zero(N);
  a(0) = 1.0;
  a(1) = -1.0;
  Vector u = Vector::Zero(N);
  u(0) = 1.0;
  CHECK(que_statistic(u, a) == doctest::Approx(N / 2.0));
  const Vector flat = Vector::Constant(N, 1.0 / std::sqrt(static_cast<double>(N)));
  CHECK(std::abs(que_statistic(flat, alternating_weights(N))) <= 1e-14);
  Vector bad = a;
  bad(2) = 0.5;
  CHECK_THROWS_AS(que_statistic(u, bad), ParameterError);
  CHECK_THROWS_AS(que_statistic(u, 2.0 * a), ParameterError);
  CHECK_THROWS_AS(que_statistic(u, Vector::Zero(N)), ParameterError);
  CHECK(alternating_weights(7)(6) == 0.0);
  CHECK(alternating_weights(7).sum() == 0.0);
}

TEST_CASE("rigidity error") {
  ClassicalLocations g;
  g.gamma = (Vector(10) << -1.8, -1.4, -1.0, -0.6, -0.2, 0.2, 0.6, 1.0, 1.4, 1.8).finished();
  const auto w = bulk_window(10, 0.1);
  CHECK(rigidity_error(g.gamma, g, w).max_scaled_error == 0.0);
  Vector lam = g.gamma;
  lam(4) += 5.0 / 10.0;
  const auto r = rigidity_error(lam, g, w);
  CHECK(r.max_scaled_error == doctest::Approx(5.0));
  CHECK(r.argmax == 4);
}

TEST_CASE("isotropic law error") {
  const Index N = 300;
  const double t = 0.3;
  const SymmetricMatrix h0 = sample_goe(N, 8);
  const auto s0 = eigendecompose(h0);
  const EmpiricalMeasure mu(s0.eigenvalues);
  const auto s = eigendecompose(dbm_exact_sample(h0, t, 8));
  const double psi = std::pow(static_cast<double>(N), 0.1);

  SpectralDomain top;
  top.E0 = 0.0;
  top.r = 1.0;
  top.kappa = 0.1;
  top.eta_min = 1.0;
  top.eta_max = 1.0;
  const auto fc1 = solve_grid(mu, t, top, 7, 1);
  const Vector q = default_direction(N, 4, false);
  const auto at_one = isotropic_law_error(s, q, s0, mu, fc1, psi);
  for (const auto& p : at_one.points) CHECK(p.error <= p.envelope);

  const auto d = SpectralDomain::standard(N, 0.0, 1.0, 0.1);
  const auto fc = solve_grid(mu, t, d, 5, 5);
  const Vector ui = s0.vector(150);
  const auto aligned = isotropic_law_error(s, ui, s0, mu, fc, psi);
  for (std::size_t k = 0; k < fc.size(); ++k) {
    const auto g = g_weights(mu, t, fc.points[k], fc.solutions[k]);
    const double direct = std::abs(isotropic_form(s, ui, fc.points[k]) - g[150]);
    CHECK(aligned.points[k].error == doctest::Approx(direct).epsilon(1e-8));
  }

  SpectralDomain low = d;
  low.eta_min = 1e-5;
  const auto fc_low = solve_grid(mu, t, low, 3, 3);
  CHECK_THROWS_AS(isotropic_law_error(s, q, s0, mu, fc_low, psi), ParameterError);
  const auto other = eigendecompose(sample_goe(N, 9));
  CHECK_THROWS_AS(isotropic_law_error(s, q, other, mu, fc, psi), ParameterError);
}

TEST_CASE("averaged local law on a GOE flow") {
  const Index N = 400;
  const SymmetricMatrix h0 = sample_goe(N, 10);
  const EmpiricalMeasure mu(eigenvalues_only(h0));
  const auto s = eigendecompose(dbm_exact_sample(h0, 0.3, 10));
  const auto d = SpectralDomain::standard(N, 0.0, 1.0, 0.1);
  const auto fc = solve_grid(mu, 0.3, d, 6, 6);
  const auto r = local_law_error(s, fc, d.psi(N));
  CHECK(r.points.size() == 36);
  CHECK(r.max_ratio <= 1.0);
}

TEST_CASE("Q quantity") {
  CHECK(q_quantity((Vector(2) << 0.0, 1.0).finished(), 0) == doctest::Approx(0.25));
  CHECK(q_quantity((Vector(3) << 0.0, 1.0, 2.0).finished(), 1) == doctest::Approx(2.0 / 9.0));
  const Index N = 21;
  const double delta = 0.1;
  Vector lam(N);
  for (Index i = 0; i < N; ++i) lam(i) = delta * i;
  double sum = 0.0;
  for (int k = 1; k <= 10; ++k) sum += 2.0 / ((k * delta) * (k * delta));
  CHECK(q_quantity(lam, 10) == doctest::Approx(sum / (N * N)));
}

TEST_CASE("perturbation derivatives: closed cases") {
  SymmetricMatrix d(4);
  for (Index i = 0; i < 4; ++i) d.set(i, i, 0.3 * i - 0.4);
  const auto s = eigendecompose(d);
  const Vector q = default_direction(4, 1, false);
  CHECK(perturbation_derivatives(s, q, 2, 2, 2).dlambda == doctest::Approx(1.0));
  const auto r = perturbation_derivatives(s, s.vector(1), 1, 0, 3);
  CHECK(std::abs(r.dprojection) <= 1e-14);
}

TEST_CASE("perturbation derivatives match central differences") {
  const double eps = 1e-6;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SymmetricMatrix h = sample_goe(8, 500 + seed);
    const auto s = eigendecompose(h);
    CounterRng rng(seed, Stream::Synthetic);
    const Index i = static_cast<Index>(rng.below(8));
    const Index a = static_cast<Index>(rng.below(8));
    const Index b = static_cast<Index>(rng.below(8));
    const Vector q = default_direction(8, seed, false);
    const auto an = perturbation_derivatives(s, q, i, a, b);
    const auto sp = perturbed(h, a, b, eps);
    const auto sm = perturbed(h, a, b, -eps);
    const double fl = (sp.eigenvalues(i) - sm.eigenvalues(i)) / (2.0 * eps);
    const double fq = (q_quantity(sp.eigenvalues, i) - q_quantity(sm.eigenvalues, i)) / (2.0 * eps);
    const double pp = std::pow(sp.vector(i).dot(q), 2), pm = std::pow(sm.vector(i).dot(q), 2);
    const double fp = (pp - pm) / (2.0 * eps);
    auto rel = [](double x, double y) { return std::abs(x - y) / std::max(std::abs(y), 1e-3); };
    worst = std::max({worst, rel(an.dlambda, fl), rel(an.dQ, fq), rel(an.dprojection, fp)});
  }
  CHECK(worst <= 1e-5);
}

TEST_CASE("general check") {
  const Index N = 64;
  SpectralDecomposition id;
  id.eigenvalues = Vector::LinSpaced(N, -2.0, 2.0);
  id.eigenvectors = Matrix::Identity(N, N);
  Vector e1 = Vector::Zero(N);
  e1(0) = 1.0;
  CHECK_FALSE(general_check(id, e1, 0.5, 1.0).delocalized);

  // Sylvester Hadamard frame, every entry +-1/8.
  Matrix H = Matrix::Ones(1, 1);
  while (H.rows() < N) {
    const Index m = H.rows();
    Matrix next(2 * m, 2 * m);
    next << H, H, H, -H;
    H = next;
  }
  SpectralDecomposition flat;
  flat.eigenvalues = id.eigenvalues;
  flat.eigenvectors = H / std::sqrt(static_cast<double>(N));
  const auto r = general_check(flat, e1, 0.5, 1.0);
  CHECK(r.delocalized);
  CHECK(r.direction_delocalized);
  CHECK(r.no_accumulation);
  CHECK(r.general());
}

TEST_CASE("ER graphs are general") {
  int hits = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto spec = eigendecompose(normalize_er(sample_er({1000, 40.0, 0.0}, s)));
    if (general_check(spec, default_direction(1000, s), 0.2, 10.0).general()) ++hits;
  }
  CHECK(hits >= 19);
}
