#include <doctest.h>

#include <cmath>

#include "rmtlab/ensembles.hpp"
#include "rmtlab/free_convolution.hpp"

using namespace rmtlab;

namespace {

Complex quadratic_root(Complex z, double t) {
  Complex s = std::sqrt(z * z - 4.0 * t);
  Complex m = (-z + s) / (2.0 * t);
  if (m.imag() <= 0.0) m = (-z - s) / (2.0 * t);
  return m;
}

double semicircle_density_t(double x, double t) {
  const double r = 4.0 * t - x * x;
  return r > 0.0 ? std::sqrt(r) / (2.0 * M_PI * t) : 0.0;
}

// Composite Simpson integration of the semicircle density from the left edge,
// then bisection for the level.
double quadrature_quantile(double level, double t) {
  const double edge = 2.0 * std::sqrt(t);
  auto mass = [&](double x) {
    const int n = 20000;
    const double h = (x + edge) / n;
    double s = semicircle_density_t(-edge, t) + semicircle_density_t(x, t);
    for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * semicircle_density_t(-edge + k * h, t);
    return s * h / 3.0;
  };
  double lo = -edge, hi = edge;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mass(mid) < level ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

EmpiricalMeasure goe_spectrum(Index N, std::uint64_t seed) { return EmpiricalMeasure(eigenvalues_only(sample_goe(N, seed))); }

}  // namespace

TEST_CASE("t = 0 reduces to m_0") {
  const auto mu = goe_spectrum(50, 1);
  for (double E : {-1.0, 0.2, 2.5}) {
    const HalfPlanePoint z(E, 0.05);
    const auto sol = solve_mfc_detailed(mu, 0.0, z);
    CHECK(sol.m == mu.stieltjes(z.z()));
  }
}

TEST_CASE("single atom matches the quadratic root on a 20x20 grid") {
  const auto mu = EmpiricalMeasure::single_atom(0.0);
  for (double t : {0.1, 1.0, 4.0}) {
    SpectralDomain d;
    d.E0 = 0.0;
    d.r = 3.0 * std::sqrt(t);
    d.kappa = 0.0;
    d.eta_min = 1e-3;
    d.eta_max = 2.0;
    const auto state = solve_grid(mu, t, d, 20, 20);
    REQUIRE(state.size() == 400);
    for (std::size_t k = 0; k < state.size(); ++k)
      CHECK(std::abs(state.solutions[k] - quadratic_root(state.points[k].z(), t)) <= 1e-10);
    CHECK(state.residual_max() <= 1e-12);
    CHECK_NOTHROW(state.assert_residuals(1e-12));
  }
}

TEST_CASE("GOE spectrum at t = 1 matches the variance-2 semicircle") {
  const auto mu = goe_spectrum(4000, 2);
  const Complex z(0.0, 2.0);
  const Complex m = solve_mfc(mu, 1.0, HalfPlanePoint(0.0, 2.0));
  const Complex target = (-z + std::sqrt(z * z - 8.0)) / 4.0;
  CHECK(std::abs(m - target) <= 0.02);
  CHECK(mfc_residual(mu, 1.0, z, m) <= 1e-12);
}

TEST_CASE("fixed-point residual on a spectrum grid") {
  const auto mu = goe_spectrum(300, 3);
  const auto d = SpectralDomain::standard(300, 0.0, 1.0, 0.1);
  const auto state = solve_grid(mu, 0.3, d, 12, 12);
  CHECK(state.residual_max() <= 1e-12);
  for (std::size_t k = 0; k < state.size(); ++k) CHECK(state.solutions[k].imag() > 0.0);
  FreeConvolutionState tampered = state;
  tampered.residuals[5] = 1e-9;
  CHECK_THROWS_AS(tampered.assert_residuals(1e-12), ContractViolation);
}

TEST_CASE("g weights") {
  const auto mu = goe_spectrum(40, 4);
  const HalfPlanePoint z(0.4, 0.1);
  const auto g0 = g_weights(mu, 0.0, z, mu.stieltjes(z.z()));
  for (Index i = 0; i < mu.size(); ++i)
    CHECK(std::abs(g0[static_cast<std::size_t>(i)] - 1.0 / (mu.atoms()(i) - z.z())) < 1e-14);

  const double t = 0.5;
  const Complex m = solve_mfc(mu, t, z);
  const auto g = g_weights(mu, t, z, m);
  Complex avg(0.0, 0.0);
  for (const auto& v : g) avg += v;
  CHECK(std::abs(avg / static_cast<double>(g.size()) - m) < 1e-12);
  CHECK_THROWS_AS(g_weights(mu, t, z, m + 1e-6), ContractViolation);

  const auto one = EmpiricalMeasure::single_atom(0.0);
  const HalfPlanePoint w(0.3, 0.2);
  const Complex ms = quadratic_root(w.z(), 1.0);
  const auto gs = g_weights(one, 1.0, w, solve_mfc(one, 1.0, w));
  CHECK(std::abs(gs[0] - ms) < 1e-12);
  CHECK(std::abs(gs[0] - 1.0 / (-w.z() - ms)) < 1e-12);
}

TEST_CASE("fc density") {
  const auto one = EmpiricalMeasure::single_atom(0.0);
  CHECK(std::abs(fc_density(one, 1.0, 0.0) - 1.0 / M_PI) <= 1e-3);
  CHECK(fc_density(one, 1.0, 2.0 + 2.0 + 10.0) <= 1e-5);

  Vector sym(6);
  sym << -2.0, -1.0, -0.3, 0.3, 1.0, 2.0;
  const EmpiricalMeasure mu(sym);
  for (double E : {0.1, 0.7, 1.5, 2.4}) CHECK(std::abs(fc_density(mu, 0.4, E) - fc_density(mu, 0.4, -E)) <= 1e-8);
}

TEST_CASE("flat measure: density tends to rho_0 = 1/2 for small t") {
  const Index N = 2000;
  Vector atoms(N);
  for (Index i = 0; i < N; ++i) atoms(i) = -1.0 + (2.0 * i + 1.0) / N;
  const EmpiricalMeasure mu(atoms);
  CHECK(fc_density(mu, 1e-3, 0.0) == doctest::Approx(0.5).epsilon(5e-3));
  CHECK(mu.stieltjes(Complex(0.0, 1e-2)).imag() == doctest::Approx(M_PI / 2.0).epsilon(2e-2));
}

TEST_CASE("classical locations: semicircle quartiles from quadrature") {
  const auto g = classical_locations(EmpiricalMeasure::single_atom(0.0), 1.0, 4);
  REQUIRE(g.gamma.size() == 4);
  const double q1 = quadrature_quantile(0.25, 1.0);
  CHECK(g.gamma(0) == doctest::Approx(q1).epsilon(1e-6));
  CHECK(std::abs(g.gamma(1)) <= 1e-8);
  CHECK(g.gamma(2) == doctest::Approx(-q1).epsilon(1e-6));
  CHECK(g.gamma(3) == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("classical locations: symmetry and small-t limit") {
  Vector sym(8);
  sym << -1.7, -1.1, -0.6, -0.2, 0.2, 0.6, 1.1, 1.7;
  const EmpiricalMeasure mu(sym);
  const auto g = classical_locations(mu, 1.0, 8);
  CHECK(std::abs(g.gamma(3)) <= 1e-8);
  CHECK(g.gamma(2) < 0.0);
  CHECK(std::abs(g.gamma(2) + g.gamma(4)) <= 1e-8);
  for (Index i = 0; i < 7; ++i) CHECK(std::abs(g.gamma(i) + g.gamma(6 - i)) <= 1e-8);

  const auto g0 = classical_locations(mu, 1e-6, 8);
  for (Index i = 0; i < 8; ++i) CHECK(std::abs(g0.gamma(i) - sym(i)) <= 1e-2);
}

TEST_CASE("classical locations agree with the boundary CDF") {
  const auto mu = goe_spectrum(200, 5);
  const double t = 0.3;
  const auto g = classical_locations(mu, t, 200);
  for (Index i = 0; i + 1 < 200; i += 17) {
    CHECK(fc_cdf(mu, t, g.gamma(i)) == doctest::Approx((i + 1) / 200.0).epsilon(1e-6));
    CHECK(g.gamma(i + 1) >= g.gamma(i));
  }
}

TEST_CASE("density integrates to one and to the CDF") {
  const auto mu = goe_spectrum(100, 6);
  const double t = 0.5;
  const double lo = mu.min() - 2.0 * std::sqrt(t) - 0.5;
  const double hi = mu.max() + 2.0 * std::sqrt(t) + 0.5;
  const int n = 4000;
  const double h = (hi - lo) / n;
  double mass = 0.0, at_zero = 0.0;
  for (int k = 0; k < n; ++k) {
    const double x = lo + (k + 0.5) * h;
    const double rho = fc_density(mu, t, x);
    mass += rho * h;
    if (x < 0.0) at_zero += rho * h;
  }
  CHECK(mass == doctest::Approx(1.0).epsilon(2e-3));
  CHECK(fc_cdf(mu, t, 0.0) == doctest::Approx(at_zero).epsilon(5e-3));
}

TEST_CASE("fc diagnostics for the semicircle") {
  const auto one = EmpiricalMeasure::single_atom(0.0);
  SpectralDomain d;
  d.E0 = 0.0;
  d.r = 0.5;
  d.kappa = 0.1;
  d.eta_min = 1e-4;
  d.eta_max = 1e-3;
  const auto state = solve_grid(one, 1.0, d, 10, 3);
  for (const auto& m : state.solutions) {
    CHECK(m.imag() / M_PI >= 0.25);
    CHECK(m.imag() / M_PI <= 0.35);
  }
  const auto diag = fc_diagnostics(one, 1.0, d, 2.0, 10, 3);
  CHECK_FALSE(diag.im_bound_violated);
  CHECK(diag.residual_max <= 1e-12);
  CHECK_THROWS_AS(fc_diagnostics(one, 0.0, d, 2.0), ParameterError);
}
