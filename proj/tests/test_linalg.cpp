#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "rmtlab/ensembles.hpp"
#include "rmtlab/linalg.hpp"
#include "rmtlab/matrix_io.hpp"
#include "rmtlab/rng.hpp"

using namespace rmtlab;

namespace {

Vector random_unit(Index N, std::uint64_t seed) {
  CounterRng rng(seed, Stream::Synthetic);
  Vector q(N);
  for (Index i = 0; i < N; ++i) q(i) = rng.normal();
  return q / q.norm();
}

Eigen::MatrixXcd dense_resolvent(const SymmetricMatrix& h, Complex z) {
  const Index N = h.dim();
  Eigen::MatrixXcd a = h.dense().cast<Complex>() - z * Eigen::MatrixXcd::Identity(N, N);
  return a.inverse();
}

}  // namespace

TEST_CASE("symmetric storage writes both halves") {
  SymmetricMatrix m(3);
  m.set(0, 2, 1.5);
  m.add(2, 0, 0.5);
  CHECK(m(0, 2) == 2.0);
  CHECK(m(2, 0) == 2.0);
  CHECK_THROWS_AS(SymmetricMatrix(0), ParameterError);
  Matrix bad = Matrix::Zero(2, 2);
  bad(0, 1) = 1.0;
  CHECK_THROWS_AS(SymmetricMatrix::from_dense(bad), ParameterError);
}

TEST_CASE("diagonal input gives permuted identity columns") {
  SymmetricMatrix m(3);
  m.set(0, 0, 3.0);
  m.set(1, 1, 1.0);
  m.set(2, 2, 2.0);
  const auto s = eigendecompose(m);
  CHECK(s.eigenvalues(0) == doctest::Approx(1.0));
  CHECK(s.eigenvalues(1) == doctest::Approx(2.0));
  CHECK(s.eigenvalues(2) == doctest::Approx(3.0));
  CHECK(s.eigenvectors(1, 0) == doctest::Approx(1.0));
  CHECK(s.eigenvectors(2, 1) == doctest::Approx(1.0));
  CHECK(s.eigenvectors(0, 2) == doctest::Approx(1.0));
}

TEST_CASE("2x2 swap matrix") {
  SymmetricMatrix m(2);
  m.set(0, 1, 1.0);
  const auto s = eigendecompose(m);
  CHECK(s.eigenvalues(0) == doctest::Approx(-1.0));
  CHECK(s.eigenvalues(1) == doctest::Approx(1.0));
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(s.eigenvectors(0, 0)) == doctest::Approx(r));
  CHECK(s.eigenvectors(0, 0) * s.eigenvectors(1, 0) == doctest::Approx(-0.5));
  CHECK(s.eigenvectors(0, 1) * s.eigenvectors(1, 1) == doctest::Approx(0.5));
  // Tie in magnitude resolves to the lowest index being positive.
  CHECK(s.eigenvectors(0, 0) > 0.0);
  CHECK(s.eigenvectors(0, 1) > 0.0);
}

TEST_CASE("GOE 8x8 reconstruction and decomposition invariants") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SymmetricMatrix h = sample_goe(8, seed);
    const auto s = eigendecompose(h);
    const Matrix& U = s.eigenvectors;
    const Matrix rec = U * s.eigenvalues.asDiagonal() * U.transpose();
    CHECK((rec - h.dense()).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((U.transpose() * U - Matrix::Identity(8, 8)).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((h.dense() * U - U * s.eigenvalues.asDiagonal()).cwiseAbs().maxCoeff() <= 1e-8 * std::max(1.0, h.max_abs()));
    for (Index i = 1; i < 8; ++i) CHECK(s.eigenvalues(i) >= s.eigenvalues(i - 1));
    CHECK(std::abs(s.eigenvalues.sum() - h.dense().trace()) <= 1e-8 * 8 * h.max_abs());
    const Vector q = random_unit(8, seed);
    CHECK(std::abs(s.overlaps(q).squaredNorm() - 1.0) <= 1e-10);
  }
}

TEST_CASE("sign convention is deterministic and Rademacher flips whole columns") {
  const SymmetricMatrix h = sample_goe(6, 3);
  const auto a = eigendecompose(h);
  const auto b = eigendecompose(h);
  CHECK((a.eigenvectors - b.eigenvectors).cwiseAbs().maxCoeff() == 0.0);
  for (Index k = 0; k < 6; ++k) {
    Index arg;
    a.eigenvectors.col(k).cwiseAbs().maxCoeff(&arg);
    CHECK(a.eigenvectors(arg, k) > 0.0);
  }
  CounterRng rng(1, Stream::Signs);
  const auto r = eigendecompose(h, SignConvention::Rademacher, &rng);
  for (Index k = 0; k < 6; ++k) CHECK(std::abs(std::abs(r.eigenvectors.col(k).dot(a.eigenvectors.col(k))) - 1.0) < 1e-12);
}

TEST_CASE("Stieltjes transform closed cases") {
  const std::vector<double> one{0.0};
  const Complex m1 = stieltjes_transform(one, Complex(0.0, 1.0));
  CHECK(m1.real() == doctest::Approx(0.0));
  CHECK(m1.imag() == doctest::Approx(1.0));
  const std::vector<double> two{-1.0, 1.0};
  const Complex m2 = stieltjes_transform(two, Complex(0.0, 1.0));
  CHECK(std::abs(m2 - Complex(0.0, 0.5)) < 1e-15);
}

TEST_CASE("Herglotz and reflection") {
  const auto s = eigendecompose(sample_goe(10, 7));
  const std::vector<double> lam(s.eigenvalues.data(), s.eigenvalues.data() + 10);
  const Vector q = random_unit(10, 2);
  for (double E : {-2.5, -0.3, 0.0, 1.1}) {
    for (double eta : {1e-3, 0.1, 2.0}) {
      const HalfPlanePoint z(E, eta);
      CHECK(stieltjes_transform(s, z).imag() > 0.0);
      CHECK(isotropic_form(s, q, z).imag() > 0.0);
      const Complex up = stieltjes_transform(lam, Complex(E, eta));
      const Complex down = stieltjes_transform(lam, Complex(E, -eta));
      CHECK(std::abs(down - std::conj(up)) < 1e-14);
    }
  }
  CHECK_THROWS_AS(HalfPlanePoint(0.0, 0.0), ParameterError);
}

TEST_CASE("isotropic form") {
  const SymmetricMatrix h = sample_goe(6, 11);
  const auto s = eigendecompose(h);
  const HalfPlanePoint z(0.3, 0.2);

  const Vector u1 = s.vector(0);
  CHECK(std::abs(isotropic_form(s, u1, z) - 1.0 / (s.eigenvalues(0) - z.z())) < 1e-12);

  const Vector flat = s.eigenvectors * Vector::Constant(6, 1.0 / std::sqrt(6.0));
  CHECK(std::abs(isotropic_form(s, flat, z) - stieltjes_transform(s, z)) < 1e-12);

  const Vector q = random_unit(6, 5);
  const Eigen::VectorXcd qc = q.cast<Complex>();
  const Complex direct = (qc.transpose() * dense_resolvent(h, z.z()) * qc)(0, 0);
  CHECK(std::abs(isotropic_form(s, q, z) - direct) < 1e-10);

  CHECK_THROWS_AS(isotropic_form(s, 2.0 * q, z), ContractViolation);
}

TEST_CASE("Green entries") {
  SymmetricMatrix d(3);
  d.set(0, 0, -1.0);
  d.set(1, 1, 0.5);
  d.set(2, 2, 2.0);
  const auto sd = eigendecompose(d);
  const HalfPlanePoint z(0.1, 0.3);
  CHECK(std::abs(green_entry(sd, 1, 1, z) - 1.0 / (0.5 - z.z())) < 1e-14);
  CHECK(std::abs(green_entry(sd, 0, 2, z)) < 1e-15);

  const SymmetricMatrix h = sample_goe(5, 13);
  const auto s = eigendecompose(h);
  const auto G = dense_resolvent(h, z.z());
  Complex trace(0.0, 0.0);
  for (Index a = 0; a < 5; ++a) {
    for (Index b = 0; b < 5; ++b) CHECK(std::abs(green_entry(s, a, b, z) - G(a, b)) < 1e-10);
    trace += green_entry(s, a, a, z);
  }
  CHECK(std::abs(trace / 5.0 - stieltjes_transform(s, z)) < 1e-12);
}

TEST_CASE("semicircle Stieltjes transform") {
  const Complex a = semicircle_stieltjes(HalfPlanePoint(0.0, 1.0));
  CHECK(std::abs(a - Complex(0.0, (std::sqrt(5.0) - 1.0) / 2.0)) < 1e-14);
  const Complex b = semicircle_stieltjes(HalfPlanePoint(0.0, 3.0));
  CHECK(b.imag() > 0.0);
  CHECK(b.imag() < 1.0 / 3.0);
  for (double E = -1.9; E < 1.95; E += 0.1) {
    const Complex m = semicircle_stieltjes(HalfPlanePoint(E, 1e-3));
    CHECK(std::abs(m.imag() / M_PI - std::sqrt(4.0 - E * E) / (2.0 * M_PI)) <= 2e-3);
    CHECK(std::abs(m * m + Complex(E, 1e-3) * m + 1.0) < 1e-12);
  }
}

TEST_CASE("spectral domain") {
  const auto d = SpectralDomain::standard(1000, 0.0, 1.0, 0.1, 0.1);
  CHECK(d.eta_min == doctest::Approx(std::pow(1000.0, 0.4) / 1000.0));
  CHECK(d.eta_max == doctest::Approx(0.9));
  CHECK_NOTHROW(d.validate(1000));
  SpectralDomain bad = d;
  bad.eta_min = 1e-6;
  CHECK_THROWS_AS(bad.validate(1000), ParameterError);
  const auto g = d.grid(4, 3);
  REQUIRE(g.size() == 12);
  CHECK(g.front().E == doctest::Approx(-0.9));
  CHECK(g.back().E == doctest::Approx(0.9));
  CHECK(g[2].eta == doctest::Approx(0.9));
}

TEST_CASE("matrix files round-trip") {
  const auto dir = std::filesystem::temp_directory_path() / "rmtlab_linalg_io";
  std::filesystem::create_directories(dir);
  const Matrix m = sample_goe(7, 21).dense();
  io::write_matrix(dir / "m.txt", m);
  io::write_matrix(dir / "m.bin", m);
  CHECK((io::read_matrix(dir / "m.txt") - m).cwiseAbs().maxCoeff() == 0.0);
  CHECK((io::read_matrix(dir / "m.bin") - m).cwiseAbs().maxCoeff() == 0.0);
  std::filesystem::remove_all(dir);
}
