#include <doctest.h>

#include <cmath>

#include "fcs/errors.hpp"
#include "fcs/matrix_kernel.hpp"
#include "fcs/quantum_model.hpp"
#include "test_util.hpp"

using namespace fcs;

namespace {

ComplexMatrix random_hermitian(std::uint64_t seed, int dim) {
  const ComplexMatrix u = haar_unitary(seed, dim);
  ComplexMatrix h = u + u.adjoint();
  return 0.5 * (h + ComplexMatrix(h.adjoint()));
}

}  // namespace

TEST_CASE("hermitian_eig: identity and diagonal cases") {
  const HermitianEig id = hermitian_eig(ComplexMatrix::Identity(3, 3));
  for (int i = 0; i < 3; ++i) CHECK(id.eigenvalues[i] == doctest::Approx(1.0));

  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = 2.0;
  d(1, 1) = -1.0;
  const HermitianEig de = hermitian_eig(d);
  CHECK(de.eigenvalues[0] == doctest::Approx(-1.0));
  CHECK(de.eigenvalues[1] == doctest::Approx(2.0));
}

TEST_CASE("hermitian_eig: reconstruction and unitarity of eigenvectors") {
  const ComplexMatrix h = random_hermitian(17, 6);
  const HermitianEig eig = hermitian_eig(h);
  const ComplexMatrix rebuilt =
      eig.vectors * eig.eigenvalues.cast<Complex>().asDiagonal() * eig.vectors.adjoint();
  CHECK(max_abs(rebuilt - h) <= 1e-10);
  CHECK(max_abs(ComplexMatrix(eig.vectors.adjoint() * eig.vectors) -
                ComplexMatrix::Identity(6, 6)) <= 1e-10);
}

TEST_CASE("hermitian_eig: rejects non-hermitian input") {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 1) = 1.0;
  CHECK_THROWS_WITH_AS(hermitian_eig(m), doctest::Contains("NotHermitian"), Error);
}

TEST_CASE("matrix_function: identity map, spectral step, fermi point") {
  const ComplexMatrix h = random_hermitian(3, 5);
  CHECK(max_abs(matrix_function(h, std::function<double(double)>([](double x) { return x; })) -
                h) <= 1e-12);

  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = -1.0;
  d(1, 1) = 2.0;
  const ComplexMatrix theta =
      matrix_function(d, std::function<double(double)>([](double x) { return x < 0 ? 1.0 : 0.0; }));
  CHECK(theta(0, 0).real() == doctest::Approx(1.0));
  CHECK(theta(1, 1).real() == doctest::Approx(0.0));

  ComplexMatrix zero1 = ComplexMatrix::Zero(1, 1);
  const ComplexMatrix fermi = matrix_function(
      zero1, std::function<double(double)>([](double x) { return 1.0 / (1.0 + std::exp(2.0 * x)); }));
  CHECK(fermi(0, 0).real() == doctest::Approx(0.5));
}

TEST_CASE("matrix_function: exp(i lam H) is unitary across lambda") {
  const ComplexMatrix h = random_hermitian(23, 6);
  for (double lam : {-10.0, -3.1, 0.0, 0.7, 10.0}) {
    const ComplexMatrix u = unitary_exp(h, lam);
    CHECK(max_abs(ComplexMatrix(u.adjoint() * u) - ComplexMatrix::Identity(6, 6)) <= 1e-10);
  }
}

TEST_CASE("log_det: trivial values") {
  const LogDet id = log_det(ComplexMatrix::Identity(5, 5));
  CHECK(std::abs(id.log_modulus) <= 1e-12);
  CHECK(std::abs(id.phase) <= 1e-12);

  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = 2.0;
  d(1, 1) = 3.0;
  const LogDet ld = log_det(d);
  CHECK(ld.log_modulus == doctest::Approx(std::log(6.0)));
  CHECK(std::abs(ld.phase) <= 1e-12);
}

TEST_CASE("log_det: unit modulus for Haar unitaries") {
  const LogDet ld = log_det(haar_unitary(5, 8));
  CHECK(std::abs(ld.log_modulus) <= 1e-10);
}

TEST_CASE("log_det: singular matrix reports a dead pivot") {
  ComplexMatrix m = ComplexMatrix::Zero(3, 3);
  m(0, 0) = 1.0;
  CHECK_THROWS_AS((void)log_det(m), Error);
}

TEST_CASE("log_det reproduces the plain determinant on well-conditioned inputs") {
  for (std::uint64_t seed : {2u, 4u, 6u, 8u}) {
    for (int dim : {3, 8, 24, 64}) {
      const ComplexMatrix m =
          haar_unitary(seed * 100 + static_cast<std::uint64_t>(dim), dim) +
          0.3 * ComplexMatrix::Identity(dim, dim);
      const Complex direct = m.determinant();
      const Complex from_log = log_det(m).value();
      CHECK(std::abs(from_log - direct) / std::abs(direct) <= 1e-12);
    }
  }
}

TEST_CASE("log_det: multiplicative modulo 2 pi") {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    const ComplexMatrix a = haar_unitary(seed, 8) + 0.2 * random_hermitian(seed + 100, 8);
    const ComplexMatrix b = haar_unitary(seed + 50, 8) + 0.1 * random_hermitian(seed + 150, 8);
    const LogDet la = log_det(a);
    const LogDet lb = log_det(b);
    const LogDet lab = log_det(a * b);
    CHECK(lab.log_modulus == doctest::Approx(la.log_modulus + lb.log_modulus).epsilon(1e-9));
    const double phase_diff =
        std::remainder(lab.phase - la.phase - lb.phase, kTwoPi);
    CHECK(std::abs(phase_diff) <= 1e-9);
  }
}

TEST_CASE("trace_norm: fixed values") {
  CHECK(trace_norm(ComplexMatrix::Zero(4, 4)) == doctest::Approx(0.0));

  // rank-one projector
  ComplexVector v(3);
  v << 0.5, Complex(0.0, 0.5), std::sqrt(0.5);
  const ComplexMatrix p = v * v.adjoint();
  CHECK(trace_norm(p) == doctest::Approx(1.0));

  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = -4.0;
  CHECK(trace_norm(d) == doctest::Approx(7.0));
}

TEST_CASE("trace_norm: triangle inequality and unitary invariance") {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const ComplexMatrix a = random_hermitian(seed, 6);
    const ComplexMatrix b = random_hermitian(seed + 40, 6);
    CHECK(trace_norm(a + b) <= trace_norm(a) + trace_norm(b) + 1e-10);
    const ComplexMatrix u = haar_unitary(seed + 7, 6);
    CHECK(trace_norm(u * a * u.adjoint()) == doctest::Approx(trace_norm(a)).epsilon(1e-10));
  }
}
