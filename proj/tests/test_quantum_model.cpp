#include <doctest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "fcs/errors.hpp"
#include "fcs/matrix_kernel.hpp"
#include "fcs/model_io.hpp"
#include "fcs/quantum_model.hpp"
#include "test_util.hpp"

using namespace fcs;

TEST_CASE("fermi_dirac: fixed points") {
  ComplexMatrix zero1 = ComplexMatrix::Zero(1, 1);
  CHECK(fermi_dirac(zero1, 1.0, 0.0)(0, 0).real() == doctest::Approx(0.5));

  ComplexMatrix one1 = ComplexMatrix::Zero(1, 1);
  one1(0, 0) = 1.0;
  CHECK(fermi_dirac(one1, 2.0, 1.0)(0, 0).real() == doctest::Approx(0.5));

  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = -0.5;
  d(1, 1) = 0.5;
  const ComplexMatrix cold = fermi_dirac(d, 200.0, 0.0);
  CHECK(cold(0, 0).real() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(cold(1, 1).real() == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("fermi_dirac: commutes with H and stays in (0,1)") {
  const ComplexMatrix u = haar_unitary(91, 5);
  ComplexMatrix h = u + u.adjoint();
  const ComplexMatrix rho = fermi_dirac(h, 3.0, 0.2);
  CHECK(max_abs(ComplexMatrix(rho * h) - ComplexMatrix(h * rho)) <= 1e-10);
  const HermitianEig eig = hermitian_eig(rho);
  CHECK(eig.eigenvalues.minCoeff() > 0.0);
  CHECK(eig.eigenvalues.maxCoeff() < 1.0);
}

TEST_CASE("fermi_sea: projections and extremes") {
  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = -1.0;
  d(1, 1) = 1.0;
  const ComplexMatrix sea = fermi_sea(d, 0.0);
  CHECK(sea(0, 0).real() == doctest::Approx(1.0));
  CHECK(sea(1, 1).real() == doctest::Approx(0.0));

  CHECK(max_abs(fermi_sea(d, -5.0)) <= 1e-12);                                   // vacuum
  CHECK(max_abs(fermi_sea(d, 5.0) - ComplexMatrix::Identity(2, 2)) <= 1e-12);    // filled

  CHECK_THROWS_AS((void)fermi_sea(d, 1.0 + 1e-10), Error);  // degenerate level
}

TEST_CASE("fermi_sea matches the cold fermi_dirac limit") {
  const ComplexMatrix u = haar_unitary(41, 6);
  ComplexMatrix h = u + u.adjoint();
  // keep a spectral gap around mu = 0.05
  const double mu = 0.05;
  const ComplexMatrix sea = fermi_sea(h, mu);
  const ComplexMatrix cold = fermi_dirac(h, 1e4, mu);
  CHECK(max_abs(sea - cold) <= 1e-8);
}

TEST_CASE("validate: passes on generated models, reports broken ones") {
  const QuantumModel good = random_model(7, 4, ModelKind::MixedCommuting);
  CHECK(validate(good).all_ok());

  QuantumModel scaled = good;
  scaled.U *= 1.01;
  CHECK_FALSE(validate(scaled).unitarity_ok);

  QuantumModel hot = good;
  hot.rho(0, 0) = 1.5;
  CHECK_FALSE(validate(hot).rho_bounds_ok);
}

TEST_CASE("model creation rejects rho outside [0,1]") {
  ComplexMatrix rho = ComplexMatrix::Zero(2, 2);
  rho(0, 0) = 1.5;
  CHECK_THROWS_AS(QuantumModel::create(ComplexMatrix::Identity(2, 2), rho,
                                       ComplexMatrix::Zero(2, 2)),
                  Error);
}

TEST_CASE("random_model: kinds carry the advertised structure") {
  const QuantumModel pure = random_model(1, 4, ModelKind::PureCommuting);
  CHECK(pure.pure);
  CHECK(pure.commuting);
  CHECK(validate(pure).all_ok());
  CHECK(max_abs(ComplexMatrix(pure.rho * pure.rho) - pure.rho) <= 1e-14);

  const QuantumModel mixed = random_model(1, 4, ModelKind::MixedCommuting);
  CHECK(mixed.commuting);
  CHECK_FALSE(mixed.pure);
  CHECK(max_abs(ComplexMatrix(mixed.Q * mixed.rho) - ComplexMatrix(mixed.rho * mixed.Q)) == 0.0);

  const QuantumModel general = random_model(1, 4, ModelKind::MixedGeneral);
  CHECK_FALSE(general.commuting);
  CHECK(validate(general).all_ok());
}

TEST_CASE("random_model: deterministic in the seed") {
  const QuantumModel a = random_model(42, 5, ModelKind::MixedGeneral);
  const QuantumModel b = random_model(42, 5, ModelKind::MixedGeneral);
  CHECK(max_abs(a.U - b.U) == 0.0);
  CHECK(max_abs(a.rho - b.rho) == 0.0);
  CHECK(max_abs(a.Q - b.Q) == 0.0);
}

TEST_CASE("model JSON round-trip is exact") {
  const QuantumModel model = random_model(1234, 3, ModelKind::MixedGeneral);
  const nlohmann::json j = model_to_json(model);
  const QuantumModel back = model_from_json(j);
  CHECK(max_abs(model.U - back.U) == 0.0);
  CHECK(max_abs(model.rho - back.rho) == 0.0);
  CHECK(max_abs(model.Q - back.Q) == 0.0);
  CHECK(back.commuting == model.commuting);
}

TEST_CASE("model JSON rejects malformed input") {
  nlohmann::json j{{"dim", 2}};
  CHECK_THROWS_WITH_AS((void)model_from_json(j), doctest::Contains("model.U"), Error);
}
