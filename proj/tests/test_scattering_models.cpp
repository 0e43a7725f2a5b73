#include <doctest.h>

#include <cmath>

#include "fcs/counting_statistics.hpp"
#include "fcs/errors.hpp"
#include "fcs/matrix_kernel.hpp"
#include "fcs/scattering_models.hpp"

using namespace fcs;

namespace {

TwoCircleSpec window_spec(double transmission, int window, double circumference = kTwoPi) {
  TwoCircleSpec spec;
  spec.s = ScatteringMatrix::from_transmission(transmission);
  spec.circumference = circumference;
  const double h = spec.spacing();
  spec.mu_l = 0.5 * h;
  spec.mu_r = spec.mu_l + window * h;
  spec.cutoff = spec.mu_r + 2.0 * h;
  return spec;
}

}  // namespace

TEST_CASE("scattering matrix: unitary for every transmission, |t| = |t'|") {
  for (double p : {0.0, 0.3, 0.7, 1.0}) {
    const ScatteringMatrix s = ScatteringMatrix::from_transmission(p);
    CHECK(s.unitarity_residual() <= 1e-12);
    CHECK(std::abs(s.t) == doctest::Approx(std::abs(s.t_prime)));
    CHECK(s.transmission() == doctest::Approx(p));
  }
  ScatteringMatrix bad;
  bad.t = 0.5;  // breaks column normalization
  CHECK_THROWS_AS(bad.check(), Error);
}

TEST_CASE("build_two_circle: window counting and flags") {
  const TwoCircleSpec spec = window_spec(0.3, 10);
  CHECK(two_circle_window_count(spec) == 10);
  const QuantumModel model = build_two_circle(spec);
  CHECK(model.commuting);
  CHECK(model.pure);
  CHECK(model.q_is_projection);
  CHECK(validate(model).all_ok());
  CHECK(model.dim == 2 * static_cast<int>(spec.momenta().size()));
}

TEST_CASE("build_two_circle: one-momentum window") {
  // mu_l = -pi/T, mu_r = pi/T + eps on the T = 2pi grid: only p = 0 inside.
  TwoCircleSpec spec;
  spec.s = ScatteringMatrix::from_transmission(0.4);
  spec.circumference = kTwoPi;
  spec.mu_l = -0.5;
  spec.mu_r = 0.5 + 0.01;
  spec.cutoff = 3.3;
  CHECK(two_circle_window_count(spec) == 1);
  const QuantumModel model = build_two_circle(spec);
  for (double lam : {0.5, 1.7, 4.0}) {
    const Complex expected = Complex(0.6, 0.0) + 0.4 * std::polar(1.0, lam);
    CHECK(std::abs(chi_regularized(model, lam) - expected) <= 1e-12);
  }
}

TEST_CASE("build_two_circle: window tracks the bias times T over 2 pi") {
  for (double bias : {1.3, 4.7, 9.2}) {
    TwoCircleSpec spec;
    spec.s = ScatteringMatrix::from_transmission(0.5);
    spec.circumference = 4 * kTwoPi;
    spec.mu_l = 0.1 * spec.spacing();
    spec.mu_r = spec.mu_l + bias;
    spec.cutoff = spec.mu_r + 1.0;
    const double estimate = bias * spec.circumference / kTwoPi;
    CHECK(std::abs(two_circle_window_count(spec) - estimate) <= 1.0);
  }
}

TEST_CASE("build_two_circle: error paths") {
  TwoCircleSpec on_grid = window_spec(0.3, 4);
  on_grid.mu_l = 1.0;  // exactly the p = 1 grid point at T = 2 pi
  CHECK_THROWS_AS((void)build_two_circle(on_grid), Error);

  TwoCircleSpec empty = window_spec(0.3, 4);
  empty.mu_r = empty.mu_l;
  CHECK_THROWS_WITH_AS((void)build_two_circle(empty), doctest::Contains("EmptyWindow"), Error);

  TwoCircleSpec small = window_spec(0.3, 4);
  small.cutoff = small.mu_r - 1.0;
  CHECK_THROWS_AS((void)build_two_circle(small), Error);
}

TEST_CASE("identity junction: nothing scatters") {
  TwoCircleSpec spec = window_spec(0.0, 5);
  const QuantumModel model = build_two_circle(spec);
  for (double lam : {0.4, 2.2}) {
    CHECK(std::abs(chi_regularized(model, lam) - Complex(1.0, 0.0)) <= 1e-12);
  }
}

TEST_CASE("binomial_chi: endpoints and direct power") {
  CHECK(binomial_chi(0.0, 7, 1.3) == Complex(1.0, 0.0));
  CHECK(std::abs(binomial_chi(1.0, 7, 1.3) - std::polar(1.0, 7 * 1.3)) <= 1e-12);
  const Complex direct = std::pow(Complex(0.7, 0.3), 10);
  CHECK(std::abs(binomial_chi(0.3, 10, kPi / 2) - direct) <= 1e-12);
}

TEST_CASE("poisson_chi: rate zero and cumulants") {
  CHECK(poisson_chi(0.0, 2.2) == Complex(1.0, 0.0));
  const double rate = 2.4;
  const CumulantVector kappa =
      cumulants_from_chi([rate](double lam) { return poisson_chi(rate, lam); }, 2);
  CHECK(kappa[1] == doctest::Approx(rate).epsilon(1e-8));
  CHECK(kappa[2] == doctest::Approx(rate).epsilon(1e-8));
}

TEST_CASE("binomial converges to Poisson in the rare-attempt limit") {
  const double rate = 1.0;
  const int n = 10000;
  const double p = rate / n;
  double sup = 0.0;
  for (int k = 0; k < 64; ++k) {
    const double lam = kTwoPi * k / 64;
    sup = std::max(sup, std::abs(binomial_chi(p, n, lam) - poisson_chi(rate, lam)));
  }
  CHECK(sup <= 0.01);
}

TEST_CASE("reference_noise: named closed forms") {
  NoiseParams jn;
  jn.conductance = 1.0 / (4.0 * kPi);
  jn.beta = 10.0;
  CHECK(reference_noise(NoiseKind::JohnsonNyquist, jn) == doctest::Approx(1.0 / (20.0 * kPi)));

  NoiseParams schottky;
  schottky.mean_charge = 5.0;
  CHECK(reference_noise(NoiseKind::Schottky, schottky) == doctest::Approx(5.0));

  NoiseParams lk;
  lk.mean_charge = 5.0;
  lk.transmission = 0.3;
  CHECK(reference_noise(NoiseKind::LesovikKhlus, lk) == doctest::Approx(3.5));

  CHECK_THROWS_AS((void)noise_kind_from_string("shotgun"), Error);
}

TEST_CASE("thermal_two_circle: cold limit reproduces the sharp windows") {
  TwoCircleSpec spec = window_spec(0.4, 3);
  spec.cutoff = std::max(spec.cutoff, std::abs(spec.mu_r) + 10.0 / 1e4 + 1.0);
  const QuantumModel cold = thermal_two_circle(spec, 1e4);
  const QuantumModel sharp = build_two_circle(spec);
  CHECK(max_abs(cold.rho - sharp.rho) <= 1e-8);
  CHECK(cold.commuting);

  // At moderate temperature the occupations are genuinely mixed.
  spec.cutoff = std::abs(spec.mu_r) + 10.0 / 2.0 + 1.0;
  const QuantumModel warm = thermal_two_circle(spec, 2.0);
  CHECK(warm.commuting);
  CHECK_FALSE(warm.pure);
}

TEST_CASE("thermal_two_circle: cutoff must contain the tails") {
  TwoCircleSpec spec = window_spec(0.4, 3);
  CHECK_THROWS_WITH_AS((void)thermal_two_circle(spec, 0.1), doctest::Contains("CutoffTooSmall"),
                       Error);
}

TEST_CASE("thermal_two_circle: zero bias means zero mean transfer") {
  TwoCircleSpec spec;
  spec.s = ScatteringMatrix::from_transmission(0.6);
  spec.circumference = 8.0;
  spec.mu_l = 0.0;
  spec.mu_r = 0.0;
  spec.cutoff = 12.0;
  const QuantumModel model = thermal_two_circle(spec, 1.0);
  const MeanCharge mc = mean_charge(model);
  CHECK(std::abs(mc.naive) <= 1e-10);
  CHECK(std::abs(mc.regularized) <= 1e-10);
}

TEST_CASE("ohm's law is grid-exact with the window count") {
  const TwoCircleSpec spec = window_spec(0.45, 12, 3 * kTwoPi);
  const QuantumModel model = build_two_circle(spec);
  const int window = two_circle_window_count(spec);
  const double grid_bias = kTwoPi * window / spec.circumference;
  const double expected = spec.conductance() * grid_bias * spec.circumference;
  CHECK(mean_charge(model).naive == doctest::Approx(expected).epsilon(1e-12));
  CHECK(mean_charge(model).regularized == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("regularized chi is cutoff independent; binomial at every cutoff") {
  const double transmission = 0.7;
  TwoCircleSpec spec = window_spec(transmission, 6);
  const int window = two_circle_window_count(spec);
  const double base_cutoff = spec.cutoff;
  std::vector<Complex> previous;
  for (double factor : {1.0, 2.0, 4.0}) {
    spec.cutoff = base_cutoff * factor;
    const QuantumModel model = build_two_circle(spec);
    ChiEvaluator reg(model, ChiVariant::Regularized);
    ChiEvaluator naive(model, ChiVariant::LesLev);
    std::vector<Complex> current;
    for (int k = 0; k < 16; ++k) {
      const double lam = kTwoPi * k / 16;
      const Complex value = reg(lam);
      CHECK(std::abs(value - binomial_chi(transmission, window, lam)) <= 1e-10);
      // the compensating trace vanishes by cyclicity, so the naive
      // determinant lands on the same binomial at finite dimension
      CHECK(std::abs(naive(lam) - value) <= 1e-10);
      current.push_back(value);
    }
    if (!previous.empty()) {
      for (size_t k = 0; k < current.size(); ++k) {
        CHECK(std::abs(current[k] - previous[k]) <= 1e-10);
      }
    }
    previous = std::move(current);
  }
}
