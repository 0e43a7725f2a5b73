#include <doctest.h>

#include <cmath>

#include "fcs/counting_statistics.hpp"
#include "fcs/errors.hpp"
#include "fcs/matrix_kernel.hpp"
#include "fcs/quantum_model.hpp"
#include "fcs/scattering_models.hpp"
#include "fcs/thermodynamic_limit.hpp"
#include "test_util.hpp"

using namespace fcs;

namespace {

TwoCircleSpec sweep_spec(double transmission, int window) {
  TwoCircleSpec spec;
  spec.s = ScatteringMatrix::from_transmission(transmission);
  spec.circumference = kTwoPi;
  spec.mu_l = 0.5;
  spec.mu_r = spec.mu_l + window;
  spec.cutoff = spec.mu_r + 2.0;
  return spec;
}

}  // namespace

TEST_CASE("regularization identity: roundoff-exact on finite commuting models") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const ModelKind kind =
        seed % 2 == 0 ? ModelKind::PureCommuting : ModelKind::MixedCommuting;
    const QuantumModel model = random_model(seed, 4 + static_cast<int>(seed % 3), kind);
    CHECK(regularization_identity_check(model) <= 1e-9);
  }
}

TEST_CASE("regularization identity: exactly zero deviation under U = 1") {
  const QuantumModel frozen =
      test::identity_model(random_model(3, 4, ModelKind::MixedCommuting));
  CHECK(regularization_identity_check(frozen) <= 1e-13);
}

TEST_CASE("trace-class diagnostics: structural zeros") {
  // pure state: rho rho' = 0, so d_mix and d_noise vanish
  const TwoCircleSpec spec = sweep_spec(0.3, 4);
  const TraceClassDiagnostics pure = trace_class_diagnostics(build_two_circle(spec));
  CHECK(pure.d_mix <= 1e-10);
  CHECK(pure.d_noise <= 1e-10);
  CHECK(pure.d_rho > 0.1);  // the window does get rearranged

  // U = 1: nothing moves
  const TraceClassDiagnostics frozen = trace_class_diagnostics(
      test::identity_model(random_model(9, 4, ModelKind::MixedCommuting)));
  CHECK(frozen.d_rho <= 1e-12);
  CHECK(frozen.d_sqrt <= 1e-10);
}

TEST_CASE("trace-class diagnostics: triangle bound ties d_noise to the rotated d_mix") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const ModelKind kind = seed % 2 == 0 ? ModelKind::MixedCommuting : ModelKind::MixedGeneral;
    const QuantumModel m = random_model(seed, 5, kind);
    const TraceClassDiagnostics d = trace_class_diagnostics(m);
    const ComplexMatrix sqrt_mix = matrix_function(
        m.rho, std::function<double(double)>(
                   [](double x) { return std::sqrt(std::max(x * (1.0 - x), 0.0)); }));
    const double rotated_mix = trace_norm(m.Q * m.U * sqrt_mix * m.U.adjoint());
    CHECK(d.d_noise <= rotated_mix + d.d_mix + 1e-9);
  }
}

TEST_CASE("cutoff sweep: chi_reg pinned, tr(rho Q) grows, identity holds") {
  const TwoCircleSpec spec = sweep_spec(0.55, 5);
  const std::vector<double> cutoffs = {spec.cutoff, 2 * spec.cutoff, 4 * spec.cutoff};
  const SweepReport report = cutoff_sweep(spec, std::nullopt, cutoffs);

  REQUIRE(report.records.size() == 3);
  CHECK(report.max_chi_regularized_drift() <= 1e-10);
  for (size_t i = 0; i + 1 < report.records.size(); ++i) {
    CHECK(report.records[i].tr_rho_q < report.records[i + 1].tr_rho_q);
  }
  for (const SweepRecord& rec : report.records) {
    CHECK(rec.identity_deviation <= 1e-9);
    CHECK(std::abs(rec.tr_compensation) <= 1e-10);  // cyclicity at finite dim
    CHECK(rec.diagnostics.d_mix <= 1e-10);          // pure state
  }
}

TEST_CASE("cutoff sweep: thermal chi pinned once the Fermi tails are contained") {
  TwoCircleSpec spec;
  spec.s = ScatteringMatrix::from_transmission(0.4);
  spec.circumference = 4.0 * kTwoPi;
  spec.mu_l = 0.03;
  spec.mu_r = 0.03;
  spec.cutoff = 0.0;  // set per sweep point
  const double beta = 2.0;
  // tail weight e^{-beta(cutoff - mu)} ~ 2e-9 at the base cutoff
  const std::vector<double> cutoffs = {10.03, 20.06, 40.12};
  const SweepReport report = cutoff_sweep(spec, beta, cutoffs);

  REQUIRE(report.records.size() == 3);
  CHECK(report.max_chi_regularized_drift() <= 1e-8);
  for (const SweepRecord& rec : report.records) {
    CHECK(rec.identity_deviation <= 1e-9);
  }
  // Both energy-window diagnostics saturate: the occupancy fluctuation
  // (rho rho')^{1/2} cuts every mode away from the Fermi level.
  const double mix_ratio =
      report.records[2].diagnostics.d_mix / report.records[0].diagnostics.d_mix;
  const double noise_ratio =
      report.records[2].diagnostics.d_noise / report.records[0].diagnostics.d_noise;
  CHECK(mix_ratio == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(noise_ratio == doctest::Approx(1.0).epsilon(1e-3));
  // while the raw lead charge keeps growing with the cutoff
  CHECK(report.records[2].tr_rho_q > report.records[0].tr_rho_q + 1.0);
}

TEST_CASE("lead-length sweep: lead fluctuation grows, junction noise saturates") {
  // Position-resolved junction: U'QU - Q has rank <= 2, so the transported
  // fluctuation d_noise is pinned while the lead charge variance, and with
  // it d_mix, grows with the lead length.
  const ScatteringMatrix s = ScatteringMatrix::from_transmission(0.4);
  std::vector<TraceClassDiagnostics> diags;
  std::vector<int> lengths = {8, 16, 32};
  for (int sites : lengths) {
    const QuantumModel model = lattice_junction_model(sites, s, 2.0, 0.1, 0.1);
    CHECK(model.commuting);
    CHECK(model.q_is_projection);
    const ComplexMatrix delta = model.U.adjoint() * model.Q * model.U - model.Q;
    CHECK(trace_norm(delta) <= 2.0 + 1e-9);  // junction-localized rearrangement
    diags.push_back(trace_class_diagnostics(model));
  }
  CHECK(diags[1].d_mix > 1.7 * diags[0].d_mix);
  CHECK(diags[2].d_mix > 1.7 * diags[1].d_mix);
  CHECK(diags[2].d_noise <= 1.2 * diags[0].d_noise + 1e-9);
}

TEST_CASE("cutoff sweep rejects unsorted cutoffs") {
  const TwoCircleSpec spec = sweep_spec(0.5, 3);
  CHECK_THROWS_AS((void)cutoff_sweep(spec, std::nullopt, {2 * spec.cutoff, spec.cutoff}),
                  fcs::Error);
}
