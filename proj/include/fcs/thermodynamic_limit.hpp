#pragma once

#include <optional>
#include <vector>

#include "fcs/quantum_model.hpp"
#include "fcs/scattering_models.hpp"
#include "fcs/types.hpp"

namespace fcs {

inline const std::vector<double> kDefaultLambdaProbes = {kPi / 4, kPi / 2, kPi, 3 * kPi / 2};

/// max over probes of |chi_regularized(l) e^{i l tr(rho_U Q_U - rho Q)} -
/// chi_les_lev(l)|. Exact (roundoff) at finite dimension, where the
/// compensating trace vanishes by cyclicity. Needs the commuting flag, as
/// the Levitov-Lesovik side does.
double regularization_identity_check(const QuantumModel& model,
                                     const std::vector<double>& lambda_probes = kDefaultLambdaProbes);

/// Finite-dimensional surrogates of the trace-class hypotheses.
struct TraceClassDiagnostics {
  double d_rho = 0.0;    // |rho - U rho U'|_1
  double d_sqrt = 0.0;   // |sqrt(rho) - U sqrt(rho) U'|_1 + same for rho'
  double d_mix = 0.0;    // |(rho rho')^{1/2} Q|_1
  double d_noise = 0.0;  // |(U'QU - Q)(rho rho')^{1/2}|_1
};

TraceClassDiagnostics trace_class_diagnostics(const QuantumModel& model);

struct SweepRecord {
  double cutoff = 0.0;
  int dim = 0;
  std::vector<Complex> chi_regularized;  // per probe
  std::vector<Complex> chi_naive;        // Levitov-Lesovik, per probe
  double tr_rho_q = 0.0;
  double tr_compensation = 0.0;  // tr(rho_U Q_U - rho Q)
  double identity_deviation = 0.0;
  TraceClassDiagnostics diagnostics;
};

struct SweepReport {
  std::vector<double> lambda_probes;
  std::vector<SweepRecord> records;  // ascending cutoff

  double max_chi_regularized_drift() const;
};

/// Rebuilds the two-circle model at each cutoff (thermal when beta is set)
/// and records the regularized and naive determinants, the compensating
/// traces and the trace-class diagnostics. Records are independent and
/// computed in parallel.
SweepReport cutoff_sweep(const TwoCircleSpec& spec, std::optional<double> beta,
                         const std::vector<double>& cutoffs,
                         const std::vector<double>& lambda_probes = kDefaultLambdaProbes);

}  // namespace fcs
