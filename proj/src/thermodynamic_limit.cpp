#include "fcs/thermodynamic_limit.hpp"

#include <algorithm>
#include <cmath>

#include "fcs/counting_statistics.hpp"
#include "fcs/errors.hpp"
#include "fcs/matrix_kernel.hpp"

namespace fcs {

double regularization_identity_check(const QuantumModel& model,
                                     const std::vector<double>& lambda_probes) {
  const ComplexMatrix q_u = model.U.adjoint() * model.Q * model.U;
  const ComplexMatrix rho_u = model.U.adjoint() * model.rho * model.U;
  const double compensation =
      ((rho_u * q_u).trace() - (model.rho * model.Q).trace()).real();

  ChiEvaluator reg(model, ChiVariant::Regularized);
  ChiEvaluator naive(model, ChiVariant::LesLev);
  double max_dev = 0.0;
  for (double lam : lambda_probes) {
    const Complex reconciled = reg(lam) * std::polar(1.0, lam * compensation);
    max_dev = std::max(max_dev, std::abs(reconciled - naive(lam)));
  }
  return max_dev;
}

TraceClassDiagnostics trace_class_diagnostics(const QuantumModel& model) {
  const auto sqrt_clamped = [](double x) { return std::sqrt(std::max(x, 0.0)); };

  const ComplexMatrix sqrt_rho =
      matrix_function(model.rho, std::function<double(double)>(sqrt_clamped));
  const ComplexMatrix rho_prime =
      ComplexMatrix::Identity(model.dim, model.dim) - model.rho;
  const ComplexMatrix sqrt_rho_prime =
      matrix_function(rho_prime, std::function<double(double)>(sqrt_clamped));
  const ComplexMatrix sqrt_mix = matrix_function(
      model.rho,
      std::function<double(double)>([](double x) { return std::sqrt(std::max(x * (1.0 - x), 0.0)); }));

  TraceClassDiagnostics d;
  d.d_rho = trace_norm(model.rho - model.U * model.rho * model.U.adjoint());
  d.d_sqrt = trace_norm(sqrt_rho - model.U * sqrt_rho * model.U.adjoint()) +
             trace_norm(sqrt_rho_prime - model.U * sqrt_rho_prime * model.U.adjoint());
  d.d_mix = trace_norm(sqrt_mix * model.Q);
  d.d_noise = trace_norm((model.U.adjoint() * model.Q * model.U - model.Q) * sqrt_mix);
  return d;
}

double SweepReport::max_chi_regularized_drift() const {
  double drift = 0.0;
  if (records.empty()) return drift;
  for (size_t p = 0; p < lambda_probes.size(); ++p) {
    for (const SweepRecord& rec : records) {
      drift = std::max(drift,
                       std::abs(rec.chi_regularized[p] - records.front().chi_regularized[p]));
    }
  }
  return drift;
}

SweepReport cutoff_sweep(const TwoCircleSpec& spec, std::optional<double> beta,
                         const std::vector<double>& cutoffs,
                         const std::vector<double>& lambda_probes) {
  if (cutoffs.empty()) throw Error(ErrorKind::InvalidArgument, "sweep needs at least one cutoff");
  if (!std::is_sorted(cutoffs.begin(), cutoffs.end())) {
    throw Error(ErrorKind::InvalidArgument, "cutoffs must ascend");
  }

  SweepReport report;
  report.lambda_probes = lambda_probes;
  report.records.resize(cutoffs.size());

  // Exceptions must not unwind through the parallel region.
  std::exception_ptr failure;
  const int count = static_cast<int>(cutoffs.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < count; ++i) {
    try {
      TwoCircleSpec local = spec;
      local.cutoff = cutoffs[static_cast<size_t>(i)];
      const QuantumModel model =
          beta ? thermal_two_circle(local, *beta) : build_two_circle(local);

      SweepRecord rec;
      rec.cutoff = local.cutoff;
      rec.dim = model.dim;

      ChiEvaluator reg(model, ChiVariant::Regularized);
      ChiEvaluator naive(model, ChiVariant::LesLev);
      for (double lam : lambda_probes) {
        rec.chi_regularized.push_back(reg(lam));
        rec.chi_naive.push_back(naive(lam));
      }

      const ComplexMatrix q_u = model.U.adjoint() * model.Q * model.U;
      const ComplexMatrix rho_u = model.U.adjoint() * model.rho * model.U;
      rec.tr_rho_q = (model.rho * model.Q).trace().real();
      rec.tr_compensation = ((rho_u * q_u).trace() - (model.rho * model.Q).trace()).real();

      double dev = 0.0;
      for (size_t p = 0; p < lambda_probes.size(); ++p) {
        const Complex reconciled =
            rec.chi_regularized[p] *
            std::polar(1.0, lambda_probes[p] * rec.tr_compensation);
        dev = std::max(dev, std::abs(reconciled - rec.chi_naive[p]));
      }
      rec.identity_deviation = dev;
      rec.diagnostics = trace_class_diagnostics(model);

      report.records[static_cast<size_t>(i)] = std::move(rec);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return report;
}

}  // namespace fcs
