#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "fcs/distribution.hpp"
#include "fcs/moment_cumulant.hpp"
#include "fcs/quantum_model.hpp"
#include "fcs/types.hpp"

namespace fcs {

/// The determinant formulas for the generating function chi(lambda).
enum class ChiVariant {
  LesLev,             // det(rho' + e^{i lam U'QU} e^{-i lam Q} rho), needs [Q,rho]=0
  Regularized,        // det(e^{-i lam rU qU} rho' e^{i lam rQ} + e^{i lam r'U qU} rho e^{-i lam r'Q})
  SingleMeasurement,  // det(rho' + e^{i lam (U'QU - Q)} rho)
  Collapse,           // two-measurement without [Q,rho]=0; exact finite tau sum
  SpinCoupling,       // spin-1/2 coupling protocol; quasiprobability in general
};

ChiVariant chi_variant_from_string(const std::string& name);
const char* chi_variant_name(ChiVariant variant);

Complex chi_les_lev(const QuantumModel& model, double lambda);
Complex chi_regularized(const QuantumModel& model, double lambda);
Complex chi_single_measurement(const QuantumModel& model, double lambda);
Complex chi_collapse(const QuantumModel& model, double lambda);
Complex chi_spin_coupling(const QuantumModel& model, double lambda);

/// Reusable per-model workspace: eigendecompositions of Q and rho and the
/// model-constant products are computed once and shared across lambda.
/// Evaluation is const and safe to call from multiple threads.
class ChiEvaluator {
 public:
  ChiEvaluator(const QuantumModel& model, ChiVariant variant);
  ~ChiEvaluator();
  ChiEvaluator(ChiEvaluator&&) noexcept;
  ChiEvaluator& operator=(ChiEvaluator&&) noexcept;

  Complex operator()(double lambda) const;

  ChiVariant variant() const;
  int dim() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Plain per-lambda transcription of the formulas: no caching, no structure
/// detection, no parallelism. The reference the optimized paths are tested
/// and benchmarked against.
Complex chi_reference(const QuantumModel& model, ChiVariant variant, double lambda);

using ChiFunction = std::function<Complex(double)>;

/// chi on the uniform grid lambda_k = 2 pi k / M with the log branch
/// continued from lambda = 0.
struct ChiSamples {
  std::vector<double> lambdas;
  std::vector<Complex> values;
  std::vector<Complex> log_values;
  bool log_unwrapped = false;

  int grid_size() const { return static_cast<int>(lambdas.size()); }

  /// Builds samples from precomputed values; the log branch is continued
  /// where possible and left on the principal branch (log_unwrapped = false)
  /// where the phase genuinely jumps, e.g. across a zero of chi.
  static ChiSamples from_values(std::vector<Complex> values);
};

/// Samples a model variant on the grid (parallel over grid points). Throws
/// UnwrapFailure when consecutive phases jump by >= pi; a grid of at least
/// 2*dim + 2 points keeps slope-induced jumps below pi.
ChiSamples sample_chi(const QuantumModel& model, ChiVariant variant, int grid_size);

/// Serial reference for sample_chi (identical values, plain loop).
ChiSamples sample_chi_reference(const QuantumModel& model, ChiVariant variant, int grid_size);

ChiSamples sample_chi_function(const ChiFunction& chi, int grid_size);

inline constexpr int kMaxCumulantOrder = 6;

/// Cumulants <<n^k>> = (-i d/dlam)^k log chi |_0 for k = 1..k_max, via
/// central differences of the continued log on a dedicated local grid
/// (base step 1e-2) with 4-level Richardson extrapolation. Throws
/// StepUnderflow when the extrapolation fails to settle.
CumulantVector cumulants_from_chi(const ChiFunction& chi, int k_max);

/// Same extraction on the 2 pi grid of a ChiSamples (steps are grid
/// multiples); needs the unwrapped branch and a grid fine enough to supply
/// the stencil.
CumulantVector cumulants_from_chi(const ChiSamples& samples, int k_max);

CumulantVector cumulants(const QuantumModel& model, ChiVariant variant, int k_max);

/// Exact moments of a distribution converted through the partition algebra.
CumulantVector cumulants_from_distribution(const CountingDistribution& dist, int k_max);

/// First two cumulants straight from the trace formulas: kappa1 = tr rho dQ,
/// kappa2 = tr rho dQ (1 - rho) dQ.
CumulantVector cumulants_trace_formula(const QuantumModel& model);

/// p_n by inverse discrete Fourier transform of the sampled chi. Entries
/// below -1e-9 set the quasiprobability flag.
CountingDistribution distribution_from_chi(const ChiSamples& samples);

/// Quasiprobability of the spin-coupling protocol. The half-angle couplings
/// make chi 4 pi periodic on non-commuting states, so the transfer lattice is
/// half-integer: entry m counts transfers of m/2 charges. Implemented by
/// sampling chi(2 lambda') on the standard grid.
CountingDistribution spin_coupling_quasiprobability(const QuantumModel& model, int grid_size);

struct MeanCharge {
  double naive = 0.0;        // tr rho (U'QU - Q)
  double regularized = 0.0;  // tr (rho - U'rhoU) U'QU
};

MeanCharge mean_charge(const QuantumModel& model);

struct NoiseSplit {
  double thermal = 0.0;  // tr(rho rho' dQ^2)
  double shot = 0.0;     // 1/2 tr((i[dQ, rho])^2)

  double total() const { return thermal + shot; }
};

NoiseSplit noise_split(const QuantumModel& model);

/// <<Q^2>> = tr rho dQ (1 - rho) dQ, the trace form of the second cumulant.
double second_cumulant_trace(const QuantumModel& model);

}  // namespace fcs
