#pragma once

#include <cstdint>
#include <string>

#include "fcs/types.hpp"

namespace fcs {

/// Transport model at the single-particle level: evolution U, initial
/// occupation rho (0 <= rho <= 1) and the charge observable Q of the
/// distinguished lead. The flags are measured properties, recomputed
/// whenever a model is assembled.
struct QuantumModel {
  int dim = 0;
  ComplexMatrix U;
  ComplexMatrix rho;
  ComplexMatrix Q;

  bool q_is_projection = false;  // |Q^2 - Q| within tolerance
  bool commuting = false;        // |[Q, rho]| within tolerance
  bool pure = false;             // |rho^2 - rho| within tolerance

  /// Measures the flags and validates basic shape. Eigenvalues of rho within
  /// the clamp window of [0, 1] are clamped; anything further out throws
  /// SpectrumOutOfRange. Throws InvalidArgument on non-unitary U.
  static QuantumModel create(ComplexMatrix U, ComplexMatrix rho, ComplexMatrix Q);
};

struct ValidationReport {
  double unitarity_residual = 0.0;
  double rho_min_eigenvalue = 0.0;
  double rho_max_eigenvalue = 0.0;
  double q_hermiticity_residual = 0.0;
  double q_projection_residual = 0.0;
  double commutator_norm = 0.0;
  double purity_residual = 0.0;

  bool unitarity_ok = false;
  bool rho_bounds_ok = false;
  bool q_ok = false;

  bool all_ok() const { return unitarity_ok && rho_bounds_ok && q_ok; }
  std::string summary() const;
};

/// Measures every model invariant. Total: never throws on finite inputs.
ValidationReport validate(const QuantumModel& model);

/// (1 + e^{beta (H - mu)})^{-1}. Hermitian, spectrum in (0, 1).
ComplexMatrix fermi_dirac(const ComplexMatrix& h, double beta, double mu);

/// Zero-temperature limit: projection onto eigenstates with energy below mu.
/// Throws DegenerateFermiLevel when an eigenvalue sits within 1e-9 of mu.
ComplexMatrix fermi_sea(const ComplexMatrix& h, double mu);

enum class ModelKind {
  PureCommuting,   // rho a diagonal 0/1 occupation in the Q basis
  MixedCommuting,  // rho diagonal with spectrum in (0, 1)
  MixedGeneral,    // rho generic Hermitian with spectrum in (0, 1)
};

ModelKind model_kind_from_string(const std::string& name);
const char* model_kind_name(ModelKind kind);

/// Deterministic test-instance generator: U Haar-distributed, Q a diagonal
/// 0/1 projection of rank dim/2, rho per the kind. Identical seeds produce
/// identical models on every platform.
QuantumModel random_model(std::uint64_t seed, int dim, ModelKind kind);

/// Haar unitary via QR of a complex Gaussian with the R diagonal phase-fixed.
ComplexMatrix haar_unitary(std::uint64_t seed, int dim);

}  // namespace fcs
