#pragma once

#include "fcs/distribution.hpp"
#include "fcs/quantum_model.hpp"
#include "fcs/types.hpp"

namespace fcs::fock {

inline constexpr int kMaxSecondQuantizationDim = 14;  // dense 2^d operators
inline constexpr int kMaxOracleDim = 12;

/// Dense operator on the 2^d-dimensional Fock space. Basis states are
/// occupation bitmasks ordered by integer value; bit i = mode i. Creation
/// operators are ordered by ascending mode index, so a matrix element of
/// Gamma picks up no sign beyond the minor determinant.
using FockOperator = ComplexMatrix;

Eigen::Index fock_space_size(int d);

int occupation(std::size_t bitmask);

/// Multiplicative second quantization: <S|Gamma(M)|T> = det M[S, T] on equal
/// particle number, 0 otherwise. Defined for any square M. Parallel over rows.
FockOperator gamma(const ComplexMatrix& m);

/// Serial reference for gamma; same values, plain loop.
FockOperator gamma_reference(const ComplexMatrix& m);

/// Additive second quantization dGamma(A) = sum_ij A_ij a^dag_i a_j.
FockOperator dgamma(const ComplexMatrix& a);

/// Tr Gamma(M) = sum of all principal minors of M; equals det(1 + M).
Complex trace_gamma(const ComplexMatrix& m);

/// Quasi-free many-body state of a 1-particle density matrix: the tensor
/// product of (1-nu, nu) two-level states over the eigenmodes of rho.
/// Positive, unit trace; equals Gamma(rho/rho')/Tr Gamma(rho/rho') whenever
/// 0 < rho < 1.
FockOperator many_body_state(const ComplexMatrix& rho);

/// Probability of the two-measurement history (initial charge i, final
/// charge j), evaluated literally with the spectral projections of dGamma(Q).
/// Requires Q to be a projection so the charge spectrum is integer.
struct TransferWeights {
  int charge_rank = 0;   // dGamma(Q) spectrum is {0..charge_rank}
  RealMatrix weights;    // (initial, final), (charge_rank+1)^2

  CountingDistribution distribution() const;
};

TransferWeights transfer_weights(const QuantumModel& model);

/// Two-measurement generating function from the literal history sum;
/// the ground truth every determinant formula is checked against.
Complex chi_oracle(const QuantumModel& model, double lambda);

CountingDistribution distribution_oracle(const QuantumModel& model);

}  // namespace fcs::fock
