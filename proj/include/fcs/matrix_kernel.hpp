#pragma once

#include <functional>

#include "fcs/types.hpp"

namespace fcs {

struct HermitianEig {
  RealVector eigenvalues;  // ascending
  ComplexMatrix vectors;   // columns, unitary
};

/// Determinant in log form: det = exp(log_modulus + i*phase).
/// `principal` marks a phase folded into (-pi, pi]; path-continued phases
/// (e.g. from log-det differences) clear it.
struct LogDet {
  double log_modulus = 0.0;
  double phase = 0.0;
  bool principal = true;

  Complex value() const {
    return std::exp(Complex(log_modulus, 0.0)) * Complex(std::cos(phase), std::sin(phase));
  }
};

/// Eigendecomposition of a Hermitian matrix. Inputs within the hermiticity
/// tolerance are symmetrized as (M + M')/2 before factorization; anything
/// further off throws NotHermitian with the offending deviation.
HermitianEig hermitian_eig(const ComplexMatrix& m);

/// f(H) = V f(diag) V' for Hermitian H. Real-valued f preserves hermiticity.
ComplexMatrix matrix_function(const ComplexMatrix& h, const std::function<double(double)>& f);
ComplexMatrix matrix_function(const ComplexMatrix& h, const std::function<Complex(double)>& f);

/// exp(i*scale*H) for Hermitian H; unitary by construction.
ComplexMatrix unitary_exp(const ComplexMatrix& h, double scale);
ComplexMatrix unitary_exp(const HermitianEig& eig, double scale);

/// exp(M) for a general square matrix (Pade scaling and squaring).
ComplexMatrix general_exp(const ComplexMatrix& m);

/// log|det| and phase accumulated pivot by pivot over a partial-pivot LU,
/// so the determinant never overflows. Throws SingularMatrix on a zero pivot.
LogDet log_det(const ComplexMatrix& m);

/// det(M) through log_det; safe only when the magnitude fits a double.
Complex det(const ComplexMatrix& m);

/// Sum of singular values (finite-dimensional trace norm).
double trace_norm(const ComplexMatrix& m);

double operator_norm(const ComplexMatrix& m);

}  // namespace fcs
