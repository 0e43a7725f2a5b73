#include "fcs/matrix_kernel.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include "fcs/errors.hpp"

namespace fcs {

namespace {

void check_input(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorKind::InvalidArgument, "matrix is not square");
  }
  if (!all_finite(m)) {
    throw Error(ErrorKind::InvalidArgument, "matrix has NaN/Inf entries");
  }
}

double hermiticity_deviation(const ComplexMatrix& m) {
  return max_abs(m - m.adjoint());
}

}  // namespace

HermitianEig hermitian_eig(const ComplexMatrix& m) {
  check_input(m);
  const double dev = hermiticity_deviation(m);
  if (dev > tol::hermitian) {
    std::ostringstream os;
    os << "max |M - M'| = " << dev << " exceeds " << tol::hermitian;
    throw Error(ErrorKind::NotHermitian, os.str());
  }
  ComplexMatrix sym = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::SingularMatrix, "eigensolver failed to converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

ComplexMatrix matrix_function(const ComplexMatrix& h, const std::function<double(double)>& f) {
  return matrix_function(h, [&f](double x) { return Complex(f(x), 0.0); });
}

ComplexMatrix matrix_function(const ComplexMatrix& h, const std::function<Complex(double)>& f) {
  HermitianEig eig = hermitian_eig(h);
  ComplexVector mapped(eig.eigenvalues.size());
  for (Eigen::Index i = 0; i < mapped.size(); ++i) mapped[i] = f(eig.eigenvalues[i]);
  return eig.vectors * mapped.asDiagonal() * eig.vectors.adjoint();
}

ComplexMatrix unitary_exp(const ComplexMatrix& h, double scale) {
  return unitary_exp(hermitian_eig(h), scale);
}

ComplexMatrix unitary_exp(const HermitianEig& eig, double scale) {
  ComplexVector phases(eig.eigenvalues.size());
  for (Eigen::Index i = 0; i < phases.size(); ++i) {
    phases[i] = std::polar(1.0, scale * eig.eigenvalues[i]);
  }
  return eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
}

ComplexMatrix general_exp(const ComplexMatrix& m) {
  check_input(m);
  return m.exp();
}

LogDet log_det(const ComplexMatrix& m) {
  check_input(m);
  Eigen::PartialPivLU<ComplexMatrix> lu(m);
  double log_mod = 0.0;
  double phase = 0.0;
  const auto& diag = lu.matrixLU().diagonal();
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    const Complex pivot = diag[i];
    const double mag = std::abs(pivot);
    if (mag == 0.0 || !std::isfinite(std::log(mag))) {
      throw Error(ErrorKind::SingularMatrix, "pivot underflowed to zero");
    }
    log_mod += std::log(mag);
    phase += std::arg(pivot);
  }
  if (lu.permutationP().determinant() < 0) phase += kPi;
  // Fold to the principal branch (-pi, pi].
  phase = std::remainder(phase, kTwoPi);
  if (phase <= -kPi) phase += kTwoPi;
  return {log_mod, phase, true};
}

Complex det(const ComplexMatrix& m) { return log_det(m).value(); }

double trace_norm(const ComplexMatrix& m) {
  check_input(m);
  if (m.rows() == 0) return 0.0;
  Eigen::BDCSVD<ComplexMatrix> svd(m);
  return svd.singularValues().sum();
}

double operator_norm(const ComplexMatrix& m) {
  check_input(m);
  if (m.rows() == 0) return 0.0;
  Eigen::BDCSVD<ComplexMatrix> svd(m);
  return svd.singularValues().maxCoeff();
}

}  // namespace fcs
