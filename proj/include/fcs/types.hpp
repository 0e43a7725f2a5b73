#pragma once

#include <complex>
#include <Eigen/Dense>

namespace fcs {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Tolerances shared across modules. Values are contracts, not knobs.
namespace tol {
inline constexpr double hermitian = 1e-10;      // max-entry |M - M'|
inline constexpr double unitary = 1e-10;        // max-entry |U'U - 1|
inline constexpr double projection = 1e-10;     // max-entry |Q^2 - Q|
inline constexpr double commutator = 1e-10;     // max-entry |[Q, rho]|
inline constexpr double rho_clamp = 1e-12;      // eigenvalue window around [0, 1]
inline constexpr double fermi_degenerate = 1e-9; // |eigenvalue - mu| guard
}  // namespace tol

inline bool all_finite(const ComplexMatrix& m) {
  return m.array().real().isFinite().all() && m.array().imag().isFinite().all();
}

inline double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

}  // namespace fcs
