#pragma once

#include <complex>

#include <doctest.h>

#include "fcs/quantum_model.hpp"
#include "fcs/types.hpp"

namespace fcs::test {

/// Two-mode junction: mode 1 occupied, mode 0 empty and measured; a rotation
/// by theta transfers with probability sin^2(theta). chi = 1 - T + T e^{i lam}.
inline QuantumModel two_mode_transfer(double theta) {
  ComplexMatrix u(2, 2);
  u << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  ComplexMatrix rho = ComplexMatrix::Zero(2, 2);
  rho(1, 1) = 1.0;
  ComplexMatrix q = ComplexMatrix::Zero(2, 2);
  q(0, 0) = 1.0;
  return QuantumModel::create(u, rho, q);
}

inline QuantumModel identity_model(const QuantumModel& base) {
  return QuantumModel::create(ComplexMatrix::Identity(base.dim, base.dim), base.rho, base.Q);
}

}  // namespace fcs::test
