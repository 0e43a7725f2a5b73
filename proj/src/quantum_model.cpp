#include "fcs/quantum_model.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/QR>

#include "fcs/errors.hpp"
#include "fcs/matrix_kernel.hpp"

namespace fcs {

namespace {

/// Box-Muller on explicit 53-bit uniforms. std::normal_distribution is
/// implementation-defined, which would break recorded seeds across toolchains.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

  double uniform() {
    return (engine_() >> 11) * 0x1.0p-53;  // [0, 1)
  }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(kTwoPi * u2);
    have_spare_ = true;
    return r * std::cos(kTwoPi * u2);
  }

  Complex complex_gaussian() {
    const double re = gaussian();
    const double im = gaussian();
    return Complex(re, im) / std::sqrt(2.0);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

ComplexMatrix haar_from_source(GaussianSource& source, int dim) {
  ComplexMatrix z(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) z(i, j) = source.complex_gaussian();
  Eigen::HouseholderQR<ComplexMatrix> qr(z);
  ComplexMatrix q = qr.householderQ();
  ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j) {
    const Complex d = r(j, j);
    const double mag = std::abs(d);
    q.col(j) *= (mag > 0.0) ? d / mag : Complex(1.0, 0.0);
  }
  return q;
}

}  // namespace

QuantumModel QuantumModel::create(ComplexMatrix U, ComplexMatrix rho, ComplexMatrix Q) {
  QuantumModel m;
  m.dim = static_cast<int>(U.rows());
  if (U.rows() != U.cols() || rho.rows() != rho.cols() || Q.rows() != Q.cols() ||
      rho.rows() != U.rows() || Q.rows() != U.rows() || m.dim <= 0) {
    throw Error(ErrorKind::InvalidArgument, "U, rho, Q must be square with a common dimension");
  }
  if (!all_finite(U) || !all_finite(rho) || !all_finite(Q)) {
    throw Error(ErrorKind::InvalidArgument, "model matrices must be finite");
  }

  const double unit_dev = max_abs(ComplexMatrix(U.adjoint() * U) -
                                  ComplexMatrix::Identity(m.dim, m.dim));
  if (unit_dev > tol::unitary) {
    std::ostringstream os;
    os << "max |U'U - 1| = " << unit_dev;
    throw Error(ErrorKind::InvalidArgument, os.str());
  }

  // Clamp rho eigenvalues within the tolerance window; reject beyond it.
  HermitianEig eig = hermitian_eig(rho);
  const double lo = eig.eigenvalues.minCoeff();
  const double hi = eig.eigenvalues.maxCoeff();
  if (lo < -tol::rho_clamp || hi > 1.0 + tol::rho_clamp) {
    std::ostringstream os;
    os << "rho spectrum [" << lo << ", " << hi << "] outside [0, 1]";
    throw Error(ErrorKind::SpectrumOutOfRange, os.str());
  }
  if (lo < 0.0 || hi > 1.0) {
    RealVector clamped = eig.eigenvalues.cwiseMax(0.0).cwiseMin(1.0);
    rho = eig.vectors * clamped.cast<Complex>().asDiagonal() * eig.vectors.adjoint();
    rho = 0.5 * (rho + ComplexMatrix(rho.adjoint()));
  }

  if (max_abs(Q - Q.adjoint()) > tol::hermitian) {
    throw Error(ErrorKind::NotHermitian, "Q must be Hermitian");
  }

  m.U = std::move(U);
  m.rho = std::move(rho);
  m.Q = std::move(Q);
  m.q_is_projection = max_abs(ComplexMatrix(m.Q * m.Q) - m.Q) <= tol::projection;
  m.commuting = max_abs(ComplexMatrix(m.Q * m.rho) - ComplexMatrix(m.rho * m.Q)) <= tol::commutator;
  m.pure = max_abs(ComplexMatrix(m.rho * m.rho) - m.rho) <= tol::projection;
  return m;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  os << "unitarity " << (unitarity_ok ? "pass" : "FAIL") << " (" << unitarity_residual << "); "
     << "rho bounds " << (rho_bounds_ok ? "pass" : "FAIL") << " [" << rho_min_eigenvalue << ", "
     << rho_max_eigenvalue << "]; "
     << "Q " << (q_ok ? "pass" : "FAIL") << " (herm " << q_hermiticity_residual << ", proj "
     << q_projection_residual << "); "
     << "|[Q,rho]| = " << commutator_norm;
  return os.str();
}

ValidationReport validate(const QuantumModel& model) {
  ValidationReport r;
  const int d = model.dim;
  r.unitarity_residual = max_abs(ComplexMatrix(model.U.adjoint() * model.U) -
                                 ComplexMatrix::Identity(d, d));
  r.unitarity_ok = r.unitarity_residual <= tol::unitary;

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (model.rho + ComplexMatrix(model.rho.adjoint())));
  r.rho_min_eigenvalue = es.eigenvalues().minCoeff();
  r.rho_max_eigenvalue = es.eigenvalues().maxCoeff();
  r.rho_bounds_ok = r.rho_min_eigenvalue >= -tol::rho_clamp &&
                    r.rho_max_eigenvalue <= 1.0 + tol::rho_clamp;

  r.q_hermiticity_residual = max_abs(model.Q - model.Q.adjoint());
  r.q_projection_residual = max_abs(ComplexMatrix(model.Q * model.Q) - model.Q);
  r.q_ok = r.q_hermiticity_residual <= tol::hermitian &&
           (!model.q_is_projection || r.q_projection_residual <= tol::projection);

  r.commutator_norm =
      max_abs(ComplexMatrix(model.Q * model.rho) - ComplexMatrix(model.rho * model.Q));
  r.purity_residual = max_abs(ComplexMatrix(model.rho * model.rho) - model.rho);
  return r;
}

ComplexMatrix fermi_dirac(const ComplexMatrix& h, double beta, double mu) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw Error(ErrorKind::InvalidArgument, "beta must be finite and positive");
  }
  return matrix_function(h, std::function<double(double)>([beta, mu](double x) {
    const double a = beta * (x - mu);
    // Evaluate on the decaying side to avoid overflow.
    if (a >= 0.0) {
      const double e = std::exp(-a);
      return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(a));
  }));
}

ComplexMatrix fermi_sea(const ComplexMatrix& h, double mu) {
  HermitianEig eig = hermitian_eig(h);
  for (Eigen::Index i = 0; i < eig.eigenvalues.size(); ++i) {
    if (std::abs(eig.eigenvalues[i] - mu) < tol::fermi_degenerate) {
      std::ostringstream os;
      os << "eigenvalue " << eig.eigenvalues[i] << " within " << tol::fermi_degenerate
         << " of mu = " << mu << "; perturb mu";
      throw Error(ErrorKind::DegenerateFermiLevel, os.str());
    }
  }
  ComplexVector occ(eig.eigenvalues.size());
  for (Eigen::Index i = 0; i < occ.size(); ++i) {
    occ[i] = eig.eigenvalues[i] <= mu ? 1.0 : 0.0;
  }
  ComplexMatrix p = eig.vectors * occ.asDiagonal() * eig.vectors.adjoint();
  return 0.5 * (p + ComplexMatrix(p.adjoint()));
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "pure-commuting") return ModelKind::PureCommuting;
  if (name == "mixed-commuting") return ModelKind::MixedCommuting;
  if (name == "mixed-general") return ModelKind::MixedGeneral;
  throw Error(ErrorKind::UnknownKind, "model kind '" + name + "'");
}

const char* model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::PureCommuting: return "pure-commuting";
    case ModelKind::MixedCommuting: return "mixed-commuting";
    case ModelKind::MixedGeneral: return "mixed-general";
  }
  return "?";
}

ComplexMatrix haar_unitary(std::uint64_t seed, int dim) {
  GaussianSource source(seed);
  return haar_from_source(source, dim);
}

QuantumModel random_model(std::uint64_t seed, int dim, ModelKind kind) {
  if (dim < 2) throw Error(ErrorKind::InvalidArgument, "random_model needs dim >= 2");
  GaussianSource source(seed);

  ComplexMatrix u = haar_from_source(source, dim);

  // Q: diagonal projection onto the first dim/2 modes.
  const int rank = dim / 2;
  ComplexMatrix q = ComplexMatrix::Zero(dim, dim);
  for (int i = 0; i < rank; ++i) q(i, i) = 1.0;

  ComplexMatrix rho = ComplexMatrix::Zero(dim, dim);
  switch (kind) {
    case ModelKind::PureCommuting: {
      int occupied = 0;
      for (int i = 0; i < dim; ++i) {
        const bool occ = source.uniform() < 0.5;
        rho(i, i) = occ ? 1.0 : 0.0;
        occupied += occ ? 1 : 0;
      }
      if (occupied == 0) rho(dim - 1, dim - 1) = 1.0;   // keep at least one particle
      if (occupied == dim) rho(dim - 1, dim - 1) = 0.0; // and one hole
      break;
    }
    case ModelKind::MixedCommuting: {
      for (int i = 0; i < dim; ++i) rho(i, i) = 0.05 + 0.9 * source.uniform();
      break;
    }
    case ModelKind::MixedGeneral: {
      ComplexMatrix v = haar_from_source(source, dim);
      ComplexVector occ(dim);
      for (int i = 0; i < dim; ++i) occ[i] = 0.05 + 0.9 * source.uniform();
      rho = v * occ.asDiagonal() * v.adjoint();
      rho = 0.5 * (rho + ComplexMatrix(rho.adjoint()));
      break;
    }
  }

  return QuantumModel::create(std::move(u), std::move(rho), std::move(q));
}

}  // namespace fcs
