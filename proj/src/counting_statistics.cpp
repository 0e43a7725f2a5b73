#include "fcs/counting_statistics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <sstream>

#include "fcs/errors.hpp"
#include "fcs/matrix_kernel.hpp"

namespace fcs {

namespace {

bool strictly_diagonal(const ComplexMatrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (i != j && m(i, j) != Complex(0.0, 0.0)) return false;
    }
  }
  return true;
}

void require_commuting(const QuantumModel& model) {
  if (!model.commuting) {
    throw Error(ErrorKind::NonCommutingState,
                "formula assumes [Q, rho] = 0; model does not carry the commuting flag");
  }
}

void require_projection(const QuantumModel& model) {
  if (!model.q_is_projection) {
    throw Error(ErrorKind::NonIntegerSpectrum,
                "protocol needs integer charge spectrum: Q must be a projection");
  }
}

/// chi values are determinants that may legitimately vanish (a zero of chi
/// on the grid); a dead pivot is the value 0, not a failure.
Complex det_via_log(const ComplexMatrix& m) {
  try {
    return log_det(m).value();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::SingularMatrix) return {0.0, 0.0};
    throw;
  }
}

/// Phase continued to the branch nearest `prev`; fails on jumps >= pi.
struct ContinuedLog {
  Complex value;
  bool ok = false;
  double jump = 0.0;
};

ContinuedLog continue_log(Complex chi_value, double prev_phase) {
  ContinuedLog out;
  const double mag = std::abs(chi_value);
  if (!(mag > 0.0) || !std::isfinite(mag)) {
    out.ok = false;
    out.jump = kPi;
    return out;
  }
  const double raw = std::arg(chi_value);
  const double phase = raw + kTwoPi * std::round((prev_phase - raw) / kTwoPi);
  out.value = Complex(std::log(mag), phase);
  out.jump = std::abs(phase - prev_phase);
  out.ok = out.jump < kPi - 1e-9;
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Evaluator
// ---------------------------------------------------------------------------

struct ChiEvaluator::Impl {
  ChiVariant variant{};
  int dim = 0;

  ComplexMatrix U, rho, rho_prime;

  // strictly diagonal rho and Q: determinant formulas reduce to
  // entrywise phase scalings of U plus one LU per lambda.
  bool diagonal_path = false;
  RealVector q_diag, rho_diag;
  Complex det_u = 1.0;

  // generic paths
  HermitianEig q_eig;          // LesLev
  HermitianEig delta_eig;      // SingleMeasurement
  ComplexMatrix p1, p2, d1, d2;  // Regularized exponents (non-diagonal case)

  // Collapse / SpinCoupling: model rotated into the Q eigenbasis
  ComplexMatrix u_t, rho_t, rho_prime_t;
  RealVector q_t;
  std::vector<int> q_int;

  Complex eval(double lambda) const;
  Complex eval_les_lev(double lambda) const;
  Complex eval_regularized(double lambda) const;
  Complex eval_single(double lambda) const;
  Complex eval_collapse(double lambda) const;
  Complex eval_spin(double lambda) const;
};

ChiEvaluator::ChiEvaluator(const QuantumModel& model, ChiVariant variant)
    : impl_(std::make_unique<Impl>()) {
  Impl& im = *impl_;
  im.variant = variant;
  im.dim = model.dim;
  im.U = model.U;
  im.rho = model.rho;
  im.rho_prime = ComplexMatrix::Identity(model.dim, model.dim) - model.rho;

  const bool diag = strictly_diagonal(model.rho) && strictly_diagonal(model.Q);

  switch (variant) {
    case ChiVariant::LesLev: {
      require_commuting(model);
      if (diag) {
        im.diagonal_path = true;
        im.q_diag = model.Q.diagonal().real();
        im.rho_diag = model.rho.diagonal().real();
        im.det_u = log_det(model.U).value();
      } else {
        im.q_eig = hermitian_eig(model.Q);
      }
      break;
    }
    case ChiVariant::Regularized: {
      if (diag) {
        im.diagonal_path = true;
        im.q_diag = model.Q.diagonal().real();
        im.rho_diag = model.rho.diagonal().real();
        im.det_u = log_det(model.U).value();
      } else {
        const ComplexMatrix rq = model.rho * model.Q;
        const ComplexMatrix rpq = im.rho_prime * model.Q;
        im.d1 = rq;
        im.d2 = rpq;
        im.p1 = model.U.adjoint() * rq * model.U;
        im.p2 = model.U.adjoint() * rpq * model.U;
      }
      break;
    }
    case ChiVariant::SingleMeasurement: {
      const ComplexMatrix delta = model.U.adjoint() * model.Q * model.U - model.Q;
      im.delta_eig = hermitian_eig(delta);
      break;
    }
    case ChiVariant::Collapse:
    case ChiVariant::SpinCoupling: {
      if (variant == ChiVariant::Collapse) require_projection(model);
      HermitianEig qe = hermitian_eig(model.Q);
      im.q_t = qe.eigenvalues;
      im.u_t = qe.vectors.adjoint() * model.U * qe.vectors;
      im.rho_t = qe.vectors.adjoint() * model.rho * qe.vectors;
      im.rho_prime_t =
          ComplexMatrix::Identity(model.dim, model.dim) - im.rho_t;
      if (variant == ChiVariant::Collapse) {
        im.q_int.resize(static_cast<size_t>(model.dim));
        for (int i = 0; i < model.dim; ++i) {
          im.q_int[static_cast<size_t>(i)] = static_cast<int>(std::round(im.q_t[i]));
        }
      }
      break;
    }
  }
}

ChiEvaluator::~ChiEvaluator() = default;
ChiEvaluator::ChiEvaluator(ChiEvaluator&&) noexcept = default;
ChiEvaluator& ChiEvaluator::operator=(ChiEvaluator&&) noexcept = default;

ChiVariant ChiEvaluator::variant() const { return impl_->variant; }
int ChiEvaluator::dim() const { return impl_->dim; }

Complex ChiEvaluator::operator()(double lambda) const { return impl_->eval(lambda); }

Complex ChiEvaluator::Impl::eval(double lambda) const {
  switch (variant) {
    case ChiVariant::LesLev: return eval_les_lev(lambda);
    case ChiVariant::Regularized: return eval_regularized(lambda);
    case ChiVariant::SingleMeasurement: return eval_single(lambda);
    case ChiVariant::Collapse: return eval_collapse(lambda);
    case ChiVariant::SpinCoupling: return eval_spin(lambda);
  }
  return {};
}

Complex ChiEvaluator::Impl::eval_les_lev(double lambda) const {
  if (diagonal_path) {
    // det(rho' + U' e^{i lam Q} U e^{-i lam Q} rho)
    //   = det(U') det(e^{i lam Q} U e^{-i lam Q} rho + U rho')
    ComplexMatrix m(dim, dim);
    for (int k = 0; k < dim; ++k) {
      const Complex col_occ =
          std::polar(rho_diag[k], -lambda * q_diag[k]);  // (e^{-i lam Q} rho)_kk
      for (int j = 0; j < dim; ++j) {
        const Complex phase = std::polar(1.0, lambda * q_diag[j]);
        m(j, k) = U(j, k) * (phase * col_occ + (1.0 - rho_diag[k]));
      }
    }
    return std::conj(det_u) * det_via_log(m);
  }
  const ComplexMatrix e_plus = unitary_exp(q_eig, lambda);
  const ComplexMatrix b = U.adjoint() * e_plus * U * (e_plus.adjoint() * rho);
  return det_via_log(rho_prime + b);
}

Complex ChiEvaluator::Impl::eval_regularized(double lambda) const {
  if (diagonal_path) {
    // exponents rho Q and rho' Q are diagonal; conjugation by U moves the
    // phases onto rows of U:
    // chi = det(U') det(e^{-i lam d1} U rho' e^{i lam d1} + e^{i lam d2} U rho e^{-i lam d2})
    ComplexMatrix m(dim, dim);
    for (int j = 0; j < dim; ++j) {
      const double d1j = rho_diag[j] * q_diag[j];
      const double d2j = (1.0 - rho_diag[j]) * q_diag[j];
      const Complex row1 = std::polar(1.0, -lambda * d1j);
      const Complex row2 = std::polar(1.0, lambda * d2j);
      for (int k = 0; k < dim; ++k) {
        const double d1k = rho_diag[k] * q_diag[k];
        const double d2k = (1.0 - rho_diag[k]) * q_diag[k];
        const Complex t1 = row1 * std::polar(1.0 - rho_diag[k], lambda * d1k);
        const Complex t2 = row2 * std::polar(rho_diag[k], -lambda * d2k);
        m(j, k) = U(j, k) * (t1 + t2);
      }
    }
    return std::conj(det_u) * det_via_log(m);
  }
  const Complex i_lam(0.0, lambda);
  const ComplexMatrix term1 = general_exp(-i_lam * p1) * rho_prime * general_exp(i_lam * d1);
  const ComplexMatrix term2 = general_exp(i_lam * p2) * rho * general_exp(-i_lam * d2);
  return det_via_log(term1 + term2);
}

Complex ChiEvaluator::Impl::eval_single(double lambda) const {
  const ComplexMatrix e = unitary_exp(delta_eig, lambda);
  return det_via_log(rho_prime + e * rho);
}

Complex ChiEvaluator::Impl::eval_collapse(double lambda) const {
  // (1/M) sum_tau det(rho' + e^{i tau Q} U' e^{i lam Q} U e^{-i(lam+tau) Q} rho),
  // exact for integer charge once M > max transferable charge.
  const int m_tau = dim + 1;
  ComplexMatrix b(dim, dim);
  for (int j = 0; j < dim; ++j) {
    for (int k = 0; k < dim; ++k) {
      b(j, k) = std::conj(u_t(k, j));
    }
  }
  ComplexMatrix scaled = u_t;
  for (int j = 0; j < dim; ++j) scaled.row(j) *= std::polar(1.0, lambda * q_t[j]);
  const ComplexMatrix core = b * scaled;  // U' e^{i lam Q} U in the Q basis

  Complex acc = 0.0;
  ComplexMatrix inner(dim, dim);
  for (int t = 0; t < m_tau; ++t) {
    const double tau = kTwoPi * static_cast<double>(t) / static_cast<double>(m_tau);
    for (int j = 0; j < dim; ++j) {
      const Complex left = std::polar(1.0, tau * q_t[j]);
      for (int k = 0; k < dim; ++k) {
        inner(j, k) = left * core(j, k) * std::polar(1.0, -(lambda + tau) * q_t[k]);
      }
    }
    acc += det_via_log(rho_prime_t + inner * rho_t);
  }
  return acc / static_cast<double>(m_tau);
}

Complex ChiEvaluator::Impl::eval_spin(double lambda) const {
  // det(rho' + e^{-i lam Q/2} U' e^{i lam Q} U e^{-i lam Q/2} rho); reduces to
  // the Levitov-Lesovik form when [Q, rho] = 0.
  ComplexMatrix scaled = u_t;
  for (int j = 0; j < dim; ++j) scaled.row(j) *= std::polar(1.0, lambda * q_t[j]);
  ComplexMatrix b = u_t.adjoint() * scaled;
  for (int j = 0; j < dim; ++j) {
    b.row(j) *= std::polar(1.0, -0.5 * lambda * q_t[j]);
    b.col(j) *= std::polar(1.0, -0.5 * lambda * q_t[j]);
  }
  return det_via_log(rho_prime_t + b * rho_t);
}

// ---------------------------------------------------------------------------
// Named formulas and the reference path
// ---------------------------------------------------------------------------

Complex chi_les_lev(const QuantumModel& model, double lambda) {
  return ChiEvaluator(model, ChiVariant::LesLev)(lambda);
}

Complex chi_regularized(const QuantumModel& model, double lambda) {
  return ChiEvaluator(model, ChiVariant::Regularized)(lambda);
}

Complex chi_single_measurement(const QuantumModel& model, double lambda) {
  return ChiEvaluator(model, ChiVariant::SingleMeasurement)(lambda);
}

Complex chi_collapse(const QuantumModel& model, double lambda) {
  return ChiEvaluator(model, ChiVariant::Collapse)(lambda);
}

Complex chi_spin_coupling(const QuantumModel& model, double lambda) {
  return ChiEvaluator(model, ChiVariant::SpinCoupling)(lambda);
}

Complex chi_reference(const QuantumModel& model, ChiVariant variant, double lambda) {
  const int d = model.dim;
  const ComplexMatrix identity = ComplexMatrix::Identity(d, d);
  const ComplexMatrix rho_prime = identity - model.rho;
  const Complex i_lam(0.0, lambda);

  switch (variant) {
    case ChiVariant::LesLev: {
      require_commuting(model);
      const ComplexMatrix q_u = model.U.adjoint() * model.Q * model.U;
      const ComplexMatrix a = unitary_exp(q_u, lambda);
      const ComplexMatrix b = unitary_exp(model.Q, -lambda);
      return det_via_log(rho_prime + a * b * model.rho);
    }
    case ChiVariant::Regularized: {
      const ComplexMatrix q_u = model.U.adjoint() * model.Q * model.U;
      const ComplexMatrix rho_u = model.U.adjoint() * model.rho * model.U;
      const ComplexMatrix rho_prime_u = identity - rho_u;
      const ComplexMatrix term1 =
          general_exp(-i_lam * (rho_u * q_u)) * rho_prime * general_exp(i_lam * (model.rho * model.Q));
      const ComplexMatrix term2 =
          general_exp(i_lam * (rho_prime_u * q_u)) * model.rho * general_exp(-i_lam * (rho_prime * model.Q));
      return det_via_log(term1 + term2);
    }
    case ChiVariant::SingleMeasurement: {
      const ComplexMatrix delta = model.U.adjoint() * model.Q * model.U - model.Q;
      return det_via_log(rho_prime + unitary_exp(delta, lambda) * model.rho);
    }
    case ChiVariant::Collapse: {
      require_projection(model);
      const int m_tau = d + 1;
      Complex acc = 0.0;
      for (int t = 0; t < m_tau; ++t) {
        const double tau = kTwoPi * static_cast<double>(t) / static_cast<double>(m_tau);
        const ComplexMatrix inner = unitary_exp(model.Q, tau) * model.U.adjoint() *
                                    unitary_exp(model.Q, lambda) * model.U *
                                    unitary_exp(model.Q, -(lambda + tau)) * model.rho;
        acc += det_via_log(rho_prime + inner);
      }
      return acc / static_cast<double>(m_tau);
    }
    case ChiVariant::SpinCoupling: {
      const ComplexMatrix half = unitary_exp(model.Q, -0.5 * lambda);
      const ComplexMatrix b =
          half * model.U.adjoint() * unitary_exp(model.Q, lambda) * model.U * half;
      return det_via_log(rho_prime + b * model.rho);
    }
  }
  return {};
}

ChiVariant chi_variant_from_string(const std::string& name) {
  if (name == "les-lev") return ChiVariant::LesLev;
  if (name == "regularized") return ChiVariant::Regularized;
  if (name == "single-measurement") return ChiVariant::SingleMeasurement;
  if (name == "collapse") return ChiVariant::Collapse;
  if (name == "spin-coupling") return ChiVariant::SpinCoupling;
  throw Error(ErrorKind::UnknownKind, "chi variant '" + name + "'");
}

const char* chi_variant_name(ChiVariant variant) {
  switch (variant) {
    case ChiVariant::LesLev: return "les-lev";
    case ChiVariant::Regularized: return "regularized";
    case ChiVariant::SingleMeasurement: return "single-measurement";
    case ChiVariant::Collapse: return "collapse";
    case ChiVariant::SpinCoupling: return "spin-coupling";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Sampling and the unwrapped log
// ---------------------------------------------------------------------------

namespace {

ChiSamples assemble_samples(std::vector<double> lambdas, std::vector<Complex> values,
                            bool strict) {
  ChiSamples s;
  s.lambdas = std::move(lambdas);
  s.values = std::move(values);
  s.log_values.resize(s.values.size());

  if (std::abs(s.values.front() - Complex(1.0, 0.0)) > 1e-10) {
    std::ostringstream os;
    os << "chi(0) = " << s.values.front() << " deviates from 1";
    throw Error(ErrorKind::InvalidArgument, os.str());
  }

  bool ok = true;
  double prev_phase = 0.0;
  for (size_t k = 0; k < s.values.size(); ++k) {
    const ContinuedLog cl = continue_log(s.values[k], prev_phase);
    if (!cl.ok) {
      if (strict) {
        std::ostringstream os;
        os << "phase jump " << cl.jump << " >= pi between grid points " << k - 1 << " and " << k
           << "; increase the grid size";
        throw Error(ErrorKind::UnwrapFailure, os.str());
      }
      ok = false;
      break;
    }
    s.log_values[k] = cl.value;
    prev_phase = cl.value.imag();
  }

  if (!ok) {
    // Principal-branch fallback for callers that only need |chi| and values.
    for (size_t k = 0; k < s.values.size(); ++k) {
      const double mag = std::max(std::abs(s.values[k]), 1e-300);
      s.log_values[k] = Complex(std::log(mag), std::arg(s.values[k]));
    }
  }
  s.log_unwrapped = ok;
  return s;
}

template <bool Parallel>
ChiSamples sample_grid(const ChiEvaluator& eval, int grid_size) {
  if (grid_size < 2) throw Error(ErrorKind::InvalidArgument, "grid needs at least 2 points");
  std::vector<double> lambdas(static_cast<size_t>(grid_size));
  std::vector<Complex> values(static_cast<size_t>(grid_size));
  for (int k = 0; k < grid_size; ++k) {
    lambdas[static_cast<size_t>(k)] = kTwoPi * static_cast<double>(k) / grid_size;
  }
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) if (Parallel)
  for (int k = 0; k < grid_size; ++k) {
    try {
      values[static_cast<size_t>(k)] = eval(lambdas[static_cast<size_t>(k)]);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return assemble_samples(std::move(lambdas), std::move(values), /*strict=*/true);
}

}  // namespace

ChiSamples ChiSamples::from_values(std::vector<Complex> values) {
  if (values.size() < 2) throw Error(ErrorKind::InvalidArgument, "grid needs at least 2 points");
  std::vector<double> lambdas(values.size());
  for (size_t k = 0; k < values.size(); ++k) {
    lambdas[k] = kTwoPi * static_cast<double>(k) / static_cast<double>(values.size());
  }
  return assemble_samples(std::move(lambdas), std::move(values), /*strict=*/false);
}

ChiSamples sample_chi(const QuantumModel& model, ChiVariant variant, int grid_size) {
  return sample_grid<true>(ChiEvaluator(model, variant), grid_size);
}

ChiSamples sample_chi_reference(const QuantumModel& model, ChiVariant variant, int grid_size) {
  if (grid_size < 2) throw Error(ErrorKind::InvalidArgument, "grid needs at least 2 points");
  std::vector<double> lambdas(static_cast<size_t>(grid_size));
  std::vector<Complex> values(static_cast<size_t>(grid_size));
  for (int k = 0; k < grid_size; ++k) {
    lambdas[static_cast<size_t>(k)] = kTwoPi * static_cast<double>(k) / grid_size;
    values[static_cast<size_t>(k)] =
        chi_reference(model, variant, lambdas[static_cast<size_t>(k)]);
  }
  return assemble_samples(std::move(lambdas), std::move(values), /*strict=*/true);
}

ChiSamples sample_chi_function(const ChiFunction& chi, int grid_size) {
  if (grid_size < 2) throw Error(ErrorKind::InvalidArgument, "grid needs at least 2 points");
  std::vector<double> lambdas(static_cast<size_t>(grid_size));
  std::vector<Complex> values(static_cast<size_t>(grid_size));
  for (int k = 0; k < grid_size; ++k) {
    lambdas[static_cast<size_t>(k)] = kTwoPi * static_cast<double>(k) / grid_size;
    values[static_cast<size_t>(k)] = chi(lambdas[static_cast<size_t>(k)]);
  }
  return assemble_samples(std::move(lambdas), std::move(values), /*strict=*/true);
}

// ---------------------------------------------------------------------------
// Cumulants by central differences with Richardson extrapolation
// ---------------------------------------------------------------------------

namespace {

/// Fornberg weights for the m-th derivative at 0 on the given nodes.
std::vector<double> fd_weights(const std::vector<double>& nodes, int order) {
  const int n = static_cast<int>(nodes.size());
  std::vector<std::vector<double>> c(static_cast<size_t>(n),
                                     std::vector<double>(static_cast<size_t>(order) + 1, 0.0));
  double c1 = 1.0;
  double c4 = nodes[0];
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[static_cast<size_t>(i)];
    for (int j = 0; j < i; ++j) {
      const double c3 = nodes[static_cast<size_t>(i)] - nodes[static_cast<size_t>(j)];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) {
          c[static_cast<size_t>(i)][static_cast<size_t>(k)] =
              c1 *
              (k * c[static_cast<size_t>(i) - 1][static_cast<size_t>(k) - 1] -
               c5 * c[static_cast<size_t>(i) - 1][static_cast<size_t>(k)]) /
              c2;
        }
        c[static_cast<size_t>(i)][0] = -c1 * c5 * c[static_cast<size_t>(i) - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) {
        c[static_cast<size_t>(j)][static_cast<size_t>(k)] =
            (c4 * c[static_cast<size_t>(j)][static_cast<size_t>(k)] -
             k * c[static_cast<size_t>(j)][static_cast<size_t>(k) - 1]) /
            c3;
      }
      c[static_cast<size_t>(j)][0] = c4 * c[static_cast<size_t>(j)][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) w[static_cast<size_t>(i)] = c[static_cast<size_t>(i)][static_cast<size_t>(order)];
  return w;
}

struct LocalLog {
  std::map<double, Complex> log_at;  // unwrapped log chi at sampled offsets

  Complex operator()(double x) const { return log_at.at(x); }
};

/// Evaluates chi at all points and continues the log branch outward from 0.
LocalLog build_local_log(const ChiFunction& chi, const std::vector<double>& points) {
  std::vector<double> sorted = points;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  std::vector<Complex> values(sorted.size());
  std::exception_ptr failure;
  const int count = static_cast<int>(sorted.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < count; ++i) {
    try {
      values[static_cast<size_t>(i)] = chi(sorted[static_cast<size_t>(i)]);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  const auto zero_it = std::lower_bound(sorted.begin(), sorted.end(), 0.0);
  const size_t zero_idx = static_cast<size_t>(zero_it - sorted.begin());

  LocalLog local;
  auto walk = [&](std::ptrdiff_t step) {
    double prev_phase = 0.0;
    for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(zero_idx);
         i >= 0 && i < static_cast<std::ptrdiff_t>(sorted.size()); i += step) {
      const ContinuedLog cl = continue_log(values[static_cast<size_t>(i)], prev_phase);
      if (!cl.ok) {
        throw Error(ErrorKind::UnwrapFailure,
                    "log chi branch could not be continued on the cumulant stencil");
      }
      local.log_at[sorted[static_cast<size_t>(i)]] = cl.value;
      prev_phase = cl.value.imag();
      if (step > 0 && i + 1 == static_cast<std::ptrdiff_t>(sorted.size())) break;
    }
  };
  walk(+1);
  walk(-1);
  return local;
}

double settle_tolerance(int order) {
  if (order <= 4) return 1e-4;
  return 5e-2;
}

}  // namespace

CumulantVector cumulants_from_chi(const ChiFunction& chi, int k_max) {
  if (k_max < 1) throw Error(ErrorKind::InvalidArgument, "k_max must be >= 1");
  if (k_max > kMaxCumulantOrder) {
    throw Error(ErrorKind::KTooLarge,
                "finite differences are unreliable past order " + std::to_string(kMaxCumulantOrder));
  }

  constexpr double kBaseStep = 1e-2;
  constexpr int kLevels = 4;
  // Coarse to fine: 8h, 4h, 2h, h.
  std::vector<double> steps(kLevels);
  for (int l = 0; l < kLevels; ++l) steps[static_cast<size_t>(l)] = kBaseStep * std::pow(2.0, kLevels - 1 - l);

  const int j_max = (k_max + 1) / 2;
  std::vector<double> points{0.0};
  for (double h : steps) {
    for (int j = 1; j <= j_max; ++j) {
      points.push_back(h * j);
      points.push_back(-h * j);
    }
  }
  const LocalLog local = build_local_log(chi, points);

  CumulantVector out;
  out.method = CumulantMethod::FiniteDifference;
  out.values.resize(static_cast<size_t>(k_max));

  for (int m = 1; m <= k_max; ++m) {
    const int j = (m + 1) / 2;
    std::vector<double> offsets;
    for (int o = -j; o <= j; ++o) offsets.push_back(o);
    const std::vector<double> w = fd_weights(offsets, m);

    // One finite-difference estimate per step level.
    std::vector<Complex> estimates(kLevels);
    for (int l = 0; l < kLevels; ++l) {
      const double h = steps[static_cast<size_t>(l)];
      Complex acc = 0.0;
      for (size_t oi = 0; oi < offsets.size(); ++oi) {
        if (w[oi] == 0.0) continue;
        acc += w[oi] * local(offsets[oi] * h);
      }
      estimates[static_cast<size_t>(l)] = acc / std::pow(h, m);
    }

    // Richardson tableau for an error series in h^2.
    std::vector<std::vector<Complex>> t(static_cast<size_t>(kLevels));
    for (int l = 0; l < kLevels; ++l) {
      t[static_cast<size_t>(l)].resize(static_cast<size_t>(l) + 1);
      t[static_cast<size_t>(l)][0] = estimates[static_cast<size_t>(l)];
      for (int c2 = 1; c2 <= l; ++c2) {
        const double factor = std::pow(4.0, c2) - 1.0;
        t[static_cast<size_t>(l)][static_cast<size_t>(c2)] =
            t[static_cast<size_t>(l)][static_cast<size_t>(c2) - 1] +
            (t[static_cast<size_t>(l)][static_cast<size_t>(c2) - 1] -
             t[static_cast<size_t>(l) - 1][static_cast<size_t>(c2) - 1]) /
                factor;
      }
    }
    const Complex extrapolated = t[kLevels - 1][kLevels - 1];
    const double settle =
        std::abs(extrapolated - t[kLevels - 2][kLevels - 2]) +
        std::abs(extrapolated - t[kLevels - 1][kLevels - 2]);
    const double scale = std::max(1.0, std::abs(extrapolated));
    if (!(settle <= settle_tolerance(m) * scale)) {
      std::ostringstream os;
      os << "Richardson extrapolation for cumulant " << m << " did not settle (residual "
         << settle << ")";
      throw Error(ErrorKind::StepUnderflow, os.str());
    }

    // kappa_m = (-i)^m g^(m)(0); the imaginary residue is numerical noise.
    Complex rotated = extrapolated;
    for (int r = 0; r < m % 4; ++r) rotated *= Complex(0.0, -1.0);
    out.values[static_cast<size_t>(m) - 1] = rotated.real();
  }
  return out;
}

CumulantVector cumulants_from_chi(const ChiSamples& samples, int k_max) {
  if (!samples.log_unwrapped) {
    throw Error(ErrorKind::UnwrapFailure,
                "cumulant extraction needs a continuously unwrapped log branch");
  }
  if (k_max < 1) throw Error(ErrorKind::InvalidArgument, "k_max must be >= 1");
  if (k_max > kMaxCumulantOrder) {
    throw Error(ErrorKind::KTooLarge,
                "finite differences are unreliable past order " + std::to_string(kMaxCumulantOrder));
  }

  const int m_grid = samples.grid_size();
  const int j_max = (k_max + 1) / 2;
  // Dyadic step levels in grid units, coarsest first.
  std::vector<int> strides;
  for (int s = 8; s >= 1; s /= 2) {
    if (j_max * s <= m_grid / 2) strides.push_back(s);
  }
  if (strides.size() < 2) {
    throw Error(ErrorKind::StepUnderflow, "grid too coarse for Richardson extrapolation");
  }

  const double h_grid = kTwoPi / m_grid;
  // chi is 2 pi periodic, so log chi(-x) = log chi(2 pi - x) minus the full
  // winding 2 pi i w accumulated by the continued branch over one period.
  const double winding =
      kTwoPi * std::round(samples.log_values.back().imag() / kTwoPi);
  auto log_at = [&](int index) -> Complex {
    if (index >= 0) return samples.log_values[static_cast<size_t>(index)];
    return samples.log_values[static_cast<size_t>(m_grid + index)] - Complex(0.0, winding);
  };

  CumulantVector out;
  out.method = CumulantMethod::FiniteDifference;
  out.values.resize(static_cast<size_t>(k_max));

  for (int m = 1; m <= k_max; ++m) {
    const int j = (m + 1) / 2;
    std::vector<double> offsets;
    for (int o = -j; o <= j; ++o) offsets.push_back(o);
    const std::vector<double> w = fd_weights(offsets, m);

    std::vector<Complex> estimates;
    for (int stride : strides) {
      const double h = h_grid * stride;
      Complex acc = 0.0;
      for (size_t oi = 0; oi < offsets.size(); ++oi) {
        if (w[oi] == 0.0) continue;
        acc += w[oi] * log_at(static_cast<int>(offsets[oi]) * stride);
      }
      estimates.push_back(acc / std::pow(h, m));
    }

    const int levels = static_cast<int>(estimates.size());
    std::vector<std::vector<Complex>> t(static_cast<size_t>(levels));
    for (int l = 0; l < levels; ++l) {
      t[static_cast<size_t>(l)].resize(static_cast<size_t>(l) + 1);
      t[static_cast<size_t>(l)][0] = estimates[static_cast<size_t>(l)];
      for (int c2 = 1; c2 <= l; ++c2) {
        const double factor = std::pow(4.0, c2) - 1.0;
        t[static_cast<size_t>(l)][static_cast<size_t>(c2)] =
            t[static_cast<size_t>(l)][static_cast<size_t>(c2) - 1] +
            (t[static_cast<size_t>(l)][static_cast<size_t>(c2) - 1] -
             t[static_cast<size_t>(l) - 1][static_cast<size_t>(c2) - 1]) /
                factor;
      }
    }
    const Complex extrapolated = t[static_cast<size_t>(levels) - 1][static_cast<size_t>(levels) - 1];
    const double settle = std::abs(
        extrapolated - t[static_cast<size_t>(levels) - 2][static_cast<size_t>(levels) - 2]);
    const double scale = std::max(1.0, std::abs(extrapolated));
    if (!(settle <= settle_tolerance(m) * scale)) {
      throw Error(ErrorKind::StepUnderflow, "Richardson extrapolation did not settle");
    }
    Complex rotated = extrapolated;
    for (int r = 0; r < m % 4; ++r) rotated *= Complex(0.0, -1.0);
    out.values[static_cast<size_t>(m) - 1] = rotated.real();
  }
  return out;
}

CumulantVector cumulants(const QuantumModel& model, ChiVariant variant, int k_max) {
  ChiEvaluator eval(model, variant);
  return cumulants_from_chi([&eval](double lam) { return eval(lam); }, k_max);
}

CumulantVector cumulants_from_distribution(const CountingDistribution& dist, int k_max) {
  MomentVector moments;
  moments.values.resize(static_cast<size_t>(k_max));
  for (int k = 1; k <= k_max; ++k) {
    moments.values[static_cast<size_t>(k) - 1] = dist.moment(k);
  }
  CumulantVector out = moments_to_cumulants(moments);
  out.method = CumulantMethod::Distribution;
  return out;
}

CumulantVector cumulants_trace_formula(const QuantumModel& model) {
  CumulantVector out;
  out.method = CumulantMethod::TraceFormula;
  out.values = {mean_charge(model).naive, second_cumulant_trace(model)};
  return out;
}

CountingDistribution distribution_from_chi(const ChiSamples& samples) {
  const int m = samples.grid_size();
  for (int k = 0; k < m; ++k) {
    const double expected = kTwoPi * static_cast<double>(k) / m;
    if (std::abs(samples.lambdas[static_cast<size_t>(k)] - expected) > 1e-9) {
      throw Error(ErrorKind::InvalidArgument, "distribution needs a uniform grid on [0, 2 pi)");
    }
  }

  const int n_hi = m / 2;
  const int n_lo = n_hi - m + 1;
  CountingDistribution dist;
  dist.n_min = n_lo;
  dist.p.assign(static_cast<size_t>(m), 0.0);

  std::vector<double> imag_residuals(static_cast<size_t>(m), 0.0);
#pragma omp parallel for schedule(static)
  for (int n = n_lo; n <= n_hi; ++n) {
    Complex acc = 0.0;
    for (int k = 0; k < m; ++k) {
      acc += samples.values[static_cast<size_t>(k)] *
             std::polar(1.0, -samples.lambdas[static_cast<size_t>(k)] * n);
    }
    acc /= static_cast<double>(m);
    dist.p[static_cast<size_t>(n - n_lo)] = acc.real();
    imag_residuals[static_cast<size_t>(n - n_lo)] = std::abs(acc.imag());
  }
  dist.max_imag_residual = *std::max_element(imag_residuals.begin(), imag_residuals.end());
  dist.quasiprobability = dist.min_entry() < -1e-9;
  dist.trim();
  return dist;
}

CountingDistribution spin_coupling_quasiprobability(const QuantumModel& model, int grid_size) {
  ChiEvaluator eval(model, ChiVariant::SpinCoupling);
  const ChiSamples doubled =
      sample_chi_function([&eval](double lam) { return eval(2.0 * lam); }, grid_size);
  return distribution_from_chi(doubled);
}

// ---------------------------------------------------------------------------
// Trace formulas
// ---------------------------------------------------------------------------

MeanCharge mean_charge(const QuantumModel& model) {
  const ComplexMatrix q_u = model.U.adjoint() * model.Q * model.U;
  const ComplexMatrix rho_u = model.U.adjoint() * model.rho * model.U;
  MeanCharge out;
  out.naive = (model.rho * (q_u - model.Q)).trace().real();
  out.regularized = ((model.rho - rho_u) * q_u).trace().real();
  return out;
}

NoiseSplit noise_split(const QuantumModel& model) {
  const int d = model.dim;
  const ComplexMatrix delta = model.U.adjoint() * model.Q * model.U - model.Q;
  const ComplexMatrix rho_rho_prime =
      model.rho * (ComplexMatrix::Identity(d, d) - model.rho);
  const Complex i_unit(0.0, 1.0);
  const ComplexMatrix commutator = i_unit * (delta * model.rho - model.rho * delta);
  NoiseSplit out;
  out.thermal = (rho_rho_prime * delta * delta).trace().real();
  out.shot = 0.5 * (commutator * commutator).trace().real();
  return out;
}

double second_cumulant_trace(const QuantumModel& model) {
  const int d = model.dim;
  const ComplexMatrix delta = model.U.adjoint() * model.Q * model.U - model.Q;
  const ComplexMatrix rho_prime = ComplexMatrix::Identity(d, d) - model.rho;
  return (model.rho * delta * rho_prime * delta).trace().real();
}

}  // namespace fcs
