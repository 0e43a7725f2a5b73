#include "fcs/fock_oracle.hpp"

#include <bit>
#include <cmath>
#include <vector>

#include "fcs/errors.hpp"
#include "fcs/matrix_kernel.hpp"

namespace fcs::fock {

namespace {

void check_dim(int d, int cap, const char* what) {
  if (d < 1) throw Error(ErrorKind::InvalidArgument, "dimension must be positive");
  if (d > cap) {
    throw Error(ErrorKind::DimensionTooLarge,
                std::string(what) + " capped at single-particle dimension " + std::to_string(cap));
  }
}

std::vector<int> mode_list(std::size_t mask, int d) {
  std::vector<int> modes;
  modes.reserve(static_cast<size_t>(d));
  for (int i = 0; i < d; ++i) {
    if (mask >> i & 1u) modes.push_back(i);
  }
  return modes;
}

/// Jordan-Wigner sign for a^dag_i or a_i acting past the modes below i.
int jw_sign(std::size_t mask, int mode) {
  const std::size_t below = mask & ((std::size_t{1} << mode) - 1);
  return (std::popcount(below) & 1) ? -1 : 1;
}

template <bool Parallel>
FockOperator gamma_impl(const ComplexMatrix& m) {
  const int d = static_cast<int>(m.rows());
  check_dim(d, kMaxSecondQuantizationDim, "gamma");
  const Eigen::Index n = fock_space_size(d);

  // Group basis states by particle number so only equal sectors are visited.
  std::vector<std::vector<std::size_t>> sectors(static_cast<size_t>(d) + 1);
  for (std::size_t s = 0; s < static_cast<std::size_t>(n); ++s) {
    sectors[static_cast<size_t>(occupation(s))].push_back(s);
  }

  FockOperator g = FockOperator::Zero(n, n);
  for (int np = 0; np <= d; ++np) {
    const auto& sec = sectors[static_cast<size_t>(np)];
    const Eigen::Index count = static_cast<Eigen::Index>(sec.size());
#pragma omp parallel for schedule(dynamic) if (Parallel && d >= 8)
    for (Eigen::Index a = 0; a < count; ++a) {
      const std::size_t S = sec[static_cast<size_t>(a)];
      const std::vector<int> rows = mode_list(S, d);
      ComplexMatrix minor(np, np);
      for (std::size_t b = 0; b < sec.size(); ++b) {
        const std::size_t T = sec[b];
        if (np == 0) {
          g(static_cast<Eigen::Index>(S), static_cast<Eigen::Index>(T)) = 1.0;
          continue;
        }
        const std::vector<int> cols = mode_list(T, d);
        for (int i = 0; i < np; ++i)
          for (int j = 0; j < np; ++j)
            minor(i, j) = m(rows[static_cast<size_t>(i)], cols[static_cast<size_t>(j)]);
        g(static_cast<Eigen::Index>(S), static_cast<Eigen::Index>(T)) = minor.determinant();
      }
    }
  }
  return g;
}

}  // namespace

Eigen::Index fock_space_size(int d) {
  check_dim(d, kMaxSecondQuantizationDim, "Fock space");
  return Eigen::Index{1} << d;
}

int occupation(std::size_t bitmask) { return std::popcount(bitmask); }

FockOperator gamma(const ComplexMatrix& m) { return gamma_impl<true>(m); }

FockOperator gamma_reference(const ComplexMatrix& m) { return gamma_impl<false>(m); }

FockOperator dgamma(const ComplexMatrix& a) {
  const int d = static_cast<int>(a.rows());
  check_dim(d, kMaxSecondQuantizationDim, "dgamma");
  const Eigen::Index n = fock_space_size(d);
  FockOperator out = FockOperator::Zero(n, n);
  for (std::size_t T = 0; T < static_cast<std::size_t>(n); ++T) {
    for (int j = 0; j < d; ++j) {
      if (!(T >> j & 1u)) continue;
      const std::size_t t1 = T & ~(std::size_t{1} << j);
      const int sj = jw_sign(T, j);
      for (int i = 0; i < d; ++i) {
        if (t1 >> i & 1u) continue;
        const std::size_t S = t1 | (std::size_t{1} << i);
        const int si = jw_sign(t1, i);
        out(static_cast<Eigen::Index>(S), static_cast<Eigen::Index>(T)) +=
            a(i, j) * static_cast<double>(si * sj);
      }
    }
  }
  return out;
}

Complex trace_gamma(const ComplexMatrix& m) {
  const int d = static_cast<int>(m.rows());
  check_dim(d, kMaxSecondQuantizationDim, "trace_gamma");
  const Eigen::Index n = fock_space_size(d);
  Complex total = 0.0;
  for (std::size_t S = 0; S < static_cast<std::size_t>(n); ++S) {
    const std::vector<int> modes = mode_list(S, d);
    if (modes.empty()) {
      total += 1.0;
      continue;
    }
    const int np = static_cast<int>(modes.size());
    ComplexMatrix minor(np, np);
    for (int i = 0; i < np; ++i)
      for (int j = 0; j < np; ++j)
        minor(i, j) = m(modes[static_cast<size_t>(i)], modes[static_cast<size_t>(j)]);
    total += minor.determinant();
  }
  return total;
}

FockOperator many_body_state(const ComplexMatrix& rho) {
  const int d = static_cast<int>(rho.rows());
  check_dim(d, kMaxSecondQuantizationDim, "many_body_state");
  HermitianEig eig = hermitian_eig(rho);
  for (Eigen::Index i = 0; i < eig.eigenvalues.size(); ++i) {
    if (eig.eigenvalues[i] < -tol::rho_clamp || eig.eigenvalues[i] > 1.0 + tol::rho_clamp) {
      throw Error(ErrorKind::SpectrumOutOfRange, "rho eigenvalue outside [0, 1]");
    }
  }
  const Eigen::Index n = fock_space_size(d);
  RealVector nu = eig.eigenvalues.cwiseMax(0.0).cwiseMin(1.0);

  ComplexVector diag(n);
  for (std::size_t S = 0; S < static_cast<std::size_t>(n); ++S) {
    double w = 1.0;
    for (int i = 0; i < d; ++i) {
      w *= (S >> i & 1u) ? nu[i] : 1.0 - nu[i];
    }
    diag[static_cast<Eigen::Index>(S)] = w;
  }

  FockOperator gv = gamma(eig.vectors);
  return gv * diag.asDiagonal() * gv.adjoint();
}

namespace {

/// Rounds the spectrum of a projection Q and returns the per-mode charges in
/// the eigenbasis plus the basis itself.
struct ChargeBasis {
  ComplexMatrix w;          // eigenvectors of Q
  std::vector<int> charge;  // 0/1 per mode
  int rank = 0;
};

ChargeBasis charge_basis(const ComplexMatrix& q) {
  HermitianEig eig = hermitian_eig(q);
  ChargeBasis out;
  out.w = eig.vectors;
  out.charge.resize(static_cast<size_t>(eig.eigenvalues.size()));
  for (Eigen::Index i = 0; i < eig.eigenvalues.size(); ++i) {
    const double v = eig.eigenvalues[i];
    const double rounded = std::round(v);
    if (std::abs(v - rounded) > 1e-8 || (rounded != 0.0 && rounded != 1.0)) {
      throw Error(ErrorKind::NonIntegerSpectrum,
                  "Q must be a projection for integer charge transfer");
    }
    out.charge[static_cast<size_t>(i)] = static_cast<int>(rounded);
    out.rank += static_cast<int>(rounded);
  }
  return out;
}

}  // namespace

CountingDistribution TransferWeights::distribution() const {
  CountingDistribution dist;
  dist.n_min = -charge_rank;
  dist.p.assign(static_cast<size_t>(2 * charge_rank + 1), 0.0);
  for (int i = 0; i <= charge_rank; ++i) {
    for (int j = 0; j <= charge_rank; ++j) {
      dist.p[static_cast<size_t>(j - i + charge_rank)] += weights(i, j);
    }
  }
  dist.trim();
  return dist;
}

TransferWeights transfer_weights(const QuantumModel& model) {
  check_dim(model.dim, kMaxOracleDim, "chi_oracle");
  ChargeBasis basis = charge_basis(model.Q);

  // Everything in the Q eigenbasis, where charge sectors are bitmask counts.
  const ComplexMatrix u_w = basis.w.adjoint() * model.U * basis.w;
  const ComplexMatrix rho_w = basis.w.adjoint() * model.rho * basis.w;

  const Eigen::Index n = fock_space_size(model.dim);
  std::vector<int> sector(static_cast<size_t>(n));
  for (std::size_t S = 0; S < static_cast<std::size_t>(n); ++S) {
    int c = 0;
    for (int i = 0; i < model.dim; ++i) {
      if (S >> i & 1u) c += basis.charge[static_cast<size_t>(i)];
    }
    sector[S] = c;
  }

  const FockOperator evolution = gamma(u_w);
  const FockOperator state = many_body_state(rho_w);

  TransferWeights out;
  out.charge_rank = basis.rank;
  out.weights = RealMatrix::Zero(basis.rank + 1, basis.rank + 1);

  for (int mi = 0; mi <= basis.rank; ++mi) {
    double prob_initial = 0.0;
    for (std::size_t S = 0; S < static_cast<std::size_t>(n); ++S) {
      if (sector[S] == mi) prob_initial += state(static_cast<Eigen::Index>(S),
                                                 static_cast<Eigen::Index>(S)).real();
    }
    if (prob_initial < 1e-14) continue;  // zero-weight history

    // Collapse onto the initial sector, evolve, read final sectors.
    FockOperator collapsed = FockOperator::Zero(n, n);
    for (std::size_t S = 0; S < static_cast<std::size_t>(n); ++S) {
      if (sector[S] != mi) continue;
      for (std::size_t T = 0; T < static_cast<std::size_t>(n); ++T) {
        if (sector[T] != mi) continue;
        collapsed(static_cast<Eigen::Index>(S), static_cast<Eigen::Index>(T)) =
            state(static_cast<Eigen::Index>(S), static_cast<Eigen::Index>(T));
      }
    }
    const FockOperator evolved = evolution * collapsed * evolution.adjoint();
    for (std::size_t S = 0; S < static_cast<std::size_t>(n); ++S) {
      out.weights(mi, sector[S]) +=
          evolved(static_cast<Eigen::Index>(S), static_cast<Eigen::Index>(S)).real();
    }
  }
  return out;
}

Complex chi_oracle(const QuantumModel& model, double lambda) {
  const TransferWeights tw = transfer_weights(model);
  Complex chi = 0.0;
  for (int i = 0; i <= tw.charge_rank; ++i) {
    for (int j = 0; j <= tw.charge_rank; ++j) {
      chi += tw.weights(i, j) * std::polar(1.0, lambda * static_cast<double>(j - i));
    }
  }
  return chi;
}

CountingDistribution distribution_oracle(const QuantumModel& model) {
  return transfer_weights(model).distribution();
}

}  // namespace fcs::fock
