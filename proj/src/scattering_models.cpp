#include "fcs/scattering_models.hpp"

#include <cmath>
#include <sstream>

#include "fcs/errors.hpp"

namespace fcs {

namespace {

double fermi_occupation(double p, double mu, double beta) {
  const double a = beta * (p - mu);
  if (a >= 0.0) {
    const double e = std::exp(-a);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(a));
}

QuantumModel assemble_two_circle(const TwoCircleSpec& spec,
                                 const std::vector<double>& momenta,
                                 const std::vector<double>& occ_lead0,
                                 const std::vector<double>& occ_lead1) {
  const int blocks = static_cast<int>(momenta.size());
  const int dim = 2 * blocks;
  const Eigen::Matrix2cd s = spec.s.matrix();

  ComplexMatrix u = ComplexMatrix::Zero(dim, dim);
  ComplexMatrix rho = ComplexMatrix::Zero(dim, dim);
  ComplexMatrix q = ComplexMatrix::Zero(dim, dim);
  for (int b = 0; b < blocks; ++b) {
    u.block<2, 2>(2 * b, 2 * b) = s;
    rho(2 * b, 2 * b) = occ_lead0[static_cast<size_t>(b)];
    rho(2 * b + 1, 2 * b + 1) = occ_lead1[static_cast<size_t>(b)];
    q(2 * b, 2 * b) = 1.0;  // lead 0 is the distinguished lead
  }
  return QuantumModel::create(std::move(u), std::move(rho), std::move(q));
}

}  // namespace

ScatteringMatrix ScatteringMatrix::from_transmission(double transmission) {
  if (transmission < 0.0 || transmission > 1.0) {
    throw Error(ErrorKind::InvalidArgument, "transmission probability must lie in [0, 1]");
  }
  const double t_amp = std::sqrt(transmission);
  const double r_amp = std::sqrt(1.0 - transmission);
  ScatteringMatrix s;
  s.r = r_amp;
  s.t = t_amp;
  s.r_prime = r_amp;
  s.t_prime = -t_amp;
  return s;
}

Eigen::Matrix2cd ScatteringMatrix::matrix() const {
  Eigen::Matrix2cd m;
  m << r, t_prime, t, r_prime;
  return m;
}

double ScatteringMatrix::unitarity_residual() const {
  const Eigen::Matrix2cd m = matrix();
  return (m.adjoint() * m - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff();
}

void ScatteringMatrix::check() const {
  const double dev = unitarity_residual();
  if (dev > 1e-12) {
    std::ostringstream os;
    os << "S-matrix unitarity residual " << dev << " exceeds 1e-12";
    throw Error(ErrorKind::InvalidArgument, os.str());
  }
}

std::vector<double> TwoCircleSpec::momenta() const {
  if (!(circumference > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "circumference must be positive");
  }
  if (!(cutoff > std::max(std::abs(mu_l), std::abs(mu_r)))) {
    throw Error(ErrorKind::CutoffTooSmall, "cutoff must exceed max(|mu_l|, |mu_r|)");
  }
  const double h = spacing();
  const int k_max = static_cast<int>(std::floor(cutoff / h + 1e-12));
  std::vector<double> out;
  out.reserve(static_cast<size_t>(2 * k_max + 1));
  for (int k = -k_max; k <= k_max; ++k) out.push_back(h * k);
  return out;
}

int two_circle_window_count(const TwoCircleSpec& spec) {
  int n = 0;
  for (double p : spec.momenta()) {
    if (p > spec.mu_l && p <= spec.mu_r) ++n;
  }
  return n;
}

QuantumModel build_two_circle(const TwoCircleSpec& spec) {
  spec.s.check();
  const std::vector<double> momenta = spec.momenta();
  for (double p : momenta) {
    if (std::abs(p - spec.mu_l) < tol::fermi_degenerate ||
        std::abs(p - spec.mu_r) < tol::fermi_degenerate) {
      throw Error(ErrorKind::DegenerateFermiLevel,
                  "a chemical potential sits on a momentum grid point; perturb it");
    }
  }
  if (two_circle_window_count(spec) == 0) {
    throw Error(ErrorKind::EmptyWindow, "no momentum grid point in (mu_l, mu_r]");
  }
  std::vector<double> occ0(momenta.size()), occ1(momenta.size());
  for (size_t i = 0; i < momenta.size(); ++i) {
    occ0[i] = momenta[i] < spec.mu_l ? 1.0 : 0.0;
    occ1[i] = momenta[i] < spec.mu_r ? 1.0 : 0.0;
  }
  return assemble_two_circle(spec, momenta, occ0, occ1);
}

QuantumModel thermal_two_circle(const TwoCircleSpec& spec, double beta) {
  spec.s.check();
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw Error(ErrorKind::InvalidArgument, "beta must be finite and positive");
  }
  const double needed = std::max(std::abs(spec.mu_l), std::abs(spec.mu_r)) + 10.0 / beta;
  if (spec.cutoff < needed) {
    std::ostringstream os;
    os << "cutoff " << spec.cutoff << " below max|mu| + 10/beta = " << needed;
    throw Error(ErrorKind::CutoffTooSmall, os.str());
  }
  const std::vector<double> momenta = spec.momenta();
  std::vector<double> occ0(momenta.size()), occ1(momenta.size());
  for (size_t i = 0; i < momenta.size(); ++i) {
    occ0[i] = fermi_occupation(momenta[i], spec.mu_l, beta);
    occ1[i] = fermi_occupation(momenta[i], spec.mu_r, beta);
  }
  return assemble_two_circle(spec, momenta, occ0, occ1);
}

QuantumModel lattice_junction_model(int sites, const ScatteringMatrix& s, double beta,
                                    double mu_lead0, double mu_lead1) {
  s.check();
  if (sites < 2) throw Error(ErrorKind::InvalidArgument, "lattice leads need >= 2 sites");
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw Error(ErrorKind::InvalidArgument, "beta must be finite and positive");
  }
  const int dim = 2 * sites;

  // U = shift after scattering at the junction pair (site 0 of each lead).
  ComplexMatrix shift = ComplexMatrix::Zero(dim, dim);
  for (int lead = 0; lead < 2; ++lead) {
    const int base = lead * sites;
    for (int j = 0; j < sites; ++j) shift(base + (j + 1) % sites, base + j) = 1.0;
  }
  ComplexMatrix junction = ComplexMatrix::Identity(dim, dim);
  junction(0, 0) = s.r;
  junction(0, sites) = s.t_prime;
  junction(sites, 0) = s.t;
  junction(sites, sites) = s.r_prime;
  ComplexMatrix u = shift * junction;

  // Thermal occupations of the decoupled ring band p_k = 2 pi k / sites
  // folded into (-pi, pi], assembled from plane waves per lead.
  ComplexMatrix rho = ComplexMatrix::Zero(dim, dim);
  const double mu[2] = {mu_lead0, mu_lead1};
  for (int lead = 0; lead < 2; ++lead) {
    const int base = lead * sites;
    for (int k = 0; k < sites; ++k) {
      double p = kTwoPi * k / sites;
      if (p > kPi) p -= kTwoPi;
      const double occ = fermi_occupation(p, mu[lead], beta);
      const double norm = occ / sites;
      for (int a = 0; a < sites; ++a) {
        for (int b = 0; b < sites; ++b) {
          rho(base + a, base + b) += norm * std::polar(1.0, p * (a - b));
        }
      }
    }
  }
  rho = 0.5 * (rho + ComplexMatrix(rho.adjoint()));

  ComplexMatrix q = ComplexMatrix::Zero(dim, dim);
  for (int j = 0; j < sites; ++j) q(sites + j, sites + j) = 1.0;

  return QuantumModel::create(std::move(u), std::move(rho), std::move(q));
}

Complex binomial_chi(double p, int n, double lambda) {
  if (p < 0.0 || p > 1.0) {
    throw Error(ErrorKind::InvalidArgument, "binomial p must lie in [0, 1]");
  }
  if (n < 0) throw Error(ErrorKind::InvalidArgument, "binomial N must be >= 0");
  const Complex base = (1.0 - p) + p * std::polar(1.0, lambda);
  // Binary exponentiation keeps large N exact to roundoff.
  Complex result = 1.0;
  Complex acc = base;
  for (int e = n; e > 0; e >>= 1) {
    if (e & 1) result *= acc;
    acc *= acc;
  }
  return result;
}

Complex poisson_chi(double rate, double lambda) {
  if (rate < 0.0) throw Error(ErrorKind::InvalidArgument, "Poisson rate must be >= 0");
  return std::exp(rate * (std::polar(1.0, lambda) - 1.0));
}

double binomial_pmf(int n_total, int k, double p) {
  if (k < 0 || k > n_total) return 0.0;
  const double log_coeff = std::lgamma(n_total + 1.0) - std::lgamma(k + 1.0) -
                           std::lgamma(n_total - k + 1.0);
  double log_p = 0.0;
  if (k > 0) log_p += k * std::log(p);
  if (n_total - k > 0) log_p += (n_total - k) * std::log1p(-p);
  return std::exp(log_coeff + log_p);
}

NoiseKind noise_kind_from_string(const std::string& name) {
  if (name == "johnson-nyquist") return NoiseKind::JohnsonNyquist;
  if (name == "schottky") return NoiseKind::Schottky;
  if (name == "lesovik-khlus") return NoiseKind::LesovikKhlus;
  throw Error(ErrorKind::UnknownKind, "noise kind '" + name + "'");
}

double reference_noise(NoiseKind kind, const NoiseParams& params) {
  switch (kind) {
    case NoiseKind::JohnsonNyquist:
      if (!(params.beta > 0.0) || !(params.conductance >= 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "johnson-nyquist needs beta > 0, G >= 0");
      }
      return 2.0 * params.conductance / params.beta;
    case NoiseKind::Schottky:
      return params.mean_charge;
    case NoiseKind::LesovikKhlus:
      if (params.transmission < 0.0 || params.transmission > 1.0) {
        throw Error(ErrorKind::InvalidArgument, "transmission must lie in [0, 1]");
      }
      return params.mean_charge * (1.0 - params.transmission);
  }
  throw Error(ErrorKind::UnknownKind, "unhandled noise kind");
}

}  // namespace fcs
