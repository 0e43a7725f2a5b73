#pragma once

#include <string>
#include <vector>

#include "fcs/quantum_model.hpp"
#include "fcs/types.hpp"

namespace fcs {

/// 2x2 junction S-matrix [[r, t'], [t, r']]: r, t are reflection and
/// transmission from the left, primed from the right. Must be unitary, which
/// forces |t| = |t'|.
struct ScatteringMatrix {
  Complex r{1.0, 0.0};
  Complex t{0.0, 0.0};
  Complex r_prime{1.0, 0.0};
  Complex t_prime{0.0, 0.0};

  /// Real rotation with transmission probability |t|^2 = transmission.
  static ScatteringMatrix from_transmission(double transmission);

  Eigen::Matrix2cd matrix() const;
  double transmission() const { return std::norm(t); }
  double unitarity_residual() const;

  /// Throws InvalidArgument when off unitarity by more than 1e-12.
  void check() const;
};

/// Two leads as circles of circumference T (turn time at velocity 1), joined
/// at a point. Momentum grid p in (2 pi / T) Z, |p| <= cutoff. Lead 0 is the
/// distinguished lead (measured by Q) and is populated up to mu_l; lead 1 up
/// to mu_r. A positive bias V = mu_r - mu_l pushes carriers into lead 0.
struct TwoCircleSpec {
  ScatteringMatrix s;
  double circumference = kTwoPi;
  double mu_l = 0.0;
  double mu_r = 0.0;
  double cutoff = 0.0;

  double spacing() const { return kTwoPi / circumference; }
  double bias() const { return mu_r - mu_l; }
  double conductance() const { return s.transmission() / kTwoPi; }
  std::vector<double> momenta() const;
};

/// Number of grid momenta in the transport window (mu_l, mu_r].
int two_circle_window_count(const TwoCircleSpec& spec);

/// Zero-temperature model: rho = theta(mu_l - p) ⊕ theta(mu_r - p) per
/// momentum, U applies S pointwise, Q projects lead 0. Exactly commuting and
/// pure. Throws DegenerateFermiLevel when a mu sits on a grid point and
/// EmptyWindow when no momentum lies in (mu_l, mu_r].
QuantumModel build_two_circle(const TwoCircleSpec& spec);

/// Fermi-Dirac occupations at inverse temperature beta in the same geometry.
/// Needs cutoff >= max|mu| + 10/beta so the thermal tails are contained.
QuantumModel thermal_two_circle(const TwoCircleSpec& spec, double beta);

/// The same two-lead junction resolved in position: two rings of `sites`
/// lattice points, U = (cyclic shift) x (S acting on the site pair at the
/// junction), Q the full charge of lead 1, occupations thermal in the band
/// p in (-pi, pi]. One application of U is one unit of time, so here the
/// charge rearrangement U'QU - Q has rank <= 2: the lead charge variance
/// grows with `sites` while the transported fluctuation stays pinned to the
/// junction.
QuantumModel lattice_junction_model(int sites, const ScatteringMatrix& s, double beta,
                                    double mu_lead0, double mu_lead1);

/// chi of a binomial transfer law: (1 - p + p e^{i lambda})^N.
Complex binomial_chi(double p, int n, double lambda);

/// chi of a Poisson transfer law: exp(rate (e^{i lambda} - 1)).
Complex poisson_chi(double rate, double lambda);

double binomial_pmf(int n_total, int k, double p);

enum class NoiseKind {
  JohnsonNyquist,  // <Q^2>/T = 2 G / beta at V = 0
  Schottky,        // <<Q^2>> = <Q>
  LesovikKhlus,    // <<Q^2>> = <Q> (1 - |t|^2)
};

NoiseKind noise_kind_from_string(const std::string& name);

struct NoiseParams {
  double conductance = 0.0;
  double beta = 0.0;
  double mean_charge = 0.0;
  double transmission = 0.0;
};

/// Closed-form reference values with e = 1.
double reference_noise(NoiseKind kind, const NoiseParams& params);

}  // namespace fcs
