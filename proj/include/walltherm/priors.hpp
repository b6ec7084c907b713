#pragma once

#include <Eigen/Dense>
#include <vector>

#include "walltherm/heat_model.hpp"
#include "walltherm/rng.hpp"

namespace walltherm {

/// Hyperparameters of one Whittle-Matern field prior.
struct FieldPriorSpec {
  double nu = 1.05;     // smoothness
  double ell = 0.0062;  // correlation length (m)
  double sigma = 0.65;  // latent standard deviation
  double omega = 0.75;  // scale factor in target units
};

/// Hyperparameters of one log-normal scalar prior: R = omega * exp(psi).
struct ScalarPriorSpec {
  double omega = 0.1;
  double sigma = 0.5;
};

/// All prior hyperparameters; defaults reproduce the synthetic benchmark.
struct PriorConfig {
  FieldPriorSpec kappa{1.05, 0.0062, 0.65, 0.75};
  FieldPriorSpec c{1.05, 0.0062, 0.70, 7.5e5};
  FieldPriorSpec t0{1.05, 0.01, 1.87, 0.0};  // omega is the data-informed mean
  ScalarPriorSpec r_i{0.1, 0.5};
  ScalarPriorSpec r_e{0.07, 0.5};
};

/// Karhunen-Loeve basis of a covariance matrix: descending eigenvalues
/// (clipped at zero) and orthonormal eigenvectors (one per column).
struct KLBasis {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
};

/// Gaussian coordinates of one ensemble member.
struct LatentSample {
  Eigen::VectorXd psi_kappa;  // nodal
  Eigen::VectorXd psi_c;      // nodal
  Eigen::VectorXd psi_t0;     // nodal
  double psi_i = 0.0;
  double psi_e = 0.0;
};

/// Whittle-Matern covariance matrix on the given positions; the diagonal is
/// sigma^2 exactly (r -> 0 limit of the kernel).
Eigen::MatrixXd matern_covariance(const FieldPriorSpec& spec,
                                  const std::vector<double>& positions);

KLBasis kl_decompose(const Eigen::MatrixXd& cov);

/// One field draw: sum_i sqrt(lambda_i) w_i xi_i with standard-normal xi.
Eigen::VectorXd sample_latent(const KLBasis& basis, RngStream& rng);

/// Data-informed prior mean for T0: linear profile anchored at the surface
/// temperatures implied by the t=0 measurements and the prior-mean resistances.
std::vector<double> t0_prior_mean(double t_i0, double t_e0, double q_i0, double q_e0,
                                  double r_i_mean, double r_e_mean, const Mesh& mesh);

/// Map latent coordinates to physical fields. Nodal exp values are averaged
/// onto elements (arithmetic mean of the two bounding nodes).
ThermalSample push_forward(const LatentSample& latent, const PriorConfig& config,
                           const std::vector<double>& t0_mean, const Mesh& mesh);

/// Precomputed KL bases for the three field priors on a mesh.
struct PriorBases {
  KLBasis kappa;
  KLBasis c;
  KLBasis t0;
};

PriorBases build_prior_bases(const PriorConfig& config, const Mesh& mesh);

/// One latent draw from the prior, consuming the given stream in a fixed order.
LatentSample sample_prior_latent(const PriorBases& bases, const PriorConfig& config,
                                 RngStream& rng);

}  // namespace walltherm
