#include "walltherm/priors.hpp"

#include <cmath>
#include <stdexcept>

#include "walltherm/ensemble.hpp"

namespace walltherm {

namespace {

double matern_kernel(const FieldPriorSpec& spec, double r) {
  if (r == 0.0) return spec.sigma * spec.sigma;
  const double s = r / spec.ell;
  const double bessel = std::cyl_bessel_k(spec.nu, s);
  if (bessel == 0.0) return 0.0;  // underflow at large separation
  const double prefactor =
      std::pow(2.0, 1.0 - spec.nu) / std::tgamma(spec.nu);
  return spec.sigma * spec.sigma * prefactor * std::pow(s, spec.nu) * bessel;
}

}  // namespace

Eigen::MatrixXd matern_covariance(const FieldPriorSpec& spec,
                                  const std::vector<double>& positions) {
  if (positions.empty())
    throw std::invalid_argument("matern_covariance: empty positions");
  const Eigen::Index n = static_cast<Eigen::Index>(positions.size());
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    cov(i, i) = spec.sigma * spec.sigma;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double value = matern_kernel(spec, std::abs(positions[i] - positions[j]));
      cov(i, j) = value;
      cov(j, i) = value;
    }
  }
  return cov;
}

KLBasis kl_decompose(const Eigen::MatrixXd& cov) {
  if (cov.rows() != cov.cols())
    throw std::invalid_argument("kl_decompose: matrix not square");
  const double asym = (cov - cov.transpose()).norm();
  if (asym > 1e-8 * std::max(1.0, cov.norm()))
    throw std::invalid_argument("kl_decompose: matrix not symmetric");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("kl_decompose: eigendecomposition failed");

  const Eigen::Index n = cov.rows();
  KLBasis basis;
  basis.eigenvalues.resize(n);
  basis.eigenvectors.resize(n, n);
  // Eigen returns ascending order; store descending with negatives clipped.
  for (Eigen::Index i = 0; i < n; ++i) {
    basis.eigenvalues[i] = std::max(0.0, solver.eigenvalues()[n - 1 - i]);
    basis.eigenvectors.col(i) = solver.eigenvectors().col(n - 1 - i);
  }
  return basis;
}

Eigen::VectorXd sample_latent(const KLBasis& basis, RngStream& rng) {
  const Eigen::Index n = basis.eigenvalues.size();
  Eigen::VectorXd coeffs(n);
  for (Eigen::Index i = 0; i < n; ++i)
    coeffs[i] = std::sqrt(basis.eigenvalues[i]) * rng.normal();
  return basis.eigenvectors * coeffs;
}

std::vector<double> t0_prior_mean(double t_i0, double t_e0, double q_i0, double q_e0,
                                  double r_i_mean, double r_e_mean, const Mesh& mesh) {
  const double external_surface = r_e_mean * q_e0 + t_e0;
  const double internal_surface = t_i0 - r_i_mean * q_i0;
  std::vector<double> mean(mesh.n_nodes());
  for (int i = 0; i < mesh.n_nodes(); ++i) {
    const double frac = (mesh.length - mesh.node_positions[i]) / mesh.length;
    mean[i] = external_surface + frac * (internal_surface - external_surface);
  }
  return mean;
}

ThermalSample push_forward(const LatentSample& latent, const PriorConfig& config,
                           const std::vector<double>& t0_mean, const Mesh& mesh) {
  const int ne = mesh.n_elements;
  if (latent.psi_kappa.size() != ne + 1 || latent.psi_c.size() != ne + 1 ||
      latent.psi_t0.size() != ne + 1 ||
      t0_mean.size() != static_cast<std::size_t>(ne + 1)) {
    throw std::invalid_argument("push_forward: latent lengths do not match mesh");
  }
  ThermalSample sample;
  sample.kappa.resize(ne);
  sample.c.resize(ne);
  sample.t0.resize(ne + 1);
  for (int e = 0; e < ne; ++e) {
    sample.kappa[e] = 0.5 * config.kappa.omega *
                      (std::exp(latent.psi_kappa[e]) + std::exp(latent.psi_kappa[e + 1]));
    sample.c[e] = 0.5 * config.c.omega *
                  (std::exp(latent.psi_c[e]) + std::exp(latent.psi_c[e + 1]));
  }
  for (int i = 0; i <= ne; ++i) sample.t0[i] = t0_mean[i] + latent.psi_t0[i];
  sample.r_i = config.r_i.omega * std::exp(latent.psi_i);
  sample.r_e = config.r_e.omega * std::exp(latent.psi_e);
  return sample;
}

PriorBases build_prior_bases(const PriorConfig& config, const Mesh& mesh) {
  PriorBases bases;
  bases.kappa = kl_decompose(matern_covariance(config.kappa, mesh.node_positions));
  bases.c = kl_decompose(matern_covariance(config.c, mesh.node_positions));
  bases.t0 = kl_decompose(matern_covariance(config.t0, mesh.node_positions));
  return bases;
}

LatentSample sample_prior_latent(const PriorBases& bases, const PriorConfig& config,
                                 RngStream& rng) {
  LatentSample latent;
  latent.psi_kappa = sample_latent(bases.kappa, rng);
  latent.psi_c = sample_latent(bases.c, rng);
  latent.psi_t0 = sample_latent(bases.t0, rng);
  latent.psi_i = config.r_i.sigma * rng.normal();
  latent.psi_e = config.r_e.sigma * rng.normal();
  return latent;
}

Ensemble generate_prior_ensemble(const PriorConfig& config, const PriorBases& bases,
                                 const std::vector<double>& t0_mean, const Mesh& mesh,
                                 int ensemble_size, std::uint64_t master_seed) {
  if (ensemble_size < 2)
    throw std::invalid_argument("generate_prior_ensemble: need at least 2 members");
  Ensemble ensemble;
  ensemble.latents.reserve(ensemble_size);
  ensemble.samples.reserve(ensemble_size);
  for (int j = 0; j < ensemble_size; ++j) {
    RngStream stream =
        RngStream::derive(master_seed, "prior/member/" + std::to_string(j));
    ensemble.latents.push_back(sample_prior_latent(bases, config, stream));
    ensemble.samples.push_back(push_forward(ensemble.latents.back(), config, t0_mean, mesh));
  }
  return ensemble;
}

}  // namespace walltherm
