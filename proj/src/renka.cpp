#include "walltherm/renka.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace walltherm {

namespace {

Eigen::VectorXd pack_latent(const LatentSample& latent) {
  const Eigen::Index n = latent.psi_kappa.size();
  Eigen::VectorXd v(3 * n + 2);
  v.segment(0, n) = latent.psi_kappa;
  v.segment(n, n) = latent.psi_c;
  v.segment(2 * n, n) = latent.psi_t0;
  v[3 * n] = latent.psi_i;
  v[3 * n + 1] = latent.psi_e;
  return v;
}

LatentSample unpack_latent(const Eigen::VectorXd& v) {
  const Eigen::Index n = (v.size() - 2) / 3;
  LatentSample latent;
  latent.psi_kappa = v.segment(0, n);
  latent.psi_c = v.segment(n, n);
  latent.psi_t0 = v.segment(2 * n, n);
  latent.psi_i = v[3 * n];
  latent.psi_e = v[3 * n + 1];
  return latent;
}

std::vector<double> normalised_weights(const std::vector<double>& misfits,
                                       double dphi) {
  const double shift = *std::min_element(misfits.begin(), misfits.end());
  std::vector<double> weights(misfits.size());
  double total = 0.0;
  for (std::size_t j = 0; j < misfits.size(); ++j) {
    weights[j] = std::exp(-dphi * (misfits[j] - shift));
    total += weights[j];
  }
  if (!(total > 0.0))
    throw std::runtime_error("ess: all tempering weights underflowed");
  for (double& w : weights) w /= total;
  return weights;
}

}  // namespace

double ess(const std::vector<double>& misfits, double phi_prev, double phi) {
  if (!(phi > phi_prev) || phi_prev < 0.0)
    throw std::invalid_argument("ess: need phi > phi_prev >= 0");
  const auto weights = normalised_weights(misfits, phi - phi_prev);
  double sum_sq = 0.0;
  for (double w : weights) sum_sq += w * w;
  return 1.0 / sum_sq;
}

double select_phi(const std::vector<double>& misfits, double phi_prev,
                  double j_thresh) {
  // ESS is non-increasing in phi, so the minimum over (phi_prev, 1] is at 1.
  if (ess(misfits, phi_prev, 1.0) > j_thresh) return 1.0;
  double lo = phi_prev;
  double hi = 1.0;
  for (int iter = 0; iter < 60 && hi - lo > 1e-8; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (ess(misfits, phi_prev, mid) > j_thresh) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

Eigen::MatrixXd kalman_update(const Eigen::MatrixXd& latents,
                              const Eigen::MatrixXd& predictions,
                              const Eigen::VectorXd& q, const NoiseModel& noise,
                              double alpha, std::vector<RngStream>& member_rngs) {
  if (!predictions.allFinite())
    throw std::invalid_argument("kalman_update: non-finite predictions");
  if (!(alpha > 0.0)) throw std::invalid_argument("kalman_update: alpha must be positive");
  const Eigen::Index n_obs = predictions.rows();
  const Eigen::Index n_members = predictions.cols();
  if (latents.cols() != n_members || q.size() != n_obs ||
      noise.sigma.size() != n_obs) {
    throw std::invalid_argument("kalman_update: dimension mismatch");
  }

  const Eigen::VectorXd g_mean = predictions.rowwise().mean();
  const Eigen::VectorXd psi_mean = latents.rowwise().mean();
  const Eigen::MatrixXd g_centred = predictions.colwise() - g_mean;
  const Eigen::MatrixXd psi_centred = latents.colwise() - psi_mean;

  const double norm = 1.0 / static_cast<double>(n_members - 1);
  Eigen::MatrixXd a = norm * (g_centred * g_centred.transpose());
  a.diagonal() += alpha * noise.sigma.array().square().matrix();
  const Eigen::MatrixXd b = norm * (psi_centred * g_centred.transpose());

  const Eigen::LDLT<Eigen::MatrixXd> factor(a);
  if (factor.info() != Eigen::Success)
    throw std::runtime_error("kalman_update: indefinite innovation covariance");

  Eigen::MatrixXd updated = latents;
  const double noise_scale = std::sqrt(alpha);
  for (Eigen::Index j = 0; j < n_members; ++j) {
    Eigen::VectorXd residual = q - predictions.col(j);
    for (Eigen::Index i = 0; i < n_obs; ++i)
      residual[i] += noise_scale * noise.sigma[i] * member_rngs[j].normal();
    updated.col(j) += b * factor.solve(residual);
  }
  return updated;
}

Eigen::MatrixXd evaluate_forward(const Ensemble& ensemble, const ForwardMap& forward,
                                 int workers) {
  const int n_members = ensemble.size();
  std::vector<Eigen::VectorXd> results(n_members);
  workers = std::max(1, std::min(workers, n_members));
  if (workers == 1) {
    for (int j = 0; j < n_members; ++j) results[j] = forward(ensemble.samples[j]);
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w]() {
        try {
          for (int j = w; j < n_members; j += workers)
            results[j] = forward(ensemble.samples[j]);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
  }
  Eigen::MatrixXd predictions(results[0].size(), n_members);
  for (int j = 0; j < n_members; ++j) predictions.col(j) = results[j];
  return predictions;
}

TemperingTrace renka_step(Ensemble& ensemble, const ForwardMap& forward,
                          const Eigen::VectorXd& q, const NoiseModel& noise,
                          const PriorConfig& config, const std::vector<double>& t0_mean,
                          const Mesh& mesh, const RenkaOptions& options) {
  const int n_members = ensemble.size();
  if (!(options.j_thresh > 1.0) || !(options.j_thresh < n_members))
    throw std::invalid_argument("renka_step: need 1 < j_thresh < J");

  TemperingTrace trace;
  double phi = 0.0;
  Eigen::MatrixXd latents(pack_latent(ensemble.latents[0]).size(), n_members);
  for (int j = 0; j < n_members; ++j) latents.col(j) = pack_latent(ensemble.latents[j]);

  while (phi < 1.0) {
    if (trace.iterations >= options.max_iterations)
      throw ConvergenceFailure("renka_step: tempering iteration cap exceeded", trace);
    ++trace.iterations;
    const int r = trace.iterations;

    const Eigen::MatrixXd predictions = evaluate_forward(ensemble, forward, options.workers);
    if (!predictions.allFinite())
      throw std::invalid_argument("renka_step: diverged forward run");

    std::vector<double> misfits(n_members);
    for (int j = 0; j < n_members; ++j) {
      misfits[j] =
          ((q - predictions.col(j)).array() / noise.sigma.array()).matrix().squaredNorm();
    }

    const double phi_next = select_phi(misfits, phi, options.j_thresh);
    const double alpha = 1.0 / (phi_next - phi);

    std::vector<RngStream> member_rngs;
    member_rngs.reserve(n_members);
    for (int j = 0; j < n_members; ++j) {
      member_rngs.push_back(RngStream::derive(
          options.master_seed, options.stream_prefix + "/iter/" + std::to_string(r) +
                                   "/member/" + std::to_string(j)));
    }
    latents = kalman_update(latents, predictions, q, noise, alpha, member_rngs);

    for (int j = 0; j < n_members; ++j) {
      ensemble.latents[j] = unpack_latent(latents.col(j));
      ensemble.samples[j] = push_forward(ensemble.latents[j], config, t0_mean, mesh);
    }

    trace.phis.push_back(phi_next);
    trace.ess_values.push_back(ess(misfits, phi, phi_next));
    phi = phi_next;
  }
  return trace;
}

}  // namespace walltherm
