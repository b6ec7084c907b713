#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "walltherm/ensemble.hpp"

namespace walltherm {

/// Diagonal observation-noise covariance, one standard deviation per entry of
/// the window's observation vector.
struct NoiseModel {
  Eigen::VectorXd sigma;
};

/// Record of the adaptive tempering schedule for one assimilation window.
struct TemperingTrace {
  std::vector<double> phis;        // ascending, ends at 1
  std::vector<double> ess_values;  // ESS at each accepted phi
  int iterations = 0;
};

/// Raised when a window exceeds the tempering iteration cap.
class ConvergenceFailure : public std::runtime_error {
public:
  ConvergenceFailure(const std::string& what, TemperingTrace trace)
      : std::runtime_error(what), trace(std::move(trace)) {}
  TemperingTrace trace;
};

/// Effective sample size of the tempering increment phi - phi_prev applied to
/// the given squared, noise-weighted misfits.
double ess(const std::vector<double>& misfits, double phi_prev, double phi);

/// Next tempering parameter: 1 if ESS stays above the threshold, otherwise the
/// bisection solution of ESS(phi) = j_thresh on (phi_prev, 1].
double select_phi(const std::vector<double>& misfits, double phi_prev, double j_thresh);

/// Perturbed-observation ensemble Kalman update in latent space. Latents and
/// predictions are stored one member per column. member_rngs supplies the
/// per-member perturbation streams.
Eigen::MatrixXd kalman_update(const Eigen::MatrixXd& latents,
                              const Eigen::MatrixXd& predictions,
                              const Eigen::VectorXd& q, const NoiseModel& noise,
                              double alpha, std::vector<RngStream>& member_rngs);

/// Frozen batch forward map for one window: ThermalSample -> observation vector.
using ForwardMap = std::function<Eigen::VectorXd(const ThermalSample&)>;

struct RenkaOptions {
  double j_thresh = 0.0;  // required, 1 < j_thresh < J
  int max_iterations = 50;
  int workers = 1;
  std::uint64_t master_seed = 0;
  std::string stream_prefix;  // e.g. "renka/window/3"
};

/// One batch-assimilation step: iterate forward evaluation, adaptive tempering
/// and Kalman updates until phi reaches 1. Updates the ensemble in place and
/// returns the tempering trace.
TemperingTrace renka_step(Ensemble& ensemble, const ForwardMap& forward,
                          const Eigen::VectorXd& q, const NoiseModel& noise,
                          const PriorConfig& config, const std::vector<double>& t0_mean,
                          const Mesh& mesh, const RenkaOptions& options);

/// Evaluate the forward map for every member, optionally on several worker
/// threads; results are slot-assigned so the output is independent of the
/// worker count.
Eigen::MatrixXd evaluate_forward(const Ensemble& ensemble, const ForwardMap& forward,
                                 int workers);

}  // namespace walltherm
