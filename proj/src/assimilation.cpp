#include "walltherm/assimilation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace walltherm {

WindowPlan plan_windows(const MeasurementSeries& measurements, double span_end,
                        int batch_size) {
  if (batch_size < 1) throw std::invalid_argument("plan_windows: batch_size must be >= 1");
  WindowPlan plan;
  plan.batch_size = batch_size;
  std::vector<std::size_t> obs_indices;
  for (std::size_t i = 0; i < measurements.times.size(); ++i) {
    if (measurements.times[i] > 0.0 && measurements.times[i] <= span_end + 1e-9)
      obs_indices.push_back(i);
  }
  const std::size_t n_windows = obs_indices.size() / batch_size;
  for (std::size_t m = 0; m < n_windows; ++m) {
    const std::size_t first = obs_indices[m * batch_size];
    plan.first_index.push_back(first);
    plan.end_times.push_back(measurements.times[obs_indices[(m + 1) * batch_size - 1]]);
  }
  return plan;
}

Summary summarize(std::vector<double> samples, double alpha) {
  if (samples.size() < 2) throw std::invalid_argument("summarize: need at least 2 samples");
  if (!(alpha > 0.0) || !(alpha < 1.0))
    throw std::invalid_argument("summarize: alpha outside (0,1)");
  std::sort(samples.begin(), samples.end());
  const auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(samples.size() - 1);
    const std::size_t i = static_cast<std::size_t>(pos);
    if (i + 1 >= samples.size()) return samples.back();
    const double frac = pos - static_cast<double>(i);
    return samples[i] + frac * (samples[i + 1] - samples[i]);
  };
  Summary s;
  for (double v : samples) s.mean += v;
  s.mean /= static_cast<double>(samples.size());
  s.lo = quantile(alpha / 2.0);
  s.hi = quantile(1.0 - alpha / 2.0);
  return s;
}

FieldSummary summarize_field(const std::vector<std::vector<double>>& member_fields,
                             double alpha) {
  if (member_fields.size() < 2)
    throw std::invalid_argument("summarize_field: need at least 2 members");
  const std::size_t n_points = member_fields.front().size();
  FieldSummary summary;
  summary.mean.resize(n_points);
  summary.lo.resize(n_points);
  summary.hi.resize(n_points);
  std::vector<double> column(member_fields.size());
  for (std::size_t i = 0; i < n_points; ++i) {
    for (std::size_t j = 0; j < member_fields.size(); ++j) column[j] = member_fields[j][i];
    const Summary s = summarize(column, alpha);
    summary.mean[i] = s.mean;
    summary.lo[i] = s.lo;
    summary.hi[i] = s.hi;
  }
  return summary;
}

DerivedSamples derived_quantities(const Ensemble& ensemble, const Mesh& mesh) {
  DerivedSamples derived;
  derived.u_samples.reserve(ensemble.size());
  derived.c_samples.reserve(ensemble.size());
  derived.r_i_samples.reserve(ensemble.size());
  derived.r_e_samples.reserve(ensemble.size());
  for (const ThermalSample& sample : ensemble.samples) {
    derived.u_samples.push_back(compute_u_value(sample, mesh));
    derived.c_samples.push_back(compute_c_value(sample, mesh));
    derived.r_i_samples.push_back(sample.r_i);
    derived.r_e_samples.push_back(sample.r_e);
  }
  return derived;
}

NoiseModel window_noise(const MeasurementSeries& measurements, const WindowPlan& plan,
                        int window, FluxMode mode) {
  const int beta = plan.batch_size;
  const std::size_t first = plan.first_index[window];
  double mean_abs_i = 0.0;
  for (int i = 0; i < beta; ++i) mean_abs_i += std::abs(measurements.q_internal[first + i]);
  mean_abs_i /= beta;
  NoiseModel noise;
  const int n_obs = (mode == FluxMode::BothFluxes) ? 2 * beta : beta;
  noise.sigma.resize(n_obs);
  noise.sigma.head(beta).setConstant(measurements.rel_error * mean_abs_i);
  if (mode == FluxMode::BothFluxes) {
    if (!measurements.q_external)
      throw std::invalid_argument("window_noise: both-fluxes mode without q_external");
    double mean_abs_e = 0.0;
    for (int i = 0; i < beta; ++i)
      mean_abs_e += std::abs((*measurements.q_external)[first + i]);
    mean_abs_e /= beta;
    noise.sigma.tail(beta).setConstant(measurements.rel_error * mean_abs_e);
  }
  return noise;
}

namespace {

PosteriorSnapshot make_snapshot(int window, double time_s, const Ensemble& ensemble,
                                const Mesh& mesh, double alpha, TemperingTrace trace,
                                double wall_seconds) {
  PosteriorSnapshot snapshot;
  snapshot.window_index = window;
  snapshot.time_s = time_s;
  std::vector<std::vector<double>> kappa_fields, c_fields, t0_fields;
  for (const ThermalSample& sample : ensemble.samples) {
    kappa_fields.push_back(sample.kappa);
    c_fields.push_back(sample.c);
    t0_fields.push_back(sample.t0);
  }
  snapshot.kappa = summarize_field(kappa_fields, alpha);
  snapshot.c = summarize_field(c_fields, alpha);
  snapshot.t0 = summarize_field(t0_fields, alpha);
  snapshot.derived = derived_quantities(ensemble, mesh);
  snapshot.trace = std::move(trace);
  snapshot.wall_seconds = wall_seconds;
  return snapshot;
}

}  // namespace

std::vector<PosteriorSnapshot> run_sequential(const AssimilationConfig& config,
                                              const MeasurementSeries& measurements,
                                              Ensemble& ensemble,
                                              const PriorConfig& prior_config,
                                              const std::vector<double>& t0_mean,
                                              const Mesh& mesh) {
  if (config.mode == FluxMode::BothFluxes && !measurements.q_external)
    throw std::invalid_argument("run_sequential: both-fluxes mode but q_external missing");
  const WindowPlan plan =
      plan_windows(measurements, config.assimilation_span_s, config.batch_size);
  const double j_thresh =
      (config.j_thresh > 0.0) ? config.j_thresh : ensemble.size() / 3.0;

  std::vector<PosteriorSnapshot> snapshots;
  for (int m = 0; m < plan.window_count(); ++m) {
    const auto start = std::chrono::steady_clock::now();
    const std::size_t first = plan.first_index[m];
    const int beta = plan.batch_size;

    // Frozen batch map for this window: boundary data up to tau_m, fluxes at
    // the window's observation times, always re-solved from t=0.
    const std::size_t last = first + beta - 1;
    BoundarySeries boundary;
    boundary.times.assign(measurements.times.begin(),
                          measurements.times.begin() + last + 1);
    boundary.t_internal.assign(measurements.t_internal.begin(),
                               measurements.t_internal.begin() + last + 1);
    boundary.t_external.assign(measurements.t_external.begin(),
                               measurements.t_external.begin() + last + 1);
    std::vector<double> window_times(measurements.times.begin() + first,
                                     measurements.times.begin() + last + 1);

    const int n_obs = (config.mode == FluxMode::BothFluxes) ? 2 * beta : beta;
    Eigen::VectorXd q(n_obs);
    for (int i = 0; i < beta; ++i) q[i] = measurements.q_internal[first + i];
    if (config.mode == FluxMode::BothFluxes) {
      for (int i = 0; i < beta; ++i) q[beta + i] = (*measurements.q_external)[first + i];
    }
    const NoiseModel noise = window_noise(measurements, plan, m, config.mode);

    const double dt = config.dt;
    const FluxMode mode = config.mode;
    ForwardMap forward = [&boundary, &window_times, &mesh, dt, beta,
                          mode](const ThermalSample& sample) {
      const FluxHistory history = solve_hdm(sample, boundary, mesh, dt, window_times);
      const int n = (mode == FluxMode::BothFluxes) ? 2 * beta : beta;
      Eigen::VectorXd out(n);
      for (int i = 0; i < beta; ++i) out[i] = history.q_internal[i];
      if (mode == FluxMode::BothFluxes) {
        for (int i = 0; i < beta; ++i) out[beta + i] = history.q_external[i];
      }
      return out;
    };

    RenkaOptions options;
    options.j_thresh = j_thresh;
    options.max_iterations = config.max_iterations;
    options.workers = config.workers;
    options.master_seed = config.master_seed;
    options.stream_prefix = "renka/window/" + std::to_string(m);
    TemperingTrace trace =
        renka_step(ensemble, forward, q, noise, prior_config, t0_mean, mesh, options);

    const double wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    snapshots.push_back(make_snapshot(m, plan.end_times[m], ensemble, mesh,
                                      config.alpha_field, std::move(trace), wall_seconds));
  }
  return snapshots;
}

PredictiveEnsemble predict(const Ensemble& ensemble, const BoundarySeries& boundary_future,
                           const std::vector<double>& horizon_times, const Mesh& mesh,
                           double dt, double alpha, int workers) {
  if (horizon_times.empty()) throw std::invalid_argument("predict: no horizon times");
  PredictiveEnsemble predictive;
  predictive.times = horizon_times;
  const int n_members = ensemble.size();
  predictive.member_q_internal.resize(n_members);
  predictive.member_q_external.resize(n_members);

  ForwardMap forward = [&](const ThermalSample& sample) {
    const FluxHistory history = solve_hdm(sample, boundary_future, mesh, dt, horizon_times);
    Eigen::VectorXd out(2 * horizon_times.size());
    for (std::size_t i = 0; i < horizon_times.size(); ++i) {
      out[i] = history.q_internal[i];
      out[horizon_times.size() + i] = history.q_external[i];
    }
    return out;
  };
  const Eigen::MatrixXd flat = evaluate_forward(ensemble, forward, workers);
  const std::size_t n_times = horizon_times.size();
  for (int j = 0; j < n_members; ++j) {
    predictive.member_q_internal[j].assign(flat.col(j).data(), flat.col(j).data() + n_times);
    predictive.member_q_external[j].assign(flat.col(j).data() + n_times,
                                           flat.col(j).data() + 2 * n_times);
  }
  predictive.q_internal = summarize_field(predictive.member_q_internal, alpha);
  predictive.q_external = summarize_field(predictive.member_q_external, alpha);
  return predictive;
}

}  // namespace walltherm
