#include "walltherm/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "walltherm/priors.hpp"
#include "walltherm/rng.hpp"

namespace walltherm {

namespace {
constexpr double kDay = 86400.0;
}

TruthSpec TruthSpec::defaults() {
  TruthSpec spec;
  // Three layers (breakpoints at multiples of L/16 so that meshes of 2^4
  // elements and finer sample them exactly); the middle layer mimics an
  // insulating cavity. Values pin U = 1.715 and C = 3.55e5 exactly.
  spec.layer_breaks = {0.096875, 0.135625};
  spec.layer_kappa = {1.2, 0.4654427133680369, 0.7};
  spec.layer_c = {1.2e6, 311290.32258064515, 1.3e6};
  // Internal: heating-cycle dominated, with sub-daily components that modulate
  // the surface flux strongly but barely penetrate the wall. External:
  // weather-dominated daily swing.
  spec.internal.mean = 294.5;
  spec.internal.sinusoids = {{2.0, kDay, 0.0}, {0.8, kDay / 2.0, 1.0},
                             {0.6, kDay / 8.0, 2.0}};
  spec.internal.grf_sigma = 1.0;
  spec.internal.grf_ell_s = 10800.0;
  spec.external.mean = 279.0;
  spec.external.sinusoids = {{4.0, kDay, 2.6}};
  spec.external.grf_sigma = 1.5;
  return spec;
}

namespace {

double layer_value(const TruthSpec& spec, const std::vector<double>& values, double x) {
  std::size_t layer = 0;
  while (layer < spec.layer_breaks.size() && x >= spec.layer_breaks[layer]) ++layer;
  return values[layer];
}

std::vector<double> channel_series(const BoundaryChannelSpec& channel,
                                   const std::vector<double>& times,
                                   std::uint64_t seed, const std::string& label) {
  std::vector<double> values(times.size(), channel.mean);
  for (const Sinusoid& s : channel.sinusoids) {
    for (std::size_t i = 0; i < times.size(); ++i) {
      values[i] += s.amplitude *
                   std::sin(2.0 * std::numbers::pi * times[i] / s.period_s + s.phase);
    }
  }
  if (channel.grf_sigma > 0.0) {
    // Matern process sampled by KL on a coarse time grid, then interpolated.
    std::vector<double> grid;
    for (double t = times.front(); t < times.back() + channel.grf_grid_s;
         t += channel.grf_grid_s) {
      grid.push_back(std::min(t, times.back()));
    }
    FieldPriorSpec grf;
    grf.nu = channel.grf_nu;
    grf.ell = channel.grf_ell_s;
    grf.sigma = channel.grf_sigma;
    const KLBasis basis = kl_decompose(matern_covariance(grf, grid));
    RngStream rng = RngStream::derive(seed, label);
    const Eigen::VectorXd field = sample_latent(basis, rng);
    std::size_t k = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      while (k + 2 < grid.size() && grid[k + 1] < times[i]) ++k;
      const double span = grid[k + 1] - grid[k];
      const double w = span > 0.0 ? (times[i] - grid[k]) / span : 0.0;
      values[i] += field[k] + std::min(1.0, std::max(0.0, w)) * (field[k + 1] - field[k]);
    }
  }
  return values;
}

}  // namespace

ThermalSample truth_sample(const TruthSpec& spec, const Mesh& mesh) {
  if (spec.layer_kappa.size() != spec.layer_breaks.size() + 1 ||
      spec.layer_c.size() != spec.layer_breaks.size() + 1) {
    throw std::invalid_argument("truth_sample: layer table sizes inconsistent");
  }
  ThermalSample sample;
  sample.r_i = spec.r_i;
  sample.r_e = spec.r_e;
  sample.kappa.resize(mesh.n_elements);
  sample.c.resize(mesh.n_elements);
  for (int e = 0; e < mesh.n_elements; ++e) {
    const double mid = 0.5 * (mesh.node_positions[e] + mesh.node_positions[e + 1]);
    sample.kappa[e] = layer_value(spec, spec.layer_kappa, mid);
    sample.c[e] = layer_value(spec, spec.layer_c, mid);
  }
  return sample;
}

BoundarySeries gen_boundary_temperatures(const TruthSpec& spec, std::uint64_t seed) {
  BoundarySeries boundary;
  const double t_start = -spec.spinup_days * kDay;
  const double t_end = spec.campaign_days * kDay;
  const std::size_t n =
      static_cast<std::size_t>(std::llround((t_end - t_start) / spec.sample_interval_s)) + 1;
  boundary.times.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    boundary.times[i] = t_start + static_cast<double>(i) * spec.sample_interval_s;
  boundary.times.back() = t_end;
  boundary.t_internal =
      channel_series(spec.internal, boundary.times, seed, "synth/boundary/internal");
  boundary.t_external =
      channel_series(spec.external, boundary.times, seed, "synth/boundary/external");
  return boundary;
}

std::vector<double> spin_up_t0(const TruthSpec& spec, const BoundarySeries& boundary) {
  const Mesh mesh = build_mesh(spec.length, 1 << spec.fine_mesh_exponent);
  ThermalSample sample = truth_sample(spec, mesh);
  const double t_start = boundary.times.front();
  const double ti = boundary.internal_at(t_start);
  const double te = boundary.external_at(t_start);
  sample.t0.resize(mesh.n_nodes());
  for (int i = 0; i < mesh.n_nodes(); ++i) {
    const double frac = mesh.node_positions[i] / mesh.length;
    sample.t0[i] = ti + frac * (te - ti);
  }
  const FluxHistory history =
      solve_hdm(sample, boundary, mesh, spec.sample_interval_s, {0.0});
  return history.final_temperature;
}

SyntheticData gen_measurements(const TruthSpec& spec, const BoundarySeries& boundary,
                               const std::vector<double>& t0_true, std::uint64_t seed) {
  const Mesh mesh = build_mesh(spec.length, 1 << spec.fine_mesh_exponent);
  ThermalSample sample = truth_sample(spec, mesh);
  sample.t0 = t0_true;

  std::vector<double> output_times;
  const double t_end = spec.campaign_days * kDay;
  for (double t = 0.0; t <= t_end + 1e-6; t += spec.sample_interval_s)
    output_times.push_back(std::min(t, t_end));

  BoundarySeries campaign;
  for (std::size_t i = 0; i < boundary.times.size(); ++i) {
    if (boundary.times[i] < -1e-9) continue;
    campaign.times.push_back(boundary.times[i]);
    campaign.t_internal.push_back(boundary.t_internal[i]);
    campaign.t_external.push_back(boundary.t_external[i]);
  }

  SyntheticData data;
  data.t0_true = t0_true;
  data.noiseless = solve_hdm(sample, campaign, mesh, spec.sample_interval_s, output_times);

  MeasurementSeries& meas = data.measurements;
  meas.times = output_times;
  meas.rel_error = spec.epsilon;
  meas.t_internal.resize(output_times.size());
  meas.t_external.resize(output_times.size());
  for (std::size_t i = 0; i < output_times.size(); ++i) {
    meas.t_internal[i] = campaign.internal_at(output_times[i]);
    meas.t_external[i] = campaign.external_at(output_times[i]);
  }

  meas.q_internal = data.noiseless.q_internal;
  meas.q_external = data.noiseless.q_external;
  if (spec.epsilon > 0.0) {
    const int beta = spec.noise_batch_size;
    // Observations after t=0 are grouped into noise windows of beta; the t=0
    // sample shares the first window's sigma.
    const std::size_t n_obs = output_times.size() - 1;
    for (std::size_t w = 0; w * beta < n_obs; ++w) {
      const std::size_t first = 1 + w * beta;
      const std::size_t count = std::min<std::size_t>(beta, n_obs - w * beta);
      double mean_i = 0.0;
      double mean_e = 0.0;
      for (std::size_t i = 0; i < count; ++i) {
        mean_i += std::abs(data.noiseless.q_internal[first + i]);
        mean_e += std::abs(data.noiseless.q_external[first + i]);
      }
      const double sigma_i = spec.epsilon * mean_i / static_cast<double>(count);
      const double sigma_e = spec.epsilon * mean_e / static_cast<double>(count);
      RngStream rng =
          RngStream::derive(seed, "synth/noise/window/" + std::to_string(w));
      if (w == 0) {
        meas.q_internal[0] += sigma_i * rng.normal();
        (*meas.q_external)[0] += sigma_e * rng.normal();
      }
      for (std::size_t i = 0; i < count; ++i) {
        meas.q_internal[first + i] += sigma_i * rng.normal();
        (*meas.q_external)[first + i] += sigma_e * rng.normal();
      }
    }
  }
  return data;
}

}  // namespace walltherm
