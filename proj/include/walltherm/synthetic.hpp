#pragma once

#include <cstdint>
#include <vector>

#include "walltherm/assimilation.hpp"
#include "walltherm/heat_model.hpp"

namespace walltherm {

struct Sinusoid {
  double amplitude = 0.0;  // K
  double period_s = 86400.0;
  double phase = 0.0;  // rad
};

/// One synthetic near-air temperature channel: mean + sinusoids + a smooth
/// Matern process in time.
struct BoundaryChannelSpec {
  double mean = 290.0;
  std::vector<Sinusoid> sinusoids;
  double grf_sigma = 1.0;     // K
  double grf_ell_s = 21600.0; // correlation time
  double grf_nu = 1.5;
  double grf_grid_s = 1800.0; // KL sampling grid, interpolated to the data grid
};

/// Configuration of the virtual experiment: piecewise-constant truth fields,
/// fine generation mesh, spans and noise level.
struct TruthSpec {
  double length = 0.31;
  std::vector<double> layer_breaks;  // interior breakpoints, ascending in (0, L)
  std::vector<double> layer_kappa;   // one per layer
  std::vector<double> layer_c;
  double r_i = 0.13;
  double r_e = 0.04;
  int fine_mesh_exponent = 9;
  double sample_interval_s = 300.0;
  double spinup_days = 6.25;
  double campaign_days = 13.5;
  double epsilon = 0.05;
  int noise_batch_size = 30;
  BoundaryChannelSpec internal;
  BoundaryChannelSpec external;

  /// Defaults reproducing the benchmark effective properties
  /// U = 1.715 W m^-2 K^-1 and C = 3.55e5 J m^-2 K^-1.
  static TruthSpec defaults();
};

/// Truth fields restricted to a mesh by element-midpoint sampling; t0 is left
/// empty (filled by spin-up).
ThermalSample truth_sample(const TruthSpec& spec, const Mesh& mesh);

BoundarySeries gen_boundary_temperatures(const TruthSpec& spec, std::uint64_t seed);

/// Fine-mesh solve over the spin-up span starting from a linear profile;
/// returns the nodal temperature at t = 0.
std::vector<double> spin_up_t0(const TruthSpec& spec, const BoundarySeries& boundary);

struct SyntheticData {
  MeasurementSeries measurements;  // noisy
  FluxHistory noiseless;
  std::vector<double> t0_true;  // fine-mesh nodes
};

/// Fine-mesh flux generation over [0, campaign] plus per-window Gaussian noise
/// with sigma = epsilon * mean |q| per channel.
SyntheticData gen_measurements(const TruthSpec& spec, const BoundarySeries& boundary,
                               const std::vector<double>& t0_true, std::uint64_t seed);

}  // namespace walltherm
