#pragma once

#include <vector>

namespace walltherm {

/// Uniform 1D mesh over the wall thickness [0, L].
struct Mesh {
  double length = 0.0;
  int n_elements = 0;
  std::vector<double> node_positions;  // size n_elements + 1, ascending
  std::vector<double> element_widths;  // size n_elements

  int n_nodes() const { return n_elements + 1; }
};

Mesh build_mesh(double length, int n_elements);

/// One realisation of the inversion unknown: per-element conductivity and
/// volumetric heat capacity, nodal initial temperature, surface resistances.
struct ThermalSample {
  std::vector<double> kappa;  // W m^-1 K^-1, per element
  std::vector<double> c;      // J m^-3 K^-1, per element
  std::vector<double> t0;     // K, per node
  double r_i = 0.0;           // m^2 K W^-1
  double r_e = 0.0;           // m^2 K W^-1
};

/// Near-air temperature series driving the Robin boundaries. Spacing may be
/// irregular; values are interpolated piecewise-linearly in time.
struct BoundarySeries {
  std::vector<double> times;       // s, strictly ascending
  std::vector<double> t_internal;  // K
  std::vector<double> t_external;  // K

  double internal_at(double t) const;
  double external_at(double t) const;
};

/// Surface heat fluxes at the requested output times plus the final
/// temperature profile.
struct FluxHistory {
  std::vector<double> times;
  std::vector<double> q_internal;  // W m^-2
  std::vector<double> q_external;  // W m^-2
  std::vector<double> final_temperature;  // K, per node
};

/// Evolve the heat diffusion model with linear FEM in space (consistent mass,
/// piecewise-constant kappa/c per element, Robin boundary terms) and backward
/// Euler in time. Fluxes are extracted from the Robin relations at the surface
/// nodes; output times between steps are served by linear interpolation.
FluxHistory solve_hdm(const ThermalSample& sample, const BoundarySeries& boundary,
                      const Mesh& mesh, double dt,
                      const std::vector<double>& output_times);

/// Thermal transmittance [R_I + R_E + sum_e w_e/kappa_e]^-1.
double compute_u_value(const ThermalSample& sample, const Mesh& mesh);

/// Areal heat capacity sum_e w_e * c_e.
double compute_c_value(const ThermalSample& sample, const Mesh& mesh);

}  // namespace walltherm
