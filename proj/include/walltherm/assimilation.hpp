#pragma once

#include <optional>
#include <vector>

#include "walltherm/renka.hpp"

namespace walltherm {

enum class FluxMode { BothFluxes, InternalOnly };

/// Timestamped near-air temperatures and surface heat fluxes. q_external is
/// present exactly when the dataset supports both-fluxes assimilation.
struct MeasurementSeries {
  std::vector<double> times;  // s, ascending
  std::vector<double> t_internal;
  std::vector<double> t_external;
  std::vector<double> q_internal;
  std::optional<std::vector<double>> q_external;
  double rel_error = 0.05;
};

/// Partition of the assimilation span into windows of batch_size observations.
struct WindowPlan {
  int batch_size = 30;
  std::vector<double> end_times;
  // window m covers observation indices [first_index[m], first_index[m] + batch_size)
  std::vector<std::size_t> first_index;

  int window_count() const { return static_cast<int>(end_times.size()); }
};

/// Build the plan over observations with times in (0, span_end]; trailing
/// observations that do not fill a window are left unassimilated.
WindowPlan plan_windows(const MeasurementSeries& measurements, double span_end,
                        int batch_size);

struct Summary {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

/// Mean and equal-tail empirical quantiles (linear-interpolation definition).
Summary summarize(std::vector<double> samples, double alpha);

struct FieldSummary {
  std::vector<double> mean;
  std::vector<double> lo;
  std::vector<double> hi;
};

FieldSummary summarize_field(const std::vector<std::vector<double>>& member_fields,
                             double alpha);

struct DerivedSamples {
  std::vector<double> u_samples;
  std::vector<double> c_samples;
  std::vector<double> r_i_samples;
  std::vector<double> r_e_samples;
};

DerivedSamples derived_quantities(const Ensemble& ensemble, const Mesh& mesh);

/// Per-window posterior record.
struct PosteriorSnapshot {
  int window_index = 0;
  double time_s = 0.0;
  FieldSummary kappa;  // per element
  FieldSummary c;      // per element
  FieldSummary t0;     // per node
  DerivedSamples derived;
  TemperingTrace trace;
  double wall_seconds = 0.0;
};

struct AssimilationConfig {
  FluxMode mode = FluxMode::BothFluxes;
  double assimilation_span_s = 0.0;  // observations with t in (0, span] are assimilated
  int batch_size = 30;
  double dt = 300.0;
  double j_thresh = 0.0;  // defaulted to J/3 when 0
  double alpha_field = 0.05;
  int max_iterations = 50;
  int workers = 1;
  std::uint64_t master_seed = 0;
};

/// Algorithm-level orchestration: batch-sequential REnKA over the window plan.
/// The prior ensemble is consumed and evolved in place; one snapshot is
/// emitted per window.
std::vector<PosteriorSnapshot> run_sequential(const AssimilationConfig& config,
                                              const MeasurementSeries& measurements,
                                              Ensemble& ensemble,
                                              const PriorConfig& prior_config,
                                              const std::vector<double>& t0_mean,
                                              const Mesh& mesh);

/// Per-window noise sigma from the measured fluxes: eps * mean |q| per channel.
NoiseModel window_noise(const MeasurementSeries& measurements, const WindowPlan& plan,
                        int window, FluxMode mode);

/// Ensemble of heat-flux trajectories with pointwise summaries.
struct PredictiveEnsemble {
  std::vector<double> times;
  std::vector<std::vector<double>> member_q_internal;  // [member][time]
  std::vector<std::vector<double>> member_q_external;
  FieldSummary q_internal;
  FieldSummary q_external;
};

/// One full HDM solve per member over [0, max(horizon_times)] with the
/// member's own initial temperature.
PredictiveEnsemble predict(const Ensemble& ensemble, const BoundarySeries& boundary_future,
                           const std::vector<double>& horizon_times, const Mesh& mesh,
                           double dt, double alpha, int workers = 1);

}  // namespace walltherm
