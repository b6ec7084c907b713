#pragma once

#include <string>

#include "walltherm/assimilation.hpp"
#include "walltherm/config.hpp"
#include "walltherm/diagnostics.hpp"
#include "walltherm/synthetic.hpp"

namespace walltherm {

/// Raised on unreadable or schema-violating data files.
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Format a double at 17 significant digits (value round-trip).
std::string format_value(double value);

// measurements.csv: header
// time_s,t_internal_K,t_external_K,q_internal_Wm2,q_external_Wm2
// with a literal NA external column for internal-only datasets.
void write_measurements_csv(const std::string& path, const MeasurementSeries& series);
MeasurementSeries read_measurements_csv(const std::string& path);

// boundary.csv: time_s,t_internal_K,t_external_K (covers the spin-up span too).
void write_boundary_csv(const std::string& path, const BoundarySeries& boundary);
BoundarySeries read_boundary_csv(const std::string& path);

/// Truth sidecar: layers, resistances, fine-mesh T0 profile, U and C.
void write_truth_json(const std::string& path, const TruthSpec& spec,
                      const std::vector<double>& t0_true, double u_true, double c_true);

struct TruthSidecar {
  double u_true = 0.0;
  double c_true = 0.0;
  double r_i = 0.0;
  double r_e = 0.0;
};

TruthSidecar read_truth_json(const std::string& path);

void write_snapshot_json(const std::string& path, const PosteriorSnapshot& snapshot,
                         double alpha_scalar);

/// Latent-ensemble checkpoint so `predict` can re-solve per member.
void write_ensemble_json(const std::string& path, const Ensemble& ensemble,
                         const std::vector<double>& t0_mean, const Mesh& mesh,
                         double assimilated_until_s);

struct EnsembleCheckpoint {
  Ensemble ensemble;  // samples re-derived via push_forward on load
  std::vector<double> t0_mean;
  Mesh mesh;
  double assimilated_until_s = 0.0;
};

EnsembleCheckpoint read_ensemble_json(const std::string& path,
                                      const PriorConfig& prior_config);

void write_score_json(const std::string& path, const ScoreReport& report);

}  // namespace walltherm
