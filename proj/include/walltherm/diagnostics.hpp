#pragma once

#include <optional>
#include <vector>

namespace walltherm {

/// Goodness-of-fit and sharpness scores of a predictive run.
struct ScoreReport {
  double chi2_internal = 0.0;
  double chi2_external = 0.0;
  double ais_internal = 0.0;
  double ais_external = 0.0;
  int n_points = 0;
};

/// ISO 9869 running-ratio U-value estimate; entries with a vanishing
/// temperature-difference sum are reported as missing.
std::vector<std::optional<double>> average_method(const std::vector<double>& q_internal,
                                                  const std::vector<double>& t_internal,
                                                  const std::vector<double>& t_external);

/// Instantaneous flux of the no-thermal-mass model: (T_I - T_E) * U_av.
std::vector<double> no_thermal_mass_flux(const std::vector<double>& t_internal,
                                         const std::vector<double>& t_external,
                                         double u_av);

/// (1/M) sum (observed - pred)^2 / sigma^2.
double chi_squared(const std::vector<double>& pred_mean,
                   const std::vector<double>& observed,
                   const std::vector<double>& sigma);

/// Interval score of one (1-alpha) interval around an observation.
double interval_score(double lo, double hi, double observed, double alpha);

/// Mean interval score over a series.
double average_interval_score(const std::vector<double>& lo, const std::vector<double>& hi,
                              const std::vector<double>& observed, double alpha);

/// Unbiased standard deviation over mean; nullopt when the mean vanishes.
std::optional<double> coefficient_of_variation(const std::vector<double>& samples);

}  // namespace walltherm
