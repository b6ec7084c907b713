#include "walltherm/diagnostics.hpp"

#include <cmath>
#include <stdexcept>

namespace walltherm {

std::vector<std::optional<double>> average_method(const std::vector<double>& q_internal,
                                                  const std::vector<double>& t_internal,
                                                  const std::vector<double>& t_external) {
  if (q_internal.size() != t_internal.size() || t_internal.size() != t_external.size())
    throw std::invalid_argument("average_method: series lengths differ");
  std::vector<std::optional<double>> running(q_internal.size());
  double sum_q = 0.0;
  double sum_dt = 0.0;
  for (std::size_t m = 0; m < q_internal.size(); ++m) {
    sum_q += q_internal[m];
    sum_dt += t_internal[m] - t_external[m];
    if (sum_dt != 0.0) running[m] = sum_q / sum_dt;
  }
  return running;
}

std::vector<double> no_thermal_mass_flux(const std::vector<double>& t_internal,
                                         const std::vector<double>& t_external,
                                         double u_av) {
  if (t_internal.size() != t_external.size())
    throw std::invalid_argument("no_thermal_mass_flux: series lengths differ");
  std::vector<double> flux(t_internal.size());
  for (std::size_t m = 0; m < flux.size(); ++m)
    flux[m] = (t_internal[m] - t_external[m]) * u_av;
  return flux;
}

double chi_squared(const std::vector<double>& pred_mean,
                   const std::vector<double>& observed,
                   const std::vector<double>& sigma) {
  if (pred_mean.size() != observed.size() || observed.size() != sigma.size())
    throw std::invalid_argument("chi_squared: series lengths differ");
  if (pred_mean.empty()) throw std::invalid_argument("chi_squared: empty series");
  double total = 0.0;
  for (std::size_t m = 0; m < pred_mean.size(); ++m) {
    if (!(sigma[m] > 0.0)) throw std::invalid_argument("chi_squared: sigma must be > 0");
    const double resid = (observed[m] - pred_mean[m]) / sigma[m];
    total += resid * resid;
  }
  return total / static_cast<double>(pred_mean.size());
}

double interval_score(double lo, double hi, double observed, double alpha) {
  if (lo > hi) throw std::invalid_argument("interval_score: lo > hi");
  if (!(alpha > 0.0) || !(alpha < 1.0))
    throw std::invalid_argument("interval_score: alpha outside (0,1)");
  double score = hi - lo;
  if (observed < lo) score += (2.0 / alpha) * (lo - observed);
  if (observed > hi) score += (2.0 / alpha) * (observed - hi);
  return score;
}

double average_interval_score(const std::vector<double>& lo, const std::vector<double>& hi,
                              const std::vector<double>& observed, double alpha) {
  if (lo.size() != hi.size() || hi.size() != observed.size())
    throw std::invalid_argument("average_interval_score: series lengths differ");
  if (lo.empty()) throw std::invalid_argument("average_interval_score: empty series");
  double total = 0.0;
  for (std::size_t m = 0; m < lo.size(); ++m)
    total += interval_score(lo[m], hi[m], observed[m], alpha);
  return total / static_cast<double>(lo.size());
}

std::optional<double> coefficient_of_variation(const std::vector<double>& samples) {
  if (samples.size() < 2)
    throw std::invalid_argument("coefficient_of_variation: need at least 2 samples");
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= static_cast<double>(samples.size());
  if (mean == 0.0) return std::nullopt;
  double variance = 0.0;
  for (double s : samples) variance += (s - mean) * (s - mean);
  variance /= static_cast<double>(samples.size() - 1);
  return std::sqrt(variance) / mean;
}

}  // namespace walltherm
