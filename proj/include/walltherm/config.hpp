#pragma once

#include <map>
#include <string>

#include "walltherm/assimilation.hpp"
#include "walltherm/priors.hpp"
#include "walltherm/synthetic.hpp"

namespace walltherm {

/// Raised on malformed config input; the message names the offending key/line.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Full run configuration, read from a flat key-value file with dotted keys
/// (e.g. "prior.kappa.nu = 1.05"). Unknown keys are rejected.
struct RunConfig {
  FluxMode mode = FluxMode::BothFluxes;
  int mesh_exponent = 5;
  int ensemble_size = 200;
  double j_thresh = 0.0;  // 0 -> J/3
  int batch_size = 30;
  double assimilation_days = 3.0;
  double prediction_days = 3.0;
  double dt = 300.0;
  double alpha_field = 0.05;
  double alpha_scalar = 0.01;
  std::uint64_t seed = 1;
  int workers = 1;
  int max_iterations = 50;
  PriorConfig prior;
  TruthSpec synth = TruthSpec::defaults();
};

RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

}  // namespace walltherm
