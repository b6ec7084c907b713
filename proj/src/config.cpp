#include "walltherm/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace walltherm {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "': not a number: '" + value + "'");
  }
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "': not an integer: '" + value + "'");
  }
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
  return out;
}

void apply_field_prior(FieldPriorSpec& spec, const std::string& key,
                       const std::string& leaf, const std::string& value) {
  if (leaf == "nu") spec.nu = parse_double(key, value);
  else if (leaf == "ell") spec.ell = parse_double(key, value);
  else if (leaf == "sigma") spec.sigma = parse_double(key, value);
  else if (leaf == "omega") spec.omega = parse_double(key, value);
  else throw ConfigError("config: unknown key '" + key + "'");
}

void apply_channel(BoundaryChannelSpec& channel, const std::string& key,
                   const std::string& leaf, const std::string& value) {
  if (leaf == "mean") channel.mean = parse_double(key, value);
  else if (leaf == "grf_sigma") channel.grf_sigma = parse_double(key, value);
  else if (leaf == "grf_ell_s") channel.grf_ell_s = parse_double(key, value);
  else if (leaf == "grf_nu") channel.grf_nu = parse_double(key, value);
  else if (leaf == "grf_grid_s") channel.grf_grid_s = parse_double(key, value);
  else throw ConfigError("config: unknown key '" + key + "'");
}

void apply_key(RunConfig& config, const std::string& key, const std::string& value,
               int line) {
  const auto fail_unknown = [&]() {
    throw ConfigError("config line " + std::to_string(line) + ": unknown key '" + key +
                      "'");
  };
  if (key == "mode") {
    if (value == "both_fluxes") config.mode = FluxMode::BothFluxes;
    else if (value == "internal_only") config.mode = FluxMode::InternalOnly;
    else throw ConfigError("config: key 'mode': expected both_fluxes or internal_only");
  } else if (key == "mesh_exponent") config.mesh_exponent = parse_int(key, value);
  else if (key == "ensemble_size") config.ensemble_size = parse_int(key, value);
  else if (key == "j_thresh") config.j_thresh = parse_double(key, value);
  else if (key == "batch_size") config.batch_size = parse_int(key, value);
  else if (key == "assimilation_days") config.assimilation_days = parse_double(key, value);
  else if (key == "prediction_days") config.prediction_days = parse_double(key, value);
  else if (key == "dt") config.dt = parse_double(key, value);
  else if (key == "alpha_field") config.alpha_field = parse_double(key, value);
  else if (key == "alpha_scalar") config.alpha_scalar = parse_double(key, value);
  else if (key == "seed") config.seed = static_cast<std::uint64_t>(std::stoull(value));
  else if (key == "workers") config.workers = parse_int(key, value);
  else if (key == "max_iterations") config.max_iterations = parse_int(key, value);
  else if (key.rfind("prior.", 0) == 0) {
    const std::string rest = key.substr(6);
    const auto dot = rest.find('.');
    if (dot == std::string::npos) fail_unknown();
    const std::string field = rest.substr(0, dot);
    const std::string leaf = rest.substr(dot + 1);
    if (field == "kappa") apply_field_prior(config.prior.kappa, key, leaf, value);
    else if (field == "c") apply_field_prior(config.prior.c, key, leaf, value);
    else if (field == "t0") apply_field_prior(config.prior.t0, key, leaf, value);
    else if (field == "r_i") {
      if (leaf == "omega") config.prior.r_i.omega = parse_double(key, value);
      else if (leaf == "sigma") config.prior.r_i.sigma = parse_double(key, value);
      else fail_unknown();
    } else if (field == "r_e") {
      if (leaf == "omega") config.prior.r_e.omega = parse_double(key, value);
      else if (leaf == "sigma") config.prior.r_e.sigma = parse_double(key, value);
      else fail_unknown();
    } else fail_unknown();
  } else if (key.rfind("synth.", 0) == 0) {
    const std::string leaf = key.substr(6);
    TruthSpec& synth = config.synth;
    if (leaf == "length") synth.length = parse_double(key, value);
    else if (leaf == "layer_breaks") synth.layer_breaks = parse_list(key, value);
    else if (leaf == "layer_kappa") synth.layer_kappa = parse_list(key, value);
    else if (leaf == "layer_c") synth.layer_c = parse_list(key, value);
    else if (leaf == "r_i") synth.r_i = parse_double(key, value);
    else if (leaf == "r_e") synth.r_e = parse_double(key, value);
    else if (leaf == "fine_mesh_exponent") synth.fine_mesh_exponent = parse_int(key, value);
    else if (leaf == "sample_interval_s") synth.sample_interval_s = parse_double(key, value);
    else if (leaf == "spinup_days") synth.spinup_days = parse_double(key, value);
    else if (leaf == "campaign_days") synth.campaign_days = parse_double(key, value);
    else if (leaf == "epsilon") synth.epsilon = parse_double(key, value);
    else if (leaf == "noise_batch_size") synth.noise_batch_size = parse_int(key, value);
    else if (leaf.rfind("internal.", 0) == 0)
      apply_channel(synth.internal, key, leaf.substr(9), value);
    else if (leaf.rfind("external.", 0) == 0)
      apply_channel(synth.external, key, leaf.substr(9), value);
    else fail_unknown();
  } else {
    fail_unknown();
  }
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  RunConfig config;
  std::istringstream stream(text);
  std::string raw;
  int line_number = 0;
  while (std::getline(stream, raw)) {
    ++line_number;
    const auto comment = raw.find('#');
    if (comment != std::string::npos) raw = raw.substr(0, comment);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_number) +
                        ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("config line " + std::to_string(line_number) +
                        ": empty key or value");
    }
    apply_key(config, key, value, line_number);
  }
  if (config.ensemble_size < 2) throw ConfigError("config: ensemble_size must be >= 2");
  if (config.j_thresh != 0.0 &&
      (config.j_thresh <= 1.0 || config.j_thresh >= config.ensemble_size)) {
    throw ConfigError("config: need 1 < j_thresh < ensemble_size");
  }
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << file.rdbuf();
  return parse_config_text(buffer.str());
}

}  // namespace walltherm
