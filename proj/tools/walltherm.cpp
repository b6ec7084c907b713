// walltherm: synthetic data generation, sequential assimilation and
// predictive scoring for in-situ wall thermal characterisation.
//
// Exit codes: 0 success, 2 config error, 3 data error, 4 numerical failure.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "walltherm/assimilation.hpp"
#include "walltherm/config.hpp"
#include "walltherm/diagnostics.hpp"
#include "walltherm/io.hpp"
#include "walltherm/priors.hpp"
#include "walltherm/synthetic.hpp"

namespace fs = std::filesystem;
using namespace walltherm;

namespace {

constexpr double kDay = 86400.0;

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  int workers = 1;
};

RunConfig load_run_config(const CommonFlags& flags) {
  RunConfig config;
  if (!flags.config_path.empty()) config = load_config(flags.config_path);
  if (flags.seed_override) config.seed = *flags.seed_override;
  if (flags.workers > 0) config.workers = flags.workers;
  return config;
}

std::string window_file_name(int window) {
  char name[32];
  std::snprintf(name, sizeof(name), "window_%03d.json", window);
  return name;
}

/// Prior mean of a log-normal scalar omega * exp(psi), psi ~ N(0, sigma^2).
double scalar_prior_mean(const ScalarPriorSpec& spec) {
  return spec.omega * std::exp(0.5 * spec.sigma * spec.sigma);
}

std::vector<double> t0_mean_from_measurements(const MeasurementSeries& meas,
                                              FluxMode mode, const PriorConfig& prior,
                                              const Mesh& mesh) {
  const double q_e0 =
      (mode == FluxMode::BothFluxes && meas.q_external) ? (*meas.q_external)[0] : 0.0;
  return t0_prior_mean(meas.t_internal[0], meas.t_external[0], meas.q_internal[0], q_e0,
                       scalar_prior_mean(prior.r_i), scalar_prior_mean(prior.r_e), mesh);
}

/// Per-observation noise sigma over a held-out span, batched like assimilation
/// windows; a trailing partial batch uses its own mean.
std::vector<double> heldout_sigma(const std::vector<double>& q, double rel_error,
                                  int batch_size) {
  std::vector<double> sigma(q.size());
  for (std::size_t first = 0; first < q.size();
       first += static_cast<std::size_t>(batch_size)) {
    const std::size_t count =
        std::min<std::size_t>(batch_size, q.size() - first);
    double mean_abs = 0.0;
    for (std::size_t i = 0; i < count; ++i) mean_abs += std::abs(q[first + i]);
    mean_abs /= static_cast<double>(count);
    for (std::size_t i = 0; i < count; ++i) sigma[first + i] = rel_error * mean_abs;
  }
  return sigma;
}

int run_synth(const CommonFlags& flags, const std::string& out_dir) {
  const RunConfig config = load_run_config(flags);
  const TruthSpec& spec = config.synth;
  fs::create_directories(out_dir);

  const BoundarySeries boundary = gen_boundary_temperatures(spec, config.seed);
  const std::vector<double> t0_true = spin_up_t0(spec, boundary);
  const SyntheticData data = gen_measurements(spec, boundary, t0_true, config.seed);

  const Mesh fine = build_mesh(spec.length, 1 << spec.fine_mesh_exponent);
  const ThermalSample truth = truth_sample(spec, fine);
  ThermalSample truth_full = truth;
  truth_full.t0 = t0_true;
  const double u_true = compute_u_value(truth_full, fine);
  const double c_true = compute_c_value(truth_full, fine);

  const fs::path out(out_dir);
  write_measurements_csv((out / "measurements.csv").string(), data.measurements);
  write_boundary_csv((out / "boundary.csv").string(), boundary);
  write_truth_json((out / "truth.json").string(), spec, t0_true, u_true, c_true);

  std::cout << "U_true = " << format_value(u_true) << " W/m^2K\n"
            << "C_true = " << format_value(c_true) << " J/m^2K\n"
            << "wrote " << data.measurements.times.size() << " samples to " << out_dir
            << "\n";
  return 0;
}

int run_assimilate(const CommonFlags& flags, const std::string& data_dir,
                   const std::string& out_dir, const std::string& mode_flag) {
  RunConfig config = load_run_config(flags);
  if (mode_flag == "both_fluxes") config.mode = FluxMode::BothFluxes;
  else if (mode_flag == "internal_only") config.mode = FluxMode::InternalOnly;
  else if (!mode_flag.empty())
    throw ConfigError("--mode: expected both_fluxes or internal_only");

  const fs::path data(data_dir);
  const MeasurementSeries meas = read_measurements_csv((data / "measurements.csv").string());
  if (config.mode == FluxMode::BothFluxes && !meas.q_external) {
    throw ConfigError(
        "mode both_fluxes requires the q_external_Wm2 column; dataset has NA");
  }
  std::optional<TruthSidecar> truth;
  if (fs::exists(data / "truth.json")) truth = read_truth_json((data / "truth.json").string());

  fs::create_directories(out_dir);
  const fs::path out(out_dir);
  const Mesh mesh = build_mesh(config.synth.length, 1 << config.mesh_exponent);
  const std::vector<double> t0_mean =
      t0_mean_from_measurements(meas, config.mode, config.prior, mesh);
  const PriorBases bases = build_prior_bases(config.prior, mesh);
  Ensemble ensemble = generate_prior_ensemble(config.prior, bases, t0_mean, mesh,
                                              config.ensemble_size, config.seed);
  const DerivedSamples prior_derived = derived_quantities(ensemble, mesh);

  AssimilationConfig acfg;
  acfg.mode = config.mode;
  acfg.assimilation_span_s = config.assimilation_days * kDay;
  acfg.batch_size = config.batch_size;
  acfg.dt = config.dt;
  acfg.j_thresh = config.j_thresh;
  acfg.alpha_field = config.alpha_field;
  acfg.max_iterations = config.max_iterations;
  acfg.workers = config.workers;
  acfg.master_seed = config.seed;

  const std::vector<PosteriorSnapshot> snapshots =
      run_sequential(acfg, meas, ensemble, config.prior, t0_mean, mesh);

  for (const PosteriorSnapshot& snapshot : snapshots) {
    write_snapshot_json((out / window_file_name(snapshot.window_index)).string(),
                        snapshot, config.alpha_scalar);
  }
  const double assimilated_until =
      snapshots.empty() ? 0.0 : snapshots.back().time_s;
  write_ensemble_json((out / "ensemble.json").string(), ensemble, t0_mean, mesh,
                      assimilated_until);

  // Run-summary table: sequential U estimates next to the running ISO average
  // method baseline. rel_err columns need the truth sidecar.
  const std::vector<std::optional<double>> u_av =
      average_method(meas.q_internal, meas.t_internal, meas.t_external);
  std::ofstream summary(out / "summary.csv", std::ios::binary);
  summary << "time_days,u_mean,u_rel_err,u_cov,c_mean,c_rel_err,c_cov,u_av,"
             "u_av_rel_err,iterations,wall_seconds\n";
  const auto write_row = [&](double time_s, const DerivedSamples& derived,
                             std::size_t obs_index, int iterations, double wall) {
    const Summary u = summarize(derived.u_samples, config.alpha_scalar);
    const Summary c = summarize(derived.c_samples, config.alpha_scalar);
    const auto u_cov = coefficient_of_variation(derived.u_samples);
    const auto c_cov = coefficient_of_variation(derived.c_samples);
    const auto rel = [&](double value, double reference) {
      return truth ? format_value(std::abs(value - reference) / reference) : std::string("NA");
    };
    summary << format_value(time_s / kDay) << ',' << format_value(u.mean) << ','
            << rel(u.mean, truth ? truth->u_true : 1.0) << ','
            << (u_cov ? format_value(*u_cov) : "NA") << ',' << format_value(c.mean)
            << ',' << rel(c.mean, truth ? truth->c_true : 1.0) << ','
            << (c_cov ? format_value(*c_cov) : "NA") << ',';
    const auto& baseline = u_av[obs_index];
    summary << (baseline ? format_value(*baseline) : "NA") << ','
            << (baseline && truth ? rel(*baseline, truth->u_true) : "NA") << ','
            << iterations << ',' << format_value(wall) << '\n';
  };
  write_row(0.0, prior_derived, 0, 0, 0.0);
  const WindowPlan plan = plan_windows(meas, acfg.assimilation_span_s, config.batch_size);
  for (const PosteriorSnapshot& snapshot : snapshots) {
    const std::size_t last_obs =
        plan.first_index[snapshot.window_index] + config.batch_size - 1;
    write_row(snapshot.time_s, snapshot.derived, last_obs, snapshot.trace.iterations,
              snapshot.wall_seconds);
  }
  summary.close();

  if (!snapshots.empty()) {
    const Summary u = summarize(snapshots.back().derived.u_samples, config.alpha_scalar);
    std::cout << "windows assimilated: " << snapshots.size() << "\n"
              << "posterior U mean = " << format_value(u.mean) << " W/m^2K  ["
              << format_value(u.lo) << ", " << format_value(u.hi) << "]\n";
  } else {
    std::cout << "no complete assimilation window in span; wrote prior only\n";
  }
  return 0;
}

int run_predict(const CommonFlags& flags, const std::string& snapshot_path,
                const std::string& data_dir, const std::string& out_dir,
                double horizon_days) {
  const RunConfig config = load_run_config(flags);
  const fs::path data(data_dir);
  const MeasurementSeries meas = read_measurements_csv((data / "measurements.csv").string());
  const EnsembleCheckpoint ckpt = read_ensemble_json(snapshot_path, config.prior);

  const double t_start = ckpt.assimilated_until_s;
  const double horizon_days_eff =
      horizon_days > 0.0 ? horizon_days : config.prediction_days;
  const double t_end = t_start + horizon_days_eff * kDay;
  if (t_end > meas.times.back() + 1e-6) {
    throw std::out_of_range("predict: horizon " + format_value(t_end / kDay) +
                            " days exceeds data coverage (" +
                            format_value(meas.times.back() / kDay) + " days)");
  }

  std::vector<double> horizon_times;
  std::vector<double> obs_internal, obs_external, t_int, t_ext;
  for (std::size_t i = 0; i < meas.times.size(); ++i) {
    if (meas.times[i] <= t_start + 1e-9 || meas.times[i] > t_end + 1e-9) continue;
    horizon_times.push_back(meas.times[i]);
    obs_internal.push_back(meas.q_internal[i]);
    if (meas.q_external) obs_external.push_back((*meas.q_external)[i]);
    t_int.push_back(meas.t_internal[i]);
    t_ext.push_back(meas.t_external[i]);
  }
  if (horizon_times.empty())
    throw DataError("predict: no held-out observations in the horizon");

  BoundarySeries boundary;
  for (std::size_t i = 0; i < meas.times.size(); ++i) {
    if (meas.times[i] > t_end + 1e-9) break;
    boundary.times.push_back(meas.times[i]);
    boundary.t_internal.push_back(meas.t_internal[i]);
    boundary.t_external.push_back(meas.t_external[i]);
  }

  PredictiveEnsemble pred = predict(ckpt.ensemble, boundary, horizon_times, ckpt.mesh,
                                    config.dt, config.alpha_field, config.workers);

  // Observation-predictive intervals: each member trajectory is perturbed with
  // measurement noise so the reported bounds describe future *measurements*,
  // not just the latent model flux. Draws come from named streams, so the
  // output is independent of the worker count.
  const std::vector<double> sigma_i =
      heldout_sigma(obs_internal, meas.rel_error, config.batch_size);
  const std::vector<double> sigma_e =
      meas.q_external ? heldout_sigma(obs_external, meas.rel_error, config.batch_size)
                      : std::vector<double>(horizon_times.size(), 0.0);
  for (int j = 0; j < ckpt.ensemble.size(); ++j) {
    RngStream rng =
        RngStream::derive(config.seed, "predict/member/" + std::to_string(j));
    for (std::size_t i = 0; i < horizon_times.size(); ++i) {
      pred.member_q_internal[j][i] += sigma_i[i] * rng.normal();
      pred.member_q_external[j][i] += sigma_e[i] * rng.normal();
    }
  }
  pred.q_internal = summarize_field(pred.member_q_internal, config.alpha_field);
  pred.q_external = summarize_field(pred.member_q_external, config.alpha_field);

  ScoreReport report;
  report.n_points = static_cast<int>(horizon_times.size());
  report.chi2_internal = chi_squared(pred.q_internal.mean, obs_internal, sigma_i);
  report.ais_internal = average_interval_score(pred.q_internal.lo, pred.q_internal.hi,
                                               obs_internal, config.alpha_field);
  if (meas.q_external) {
    report.chi2_external = chi_squared(pred.q_external.mean, obs_external, sigma_e);
    report.ais_external = average_interval_score(pred.q_external.lo, pred.q_external.hi,
                                                 obs_external, config.alpha_field);
  } else {
    report.chi2_external = std::numeric_limits<double>::quiet_NaN();
    report.ais_external = std::numeric_limits<double>::quiet_NaN();
  }

  // No-thermal-mass baseline: last defined running-average U over the
  // assimilated span drives (T_I - T_E) * U_av on the horizon.
  std::vector<double> q_assim, ti_assim, te_assim;
  for (std::size_t i = 0; i < meas.times.size(); ++i) {
    if (meas.times[i] > t_start + 1e-9) break;
    q_assim.push_back(meas.q_internal[i]);
    ti_assim.push_back(meas.t_internal[i]);
    te_assim.push_back(meas.t_external[i]);
  }
  std::optional<double> u_av;
  for (const auto& value : average_method(q_assim, ti_assim, te_assim)) {
    if (value) u_av = value;
  }
  std::vector<double> baseline(horizon_times.size(),
                               std::numeric_limits<double>::quiet_NaN());
  if (u_av) baseline = no_thermal_mass_flux(t_int, t_ext, *u_av);

  fs::create_directories(out_dir);
  const fs::path out(out_dir);
  write_score_json((out / "scores.json").string(), report);
  std::ofstream csv(out / "prediction.csv", std::ios::binary);
  csv << "time_s,obs_q_internal,pred_q_internal_mean,pred_q_internal_lo,"
         "pred_q_internal_hi,obs_q_external,pred_q_external_mean,pred_q_external_lo,"
         "pred_q_external_hi,baseline_q\n";
  for (std::size_t i = 0; i < horizon_times.size(); ++i) {
    csv << format_value(horizon_times[i]) << ',' << format_value(obs_internal[i]) << ','
        << format_value(pred.q_internal.mean[i]) << ','
        << format_value(pred.q_internal.lo[i]) << ','
        << format_value(pred.q_internal.hi[i]) << ',';
    if (meas.q_external) {
      csv << format_value(obs_external[i]) << ',';
    } else {
      csv << "NA,";
    }
    csv << format_value(pred.q_external.mean[i]) << ','
        << format_value(pred.q_external.lo[i]) << ','
        << format_value(pred.q_external.hi[i]) << ','
        << (std::isfinite(baseline[i]) ? format_value(baseline[i]) : "NA") << '\n';
  }
  csv.close();

  std::cout << "chi2_internal = " << report.chi2_internal
            << "  ais_internal = " << report.ais_internal << "\n";
  if (meas.q_external) {
    std::cout << "chi2_external = " << report.chi2_external
              << "  ais_external = " << report.ais_external << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian in-situ wall thermal characterisation"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::uint64_t seed_value = 0;
  bool seed_set = false;
  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", flags.config_path, "Key-value config file");
    cmd->add_option("--seed", seed_value, "Master seed (overrides config)")
        ->each([&](const std::string&) { seed_set = true; });
    cmd->add_option("--workers", flags.workers, "Concurrent forward solves");
  };

  std::string out_dir = ".";
  std::string data_dir = ".";
  std::string mode_flag;
  std::string snapshot_path;
  double horizon_days = 0.0;

  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  add_common(synth);
  synth->add_option("--out-dir", out_dir, "Output directory");

  CLI::App* assim = app.add_subcommand("assimilate", "Sequential ensemble inversion");
  add_common(assim);
  assim->add_option("--data", data_dir, "Directory with measurements.csv");
  assim->add_option("--out-dir", out_dir, "Output directory");
  assim->add_option("--mode", mode_flag, "both_fluxes or internal_only");

  CLI::App* pred = app.add_subcommand("predict", "Score held-out predictions");
  add_common(pred);
  pred->add_option("--snapshot", snapshot_path, "ensemble.json from assimilate")
      ->required();
  pred->add_option("--data", data_dir, "Directory with measurements.csv");
  pred->add_option("--out-dir", out_dir, "Output directory");
  pred->add_option("--horizon", horizon_days, "Prediction horizon in days");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (seed_set) flags.seed_override = seed_value;
    if (synth->parsed()) return run_synth(flags, out_dir);
    if (assim->parsed()) return run_assimilate(flags, data_dir, out_dir, mode_flag);
    if (pred->parsed())
      return run_predict(flags, snapshot_path, data_dir, out_dir, horizon_days);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ConvergenceFailure& e) {
    std::cerr << "error: " << e.what() << " after " << e.trace.iterations
              << " tempering iterations\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 2;
}
