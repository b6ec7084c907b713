#include "walltherm/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace walltherm {

using nlohmann::json;

std::string format_value(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

namespace {

std::ofstream open_output(const std::string& path) {
  std::ofstream file(path, std::ios::binary);  // LF line endings everywhere
  if (!file) throw DataError("cannot open for writing: " + path);
  return file;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw DataError("cannot open: " + path);
  return file;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) fields.push_back(item);
  return fields;
}

double parse_field(const std::string& value, const std::string& column, int row) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw DataError("row " + std::to_string(row) + ", column '" + column +
                    "': not a number: '" + value + "'");
  }
}

json field_summary_json(const FieldSummary& summary) {
  return json{{"mean", summary.mean}, {"lo", summary.lo}, {"hi", summary.hi}};
}

std::vector<double> eigen_to_vec(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd vec_to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

void write_measurements_csv(const std::string& path, const MeasurementSeries& series) {
  auto file = open_output(path);
  file << "time_s,t_internal_K,t_external_K,q_internal_Wm2,q_external_Wm2\n";
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    file << format_value(series.times[i]) << ',' << format_value(series.t_internal[i])
         << ',' << format_value(series.t_external[i]) << ','
         << format_value(series.q_internal[i]) << ',';
    if (series.q_external) {
      file << format_value((*series.q_external)[i]);
    } else {
      file << "NA";
    }
    file << '\n';
  }
}

MeasurementSeries read_measurements_csv(const std::string& path) {
  auto file = open_input(path);
  std::string line;
  if (!std::getline(file, line)) throw DataError(path + ": empty file");
  if (line == "time_s,t_internal_K,t_external_K,q_internal_Wm2,q_external_Wm2\r")
    line.pop_back();
  if (line != "time_s,t_internal_K,t_external_K,q_internal_Wm2,q_external_Wm2")
    throw DataError(path + ": unexpected header '" + line + "'");
  MeasurementSeries series;
  bool has_external = true;
  bool first = true;
  int row = 1;
  while (std::getline(file, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 5)
      throw DataError(path + ": row " + std::to_string(row) + ": expected 5 columns");
    series.times.push_back(parse_field(fields[0], "time_s", row));
    series.t_internal.push_back(parse_field(fields[1], "t_internal_K", row));
    series.t_external.push_back(parse_field(fields[2], "t_external_K", row));
    series.q_internal.push_back(parse_field(fields[3], "q_internal_Wm2", row));
    if (first) {
      has_external = fields[4] != "NA";
      if (has_external) series.q_external.emplace();
      first = false;
    }
    if (has_external) {
      if (fields[4] == "NA")
        throw DataError(path + ": row " + std::to_string(row) +
                        ": mixed NA in column 'q_external_Wm2'");
      series.q_external->push_back(parse_field(fields[4], "q_external_Wm2", row));
    } else if (fields[4] != "NA") {
      throw DataError(path + ": row " + std::to_string(row) +
                      ": mixed NA in column 'q_external_Wm2'");
    }
  }
  if (series.times.empty()) throw DataError(path + ": no data rows");
  return series;
}

void write_boundary_csv(const std::string& path, const BoundarySeries& boundary) {
  auto file = open_output(path);
  file << "time_s,t_internal_K,t_external_K\n";
  for (std::size_t i = 0; i < boundary.times.size(); ++i) {
    file << format_value(boundary.times[i]) << ',' << format_value(boundary.t_internal[i])
         << ',' << format_value(boundary.t_external[i]) << '\n';
  }
}

BoundarySeries read_boundary_csv(const std::string& path) {
  auto file = open_input(path);
  std::string line;
  if (!std::getline(file, line)) throw DataError(path + ": empty file");
  BoundarySeries boundary;
  int row = 1;
  while (std::getline(file, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 3)
      throw DataError(path + ": row " + std::to_string(row) + ": expected 3 columns");
    boundary.times.push_back(parse_field(fields[0], "time_s", row));
    boundary.t_internal.push_back(parse_field(fields[1], "t_internal_K", row));
    boundary.t_external.push_back(parse_field(fields[2], "t_external_K", row));
  }
  return boundary;
}

void write_truth_json(const std::string& path, const TruthSpec& spec,
                      const std::vector<double>& t0_true, double u_true, double c_true) {
  json truth;
  truth["layer_breaks"] = spec.layer_breaks;
  truth["layer_kappa"] = spec.layer_kappa;
  truth["layer_c"] = spec.layer_c;
  truth["r_i_true"] = spec.r_i;
  truth["r_e_true"] = spec.r_e;
  truth["length"] = spec.length;
  truth["fine_mesh_exponent"] = spec.fine_mesh_exponent;
  truth["t0_true"] = t0_true;
  truth["u_true"] = u_true;
  truth["c_true"] = c_true;
  auto file = open_output(path);
  file << truth.dump(2) << '\n';
}

TruthSidecar read_truth_json(const std::string& path) {
  auto file = open_input(path);
  json truth;
  try {
    file >> truth;
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  TruthSidecar sidecar;
  sidecar.u_true = truth.at("u_true").get<double>();
  sidecar.c_true = truth.at("c_true").get<double>();
  sidecar.r_i = truth.at("r_i_true").get<double>();
  sidecar.r_e = truth.at("r_e_true").get<double>();
  return sidecar;
}

void write_snapshot_json(const std::string& path, const PosteriorSnapshot& snapshot,
                         double alpha_scalar) {
  json snap;
  snap["window_index"] = snapshot.window_index;
  snap["time_s"] = snapshot.time_s;
  snap["kappa"] = field_summary_json(snapshot.kappa);
  snap["c"] = field_summary_json(snapshot.c);
  snap["t0"] = field_summary_json(snapshot.t0);
  snap["samples"] = json{{"u", snapshot.derived.u_samples},
                         {"c", snapshot.derived.c_samples},
                         {"r_i", snapshot.derived.r_i_samples},
                         {"r_e", snapshot.derived.r_e_samples}};
  const auto scalar_summary = [&](const std::vector<double>& samples) {
    const Summary s = summarize(samples, alpha_scalar);
    return json{{"mean", s.mean}, {"lo", s.lo}, {"hi", s.hi}};
  };
  snap["u"] = scalar_summary(snapshot.derived.u_samples);
  snap["c_value"] = scalar_summary(snapshot.derived.c_samples);
  snap["r_i"] = scalar_summary(snapshot.derived.r_i_samples);
  snap["r_e"] = scalar_summary(snapshot.derived.r_e_samples);
  // Timing deliberately lives in the run-summary CSV, not here: snapshot files
  // must be byte-identical across reruns and worker counts.
  snap["tempering"] = json{{"phis", snapshot.trace.phis},
                           {"ess", snapshot.trace.ess_values},
                           {"iterations", snapshot.trace.iterations}};
  auto file = open_output(path);
  file << snap.dump(2) << '\n';
}

void write_ensemble_json(const std::string& path, const Ensemble& ensemble,
                         const std::vector<double>& t0_mean, const Mesh& mesh,
                         double assimilated_until_s) {
  json doc;
  doc["length"] = mesh.length;
  doc["n_elements"] = mesh.n_elements;
  doc["assimilated_until_s"] = assimilated_until_s;
  doc["t0_mean"] = t0_mean;
  json members = json::array();
  for (const LatentSample& latent : ensemble.latents) {
    members.push_back(json{{"psi_kappa", eigen_to_vec(latent.psi_kappa)},
                           {"psi_c", eigen_to_vec(latent.psi_c)},
                           {"psi_t0", eigen_to_vec(latent.psi_t0)},
                           {"psi_i", latent.psi_i},
                           {"psi_e", latent.psi_e}});
  }
  doc["latents"] = std::move(members);
  auto file = open_output(path);
  file << doc.dump() << '\n';
}

EnsembleCheckpoint read_ensemble_json(const std::string& path,
                                      const PriorConfig& prior_config) {
  auto file = open_input(path);
  json doc;
  try {
    file >> doc;
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  EnsembleCheckpoint checkpoint;
  checkpoint.mesh =
      build_mesh(doc.at("length").get<double>(), doc.at("n_elements").get<int>());
  checkpoint.assimilated_until_s = doc.at("assimilated_until_s").get<double>();
  checkpoint.t0_mean = doc.at("t0_mean").get<std::vector<double>>();
  const Mesh& mesh = checkpoint.mesh;
  for (const json& member : doc.at("latents")) {
    LatentSample latent;
    latent.psi_kappa = vec_to_eigen(member.at("psi_kappa").get<std::vector<double>>());
    latent.psi_c = vec_to_eigen(member.at("psi_c").get<std::vector<double>>());
    latent.psi_t0 = vec_to_eigen(member.at("psi_t0").get<std::vector<double>>());
    latent.psi_i = member.at("psi_i").get<double>();
    latent.psi_e = member.at("psi_e").get<double>();
    checkpoint.ensemble.latents.push_back(std::move(latent));
    checkpoint.ensemble.samples.push_back(push_forward(
        checkpoint.ensemble.latents.back(), prior_config, checkpoint.t0_mean, mesh));
  }
  return checkpoint;
}

void write_score_json(const std::string& path, const ScoreReport& report) {
  const auto finite_or_null = [](double v) {
    return std::isfinite(v) ? json(v) : json(nullptr);
  };
  json doc;
  doc["chi2_internal"] = finite_or_null(report.chi2_internal);
  doc["chi2_external"] = finite_or_null(report.chi2_external);
  doc["ais_internal"] = finite_or_null(report.ais_internal);
  doc["ais_external"] = finite_or_null(report.ais_external);
  doc["n_points"] = report.n_points;
  auto file = open_output(path);
  file << doc.dump(2) << '\n';
}

}  // namespace walltherm
