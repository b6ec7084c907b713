#include "walltherm/heat_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace walltherm {

Mesh build_mesh(double length, int n_elements) {
  if (!(length > 0.0)) throw std::invalid_argument("build_mesh: length must be positive");
  if (n_elements < 1) throw std::invalid_argument("build_mesh: need at least one element");
  Mesh mesh;
  mesh.length = length;
  mesh.n_elements = n_elements;
  mesh.node_positions.resize(n_elements + 1);
  mesh.element_widths.assign(n_elements, length / n_elements);
  for (int i = 0; i <= n_elements; ++i) {
    mesh.node_positions[i] = length * static_cast<double>(i) / n_elements;
  }
  mesh.node_positions.back() = length;
  return mesh;
}

namespace {

double interp_series(const std::vector<double>& times, const std::vector<double>& values,
                     double t) {
  if (t <= times.front()) return values.front();
  if (t >= times.back()) return values.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - times.begin());
  const double w = (t - times[i - 1]) / (times[i] - times[i - 1]);
  return values[i - 1] + w * (values[i] - values[i - 1]);
}

void validate_sample(const ThermalSample& sample, const Mesh& mesh) {
  const std::size_t ne = static_cast<std::size_t>(mesh.n_elements);
  if (sample.kappa.size() != ne || sample.c.size() != ne ||
      sample.t0.size() != ne + 1) {
    throw std::invalid_argument("solve_hdm: sample not defined on mesh");
  }
  for (double k : sample.kappa)
    if (!(k > 0.0)) throw std::invalid_argument("solve_hdm: kappa must be positive");
  for (double c : sample.c)
    if (!(c > 0.0)) throw std::invalid_argument("solve_hdm: c must be positive");
  if (!(sample.r_i > 0.0) || !(sample.r_e > 0.0))
    throw std::invalid_argument("solve_hdm: surface resistances must be positive");
}

// Tridiagonal LDL^T factorisation of the backward Euler system matrix.
struct TridiagFactor {
  std::vector<double> d;  // pivots
  std::vector<double> l;  // subdiagonal multipliers

  void factor(const std::vector<double>& diag, const std::vector<double>& off) {
    const std::size_t n = diag.size();
    d.resize(n);
    l.resize(n - 1);
    d[0] = diag[0];
    for (std::size_t i = 1; i < n; ++i) {
      if (!(d[i - 1] > 0.0)) throw std::runtime_error("solve_hdm: singular linear system");
      l[i - 1] = off[i - 1] / d[i - 1];
      d[i] = diag[i] - l[i - 1] * off[i - 1];
    }
    if (!(d.back() > 0.0)) throw std::runtime_error("solve_hdm: singular linear system");
  }

  void solve(std::vector<double>& x) const {
    const std::size_t n = d.size();
    for (std::size_t i = 1; i < n; ++i) x[i] -= l[i - 1] * x[i - 1];
    x[n - 1] /= d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = x[i] / d[i] - l[i] * x[i + 1];
  }
};

}  // namespace

double BoundarySeries::internal_at(double t) const {
  return interp_series(times, t_internal, t);
}

double BoundarySeries::external_at(double t) const {
  return interp_series(times, t_external, t);
}

FluxHistory solve_hdm(const ThermalSample& sample, const BoundarySeries& boundary,
                      const Mesh& mesh, double dt,
                      const std::vector<double>& output_times) {
  validate_sample(sample, mesh);
  if (!(dt > 0.0)) throw std::invalid_argument("solve_hdm: dt must be positive");
  if (boundary.times.size() < 2)
    throw std::invalid_argument("solve_hdm: boundary series needs at least 2 samples");
  if (output_times.empty()) throw std::invalid_argument("solve_hdm: no output times");
  for (std::size_t i = 1; i < output_times.size(); ++i)
    if (!(output_times[i] > output_times[i - 1]))
      throw std::invalid_argument("solve_hdm: output times must be ascending");
  const double t_start = boundary.times.front();
  const double t_end = output_times.back();
  if (output_times.front() < t_start - 1e-9 || t_end > boundary.times.back() + 1e-9)
    throw std::out_of_range("solve_hdm: output time outside boundary coverage");

  const int n = mesh.n_nodes();
  // Consistent mass (c-weighted) and stiffness + Robin diagonal terms.
  std::vector<double> m_diag(n, 0.0), m_off(n - 1, 0.0);
  std::vector<double> a_diag(n, 0.0), a_off(n - 1, 0.0);
  for (int e = 0; e < mesh.n_elements; ++e) {
    const double h = mesh.element_widths[e];
    const double mc = sample.c[e] * h / 6.0;
    const double ks = sample.kappa[e] / h;
    m_diag[e] += 2.0 * mc;
    m_diag[e + 1] += 2.0 * mc;
    m_off[e] += mc;
    a_diag[e] += ks;
    a_diag[e + 1] += ks;
    a_off[e] -= ks;
  }
  const double gi = 1.0 / sample.r_i;
  const double ge = 1.0 / sample.r_e;
  a_diag[0] += gi;
  a_diag[n - 1] += ge;

  std::vector<double> sys_diag(n), sys_off(n - 1);
  for (int i = 0; i < n; ++i) sys_diag[i] = m_diag[i] + dt * a_diag[i];
  for (int i = 0; i < n - 1; ++i) sys_off[i] = m_off[i] + dt * a_off[i];
  TridiagFactor lu;
  lu.factor(sys_diag, sys_off);

  FluxHistory out;
  out.times = output_times;
  out.q_internal.resize(output_times.size());
  out.q_external.resize(output_times.size());

  std::vector<double> temp = sample.t0;
  std::vector<double> prev(n), rhs(n);
  double t_prev = t_start;
  double t_cur = t_start;
  std::size_t next_out = 0;

  auto emit_outputs_up_to = [&](double t_hi) {
    while (next_out < output_times.size() && output_times[next_out] <= t_hi + 1e-9) {
      const double to = output_times[next_out];
      double surf_i, surf_e;
      if (t_cur > t_prev && to > t_prev) {
        const double w = std::min(1.0, (to - t_prev) / (t_cur - t_prev));
        surf_i = prev[0] + w * (temp[0] - prev[0]);
        surf_e = prev[n - 1] + w * (temp[n - 1] - prev[n - 1]);
      } else {
        surf_i = temp[0];
        surf_e = temp[n - 1];
      }
      out.q_internal[next_out] = -gi * (surf_i - boundary.internal_at(to));
      out.q_external[next_out] = -ge * (boundary.external_at(to) - surf_e);
      ++next_out;
    }
  };

  emit_outputs_up_to(t_start);
  while (t_cur < t_end - 1e-9 && next_out < output_times.size()) {
    prev = temp;
    t_prev = t_cur;
    t_cur = t_prev + dt;
    // rhs = M * T^n + dt * b(t^{n+1})
    rhs[0] = m_diag[0] * prev[0] + m_off[0] * prev[1];
    for (int i = 1; i < n - 1; ++i)
      rhs[i] = m_off[i - 1] * prev[i - 1] + m_diag[i] * prev[i] + m_off[i] * prev[i + 1];
    rhs[n - 1] = m_off[n - 2] * prev[n - 2] + m_diag[n - 1] * prev[n - 1];
    rhs[0] += dt * gi * boundary.internal_at(t_cur);
    rhs[n - 1] += dt * ge * boundary.external_at(t_cur);
    temp = rhs;
    lu.solve(temp);
    emit_outputs_up_to(t_cur);
  }
  if (next_out < output_times.size())
    throw std::out_of_range("solve_hdm: failed to reach all output times");

  // Final profile at the last output time (interpolated if between steps).
  out.final_temperature.resize(n);
  const double to = output_times.back();
  if (t_cur > t_prev && to > t_prev && to < t_cur) {
    const double w = (to - t_prev) / (t_cur - t_prev);
    for (int i = 0; i < n; ++i)
      out.final_temperature[i] = prev[i] + w * (temp[i] - prev[i]);
  } else {
    out.final_temperature = temp;
  }
  return out;
}

double compute_u_value(const ThermalSample& sample, const Mesh& mesh) {
  double resistance = sample.r_i + sample.r_e;
  for (int e = 0; e < mesh.n_elements; ++e)
    resistance += mesh.element_widths[e] / sample.kappa[e];
  return 1.0 / resistance;
}

double compute_c_value(const ThermalSample& sample, const Mesh& mesh) {
  double total = 0.0;
  for (int e = 0; e < mesh.n_elements; ++e)
    total += mesh.element_widths[e] * sample.c[e];
  return total;
}

}  // namespace walltherm
