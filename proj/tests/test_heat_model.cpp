#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "walltherm/heat_model.hpp"

using namespace walltherm;

namespace {

BoundarySeries constant_boundary(double t_i, double t_e, double t_end) {
  return BoundarySeries{{0.0, t_end}, {t_i, t_i}, {t_e, t_e}};
}

BoundarySeries sinusoid_boundary(double t_end, double step) {
  BoundarySeries b;
  for (double t = 0.0; t <= t_end + 1e-9; t += step) {
    b.times.push_back(t);
    b.t_internal.push_back(293.0 + 2.0 * std::sin(2.0 * std::numbers::pi * t / 86400.0));
    b.t_external.push_back(278.0 + 5.0 * std::cos(2.0 * std::numbers::pi * t / 86400.0));
  }
  return b;
}

ThermalSample uniform_sample(const Mesh& mesh, double kappa, double c, double r_i,
                             double r_e, double t0) {
  ThermalSample s;
  s.kappa.assign(mesh.n_elements, kappa);
  s.c.assign(mesh.n_elements, c);
  s.t0.assign(mesh.n_nodes(), t0);
  s.r_i = r_i;
  s.r_e = r_e;
  return s;
}

}  // namespace

TEST_CASE("build_mesh produces a uniform partition") {
  const Mesh mesh = build_mesh(0.31, 8);
  CHECK(mesh.n_nodes() == 9);
  CHECK(mesh.node_positions.front() == 0.0);
  CHECK(mesh.node_positions.back() == doctest::Approx(0.31).epsilon(1e-15));
  for (double w : mesh.element_widths) CHECK(w == doctest::Approx(0.31 / 8).epsilon(1e-15));
  CHECK_THROWS_AS(build_mesh(0.0, 4), std::invalid_argument);
  CHECK_THROWS_AS(build_mesh(0.31, 0), std::invalid_argument);
}

TEST_CASE("U and C closed forms are exact") {
  const Mesh mesh = build_mesh(0.4, 4);
  ThermalSample s = uniform_sample(mesh, 2.0, 1.0e6, 0.1, 0.05, 290.0);
  // R = 0.1 + 0.05 + 0.4/2 = 0.35
  CHECK(compute_u_value(s, mesh) == doctest::Approx(1.0 / 0.35).epsilon(1e-14));
  CHECK(compute_c_value(s, mesh) == doctest::Approx(4.0e5).epsilon(1e-14));
  s.kappa = {1.0, 2.0, 4.0, 8.0};
  // R = 0.15 + 0.1*(1 + 1/2 + 1/4 + 1/8) = 0.15 + 0.1875
  CHECK(compute_u_value(s, mesh) == doctest::Approx(1.0 / 0.3375).epsilon(1e-14));
}

TEST_CASE("constant boundaries relax to the analytic steady state") {
  const Mesh mesh = build_mesh(0.31, 32);
  ThermalSample s = uniform_sample(mesh, 0.8, 1.0e6, 0.13, 0.04, 285.0);
  const double u = compute_u_value(s, mesh);
  const double t_end = 30.0 * 86400.0;  // many wall time constants
  const BoundarySeries b = constant_boundary(295.0, 275.0, t_end);
  const FluxHistory h = solve_hdm(s, b, mesh, 300.0, {t_end});
  const double q_exact = u * 20.0;
  CHECK(h.q_internal[0] == doctest::Approx(q_exact).epsilon(1e-3));
  CHECK(h.q_external[0] == doctest::Approx(q_exact).epsilon(1e-3));
  // steady profile is piecewise linear; surface temperatures obey the Robin drops
  CHECK(h.final_temperature.front() ==
        doctest::Approx(295.0 - 0.13 * q_exact).epsilon(1e-6));
  CHECK(h.final_temperature.back() ==
        doctest::Approx(275.0 + 0.04 * q_exact).epsilon(1e-6));
}

TEST_CASE("per-step energy balance holds to rounding") {
  const Mesh mesh = build_mesh(0.31, 16);
  ThermalSample s = uniform_sample(mesh, 0.6, 9.0e5, 0.11, 0.06, 288.0);
  s.kappa[3] = 0.3;
  s.c[7] = 1.4e6;
  const double dt = 300.0;
  const int n_steps = 200;
  const BoundarySeries b = sinusoid_boundary(n_steps * dt, dt);

  std::vector<double> step_times;
  for (int k = 1; k <= n_steps; ++k) step_times.push_back(k * dt);
  const FluxHistory h = solve_hdm(s, b, mesh, dt, step_times);

  // lumped heat content uses the same consistent mass as the solver
  const auto heat_content = [&](const std::vector<double>& temp) {
    double total = 0.0;
    for (int e = 0; e < mesh.n_elements; ++e) {
      total += s.c[e] * mesh.element_widths[e] * 0.5 * (temp[e] + temp[e + 1]);
    }
    return total;
  };
  double net_flux = 0.0;
  for (int k = 0; k < n_steps; ++k) net_flux += dt * (h.q_internal[k] - h.q_external[k]);
  const double stored = heat_content(h.final_temperature) - heat_content(s.t0);
  CHECK(stored == doctest::Approx(net_flux).epsilon(1e-10));
}

TEST_CASE("discrete maximum principle at admissible time steps") {
  const Mesh mesh = build_mesh(0.31, 32);
  const double h = 0.31 / 32;
  const double kappa = 0.5, c = 1.0e6;
  ThermalSample s = uniform_sample(mesh, kappa, c, 0.13, 0.04, 300.0);
  const double dt = 300.0;
  REQUIRE(dt >= c * h * h / (6.0 * kappa));  // admissibility of the consistent mass
  const BoundarySeries b = constant_boundary(290.0, 275.0, 5.0 * 86400.0);
  const FluxHistory out = solve_hdm(s, b, mesh, dt, {5.0 * 86400.0});
  for (double t : out.final_temperature) {
    CHECK(t <= 300.0 + 1e-9);
    CHECK(t >= 275.0 - 1e-9);
  }
}

TEST_CASE("second-order spatial convergence of the surface flux") {
  // smooth setup shared across refinements; tiny dt so spatial error dominates
  const double t_end = 0.25 * 86400.0;
  const double dt = 20.0;
  const BoundarySeries b = sinusoid_boundary(t_end, 300.0);
  const auto flux_at = [&](int exponent) {
    const Mesh mesh = build_mesh(0.31, 1 << exponent);
    ThermalSample s = uniform_sample(mesh, 0.8, 1.2e6, 0.13, 0.04, 0.0);
    for (int i = 0; i < mesh.n_nodes(); ++i) {
      const double x = mesh.node_positions[i] / 0.31;
      s.t0[i] = 285.0 + 8.0 * std::sin(std::numbers::pi * x);
    }
    return solve_hdm(s, b, mesh, dt, {t_end}).q_internal[0];
  };
  const double reference = flux_at(9);
  const double err_3 = std::abs(flux_at(3) - reference);
  const double err_4 = std::abs(flux_at(4) - reference);
  const double err_5 = std::abs(flux_at(5) - reference);
  const double order_34 = std::log2(err_3 / err_4);
  const double order_45 = std::log2(err_4 / err_5);
  CHECK(order_34 == doctest::Approx(2.0).epsilon(0.2));
  CHECK(order_45 == doctest::Approx(2.0).epsilon(0.25));
}

TEST_CASE("first-order temporal convergence of the surface flux") {
  const double t_end = 0.25 * 86400.0;
  const Mesh mesh = build_mesh(0.31, 64);
  const BoundarySeries b = sinusoid_boundary(t_end, 300.0);
  ThermalSample s = uniform_sample(mesh, 0.8, 1.2e6, 0.13, 0.04, 0.0);
  for (int i = 0; i < mesh.n_nodes(); ++i) {
    const double x = mesh.node_positions[i] / 0.31;
    s.t0[i] = 285.0 + 8.0 * std::sin(std::numbers::pi * x);
  }
  const auto flux_at = [&](double dt) {
    return solve_hdm(s, b, mesh, dt, {t_end}).q_internal[0];
  };
  const double reference = flux_at(5.0);
  const double err_coarse = std::abs(flux_at(600.0) - reference);
  const double err_fine = std::abs(flux_at(300.0) - reference);
  CHECK(std::log2(err_coarse / err_fine) == doctest::Approx(1.0).epsilon(0.25));
}

TEST_CASE("boundary interpolation is piecewise linear") {
  const BoundarySeries b{{0.0, 100.0, 300.0}, {1.0, 3.0, 7.0}, {0.0, -2.0, 2.0}};
  CHECK(b.internal_at(50.0) == doctest::Approx(2.0));
  CHECK(b.internal_at(200.0) == doctest::Approx(5.0));
  CHECK(b.external_at(150.0) == doctest::Approx(-1.0));
  // clamped outside coverage
  CHECK(b.internal_at(-10.0) == doctest::Approx(1.0));
  CHECK(b.internal_at(400.0) == doctest::Approx(7.0));
}

TEST_CASE("invalid inputs are rejected") {
  const Mesh mesh = build_mesh(0.31, 4);
  ThermalSample s = uniform_sample(mesh, 0.8, 1.0e6, 0.13, 0.04, 290.0);
  const BoundarySeries b = constant_boundary(295.0, 275.0, 3600.0);
  ThermalSample bad = s;
  bad.kappa[1] = 0.0;
  CHECK_THROWS_AS(solve_hdm(bad, b, mesh, 300.0, {3600.0}), std::invalid_argument);
  bad = s;
  bad.c[0] = -1.0;
  CHECK_THROWS_AS(solve_hdm(bad, b, mesh, 300.0, {3600.0}), std::invalid_argument);
  bad = s;
  bad.r_e = 0.0;
  CHECK_THROWS_AS(solve_hdm(bad, b, mesh, 300.0, {3600.0}), std::invalid_argument);
  bad = s;
  bad.t0.pop_back();
  CHECK_THROWS_AS(solve_hdm(bad, b, mesh, 300.0, {3600.0}), std::invalid_argument);
  CHECK_THROWS_AS(solve_hdm(s, b, mesh, -1.0, {3600.0}), std::invalid_argument);
  CHECK_THROWS_AS(solve_hdm(s, b, mesh, 300.0, {7200.0}), std::out_of_range);
  CHECK_THROWS_AS(solve_hdm(s, b, mesh, 300.0, {600.0, 300.0}), std::invalid_argument);
}

TEST_CASE("outputs between steps are linearly interpolated") {
  const Mesh mesh = build_mesh(0.31, 8);
  const ThermalSample s = uniform_sample(mesh, 0.8, 1.0e6, 0.13, 0.04, 280.0);
  const BoundarySeries b = constant_boundary(295.0, 275.0, 3600.0);
  const FluxHistory at_steps = solve_hdm(s, b, mesh, 300.0, {300.0, 600.0});
  const FluxHistory between = solve_hdm(s, b, mesh, 300.0, {450.0});
  CHECK(between.q_internal[0] ==
        doctest::Approx(0.5 * (at_steps.q_internal[0] + at_steps.q_internal[1]))
            .epsilon(1e-12));
}
