#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "walltherm/ensemble.hpp"
#include "walltherm/renka.hpp"

using namespace walltherm;

TEST_CASE("ESS of equal misfits is the ensemble size exactly") {
  const std::vector<double> misfits(7, 3.25);
  CHECK(ess(misfits, 0.0, 1.0) == doctest::Approx(7.0).epsilon(1e-14));
  CHECK(ess(misfits, 0.3, 0.9) == doctest::Approx(7.0).epsilon(1e-14));
}

TEST_CASE("ESS hand example with two members") {
  // misfits {0, 1}, increment ln 3: weights {3/4, 1/4}, ESS = 1/(9/16+1/16) = 1.6
  const std::vector<double> misfits{0.0, 1.0};
  CHECK(ess(misfits, 0.0, std::log(3.0)) == doctest::Approx(1.6).epsilon(1e-12));
}

TEST_CASE("ESS is invariant to shifting all misfits") {
  const std::vector<double> misfits{2.0, 5.0, 11.0};
  const std::vector<double> shifted{1002.0, 1005.0, 1011.0};
  CHECK(ess(misfits, 0.1, 0.7) == doctest::Approx(ess(shifted, 0.1, 0.7)).epsilon(1e-12));
}

TEST_CASE("ESS decreases monotonically in phi") {
  RngStream rng = RngStream::derive(21, "test/ess");
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> misfits(20);
    bool all_equal = true;
    for (double& m : misfits) m = 50.0 * rng.uniform();
    for (double m : misfits) all_equal = all_equal && m == misfits[0];
    double prev = 21.0;
    for (double phi = 0.05; phi <= 1.0; phi += 0.05) {
      const double current = ess(misfits, 0.0, phi);
      if (!all_equal) CHECK(current < prev + 1e-12);
      prev = current;
    }
  }
  CHECK_THROWS_AS(ess({1.0, 2.0}, 0.5, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(ess({1.0, 2.0}, -0.1, 0.5), std::invalid_argument);
}

TEST_CASE("select_phi jumps to one when the threshold allows") {
  const std::vector<double> equal(10, 4.0);
  CHECK(select_phi(equal, 0.0, 5.0) == 1.0);
  CHECK(select_phi(equal, 0.4, 5.0) == 1.0);
}

TEST_CASE("select_phi bisects to the threshold otherwise") {
  std::vector<double> misfits(10);
  for (int j = 0; j < 10; ++j) misfits[j] = 3.0 * j;
  const double j_thresh = 6.0;
  REQUIRE(ess(misfits, 0.0, 1.0) < j_thresh);
  const double phi = select_phi(misfits, 0.0, j_thresh);
  CHECK(phi > 0.0);
  CHECK(phi < 1.0);
  CHECK(ess(misfits, 0.0, phi) == doctest::Approx(j_thresh).epsilon(1e-6));
}

namespace {

std::vector<RngStream> member_streams(int n, std::uint64_t seed,
                                      const std::string& prefix) {
  std::vector<RngStream> streams;
  for (int j = 0; j < n; ++j)
    streams.push_back(RngStream::derive(seed, prefix + std::to_string(j)));
  return streams;
}

}  // namespace

TEST_CASE("identical predictions annihilate the Kalman update") {
  const int n_members = 8;
  Eigen::MatrixXd latents = Eigen::MatrixXd::Random(3, n_members);
  Eigen::MatrixXd predictions = Eigen::MatrixXd::Ones(2, n_members);
  Eigen::VectorXd q(2);
  q << 5.0, -1.0;
  NoiseModel noise;
  noise.sigma = Eigen::Vector2d(1.0, 1.0);
  auto rngs = member_streams(n_members, 3, "test/ku/");
  const Eigen::MatrixXd updated = kalman_update(latents, predictions, q, noise, 1.0, rngs);
  CHECK((updated - latents).norm() == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("Kalman update is invariant to a common shift of predictions and data") {
  const int n_members = 16;
  RngStream rng = RngStream::derive(4, "test/ku/shift");
  Eigen::MatrixXd latents(2, n_members), predictions(3, n_members);
  for (int j = 0; j < n_members; ++j) {
    for (int i = 0; i < 2; ++i) latents(i, j) = rng.normal();
    for (int i = 0; i < 3; ++i) predictions(i, j) = rng.normal();
  }
  Eigen::VectorXd q = Eigen::Vector3d(0.4, -0.2, 1.0);
  NoiseModel noise;
  noise.sigma = Eigen::Vector3d(0.5, 0.7, 0.9);
  auto rngs_a = member_streams(n_members, 9, "test/ku/a/");
  auto rngs_b = member_streams(n_members, 9, "test/ku/a/");
  const Eigen::MatrixXd base = kalman_update(latents, predictions, q, noise, 2.0, rngs_a);
  const Eigen::MatrixXd shifted = kalman_update(
      latents, (predictions.array() + 10.0).matrix(),
      (q.array() + 10.0).matrix(), noise, 2.0, rngs_b);
  CHECK((base - shifted).norm() < 1e-10);
}

TEST_CASE("Kalman update rejects inconsistent inputs") {
  Eigen::MatrixXd latents = Eigen::MatrixXd::Zero(2, 4);
  Eigen::MatrixXd predictions = Eigen::MatrixXd::Zero(3, 4);
  Eigen::VectorXd q = Eigen::Vector3d::Zero();
  NoiseModel noise;
  noise.sigma = Eigen::Vector3d::Ones();
  auto rngs = member_streams(4, 1, "test/ku/err/");
  predictions(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(kalman_update(latents, predictions, q, noise, 1.0, rngs),
                  std::invalid_argument);
  predictions(0, 0) = 0.0;
  CHECK_THROWS_AS(kalman_update(latents, predictions, q, noise, 0.0, rngs),
                  std::invalid_argument);
  NoiseModel short_noise;
  short_noise.sigma = Eigen::Vector2d::Ones();
  CHECK_THROWS_AS(kalman_update(latents, predictions, q, short_noise, 1.0, rngs),
                  std::invalid_argument);
}

TEST_CASE("linear-Gaussian conjugacy: posterior mean 0.5, variance 0.5") {
  // prior psi ~ N(0,1), identity forward map, observe q = 1 with unit noise,
  // single full-strength update (alpha = 1)
  const int n_members = 10000;
  Eigen::MatrixXd latents(1, n_members);
  RngStream rng = RngStream::derive(6, "test/conjugate");
  for (int j = 0; j < n_members; ++j) latents(0, j) = rng.normal();
  Eigen::MatrixXd predictions = latents;
  Eigen::VectorXd q(1);
  q << 1.0;
  NoiseModel noise;
  noise.sigma = Eigen::VectorXd::Ones(1);
  auto rngs = member_streams(n_members, 13, "test/conjugate/");
  const Eigen::MatrixXd post = kalman_update(latents, predictions, q, noise, 1.0, rngs);
  const double mean = post.row(0).mean();
  const double var =
      (post.row(0).array() - mean).square().sum() / (n_members - 1);
  const double se_mean = std::sqrt(0.5 / n_members);
  const double se_var = 0.5 * std::sqrt(2.0 / (n_members - 1));
  CHECK(std::abs(mean - 0.5) < 3.0 * se_mean);
  CHECK(std::abs(var - 0.5) < 3.0 * se_var);
}

namespace {

// Tiny inversion fixture: one element, infer kappa-equivalents through a
// linearised forward map acting on the packed latent vector.
struct TinyProblem {
  Mesh mesh = build_mesh(0.31, 1);
  PriorConfig config;
  std::vector<double> t0_mean{290.0, 285.0};
  Ensemble ensemble;

  explicit TinyProblem(int n_members, std::uint64_t seed) {
    const PriorBases bases = build_prior_bases(config, mesh);
    ensemble = generate_prior_ensemble(config, bases, t0_mean, mesh, n_members, seed);
  }
};

}  // namespace

TEST_CASE("renka_step tempers to phi = 1 and records the schedule") {
  TinyProblem problem(40, 17);
  const ForwardMap forward = [](const ThermalSample& s) {
    Eigen::VectorXd out(2);
    out << s.kappa[0], s.r_i;
    return out;
  };
  Eigen::VectorXd q(2);
  q << 0.9, 0.12;
  NoiseModel noise;
  noise.sigma = Eigen::Vector2d(0.05, 0.01);
  RenkaOptions options;
  options.j_thresh = 40.0 / 3.0;
  options.master_seed = 17;
  options.stream_prefix = "renka/window/0";
  const TemperingTrace trace = renka_step(problem.ensemble, forward, q, noise,
                                          problem.config, problem.t0_mean, problem.mesh,
                                          options);
  REQUIRE(!trace.phis.empty());
  CHECK(trace.phis.back() == 1.0);
  CHECK(static_cast<int>(trace.phis.size()) == trace.iterations);
  for (std::size_t r = 1; r < trace.phis.size(); ++r)
    CHECK(trace.phis[r] > trace.phis[r - 1]);
  // the data pulled the ensemble towards the observations
  double mean_kappa = 0.0;
  for (const ThermalSample& s : problem.ensemble.samples) mean_kappa += s.kappa[0];
  mean_kappa /= problem.ensemble.size();
  CHECK(mean_kappa == doctest::Approx(0.9).epsilon(0.05));
}

TEST_CASE("renka_step raises ConvergenceFailure at the iteration cap") {
  TinyProblem problem(40, 23);
  const ForwardMap forward = [](const ThermalSample& s) {
    Eigen::VectorXd out(1);
    out << s.kappa[0];
    return out;
  };
  Eigen::VectorXd q(1);
  q << 50.0;  // far outside the prior: misfits huge, phi steps tiny
  NoiseModel noise;
  noise.sigma = Eigen::VectorXd::Constant(1, 1e-6);
  RenkaOptions options;
  options.j_thresh = 39.9;  // nearly no weight degeneracy allowed
  options.max_iterations = 3;
  options.master_seed = 23;
  options.stream_prefix = "renka/window/0";
  try {
    renka_step(problem.ensemble, forward, q, noise, problem.config, problem.t0_mean,
               problem.mesh, options);
    FAIL("expected ConvergenceFailure");
  } catch (const ConvergenceFailure& failure) {
    CHECK(failure.trace.iterations == 3);
    CHECK(failure.trace.phis.size() == 3);
    CHECK(failure.trace.phis.back() < 1.0);
  }
}

TEST_CASE("evaluate_forward is independent of the worker count") {
  TinyProblem problem(25, 31);
  const ForwardMap forward = [](const ThermalSample& s) {
    Eigen::VectorXd out(2);
    out << s.kappa[0] * s.c[0], s.r_i + s.r_e;
    return out;
  };
  const Eigen::MatrixXd serial = evaluate_forward(problem.ensemble, forward, 1);
  const Eigen::MatrixXd parallel = evaluate_forward(problem.ensemble, forward, 7);
  CHECK((serial - parallel).norm() == 0.0);
}

TEST_CASE("evaluate_forward propagates worker exceptions") {
  TinyProblem problem(8, 37);
  const ForwardMap forward = [](const ThermalSample&) -> Eigen::VectorXd {
    throw std::runtime_error("forward model exploded");
  };
  CHECK_THROWS_AS(evaluate_forward(problem.ensemble, forward, 4), std::runtime_error);
}
