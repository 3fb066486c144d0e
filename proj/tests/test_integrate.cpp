#include <cmath>

#include "doctest.h"
#include "palflow/certify.hpp"
#include "palflow/experiments.hpp"
#include "palflow/integrate.hpp"
#include "test_util.hpp"

using namespace palflow;

namespace {

Vector scalar(double v) {
  Vector out(1);
  out << v;
  return out;
}

// gamma = 0 turns the flow into xdot = -x, ydot = -mu y.
CompositeProblem scalar_exponential_problem() {
  return make_problem(make_quadratic(Matrix::Identity(1, 1), Vector::Zero(1)),
                      make_l1(0.0), Matrix::Identity(1, 1), 1.0);
}

CompositeProblem scalar_inequality_problem() {
  return make_problem(make_quadratic(Matrix::Identity(1, 1), Vector::Zero(1)),
                      make_inequality_indicator(scalar(-1.0)),
                      Matrix::Identity(1, 1), 1.0);
}

// Box QP with both constraints active: equilibrium x = (1,1), y = (1,2),
// valid certificate at mu = 2.
CompositeProblem active_box_problem() {
  Matrix q = Vector::LinSpaced(2, 2, 1).asDiagonal();
  Vector lin(2);
  lin << -3, -3;
  return make_problem(make_quadratic(q, lin),
                      make_inequality_indicator(Vector::Ones(2)),
                      Matrix::Identity(2, 2), 2.0);
}

double scalar_exp_error(double tol) {
  IntegratorConfig cfg;
  cfg.rel_tol = tol;
  cfg.abs_tol = tol;
  const CompositeProblem p = scalar_exponential_problem();
  const Trajectory traj =
      integrate_to_time(p, {scalar(1.0), scalar(0.0)}, 1.0, cfg, {1.0});
  return std::abs(traj.states.back().x(0) - std::exp(-1.0));
}

}  // namespace

TEST_SUITE_BEGIN("integrate");

TEST_CASE("scalar exponential hits e^{-1} under default tolerances") {
  CHECK(scalar_exp_error(1e-9) < 1e-8);
}

TEST_CASE("tighter tolerances give strictly smaller endpoint errors") {
  const double coarse = scalar_exp_error(1e-7);
  const double fine = scalar_exp_error(5e-8);
  CHECK(fine < coarse);
}

TEST_CASE("the pair integrates at fifth order") {
  // Huge tolerances with a pinned max_step turn the controller into a
  // fixed-step driver; halving the step must then shrink the endpoint
  // error by about 2^5.
  const CompositeProblem p = scalar_exponential_problem();
  const auto endpoint_error = [&](double step) {
    IntegratorConfig cfg;
    cfg.rel_tol = 1.0;
    cfg.abs_tol = 1.0;
    cfg.max_step = step;
    const Trajectory traj =
        integrate_to_time(p, {scalar(1.0), scalar(0.0)}, 1.0, cfg, {1.0});
    return std::abs(traj.states.back().x(0) - std::exp(-1.0));
  };
  const double coarse = endpoint_error(0.05);
  const double fine = endpoint_error(0.025);
  CHECK(fine * 20.0 <= coarse);
}

TEST_CASE("dense output matches the exact solution between steps") {
  IntegratorConfig cfg;
  const CompositeProblem p = scalar_exponential_problem();
  const std::vector<double> samples{0.0, 0.125, 0.5, 0.777, 1.0};
  const Trajectory traj =
      integrate_to_time(p, {scalar(1.0), scalar(0.0)}, 1.0, cfg, samples);
  REQUIRE(traj.times.size() == samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i)
    CHECK(traj.states[i].x(0) ==
          doctest::Approx(std::exp(-samples[i])).epsilon(1e-8));
}

TEST_CASE("zero horizon returns the initial state") {
  const CompositeProblem p = scalar_inequality_problem();
  const Trajectory traj = integrate_to_time(p, {scalar(0.3), scalar(0.1)}, 0.0,
                                            IntegratorConfig{}, {0.0});
  REQUIRE(traj.times.size() == 1);
  CHECK(traj.times[0] == 0.0);
  CHECK(traj.states[0].x(0) == 0.3);
  CHECK(traj.states[0].y(0) == 0.1);
}

TEST_CASE("scalar inequality flow reaches its hand-computed equilibrium") {
  const CompositeProblem p = scalar_inequality_problem();
  const PrimalDualState ref{scalar(-1.0), scalar(1.0)};
  const Trajectory traj = integrate_to_time(
      p, {scalar(0.0), scalar(0.0)}, 50.0, IntegratorConfig{}, {50.0}, ref);
  CHECK(std::abs(traj.states.back().x(0) + 1.0) < 1e-6);
  CHECK(std::abs(traj.states.back().y(0) - 1.0) < 1e-6);
  CHECK(traj.distances.back() < 1e-6);
}

TEST_CASE("sample validation") {
  const CompositeProblem p = scalar_inequality_problem();
  const PrimalDualState w0{scalar(0.0), scalar(0.0)};
  CHECK_THROWS_AS(integrate_to_time(p, w0, 1.0, IntegratorConfig{}, {0.5, 0.5}),
                  ParameterError);
  CHECK_THROWS_AS(integrate_to_time(p, w0, 1.0, IntegratorConfig{}, {2.0}),
                  ParameterError);
  CHECK_THROWS_AS(integrate_to_time(p, w0, -1.0, IntegratorConfig{}, {}),
                  ParameterError);
}

TEST_CASE("integrate_to_equilibrium on closed-form problems") {
  const CompositeProblem p = scalar_inequality_problem();
  const EquilibriumResult eq =
      integrate_to_equilibrium(p, {scalar(4.0), scalar(-2.0)}, IntegratorConfig{});
  CHECK(std::abs(eq.w_bar.x(0) + 1.0) < 1e-8);
  CHECK(std::abs(eq.w_bar.y(0) - 1.0) < 1e-8);
  CHECK(eq.elapsed > 0.0);

  const KktResidual r = kkt_residual(p, eq.w_bar);
  CHECK(r.stationarity < 1e-6);
  CHECK(r.subgradient_gap < 1e-6);
  CHECK(r.primal < 1e-6);

  Rng rng(41);
  const Matrix q = testutil::random_spd(rng, 4);
  const Vector lin = normal_vector(rng, 4);
  const CompositeProblem unconstrained =
      make_problem(make_quadratic(q, lin),
                   make_inequality_indicator(1e6 * Vector::Ones(4)),
                   Matrix::Identity(4, 4), 1.5);
  const EquilibriumResult eq2 = integrate_to_equilibrium(
      unconstrained, {Vector::Zero(4), Vector::Zero(4)}, IntegratorConfig{});
  CHECK((eq2.w_bar.x - solve_linear(q, -lin)).norm() < 1e-8);
  CHECK(eq2.w_bar.y.norm() < 1e-8);
}

TEST_CASE("equilibrium matches the active-set oracle on random QPs") {
  for (std::uint64_t seed : {7ULL, 8ULL}) {
    const QpData data = generate_qp(seed, 10, 10);
    const CompositeProblem p =
        make_problem(make_quadratic(data.Q, data.q),
                     make_inequality_indicator(data.b), data.T, 2.0);
    const OracleSolution sol = active_set_oracle(p);
    const EquilibriumResult eq = integrate_to_equilibrium(
        p, {Vector::Zero(10), Vector::Zero(10)}, IntegratorConfig{});
    CHECK((eq.w_bar.x - sol.x).norm() < 1e-6);
    CHECK((eq.w_bar.y - sol.y).norm() < 1e-6);
  }
}

TEST_CASE("certified decay envelopes hold along trajectories") {
  const CompositeProblem p = active_box_problem();
  const RateCertificate cert = certificate(p);
  REQUIRE(cert.valid);

  Vector x_star(2), y_star(2);
  x_star << 1, 1;
  y_star << 1, 2;
  const PrimalDualState ref{x_star, y_star};
  const Vector w_star = stack(ref);

  std::vector<double> samples;
  for (int i = 0; i <= 200; ++i) samples.push_back(0.1 * i);
  const Trajectory traj = integrate_to_time(p, {Vector::Zero(2), Vector::Zero(2)},
                                            20.0, IntegratorConfig{}, samples, ref);

  const Matrix P = lyapunov_matrix(p, 1.0);
  const Vector w0_tilde = -w_star;
  const double v0 = w0_tilde.dot(P * w0_tilde);
  const double kappa_root = std::sqrt(cert.kappa_p);

  double previous = v0;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const Vector tilde = stack(traj.states[i]) - w_star;
    const double lyap = tilde.dot(P * tilde) *
                        std::exp(2.0 * cert.rho0 * traj.times[i]);
    CHECK(lyap <= previous * (1.0 + 1e-6) + 1e-12);
    previous = std::max(lyap, 1e-12);

    const double envelope = kappa_root * w0_tilde.norm() *
                            std::exp(-cert.rho0 * traj.times[i]);
    CHECK(traj.distances[i] <= envelope * (1.0 + 1e-6));
  }
}

TEST_CASE("failure modes surface as typed errors") {
  const CompositeProblem p = scalar_inequality_problem();
  IntegratorConfig tiny;
  tiny.max_steps = 5;
  try {
    integrate_to_time(p, {scalar(0.0), scalar(0.0)}, 50.0, tiny, {});
    FAIL("expected NonconvergenceError");
  } catch (const NonconvergenceError& e) {
    CHECK(e.partial.times.size() >= 1);
  }

  const double nan = std::nan("");
  CHECK_THROWS_AS(integrate_to_time(p, {scalar(nan), scalar(0.0)}, 1.0,
                                    IntegratorConfig{}, {1.0}),
                  DivergenceError);
}

TEST_SUITE_END();
