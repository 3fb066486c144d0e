#include <cmath>

#include "doctest.h"
#include "palflow/certify.hpp"
#include "test_util.hpp"

using namespace palflow;

namespace {

// Q = diag(2,1), T = I, inequality bound at 1: the running certificate example.
CompositeProblem diag_problem(double mu) {
  Matrix q = Vector::LinSpaced(2, 2, 1).asDiagonal();
  return make_problem(make_quadratic(q, Vector::Zero(2)),
                      make_inequality_indicator(Vector::Ones(2)),
                      Matrix::Identity(2, 2), mu);
}

}  // namespace

TEST_SUITE_BEGIN("certify");

TEST_CASE("mu_feasibility_threshold closed-form values") {
  CHECK(mu_feasibility_threshold(1.0, 2.0, 1.0) ==
        doctest::Approx((1.0 + std::sqrt(17.0)) / 8.0).epsilon(1e-12));
  CHECK(mu_feasibility_threshold(1.0, 2.0, 1.0) == doctest::Approx(0.6403882).epsilon(1e-6));
  CHECK(mu_feasibility_threshold(1.0, 9.0, 1.0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(mu_feasibility_threshold(1.0, 2.0, 2.0) ==
        doctest::Approx(0.5 * (1.0 + std::sqrt(5.0))).epsilon(1e-12));
  CHECK_THROWS_AS(mu_feasibility_threshold(1.0, 1.0, 1.0), UnsupportedRegimeError);
  CHECK_THROWS_AS(mu_feasibility_threshold(0.0, 1.0, 1.0), ParameterError);
}

TEST_CASE("rho0 closed-form values") {
  CHECK(rho0(2.0, 1.0, 1.0, 1.0) == doctest::Approx(1.0 / 7.0).epsilon(1e-14));
  CHECK(rho0(1.0, 1.0, 1.0, 1.0) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  CHECK(rho0(1.0, 1.0, 1e-8, 1.0) < 1e-15);  // rank-deficient limit
}

TEST_CASE("beta closed-form values") {
  CHECK(beta(1.0, 1.0, 1.0, 1.0) == doctest::Approx(14.0 / 9.0).epsilon(1e-14));
  CHECK(beta(2.0, 1.0, 1.0, 1.0) ==
        doctest::Approx(3.0 / 8.0 + 18.0 / 49.0).epsilon(1e-14));
  CHECK(beta(1e9, 1.0, 1.0, 1.0) < 1e-8);
}

TEST_CASE("mu_hat: boundary case and bisection against the grid scan") {
  CHECK(mu_hat(1.0, 1.0, 1.0) == 1.0);   // beta(1) = 14/9 < 2
  CHECK(mu_hat(10.0, 1.0, 5.0) == 5.0);  // beta(sigma_max) already small

  const double bisected = mu_hat(0.1, 1.0, 1.0);
  CHECK(beta(1.0, 0.1, 1.0, 1.0) > 0.2);  // beta(sigma_max) too large
  CHECK(std::abs(beta(bisected, 0.1, 1.0, 1.0) - 0.2) < 1e-10);
  CHECK(std::abs(bisected - testutil::grid_scan_mu_hat(0.1, 1.0, 1.0)) <= 1e-4);
}

TEST_CASE("certificate composes the closed forms") {
  const RateCertificate cert = certificate(diag_problem(2.0));
  CHECK(cert.valid);
  CHECK(cert.rho0 == doctest::Approx(1.0 / 7.0).epsilon(1e-12));
  CHECK(cert.mu_hat == 1.0);
  CHECK(cert.mu_feasibility_threshold == doctest::Approx(0.6403882).epsilon(1e-6));
  CHECK(cert.kappa_p == doctest::Approx(8.0 / 3.0).epsilon(1e-10));

  CHECK_FALSE(certificate(diag_problem(0.5)).valid);
  CHECK_FALSE(certificate(diag_problem(1.0)).valid);  // boundary is strict

  Matrix iso = Matrix::Identity(2, 2);
  const CompositeProblem unsupported =
      make_problem(make_quadratic(iso, Vector::Zero(2)),
                   make_inequality_indicator(Vector::Ones(2)),
                   Matrix::Identity(2, 2), 2.0);
  CHECK_THROWS_AS(certificate(unsupported), UnsupportedRegimeError);
}

TEST_CASE("lyapunov_matrix on the scalar example") {
  const CompositeProblem p = make_problem(
      make_quadratic(Matrix::Identity(1, 1), Vector::Zero(1)),
      make_inequality_indicator(-Vector::Ones(1)), Matrix::Identity(1, 1), 1.0);
  const Matrix P = lyapunov_matrix(p, 1.0);
  Matrix expected(2, 2);
  expected << 1, 1, 1, 3;
  CHECK((P - expected).norm() == 0.0);

  const SymEigResult eig = sym_eig(P);
  CHECK(eig.eigenvalues(0) == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-12));
  CHECK(eig.eigenvalues(1) == doctest::Approx(2.0 + std::sqrt(2.0)).epsilon(1e-12));

  CHECK((lyapunov_matrix(p, 2.0) - 2.0 * P).norm() == 0.0);
  CHECK_THROWS_AS(lyapunov_matrix(p, 0.0), ParameterError);
}

TEST_CASE("lyapunov identity is exact") {
  const CompositeProblem sc = make_problem(
      make_quadratic(Matrix::Identity(1, 1), Vector::Zero(1)),
      make_inequality_indicator(-Vector::Ones(1)), Matrix::Identity(1, 1), 1.0);
  CHECK(lyapunov_identity_gap(sc, 1.0) <= 1e-15);

  Rng rng(51);
  const Matrix t = testutil::random_full_row_rank(rng, 5, 8, 0.3, 2.0);
  const Matrix q = 0.7 * Matrix::Identity(8, 8);  // m_f = 0.7
  const CompositeProblem p =
      make_problem(make_quadratic(q, Vector::Zero(8)), make_l1(1.0), t, 3.0);
  const double bound = 1e-12 * (1.0 + t.squaredNorm());
  CHECK(lyapunov_identity_gap(p, 1.0) <= bound);
  CHECK(lyapunov_identity_gap(p, 2.0) <= 2.0 * bound);

  for (int trial = 0; trial < 100; ++trial) {
    const CompositeProblem r = testutil::random_problem(rng, 7);
    const double alpha = rng.uniform(0.3, 3.0);
    CHECK(lyapunov_identity_gap(r, alpha) <=
          1e-12 * alpha * (1.0 + r.T.squaredNorm()));
  }
}

TEST_CASE("lyapunov_matrix is positive definite on random instances") {
  Rng rng(52);
  for (int trial = 0; trial < 50; ++trial) {
    const CompositeProblem p = testutil::random_problem(rng, 7);
    CHECK(min_eigenvalue(lyapunov_matrix(p, 1.0)) > 0.0);
  }
}

TEST_CASE("rho0 and beta decrease monotonically beyond sigma_max") {
  Rng rng(53);
  for (int trial = 0; trial < 20; ++trial) {
    const double m_f = rng.uniform(0.1, 2.0);
    const double smin = rng.uniform(0.3, 1.5);
    const double smax = smin + rng.uniform(0.0, 1.5);
    double prev_rho = rho0(smax, m_f, smin, smax);
    double prev_beta = beta(smax, m_f, smin, smax);
    for (int i = 1; i <= 60; ++i) {
      const double mu = smax + 0.5 * i;
      const double r = rho0(mu, m_f, smin, smax);
      const double b = beta(mu, m_f, smin, smax);
      CHECK(r < prev_rho);
      CHECK(b < prev_beta);
      prev_rho = r;
      prev_beta = b;
    }
    CHECK(beta(1e12, m_f, smin, smax) < 1e-10);
  }
}

TEST_CASE("LMI feasibility on the diagonal example") {
  const CompositeProblem p = diag_problem(2.0);

  const LmiReport at_rho0 = lmi_feasible(p, 1.0 / 7.0);
  CHECK(at_rho0.feasible);
  CHECK(at_rho0.min_eig > 0.0);
  CHECK(at_rho0.lambda1 == doctest::Approx(1.0 / (p.f.L_f - p.f.m_f)));
  CHECK(at_rho0.lambda2 == doctest::Approx((1.0 / 2.0) * (1.0 + 0.5)));
  CHECK(at_rho0.matrix.rows() == 8);

  CHECK(lmi_feasible(p, 0.0).feasible);        // mu above the threshold
  CHECK_FALSE(lmi_feasible(p, 1e3).feasible);  // -2 rho P dominates

  CHECK_THROWS_AS(lmi_matrix(p, -1.0, 1.0, 1.0, 1.0), ParameterError);
  CHECK_THROWS_AS(lmi_matrix(p, 0.0, 1.0, 0.0, 1.0), ParameterError);
}

TEST_CASE("full LMI and Schur-reduced form agree") {
  Rng rng(54);
  for (int trial = 0; trial < 30; ++trial) {
    const CompositeProblem p = testutil::random_valid_instance(rng, 6);
    const RateCertificate cert = certificate(p);
    for (double rho : {0.0, cert.rho0, 3.0 * cert.rho0, 1e3}) {
      const LmiReport full = lmi_feasible(p, rho);
      const Matrix schur = lmi_schur_reduced(p, rho, full.alpha, full.lambda1,
                                             full.lambda2);
      const double schur_min = min_eigenvalue(schur);
      CHECK(full.feasible == (schur_min > 1e-9 * schur.norm()));
    }
  }
}

TEST_CASE("feasibility verdict does not depend on alpha") {
  Rng rng(55);
  for (int trial = 0; trial < 10; ++trial) {
    const CompositeProblem p = testutil::random_valid_instance(rng, 6);
    const RateCertificate cert = certificate(p);
    const double lhat = p.f.L_f - p.f.m_f;
    for (double rho : {0.0, cert.rho0, 1e3}) {
      const bool base = lmi_feasible(p, rho).feasible;
      for (double alpha : {0.5, 2.0}) {
        const LmiReport scaled =
            lmi_feasible(p, rho, alpha, alpha / lhat,
                         (alpha / p.mu) * (1.0 + p.f.m_f / p.mu));
        CHECK(scaled.feasible == base);
      }
    }
  }
}

TEST_CASE("rho0 is always certifiable and the bisected rate dominates it") {
  Rng rng(56);
  for (int trial = 0; trial < 10; ++trial) {
    const CompositeProblem p = testutil::random_valid_instance(rng);
    const RateCertificate cert = certificate(p);
    REQUIRE(cert.valid);
    CHECK(lmi_feasible(p, cert.rho0).min_eig > 0.0);
    CHECK(certified_rate_bisect(p) >= cert.rho0 - 1e-9);
  }

  CHECK(certified_rate_bisect(diag_problem(2.0)) >= 1.0 / 7.0 - 1e-9);

  // Just above the feasibility threshold the zero-rate LMI is feasible and a
  // positive rate survives bisection.
  const RateCertificate base = certificate(diag_problem(2.0));
  const CompositeProblem near = diag_problem(1.01 * base.mu_feasibility_threshold);
  CHECK(lmi_feasible(near, 0.0).feasible);
  CHECK(certified_rate_bisect(near) > 0.0);
}

TEST_CASE("bisect reports infeasibility at rho = 0") {
  CHECK_THROWS_AS(certified_rate_bisect(diag_problem(0.01)), CertificateError);
}

TEST_SUITE_END();
