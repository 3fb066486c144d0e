#include "palflow/certify.hpp"

#include <algorithm>
#include <cmath>

namespace palflow {

namespace {

constexpr double kFeasibilityMargin = 1e-9;  // relative PD threshold
constexpr double kMuHatTol = 1e-12;
constexpr double kBisectTol = 1e-9;

double lhat1_or_throw(const CompositeProblem& p) {
  const double lhat = p.f.L_f - p.f.m_f;
  if (lhat <= 0.0)
    throw UnsupportedRegimeError(
        "certificates require L_f > m_f; the L_f = m_f case is not covered");
  return lhat;
}

struct Multipliers {
  double alpha;
  double lambda1;
  double lambda2;
};

Multipliers default_multipliers(const CompositeProblem& p) {
  const double lhat = lhat1_or_throw(p);
  const double alpha = 1.0;
  return {alpha, alpha / lhat, (alpha / p.mu) * (1.0 + p.f.m_f / p.mu)};
}

void require_multipliers(double rho, double alpha, double l1, double l2) {
  if (rho < 0.0) throw ParameterError("rho must be nonnegative");
  if (!(alpha > 0.0) || !(l1 > 0.0) || !(l2 > 0.0))
    throw ParameterError("alpha and the multipliers must be positive");
}

// Shared blocks of the LMI in both its full and Schur-reduced forms.
struct LmiBlocks {
  Matrix S;  // -(A^T P + P A + 2 rho P)
  Matrix R;  // -(P B + C^T Pi0)
  Vector lambda_diag;
};

LmiBlocks lmi_blocks(const CompositeProblem& p, double rho, double alpha,
                     double l1, double l2) {
  const double lhat = lhat1_or_throw(p);
  const Eigen::Index n = p.primal_dim();
  const Eigen::Index m = p.dual_dim();
  const SystemMatrices sys = system_matrices(p);
  const Matrix P = lyapunov_matrix(p, alpha);

  LmiBlocks out;
  out.S = -(sys.A.transpose() * P + P * sys.A + 2.0 * rho * P);

  Matrix pi0 = Matrix::Zero(n + m, n + m);
  pi0.topLeftCorner(n, n) = l1 * lhat * Matrix::Identity(n, n);
  pi0.bottomRightCorner(m, m) = l2 * Matrix::Identity(m, m);
  out.R = -(P * sys.B + sys.C.transpose() * pi0);

  out.lambda_diag = Vector(n + m);
  out.lambda_diag.head(n).setConstant(l1);
  out.lambda_diag.tail(m).setConstant(l2);
  return out;
}

bool verdict(const Matrix& M, double& min_eig) {
  min_eig = min_eigenvalue(M);
  return min_eig > kFeasibilityMargin * M.norm();
}

}  // namespace

double mu_feasibility_threshold(double m_f, double L_f, double sigma_max) {
  if (!(m_f > 0.0) || !(sigma_max > 0.0))
    throw ParameterError("m_f and sigma_max must be positive");
  if (L_f <= m_f)
    throw UnsupportedRegimeError("mu_feasibility_threshold requires L_f > m_f");
  const double s2 = sigma_max * sigma_max;
  const double branch2 =
      s2 / (8.0 * m_f) * (1.0 + std::sqrt(1.0 + 16.0 * m_f * m_f / s2));
  return std::max((L_f - m_f) / 4.0, branch2);
}

double rho0(double mu, double m_f, double sigma_min, double sigma_max) {
  if (!(mu > 0.0) || !(m_f > 0.0) || !(sigma_min > 0.0) || !(sigma_max > 0.0))
    throw ParameterError("rho0 arguments must be positive");
  return sigma_min * sigma_min /
         (2.0 * (mu + m_f + sigma_max * sigma_max / mu));
}

double beta(double mu, double m_f, double sigma_min, double sigma_max) {
  const double r0 = rho0(mu, m_f, sigma_min, sigma_max);
  return (m_f + mu) * sigma_max * sigma_max / (2.0 * mu * mu) +
         2.0 * r0 * (mu + 4.0 * r0) / mu;
}

double mu_hat(double m_f, double sigma_min, double sigma_max) {
  if (!(m_f > 0.0) || !(sigma_min > 0.0) || !(sigma_max > 0.0))
    throw ParameterError("mu_hat arguments must be positive");
  const double target = 2.0 * m_f;
  if (beta(sigma_max, m_f, sigma_min, sigma_max) <= target) return sigma_max;
  double lo = sigma_max;
  double hi = sigma_max;
  do {
    hi *= 2.0;
  } while (beta(hi, m_f, sigma_min, sigma_max) >= target);
  while (hi - lo > kMuHatTol) {
    const double mid = 0.5 * (lo + hi);
    if (beta(mid, m_f, sigma_min, sigma_max) < target)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

Matrix lyapunov_matrix(const CompositeProblem& p, double alpha) {
  if (!(alpha > 0.0)) throw ParameterError("alpha must be positive");
  const Eigen::Index n = p.primal_dim();
  const Eigen::Index m = p.dual_dim();
  const double mu = p.mu;
  Matrix P(n + m, n + m);
  P.topLeftCorner(n, n) = Matrix::Identity(n, n);
  P.topRightCorner(n, m) = p.T.transpose() / mu;
  P.bottomLeftCorner(m, n) = p.T / mu;
  P.bottomRightCorner(m, m) = (1.0 + p.f.m_f / mu) * Matrix::Identity(m, m) +
                              p.T * p.T.transpose() / (mu * mu);
  return alpha * P;
}

double lyapunov_identity_gap(const CompositeProblem& p, double alpha) {
  const Eigen::Index n = p.primal_dim();
  const Eigen::Index m = p.dual_dim();
  const Matrix A = system_matrices(p).A;
  const Matrix P = lyapunov_matrix(p, alpha);
  Matrix D = Matrix::Zero(n + m, n + m);
  D.topLeftCorner(n, n) = p.f.m_f * Matrix::Identity(n, n);
  D.bottomRightCorner(m, m) = p.T * p.T.transpose() / p.mu;
  return (A.transpose() * P + P * A + 2.0 * alpha * D).norm();
}

Matrix lmi_matrix(const CompositeProblem& p, double rho, double alpha,
                  double lambda1, double lambda2) {
  require_multipliers(rho, alpha, lambda1, lambda2);
  const LmiBlocks blocks = lmi_blocks(p, rho, alpha, lambda1, lambda2);
  const Eigen::Index d = blocks.S.rows();
  Matrix M(2 * d, 2 * d);
  M.topLeftCorner(d, d) = blocks.S;
  M.topRightCorner(d, d) = blocks.R;
  M.bottomLeftCorner(d, d) = blocks.R.transpose();
  M.bottomRightCorner(d, d) = (2.0 * blocks.lambda_diag).asDiagonal();
  return 0.5 * (M + M.transpose());
}

Matrix lmi_schur_reduced(const CompositeProblem& p, double rho, double alpha,
                         double lambda1, double lambda2) {
  require_multipliers(rho, alpha, lambda1, lambda2);
  const LmiBlocks blocks = lmi_blocks(p, rho, alpha, lambda1, lambda2);
  const Matrix M = blocks.S - 0.5 * blocks.R *
                                  blocks.lambda_diag.cwiseInverse().asDiagonal() *
                                  blocks.R.transpose();
  return 0.5 * (M + M.transpose());
}

LmiReport lmi_feasible(const CompositeProblem& p, double rho, double alpha,
                       double lambda1, double lambda2) {
  LmiReport report;
  report.rho = rho;
  report.alpha = alpha;
  report.lambda1 = lambda1;
  report.lambda2 = lambda2;
  report.matrix = lmi_matrix(p, rho, alpha, lambda1, lambda2);
  report.feasible = verdict(report.matrix, report.min_eig);

  // Cross-check against the Schur-reduced condition; the two forms are
  // equivalent, so a decisive disagreement means the assembly is broken.
  const Matrix schur = lmi_schur_reduced(p, rho, alpha, lambda1, lambda2);
  double schur_min = 0.0;
  const bool schur_ok = verdict(schur, schur_min);
  if (schur_ok != report.feasible) {
    const bool decisive =
        std::abs(report.min_eig) > 10.0 * kFeasibilityMargin * report.matrix.norm() &&
        std::abs(schur_min) > 10.0 * kFeasibilityMargin * schur.norm();
    if (decisive)
      throw CertificateError(
          "full LMI and Schur-reduced feasibility verdicts disagree");
  }
  return report;
}

LmiReport lmi_feasible(const CompositeProblem& p, double rho) {
  const Multipliers m = default_multipliers(p);
  return lmi_feasible(p, rho, m.alpha, m.lambda1, m.lambda2);
}

RateCertificate certificate(const CompositeProblem& p) {
  const double lhat = lhat1_or_throw(p);
  const SingularExtremes sigma = singular_extremes(p.T);
  RateCertificate cert;
  cert.mu = p.mu;
  cert.mu_feasibility_threshold = mu_feasibility_threshold(p.f.m_f, p.f.L_f, sigma.sigma_max);
  cert.rho0 = rho0(p.mu, p.f.m_f, sigma.sigma_min, sigma.sigma_max);
  cert.beta_at_mu = beta(p.mu, p.f.m_f, sigma.sigma_min, sigma.sigma_max);
  cert.mu_hat = mu_hat(p.f.m_f, sigma.sigma_min, sigma.sigma_max);
  cert.valid = p.mu > std::max(lhat, cert.mu_hat);
  const SymEigResult eig = sym_eig(lyapunov_matrix(p, 1.0));
  cert.kappa_p = eig.eigenvalues(eig.eigenvalues.size() - 1) / eig.eigenvalues(0);
  return cert;
}

double certified_rate_bisect(const CompositeProblem& p) {
  const auto feasible = [&p](double rho) { return lmi_feasible(p, rho).feasible; };
  if (!feasible(0.0))
    throw CertificateError("LMI infeasible at rho = 0; no rate can be certified");

  const SingularExtremes sigma = singular_extremes(p.T);
  double lo = 0.0;
  double hi = std::max(rho0(p.mu, p.f.m_f, sigma.sigma_min, sigma.sigma_max),
                       kBisectTol);
  while (feasible(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12)
      throw CertificateError("certified rate does not saturate; LMI stays "
                             "feasible for unbounded rho");
  }
  while (hi - lo > kBisectTol) {
    const double mid = 0.5 * (lo + hi);
    if (feasible(mid))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace palflow
