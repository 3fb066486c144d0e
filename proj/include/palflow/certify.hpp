#pragma once

#include "palflow/flow.hpp"

namespace palflow {

/// Exponential-stability certificate for one value of mu.
struct RateCertificate {
  double mu;
  double mu_feasibility_threshold;  ///< mu above this makes the rho = 0 LMI feasible
  double rho0;                ///< closed-form certified decay rate
  double beta_at_mu;
  double mu_hat;  ///< smallest mu >= sigma_max with beta(mu) < 2 m_f
  bool valid;     ///< mu > max(L_f - m_f, mu_hat)
  double kappa_p; ///< condition number of the Lyapunov matrix
};

/// Assembled stability LMI and its feasibility verdict at one rate rho.
struct LmiReport {
  double rho;
  double lambda1;
  double lambda2;
  double alpha;
  Matrix matrix;   ///< symmetric, 2(n+m) square
  double min_eig;
  bool feasible;   ///< min_eig > 1e-9 ||matrix||_F
};

/// Penalty threshold of the mu condition
///   mu > max((L_f - m_f)/4, sigma_max^2/(8 m_f) (1 + sqrt(1 + 16 m_f^2/sigma_max^2))).
double mu_feasibility_threshold(double m_f, double L_f, double sigma_max);

/// Worst-case decay rate sigma_min^2 / (2 (mu + m_f + sigma_max^2 / mu)).
double rho0(double mu, double m_f, double sigma_min, double sigma_max);

/// beta(mu) = (m_f + mu) sigma_max^2 / (2 mu^2) + 2 rho0 (mu + 4 rho0) / mu.
double beta(double mu, double m_f, double sigma_min, double sigma_max);

/// Smallest mu in [sigma_max, inf) with beta(mu) < 2 m_f; beta decreases
/// monotonically to zero there, so bisection converges (tolerance 1e-12).
double mu_hat(double m_f, double sigma_min, double sigma_max);

/// Full certificate for a problem instance; requires L_f > m_f.
RateCertificate certificate(const CompositeProblem& p);

/// Lyapunov matrix alpha [I, T^T/mu; T/mu, (1 + m_f/mu) I + T T^T/mu^2].
Matrix lyapunov_matrix(const CompositeProblem& p, double alpha);

/// Frobenius norm of A^T P + P A + 2 alpha blkdiag(m_f I, T T^T / mu);
/// the identity is exact, so the gap is pure roundoff.
double lyapunov_identity_gap(const CompositeProblem& p, double alpha);

/// Stability LMI
///   [ -(A^T P + P A + 2 rho P),  -(P B + C^T Pi0);
///     -(P B + C^T Pi0)^T,         2 Lambda        ]
/// with Pi0 = blkdiag(lambda1 (L_f - m_f) I, lambda2 I) and
/// Lambda = blkdiag(lambda1 I, lambda2 I).
Matrix lmi_matrix(const CompositeProblem& p, double rho, double alpha,
                  double lambda1, double lambda2);

/// Schur complement of the 2 Lambda block in the LMI above; positive
/// definiteness of either form is equivalent.
Matrix lmi_schur_reduced(const CompositeProblem& p, double rho, double alpha,
                         double lambda1, double lambda2);

LmiReport lmi_feasible(const CompositeProblem& p, double rho, double alpha,
                       double lambda1, double lambda2);

/// Same with the constructive multiplier choices lambda1 = alpha/(L_f - m_f),
/// lambda2 = (alpha/mu)(1 + m_f/mu) and alpha = 1.
LmiReport lmi_feasible(const CompositeProblem& p, double rho);

/// Largest rho whose LMI is feasible under the default multipliers,
/// bisected to 1e-9. Never below rho0 - 1e-9 on valid instances.
double certified_rate_bisect(const CompositeProblem& p);

}  // namespace palflow
