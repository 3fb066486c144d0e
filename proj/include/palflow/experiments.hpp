#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "palflow/certify.hpp"
#include "palflow/integrate.hpp"

namespace palflow {

enum class ProblemFamily { QpBox, LogisticElastic };

/// Target extreme eigenvalues for the generated quadratic term.
struct SpectrumTarget {
  double m_f;
  double L_f;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  int n = 10;
  int m = 10;
  std::vector<double> mu_values;
  double t_end = 20.0;
  int sample_count = 200;
  ProblemFamily problem_family = ProblemFamily::QpBox;
  std::string output_dir = ".";
  std::optional<SpectrumTarget> spectrum;
  IntegratorConfig integrator;
  int feature_count = 0;  ///< logistic family; 0 means 2n
};

struct QpData {
  Matrix Q;
  Vector q;
  Matrix T;
  Vector b;
};

/// Random box-constrained QP: Q = H H^T + diag(exp(normals)) with H an
/// n x n standard-normal matrix, q = 10 normals, T the m x n leading
/// identity and b all ones. A seed pins the instance bit-exactly.
QpData generate_qp(std::uint64_t seed, int n, int m);

/// Affine map of the spectrum onto [m_target, L_target].
Matrix rescale_spectrum(const Matrix& Q, double m_target, double L_target);

struct OracleSolution {
  Vector x;
  Vector y;
  Vector z;
};

/// Independent reference for box-constrained QPs: enumerates all 2^m active
/// sets, solves each equality-KKT system and keeps the candidate that is
/// primal and dual feasible (tolerance 1e-9).
OracleSolution active_set_oracle(const CompositeProblem& p);

struct FitResult {
  double rate;       ///< positive decay exponent
  double intercept;  ///< fitted log-distance at t = 0
  double r_squared;
  double t_lo;
  double t_hi;
};

/// Least-squares line through (t, log distance) over the window
/// [0.1 T, min(0.9 T, first t with distance < 1e-10)].
FitResult fit_decay_rate(const Trajectory& traj);

struct DegenerateFitError : Error {
  using Error::Error;
};

struct SizeError : Error {
  using Error::Error;
};

struct InfeasibilityError : Error {
  using Error::Error;
};

/// The PALFLOW_OUT environment variable overrides the configured directory.
std::filesystem::path resolve_output_dir(const std::string& configured);

/// Instance of the configured family at one penalty value.
CompositeProblem build_family_instance(const ExperimentConfig& cfg, double mu);

/// Per-mu trajectories, decay fits and certificates; writes one trajectory
/// CSV per mu plus summary.json and rates.csv into the output directory.
void run_simulate(const ExperimentConfig& cfg);

/// Certificate table (mu, threshold15, mu_hat, rho0, lmi_rate, kappa_p,
/// valid, error) for a fixed problem over a mu grid.
void run_certify(const CompositeProblem& p, const std::vector<double>& mu_grid,
                 const std::filesystem::path& csv_path);

/// Same table for the configured random family, one row per configured mu;
/// optionally emits a gnuplot script that overlays externally supplied rates.
void run_sweep(const ExperimentConfig& cfg,
               const std::optional<std::string>& compare_csv, bool emit_gnuplot);

}  // namespace palflow
