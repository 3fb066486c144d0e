#include "palflow/experiments.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <future>
#include <limits>

#include "palflow/io.hpp"
#include "palflow/rng.hpp"

namespace palflow {

namespace {

constexpr double kOracleTol = 1e-9;
constexpr double kDistanceFloor = 1e-12;
constexpr double kFitCutoff = 1e-10;

std::string mu_tag(double mu) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", mu);
  return buf;
}

std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    out[static_cast<std::size_t>(i)] =
        lo + (hi - lo) * static_cast<double>(i) / (count - 1);
  out.back() = hi;
  return out;
}

}  // namespace

QpData generate_qp(std::uint64_t seed, int n, int m) {
  if (n < 1 || m < 1) throw ParameterError("generate_qp: n and m must be >= 1");
  if (m > n)
    throw ParameterError("generate_qp: m > n cannot give a full-row-rank T");
  Rng rng(seed);
  // Draw order (fixed for reproducibility): H row by row, then the diagonal
  // exponents of K, then q.
  const Matrix H = normal_matrix(rng, n, n);
  Vector k_diag(n);
  for (int i = 0; i < n; ++i) k_diag(i) = std::exp(rng.normal());
  QpData data;
  data.Q = H * H.transpose();
  data.Q += Matrix(k_diag.asDiagonal());
  data.q = 10.0 * normal_vector(rng, n);
  data.T = Matrix::Identity(m, n);
  data.b = Vector::Ones(m);
  return data;
}

Matrix rescale_spectrum(const Matrix& Q, double m_target, double L_target) {
  if (!(m_target > 0.0) || L_target < m_target)
    throw ParameterError("rescale_spectrum: need 0 < m_target <= L_target");
  const SymEigResult eig = sym_eig(Q);
  const double lo = eig.eigenvalues(0);
  const double hi = eig.eigenvalues(eig.eigenvalues.size() - 1);
  if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi)))
    return 0.5 * (m_target + L_target) *
           Matrix::Identity(Q.rows(), Q.cols());
  const double a = (L_target - m_target) / (hi - lo);
  return a * Q + (m_target - a * lo) * Matrix::Identity(Q.rows(), Q.cols());
}

OracleSolution active_set_oracle(const CompositeProblem& p) {
  if (p.g.kind != ProxFunction::Kind::InequalityIndicator)
    throw StructuralError("active_set_oracle needs an inequality-indicator g");
  if (p.f.kind != SmoothFunction::Kind::Quadratic)
    throw StructuralError("active_set_oracle needs a quadratic f");
  const Eigen::Index n = p.primal_dim();
  const Eigen::Index m = p.dual_dim();
  if (m > 20) throw SizeError("active_set_oracle: 2^m enumeration needs m <= 20");

  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    const int k = std::popcount(mask);
    Matrix kkt = Matrix::Zero(n + k, n + k);
    Vector rhs(n + k);
    kkt.topLeftCorner(n, n) = p.f.Q;
    rhs.head(n) = -p.f.q;
    int row = 0;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (!(mask & (1u << i))) continue;
      kkt.block(n + row, 0, 1, n) = p.T.row(i);
      kkt.block(0, n + row, n, 1) = p.T.row(i).transpose();
      rhs(n + row) = p.g.b(i);
      ++row;
    }
    Vector sol;
    try {
      sol = solve_linear(kkt, rhs);
    } catch (const SingularityError&) {
      continue;  // linearly dependent active rows
    }
    const Vector x = sol.head(n);
    Vector y = Vector::Zero(m);
    row = 0;
    for (Eigen::Index i = 0; i < m; ++i)
      if (mask & (1u << i)) y(i) = sol(n + row++);
    if (((p.T * x - p.g.b).array() > kOracleTol).any()) continue;
    if ((y.array() < -kOracleTol).any()) continue;
    return {x, y, p.T * x};
  }
  throw InfeasibilityError("active_set_oracle: no active set satisfies the KKT system");
}

FitResult fit_decay_rate(const Trajectory& traj) {
  if (traj.distances.size() != traj.times.size() || traj.times.empty())
    throw StructuralError("fit_decay_rate needs a trajectory with distances");
  std::size_t above_floor = 0;
  for (double d : traj.distances)
    if (d > kDistanceFloor) ++above_floor;
  if (above_floor < 10)
    throw DegenerateFitError(
        "fit_decay_rate: fewer than 10 samples above the distance floor");

  const double horizon = traj.times.back();
  const double t_lo = 0.1 * horizon;
  double t_hi = 0.9 * horizon;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    if (traj.distances[i] < kFitCutoff) {
      t_hi = std::min(t_hi, traj.times[i]);
      break;
    }
  }

  double sum_t = 0, sum_l = 0, sum_tt = 0, sum_tl = 0;
  std::size_t count = 0;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const double t = traj.times[i];
    const double d = traj.distances[i];
    if (t < t_lo - 1e-12 || t > t_hi + 1e-12 || !(d > 0.0)) continue;
    const double l = std::log(d);
    pts.emplace_back(t, l);
    sum_t += t;
    sum_l += l;
    sum_tt += t * t;
    sum_tl += t * l;
    ++count;
  }
  if (count < 2)
    throw DegenerateFitError("fit_decay_rate: window holds fewer than 2 samples");

  const double nc = static_cast<double>(count);
  const double denom = nc * sum_tt - sum_t * sum_t;
  const double slope = (nc * sum_tl - sum_t * sum_l) / denom;
  const double intercept = (sum_l - slope * sum_t) / nc;

  const double mean_l = sum_l / nc;
  double ss_tot = 0, ss_res = 0;
  for (const auto& [t, l] : pts) {
    ss_tot += (l - mean_l) * (l - mean_l);
    const double resid = l - (intercept + slope * t);
    ss_res += resid * resid;
  }
  const double r2 =
      ss_tot <= 1e-30 ? 1.0 : std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0);
  return {-slope, intercept, r2, t_lo, t_hi};
}

std::filesystem::path resolve_output_dir(const std::string& configured) {
  const char* env = std::getenv("PALFLOW_OUT");
  return (env != nullptr && *env != '\0') ? std::filesystem::path(env)
                                          : std::filesystem::path(configured);
}

CompositeProblem build_family_instance(const ExperimentConfig& cfg, double mu) {
  if (cfg.problem_family == ProblemFamily::QpBox) {
    QpData data = generate_qp(cfg.seed, cfg.n, cfg.m);
    if (cfg.spectrum)
      data.Q = rescale_spectrum(data.Q, cfg.spectrum->m_f, cfg.spectrum->L_f);
    return make_problem(make_quadratic(std::move(data.Q), std::move(data.q)),
                        make_inequality_indicator(std::move(data.b)),
                        std::move(data.T), mu);
  }
  if (cfg.m != cfg.n)
    throw ParameterError("logistic-elastic family uses T = I and needs m == n");
  const int d = cfg.feature_count > 0 ? cfg.feature_count : 2 * cfg.n;
  Rng rng(cfg.seed);
  const Matrix features = normal_matrix(rng, d, cfg.n);
  Eigen::VectorXi labels(d);
  for (int i = 0; i < d; ++i) labels(i) = rng.uniform01() < 0.5 ? 1 : 0;
  return make_problem(make_logistic_elastic(features, labels), make_l1(1.0),
                      Matrix::Identity(cfg.n, cfg.n), mu);
}

namespace {

struct SimulationRun {
  double mu = 0.0;
  std::string csv_name;
  double rho0_formula = std::numeric_limits<double>::quiet_NaN();
  std::optional<RateCertificate> cert;
  std::string cert_error;
  std::optional<FitResult> fit;
  std::string fit_error;
  double oracle_dx = std::numeric_limits<double>::quiet_NaN();
  double oracle_dy = std::numeric_limits<double>::quiet_NaN();
};

SimulationRun simulate_one(const ExperimentConfig& cfg, double mu,
                           const std::filesystem::path& outdir) {
  const CompositeProblem p = build_family_instance(cfg, mu);
  const PrimalDualState w0{Vector::Zero(p.primal_dim()),
                           Vector::Zero(p.dual_dim())};

  SimulationRun run;
  run.mu = mu;

  const bool has_oracle = p.g.kind == ProxFunction::Kind::InequalityIndicator &&
                          p.f.kind == SmoothFunction::Kind::Quadratic &&
                          p.dual_dim() <= 20;
  PrimalDualState reference{Vector(), Vector()};
  if (has_oracle) {
    const OracleSolution sol = active_set_oracle(p);
    reference = {sol.x, sol.y};
    const EquilibriumResult eq =
        integrate_to_equilibrium(p, w0, cfg.integrator, 1e-10);
    run.oracle_dx = (eq.w_bar.x - sol.x).norm();
    run.oracle_dy = (eq.w_bar.y - sol.y).norm();
  } else {
    reference = integrate_to_equilibrium(p, w0, cfg.integrator, 1e-10).w_bar;
  }

  const Trajectory traj =
      integrate_to_time(p, w0, cfg.t_end, cfg.integrator,
                        linspace(0.0, cfg.t_end, cfg.sample_count), reference);
  run.csv_name = "traj_mu_" + mu_tag(mu) + ".csv";
  write_trajectory_csv(outdir / run.csv_name, traj);

  const SingularExtremes sigma = singular_extremes(p.T);
  run.rho0_formula = rho0(mu, p.f.m_f, sigma.sigma_min, sigma.sigma_max);
  try {
    run.cert = certificate(p);
  } catch (const UnsupportedRegimeError& e) {
    run.cert_error = e.what();
  }
  try {
    run.fit = fit_decay_rate(traj);
  } catch (const DegenerateFitError& e) {
    run.fit_error = e.what();
  }
  return run;
}

void write_certificate_rows(
    std::ostream& os, const std::vector<double>& mu_grid,
    const std::function<CompositeProblem(double)>& builder) {
  const char* nan = "nan";
  os << "mu,threshold15,mu_hat,rho0,lmi_rate,kappa_p,valid,error\n";
  for (double mu : mu_grid) {
    try {
      const CompositeProblem p = builder(mu);
      const RateCertificate cert = certificate(p);
      std::string lmi_rate = nan;
      std::string error;
      try {
        lmi_rate = fmt17(certified_rate_bisect(p));
      } catch (const CertificateError& e) {
        error = e.what();
      }
      os << fmt17(mu) << ',' << fmt17(cert.mu_feasibility_threshold) << ','
         << fmt17(cert.mu_hat) << ',' << fmt17(cert.rho0) << ',' << lmi_rate
         << ',' << fmt17(cert.kappa_p) << ','
         << (cert.valid ? "true" : "false") << ',' << error << "\n";
    } catch (const Error& e) {
      os << fmt17(mu) << ',' << nan << ',' << nan << ',' << nan << ',' << nan
         << ',' << nan << ",false," << e.what() << "\n";
    }
  }
}

Json instance_metadata(const ExperimentConfig& cfg) {
  const CompositeProblem p = build_family_instance(cfg, cfg.mu_values.empty()
                                                            ? 1.0
                                                            : cfg.mu_values[0]);
  const SingularExtremes sigma = singular_extremes(p.T);
  return {{"family", cfg.problem_family == ProblemFamily::QpBox
                         ? "qp-box"
                         : "logistic-elastic"},
          {"n", p.primal_dim()},
          {"m", p.dual_dim()},
          {"m_f", p.f.m_f},
          {"L_f", p.f.L_f},
          {"sigma_min", sigma.sigma_min},
          {"sigma_max", sigma.sigma_max}};
}

}  // namespace

void run_simulate(const ExperimentConfig& cfg) {
  if (cfg.sample_count < 2)
    throw ParameterError("run_simulate: sample_count must be at least 2");
  const std::filesystem::path outdir = resolve_output_dir(cfg.output_dir);
  std::filesystem::create_directories(outdir);

  std::vector<std::future<SimulationRun>> futures;
  futures.reserve(cfg.mu_values.size());
  for (double mu : cfg.mu_values)
    futures.push_back(std::async(std::launch::async, simulate_one, cfg, mu, outdir));

  Json runs = Json::array();
  std::ofstream rates(outdir / "rates.csv");
  if (!rates) throw IoError("cannot open for writing: " + (outdir / "rates.csv").string());
  rates << "mu,rho0,fitted_rate\n";
  for (auto& future : futures) {
    const SimulationRun run = future.get();
    Json row = {{"mu", run.mu},
                {"trajectory_csv", run.csv_name},
                {"rho0", run.rho0_formula}};
    row["certificate"] = run.cert ? certificate_to_json(*run.cert) : Json();
    if (!run.cert_error.empty()) row["certificate_error"] = run.cert_error;
    if (run.fit) {
      row["fit"] = {{"rate", run.fit->rate},
                    {"intercept", run.fit->intercept},
                    {"r_squared", run.fit->r_squared},
                    {"window", {run.fit->t_lo, run.fit->t_hi}}};
    } else {
      row["fit"] = Json();
      row["fit_error"] = run.fit_error;
    }
    if (std::isfinite(run.oracle_dx)) {
      row["oracle_dx"] = run.oracle_dx;
      row["oracle_dy"] = run.oracle_dy;
    }
    runs.push_back(std::move(row));
    rates << fmt17(run.mu) << ',' << fmt17(run.rho0_formula) << ','
          << fmt17(run.fit ? run.fit->rate
                           : std::numeric_limits<double>::quiet_NaN())
          << "\n";
  }

  Json summary = {{"config", config_to_json(cfg)},
                  {"rng", "xoshiro256++ seeded via splitmix64, Box-Muller normals"},
                  {"instance", instance_metadata(cfg)},
                  {"runs", std::move(runs)}};
  std::ofstream out(outdir / "summary.json");
  if (!out) throw IoError("cannot open for writing: " + (outdir / "summary.json").string());
  out << summary.dump(2) << "\n";
}

void run_certify(const CompositeProblem& p, const std::vector<double>& mu_grid,
                 const std::filesystem::path& csv_path) {
  std::ofstream out(csv_path);
  if (!out) throw IoError("cannot open for writing: " + csv_path.string());
  write_certificate_rows(out, mu_grid, [&p](double mu) {
    return make_problem(p.f, p.g, p.T, mu);
  });
  if (!out) throw IoError("write failed: " + csv_path.string());
}

void run_sweep(const ExperimentConfig& cfg,
               const std::optional<std::string>& compare_csv, bool emit_gnuplot) {
  const std::filesystem::path outdir = resolve_output_dir(cfg.output_dir);
  std::filesystem::create_directories(outdir);
  const std::filesystem::path csv_path = outdir / "sweep.csv";
  std::ofstream out(csv_path);
  if (!out) throw IoError("cannot open for writing: " + csv_path.string());
  write_certificate_rows(out, cfg.mu_values, [&cfg](double mu) {
    return build_family_instance(cfg, mu);
  });
  if (!out) throw IoError("write failed: " + csv_path.string());

  if (emit_gnuplot) {
    std::ofstream gp(outdir / "rates.gp");
    if (!gp) throw IoError("cannot open for writing: " + (outdir / "rates.gp").string());
    gp << "set datafile separator ','\n"
       << "set xlabel 'mu'\n"
       << "set ylabel 'rate'\n"
       << "set key top right\n"
       << "plot 'sweep.csv' every ::1 using 1:4 with lines title 'rho0', \\\n"
       << "     'sweep.csv' every ::1 using 1:5 with lines title 'lmi rate'";
    if (compare_csv)
      gp << ", \\\n     '" << *compare_csv
         << "' every ::1 using 1:2 with linespoints title 'external'";
    gp << "\n";
  }
}

}  // namespace palflow
