#include "palflow/integrate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>

namespace palflow {

namespace {

// Dormand-Prince 5(4): the classical 7-stage FSAL tableau used by ode45.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// Difference between the 5th and 4th order weights.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

// 4th-order dense-output polynomial coefficients (ode45's interpolant):
// y(t0 + theta h) = y0 + h sum_i k_i (c1 theta + c2 theta^2 + ...).
constexpr double kDense[7][4] = {
    {1.0, -183.0 / 64, 37.0 / 12, -145.0 / 128},
    {0.0, 0.0, 0.0, 0.0},
    {0.0, 1500.0 / 371, -1000.0 / 159, 1000.0 / 371},
    {0.0, -125.0 / 32, 125.0 / 12, -375.0 / 64},
    {0.0, 9477.0 / 3392, -729.0 / 106, 25515.0 / 6784},
    {0.0, -11.0 / 7, 11.0 / 3, -55.0 / 28},
    {0.0, 3.0 / 2, -4.0, 5.0 / 2}};

constexpr double kSafety = 0.9;
constexpr double kFacMin = 0.2;
constexpr double kFacMax = 5.0;
constexpr double kAlpha = 0.7 / 5.0;  // PI exponents
constexpr double kBeta = 0.4 / 5.0;

using Stages = std::array<Vector, 7>;

struct StepRecord {
  double t0;
  double h;
  const Vector& y0;
  const Vector& y1;
  const Stages& k;
};

// Thrown internally when the step budget runs out; drivers convert it into
// NonconvergenceError with whatever trajectory they collected.
struct StepLimitReached {
  double t;
  Vector y;
};

Vector dense_eval(const Vector& y0, double h, const Stages& k, double theta) {
  Vector acc = Vector::Zero(y0.size());
  for (int i = 0; i < 7; ++i) {
    const double bi =
        theta * (kDense[i][0] +
                 theta * (kDense[i][1] +
                          theta * (kDense[i][2] + theta * kDense[i][3])));
    if (bi != 0.0) acc += bi * k[i];
  }
  return y0 + h * acc;
}

double scaled_rms(const Vector& v, const Vector& scale) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double q = v(i) / scale(i);
    acc += q * q;
  }
  return std::sqrt(acc / static_cast<double>(v.size()));
}

double initial_step(const std::function<Vector(const Vector&)>& rhs,
                    const Vector& y0, const Vector& f0,
                    const IntegratorConfig& cfg, double h_max) {
  Vector scale(y0.size());
  for (Eigen::Index i = 0; i < y0.size(); ++i)
    scale(i) = cfg.abs_tol + cfg.rel_tol * std::abs(y0(i));
  const double d0 = scaled_rms(y0, scale);
  const double d1 = scaled_rms(f0, scale);
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min(h0, h_max);
  const Vector f1 = rhs(y0 + h0 * f0);
  const double d2 = scaled_rms(f1 - f0, scale) / h0;
  const double d_max = std::max(d1, d2);
  const double h1 = d_max <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                   : std::pow(0.01 / d_max, 0.2);
  return std::min({100.0 * h0, h1, h_max});
}

// Adaptive driver on [0, horizon]. on_accept may stop the run early; the
// return value is the last accepted (t, y).
std::pair<double, Vector> run_dopri5(
    const std::function<Vector(const Vector&)>& rhs, Vector y, double horizon,
    const IntegratorConfig& cfg,
    const std::function<bool(const StepRecord&)>& on_accept) {
  const double h_max = cfg.max_step > 0.0 ? cfg.max_step : 0.1 * horizon;
  Stages k;
  k[0] = rhs(y);
  if (!k[0].allFinite()) throw DivergenceError("vector field is not finite at w0");

  double t = 0.0;
  double h = initial_step(rhs, y, k[0], cfg, h_max);
  double err_old = 1e-4;
  double fac_max = kFacMax;
  long attempts = 0;

  while (t < horizon * (1.0 - 1e-14)) {
    if (++attempts > cfg.max_steps) throw StepLimitReached{t, y};
    h = std::min(h, horizon - t);
    if (h < 1e-14 * std::max(1.0, std::abs(t)))
      throw NonconvergenceError("integration step size underflow", {});

    k[1] = rhs(y + h * (a21 * k[0]));
    k[2] = rhs(y + h * (a31 * k[0] + a32 * k[1]));
    k[3] = rhs(y + h * (a41 * k[0] + a42 * k[1] + a43 * k[2]));
    k[4] = rhs(y + h * (a51 * k[0] + a52 * k[1] + a53 * k[2] + a54 * k[3]));
    k[5] = rhs(y + h * (a61 * k[0] + a62 * k[1] + a63 * k[2] + a64 * k[3] +
                        a65 * k[4]));
    const Vector y_new =
        y + h * (b1 * k[0] + b3 * k[2] + b4 * k[3] + b5 * k[4] + b6 * k[5]);
    k[6] = rhs(y_new);
    if (!y_new.allFinite() || !k[6].allFinite())
      throw DivergenceError("vector field diverged during integration");

    const Vector err_vec = h * (e1 * k[0] + e3 * k[2] + e4 * k[3] +
                                e5 * k[4] + e6 * k[5] + e7 * k[6]);
    Vector scale(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i)
      scale(i) = cfg.abs_tol +
                 cfg.rel_tol * std::max(std::abs(y(i)), std::abs(y_new(i)));
    const double err = scaled_rms(err_vec, scale);

    if (err <= 1.0) {
      const double t0 = t;
      const bool stop = on_accept({t0, h, y, y_new, k});
      // Directional stiffness estimate from quantities already at hand; the
      // returned cap keeps the discrete map contractive, so approaches to an
      // equilibrium decay to roundoff instead of hovering at the tolerance.
      const double dy_norm = (y_new - y).norm();
      const double df_norm = (k[6] - k[0]).norm();
      double h_stable = h_max;
      if (dy_norm > 1e-300 && df_norm > 0.0)
        h_stable = 2.0 * dy_norm / df_norm;
      t += h;
      y = y_new;
      k[0] = k[6];  // FSAL
      const double err_cl = std::max(err, 1e-10);
      double fac = kSafety * std::pow(err_cl, -kAlpha) * std::pow(err_old, kBeta);
      fac = std::clamp(fac, kFacMin, fac_max);
      h = std::min({h * fac, h_max, h_stable});
      err_old = std::max(err, 1e-4);
      fac_max = kFacMax;
      if (stop) break;
    } else {
      const double fac = std::clamp(kSafety * std::pow(err, -0.2), kFacMin, 0.9);
      h *= fac;
      fac_max = 1.0;  // no growth right after a rejection
    }
  }
  return {t, std::move(y)};
}

void validate_samples(const std::vector<double>& samples, double t_end) {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i] < 0.0 || samples[i] > t_end)
      throw ParameterError("sample times must lie inside [0, t_end]");
    if (i > 0 && samples[i] <= samples[i - 1])
      throw ParameterError("sample times must be strictly increasing");
  }
}

}  // namespace

Trajectory integrate_to_time(const CompositeProblem& p, const PrimalDualState& w0,
                             double t_end, const IntegratorConfig& cfg,
                             const std::vector<double>& sample_times,
                             const std::optional<PrimalDualState>& reference) {
  if (t_end < 0.0) throw ParameterError("t_end must be nonnegative");
  if (w0.x.size() != p.primal_dim() || w0.y.size() != p.dual_dim())
    throw StructuralError("initial state does not match the problem");
  validate_samples(sample_times, t_end);

  const Eigen::Index n = p.primal_dim();
  const Eigen::Index m = p.dual_dim();
  const Vector ref = reference ? stack(*reference) : Vector();

  Trajectory traj;
  auto push = [&](double t, const Vector& w) {
    traj.times.push_back(t);
    traj.states.push_back(unstack(w, n, m));
    if (reference) traj.distances.push_back((w - ref).norm());
  };

  const Vector y0 = stack(w0);
  if (t_end == 0.0) {
    if (sample_times.empty())
      push(0.0, y0);
    else
      for (double s : sample_times) push(s, y0);  // all are 0 by validation
    return traj;
  }

  std::size_t next = 0;
  const bool step_mode = sample_times.empty();
  if (step_mode) push(0.0, y0);

  auto rhs = [&p](const Vector& w) { return flow_field(p, w); };
  auto on_accept = [&](const StepRecord& s) {
    const double t1 = s.t0 + s.h;
    while (next < sample_times.size() &&
           sample_times[next] <= t1 + 1e-14 * std::max(1.0, t1)) {
      const double theta = (sample_times[next] - s.t0) / s.h;
      if (theta >= 1.0 - 1e-13)
        push(sample_times[next], s.y1);
      else
        push(sample_times[next], dense_eval(s.y0, s.h, s.k, theta));
      ++next;
    }
    if (step_mode) push(t1, s.y1);
    return !step_mode && next == sample_times.size();
  };

  try {
    run_dopri5(rhs, y0, t_end, cfg, on_accept);
  } catch (const StepLimitReached&) {
    throw NonconvergenceError("step budget exhausted before t_end", std::move(traj));
  }
  return traj;
}

EquilibriumResult integrate_to_equilibrium(const CompositeProblem& p,
                                           const PrimalDualState& w0,
                                           const IntegratorConfig& cfg,
                                           double stop_tol, double t_max) {
  if (!(stop_tol > 0.0)) throw ParameterError("stop_tol must be positive");
  if (w0.x.size() != p.primal_dim() || w0.y.size() != p.dual_dim())
    throw StructuralError("initial state does not match the problem");

  const Vector y0 = stack(w0);
  if (flow_field(p, y0).norm() <= stop_tol)
    return {w0, 0.0};

  auto rhs = [&p](const Vector& w) { return flow_field(p, w); };
  bool converged = false;
  auto on_accept = [&](const StepRecord& s) {
    // k[6] is F at the step end (FSAL stage).
    converged = s.k[6].norm() <= stop_tol;
    return converged;
  };

  try {
    auto [t, y] = run_dopri5(rhs, y0, t_max, cfg, on_accept);
    if (!converged)
      throw NonconvergenceError("flow did not reach the equilibrium tolerance "
                                "within the time horizon", {});
    return {unstack(y, p.primal_dim(), p.dual_dim()), t};
  } catch (const StepLimitReached&) {
    throw NonconvergenceError("step budget exhausted before equilibrium", {});
  }
}

}  // namespace palflow
