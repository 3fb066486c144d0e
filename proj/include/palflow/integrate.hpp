#pragma once

#include <optional>
#include <vector>

#include "palflow/flow.hpp"

namespace palflow {

struct IntegratorConfig {
  double rel_tol = 1e-9;
  double abs_tol = 1e-9;
  double max_step = 0.0;  ///< 0 means one tenth of the time horizon
  long max_steps = 10'000'000;
};

struct Trajectory {
  std::vector<double> times;  ///< strictly increasing
  std::vector<PrimalDualState> states;
  std::vector<double> distances;  ///< ||w(t) - w_ref||; empty without a reference
};

/// Integration gave up before reaching its goal; carries what was produced.
struct NonconvergenceError : Error {
  NonconvergenceError(const std::string& msg, Trajectory t)
      : Error(msg), partial(std::move(t)) {}
  Trajectory partial;
};

/// The vector field produced a NaN or Inf.
struct DivergenceError : Error {
  using Error::Error;
};

/// Integrates wdot = F(w) over [0, t_end] with the Dormand-Prince 5(4)
/// embedded pair and PI step control. States at `sample_times` (ascending,
/// inside [0, t_end]) come from the 4th-order dense interpolant; with an
/// empty sample list the accepted step points are returned. Distances to
/// `reference` fill Trajectory::distances when it is given.
Trajectory integrate_to_time(const CompositeProblem& p, const PrimalDualState& w0,
                             double t_end, const IntegratorConfig& cfg,
                             const std::vector<double>& sample_times,
                             const std::optional<PrimalDualState>& reference = {});

struct EquilibriumResult {
  PrimalDualState w_bar;
  double elapsed;
};

/// Runs the flow until ||F(w)|| <= stop_tol, capped at time t_max.
EquilibriumResult integrate_to_equilibrium(const CompositeProblem& p,
                                           const PrimalDualState& w0,
                                           const IntegratorConfig& cfg,
                                           double stop_tol = 1e-10,
                                           double t_max = 1e6);

}  // namespace palflow
