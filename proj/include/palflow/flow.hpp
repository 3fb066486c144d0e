#pragma once

#include "palflow/problems.hpp"

namespace palflow {

/// Stacked primal-dual point w = (x, y).
struct PrimalDualState {
  Vector x;
  Vector y;
};

Vector stack(const PrimalDualState& w);
PrimalDualState unstack(const Vector& w, Eigen::Index n, Eigen::Index m);

/// The LTI part of the dynamics: wdot = A w + B u, xi = C w.
struct SystemMatrices {
  Matrix A;
  Matrix B;
  Matrix C;
};

struct KktResidual {
  double stationarity;     ///< || grad f(x) + T^T y ||
  double subgradient_gap;  ///< distance from y to the subgradient of g at z
  double primal;           ///< || T x - z ||
};

/// Proximal augmented Lagrangian f(x) + M_{mu g}(Tx + mu y) - (mu/2)||y||^2.
double pal_value(const CompositeProblem& p, const PrimalDualState& w);

/// Right-hand side of the saddle-point flow: descent in x, ascent in y.
Vector flow_field(const CompositeProblem& p, const PrimalDualState& w);
Vector flow_field(const CompositeProblem& p, const Vector& w_stacked);

/// Residuals of the KKT system at w, with z = prox_{mu g}(Tx + mu y).
/// All three vanish exactly at equilibria of the flow.
KktResidual kkt_residual(const CompositeProblem& p, const PrimalDualState& w);

SystemMatrices system_matrices(const CompositeProblem& p);

/// Inputs and outputs of the static nonlinear block in the LTI + Delta
/// decomposition: u1 = grad f(x) - m_f x over xi1 = x, and u2 = prox of
/// xi2 = Tx + mu y.
struct DeltaMaps {
  Vector xi1;
  Vector xi2;
  Vector u1;
  Vector u2;
};

DeltaMaps delta_maps(const CompositeProblem& p, const PrimalDualState& w);

/// Pointwise quadratic-constraint value
///   2 Lhat (xi - xi_bar)^T (u - u_bar) - 2 ||u - u_bar||^2,
/// nonnegative whenever u, u_bar are true images under the block's map
/// (Lhat = L_f - m_f for block 1, Lhat = 1 for block 2).
double iqc_gap(int block, const Vector& xi, const Vector& xi_bar,
               const Vector& u, const Vector& u_bar, double Lhat);

}  // namespace palflow
