#include "palflow/flow.hpp"

#include <cmath>

namespace palflow {

namespace {

void require_dims(const CompositeProblem& p, const PrimalDualState& w) {
  if (w.x.size() != p.primal_dim() || w.y.size() != p.dual_dim())
    throw StructuralError("state dimensions do not match the problem");
}

/// Distance from y_i to the subgradient set of g at z_i, per kind.
double coordinate_gap(const ProxFunction& g, Eigen::Index i, double z, double y) {
  switch (g.kind) {
    case ProxFunction::Kind::EqualityIndicator:
      // subgradient set is all of R once z sits on the constraint
      return 0.0;
    case ProxFunction::Kind::InequalityIndicator:
      // normal cone is [0, inf) on the boundary, {0} in the interior
      return std::max(0.0, -y) + (z < g.b(i) ? std::abs(y) : 0.0);
    case ProxFunction::Kind::L1Norm: {
      const double gamma = g.weight;
      if (z == 0.0) return std::max(std::abs(y) - gamma, 0.0);
      return std::abs(y - std::copysign(gamma, z));
    }
  }
  throw StructuralError("unknown prox kind");
}

}  // namespace

Vector stack(const PrimalDualState& w) {
  Vector out(w.x.size() + w.y.size());
  out << w.x, w.y;
  return out;
}

PrimalDualState unstack(const Vector& w, Eigen::Index n, Eigen::Index m) {
  if (w.size() != n + m) throw StructuralError("unstack: wrong vector length");
  return {w.head(n), w.tail(m)};
}

double pal_value(const CompositeProblem& p, const PrimalDualState& w) {
  require_dims(p, w);
  const Vector v = p.T * w.x + p.mu * w.y;
  return f_value_grad(p.f, w.x).first + moreau_value(p.g, v, p.mu) -
         0.5 * p.mu * w.y.squaredNorm();
}

Vector flow_field(const CompositeProblem& p, const PrimalDualState& w) {
  require_dims(p, w);
  const Vector v = p.T * w.x + p.mu * w.y;
  const Vector envelope_grad = moreau_grad(p.g, v, p.mu);
  Vector out(p.primal_dim() + p.dual_dim());
  out.head(p.primal_dim()) =
      -(f_value_grad(p.f, w.x).second + p.T.transpose() * envelope_grad);
  out.tail(p.dual_dim()) = p.mu * (envelope_grad - w.y);
  return out;
}

Vector flow_field(const CompositeProblem& p, const Vector& w_stacked) {
  return flow_field(p, unstack(w_stacked, p.primal_dim(), p.dual_dim()));
}

KktResidual kkt_residual(const CompositeProblem& p, const PrimalDualState& w) {
  require_dims(p, w);
  const Vector z = prox(p.g, p.T * w.x + p.mu * w.y, p.mu);
  KktResidual r;
  r.stationarity =
      (f_value_grad(p.f, w.x).second + p.T.transpose() * w.y).norm();
  double gap_sq = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double gi = coordinate_gap(p.g, i, z(i), w.y(i));
    gap_sq += gi * gi;
  }
  r.subgradient_gap = std::sqrt(gap_sq);
  r.primal = (p.T * w.x - z).norm();
  return r;
}

SystemMatrices system_matrices(const CompositeProblem& p) {
  const Eigen::Index n = p.primal_dim();
  const Eigen::Index m = p.dual_dim();
  const double mu = p.mu;
  SystemMatrices s;
  s.A = Matrix::Zero(n + m, n + m);
  s.A.topLeftCorner(n, n) =
      -(p.f.m_f * Matrix::Identity(n, n) + p.T.transpose() * p.T / mu);
  s.A.topRightCorner(n, m) = -p.T.transpose();
  s.A.bottomLeftCorner(m, n) = p.T;

  s.B = Matrix::Zero(n + m, n + m);
  s.B.topLeftCorner(n, n) = -Matrix::Identity(n, n);
  s.B.topRightCorner(n, m) = p.T.transpose() / mu;
  s.B.bottomRightCorner(m, m) = -Matrix::Identity(m, m);

  s.C = Matrix::Zero(n + m, n + m);
  s.C.topLeftCorner(n, n) = Matrix::Identity(n, n);
  s.C.bottomLeftCorner(m, n) = p.T;
  s.C.bottomRightCorner(m, m) = mu * Matrix::Identity(m, m);
  return s;
}

DeltaMaps delta_maps(const CompositeProblem& p, const PrimalDualState& w) {
  require_dims(p, w);
  DeltaMaps d;
  d.xi1 = w.x;
  d.xi2 = p.T * w.x + p.mu * w.y;
  d.u1 = f_value_grad(p.f, w.x).second - p.f.m_f * w.x;
  d.u2 = prox(p.g, d.xi2, p.mu);
  return d;
}

double iqc_gap(int block, const Vector& xi, const Vector& xi_bar,
               const Vector& u, const Vector& u_bar, double Lhat) {
  if (block != 1 && block != 2) throw ParameterError("iqc_gap: block must be 1 or 2");
  if (xi.size() != xi_bar.size() || u.size() != u_bar.size() || xi.size() != u.size())
    throw StructuralError("iqc_gap: mismatched dimensions");
  const Vector dxi = xi - xi_bar;
  const Vector du = u - u_bar;
  return 2.0 * Lhat * dxi.dot(du) - 2.0 * du.squaredNorm();
}

}  // namespace palflow
