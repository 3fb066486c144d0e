#pragma once

#include <utility>

#include "palflow/linalg.hpp"

namespace palflow {

/// Smooth term f of the composite objective, with its strong-convexity
/// modulus m_f and gradient Lipschitz constant L_f. Both constants are
/// derived at construction so they can never disagree with the data.
struct SmoothFunction {
  enum class Kind { Quadratic, LogisticElastic };

  Kind kind = Kind::Quadratic;

  // quadratic: (1/2) x^T Q x + q^T x
  Matrix Q;
  Vector q;

  // logistic-elastic: sum_i log(1 + exp(a_i^T x)) - y_i a_i^T x + (1/2)||x||^2
  // with one feature vector per row of `features` and labels in {0, 1}.
  Matrix features;
  Eigen::VectorXi labels;

  double m_f = 0.0;
  double L_f = 0.0;

  Eigen::Index dim() const;
};

SmoothFunction make_quadratic(Matrix Q, Vector q);
SmoothFunction make_logistic_elastic(Matrix features, Eigen::VectorXi labels);

/// Nonsmooth term g, acting componentwise on z.
struct ProxFunction {
  enum class Kind { EqualityIndicator, InequalityIndicator, L1Norm };

  Kind kind = Kind::L1Norm;
  Vector b;             // indicator kinds
  double weight = 0.0;  // l1 kind, >= 0
};

ProxFunction make_equality_indicator(Vector b);
ProxFunction make_inequality_indicator(Vector b);
ProxFunction make_l1(double weight);

/// A full instance: minimize f(x) + g(z) subject to Tx = z, with penalty mu.
struct CompositeProblem {
  SmoothFunction f;
  ProxFunction g;
  Matrix T;  // m x n, full row rank
  double mu = 1.0;

  Eigen::Index primal_dim() const { return T.cols(); }
  Eigen::Index dual_dim() const { return T.rows(); }
};

/// Validates dimensions, mu > 0 and full row rank of T.
CompositeProblem make_problem(SmoothFunction f, ProxFunction g, Matrix T, double mu);

std::pair<double, Vector> f_value_grad(const SmoothFunction& f, const Vector& x);

/// prox_{mu g}(v), componentwise.
Vector prox(const ProxFunction& g, const Vector& v, double mu);

/// Moreau envelope M_{mu g}(v) = g(prox(v)) + ||prox(v) - v||^2 / (2 mu).
double moreau_value(const ProxFunction& g, const Vector& v, double mu);

/// grad M_{mu g}(v) = (v - prox(v)) / mu.
Vector moreau_grad(const ProxFunction& g, const Vector& v, double mu);

/// g evaluated at a point of its domain (indicators contribute zero).
double g_value(const ProxFunction& g, const Vector& z);

}  // namespace palflow
