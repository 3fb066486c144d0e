#include "palflow/problems.hpp"

#include <cmath>

namespace palflow {

namespace {

constexpr double kRankTol = 1e-10;

void require_mu(double mu) {
  if (!(mu > 0.0)) throw ParameterError("mu must be positive");
}

void require_indicator_dim(const ProxFunction& g, const Vector& v) {
  if (g.kind != ProxFunction::Kind::L1Norm && g.b.size() != v.size())
    throw StructuralError("prox: vector length does not match indicator bound");
}

double log1p_exp(double t) {
  // log(1 + e^t) without overflow.
  return t > 30.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace

Eigen::Index SmoothFunction::dim() const {
  return kind == Kind::Quadratic ? Q.rows() : features.cols();
}

SmoothFunction make_quadratic(Matrix Q, Vector q) {
  if (Q.rows() != Q.cols()) throw StructuralError("quadratic: Q must be square");
  if (Q.rows() != q.size())
    throw StructuralError("quadratic: q length does not match Q");
  SmoothFunction f;
  f.kind = SmoothFunction::Kind::Quadratic;
  const SymEigResult eig = sym_eig(Q);  // also rejects asymmetric Q
  f.m_f = eig.eigenvalues(0);
  f.L_f = eig.eigenvalues(eig.eigenvalues.size() - 1);
  if (f.m_f <= 0.0) throw StructuralError("quadratic: Q must be positive definite");
  f.Q = std::move(Q);
  f.q = std::move(q);
  return f;
}

SmoothFunction make_logistic_elastic(Matrix features, Eigen::VectorXi labels) {
  if (features.rows() != labels.size())
    throw StructuralError("logistic: one label per feature row required");
  for (Eigen::Index i = 0; i < labels.size(); ++i)
    if (labels(i) != 0 && labels(i) != 1)
      throw StructuralError("logistic: labels must be 0 or 1");
  SmoothFunction f;
  f.kind = SmoothFunction::Kind::LogisticElastic;
  // The unit ridge supplies the strong convexity; the logistic loss adds at
  // most sigma_max(features)^2 / 4 of curvature.
  f.m_f = 1.0;
  const double sigma_max =
      features.size() > 0 && features.norm() > 0.0
          ? singular_extremes(features).sigma_max
          : 0.0;
  f.L_f = 1.0 + 0.25 * sigma_max * sigma_max;
  f.features = std::move(features);
  f.labels = std::move(labels);
  return f;
}

ProxFunction make_equality_indicator(Vector b) {
  ProxFunction g;
  g.kind = ProxFunction::Kind::EqualityIndicator;
  g.b = std::move(b);
  return g;
}

ProxFunction make_inequality_indicator(Vector b) {
  ProxFunction g;
  g.kind = ProxFunction::Kind::InequalityIndicator;
  g.b = std::move(b);
  return g;
}

ProxFunction make_l1(double weight) {
  if (weight < 0.0) throw ParameterError("l1 weight must be nonnegative");
  ProxFunction g;
  g.kind = ProxFunction::Kind::L1Norm;
  g.weight = weight;
  return g;
}

CompositeProblem make_problem(SmoothFunction f, ProxFunction g, Matrix T, double mu) {
  require_mu(mu);
  if (T.rows() < 1 || T.cols() < 1)
    throw StructuralError("problem: T must be nonempty");
  if (f.dim() != T.cols())
    throw StructuralError("problem: f dimension does not match columns of T");
  if (g.kind != ProxFunction::Kind::L1Norm && g.b.size() != T.rows())
    throw StructuralError("problem: indicator bound does not match rows of T");
  if (T.norm() == 0.0) throw RankError("problem: T is zero");
  if (singular_extremes(T).sigma_min <= kRankTol)
    throw RankError("problem: T is not full row rank");
  CompositeProblem p;
  p.f = std::move(f);
  p.g = std::move(g);
  p.T = std::move(T);
  p.mu = mu;
  return p;
}

std::pair<double, Vector> f_value_grad(const SmoothFunction& f, const Vector& x) {
  if (x.size() != f.dim())
    throw StructuralError("f_value_grad: x has wrong dimension");
  if (f.kind == SmoothFunction::Kind::Quadratic) {
    Vector grad = f.Q * x + f.q;
    const double value = 0.5 * x.dot(f.Q * x) + f.q.dot(x);
    return {value, std::move(grad)};
  }
  double value = 0.5 * x.squaredNorm();
  Vector grad = x;
  for (Eigen::Index i = 0; i < f.features.rows(); ++i) {
    const double t = f.features.row(i).dot(x);
    const double label = f.labels(i);
    value += log1p_exp(t) - label * t;
    grad += (sigmoid(t) - label) * f.features.row(i).transpose();
  }
  return {value, std::move(grad)};
}

Vector prox(const ProxFunction& g, const Vector& v, double mu) {
  require_mu(mu);
  require_indicator_dim(g, v);
  switch (g.kind) {
    case ProxFunction::Kind::EqualityIndicator:
      return g.b;
    case ProxFunction::Kind::InequalityIndicator:
      return v.cwiseMin(g.b);
    case ProxFunction::Kind::L1Norm: {
      const double threshold = g.weight * mu;
      Vector out(v.size());
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double shrunk = std::max(std::abs(v(i)) - threshold, 0.0);
        out(i) = std::copysign(shrunk, v(i));
      }
      return out;
    }
  }
  throw StructuralError("prox: unknown kind");
}

double g_value(const ProxFunction& g, const Vector& z) {
  if (g.kind == ProxFunction::Kind::L1Norm)
    return g.weight * z.lpNorm<1>();
  return 0.0;  // indicators vanish on their domain
}

double moreau_value(const ProxFunction& g, const Vector& v, double mu) {
  const Vector z = prox(g, v, mu);
  return g_value(g, z) + (z - v).squaredNorm() / (2.0 * mu);
}

Vector moreau_grad(const ProxFunction& g, const Vector& v, double mu) {
  return (v - prox(g, v, mu)) / mu;
}

}  // namespace palflow
