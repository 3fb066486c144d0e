#pragma once

#include <Eigen/Dense>

#include "palflow/errors.hpp"

namespace palflow {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Eigendecomposition of a symmetric matrix.
struct SymEigResult {
  Vector eigenvalues;   ///< ascending
  Matrix eigenvectors;  ///< orthonormal columns, ordered like the eigenvalues
};

/// Decomposes a symmetric matrix. Inputs that are asymmetric beyond a
/// 1e-12 relative tolerance are rejected; smaller asymmetry (roundoff from
/// matrix assembly) is absorbed by symmetrizing (S + S^T)/2 first.
SymEigResult sym_eig(const Matrix& S);

/// Smallest eigenvalue; identical to sym_eig(S).eigenvalues(0).
double min_eigenvalue(const Matrix& S);

bool is_positive_definite(const Matrix& S, double tol = 0.0);

struct SingularExtremes {
  double sigma_min;
  double sigma_max;
};

/// Extreme singular values under the row-rank convention: both are square
/// roots of extreme eigenvalues of T T^T, so sigma_min is the smallest
/// singular value of the full-row-rank factor.
SingularExtremes singular_extremes(const Matrix& T);

/// Solves A x = b by LU with partial pivoting.
Vector solve_linear(const Matrix& A, const Vector& b);

}  // namespace palflow
