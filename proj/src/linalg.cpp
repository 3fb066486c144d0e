#include "palflow/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace palflow {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kPivotTol = 1e-13;

void require_square(const Matrix& S, const char* who) {
  if (S.rows() != S.cols())
    throw StructuralError(std::string(who) + ": matrix must be square");
}

}  // namespace

SymEigResult sym_eig(const Matrix& S) {
  require_square(S, "sym_eig");
  const double scale = S.norm();
  if ((S - S.transpose()).norm() > kSymmetryTol * std::max(scale, 1e-300))
    throw StructuralError("sym_eig: matrix is not symmetric");
  const Matrix sym = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success)
    throw SingularityError("sym_eig: eigensolver failed to converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

double min_eigenvalue(const Matrix& S) { return sym_eig(S).eigenvalues(0); }

bool is_positive_definite(const Matrix& S, double tol) {
  return min_eigenvalue(S) > tol;
}

SingularExtremes singular_extremes(const Matrix& T) {
  if (T.size() == 0 || T.norm() == 0.0)
    throw DegenerateInputError("singular_extremes: zero matrix");
  const Matrix gram = T * T.transpose();
  const SymEigResult eig = sym_eig(gram);
  const auto clamped_sqrt = [](double v) { return std::sqrt(std::max(v, 0.0)); };
  return {clamped_sqrt(eig.eigenvalues(0)),
          clamped_sqrt(eig.eigenvalues(eig.eigenvalues.size() - 1))};
}

Vector solve_linear(const Matrix& A, const Vector& b) {
  require_square(A, "solve_linear");
  if (A.rows() != b.size())
    throw StructuralError("solve_linear: right-hand side has wrong length");
  Eigen::PartialPivLU<Matrix> lu(A);
  const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (min_pivot < kPivotTol * A.norm())
    throw SingularityError("solve_linear: matrix is numerically singular");
  return lu.solve(b);
}

}  // namespace palflow
