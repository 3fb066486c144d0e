#pragma once

#include <stdexcept>
#include <string>

namespace palflow {

/// Base class of every error thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed input: dimension mismatch, non-square or asymmetric matrix.
struct StructuralError : Error {
  using Error::Error;
};

/// Scalar parameter out of its admissible range (e.g. mu <= 0).
struct ParameterError : Error {
  using Error::Error;
};

/// Linear system is numerically singular.
struct SingularityError : Error {
  using Error::Error;
};

/// Degenerate input such as the zero matrix.
struct DegenerateInputError : Error {
  using Error::Error;
};

/// Constraint matrix violates the full-row-rank assumption.
struct RankError : Error {
  using Error::Error;
};

/// Certificates require L_f > m_f; the boundary case is rejected.
struct UnsupportedRegimeError : Error {
  using Error::Error;
};

/// LMI infeasible where feasibility is required (rho = 0).
struct CertificateError : Error {
  using Error::Error;
};

/// File could not be read or written; message carries the path.
struct IoError : Error {
  using Error::Error;
};

}  // namespace palflow
