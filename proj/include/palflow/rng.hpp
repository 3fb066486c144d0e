#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace palflow {

/// Deterministic, platform-independent random stream: xoshiro256++ whose
/// state is initialized through splitmix64, with Box-Muller normal variates.
/// The algorithm is fixed so that a seed identifies one bit-exact stream on
/// every platform (see README for the draw-order conventions).
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01();

  double uniform(double lo, double hi);

  /// Standard normal via Box-Muller; the second variate of a pair is cached.
  double normal();

  /// Uniform integer in [lo, hi].
  int uniform_int(int lo, int hi);

 private:
  std::uint64_t state_[4];
  double cached_ = 0.0;
  bool has_cached_ = false;
};

/// Matrix of iid standard normals, filled row by row.
Eigen::MatrixXd normal_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols);

Eigen::VectorXd normal_vector(Rng& rng, Eigen::Index size);

}  // namespace palflow
