#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace fpot {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
/// Row-major matrix; used where per-row contiguous access dominates (cost rows, kernel rows).
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
/// A support point in R^N.
using Point = Eigen::VectorXd;

/// Stable log(sum_k exp(a_k)) with max subtraction:
/// log(exp(a0)+...) = c + log(exp(a0-c)+...), c = max_k a_k.
/// Entries equal to -inf contribute nothing; returns -inf when all entries are -inf.
double log_sum_exp(const Eigen::Ref<const Vector>& a);

/// Deterministic uniform sampler. mt19937_64 with an explicit 53-bit conversion so
/// that identical seeds give identical draws on every platform and compiler.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform draw in [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Standard normal draw (Box-Muller on two uniform() calls).
  double normal();

 private:
  std::mt19937_64 gen_;
};

}  // namespace fpot
