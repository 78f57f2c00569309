#pragma once

#include <cstdint>

#include "fpot/dual.hpp"
#include "fpot/penalty.hpp"

namespace fpot {

enum class Estimator { kConditional, kSplit };

// Two-timescale steps: alpha_n = a / (n + n0) drives the iterate and
// beta_n = beta_scale (n + n0)^(-beta_exponent) drives the curvature matrix,
// so beta_n / alpha_n grows without bound. a = 0 freezes the iterate and
// beta_scale = 0 freezes the curvature matrix, for diagnostics.
struct SAOptions {
  double a = 1.0;
  double n0 = 100.0;
  Vector zeta0;
  double beta_exponent = 0.85;
  double beta_scale = 1.0;
  long horizon = 10000;
  std::uint64_t seed = 0;
  Estimator estimator = Estimator::kConditional;
  int split_k = 2;
};

struct MomentEstimate {
  Vector m_tilde;
  Matrix sigma_tilde;
};

// zeta holds one row per visited iterate (start included); m_tilde one row per
// step. zeta_averaged is the mean over the last ceil(iterations/2) post-update
// iterates. sigma_bar_final is set by zap_solve only.
struct SATrace {
  RowMatrix zeta;
  RowMatrix m_tilde;
  Vector zeta_final;
  Vector zeta_averaged;
  Matrix sigma_bar_final;
  bool diverged = false;
  long iterations = 0;
  std::uint64_t seed = 0;
};

// Inverse-CDF draw over a probability vector, scanning in support order.
Eigen::Index sample_index(const Vector& weights, Rng& rng);

Eigen::Index sample_from_kernel(const Problem& pr, const Vector& lambda, double epsilon,
                                Eigen::Index i, Rng& rng);

// Exact conditional moments of the kernel row at source atom i: residual mean
// and feature covariance. Weighting by mu1 recovers grad_J and hessian_J.
MomentEstimate estimator_conditional(const Problem& pr, const Vector& lambda, double epsilon,
                                     Eigen::Index i);

// K independent draws from the kernel row; the covariance estimate pairs the
// raw second-moment average with the mean of cross products over distinct
// draws, which is unbiased for the conditional covariance.
MomentEstimate estimator_split(const Problem& pr, const Vector& lambda, double epsilon,
                               Eigen::Index i, int k, Rng& rng);

// Stochastic approximation of the dual stationarity condition: each step draws
// a source atom, estimates the conditional moment gap, adds the penalty drift
// when present, and moves zeta against it. Iterates whose sup norm passes 1e8
// or leave the finite range stop the run with diverged set.
SATrace sgd_solve(const Problem& pr, double epsilon, const Penalty* penalty,
                  const SAOptions& opts = {});

// Same recursion preconditioned by the inverse of a tracked curvature matrix,
// updated on the faster timescale and ridged by 1e-8 when near singular.
SATrace zap_solve(const Problem& pr, double epsilon, const Penalty* penalty,
                  const SAOptions& opts = {});

}  // namespace fpot
