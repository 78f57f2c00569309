#pragma once

#include <cstdint>
#include <vector>

#include "fpot/numeric.hpp"
#include "fpot/penalty.hpp"
#include "fpot/sa.hpp"

namespace fpot {

// Nominal finite-state chain with a per-state statistic u and a target series
// r to track in expectation over the tilted chain.
struct MarkovProblem {
  Matrix states;          // state coordinates, one row per state
  Vector nu0;             // initial distribution
  std::vector<Matrix> P;  // one row-stochastic transition matrix per step
  Vector u;               // tracked statistic per state
  Vector r;               // target value per step
  double epsilon = 1.0;

  Eigen::Index state_count() const { return states.rows(); }
  Eigen::Index steps() const { return r.size(); }
  void validate() const;
};

// Path of state indices, length steps() + 1; entry 0 is the shared start.
using StatePath = Eigen::VectorXi;

struct BackwardResult {
  Matrix log_g;  // (steps+1) x S, row k holds log g_k
  double b = 0.0;
};

struct ForwardResult {
  Matrix nu;       // steps x S, row k-1 holds the conditional law at step k
  Vector m_tilde;  // per-step statistic means minus targets
};

// Transition matrices tilted toward the statistic targets and the nominal
// path: P[k] weighted entrywise by exp of the per-arrival gain.
std::vector<Matrix> hat_kernels(const MarkovProblem& pr, const Vector& lambda,
                                const StatePath& x_path);

// Backward products of the tilted kernels, carried in log space; b is the
// soft value of the tilt at the path start.
BackwardResult backward_g(const MarkovProblem& pr, const Vector& lambda,
                          const StatePath& x_path);

// Tilted kernels conditioned to stay normalized: rows sum to one.
std::vector<Matrix> check_kernels(const MarkovProblem& pr, const Vector& lambda,
                                  const StatePath& x_path);

// Conditional step laws of the normalized chain started at the path start,
// plus the per-step moment residuals they induce.
ForwardResult forward_marginals(const MarkovProblem& pr, const Vector& lambda,
                                const StatePath& x_path);

// One path drawn from the nominal chain.
StatePath sample_nominal_path(const MarkovProblem& pr, Rng& rng);

struct TrackingOptions {
  double a = 1.0;         // step scale
  double n0 = 100.0;      // step offset
  Vector zeta0;           // start iterate; empty means zero
  long iterations = 10000;
  std::uint64_t seed = 0;
  long eval_paths = 50000;  // fresh draws for the final report
};

struct TrackingReport {
  SATrace trace;
  Vector lambda_final;  // multiplier at the averaged iterate
  Vector achieved;      // estimated statistic mean per step at lambda_final
  Vector error;         // absolute tracking error per step
  double max_error = 0.0;
};

// Stochastic tracking of the target series: per-path moment residuals drive
// the multiplier recursion; pass a penalty to relax exact tracking.
TrackingReport tracking_solve(const MarkovProblem& pr, const Penalty* penalty,
                              const TrackingOptions& opts = {});

}  // namespace fpot
