#pragma once

#include <string>
#include <vector>

#include "fpot/dual.hpp"
#include "fpot/penalty.hpp"

namespace fpot {

struct SolveOptions {
  double grad_tol = 1e-8;
  int max_iters = 200;
  double hessian_ridge = 1e-10;
  double backtrack_factor = 0.5;
  double armijo_constant = 1e-4;
  int workers = 1;
};

enum class SolveStatus { kConverged, kIterLimit, kDiverged };

// One entry per visited iterate, starting point included; value is the
// maximized dual objective, grad_norm the stationarity norm at that iterate.
struct TracePoint {
  double value = 0.0;
  double grad_norm = 0.0;
};

struct SolveReport {
  Vector lambda_star;
  double epsilon = 0.0;
  double dual_value = 0.0;
  double primal_value = 0.0;
  double gap = 0.0;
  double transport_cost = 0.0;
  double entropy = 0.0;
  // Feature moments of the kernel marginal minus the targets; under a penalty
  // this is the achieved moment shift.
  Vector moment_residual;
  int iterations = 0;
  SolveStatus status = SolveStatus::kIterLimit;
  std::string message;
  std::vector<TracePoint> trace;

  bool converged() const { return status == SolveStatus::kConverged; }
};

// Epsilon stages eps0, eps0*rho, ... down to and including eps_min.
struct ContinuationSchedule {
  double eps0 = 1.0;
  double rho = 0.5;
  double eps_min = 1e-4;
};

struct ContinuationReport {
  std::vector<SolveReport> stages;
  Vector lambda_final;
  double dual_fp_final = 0.0;
  bool completed = false;
};

struct SlacknessReport {
  double max_violation = 0.0;
  Eigen::Index cells_checked = 0;
  Eigen::Index worst_row = -1;
  Eigen::Index worst_col = -1;
};

// Newton ascent of the moment-constrained dual. Converged reports satisfy
// both the gradient tolerance and gap <= 1e-8 (1 + |dual_value|); iterates
// whose multiplier exceeds 1e6 in sup norm stop with a divergence status.
SolveReport solve_fpr(const Problem& pr, double epsilon, const SolveOptions& opts = {});

// Penalized variant: maximizes the dual minus the penalty conjugate at the
// negated multiplier. Converged reports satisfy the stationarity bound
// |moment gap + drift| <= grad_tol; no divergence guard is applied.
SolveReport solve_fprp(const Problem& pr, double epsilon, const Penalty& penalty,
                       const SolveOptions& opts = {});

// Warm-started solves along the schedule. Stops early at the first stage that
// fails to converge; lambda_final is then the last converged multiplier.
ContinuationReport continuation_fp(const Problem& pr, const ContinuationSchedule& schedule = {},
                                   const SolveOptions& opts = {});

// For every cell with mass above tol, measures the slack of the unregularized
// support condition: cost(i,j) - lambda . residual(j) - psi(i) >= 0 with
// equality on optimal supports.
SlacknessReport complementary_slackness_check(const Problem& pr, const Vector& lambda,
                                              const Coupling& coupling, double tol);

}  // namespace fpot
