#pragma once

#include <utility>

#include "fpot/measure.hpp"
#include "fpot/penalty.hpp"

namespace fpot {

/// A feature-projected transport instance: source and target measures, the
/// cost matrix over their product, and feature values with moment targets on
/// the target support.
///
/// The dual machinery only ever reads features through their values on the
/// target support, so the instance caches the M x K2 value matrix and the
/// residual matrix F - r 1'.
class Problem {
 public:
  Problem(DiscreteMeasure mu1, DiscreteMeasure mu2, CostMatrix cost, const FeatureSystem& feats);
  Problem(DiscreteMeasure mu1, DiscreteMeasure mu2, CostMatrix cost, Matrix features2, Vector targets);

  const DiscreteMeasure& mu1() const { return mu1_; }
  const DiscreteMeasure& mu2() const { return mu2_; }
  const CostMatrix& cost() const { return cost_; }
  /// M x K2 feature values on the target support.
  const Matrix& features2() const { return features2_; }
  /// M x K2 residual values f~ = f - r on the target support.
  const Matrix& residuals2() const { return residuals2_; }
  const Vector& targets() const { return targets_; }

  Eigen::Index source_size() const { return mu1_.size(); }
  Eigen::Index target_size() const { return mu2_.size(); }
  Eigen::Index feature_count() const { return targets_.size(); }

  /// Covariance of f(Y) under mu2; positive definiteness of this matrix is the
  /// well-posedness check for strict dual concavity.
  Matrix feature_covariance_mu2() const;
  double min_feature_cov_eigenvalue() const;

 private:
  void validate() const;

  DiscreteMeasure mu1_;
  DiscreteMeasure mu2_;
  CostMatrix cost_;
  Matrix features2_;
  Matrix residuals2_;
  Vector targets_;
};

/// Cached evaluation of the tilted kernel at one multiplier.
struct DualState {
  Vector lambda;
  double epsilon = 0.0;
  /// Per-source soft-min values B_i.
  Vector B;
  /// K1 x K2 kernel rows, each renormalized to sum to 1.
  RowMatrix T;
  /// B / epsilon, kept for entropy and primal computations.
  Vector log_normalizer;
  /// K2 tilts lambda' f~(y_j), shared by all rows.
  Vector tilt;
};

/// Evaluates B and all kernel rows at (lambda, epsilon). Rows are independent
/// and may be computed by `workers` threads; all reductions elsewhere run in
/// fixed index order, so results are identical for any worker count.
DualState evaluate_dual(const Problem& problem, const Vector& lambda, double epsilon,
                        int workers = 1);

/// Tilt value lambda' f~(y_j) - c(x_i, y_j).
double ell0(const Problem& problem, const Vector& lambda, Eigen::Index i, Eigen::Index j);

/// Soft minimum B_i = eps * log sum_j exp(ell0(i,j)/eps + log w2_j), max-shifted.
double soft_min_B(const Problem& problem, const Vector& lambda, double epsilon, Eigen::Index i);

/// Row i of the tilted kernel: softmax over j of ell0(i,j)/eps + log w2_j.
Vector kernel_row(const Problem& problem, const Vector& lambda, double epsilon, Eigen::Index i);

/// Entropically regularized dual value -<mu1, B>; concave in lambda.
double dual_value_fpr(const Problem& problem, const Vector& lambda, double epsilon);

/// Penalized dual value: dual_value_fpr minus R*(-lambda).
double dual_value_fprp(const Problem& problem, const Vector& lambda, double epsilon,
                       const Penalty& penalty);

/// Gradient of the solver objective J(zeta) = <mu1, B_{eps zeta}> / eps: the
/// tilted residual moments m^lambda at lambda = eps * zeta.
Vector grad_J(const Problem& problem, const Vector& zeta, double epsilon);

/// Hessian of J: the mu1-averaged conditional covariance of f(Y) given X under
/// the tilted kernel; symmetric PSD.
Matrix hessian_J(const Problem& problem, const Vector& zeta, double epsilon);

struct PsiValue {
  double value;
  Eigen::Index argmin;
};

/// Hard minimum over j of c(i,j) - lambda' f~(y_j); ties break to the lowest index.
PsiValue psi_lambda(const Problem& problem, const Vector& lambda, Eigen::Index i);

/// Unregularized dual value sum_i mu1_i psi_lambda(i); concave piecewise linear.
double dual_value_fp(const Problem& problem, const Vector& lambda);

/// Moment gap m^lambda = <gamma2, f~> of the coupling encoded by the state.
Vector state_moment_gap(const Problem& problem, const DualState& state);

/// Conditional feature covariance Sigma^lambda of the state (the Hessian of J).
Matrix state_feature_covariance(const Problem& problem, const DualState& state);

/// Transport cost <gamma, c> of the coupling encoded by the state.
double state_transport_cost(const Problem& problem, const DualState& state);

/// Relative entropy D(gamma || mu1 x mu2) of the coupling encoded by the state,
/// computed in log space from the cached tilts.
double state_entropy(const Problem& problem, const DualState& state);

/// Materializes the coupling gamma = mu1 (x) T as a dense matrix.
Coupling coupling_from_state(const Problem& problem, const DualState& state);

}  // namespace fpot
