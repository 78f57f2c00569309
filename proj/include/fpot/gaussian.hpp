#pragma once

#include "fpot/numeric.hpp"

namespace fpot {

// Target law summary: mean and raw second moment, covariance m2_y - m_y m_y^T.
struct GaussianTarget {
  Vector m_y;
  Matrix m2_y;

  Matrix sigma_y() const { return m2_y - m_y * m_y.transpose(); }
};

// Multiplier for the quadratic feature family: linear part lambda1, symmetric
// quadratic part lambda2 entering as y^T lambda2 y.
struct GaussianMultiplier {
  Vector lambda1;
  Matrix lambda2;
};

// Tilted transition kernel for standard Gaussian marginals: Gaussian with
// conditional covariance sigma_t and mean eps^{-1} sigma_t (x + lambda1).
struct GaussianKernel {
  Matrix sigma_t;
  Vector lambda1;
  double epsilon = 1.0;

  Vector mean(const Vector& x) const { return sigma_t * (x + lambda1) / epsilon; }
};

struct OptimalKernelResult {
  GaussianKernel kernel;
  GaussianMultiplier multiplier;
  double riccati_residual = 0.0;
};

struct SymmetricEigen {
  Vector values;   // descending
  Matrix vectors;  // orthonormal columns, first nonzero entry positive
};

struct FeatureMoments {
  Vector q;  // conditional feature means
  Matrix m;  // conditional second moments of the feature vector
};

// Eigendecomposition of a symmetric matrix with a deterministic ordering and
// sign convention, so repeated runs produce identical factors.
SymmetricEigen symmetric_eigen_sorted(const Matrix& a);

// sigma_t = [I + eps^{-1}(I - 2 lambda2)]^{-1}; requires lambda2 < (1+eps)/2 I.
GaussianKernel kernel_from_multiplier(const GaussianMultiplier& mult, double epsilon);

// Covariance of (X, Y) with X standard Gaussian and Y drawn from the kernel.
// The cross block is +eps^{-1} sigma_t: the mean map loads positively on x.
Matrix joint_covariance(const GaussianMultiplier& mult, double epsilon);

// Closed-form solution matching the target moments: sigma_t solves the
// Riccati equation -sigma_t - eps^{-2} sigma_t^2 + sigma_y = 0.
OptimalKernelResult optimal_kernel(const GaussianTarget& target, double epsilon);

// Integral of exp(-y^T sigma_t^{-1} y / 2 + eps^{-1} y^T (x + lambda1)) dy.
double normalizing_constant(const GaussianMultiplier& mult, double epsilon, const Vector& x);

// Conditional mean and second-moment matrix of the quadratic monomial feature
// vector (y_i, then y_i y_j for i <= j) under the kernel at x.
FeatureMoments gaussian_feature_moments(const GaussianMultiplier& mult, double epsilon,
                                        const Vector& x);

// Coefficient vector over the quadratic monomial features: lambda1 entries,
// then lambda2_ii on squares and 2 lambda2_ij on cross monomials.
Vector multiplier_to_flat(const GaussianMultiplier& mult);
GaussianMultiplier multiplier_from_flat(const Vector& flat, Eigen::Index dim);

}  // namespace fpot
