#include "fpot/gaussian.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace fpot {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

void check_epsilon(double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw std::invalid_argument("epsilon must be positive and finite");
}

// Accepts small asymmetry from storage round trips, works on the symmetrized
// matrix afterwards.
Matrix require_symmetric(const Matrix& a, const char* what) {
  if (a.rows() != a.cols()) throw std::invalid_argument(what);
  const double scale = 1.0 + a.lpNorm<Eigen::Infinity>();
  if ((a - a.transpose()).lpNorm<Eigen::Infinity>() > 1e-9 * scale)
    throw std::invalid_argument(what);
  return 0.5 * (a + a.transpose());
}

void check_multiplier(const GaussianMultiplier& mult) {
  if (mult.lambda1.size() == 0 || !mult.lambda1.allFinite())
    throw std::invalid_argument("multiplier linear part must be finite and nonempty");
  if (mult.lambda2.rows() != mult.lambda1.size() || !mult.lambda2.allFinite())
    throw std::invalid_argument("multiplier parts must have matching dimension");
}

}  // namespace

SymmetricEigen symmetric_eigen_sorted(const Matrix& a) {
  const Matrix sym = require_symmetric(a, "matrix must be square and symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  const Eigen::Index n = sym.rows();
  SymmetricEigen out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    // solver returns ascending order
    out.values[k] = es.eigenvalues()[n - 1 - k];
    Vector v = es.eigenvectors().col(n - 1 - k);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(v[i]) > 1e-14) {
        if (v[i] < 0.0) v = -v;
        break;
      }
    }
    out.vectors.col(k) = v;
  }
  return out;
}

GaussianKernel kernel_from_multiplier(const GaussianMultiplier& mult, double epsilon) {
  check_epsilon(epsilon);
  check_multiplier(mult);
  const Eigen::Index n = mult.lambda1.size();
  const Matrix lambda2 =
      require_symmetric(mult.lambda2, "multiplier quadratic part must be symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(lambda2);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  if (es.eigenvalues().maxCoeff() >= 0.5 * (1.0 + epsilon))
    throw std::invalid_argument("multiplier violates the kernel spectral bound");

  const Matrix identity = Matrix::Identity(n, n);
  const Matrix precision = identity + (identity - 2.0 * lambda2) / epsilon;
  GaussianKernel kernel;
  kernel.sigma_t = precision.ldlt().solve(identity);
  kernel.sigma_t = 0.5 * (kernel.sigma_t + kernel.sigma_t.transpose());
  kernel.lambda1 = mult.lambda1;
  kernel.epsilon = epsilon;
  return kernel;
}

Matrix joint_covariance(const GaussianMultiplier& mult, double epsilon) {
  const GaussianKernel kernel = kernel_from_multiplier(mult, epsilon);
  const Eigen::Index n = mult.lambda1.size();
  const Matrix cross = kernel.sigma_t / epsilon;
  Matrix joint(2 * n, 2 * n);
  joint.topLeftCorner(n, n) = Matrix::Identity(n, n);
  joint.topRightCorner(n, n) = cross;
  joint.bottomLeftCorner(n, n) = cross;
  joint.bottomRightCorner(n, n) =
      kernel.sigma_t + kernel.sigma_t * kernel.sigma_t / (epsilon * epsilon);
  return joint;
}

OptimalKernelResult optimal_kernel(const GaussianTarget& target, double epsilon) {
  check_epsilon(epsilon);
  if (target.m_y.size() == 0 || !target.m_y.allFinite())
    throw std::invalid_argument("target mean must be finite and nonempty");
  if (target.m2_y.rows() != target.m_y.size() || !target.m2_y.allFinite())
    throw std::invalid_argument("target second moment must match the mean dimension");
  const Eigen::Index n = target.m_y.size();
  const Matrix sigma_y =
      require_symmetric(target.sigma_y(), "target second moment must be symmetric");

  const SymmetricEigen es = symmetric_eigen_sorted(sigma_y);
  if (es.values.minCoeff() <= 0.0)
    throw std::invalid_argument("target covariance must be positive definite");

  // per-eigenvalue root of z^2 / eps^2 + z - d = 0
  Vector z(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double d = es.values[k];
    z[k] = 0.5 * (-epsilon * epsilon +
                  std::sqrt(epsilon * epsilon * (epsilon * epsilon + 4.0 * d)));
  }

  OptimalKernelResult out;
  Matrix sigma_t = es.vectors * z.asDiagonal() * es.vectors.transpose();
  sigma_t = 0.5 * (sigma_t + sigma_t.transpose());
  out.riccati_residual =
      (-sigma_t - sigma_t * sigma_t / (epsilon * epsilon) + sigma_y).norm();

  const Matrix identity = Matrix::Identity(n, n);
  const Matrix inverse = sigma_t.ldlt().solve(identity);
  out.multiplier.lambda2 = 0.5 * (identity - epsilon * (inverse - identity));
  out.multiplier.lambda2 =
      0.5 * (out.multiplier.lambda2 + out.multiplier.lambda2.transpose());
  out.multiplier.lambda1 = epsilon * (inverse * target.m_y);

  out.kernel.sigma_t = sigma_t;
  out.kernel.lambda1 = out.multiplier.lambda1;
  out.kernel.epsilon = epsilon;
  return out;
}

double normalizing_constant(const GaussianMultiplier& mult, double epsilon, const Vector& x) {
  const GaussianKernel kernel = kernel_from_multiplier(mult, epsilon);
  if (x.size() != mult.lambda1.size())
    throw std::invalid_argument("point dimension must match the multiplier");
  const Eigen::Index n = x.size();
  const Vector shift = x + mult.lambda1;
  const double quad = shift.dot(kernel.sigma_t * shift) / (epsilon * epsilon);
  return std::sqrt(std::pow(2.0 * kPi, static_cast<double>(n)) *
                   kernel.sigma_t.determinant()) *
         std::exp(0.5 * quad);
}

FeatureMoments gaussian_feature_moments(const GaussianMultiplier& mult, double epsilon,
                                        const Vector& x) {
  const GaussianKernel kernel = kernel_from_multiplier(mult, epsilon);
  if (x.size() != mult.lambda1.size())
    throw std::invalid_argument("point dimension must match the multiplier");
  const Eigen::Index n = x.size();
  const Vector mu = kernel.mean(x);
  const Matrix& s = kernel.sigma_t;

  // Gaussian product moments up to order four via the pairing identity
  const auto m2 = [&](Eigen::Index i, Eigen::Index j) { return s(i, j) + mu[i] * mu[j]; };
  const auto m3 = [&](Eigen::Index i, Eigen::Index j, Eigen::Index k) {
    return mu[i] * mu[j] * mu[k] + mu[i] * s(j, k) + mu[j] * s(i, k) + mu[k] * s(i, j);
  };
  const auto m4 = [&](Eigen::Index i, Eigen::Index j, Eigen::Index k, Eigen::Index l) {
    return mu[i] * mu[j] * mu[k] * mu[l] + s(i, j) * s(k, l) + s(i, k) * s(j, l) +
           s(i, l) * s(j, k) + mu[i] * mu[j] * s(k, l) + mu[i] * mu[k] * s(j, l) +
           mu[i] * mu[l] * s(j, k) + mu[j] * mu[k] * s(i, l) + mu[j] * mu[l] * s(i, k) +
           mu[k] * mu[l] * s(i, j);
  };

  // monomial exponent lists in the quadratic feature order: y_i, then y_i y_j
  std::vector<std::pair<Eigen::Index, Eigen::Index>> monomials;
  for (Eigen::Index i = 0; i < n; ++i) monomials.emplace_back(i, -1);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) monomials.emplace_back(i, j);
  const Eigen::Index count = static_cast<Eigen::Index>(monomials.size());

  FeatureMoments out;
  out.q.resize(count);
  for (Eigen::Index a = 0; a < count; ++a) {
    const auto [i, j] = monomials[a];
    out.q[a] = (j < 0) ? mu[i] : m2(i, j);
  }
  out.m.resize(count, count);
  for (Eigen::Index a = 0; a < count; ++a) {
    for (Eigen::Index b = a; b < count; ++b) {
      Eigen::Index idx[4];
      int deg = 0;
      idx[deg++] = monomials[a].first;
      if (monomials[a].second >= 0) idx[deg++] = monomials[a].second;
      idx[deg++] = monomials[b].first;
      if (monomials[b].second >= 0) idx[deg++] = monomials[b].second;
      double value = 0.0;
      if (deg == 2) value = m2(idx[0], idx[1]);
      else if (deg == 3) value = m3(idx[0], idx[1], idx[2]);
      else value = m4(idx[0], idx[1], idx[2], idx[3]);
      out.m(a, b) = value;
      out.m(b, a) = value;
    }
  }
  return out;
}

Vector multiplier_to_flat(const GaussianMultiplier& mult) {
  check_multiplier(mult);
  const Eigen::Index n = mult.lambda1.size();
  Vector flat(n + n * (n + 1) / 2);
  flat.head(n) = mult.lambda1;
  Eigen::Index idx = n;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j)
      flat[idx++] = (i == j) ? mult.lambda2(i, i) : 2.0 * mult.lambda2(i, j);
  return flat;
}

GaussianMultiplier multiplier_from_flat(const Vector& flat, Eigen::Index dim) {
  if (dim <= 0) throw std::invalid_argument("dimension must be positive");
  if (flat.size() != dim + dim * (dim + 1) / 2)
    throw std::invalid_argument("flat multiplier has the wrong length");
  GaussianMultiplier mult;
  mult.lambda1 = flat.head(dim);
  mult.lambda2 = Matrix::Zero(dim, dim);
  Eigen::Index idx = dim;
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = i; j < dim; ++j) {
      const double value = flat[idx++];
      if (i == j) {
        mult.lambda2(i, i) = value;
      } else {
        mult.lambda2(i, j) = 0.5 * value;
        mult.lambda2(j, i) = 0.5 * value;
      }
    }
  }
  return mult;
}

}  // namespace fpot
