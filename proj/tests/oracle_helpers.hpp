#pragma once

// Shared test-side oracles: finite differences, scalar search, random instance
// generation. Everything is deterministic given the caller's Rng.

#include <cmath>
#include <stdexcept>

#include "fpot/dual.hpp"
#include "fpot/numeric.hpp"

namespace oracle {

using fpot::CostMatrix;
using fpot::DiscreteMeasure;
using fpot::Matrix;
using fpot::Problem;
using fpot::Rng;
using fpot::Vector;

inline Vector random_vector(Rng& rng, Eigen::Index n, double lo, double hi) {
  Vector v(n);
  for (Eigen::Index k = 0; k < n; ++k) v[k] = lo + (hi - lo) * rng.uniform();
  return v;
}

inline Matrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double lo, double hi) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = lo + (hi - lo) * rng.uniform();
  return m;
}

// Full-support random point on the simplex via exponential spacings.
inline Vector random_simplex(Rng& rng, Eigen::Index n) {
  Vector v(n);
  for (Eigen::Index k = 0; k < n; ++k) v[k] = -std::log(1.0 - rng.uniform());
  return v / v.sum();
}

// Random feasible instance: tabulated features on a random target support with
// targets realized by a full-support mixture, so the moment class is nonempty
// and strictly inside the attainable set.
inline Problem random_problem(Rng& rng, Eigen::Index dim, Eigen::Index m, Eigen::Index k1,
                              Eigen::Index k2) {
  DiscreteMeasure mu1(random_matrix(rng, k1, dim, -1.0, 1.0), random_simplex(rng, k1));
  for (int attempt = 0; attempt < 50; ++attempt) {
    DiscreteMeasure mu2(random_matrix(rng, k2, dim, -1.0, 1.0), random_simplex(rng, k2));
    Matrix values = random_matrix(rng, m, k2, -1.0, 1.0);
    Vector targets = values * random_simplex(rng, k2);
    Problem pr(mu1, mu2, fpot::cost_matrix(fpot::half_squared_euclidean, mu1, mu2),
               values, targets);
    if (pr.min_feature_cov_eigenvalue() > 1e-3) return pr;
  }
  throw std::runtime_error("random instance generation failed the covariance check");
}

// Solver objective J(zeta) = <mu1, B_{eps zeta}> / eps through the public API.
inline double dual_J(const Problem& pr, const Vector& zeta, double eps) {
  return -fpot::dual_value_fpr(pr, eps * zeta, eps) / eps;
}

inline Vector fd_grad_J(const Problem& pr, const Vector& zeta, double eps, double h = 1e-5) {
  Vector g(zeta.size());
  for (Eigen::Index k = 0; k < zeta.size(); ++k) {
    Vector zp = zeta, zm = zeta;
    zp[k] += h;
    zm[k] -= h;
    g[k] = (dual_J(pr, zp, eps) - dual_J(pr, zm, eps)) / (2.0 * h);
  }
  return g;
}

inline Matrix fd_hessian_J(const Problem& pr, const Vector& zeta, double eps, double h = 1e-5) {
  const Eigen::Index m = zeta.size();
  Matrix hess(m, m);
  for (Eigen::Index k = 0; k < m; ++k) {
    Vector zp = zeta, zm = zeta;
    zp[k] += h;
    zm[k] -= h;
    hess.col(k) = (fpot::grad_J(pr, zp, eps) - fpot::grad_J(pr, zm, eps)) / (2.0 * h);
  }
  return 0.5 * (hess + hess.transpose());
}

// Draws zeta values until the gradient is well scaled, so relative finite
// difference comparisons are meaningful.
inline Vector well_scaled_zeta(const Problem& pr, double eps, Rng& rng, double min_grad = 1e-2) {
  for (int attempt = 0; attempt < 50; ++attempt) {
    Vector zeta = random_vector(rng, pr.feature_count(), -1.0, 1.0);
    if (fpot::grad_J(pr, zeta, eps).lpNorm<Eigen::Infinity>() >= min_grad) return zeta;
  }
  throw std::runtime_error("could not find a well scaled multiplier");
}

// Golden-section maximization of a scalar unimodal function on [lo, hi].
template <typename F>
double golden_max(F&& f, double lo, double hi, double tol = 1e-10) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// Discretized standard normal on a uniform grid, the shared oracle instance:
// features (y, y^2) with targets (0, sigma_y2).
inline Problem gaussian_grid_problem(double sigma_y2, Eigen::Index points = 401,
                                     double lo = -6.0, double hi = 6.0) {
  Matrix grid(points, 1);
  Vector w(points);
  for (Eigen::Index k = 0; k < points; ++k) {
    const double x = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
    grid(k, 0) = x;
    w[k] = std::exp(-0.5 * x * x);
  }
  DiscreteMeasure mu = DiscreteMeasure::normalized(grid, w);
  Matrix values(2, points);
  values.row(0) = grid.col(0).transpose();
  values.row(1) = grid.col(0).array().square().transpose();
  Vector targets(2);
  targets << 0.0, sigma_y2;
  return Problem(mu, mu, fpot::cost_matrix(fpot::half_squared_euclidean, mu, mu), values,
                 targets);
}

}  // namespace oracle
