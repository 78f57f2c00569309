#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fpot/sa.hpp"
#include "fpot/solve.hpp"
#include "oracle_helpers.hpp"

using namespace fpot;

namespace {

Matrix col(std::initializer_list<double> xs) {
  Matrix m(static_cast<Eigen::Index>(xs.size()), 1);
  Eigen::Index k = 0;
  for (double x : xs) m(k++, 0) = x;
  return m;
}

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index k = 0;
  for (double x : xs) v[k++] = x;
  return v;
}

Problem single_target_problem(double y, double r) {
  DiscreteMeasure mu1(col({0.0}), vec({1.0}));
  DiscreteMeasure mu2(col({y}), vec({1.0}));
  Matrix values(1, 1);
  values << y;
  return Problem(mu1, mu2, cost_matrix(half_squared_euclidean, mu1, mu2), values, vec({r}));
}

// Constant cost: the kernel row equals the target weights at any multiplier.
Problem flat_problem(const Vector& w) {
  Matrix pts(w.size(), 1);
  for (Eigen::Index j = 0; j < w.size(); ++j) pts(j, 0) = static_cast<double>(j);
  DiscreteMeasure mu1(col({0.0}), vec({1.0}));
  DiscreteMeasure mu2(pts, w);
  Matrix values = Matrix::Zero(1, w.size());
  return Problem(mu1, mu2, cost_matrix([](const Point&, const Point&) { return 1.0; }, mu1, mu2),
                 values, vec({0.0}));
}

// First recorded step at which the exact moment residual drops below tol.
long first_passage(const Problem& pr, const SATrace& tr, double eps, double tol, long stride) {
  for (long n = stride; n <= tr.iterations; n += stride) {
    const Vector zeta = tr.zeta.row(n).transpose();
    if (grad_J(pr, zeta, eps).norm() <= tol) return n;
  }
  return tr.iterations + 1;
}

}  // namespace

TEST_CASE("sample_index respects the support order and the weights") {
  Rng rng(1);
  Vector degenerate = vec({0.0, 1.0, 0.0});
  for (int t = 0; t < 50; ++t) CHECK(sample_index(degenerate, rng) == 1);

  Vector w = vec({0.2, 0.5, 0.3});
  Eigen::Vector3d counts = Eigen::Vector3d::Zero();
  const int n = 100000;
  for (int t = 0; t < n; ++t) counts[sample_index(w, rng)] += 1.0;
  for (int j = 0; j < 3; ++j) {
    const double freq = counts[j] / n;
    const double sigma = std::sqrt(w[j] * (1.0 - w[j]) / n);
    CHECK(std::abs(freq - w[j]) <= 3.0 * sigma);
  }
}

TEST_CASE("kernel sampling matches the kernel row") {
  Problem single = single_target_problem(0.4, 0.1);
  Rng rng(2);
  for (int t = 0; t < 20; ++t)
    CHECK(sample_from_kernel(single, vec({0.3}), 1.0, 0, rng) == 0);

  // constant cost at lambda = 0: draws follow the target weights
  Problem flat = flat_problem(vec({0.1, 0.6, 0.3}));
  Eigen::Vector3d counts = Eigen::Vector3d::Zero();
  const int n = 100000;
  for (int t = 0; t < n; ++t) counts[sample_from_kernel(flat, vec({0.0}), 1.0, 0, rng)] += 1.0;
  const Vector w = flat.mu2().weights();
  for (int j = 0; j < 3; ++j) {
    const double sigma = std::sqrt(w[j] * (1.0 - w[j]) / n);
    CHECK(std::abs(counts[j] / n - w[j]) <= 3.0 * sigma);
  }

  // identical generator states give identical draws
  Rng a(77), b(77);
  Problem pr = oracle::random_problem(a, 2, 2, 4, 7);
  Rng a2(5), b2(5);
  for (int t = 0; t < 100; ++t)
    CHECK(sample_from_kernel(pr, vec({0.2, -0.1}), 0.5, 1, a2)
          == sample_from_kernel(pr, vec({0.2, -0.1}), 0.5, 1, b2));
}

TEST_CASE("conditional estimator averages to the exact calculus") {
  Rng rng(11);
  Problem pr = oracle::random_problem(rng, 2, 3, 6, 9);
  const double eps = 0.6;
  const Vector zeta = oracle::random_vector(rng, 3, -1.0, 1.0);
  const Vector lambda = eps * zeta;

  Vector mean_m = Vector::Zero(3);
  Matrix mean_s = Matrix::Zero(3, 3);
  for (Eigen::Index i = 0; i < pr.source_size(); ++i) {
    MomentEstimate est = estimator_conditional(pr, lambda, eps, i);
    mean_m += pr.mu1().weights()[i] * est.m_tilde;
    mean_s += pr.mu1().weights()[i] * est.sigma_tilde;
  }
  CHECK((mean_m - grad_J(pr, zeta, eps)).lpNorm<Eigen::Infinity>() <= 1e-12);
  CHECK((mean_s - hessian_J(pr, zeta, eps)).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("conditional estimator degenerates cleanly") {
  Problem pr = single_target_problem(0.8, 0.3);
  MomentEstimate est = estimator_conditional(pr, vec({0.4}), 0.7, 0);
  CHECK(est.m_tilde[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(est.sigma_tilde.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("split estimator is unbiased and symmetric") {
  Rng rng(13);
  Problem pr = oracle::random_problem(rng, 2, 2, 5, 8);
  const double eps = 0.8;
  const Vector lambda = vec({0.3, -0.2});
  const int k = 3, n = 100000;

  Vector mean_m = Vector::Zero(2);
  Matrix mean_s = Matrix::Zero(2, 2);
  Matrix mean_sq_m = Matrix::Zero(2, 1);
  Rng draw(17);
  for (int t = 0; t < n; ++t) {
    const Eigen::Index i = sample_index(pr.mu1().weights(), draw);
    MomentEstimate est = estimator_split(pr, lambda, eps, i, k, draw);
    CHECK((est.sigma_tilde - est.sigma_tilde.transpose()).lpNorm<Eigen::Infinity>() <= 1e-12);
    mean_m += est.m_tilde;
    mean_s += est.sigma_tilde;
    mean_sq_m += est.m_tilde.cwiseAbs2();
  }
  mean_m /= n;
  mean_s /= n;

  const Vector zeta = lambda / eps;
  const Vector exact_m = grad_J(pr, zeta, eps);
  for (int j = 0; j < 2; ++j) {
    const double var = mean_sq_m(j, 0) / n - mean_m[j] * mean_m[j];
    const double se = std::sqrt(std::max(var, 0.0) / n);
    CHECK(std::abs(mean_m[j] - exact_m[j]) <= 3.0 * se + 1e-12);
  }
  const Matrix exact_s = hessian_J(pr, zeta, eps);
  CHECK((mean_s - exact_s).norm() / exact_s.norm() <= 0.01);
}

TEST_CASE("split estimator cross term matches the conditional mean outer product") {
  Rng rng(19);
  Problem pr = oracle::random_problem(rng, 1, 2, 4, 6);
  const double eps = 0.5;
  const Vector lambda = vec({0.2, 0.1});
  const int k = 2, n = 100000;

  // cross = raw second moment minus the split covariance estimate
  Matrix mean_cross = Matrix::Zero(2, 2);
  Matrix exact_cross = Matrix::Zero(2, 2);
  for (Eigen::Index i = 0; i < pr.source_size(); ++i) {
    const Vector row = kernel_row(pr, lambda, eps, i);
    const Vector ef = pr.features2() * row;
    exact_cross += pr.mu1().weights()[i] * ef * ef.transpose();
  }
  Rng draw(23);
  for (int t = 0; t < n; ++t) {
    const Eigen::Index i = sample_index(pr.mu1().weights(), draw);
    MomentEstimate est = estimator_split(pr, lambda, eps, i, k, draw);
    const Vector row = kernel_row(pr, lambda, eps, i);
    const Matrix raw = pr.features2() * row.asDiagonal() * pr.features2().transpose();
    mean_cross += raw - est.sigma_tilde;
  }
  mean_cross /= n;
  CHECK((mean_cross - exact_cross).lpNorm<Eigen::Infinity>() <= 0.02);
}

TEST_CASE("split estimator validates the sample count") {
  Problem pr = single_target_problem(0.8, 0.3);
  Rng rng(1);
  CHECK_THROWS_AS(estimator_split(pr, vec({0.0}), 1.0, 0, 1, rng), std::invalid_argument);
  MomentEstimate est = estimator_split(pr, vec({0.0}), 1.0, 0, 2, rng);
  CHECK(est.sigma_tilde.lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(est.m_tilde[0] == doctest::Approx(0.5));
}

TEST_CASE("penalized recursion finds the scalar root") {
  // residual is constant 0.5; kappa = 2, eps = 0.7 puts the root at zeta = -10/7
  Problem pr = single_target_problem(0.8, 0.3);
  QuadraticPenalty penalty(2.0);
  SAOptions opts;
  opts.a = 20.0;
  opts.horizon = 20000;
  opts.seed = 3;
  SATrace tr = sgd_solve(pr, 0.7, &penalty, opts);
  CHECK(!tr.diverged);
  CHECK(std::abs(tr.zeta_final[0] - (-10.0 / 7.0)) <= 1e-3);
  CHECK(std::abs(tr.zeta_averaged[0] - (-10.0 / 7.0)) <= 1e-3);
}

TEST_CASE("plain recursion tracks the Newton solution on a feasible instance") {
  Rng rng(29);
  Problem pr = oracle::random_problem(rng, 2, 2, 5, 9);
  const double eps = 0.5;
  SolveOptions newton;
  newton.grad_tol = 1e-12;
  SolveReport exact = solve_fpr(pr, eps, newton);
  REQUIRE(exact.converged());
  const Vector zeta_star = exact.lambda_star / eps;

  // smallest curvature eigenvalue at the solution is 0.039, so the step scale
  // must exceed its reciprocal fraction for the bias to decay within budget
  SAOptions opts;
  opts.a = 20.0;
  opts.horizon = 50000;
  opts.seed = 31;
  SATrace tr = sgd_solve(pr, eps, nullptr, opts);
  CHECK(!tr.diverged);
  CHECK((tr.zeta_averaged - zeta_star).norm() <= 0.05 * (1.0 + zeta_star.norm()));
}

TEST_CASE("zero step scale freezes the iterate") {
  Rng rng(37);
  Problem pr = oracle::random_problem(rng, 2, 2, 4, 7);
  SAOptions opts;
  opts.a = 0.0;
  opts.horizon = 200;
  opts.zeta0 = vec({0.4, -0.7});
  SATrace tr = sgd_solve(pr, 1.0, nullptr, opts);
  CHECK(tr.iterations == 200);
  for (long n = 0; n <= tr.iterations; ++n)
    CHECK((tr.zeta.row(n).transpose() - opts.zeta0).lpNorm<Eigen::Infinity>() == 0.0);
  // the average is a summed reduction, so allow one rounding step
  CHECK((tr.zeta_averaged - opts.zeta0).lpNorm<Eigen::Infinity>() <= 1e-15);
}

TEST_CASE("oversized steps trip the iterate guard") {
  Rng rng(41);
  Problem pr = oracle::random_problem(rng, 2, 2, 4, 7);
  SAOptions opts;
  opts.a = 1e12;
  opts.horizon = 1000;
  SATrace tr = sgd_solve(pr, 0.5, nullptr, opts);
  CHECK(tr.diverged);
  CHECK(tr.iterations < 1000);
  CHECK(tr.zeta.rows() == tr.iterations + 1);
  CHECK(tr.m_tilde.rows() == tr.iterations);
}

TEST_CASE("zero beta scale reduces zap to the plain recursion") {
  Rng rng(43);
  Problem pr = oracle::random_problem(rng, 2, 2, 5, 8);
  SAOptions opts;
  opts.horizon = 500;
  opts.seed = 47;
  opts.beta_scale = 0.0;
  SATrace plain = sgd_solve(pr, 0.6, nullptr, opts);
  SATrace zap = zap_solve(pr, 0.6, nullptr, opts);
  CHECK((Matrix(plain.zeta) - Matrix(zap.zeta)).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((zap.sigma_bar_final - Matrix::Identity(2, 2)).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("frozen iterate drives the curvature matrix to the fixed estimate") {
  // single source atom and a = 0: the conditional estimate is one fixed matrix
  Rng rng(53);
  Problem pr = oracle::random_problem(rng, 2, 2, 1, 9);
  const double eps = 0.8;
  SAOptions opts;
  opts.a = 0.0;
  opts.horizon = 2000;
  opts.zeta0 = vec({0.2, -0.3});
  SATrace tr = zap_solve(pr, eps, nullptr, opts);
  const Matrix target = hessian_J(pr, opts.zeta0, eps);
  CHECK((tr.sigma_bar_final - target).norm() <= 5e-3);
  CHECK((tr.sigma_bar_final - tr.sigma_bar_final.transpose()).lpNorm<Eigen::Infinity>()
        <= 1e-12);
}

TEST_CASE("vanishing curvature estimates trigger the ridge and then the guard") {
  // single target atom: conditional covariance is exactly zero, so the tracked
  // matrix decays until the ridged inverse amplifies the constant residual
  Problem pr = single_target_problem(0.8, 0.3);
  SAOptions opts;
  opts.a = 100.0;
  opts.horizon = 200000;
  SATrace tr = zap_solve(pr, 1.0, nullptr, opts);
  CHECK(tr.diverged);
  CHECK(tr.zeta_final.lpNorm<Eigen::Infinity>() > 1e8);
}

TEST_CASE("identical seeds reproduce traces bit for bit") {
  Rng rng(59);
  Problem pr = oracle::random_problem(rng, 2, 2, 5, 8);
  SAOptions opts;
  opts.horizon = 300;
  opts.seed = 61;
  opts.estimator = Estimator::kSplit;
  opts.split_k = 3;
  SATrace a = zap_solve(pr, 0.5, nullptr, opts);
  SATrace b = zap_solve(pr, 0.5, nullptr, opts);
  CHECK((Matrix(a.zeta) - Matrix(b.zeta)).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((Matrix(a.m_tilde) - Matrix(b.m_tilde)).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((a.sigma_bar_final - b.sigma_bar_final).lpNorm<Eigen::Infinity>() == 0.0);

  opts.seed = 62;
  SATrace c = zap_solve(pr, 0.5, nullptr, opts);
  CHECK((Matrix(a.zeta) - Matrix(c.zeta)).lpNorm<Eigen::Infinity>() > 0.0);
}

TEST_CASE("zap reaches a small residual before the plain recursion") {
  Problem pr = oracle::gaussian_grid_problem(0.6, 81);
  const double eps = 1.0;
  std::vector<long> sgd_hits, zap_hits;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SAOptions opts;
    opts.horizon = 20000;
    opts.seed = seed;
    SATrace s = sgd_solve(pr, eps, nullptr, opts);
    SATrace z = zap_solve(pr, eps, nullptr, opts);
    sgd_hits.push_back(first_passage(pr, s, eps, 1e-2, 100));
    zap_hits.push_back(first_passage(pr, z, eps, 1e-2, 100));
  }
  std::sort(sgd_hits.begin(), sgd_hits.end());
  std::sort(zap_hits.begin(), zap_hits.end());
  const long sgd_median = (sgd_hits[4] + sgd_hits[5]) / 2;
  const long zap_median = (zap_hits[4] + zap_hits[5]) / 2;
  CHECK(zap_median < sgd_median);
  CHECK(zap_median <= 20000);
}

TEST_CASE("stochastic options are validated") {
  Problem pr = single_target_problem(0.8, 0.3);
  SAOptions opts;
  opts.n0 = 0.0;
  CHECK_THROWS_AS(sgd_solve(pr, 1.0, nullptr, opts), std::invalid_argument);
  opts = SAOptions{};
  opts.beta_exponent = 1.0;
  CHECK_THROWS_AS(zap_solve(pr, 1.0, nullptr, opts), std::invalid_argument);
  opts = SAOptions{};
  opts.horizon = 0;
  CHECK_THROWS_AS(sgd_solve(pr, 1.0, nullptr, opts), std::invalid_argument);
  opts = SAOptions{};
  opts.estimator = Estimator::kSplit;
  opts.split_k = 1;
  CHECK_THROWS_AS(sgd_solve(pr, 1.0, nullptr, opts), std::invalid_argument);
  opts = SAOptions{};
  opts.zeta0 = vec({1.0, 2.0});
  CHECK_THROWS_AS(sgd_solve(pr, 1.0, nullptr, opts), std::invalid_argument);
}
