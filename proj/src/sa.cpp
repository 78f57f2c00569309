#include "fpot/sa.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <stdexcept>

namespace fpot {

namespace {

constexpr double kIterateGuard = 1e8;
constexpr double kZapRidge = 1e-8;

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void check_args(const Problem& pr, const Vector& lambda, double epsilon, Eigen::Index i) {
  require(lambda.size() == pr.feature_count(), "multiplier length must match feature count");
  require(lambda.allFinite(), "multiplier must be finite");
  require(epsilon > 0.0, "epsilon must be positive");
  require(i >= 0 && i < pr.source_size(), "index out of range");
}

void check_options(const SAOptions& opts, const Problem& pr) {
  require(opts.a >= 0.0 && std::isfinite(opts.a), "step scale must be nonnegative");
  require(opts.n0 > 0.0, "step offset must be positive");
  require(opts.beta_exponent > 0.0 && opts.beta_exponent < 1.0,
          "beta exponent must lie in (0, 1)");
  require(opts.beta_scale >= 0.0, "beta scale must be nonnegative");
  require(opts.horizon >= 1, "horizon must be positive");
  require(opts.zeta0.size() == 0 || opts.zeta0.size() == pr.feature_count(),
          "initial point length must match feature count");
  if (opts.estimator == Estimator::kSplit)
    require(opts.split_k >= 2, "split estimator needs at least two samples");
}

MomentEstimate estimate_from_row(const Problem& pr, const Vector& row, const SAOptions& opts,
                                 Rng& rng) {
  if (opts.estimator == Estimator::kConditional) {
    MomentEstimate est;
    est.m_tilde = pr.residuals2() * row;
    const Vector mean_f = pr.features2() * row;
    est.sigma_tilde = pr.features2() * row.asDiagonal() * pr.features2().transpose()
                      - mean_f * mean_f.transpose();
    return est;
  }
  const int k = opts.split_k;
  const Eigen::Index m = pr.feature_count();
  Vector sum_res = Vector::Zero(m);
  Vector sum_f = Vector::Zero(m);
  Matrix sum_ff = Matrix::Zero(m, m);
  for (int s = 0; s < k; ++s) {
    const Eigen::Index j = sample_index(row, rng);
    sum_res += pr.residuals2().col(j);
    const Vector f = pr.features2().col(j);
    sum_f += f;
    sum_ff += f * f.transpose();
  }
  MomentEstimate est;
  est.m_tilde = sum_res / k;
  est.sigma_tilde = sum_ff / k
                    - (sum_f * sum_f.transpose() - sum_ff) / (double(k) * (k - 1));
  return est;
}

SATrace sa_solve(const Problem& pr, double epsilon, const Penalty* penalty,
                 const SAOptions& opts, bool zap) {
  check_options(opts, pr);
  require(epsilon > 0.0 && std::isfinite(epsilon), "epsilon must be positive");

  const Eigen::Index m = pr.feature_count();
  Vector zeta = opts.zeta0.size() ? opts.zeta0 : Vector::Zero(m);
  Rng rng(opts.seed);
  Matrix sigma_bar = Matrix::Identity(m, m);
  const Matrix id = Matrix::Identity(m, m);

  SATrace tr;
  tr.seed = opts.seed;
  tr.zeta.resize(opts.horizon + 1, m);
  tr.m_tilde.resize(opts.horizon, m);
  tr.zeta.row(0) = zeta.transpose();

  long done = 0;
  for (long n = 0; n < opts.horizon; ++n) {
    const double t = static_cast<double>(n + 1) + opts.n0;
    const double alpha = opts.a / t;

    const Eigen::Index i = sample_index(pr.mu1().weights(), rng);
    const Vector lambda = epsilon * zeta;
    const Vector row = kernel_row(pr, lambda, epsilon, i);
    const MomentEstimate est = estimate_from_row(pr, row, opts, rng);

    Vector drift = est.m_tilde;
    if (penalty) drift += penalty->dual_penalty_grad(lambda);

    Vector step = drift;
    if (zap) {
      const double beta = opts.beta_scale * std::pow(t, -opts.beta_exponent);
      const Matrix sym = 0.5 * (est.sigma_tilde + est.sigma_tilde.transpose());
      sigma_bar += beta * (sym - sigma_bar);
      Eigen::LDLT<Matrix> ldlt(sigma_bar);
      step = ldlt.solve(drift);
      if (ldlt.info() != Eigen::Success || !step.allFinite()
          || ldlt.vectorD().cwiseAbs().minCoeff() <= kZapRidge) {
        ldlt.compute(sigma_bar + kZapRidge * id);
        step = ldlt.solve(drift);
        if (!step.allFinite()) step = drift;
      }
    }

    zeta -= alpha * step;
    tr.m_tilde.row(n) = est.m_tilde.transpose();
    tr.zeta.row(n + 1) = zeta.transpose();
    done = n + 1;
    if (!zeta.allFinite() || zeta.lpNorm<Eigen::Infinity>() > kIterateGuard) {
      tr.diverged = true;
      break;
    }
  }

  tr.iterations = done;
  tr.zeta.conservativeResize(done + 1, m);
  tr.m_tilde.conservativeResize(done, m);
  tr.zeta_final = tr.zeta.row(done).transpose();
  const long half = (done + 1) / 2;
  tr.zeta_averaged = tr.zeta.middleRows(done - half + 1, half).colwise().mean().transpose();
  if (zap) tr.sigma_bar_final = sigma_bar;
  return tr;
}

}  // namespace

Eigen::Index sample_index(const Vector& weights, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  Eigen::Index last_positive = 0;
  for (Eigen::Index j = 0; j < weights.size(); ++j) {
    if (weights[j] <= 0.0) continue;
    last_positive = j;
    acc += weights[j];
    if (u < acc) return j;
  }
  return last_positive;
}

Eigen::Index sample_from_kernel(const Problem& pr, const Vector& lambda, double epsilon,
                                Eigen::Index i, Rng& rng) {
  check_args(pr, lambda, epsilon, i);
  return sample_index(kernel_row(pr, lambda, epsilon, i), rng);
}

MomentEstimate estimator_conditional(const Problem& pr, const Vector& lambda, double epsilon,
                                     Eigen::Index i) {
  check_args(pr, lambda, epsilon, i);
  SAOptions opts;
  opts.estimator = Estimator::kConditional;
  Rng unused(0);
  return estimate_from_row(pr, kernel_row(pr, lambda, epsilon, i), opts, unused);
}

MomentEstimate estimator_split(const Problem& pr, const Vector& lambda, double epsilon,
                               Eigen::Index i, int k, Rng& rng) {
  check_args(pr, lambda, epsilon, i);
  require(k >= 2, "split estimator needs at least two samples");
  SAOptions opts;
  opts.estimator = Estimator::kSplit;
  opts.split_k = k;
  return estimate_from_row(pr, kernel_row(pr, lambda, epsilon, i), opts, rng);
}

SATrace sgd_solve(const Problem& pr, double epsilon, const Penalty* penalty,
                  const SAOptions& opts) {
  return sa_solve(pr, epsilon, penalty, opts, false);
}

SATrace zap_solve(const Problem& pr, double epsilon, const Penalty* penalty,
                  const SAOptions& opts) {
  return sa_solve(pr, epsilon, penalty, opts, true);
}

}  // namespace fpot
