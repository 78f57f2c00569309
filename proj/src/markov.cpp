#include "fpot/markov.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fpot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kIterateGuard = 1e8;

// exp(a - shift) with exact zeros where a = -inf; the vectorized exp maps
// -inf to a denormal otherwise.
Eigen::ArrayXd shifted_exp(const Eigen::ArrayXd& a, double shift) {
  return (a == -kInf).select(0.0, (a - shift).exp());
}

void check_lambda(const MarkovProblem& pr, const Vector& lambda) {
  if (lambda.size() != pr.steps() || !lambda.allFinite())
    throw std::invalid_argument("multiplier must be finite with one entry per step");
}

void check_path(const MarkovProblem& pr, const StatePath& x_path) {
  if (x_path.size() != pr.steps() + 1)
    throw std::invalid_argument("path length must be the step count plus one");
  for (Eigen::Index k = 0; k < x_path.size(); ++k)
    if (x_path[k] < 0 || x_path[k] >= pr.state_count())
      throw std::invalid_argument("path state index out of range");
}

// log of the tilted kernel for step k+1: log P[k] plus the arrival gain.
Matrix log_hat_kernel(const MarkovProblem& pr, const Vector& lambda,
                      const StatePath& x_path, Eigen::Index k) {
  const Eigen::Index s = pr.state_count();
  Vector gain(s);
  for (Eigen::Index y = 0; y < s; ++y) {
    const double dist2 = (pr.states.row(x_path[k + 1]) - pr.states.row(y)).squaredNorm();
    gain[y] = (lambda[k] * (pr.u[y] - pr.r[k]) - 0.5 * dist2) / pr.epsilon;
  }
  Matrix out = pr.P[k].array().log().matrix();
  out.rowwise() += gain.transpose();
  return out;
}

struct ChainLogs {
  std::vector<Matrix> log_hat;
  Matrix log_g;  // (steps+1) x S
};

ChainLogs chain_logs(const MarkovProblem& pr, const Vector& lambda,
                     const StatePath& x_path) {
  pr.validate();
  check_lambda(pr, lambda);
  check_path(pr, x_path);
  const Eigen::Index m = pr.steps();
  const Eigen::Index s = pr.state_count();
  ChainLogs out;
  out.log_hat.reserve(m);
  for (Eigen::Index k = 0; k < m; ++k)
    out.log_hat.push_back(log_hat_kernel(pr, lambda, x_path, k));
  out.log_g = Matrix::Zero(m + 1, s);
  for (Eigen::Index k = m - 1; k >= 0; --k) {
    for (Eigen::Index y = 0; y < s; ++y) {
      const Vector terms = out.log_hat[k].row(y).transpose() + out.log_g.row(k + 1).transpose();
      out.log_g(k, y) = log_sum_exp(terms);
    }
  }
  return out;
}

}  // namespace

void MarkovProblem::validate() const {
  const Eigen::Index s = state_count();
  const Eigen::Index m = steps();
  if (s == 0 || states.cols() == 0 || !states.allFinite())
    throw std::invalid_argument("states must be a nonempty finite coordinate table");
  if (nu0.size() != s || !nu0.allFinite() || nu0.minCoeff() < 0.0)
    throw std::invalid_argument("initial distribution must be nonnegative over the states");
  if (std::abs(nu0.sum() - 1.0) > 1e-12)
    throw std::invalid_argument("initial distribution must sum to one");
  if (m == 0 || static_cast<Eigen::Index>(P.size()) != m)
    throw std::invalid_argument("need one transition matrix per step");
  for (const Matrix& p : P) {
    if (p.rows() != s || p.cols() != s || !p.allFinite() || p.minCoeff() < 0.0)
      throw std::invalid_argument("transition matrices must be nonnegative and square");
    if ((p.rowwise().sum().array() - 1.0).abs().maxCoeff() > 1e-12)
      throw std::invalid_argument("transition rows must sum to one");
  }
  if (u.size() != s || !u.allFinite())
    throw std::invalid_argument("statistic must assign a finite value to every state");
  if (!r.allFinite()) throw std::invalid_argument("targets must be finite");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw std::invalid_argument("epsilon must be positive and finite");
}

std::vector<Matrix> hat_kernels(const MarkovProblem& pr, const Vector& lambda,
                                const StatePath& x_path) {
  pr.validate();
  check_lambda(pr, lambda);
  check_path(pr, x_path);
  std::vector<Matrix> out;
  out.reserve(pr.steps());
  for (Eigen::Index k = 0; k < pr.steps(); ++k) {
    const Matrix lh = log_hat_kernel(pr, lambda, x_path, k);
    Matrix h(lh.rows(), lh.cols());
    for (Eigen::Index y = 0; y < lh.rows(); ++y)
      h.row(y) = shifted_exp(lh.row(y).transpose().array(), 0.0).transpose();
    out.push_back(std::move(h));
  }
  return out;
}

BackwardResult backward_g(const MarkovProblem& pr, const Vector& lambda,
                          const StatePath& x_path) {
  const ChainLogs logs = chain_logs(pr, lambda, x_path);
  BackwardResult out;
  out.log_g = logs.log_g;
  const double log_g0 = logs.log_g(0, x_path[0]);
  if (!std::isfinite(log_g0))
    throw std::runtime_error("tilted chain assigns no mass to any path");
  out.b = pr.epsilon * log_g0;
  return out;
}

std::vector<Matrix> check_kernels(const MarkovProblem& pr, const Vector& lambda,
                                  const StatePath& x_path) {
  const ChainLogs logs = chain_logs(pr, lambda, x_path);
  const Eigen::Index s = pr.state_count();
  std::vector<Matrix> out;
  out.reserve(pr.steps());
  for (Eigen::Index k = 0; k < pr.steps(); ++k) {
    Matrix normalized(s, s);
    for (Eigen::Index y = 0; y < s; ++y) {
      if (!std::isfinite(logs.log_g(k, y)))
        throw std::runtime_error("conditioned chain undefined at a zero mass state");
      const Eigen::ArrayXd logits =
          (logs.log_hat[k].row(y).transpose() + logs.log_g.row(k + 1).transpose()).array();
      const Eigen::ArrayXd e = shifted_exp(logits, logits.maxCoeff());
      normalized.row(y) = (e / e.sum()).transpose();
    }
    out.push_back(std::move(normalized));
  }
  return out;
}

ForwardResult forward_marginals(const MarkovProblem& pr, const Vector& lambda,
                                const StatePath& x_path) {
  const std::vector<Matrix> kernels = check_kernels(pr, lambda, x_path);
  const Eigen::Index m = pr.steps();
  const Eigen::Index s = pr.state_count();
  ForwardResult out;
  out.nu.resize(m, s);
  out.m_tilde.resize(m);
  Vector current = Vector::Zero(s);
  current[x_path[0]] = 1.0;
  for (Eigen::Index k = 0; k < m; ++k) {
    current = kernels[k].transpose() * current;
    out.nu.row(k) = current.transpose();
    out.m_tilde[k] = pr.u.dot(current) - pr.r[k];
  }
  return out;
}

StatePath sample_nominal_path(const MarkovProblem& pr, Rng& rng) {
  StatePath path(pr.steps() + 1);
  path[0] = static_cast<int>(sample_index(pr.nu0, rng));
  for (Eigen::Index k = 0; k < pr.steps(); ++k)
    path[k + 1] = static_cast<int>(sample_index(pr.P[k].row(path[k]).transpose(), rng));
  return path;
}

TrackingReport tracking_solve(const MarkovProblem& pr, const Penalty* penalty,
                              const TrackingOptions& opts) {
  pr.validate();
  if (!(opts.a >= 0.0) || !std::isfinite(opts.a))
    throw std::invalid_argument("step scale must be nonnegative and finite");
  if (!(opts.n0 > 0.0) || !std::isfinite(opts.n0))
    throw std::invalid_argument("step offset must be positive and finite");
  if (opts.iterations < 1) throw std::invalid_argument("need at least one iteration");
  if (opts.eval_paths < 1) throw std::invalid_argument("need at least one evaluation path");
  const Eigen::Index m = pr.steps();
  if (opts.zeta0.size() != 0 && opts.zeta0.size() != m)
    throw std::invalid_argument("start iterate must match the step count");

  Vector zeta = opts.zeta0.size() == 0 ? Vector::Zero(m) : opts.zeta0;
  Rng rng(opts.seed);
  TrackingReport report;
  SATrace& tr = report.trace;
  tr.seed = opts.seed;
  tr.zeta.resize(opts.iterations + 1, m);
  tr.m_tilde.resize(opts.iterations, m);
  tr.zeta.row(0) = zeta.transpose();

  long done = 0;
  for (long n = 0; n < opts.iterations; ++n) {
    const double alpha = opts.a / (static_cast<double>(n) + 1.0 + opts.n0);
    const StatePath path = sample_nominal_path(pr, rng);
    const Vector lambda = pr.epsilon * zeta;
    const ForwardResult fw = forward_marginals(pr, lambda, path);
    Vector step = fw.m_tilde;
    if (penalty != nullptr) step += penalty->dual_penalty_grad(lambda);
    zeta -= alpha * step;
    tr.m_tilde.row(n) = fw.m_tilde.transpose();
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

  report.lambda_final = pr.epsilon * tr.zeta_averaged;
  Vector mean_u = Vector::Zero(m);
  for (long t = 0; t < opts.eval_paths; ++t) {
    const StatePath path = sample_nominal_path(pr, rng);
    const ForwardResult fw = forward_marginals(pr, report.lambda_final, path);
    mean_u += fw.nu * pr.u;
  }
  mean_u /= static_cast<double>(opts.eval_paths);
  report.achieved = mean_u;
  report.error = (mean_u - pr.r).cwiseAbs();
  report.max_error = report.error.lpNorm<Eigen::Infinity>();
  return report;
}

}  // namespace fpot
