#include "fpot/solve.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <stdexcept>
#include <utility>

namespace fpot {

namespace {

constexpr double kDivergenceGuard = 1e6;
constexpr double kGapTolScale = 1e-8;
constexpr int kMaxBacktracks = 60;

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void check_options(const SolveOptions& opts) {
  require(opts.grad_tol > 0.0 && opts.max_iters > 0 && opts.hessian_ridge > 0.0
              && opts.backtrack_factor > 0.0 && opts.backtrack_factor < 1.0
              && opts.armijo_constant > 0.0 && opts.armijo_constant < 1.0
              && opts.workers > 0,
          "solver options must be positive");
}

// Scaled objective G(zeta) = <mu1, B>/eps + R*(-eps zeta)/eps, minimized over
// zeta = lambda/eps. The reported dual objective is -eps G.
struct Objective {
  const Problem& pr;
  double eps;
  const Penalty* penalty;
  int workers;

  double value(const DualState& st) const {
    double v = pr.mu1().weights().dot(st.B) / eps;
    if (penalty) v += penalty->conjugate(-st.lambda) / eps;
    return v;
  }

  double dual_value(const DualState& st) const {
    double v = -pr.mu1().weights().dot(st.B);
    if (penalty) v -= penalty->conjugate(-st.lambda);
    return v;
  }

  Vector gradient(const Vector& moment_gap, const DualState& st) const {
    if (!penalty) return moment_gap;
    return moment_gap + penalty->dual_penalty_grad(st.lambda);
  }

  Matrix hessian(const DualState& st) const {
    Matrix h = state_feature_covariance(pr, st);
    if (penalty) h += eps * penalty->dual_penalty_hess(st.lambda);
    return h;
  }
};

// Ridge-regularized Newton direction; escalates the ridge until the solve
// yields a finite descent direction, otherwise falls back to the gradient.
Vector newton_direction(const Matrix& h, const Vector& g, double ridge0) {
  const double scale = 1.0 + h.diagonal().cwiseAbs().maxCoeff();
  const Matrix id = Matrix::Identity(h.rows(), h.cols());
  for (double ridge = ridge0; ridge <= 1e6 * scale; ridge *= 100.0) {
    Eigen::LDLT<Matrix> ldlt(h + ridge * id);
    if (ldlt.info() != Eigen::Success) continue;
    Vector p = ldlt.solve(-g);
    if (p.allFinite() && g.dot(p) < 0.0) return p;
  }
  return -g;
}

SolveReport newton_solve(const Problem& pr, double eps, const Penalty* penalty,
                         const SolveOptions& opts, Vector zeta) {
  check_options(opts);
  require(eps > 0.0 && std::isfinite(eps), "epsilon must be positive");

  const Objective obj{pr, eps, penalty, opts.workers};
  DualState st = evaluate_dual(pr, eps * zeta, eps, opts.workers);
  double value = obj.value(st);
  Vector moment_gap = state_moment_gap(pr, st);

  SolveReport rep;
  rep.epsilon = eps;
  int iter = 0;
  for (;; ++iter) {
    const Vector g = obj.gradient(moment_gap, st);
    rep.trace.push_back({obj.dual_value(st), g.norm()});

    if (!penalty && st.lambda.lpNorm<Eigen::Infinity>() > kDivergenceGuard) {
      rep.status = SolveStatus::kDiverged;
      rep.message = "multiplier exceeded 1e6, moment class likely infeasible";
      break;
    }
    if (g.norm() <= opts.grad_tol) {
      // the unpenalized gap is lambda . m; demand it small relative to the
      // dual value so the reported gap certificate holds
      const double gap_est = penalty ? 0.0 : st.lambda.dot(moment_gap);
      if (penalty || gap_est <= kGapTolScale * (1.0 + std::abs(obj.dual_value(st)))) {
        rep.status = SolveStatus::kConverged;
        break;
      }
    }
    if (iter >= opts.max_iters) {
      rep.status = SolveStatus::kIterLimit;
      rep.message = "iteration limit reached";
      break;
    }

    Vector p = newton_direction(obj.hessian(st), g, opts.hessian_ridge);
    bool accepted = false;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      if (attempt == 1) p = -g;
      const double slope = g.dot(p);
      double t = 1.0;
      for (int b = 0; b < kMaxBacktracks; ++b, t *= opts.backtrack_factor) {
        const Vector trial = zeta + t * p;
        DualState ts = evaluate_dual(pr, eps * trial, eps, opts.workers);
        const double tv = obj.value(ts);
        if (tv <= value + opts.armijo_constant * t * slope) {
          zeta = trial;
          st = std::move(ts);
          value = tv;
          moment_gap = state_moment_gap(pr, st);
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) {
      rep.status = SolveStatus::kIterLimit;
      rep.message = "line search made no progress";
      break;
    }
  }

  rep.lambda_star = st.lambda;
  rep.moment_residual = moment_gap;
  rep.transport_cost = state_transport_cost(pr, st);
  rep.entropy = state_entropy(pr, st);
  rep.dual_value = obj.dual_value(st);
  rep.primal_value = rep.transport_cost + eps * rep.entropy
                     + (penalty ? penalty->value(moment_gap) : 0.0);
  rep.gap = rep.primal_value - rep.dual_value;
  rep.iterations = iter;
  return rep;
}

}  // namespace

SolveReport solve_fpr(const Problem& pr, double epsilon, const SolveOptions& opts) {
  return newton_solve(pr, epsilon, nullptr, opts, Vector::Zero(pr.feature_count()));
}

SolveReport solve_fprp(const Problem& pr, double epsilon, const Penalty& penalty,
                       const SolveOptions& opts) {
  return newton_solve(pr, epsilon, &penalty, opts, Vector::Zero(pr.feature_count()));
}

ContinuationReport continuation_fp(const Problem& pr, const ContinuationSchedule& schedule,
                                   const SolveOptions& opts) {
  require(schedule.eps0 > 0.0 && schedule.rho > 0.0 && schedule.rho < 1.0
              && schedule.eps_min > 0.0 && schedule.eps_min <= schedule.eps0,
          "continuation schedule must decrease to a positive floor");

  std::vector<double> stages;
  for (double e = schedule.eps0; e > schedule.eps_min; e *= schedule.rho) stages.push_back(e);
  stages.push_back(schedule.eps_min);

  ContinuationReport rep;
  rep.completed = true;
  Vector lambda = Vector::Zero(pr.feature_count());
  for (double e : stages) {
    rep.stages.push_back(newton_solve(pr, e, nullptr, opts, lambda / e));
    if (!rep.stages.back().converged()) {
      rep.completed = false;
      break;
    }
    lambda = rep.stages.back().lambda_star;
  }
  rep.lambda_final = lambda;
  rep.dual_fp_final = dual_value_fp(pr, lambda);
  return rep;
}

SlacknessReport complementary_slackness_check(const Problem& pr, const Vector& lambda,
                                              const Coupling& coupling, double tol) {
  require(lambda.size() == pr.feature_count(), "multiplier length must match feature count");
  require(lambda.allFinite(), "multiplier must be finite");
  require(coupling.gamma.rows() == pr.source_size()
              && coupling.gamma.cols() == pr.target_size(),
          "coupling shape must match the problem supports");
  require(tol >= 0.0, "mass threshold must be nonnegative");
  const Vector row_mass = coupling.gamma.rowwise().sum();
  require((row_mass - pr.mu1().weights()).lpNorm<Eigen::Infinity>() <= 1e-8,
          "coupling first marginal must match the source measure");

  const Vector tilt = pr.residuals2().transpose() * lambda;
  SlacknessReport out;
  for (Eigen::Index i = 0; i < pr.source_size(); ++i) {
    const double psi = (pr.cost().row(i).transpose() - tilt).minCoeff();
    for (Eigen::Index j = 0; j < pr.target_size(); ++j) {
      if (coupling.gamma(i, j) <= tol) continue;
      ++out.cells_checked;
      const double slack = pr.cost()(i, j) - tilt[j] - psi;
      if (slack > out.max_violation) {
        out.max_violation = slack;
        out.worst_row = i;
        out.worst_col = j;
      }
    }
  }
  return out;
}

}  // namespace fpot
