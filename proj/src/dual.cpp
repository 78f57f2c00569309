#include "fpot/dual.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>
#include <vector>

namespace fpot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void check_eval_args(const Problem& pr, const Vector& lambda, double epsilon) {
  require(lambda.size() == pr.feature_count(), "multiplier length must match feature count");
  require(lambda.allFinite(), "multiplier must be finite");
  require(epsilon > 0.0, "epsilon must be positive");
}

// Exponent vector for row i: a_j = (tilt_j - c_ij)/eps + log w2_j.
Eigen::ArrayXd row_exponents(const Problem& pr, const Vector& tilt, double epsilon,
                             Eigen::Index i) {
  return (tilt.transpose().array() - pr.cost().row(i).array()) / epsilon
         + pr.mu2().log_weights().transpose().array();
}

// exp(a - shift) with exact zeros where a = -inf (zero-weight atoms); the
// vectorized exp maps -inf to a denormal otherwise.
Eigen::ArrayXd shifted_exp(const Eigen::ArrayXd& a, double shift) {
  return (a == -kInf).select(0.0, (a - shift).exp());
}

// log sum_j exp(a_j) with max shift; mu2 has at least one positive weight, so
// the shift is always finite.
double row_log_normalizer(const Eigen::ArrayXd& a) {
  const double shift = a.maxCoeff();
  return shift + std::log(shifted_exp(a, shift).sum());
}

// Computes row i of T in place and returns the row's log normalizer.
double fill_kernel_row(const Problem& pr, const Vector& tilt, double epsilon, Eigen::Index i,
                       Eigen::Ref<Eigen::RowVectorXd> row) {
  const Eigen::ArrayXd a = row_exponents(pr, tilt, epsilon, i);
  const double shift = a.maxCoeff();
  const Eigen::ArrayXd e = shifted_exp(a, shift);
  const double total = e.sum();
  row = (e / total).matrix().transpose();
  return shift + std::log(total);
}

void for_each_row(Eigen::Index n, int workers, const std::function<void(Eigen::Index)>& fn) {
  if (workers <= 1 || n < 2) {
    for (Eigen::Index i = 0; i < n; ++i) fn(i);
    return;
  }
  const int used = static_cast<int>(std::min<Eigen::Index>(workers, n));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(used));
  for (int w = 0; w < used; ++w) {
    pool.emplace_back([&, w] {
      for (Eigen::Index i = w; i < n; i += used) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

Problem::Problem(DiscreteMeasure mu1, DiscreteMeasure mu2, CostMatrix cost,
                 const FeatureSystem& feats)
    : mu1_(std::move(mu1)),
      mu2_(std::move(mu2)),
      cost_(std::move(cost)),
      features2_(feats.eval_matrix(mu2_.points())),
      targets_(feats.targets()) {
  residuals2_ = features2_.colwise() - targets_;
  validate();
}

Problem::Problem(DiscreteMeasure mu1, DiscreteMeasure mu2, CostMatrix cost, Matrix features2,
                 Vector targets)
    : mu1_(std::move(mu1)),
      mu2_(std::move(mu2)),
      cost_(std::move(cost)),
      features2_(std::move(features2)),
      targets_(std::move(targets)) {
  residuals2_ = features2_.colwise() - targets_;
  validate();
}

void Problem::validate() const {
  require(cost_.rows() == mu1_.size() && cost_.cols() == mu2_.size(),
          "cost matrix shape must match the measures");
  require(features2_.cols() == mu2_.size(), "feature values must cover the target support");
  require(features2_.rows() == targets_.size(), "feature rows must match target count");
  require(features2_.rows() > 0, "at least one feature required");
  require(features2_.allFinite(), "feature values must be finite");
  require(targets_.allFinite(), "targets must be finite");
  require(cost_.allFinite(), "cost matrix must be finite");
}

Matrix Problem::feature_covariance_mu2() const {
  const Vector& w = mu2_.weights();
  const Vector mean = features2_ * w;
  Matrix c = features2_ * w.asDiagonal() * features2_.transpose() - mean * mean.transpose();
  return 0.5 * (c + c.transpose());
}

double Problem::min_feature_cov_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Matrix> es(feature_covariance_mu2(), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

DualState evaluate_dual(const Problem& pr, const Vector& lambda, double epsilon, int workers) {
  check_eval_args(pr, lambda, epsilon);
  DualState st;
  st.lambda = lambda;
  st.epsilon = epsilon;
  st.tilt = pr.residuals2().transpose() * lambda;
  const Eigen::Index k1 = pr.source_size();
  st.T.resize(k1, pr.target_size());
  st.B.resize(k1);
  st.log_normalizer.resize(k1);
  for_each_row(k1, workers, [&](Eigen::Index i) {
    st.log_normalizer[i] = fill_kernel_row(pr, st.tilt, epsilon, i, st.T.row(i));
    st.B[i] = epsilon * st.log_normalizer[i];
  });
  return st;
}

double ell0(const Problem& pr, const Vector& lambda, Eigen::Index i, Eigen::Index j) {
  require(i >= 0 && i < pr.source_size() && j >= 0 && j < pr.target_size(),
          "index out of range");
  return pr.residuals2().col(j).dot(lambda) - pr.cost()(i, j);
}

double soft_min_B(const Problem& pr, const Vector& lambda, double epsilon, Eigen::Index i) {
  check_eval_args(pr, lambda, epsilon);
  require(i >= 0 && i < pr.source_size(), "index out of range");
  const Vector tilt = pr.residuals2().transpose() * lambda;
  return epsilon * row_log_normalizer(row_exponents(pr, tilt, epsilon, i));
}

Vector kernel_row(const Problem& pr, const Vector& lambda, double epsilon, Eigen::Index i) {
  check_eval_args(pr, lambda, epsilon);
  require(i >= 0 && i < pr.source_size(), "index out of range");
  const Vector tilt = pr.residuals2().transpose() * lambda;
  Eigen::RowVectorXd row(pr.target_size());
  fill_kernel_row(pr, tilt, epsilon, i, row);
  return row.transpose();
}

double dual_value_fpr(const Problem& pr, const Vector& lambda, double epsilon) {
  check_eval_args(pr, lambda, epsilon);
  const Vector tilt = pr.residuals2().transpose() * lambda;
  double value = 0.0;
  for (Eigen::Index i = 0; i < pr.source_size(); ++i)
    value += pr.mu1().weights()[i] * row_log_normalizer(row_exponents(pr, tilt, epsilon, i));
  return -epsilon * value;
}

double dual_value_fprp(const Problem& pr, const Vector& lambda, double epsilon,
                       const Penalty& penalty) {
  return dual_value_fpr(pr, lambda, epsilon) - penalty.conjugate(-lambda);
}

Vector state_moment_gap(const Problem& pr, const DualState& st) {
  const Vector gamma2 = st.T.transpose() * pr.mu1().weights();
  return pr.residuals2() * gamma2;
}

Matrix state_feature_covariance(const Problem& pr, const DualState& st) {
  const Vector gamma2 = st.T.transpose() * pr.mu1().weights();
  const Matrix cond_mean = pr.residuals2() * st.T.transpose();  // column i: E[f~ | x_i]
  Matrix h = pr.residuals2() * gamma2.asDiagonal() * pr.residuals2().transpose()
             - cond_mean * pr.mu1().weights().asDiagonal() * cond_mean.transpose();
  return 0.5 * (h + h.transpose());
}

Vector grad_J(const Problem& pr, const Vector& zeta, double epsilon) {
  const DualState st = evaluate_dual(pr, epsilon * zeta, epsilon);
  return state_moment_gap(pr, st);
}

Matrix hessian_J(const Problem& pr, const Vector& zeta, double epsilon) {
  const DualState st = evaluate_dual(pr, epsilon * zeta, epsilon);
  return state_feature_covariance(pr, st);
}

PsiValue psi_lambda(const Problem& pr, const Vector& lambda, Eigen::Index i) {
  require(lambda.size() == pr.feature_count(), "multiplier length must match feature count");
  require(i >= 0 && i < pr.source_size(), "index out of range");
  const Vector tilt = pr.residuals2().transpose() * lambda;
  PsiValue best{kInf, 0};
  for (Eigen::Index j = 0; j < pr.target_size(); ++j) {
    const double v = pr.cost()(i, j) - tilt[j];
    if (v < best.value) best = {v, j};
  }
  return best;
}

double dual_value_fp(const Problem& pr, const Vector& lambda) {
  double value = 0.0;
  for (Eigen::Index i = 0; i < pr.source_size(); ++i)
    value += pr.mu1().weights()[i] * psi_lambda(pr, lambda, i).value;
  return value;
}

double state_transport_cost(const Problem& pr, const DualState& st) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < pr.source_size(); ++i)
    total += pr.mu1().weights()[i] * st.T.row(i).dot(pr.cost().row(i));
  return total;
}

double state_entropy(const Problem& pr, const DualState& st) {
  // log(T_ij / w_j) = (tilt_j - c_ij)/eps - log_normalizer_i, finite everywhere,
  // and T_ij = 0 exactly where w_j = 0, so zero-weight atoms contribute nothing.
  double total = 0.0;
  for (Eigen::Index i = 0; i < pr.source_size(); ++i) {
    const double row_kl =
        st.T.row(i).dot(((st.tilt.transpose().array() - pr.cost().row(i).array())
                         / st.epsilon).matrix())
        - st.log_normalizer[i];
    total += pr.mu1().weights()[i] * row_kl;
  }
  return total;
}

Coupling coupling_from_state(const Problem& pr, const DualState& st) {
  Matrix gamma = pr.mu1().weights().asDiagonal() * Matrix(st.T);
  return Coupling(std::move(gamma), pr.mu1().points(), pr.mu2().points());
}

}  // namespace fpot
