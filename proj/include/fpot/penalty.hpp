#pragma once

#include "fpot/numeric.hpp"

namespace fpot {

/// Convex penalty R on the moment gap, with the conjugate pieces the dual
/// solvers need. The penalized dual objective is phi*(lambda) - R*(-lambda).
class Penalty {
 public:
  virtual ~Penalty() = default;

  /// R(delta).
  virtual double value(const Vector& delta) const = 0;
  /// Convex conjugate R*(x).
  virtual double conjugate(const Vector& x) const = 0;
  /// grad R*(x).
  virtual Vector conjugate_grad(const Vector& x) const = 0;
  /// Hessian of R* at x.
  virtual Matrix conjugate_hess(const Vector& x) const = 0;

  /// Gradient in lambda of the map lambda -> R*(-lambda). This is the drift
  /// added to the moment gap in penalized solves; stationarity reads
  /// m^lambda + dual_penalty_grad(lambda) = 0, equivalently delta* = m^lambda
  /// with -lambda* in the subdifferential of R at delta*.
  Vector dual_penalty_grad(const Vector& lambda) const { return -conjugate_grad(-lambda); }

  /// Hessian in lambda of lambda -> R*(-lambda).
  Matrix dual_penalty_hess(const Vector& lambda) const { return conjugate_hess(-lambda); }
};

/// R(delta) = kappa/2 ||delta||^2, so R*(x) = ||x||^2 / (2 kappa) and
/// grad R*(x) = x / kappa.
class QuadraticPenalty final : public Penalty {
 public:
  explicit QuadraticPenalty(double kappa);

  double kappa() const { return kappa_; }

  double value(const Vector& delta) const override;
  double conjugate(const Vector& x) const override;
  Vector conjugate_grad(const Vector& x) const override;
  Matrix conjugate_hess(const Vector& x) const override;

 private:
  double kappa_;
};

}  // namespace fpot
