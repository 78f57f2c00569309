#include "fpot/penalty.hpp"

#include <stdexcept>

namespace fpot {

QuadraticPenalty::QuadraticPenalty(double kappa) : kappa_(kappa) {
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
}

double QuadraticPenalty::value(const Vector& delta) const {
  return 0.5 * kappa_ * delta.squaredNorm();
}

double QuadraticPenalty::conjugate(const Vector& x) const {
  return x.squaredNorm() / (2.0 * kappa_);
}

Vector QuadraticPenalty::conjugate_grad(const Vector& x) const { return x / kappa_; }

Matrix QuadraticPenalty::conjugate_hess(const Vector& x) const {
  return Matrix::Identity(x.size(), x.size()) / kappa_;
}

}  // namespace fpot
