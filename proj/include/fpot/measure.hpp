#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "fpot/numeric.hpp"

namespace fpot {

/// Cost matrices are dense K1 x K2 with entry (i,j) = c(x_i, y_j).
/// Row-major so that the row for one source atom is contiguous.
using CostMatrix = RowMatrix;

/// Cost function over a pair of points.
using CostFn = std::function<double(const Point&, const Point&)>;

/// Finitely supported probability measure on R^N.
///
/// Support points are the rows of a K x N matrix; indices are the identity of
/// atoms (duplicate coordinates are allowed). Weights are validated
/// nonnegative and within 1e-9 of total mass 1, then rescaled to sum to 1
/// exactly; anything further off is rejected rather than silently fixed.
class DiscreteMeasure {
 public:
  DiscreteMeasure(Matrix points, Vector weights);

  /// Builds a measure from unnormalized nonnegative weights (any positive total).
  static DiscreteMeasure normalized(Matrix points, Vector weights);

  Eigen::Index size() const { return weights_.size(); }
  Eigen::Index dim() const { return points_.cols(); }
  const Matrix& points() const { return points_; }
  const Vector& weights() const { return weights_; }
  /// Entrywise log weights with log 0 = -inf; cached for kernel evaluation.
  const Vector& log_weights() const { return log_weights_; }
  Point point(Eigen::Index k) const { return points_.row(k).transpose(); }

 private:
  Matrix points_;
  Vector weights_;
  Vector log_weights_;
};

/// The built-in transport cost c(x, y) = 0.5 * ||x - y||^2.
double half_squared_euclidean(const Point& x, const Point& y);

/// Evaluates cost_fn on the product of the two supports.
/// Throws on dimension mismatch and on negative or non-finite cost values.
CostMatrix cost_matrix(const CostFn& cost_fn, const DiscreteMeasure& src, const DiscreteMeasure& tgt);

/// M feature functions bundled with their moment targets r.
/// Residual features are f~(y) = f(y) - r throughout.
class FeatureSystem {
 public:
  using EvalFn = std::function<Vector(const Point&)>;

  FeatureSystem(Eigen::Index count, EvalFn eval, Vector targets);

  Eigen::Index count() const { return count_; }
  const Vector& targets() const { return targets_; }

  /// Evaluates all features at one point; throws on wrong size or non-finite values.
  Vector operator()(const Point& p) const;

  /// M x K matrix of feature values over the rows of `points`.
  Matrix eval_matrix(const Matrix& points) const;

 private:
  Eigen::Index count_;
  EvalFn eval_;
  Vector targets_;
};

/// f_i(y) = y_i for i = 1..n.
FeatureSystem linear_features(Eigen::Index n, Vector targets);

/// Linear monomials y_1..y_n followed by quadratic monomials y_i*y_j for
/// i <= j in lexicographic (i, j) order; M = n + n(n+1)/2.
FeatureSystem quadratic_monomial_features(Eigen::Index n, Vector targets);

/// Indicator features of the cells of an axis-aligned grid. edges[d] lists the
/// strictly increasing cell boundaries for dimension d; cells are half-open
/// [e_k, e_{k+1}) except the last, which is closed. Points outside the grid
/// evaluate to the zero vector. M = prod_d (edges[d].size() - 1).
FeatureSystem indicator_grid_features(std::vector<std::vector<double>> edges, Vector targets);

/// Features given by a value table over a fixed support: values is M x K with
/// column k holding f(support row k). Evaluation looks the point up by
/// coordinates (within 1e-12) and throws when the point is not in the table.
FeatureSystem tabulated_features(Matrix support, Matrix values, Vector targets);

/// Generalized moments <mu, f_i> as a length-M vector.
Vector moments(const DiscreteMeasure& mu, const FeatureSystem& feats);

/// Joint probability matrix over a pair of finite supports.
/// Entries are validated nonnegative with total mass within 1e-9 of 1, then
/// rescaled to total exactly 1.
struct Coupling {
  Coupling(Matrix gamma_in, Matrix source_points_in, Matrix target_points_in);

  Matrix gamma;
  Matrix source_points;
  Matrix target_points;
};

/// Relative entropy D(gamma || mu1 x mu2) with the 0 log 0 = 0 convention.
/// Throws when gamma puts mass on a cell where the product measure vanishes.
double coupling_entropy(const Coupling& gamma, const DiscreteMeasure& mu1, const DiscreteMeasure& mu2);

/// Row-sum and column-sum marginals of a coupling.
std::pair<DiscreteMeasure, DiscreteMeasure> marginals(const Coupling& gamma);

}  // namespace fpot
