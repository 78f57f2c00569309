#include "fpot/measure.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fpot {

namespace {

constexpr double kMassTol = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

double log_sum_exp(const Eigen::Ref<const Vector>& a) {
  double shift = -kInf;
  for (Eigen::Index k = 0; k < a.size(); ++k) shift = std::max(shift, a[k]);
  if (shift == -kInf) return -kInf;
  double total = 0.0;
  for (Eigen::Index k = 0; k < a.size(); ++k) total += std::exp(a[k] - shift);
  return shift + std::log(total);
}

double Rng::normal() {
  // Box-Muller; u clamped away from 0 so the log stays finite.
  double u = uniform();
  if (u <= 0.0) u = 0x1.0p-53;
  const double v = uniform();
  return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586476925286766559 * v);
}

DiscreteMeasure::DiscreteMeasure(Matrix points, Vector weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
  require(points_.rows() > 0, "measure needs at least one support point");
  require(points_.allFinite(), "support points must be finite");
  require(weights_.size() == points_.rows(), "weight count must match support size");
  require(weights_.allFinite(), "weights must be finite");
  require((weights_.array() >= 0.0).all(), "weights must be nonnegative");
  const double total = weights_.sum();
  require(std::abs(total - 1.0) <= kMassTol, "weights must sum to 1 within 1e-9");
  weights_ /= total;
  log_weights_.resize(weights_.size());
  for (Eigen::Index k = 0; k < weights_.size(); ++k)
    log_weights_[k] = weights_[k] > 0.0 ? std::log(weights_[k]) : -kInf;
}

DiscreteMeasure DiscreteMeasure::normalized(Matrix points, Vector weights) {
  require(weights.size() > 0, "empty weight vector");
  require(weights.allFinite(), "weights must be finite");
  require((weights.array() >= 0.0).all(), "weights must be nonnegative");
  const double total = weights.sum();
  require(total > 0.0, "total mass must be positive");
  return DiscreteMeasure(std::move(points), weights / total);
}

double half_squared_euclidean(const Point& x, const Point& y) {
  return 0.5 * (x - y).squaredNorm();
}

CostMatrix cost_matrix(const CostFn& cost_fn, const DiscreteMeasure& src, const DiscreteMeasure& tgt) {
  require(src.dim() == tgt.dim(), "source and target dimensions differ");
  CostMatrix c(src.size(), tgt.size());
  for (Eigen::Index i = 0; i < src.size(); ++i) {
    const Point x = src.point(i);
    for (Eigen::Index j = 0; j < tgt.size(); ++j) {
      const double v = cost_fn(x, tgt.point(j));
      require(std::isfinite(v), "cost value must be finite");
      require(v >= 0.0, "cost value must be nonnegative");
      c(i, j) = v;
    }
  }
  return c;
}

FeatureSystem::FeatureSystem(Eigen::Index count, EvalFn eval, Vector targets)
    : count_(count), eval_(std::move(eval)), targets_(std::move(targets)) {
  require(count_ > 0, "feature system needs at least one feature");
  require(targets_.size() == count_, "target count must match feature count");
  require(targets_.allFinite(), "targets must be finite");
}

Vector FeatureSystem::operator()(const Point& p) const {
  Vector v = eval_(p);
  require(v.size() == count_, "feature evaluation returned wrong length");
  require(v.allFinite(), "feature evaluation returned non-finite values");
  return v;
}

Matrix FeatureSystem::eval_matrix(const Matrix& points) const {
  Matrix out(count_, points.rows());
  for (Eigen::Index k = 0; k < points.rows(); ++k)
    out.col(k) = (*this)(points.row(k).transpose());
  return out;
}

FeatureSystem linear_features(Eigen::Index n, Vector targets) {
  return FeatureSystem(n, [n](const Point& p) {
    require(p.size() == n, "point dimension does not match linear features");
    return p;
  }, std::move(targets));
}

FeatureSystem quadratic_monomial_features(Eigen::Index n, Vector targets) {
  const Eigen::Index m = n + n * (n + 1) / 2;
  return FeatureSystem(m, [n, m](const Point& p) {
    require(p.size() == n, "point dimension does not match quadratic features");
    Vector v(m);
    v.head(n) = p;
    Eigen::Index k = n;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i; j < n; ++j) v[k++] = p[i] * p[j];
    return v;
  }, std::move(targets));
}

FeatureSystem indicator_grid_features(std::vector<std::vector<double>> edges, Vector targets) {
  require(!edges.empty(), "grid needs at least one dimension");
  Eigen::Index m = 1;
  for (const auto& e : edges) {
    require(e.size() >= 2, "each grid dimension needs at least two edges");
    for (std::size_t k = 0; k + 1 < e.size(); ++k)
      require(e[k] < e[k + 1], "grid edges must be strictly increasing");
    m *= static_cast<Eigen::Index>(e.size()) - 1;
  }
  const Eigen::Index dims = static_cast<Eigen::Index>(edges.size());
  return FeatureSystem(m, [edges = std::move(edges), dims, m](const Point& p) {
    require(p.size() == dims, "point dimension does not match grid features");
    Vector v = Vector::Zero(m);
    Eigen::Index cell = 0;
    for (Eigen::Index d = 0; d < dims; ++d) {
      const auto& e = edges[static_cast<std::size_t>(d)];
      const Eigen::Index cells = static_cast<Eigen::Index>(e.size()) - 1;
      const double x = p[d];
      if (x < e.front() || x > e.back()) return v;
      Eigen::Index idx = cells - 1;  // last cell is closed on the right
      for (Eigen::Index k = 0; k < cells; ++k) {
        if (x < e[static_cast<std::size_t>(k) + 1]) { idx = k; break; }
      }
      cell = cell * cells + idx;
    }
    v[cell] = 1.0;
    return v;
  }, std::move(targets));
}

FeatureSystem tabulated_features(Matrix support, Matrix values, Vector targets) {
  require(values.cols() == support.rows(), "value table width must match support size");
  require(values.allFinite(), "tabulated values must be finite");
  const Eigen::Index m = values.rows();
  return FeatureSystem(m, [support = std::move(support), values = std::move(values)](const Point& p) {
    for (Eigen::Index k = 0; k < support.rows(); ++k) {
      if ((support.row(k).transpose() - p).lpNorm<Eigen::Infinity>() <= 1e-12)
        return Vector(values.col(k));
    }
    throw std::invalid_argument("tabulated features undefined at the requested point");
  }, std::move(targets));
}

Vector moments(const DiscreteMeasure& mu, const FeatureSystem& feats) {
  Vector m = Vector::Zero(feats.count());
  for (Eigen::Index k = 0; k < mu.size(); ++k) m += mu.weights()[k] * feats(mu.point(k));
  return m;
}

Coupling::Coupling(Matrix gamma_in, Matrix source_points_in, Matrix target_points_in)
    : gamma(std::move(gamma_in)),
      source_points(std::move(source_points_in)),
      target_points(std::move(target_points_in)) {
  require(gamma.rows() == source_points.rows(), "coupling rows must match source support");
  require(gamma.cols() == target_points.rows(), "coupling columns must match target support");
  require(gamma.allFinite(), "coupling entries must be finite");
  require((gamma.array() >= 0.0).all(), "coupling entries must be nonnegative");
  const double total = gamma.sum();
  require(std::abs(total - 1.0) <= kMassTol, "coupling mass must be 1 within 1e-9");
  gamma /= total;
}

double coupling_entropy(const Coupling& gamma, const DiscreteMeasure& mu1, const DiscreteMeasure& mu2) {
  require(gamma.gamma.rows() == mu1.size() && gamma.gamma.cols() == mu2.size(),
          "coupling shape must match the marginal measures");
  double h = 0.0;
  for (Eigen::Index i = 0; i < gamma.gamma.rows(); ++i) {
    for (Eigen::Index j = 0; j < gamma.gamma.cols(); ++j) {
      const double g = gamma.gamma(i, j);
      if (g == 0.0) continue;
      const double ref = mu1.weights()[i] * mu2.weights()[j];
      if (ref == 0.0)
        throw std::domain_error("coupling places mass outside the product support");
      h += g * std::log(g / ref);
    }
  }
  return h;
}

std::pair<DiscreteMeasure, DiscreteMeasure> marginals(const Coupling& gamma) {
  Vector first = gamma.gamma.rowwise().sum();
  Vector second = gamma.gamma.colwise().sum().transpose();
  return {DiscreteMeasure(gamma.source_points, std::move(first)),
          DiscreteMeasure(gamma.target_points, std::move(second))};
}

}  // namespace fpot
