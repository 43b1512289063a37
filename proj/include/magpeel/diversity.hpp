#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <vector>

#include "magpeel/magnitude.hpp"
#include "magpeel/metric.hpp"

namespace magpeel {

/// Probability vector on [n]. Construction renormalizes to unit sum and
/// rejects negative entries.
template <typename Scalar = double>
class SimplexVector {
 public:
  SimplexVector() = default;

  template <typename Derived>
  explicit SimplexVector(const Eigen::MatrixBase<Derived>& weights) : p_(weights) {
    if (p_.size() == 0) throw Error(ErrorCode::NotOnSimplex, "empty distribution");
    if (!p_.allFinite()) throw Error(ErrorCode::NotOnSimplex, "non-finite probability");
    if (p_.minCoeff() < 0) throw Error(ErrorCode::NotOnSimplex, "negative probability");
    const Scalar s = p_.sum();
    if (!(s > 0)) throw Error(ErrorCode::NotOnSimplex, "probabilities sum to zero");
    p_ /= s;
  }

  static SimplexVector uniform(Index n) { return SimplexVector(Vector<Scalar>::Ones(n)); }
  static SimplexVector point_mass(Index n, Index j) {
    Vector<Scalar> v = Vector<Scalar>::Zero(n);
    v(j) = 1;
    return SimplexVector(v);
  }

  const Vector<Scalar>& vector() const { return p_; }
  Scalar operator()(Index j) const { return p_(j); }
  Index size() const { return p_.size(); }

  std::vector<Index> support() const {
    std::vector<Index> s;
    for (Index j = 0; j < p_.size(); ++j)
      if (p_(j) > 0) s.push_back(j);
    return s;
  }

 private:
  Vector<Scalar> p_;
};

inline constexpr double kLogFloor = 1e-300;
inline constexpr double kInfiniteOrderThreshold = 1e6;

namespace detail {

template <typename Derived, typename Scalar>
Vector<Scalar> similarity_times(const Eigen::MatrixBase<Derived>& z, const SimplexVector<Scalar>& p) {
  if (z.rows() != z.cols() || z.rows() != p.size()) {
    throw Error(ErrorCode::DimensionMismatch, "similarity matrix and distribution sizes differ");
  }
  Vector<Scalar> zp = z * p.vector();
  for (Index j = 0; j < zp.size(); ++j) {
    if (p(j) > 0 && zp(j) < Scalar(kLogFloor)) {
      throw Error(ErrorCode::Underflow, "(Zp)_j underflows on the support");
    }
  }
  return zp;
}

}  // namespace detail

/// exp of minus the p-weighted mean of log (Zp) over the support.
template <typename Derived, typename Scalar>
Scalar diversity_order_one(const Eigen::MatrixBase<Derived>& z, const SimplexVector<Scalar>& p) {
  const Vector<Scalar> zp = detail::similarity_times(z, p);
  Scalar log_d = 0;
  for (Index j = 0; j < zp.size(); ++j)
    if (p(j) > 0) log_d -= p(j) * std::log(zp(j));
  return std::exp(log_d);
}

/// Similarity-sensitive diversity of order q in [1, inf]. Orders above 1e6
/// use the q = inf limit 1 / max_{supp} (Zp)_j.
template <typename Derived, typename Scalar>
Scalar diversity_order_q(const Eigen::MatrixBase<Derived>& z, const SimplexVector<Scalar>& p, Scalar q) {
  if (std::isnan(static_cast<double>(q)) || q < 1) {
    throw Error(ErrorCode::InvalidOrder, "order q must be >= 1");
  }
  if (q == 1) return diversity_order_one(z, p);
  const Vector<Scalar> zp = detail::similarity_times(z, p);
  if (q > Scalar(kInfiniteOrderThreshold)) {
    Scalar mx = 0;
    for (Index j = 0; j < zp.size(); ++j)
      if (p(j) > 0) mx = std::max(mx, zp(j));
    return Scalar(1) / mx;
  }
  // log sum_j p_j (Zp)_j^{q-1}, via log-sum-exp
  std::vector<Scalar> terms;
  Scalar top = -std::numeric_limits<Scalar>::infinity();
  for (Index j = 0; j < zp.size(); ++j) {
    if (p(j) > 0) {
      terms.push_back(std::log(p(j)) + (q - 1) * std::log(zp(j)));
      top = std::max(top, terms.back());
    }
  }
  Scalar acc = 0;
  for (Scalar v : terms) acc += std::exp(v - top);
  const Scalar log_sum = top + std::log(acc);
  return std::exp(log_sum / (1 - q));
}

template <typename Scalar>
Scalar diversity_order_q(const SimilarityMatrix<Scalar>& z, const SimplexVector<Scalar>& p, Scalar q) {
  return diversity_order_q(z.matrix(), p, q);
}

template <typename Scalar>
Scalar diversity_order_one(const SimilarityMatrix<Scalar>& z, const SimplexVector<Scalar>& p) {
  return diversity_order_one(z.matrix(), p);
}

/// p^T d p.
template <typename Scalar>
Scalar quadratic_entropy(const MetricMatrix<Scalar>& d, const SimplexVector<Scalar>& p) {
  if (d.size() != p.size()) throw Error(ErrorCode::DimensionMismatch, "metric and distribution sizes differ");
  return p.vector().dot(d.matrix() * p.vector());
}

/// t p^T d p: the first-order small-t approximation of log D_1 for
/// Z = exp[-t d]. The error is O(t^2).
template <typename Scalar>
Scalar small_scale_log_diversity(const MetricMatrix<Scalar>& d, const SimplexVector<Scalar>& p, Scalar t) {
  return t * quadratic_entropy(d, p);
}

/// Normalized weighting. When it is positive it maximizes diversity of every
/// order simultaneously.
template <typename Scalar>
SimplexVector<Scalar> max_diversity_from_weighting(const SimilarityMatrix<Scalar>& z) {
  const Weighting<Scalar> w = weighting(z);
  if (w.w.size() > 0 && w.w.minCoeff() <= 0) {
    throw Error(ErrorCode::NonPositiveWeighting,
                "weighting has a nonpositive entry; use the peel or a larger scale");
  }
  return SimplexVector<Scalar>(w.w);
}

}  // namespace magpeel
