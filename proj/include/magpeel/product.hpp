#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "magpeel/metric.hpp"

namespace magpeel {

inline constexpr Index kDefaultProductCap = 10'000;

/// Row-major bijection between flat product indices and factor-index tuples:
/// the first factor is outermost.
class IndexMap {
 public:
  IndexMap() = default;
  explicit IndexMap(std::vector<Index> shape) : shape_(std::move(shape)) {}

  const std::vector<Index>& shape() const { return shape_; }

  Index flat_size() const {
    Index s = 1;
    for (Index n : shape_) s *= n;
    return s;
  }

  Index flatten(std::span<const Index> tuple) const {
    if (tuple.size() != shape_.size()) throw Error(ErrorCode::DimensionMismatch, "tuple arity mismatch");
    Index flat = 0;
    for (std::size_t l = 0; l < shape_.size(); ++l) {
      if (tuple[l] < 0 || tuple[l] >= shape_[l]) throw Error(ErrorCode::IndexOutOfRange, "tuple entry out of range");
      flat = flat * shape_[l] + tuple[l];
    }
    return flat;
  }

  std::vector<Index> unflatten(Index flat) const {
    std::vector<Index> tuple(shape_.size());
    for (std::size_t l = shape_.size(); l-- > 0;) {
      tuple[l] = flat % shape_[l];
      flat /= shape_[l];
    }
    return tuple;
  }

 private:
  std::vector<Index> shape_;
};

template <typename Scalar = double>
struct ProductMetric {
  std::vector<MetricMatrix<Scalar>> factors;
  Scalar p_exponent = 2;
  MetricMatrix<Scalar> result;
  IndexMap index_map;
};

namespace detail {

template <typename Scalar>
Scalar lp_combine(std::span<const Scalar> parts, Scalar p) {
  if (p == Scalar(1)) {
    Scalar s = 0;
    for (Scalar v : parts) s += v;
    return s;
  }
  if (p == Scalar(2)) {
    Scalar s = 0;
    for (Scalar v : parts) s += v * v;
    return std::sqrt(s);
  }
  Scalar s = 0;
  for (Scalar v : parts) s += std::pow(v, p);
  return std::pow(s, Scalar(1) / p);
}

}  // namespace detail

/// L^p product of several finite metrics. Entries are l^p norms of the
/// per-factor distance tuples, so the result equals the left fold of binary
/// products. `dilation`, when given, scales each factor metric first.
template <typename Scalar>
ProductMetric<Scalar> lp_product_many(const std::vector<MetricMatrix<Scalar>>& factors, Scalar p_exponent,
                                      Index size_cap = kDefaultProductCap,
                                      std::span<const Scalar> dilation = {}) {
  if (factors.size() < 2) throw Error(ErrorCode::InvalidArgument, "a product needs at least two factors");
  if (!(p_exponent >= 1) || !std::isfinite(static_cast<double>(p_exponent))) {
    throw Error(ErrorCode::InvalidExponent, "p must be finite and >= 1");
  }
  if (!dilation.empty() && dilation.size() != factors.size()) {
    throw Error(ErrorCode::DimensionMismatch, "one dilation per factor expected");
  }
  std::vector<Index> shape;
  long double flat = 1;
  for (const auto& f : factors) {
    if (f.size() == 0) throw Error(ErrorCode::InvalidArgument, "empty factor");
    shape.push_back(f.size());
    flat *= static_cast<long double>(f.size());
  }
  if (flat > static_cast<long double>(size_cap)) {
    throw Error(ErrorCode::ProductTooLarge, "product has " + std::to_string(static_cast<double>(flat)) +
                                                " points, cap is " + std::to_string(size_cap));
  }
  ProductMetric<Scalar> out;
  out.p_exponent = p_exponent;
  out.index_map = IndexMap(shape);
  for (std::size_t l = 0; l < factors.size(); ++l)
    out.factors.push_back(dilation.empty() ? factors[l] : factors[l].scaled(dilation[l]));

  const Index n = out.index_map.flat_size();
  std::vector<std::vector<Index>> tuples(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) tuples[static_cast<std::size_t>(i)] = out.index_map.unflatten(i);

  Matrix<Scalar> d = Matrix<Scalar>::Zero(n, n);
  std::vector<Scalar> parts(factors.size());
  for (Index b = 0; b < n; ++b) {
    const auto& tb = tuples[static_cast<std::size_t>(b)];
    for (Index a = b + 1; a < n; ++a) {
      const auto& ta = tuples[static_cast<std::size_t>(a)];
      for (std::size_t l = 0; l < factors.size(); ++l) parts[l] = out.factors[l](ta[l], tb[l]);
      d(a, b) = d(b, a) = detail::lp_combine<Scalar>(parts, p_exponent);
    }
  }
  out.result = MetricMatrix<Scalar>::unchecked(std::move(d));
  return out;
}

template <typename Scalar>
ProductMetric<Scalar> lp_product(const MetricMatrix<Scalar>& d1, const MetricMatrix<Scalar>& d2,
                                 Scalar p_exponent, Index size_cap = kDefaultProductCap) {
  return lp_product_many<Scalar>({d1, d2}, p_exponent, size_cap);
}

/// Unit vector on an n1 x n2 product with zero total sum and zero marginals:
/// (+1, -1) (x) (+1, -1) / 2 on the first 2x2 block. Its quadratic form
/// against any L^1 product vanishes.
template <typename Scalar = double>
Vector<Scalar> degeneracy_witness_l1(Index n1, Index n2) {
  if (n1 < 2 || n2 < 2) throw Error(ErrorCode::InvalidArgument, "both factors need at least two points");
  const IndexMap map({n1, n2});
  Vector<Scalar> x = Vector<Scalar>::Zero(n1 * n2);
  const Index a[2] = {0, 1};
  for (Index i : a)
    for (Index j : a) {
      const Index t[2] = {i, j};
      x(map.flatten(t)) = (i == j) ? Scalar(0.5) : Scalar(-0.5);
    }
  return x;
}

template <typename Scalar>
Vector<Scalar> degeneracy_witness_l1(const MetricMatrix<Scalar>& d1, const MetricMatrix<Scalar>& d2) {
  return degeneracy_witness_l1<Scalar>(d1.size(), d2.size());
}

}  // namespace magpeel
