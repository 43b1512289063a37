#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "magpeel/errors.hpp"

namespace magpeel {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Finite metric on n points: symmetric, zero diagonal, positive off the
/// diagonal, triangle inequality. Instances come out of validate_metric or
/// one of the builders below, which establish the invariants.
template <typename Scalar = double>
class MetricMatrix {
 public:
  MetricMatrix() = default;

  /// Wraps entries the caller already knows to be a metric (e.g. a norm
  /// distance matrix). No checks beyond shape.
  static MetricMatrix unchecked(Matrix<Scalar> entries, std::vector<std::string> labels = {}) {
    if (entries.rows() != entries.cols()) {
      throw Error(ErrorCode::NonSquare, "distance matrix must be square");
    }
    if (!labels.empty() && static_cast<Index>(labels.size()) != entries.rows()) {
      throw Error(ErrorCode::DimensionMismatch, "label count does not match matrix size");
    }
    MetricMatrix m;
    m.entries_ = std::move(entries);
    m.labels_ = std::move(labels);
    return m;
  }

  Index size() const { return entries_.rows(); }
  const Matrix<Scalar>& matrix() const { return entries_; }
  Scalar operator()(Index j, Index k) const { return entries_(j, k); }
  const std::vector<std::string>& labels() const { return labels_; }

  /// Principal restriction to `indices` (in the given order). A subset of a
  /// metric space is again a metric space.
  MetricMatrix restrict(std::span<const Index> indices) const {
    const Index m = static_cast<Index>(indices.size());
    Matrix<Scalar> sub(m, m);
    for (Index a = 0; a < m; ++a) {
      if (indices[a] < 0 || indices[a] >= size()) {
        throw Error(ErrorCode::IndexOutOfRange, "restriction index out of range");
      }
    }
    for (Index b = 0; b < m; ++b)
      for (Index a = 0; a < m; ++a) sub(a, b) = entries_(indices[a], indices[b]);
    std::vector<std::string> labels;
    if (!labels_.empty()) {
      labels.reserve(indices.size());
      for (Index i : indices) labels.push_back(labels_[i]);
    }
    return unchecked(std::move(sub), std::move(labels));
  }

  MetricMatrix scaled(Scalar c) const { return unchecked(entries_ * c, labels_); }

 private:
  Matrix<Scalar> entries_;
  std::vector<std::string> labels_;
};

struct ValidationReport {
  double max_asymmetry = 0;
  double max_triangle_violation = 0;  // max of d_jk - d_ji - d_ik; 0 for a metric
};

namespace detail {

template <typename Scalar>
Scalar max_abs_entry(const Matrix<Scalar>& m) {
  return m.size() == 0 ? Scalar(0) : m.cwiseAbs().maxCoeff();
}

// Largest value of d(j,k) - d(j,i) - d(i,k) over all triples, with a witness.
template <typename Scalar>
std::pair<Scalar, std::array<Index, 3>> worst_triangle(const Matrix<Scalar>& d) {
  const Index n = d.rows();
  Scalar worst = -std::numeric_limits<Scalar>::infinity();
  std::array<Index, 3> witness{0, 0, 0};
  Matrix<Scalar> excess(n, n);
  for (Index i = 0; i < n; ++i) {
    // excess(j,k) = d(j,k) - d(j,i) - d(i,k)
    excess = d;
    excess.colwise() -= d.col(i);
    excess.rowwise() -= d.row(i);
    Index j = 0, k = 0;
    const Scalar v = excess.maxCoeff(&j, &k);
    if (v > worst) {
      worst = v;
      witness = {j, i, k};
    }
  }
  return {worst, witness};
}

}  // namespace detail

/// Symmetrizes and validates a raw distance matrix. Tolerances are relative
/// to the largest entry.
template <typename Derived>
MetricMatrix<typename Derived::Scalar> validate_metric(const Eigen::MatrixBase<Derived>& raw,
                                                       typename Derived::Scalar tol_tri,
                                                       std::vector<std::string> labels = {},
                                                       ValidationReport* report = nullptr) {
  using Scalar = typename Derived::Scalar;
  if (raw.rows() != raw.cols()) throw Error(ErrorCode::NonSquare, "matrix is not square");
  if (!(tol_tri >= 0)) throw Error(ErrorCode::InvalidArgument, "tol_tri must be >= 0");
  const Index n = raw.rows();
  Matrix<Scalar> a = raw;
  if (!a.allFinite()) {
    throw Error(ErrorCode::NonFiniteEntry, "entries must be finite (infinite distances unsupported)");
  }
  for (Index j = 0; j < n; ++j) {
    if (a(j, j) != Scalar(0)) {
      throw Error(ErrorCode::NonzeroDiagonal,
                  "diagonal entry " + std::to_string(j) + " is nonzero");
    }
  }
  for (Index k = 0; k < n; ++k)
    for (Index j = 0; j < n; ++j)
      if (a(j, k) < 0) {
        throw Error(ErrorCode::NegativeEntry,
                    "entry (" + std::to_string(j) + "," + std::to_string(k) + ") is negative");
      }

  const Scalar scale = std::max(detail::max_abs_entry(a), Scalar(1e-300));
  const Scalar tol = tol_tri * scale;
  const Scalar asym = n == 0 ? Scalar(0) : (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > tol) {
    throw Error(ErrorCode::AsymmetryBeyondTolerance,
                "max |d - d^T| = " + std::to_string(static_cast<double>(asym)));
  }
  Matrix<Scalar> d = (a + a.transpose()) / Scalar(2);

  for (Index k = 0; k < n; ++k)
    for (Index j = k + 1; j < n; ++j)
      if (d(j, k) == Scalar(0)) {
        throw Error(ErrorCode::DuplicatePoints,
                    "points " + std::to_string(k) + " and " + std::to_string(j) + " coincide");
      }

  Scalar worst = 0;
  if (n >= 3) {
    auto [v, w] = detail::worst_triangle(d);
    worst = v;
    if (v > tol) {
      throw Error(ErrorCode::TriangleViolation,
                  "d(" + std::to_string(w[0]) + "," + std::to_string(w[2]) + ") exceeds d(" +
                      std::to_string(w[0]) + "," + std::to_string(w[1]) + ") + d(" +
                      std::to_string(w[1]) + "," + std::to_string(w[2]) + ") by " +
                      std::to_string(static_cast<double>(v)));
    }
  }
  if (report) {
    report->max_asymmetry = static_cast<double>(asym);
    report->max_triangle_violation = static_cast<double>(worst);
  }
  return MetricMatrix<Scalar>::unchecked(std::move(d), std::move(labels));
}

/// Groups of coincident points (zero off-diagonal distance), in order of
/// first appearance.
struct DuplicateMerge {
  std::vector<Index> representatives;  // original index kept per group
  std::vector<Index> multiplicity;      // group sizes
  std::vector<Index> group_of;          // original index -> group
};

template <typename Derived>
DuplicateMerge find_duplicate_groups(const Eigen::MatrixBase<Derived>& raw) {
  const Index n = raw.rows();
  DuplicateMerge out;
  out.group_of.assign(static_cast<std::size_t>(n), -1);
  for (Index j = 0; j < n; ++j) {
    if (out.group_of[j] >= 0) continue;
    const Index g = static_cast<Index>(out.representatives.size());
    out.representatives.push_back(j);
    out.multiplicity.push_back(0);
    for (Index k = j; k < n; ++k) {
      if (out.group_of[k] < 0 && (k == j || (raw(j, k) == 0 && raw(k, j) == 0))) {
        out.group_of[k] = g;
        ++out.multiplicity[g];
      }
    }
  }
  return out;
}

/// T_k^- test matrix: entries d(k,j) + d(i,k) - d(i,j) for i, j != k.
template <typename Scalar>
Matrix<Scalar> reduced_test_matrix(const MetricMatrix<Scalar>& d, Index k) {
  const Index n = d.size();
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "reduced test matrix needs n >= 2");
  if (k < 0 || k >= n) throw Error(ErrorCode::IndexOutOfRange, "k out of range");
  Matrix<Scalar> t(n - 1, n - 1);
  for (Index b = 0, j = 0; j < n; ++j) {
    if (j == k) continue;
    for (Index a = 0, i = 0; i < n; ++i) {
      if (i == k) continue;
      t(a, b) = d(k, j) + d(i, k) - d(i, j);
      ++a;
    }
    ++b;
  }
  return t;
}

enum class NegativeType { StrictNegativeType, NegativeTypeOnly, NotNegativeType };

constexpr std::string_view to_string(NegativeType c) {
  switch (c) {
    case NegativeType::StrictNegativeType: return "StrictNegativeType";
    case NegativeType::NegativeTypeOnly: return "NegativeTypeOnly";
    case NegativeType::NotNegativeType: return "NotNegativeType";
  }
  return "Unknown";
}

struct NegativeTypeClass {
  NegativeType kind = NegativeType::NotNegativeType;
  double min_eigenvalue = 0;
  double max_abs_eigenvalue = 0;
  Index k_used = 0;

  bool strict() const { return kind == NegativeType::StrictNegativeType; }
  bool negative_type() const { return kind != NegativeType::NotNegativeType; }
};

inline constexpr double kDefaultTolEig = 1e-10;

/// Classifies d via the spectrum of its reduced test matrix. Near-zero
/// minimum eigenvalues (relative to the spectral radius) are reported as
/// NegativeTypeOnly, never as strict.
template <typename Scalar>
NegativeTypeClass classify_negative_type(const MetricMatrix<Scalar>& d,
                                         Scalar tol_eig = Scalar(kDefaultTolEig), Index k = 0) {
  const Matrix<Scalar> t = reduced_test_matrix(d, k);
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(t, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::NoConvergence, "eigenvalue solver failed");
  }
  const auto& ev = es.eigenvalues();
  const Scalar lo = ev.minCoeff();
  const Scalar big = ev.cwiseAbs().maxCoeff();
  NegativeTypeClass out;
  out.min_eigenvalue = static_cast<double>(lo);
  out.max_abs_eigenvalue = static_cast<double>(big);
  out.k_used = k;
  const Scalar thresh = tol_eig * big;
  if (lo > thresh) {
    out.kind = NegativeType::StrictNegativeType;
  } else if (lo >= -thresh) {
    out.kind = NegativeType::NegativeTypeOnly;
  } else {
    out.kind = NegativeType::NotNegativeType;
  }
  return out;
}

/// Pairwise l^p distances between the rows of `points`.
template <typename Derived>
MetricMatrix<typename Derived::Scalar> euclidean_distance_matrix(
    const Eigen::MatrixBase<Derived>& points, typename Derived::Scalar norm_p = 2,
    std::vector<std::string> labels = {}) {
  using Scalar = typename Derived::Scalar;
  if (!(norm_p >= 1)) throw Error(ErrorCode::InvalidExponent, "norm exponent must be >= 1");
  if (!points.allFinite()) throw Error(ErrorCode::NonFiniteEntry, "point coordinates must be finite");
  const Index m = points.rows();
  Matrix<Scalar> d = Matrix<Scalar>::Zero(m, m);
  for (Index k = 0; k < m; ++k) {
    for (Index j = k + 1; j < m; ++j) {
      const auto diff = (points.row(j) - points.row(k)).eval();
      Scalar v;
      if (norm_p == 2) {
        v = diff.norm();
      } else if (norm_p == 1) {
        v = diff.cwiseAbs().sum();
      } else {
        v = std::pow(diff.cwiseAbs().array().pow(norm_p).sum(), Scalar(1) / norm_p);
      }
      if (v == Scalar(0)) {
        throw Error(ErrorCode::DuplicatePoints,
                    "rows " + std::to_string(k) + " and " + std::to_string(j) + " coincide");
      }
      d(j, k) = d(k, j) = v;
    }
  }
  return MetricMatrix<Scalar>::unchecked(std::move(d), std::move(labels));
}

template <typename Scalar = double>
struct SphericalMetric {
  MetricMatrix<Scalar> metric;
  bool antipodes_present = false;
  Scalar max_distance = 0;
};

inline constexpr double kDefaultAntipodeTol = 1e-8;

/// Geodesic distances between the normalized rows of `vectors`.
/// The angle is evaluated as 2 atan2(|u - v|, |u + v|), which equals
/// arccos(<u, v>) but stays accurate near 0 and pi.
template <typename Derived>
SphericalMetric<typename Derived::Scalar> spherical_distance_matrix(
    const Eigen::MatrixBase<Derived>& vectors,
    typename Derived::Scalar antipode_tol = typename Derived::Scalar(kDefaultAntipodeTol),
    std::vector<std::string> labels = {}) {
  using Scalar = typename Derived::Scalar;
  if (!vectors.allFinite()) throw Error(ErrorCode::NonFiniteEntry, "vectors must be finite");
  const Index m = vectors.rows();
  Matrix<Scalar> u = vectors;
  for (Index j = 0; j < m; ++j) {
    const Scalar nrm = u.row(j).norm();
    if (nrm == Scalar(0)) throw Error(ErrorCode::ZeroVector, "row " + std::to_string(j) + " is zero");
    u.row(j) /= nrm;
  }
  const Scalar pi = std::numbers::pi_v<Scalar>;
  SphericalMetric<Scalar> out;
  Matrix<Scalar> d = Matrix<Scalar>::Zero(m, m);
  for (Index k = 0; k < m; ++k) {
    for (Index j = k + 1; j < m; ++j) {
      const Scalar minus = (u.row(j) - u.row(k)).norm();
      const Scalar plus = (u.row(j) + u.row(k)).norm();
      const Scalar v = Scalar(2) * std::atan2(minus, plus);
      if (v == Scalar(0)) {
        throw Error(ErrorCode::DuplicatePoints,
                    "rows " + std::to_string(k) + " and " + std::to_string(j) +
                        " coincide after normalization");
      }
      if (v > pi - antipode_tol) out.antipodes_present = true;
      out.max_distance = std::max(out.max_distance, v);
      d(j, k) = d(k, j) = v;
    }
  }
  out.metric = MetricMatrix<Scalar>::unchecked(std::move(d), std::move(labels));
  return out;
}

/// Subdominant (single-linkage) ultrametric: u(j,k) is the minimax edge
/// weight over paths from j to k. Built along Prim's spanning tree, O(n^2).
template <typename Scalar>
MetricMatrix<Scalar> single_linkage_ultrametric(const MetricMatrix<Scalar>& d) {
  const Index n = d.size();
  Matrix<Scalar> u = Matrix<Scalar>::Zero(n, n);
  if (n <= 1) return MetricMatrix<Scalar>::unchecked(u, d.labels());

  const Scalar inf = std::numeric_limits<Scalar>::infinity();
  std::vector<bool> in_tree(static_cast<std::size_t>(n), false);
  std::vector<Scalar> best(static_cast<std::size_t>(n), inf);
  std::vector<Index> parent(static_cast<std::size_t>(n), -1);
  std::vector<Index> order;
  order.reserve(static_cast<std::size_t>(n));

  best[0] = 0;
  for (Index step = 0; step < n; ++step) {
    Index v = -1;
    for (Index i = 0; i < n; ++i)
      if (!in_tree[i] && (v < 0 || best[i] < best[v])) v = i;
    in_tree[v] = true;
    if (parent[v] >= 0) {
      for (Index x : order) {
        const Scalar val = std::max(best[v], u(parent[v], x));
        u(v, x) = u(x, v) = val;
      }
    }
    order.push_back(v);
    for (Index i = 0; i < n; ++i) {
      if (!in_tree[i] && d(v, i) < best[i]) {
        best[i] = d(v, i);
        parent[i] = v;
      }
    }
  }
  return MetricMatrix<Scalar>::unchecked(std::move(u), d.labels());
}

}  // namespace magpeel
