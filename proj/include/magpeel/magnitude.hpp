#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "magpeel/metric.hpp"

namespace magpeel {

enum class SolvePath { Cholesky, SymmetricIndefinite };

constexpr std::string_view to_string(SolvePath s) {
  return s == SolvePath::Cholesky ? "cholesky" : "ldlt";
}

/// Z = exp[-t d] together with its factorization. Cholesky is tried first;
/// if Z is not numerically positive definite the pivoted LDL^T is kept.
template <typename Scalar = double>
class SimilarityMatrix {
 public:
  SimilarityMatrix(Matrix<Scalar> z, Scalar t) : z_(std::move(z)), t_(t) { factorize(); }

  const Matrix<Scalar>& matrix() const { return z_; }
  Scalar scale() const { return t_; }
  Index size() const { return z_.rows(); }
  SolvePath solve_path() const { return path_; }
  bool factorization_ok() const { return ok_; }

  template <typename Rhs>
  Vector<Scalar> solve(const Eigen::MatrixBase<Rhs>& b) const {
    return path_ == SolvePath::Cholesky ? Vector<Scalar>(llt_->solve(b))
                                        : Vector<Scalar>(ldlt_->solve(b));
  }

 private:
  void factorize() {
    llt_ = std::make_shared<Eigen::LLT<Matrix<Scalar>>>(z_);
    if (llt_->info() == Eigen::Success) {
      path_ = SolvePath::Cholesky;
      ok_ = true;
      return;
    }
    llt_.reset();
    ldlt_ = std::make_shared<Eigen::LDLT<Matrix<Scalar>>>(z_);
    path_ = SolvePath::SymmetricIndefinite;
    ok_ = ldlt_->info() == Eigen::Success;
    if (ok_) {
      // LDLT reports success on exactly singular input; catch that here.
      const auto d = ldlt_->vectorD();
      ok_ = d.size() == 0 || d.cwiseAbs().minCoeff() > std::numeric_limits<Scalar>::epsilon() *
                                                             d.cwiseAbs().maxCoeff();
    }
  }

  Matrix<Scalar> z_;
  Scalar t_;
  std::shared_ptr<const Eigen::LLT<Matrix<Scalar>>> llt_;
  std::shared_ptr<const Eigen::LDLT<Matrix<Scalar>>> ldlt_;
  SolvePath path_ = SolvePath::Cholesky;
  bool ok_ = false;
};

template <typename Scalar>
SimilarityMatrix<Scalar> similarity_matrix(const MetricMatrix<Scalar>& d, Scalar t) {
  if (!(t > 0) || !std::isfinite(static_cast<double>(t))) {
    throw Error(ErrorCode::NonPositiveScale, "scale t must be positive and finite");
  }
  Matrix<Scalar> z = (-t * d.matrix().array()).exp().matrix();
  z.diagonal().setOnes();
  return SimilarityMatrix<Scalar>(std::move(z), t);
}

template <typename Scalar = double>
struct Weighting {
  Vector<Scalar> w;
  Scalar t = 0;
  Scalar magnitude = 0;
  Scalar residual = 0;  // ||Z w - 1||_inf
  SolvePath path = SolvePath::Cholesky;
};

inline constexpr double kDefaultTolResPerPoint = 1e-8;

/// Solves Z w = 1. The residual tolerance defaults to 1e-8 * n.
template <typename Scalar>
Weighting<Scalar> weighting(const SimilarityMatrix<Scalar>& z,
                            std::optional<Scalar> tol_res = std::nullopt) {
  const Index n = z.size();
  const Scalar tol = tol_res.value_or(Scalar(kDefaultTolResPerPoint) * Scalar(std::max<Index>(n, 1)));
  if (!z.factorization_ok()) {
    throw Error(ErrorCode::SingularOrIndefinite, "similarity matrix could not be factorized");
  }
  Weighting<Scalar> out;
  out.t = z.scale();
  out.path = z.solve_path();
  const Vector<Scalar> ones = Vector<Scalar>::Ones(n);
  out.w = z.solve(ones);
  if (!out.w.allFinite()) {
    throw Error(ErrorCode::SingularOrIndefinite, "weighting solve produced non-finite values");
  }
  out.residual = n == 0 ? Scalar(0) : (z.matrix() * out.w - ones).cwiseAbs().maxCoeff();
  if (out.residual > tol) {
    throw Error(ErrorCode::ResidualTooLarge,
                "||Zw - 1||_inf = " + std::to_string(static_cast<double>(out.residual)));
  }
  out.magnitude = out.w.sum();
  return out;
}

template <typename Scalar = double>
struct ProfilePoint {
  Scalar t = 0;
  std::optional<Weighting<Scalar>> weighting;  // empty when the solve failed
  std::string error;
};

/// 50 log-spaced scales over [1e-2, 1e2] divided by the median off-diagonal
/// distance.
template <typename Scalar>
std::vector<Scalar> default_t_grid(const MetricMatrix<Scalar>& d, int points = 50) {
  std::vector<Scalar> off;
  for (Index k = 0; k < d.size(); ++k)
    for (Index j = k + 1; j < d.size(); ++j) off.push_back(d(j, k));
  Scalar median = 1;
  if (!off.empty()) {
    auto mid = off.begin() + static_cast<std::ptrdiff_t>(off.size() / 2);
    std::nth_element(off.begin(), mid, off.end());
    median = *mid;
  }
  std::vector<Scalar> grid;
  grid.reserve(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    const Scalar e = points == 1 ? Scalar(-2) : Scalar(-2) + Scalar(4) * Scalar(i) / Scalar(points - 1);
    grid.push_back(std::pow(Scalar(10), e) / median);
  }
  return grid;
}

template <typename Scalar>
std::vector<ProfilePoint<Scalar>> magnitude_profile(const MetricMatrix<Scalar>& d,
                                                    const std::vector<Scalar>& t_grid,
                                                    std::optional<Scalar> tol_res = std::nullopt) {
  if (t_grid.empty()) throw Error(ErrorCode::InvalidArgument, "t grid is empty");
  for (Scalar t : t_grid)
    if (!(t > 0)) throw Error(ErrorCode::NonPositiveScale, "all grid scales must be positive");
  std::vector<ProfilePoint<Scalar>> out;
  out.reserve(t_grid.size());
  for (Scalar t : t_grid) {
    ProfilePoint<Scalar> pt;
    pt.t = t;
    try {
      pt.weighting = weighting(similarity_matrix(d, t), tol_res);
    } catch (const Error& e) {
      pt.error = e.what();
    }
    out.push_back(std::move(pt));
  }
  return out;
}

}  // namespace magpeel
