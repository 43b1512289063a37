#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "magpeel/diversity.hpp"
#include "magpeel/metric.hpp"

namespace magpeel {

inline constexpr double kDefaultTolNeg = 1e-12;
inline constexpr double kDefaultTolKkt = 1e-8;

/// One peel: the maximizer of p^T d p over the simplex.
template <typename Scalar = double>
struct PeelLayer {
  SimplexVector<Scalar> p_star;
  std::vector<Index> support;
  int iterations = 0;            // extra while-loop passes after the first solve
  Scalar entropy = 0;            // p^T d p
  Scalar kkt_residual = 0;
  Vector<Scalar> pre_clip;       // last solve, before clipping and renormalization
  std::vector<Index> support_trace;  // |J| at the first solve and after each pass
  int completion_passes = 0;     // active-set passes after the loop (0 when its output is already optimal)
  long qp_iterations = 0;        // projected-gradient steps when the restricted solves failed
  bool heuristic = false;        // d was not certified strict negative type
  std::optional<Scalar> ratio_bound;
};

namespace detail {

// d_{J,J} x = 1 through partial-pivot LU; strict negative type matrices are
// indefinite with a zero diagonal, so Cholesky-style pivots do not apply.
template <typename Scalar>
Vector<Scalar> solve_ones(const Matrix<Scalar>& dj, ErrorCode on_fail) {
  const Index m = dj.rows();
  if (m == 1) {
    // 1x1 restriction has d = 0; the peel is the point mass.
    return Vector<Scalar>::Ones(1);
  }
  Eigen::PartialPivLU<Matrix<Scalar>> lu(dj);
  // rcond() is an estimate and can miss an exactly zero pivot, so the pivot
  // spread is checked as well.
  const Vector<Scalar> piv = lu.matrixLU().diagonal().cwiseAbs();
  const Scalar rc = std::min(lu.rcond(), piv.minCoeff() / piv.maxCoeff());
  if (!(rc > Scalar(64) * std::numeric_limits<Scalar>::epsilon())) {
    throw Error(on_fail, "restricted distance matrix is singular (rcond " +
                             std::to_string(static_cast<double>(rc)) + ")");
  }
  Vector<Scalar> x = lu.solve(Vector<Scalar>::Ones(m));
  if (!x.allFinite()) throw Error(on_fail, "restricted solve produced non-finite values");
  return x;
}

template <typename Scalar>
Matrix<Scalar> principal(const Matrix<Scalar>& d, const std::vector<Index>& idx) {
  return d(idx, idx);
}

}  // namespace detail

/// KKT check for the quadratic entropy maximizer: p on the simplex, (dp)_j
/// constant on the support and no larger off it.
template <typename Scalar>
std::pair<bool, Scalar> verify_kkt(const MetricMatrix<Scalar>& d, const Vector<Scalar>& p,
                                   Scalar tol_kkt = Scalar(kDefaultTolKkt)) {
  if (d.size() != p.size()) throw Error(ErrorCode::DimensionMismatch, "metric and vector sizes differ");
  const Index n = p.size();
  if (n == 0) return {false, std::numeric_limits<Scalar>::infinity()};
  const bool on_simplex = p.minCoeff() >= 0 && std::abs(p.sum() - Scalar(1)) <= tol_kkt;
  const Vector<Scalar> g = d.matrix() * p;
  Scalar sup_min = std::numeric_limits<Scalar>::infinity();
  Scalar sup_max = -std::numeric_limits<Scalar>::infinity();
  Scalar off_max = -std::numeric_limits<Scalar>::infinity();
  for (Index j = 0; j < n; ++j) {
    if (p(j) > 0) {
      sup_min = std::min(sup_min, g(j));
      sup_max = std::max(sup_max, g(j));
    } else {
      off_max = std::max(off_max, g(j));
    }
  }
  if (!(sup_max >= sup_min)) return {false, std::numeric_limits<Scalar>::infinity()};
  Scalar residual = sup_max - sup_min;
  if (off_max > -std::numeric_limits<Scalar>::infinity()) residual += std::max(Scalar(0), off_max - sup_min);
  return {on_simplex && residual <= tol_kkt, residual};
}

template <typename Scalar>
std::pair<bool, Scalar> verify_kkt(const MetricMatrix<Scalar>& d, const SimplexVector<Scalar>& p,
                                   Scalar tol_kkt = Scalar(kDefaultTolKkt)) {
  return verify_kkt(d, p.vector(), tol_kkt);
}

namespace detail {

// p supported on idx, proportional to d_JJ^{-1} 1.
template <typename Scalar>
Vector<Scalar> stationary_on(const MetricMatrix<Scalar>& d, const std::vector<Index>& idx) {
  const Index n = d.size();
  const bool full = static_cast<Index>(idx.size()) == n;
  Vector<Scalar> x = solve_ones<Scalar>(full ? d.matrix() : principal(d.matrix(), idx),
                                        full ? ErrorCode::SingularMatrix : ErrorCode::SingularSubmatrix);
  const Scalar s = x.sum();
  if (!(s > 0)) {
    throw Error(ErrorCode::SingularSubmatrix, "1^T d_JJ^{-1} 1 is not positive; d is not strict negative type");
  }
  Vector<Scalar> p = Vector<Scalar>::Zero(n);
  for (std::size_t a = 0; a < idx.size(); ++a) p(idx[a]) = x(static_cast<Index>(a)) / s;
  return p;
}

// Primal active-set method from a feasible p that is stationary on its
// support: add the off-support index with the largest (dp)_k, re-solve, and
// step back to the boundary whenever the new solve leaves the simplex.
template <typename Scalar>
int active_set_completion(const MetricMatrix<Scalar>& d, std::vector<Index>& working, Vector<Scalar>& p,
                          Scalar tol_neg) {
  const Index n = d.size();
  const int max_passes = static_cast<int>(4 * n + 8);
  int passes = 0;
  for (;;) {
    const Vector<Scalar> g = d.matrix() * p;
    Scalar level = std::numeric_limits<Scalar>::infinity();
    for (Index j : working) level = std::min(level, g(j));
    std::vector<bool> in(static_cast<std::size_t>(n), false);
    for (Index j : working) in[static_cast<std::size_t>(j)] = true;
    Index add = -1;
    Scalar excess = Scalar(1e-13) * std::abs(level);
    for (Index k = 0; k < n; ++k) {
      if (!in[static_cast<std::size_t>(k)] && g(k) - level > excess) {
        excess = g(k) - level;
        add = k;
      }
    }
    if (add < 0) return passes;
    if (++passes > max_passes) throw Error(ErrorCode::IterationOverflow, "active-set completion did not terminate");
    working.push_back(add);
    std::sort(working.begin(), working.end());
    for (bool first = true;; first = false) {
      const Vector<Scalar> z = stationary_on(d, working);
      if (first && z(add) <= 0) {
        // the entering index cannot grow: a noise-level violation
        working.erase(std::find(working.begin(), working.end(), add));
        return passes;
      }
      Scalar alpha = 1;
      for (Index j : working)
        if (z(j) <= 0) alpha = std::min(alpha, p(j) / (p(j) - z(j)));
      if (alpha >= 1) {
        p = z;
        break;
      }
      p += alpha * (z - p);
      std::vector<Index> next;
      for (Index j : working) {
        if (p(j) > tol_neg) next.push_back(j);
        else p(j) = 0;
      }
      working = std::move(next);
      p /= p.sum();
    }
  }
}

}  // namespace detail

/// Maximizes quadratic entropy p^T d p over the simplex for strict negative
/// type d. Starts from the affine extremum d^{-1}1 / 1^T d^{-1} 1 and, while
/// it has negative entries, restricts to the positive ones and re-solves.
/// Each pass strictly shrinks the working set, so there are at most n passes.
///
/// The loop alone can stop on a support that misses a point with larger
/// (dp)_k (it happens for point clouds in three or more dimensions). With
/// `complete` set, an active-set completion then restores the optimality
/// conditions; `completion_passes` counts its steps.
template <typename Scalar>
PeelLayer<Scalar> scale_zero_argmax_diversity(const MetricMatrix<Scalar>& d,
                                              Scalar tol_neg = Scalar(kDefaultTolNeg), bool complete = true) {
  const Index n = d.size();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "cannot peel an empty space");
  PeelLayer<Scalar> layer;

  std::vector<Index> working(static_cast<std::size_t>(n));
  std::iota(working.begin(), working.end(), Index(0));

  Vector<Scalar> p = detail::stationary_on(d, working);
  layer.support_trace.push_back(static_cast<Index>(working.size()));
  while (p.minCoeff() < -tol_neg) {
    std::vector<Index> next;
    for (Index j : working)
      if (p(j) > tol_neg) next.push_back(j);
    if (next.size() >= working.size() || next.empty()) {
      throw Error(ErrorCode::IterationOverflow, "working set failed to shrink");
    }
    working = std::move(next);
    p = detail::stationary_on(d, working);
    ++layer.iterations;
    layer.support_trace.push_back(static_cast<Index>(working.size()));
  }

  layer.pre_clip = p;
  for (Index j = 0; j < n; ++j)
    if (p(j) <= tol_neg) p(j) = 0;
  if (complete && n > 1) {
    std::vector<Index> support;
    for (Index j = 0; j < n; ++j)
      if (p(j) > 0) support.push_back(j);
    p /= p.sum();
    layer.completion_passes = detail::active_set_completion(d, support, p, tol_neg);
    for (Index j = 0; j < n; ++j)
      if (p(j) <= tol_neg) p(j) = 0;
  }
  layer.p_star = SimplexVector<Scalar>(p);
  layer.support = layer.p_star.support();
  layer.entropy = quadratic_entropy(d, layer.p_star);
  layer.kkt_residual = verify_kkt(d, layer.p_star).second;
  return layer;
}

/// Argmax of p^T d p over the affine plane 1^T p = 1 (entries may be negative)
/// and its value 1 / (1^T d^{-1} 1).
template <typename Scalar = double>
struct AffineExtremum {
  Vector<Scalar> p_aff;
  Scalar value = 0;
  Scalar ones_dinv_ones = 0;
};

template <typename Scalar>
AffineExtremum<Scalar> affine_extremum(const MetricMatrix<Scalar>& d) {
  if (d.size() < 2) throw Error(ErrorCode::SingularMatrix, "d is singular for n < 2");
  const Vector<Scalar> x = detail::solve_ones<Scalar>(d.matrix(), ErrorCode::SingularMatrix);
  AffineExtremum<Scalar> out;
  out.ones_dinv_ones = x.sum();
  if (out.ones_dinv_ones == Scalar(0)) throw Error(ErrorCode::SingularMatrix, "1^T d^{-1} 1 = 0");
  out.p_aff = x / out.ones_dinv_ones;
  out.value = Scalar(1) / out.ones_dinv_ones;
  return out;
}

/// (p^T d p)(1^T d^{-1} 1): lower bound on the small-scale diversity ratio
/// log D_1(p) / max log D_1.
template <typename Scalar>
Scalar diversity_ratio_bound(const MetricMatrix<Scalar>& d, const SimplexVector<Scalar>& p) {
  return quadratic_entropy(d, p) * affine_extremum(d).ones_dinv_ones;
}

struct MedoidResult {
  Index index = 0;
  std::vector<Index> tied;  // all indices attaining the minimum row sum
};

/// argmin_j sum_k d(j,k), lowest index on ties.
template <typename Scalar>
MedoidResult medoid(const MetricMatrix<Scalar>& d) {
  if (d.size() == 0) throw Error(ErrorCode::InvalidArgument, "medoid of an empty space");
  const Vector<Scalar> sums = d.matrix().rowwise().sum();
  const Scalar best = sums.minCoeff();
  MedoidResult out;
  for (Index j = 0; j < sums.size(); ++j)
    if (sums(j) == best) out.tied.push_back(j);
  out.index = out.tied.front();
  return out;
}

/// Euclidean projection onto the probability simplex (sort-based).
template <typename Scalar>
Vector<Scalar> project_to_simplex(const Vector<Scalar>& v) {
  const Index n = v.size();
  std::vector<Scalar> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<Scalar>());
  Scalar cum = 0, theta = 0;
  for (Index r = 0; r < n; ++r) {
    cum += u[static_cast<std::size_t>(r)];
    const Scalar cand = (cum - Scalar(1)) / Scalar(r + 1);
    if (u[static_cast<std::size_t>(r)] - cand > 0) theta = cand;
  }
  return (v.array() - theta).max(Scalar(0)).matrix();
}

/// Upper bound on the spectral norm of a symmetric nonnegative matrix:
/// power iterations followed by the Collatz-Wielandt bound max_i (Ax)_i / x_i.
template <typename Scalar>
Scalar perron_norm_bound(const Matrix<Scalar>& a, int iterations = 50) {
  const Index n = a.rows();
  Vector<Scalar> x = Vector<Scalar>::Ones(n);
  for (int it = 0; it < iterations; ++it) {
    Vector<Scalar> y = a * x;
    x = y / y.maxCoeff();
  }
  const Vector<Scalar> ax = a * x;
  return (ax.array() / x.array()).maxCoeff();
}

template <typename Scalar = double>
struct QpResult {
  SimplexVector<Scalar> p;
  long iterations = 0;
  Scalar gradient_map_norm = 0;
};

/// Reference maximizer of p^T d p on the simplex: projected gradient ascent
/// with step 1/(2||d||_2) and Nesterov momentum, restarted whenever the step
/// turns against the momentum. Stops when the gradient mapping's sup-norm is
/// at most `tol`. Shares no code with the peel.
template <typename Scalar>
QpResult<Scalar> qp_oracle(const MetricMatrix<Scalar>& d, Scalar tol = Scalar(1e-10),
                           long max_iter = 1'000'000) {
  const Index n = d.size();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "empty metric");
  QpResult<Scalar> out;
  Vector<Scalar> p = Vector<Scalar>::Constant(n, Scalar(1) / Scalar(n));
  if (n == 1) {
    out.p = SimplexVector<Scalar>(p);
    return out;
  }
  const Scalar lip = Scalar(2) * perron_norm_bound(d.matrix());
  const Scalar step = Scalar(1) / lip;
  Vector<Scalar> y = p;
  Scalar theta = 1;
  for (long it = 0; it < max_iter; ++it) {
    const Vector<Scalar> grad = Scalar(2) * (d.matrix() * y);
    Vector<Scalar> next = project_to_simplex<Scalar>(y + step * grad);
    const Scalar gm = lip * (next - y).cwiseAbs().maxCoeff();
    if (gm <= tol) {
      out.p = SimplexVector<Scalar>(next);
      out.iterations = it + 1;
      out.gradient_map_norm = gm;
      return out;
    }
    const Vector<Scalar> move = next - p;
    if ((next - y).dot(move) < 0) {
      theta = 1;  // restart: momentum points downhill
      y = next;
    } else {
      const Scalar theta_next = (Scalar(1) + std::sqrt(Scalar(1) + Scalar(4) * theta * theta)) / Scalar(2);
      y = next + ((theta - Scalar(1)) / theta_next) * move;
      theta = theta_next;
    }
    p = std::move(next);
  }
  throw Error(ErrorCode::NoConvergence,
              "projected gradient ascent did not converge in " + std::to_string(max_iter) + " iterations");
}

struct PeelOptions {
  double tol_neg = kDefaultTolNeg;
  double tol_eig = kDefaultTolEig;
  bool skip_certify = false;
  bool assume_heuristic = false;  // caller already knows d is not certified strict
};

/// Peel for negative type input that is not certified strict. Such a d is
/// either singular or has 1^T d^{-1} 1 = 0, so the full solve fails; the
/// objective is still concave on the simplex, and projected gradient ascent
/// then finds a maximizer.
template <typename Scalar>
PeelLayer<Scalar> heuristic_peel(const MetricMatrix<Scalar>& d, Scalar tol_neg = Scalar(kDefaultTolNeg)) {
  PeelLayer<Scalar> layer;
  try {
    layer = scale_zero_argmax_diversity(d, tol_neg);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SingularMatrix && e.code() != ErrorCode::SingularSubmatrix) throw;
    const Scalar scale = std::max(d.matrix().maxCoeff(), Scalar(1e-300));
    const QpResult<Scalar> qp = qp_oracle(d, Scalar(1e-10) * scale);
    layer = PeelLayer<Scalar>{};
    layer.p_star = qp.p;
    layer.pre_clip = qp.p.vector();
    layer.support = qp.p.support();
    layer.qp_iterations = qp.iterations;
    layer.entropy = quadratic_entropy(d, layer.p_star);
    layer.kkt_residual = verify_kkt(d, layer.p_star).second;
  }
  layer.heuristic = true;
  if (d.size() >= 2) {
    try {
      layer.ratio_bound = diversity_ratio_bound(d, layer.p_star);
    } catch (const Error&) {
    }
  }
  return layer;
}

/// Certifies d, then peels. NegativeTypeOnly input goes through
/// heuristic_peel and is tagged; NotNegativeType input is rejected.
template <typename Scalar>
PeelLayer<Scalar> certified_peel(const MetricMatrix<Scalar>& d, const PeelOptions& opt = {},
                                 std::optional<NegativeTypeClass>* cls_out = nullptr) {
  bool heuristic = opt.assume_heuristic;
  if (!opt.skip_certify && d.size() >= 2) {
    const NegativeTypeClass cls = classify_negative_type(d, Scalar(opt.tol_eig));
    if (cls_out) *cls_out = cls;
    if (cls.kind == NegativeType::NotNegativeType) {
      throw Error(ErrorCode::NotNegativeType, "metric is not negative type (min eigenvalue " +
                                                  std::to_string(cls.min_eigenvalue) + ")");
    }
    heuristic = heuristic || cls.kind == NegativeType::NegativeTypeOnly;
  }
  if (heuristic) return heuristic_peel(d, Scalar(opt.tol_neg));
  return scale_zero_argmax_diversity(d, Scalar(opt.tol_neg));
}

/// A layer of an iterated peel, in original indices.
template <typename Scalar = double>
struct PeelDecompositionLayer {
  std::vector<Index> domain;   // residual index set the layer was computed on
  std::vector<Index> indices;  // support, as original indices
  std::vector<Scalar> weights; // p_* on `indices`
  PeelLayer<Scalar> peel;      // over `domain` positions
};

template <typename Scalar = double>
struct PeelDecomposition {
  std::vector<PeelDecompositionLayer<Scalar>> layers;
  std::vector<int> residual_order;  // layer at which each original index was peeled, -1 if never
};

/// Peels, removes the support, and repeats on the residual set until it is
/// empty or `max_layers` layers exist. With `heuristic` set each layer goes
/// through heuristic_peel.
template <typename Scalar>
PeelDecomposition<Scalar> iterated_peeling(const MetricMatrix<Scalar>& d,
                                           std::optional<int> max_layers = std::nullopt,
                                           Scalar tol_neg = Scalar(kDefaultTolNeg), bool heuristic = false) {
  PeelDecomposition<Scalar> out;
  out.residual_order.assign(static_cast<std::size_t>(d.size()), -1);
  std::vector<Index> remaining(static_cast<std::size_t>(d.size()));
  std::iota(remaining.begin(), remaining.end(), Index(0));
  while (!remaining.empty() && (!max_layers || static_cast<int>(out.layers.size()) < *max_layers)) {
    const int layer_no = static_cast<int>(out.layers.size());
    PeelDecompositionLayer<Scalar> L;
    L.domain = remaining;
    try {
      const auto sub = d.restrict(remaining);
      L.peel = heuristic ? heuristic_peel(sub, tol_neg) : scale_zero_argmax_diversity(sub, tol_neg);
    } catch (const Error& e) {
      throw Error(e.code(), "layer " + std::to_string(layer_no) + ": " + e.what());
    }
    std::vector<bool> taken(remaining.size(), false);
    for (Index pos : L.peel.support) {
      taken[static_cast<std::size_t>(pos)] = true;
      L.indices.push_back(remaining[static_cast<std::size_t>(pos)]);
      L.weights.push_back(L.peel.p_star(pos));
      out.residual_order[static_cast<std::size_t>(remaining[static_cast<std::size_t>(pos)])] = layer_no;
    }
    std::vector<Index> next;
    for (std::size_t a = 0; a < remaining.size(); ++a)
      if (!taken[a]) next.push_back(remaining[a]);
    remaining = std::move(next);
    out.layers.push_back(std::move(L));
  }
  return out;
}

}  // namespace magpeel
