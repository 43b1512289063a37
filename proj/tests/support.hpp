#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "magpeel/metric.hpp"

namespace testing_support {

using magpeel::Index;
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Seeded generator with platform-independent draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) { return lo + static_cast<int>(eng_() % static_cast<std::uint64_t>(hi - lo + 1)); }
  double normal() {
    double u = uniform();
    while (u <= 0) u = uniform();
    return std::sqrt(-2 * std::log(u)) * std::cos(2 * std::numbers::pi * uniform());
  }

 private:
  std::mt19937_64 eng_;
};

inline Mat random_points(Rng& rng, Index n, Index dim) {
  Mat x(n, dim);
  for (Index i = 0; i < n; ++i)
    for (Index c = 0; c < dim; ++c) x(i, c) = rng.uniform();
  return x;
}

inline magpeel::MetricMatrix<double> random_euclidean(Rng& rng, Index n, Index dim) {
  return magpeel::euclidean_distance_matrix(random_points(rng, n, dim));
}

inline magpeel::MetricMatrix<double> example1(double delta) {
  Mat d(3, 3);
  d << 0, 1, 1, 1, 0, delta, 1, delta, 0;
  return magpeel::MetricMatrix<double>::unchecked(d);
}

inline magpeel::MetricMatrix<double> line_metric(const std::vector<double>& xs) {
  const Index n = static_cast<Index>(xs.size());
  Mat d(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) d(i, j) = std::abs(xs[i] - xs[j]);
  return magpeel::MetricMatrix<double>::unchecked(d);
}

/// Shortest-path metric of the complete bipartite graph K_{2,3}: a metric
/// that is not of negative type.
inline magpeel::MetricMatrix<double> k23_metric() {
  Mat d = Mat::Constant(5, 5, 2.0);
  for (Index i = 0; i < 5; ++i) d(i, i) = 0;
  for (Index i : {0, 1})
    for (Index j : {2, 3, 4}) d(i, j) = d(j, i) = 1;
  return magpeel::MetricMatrix<double>::unchecked(d);
}

/// 4-cycle graph metric: negative type, singular distance matrix.
inline magpeel::MetricMatrix<double> c4_metric() {
  Mat d(4, 4);
  d << 0, 1, 2, 1, 1, 0, 1, 2, 2, 1, 0, 1, 1, 2, 1, 0;
  return magpeel::MetricMatrix<double>::unchecked(d);
}

/// Weighting of the three-point space with d12 = d13 = 1, d23 = delta,
/// rewritten with expm1 so it stays accurate as t -> 0.
inline std::array<long double, 2> example1_weights(long double delta, long double t) {
  const long double A = std::expm1(t), B = std::expm1(delta * t);
  const long double a = std::exp(t), b = std::exp(delta * t);
  const long double denom = 4 * A + 2 * A * A - B + 2 * A * B + A * A * B;
  const long double w1 = a * (2 * A - B + A * B) / denom;
  const long double w2 = a * b * A / denom;
  return {w1, w2};
}

/// Minimax path weights by Floyd-Warshall over the complete graph.
inline Mat minimax_closure(const Mat& d) {
  Mat u = d;
  const Index n = d.rows();
  for (Index k = 0; k < n; ++k)
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) u(i, j) = std::min(u(i, j), std::max(u(i, k), u(k, j)));
  return u;
}

/// Maximizer of p^T d p on the simplex by enumerating supports: the optimum
/// is the unique support whose stationary point is positive and satisfies the
/// optimality conditions. Exponential in n; meant for n <= 10.
inline Vec exhaustive_peel(const Mat& d) {
  const Index n = d.rows();
  Vec best;
  double best_val = -1;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    std::vector<Index> s;
    for (Index j = 0; j < n; ++j)
      if (mask & (1u << j)) s.push_back(j);
    Vec p = Vec::Zero(n);
    if (s.size() == 1) {
      p(s[0]) = 1;
    } else {
      const Mat sub = d(s, s);
      const Vec x = sub.fullPivLu().solve(Vec::Ones(static_cast<Index>(s.size())));
      if (!(x.sum() > 0) || x.minCoeff() <= 0) continue;
      for (std::size_t a = 0; a < s.size(); ++a) p(s[a]) = x(static_cast<Index>(a)) / x.sum();
    }
    const double v = p.dot(d * p);
    if (v > best_val) {
      best_val = v;
      best = p;
    }
  }
  return best;
}

/// Every source -> target path with exactly `stops` interior nodes, by
/// depth-first search over an arc predicate.
inline void enumerate_paths(std::size_t n, std::size_t s, std::size_t t, int stops,
                            const std::function<bool(std::size_t, std::size_t)>& arc,
                            std::vector<std::vector<std::size_t>>& out) {
  std::vector<std::size_t> cur{s};
  std::function<void()> rec = [&] {
    const std::size_t v = cur.back();
    if (static_cast<int>(cur.size()) == stops + 1) {
      if (arc(v, t)) {
        cur.push_back(t);
        out.push_back(cur);
        cur.pop_back();
      }
      return;
    }
    for (std::size_t w = 0; w < n; ++w) {
      if (w == t || w == s || !arc(v, w)) continue;
      cur.push_back(w);
      rec();
      cur.pop_back();
    }
  };
  rec();
}

}  // namespace testing_support
