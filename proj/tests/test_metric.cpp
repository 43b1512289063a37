#include "doctest.h"
#include "magpeel/metric.hpp"
#include "magpeel/product.hpp"
#include "support.hpp"

using namespace magpeel;
using namespace testing_support;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

Mat sphere_points(bool with_west) {
  Mat x(with_west ? 4 : 3, 3);
  x.row(0) << 0, 0, 1;
  x.row(1) << 0, 0, -1;
  x.row(2) << 1, 0, 0;
  if (with_west) x.row(3) << -1, 0, 0;
  return x;
}

}  // namespace

TEST_SUITE("metric") {

TEST_CASE("validate_metric accepts the two-point metric") {
  Mat raw(2, 2);
  raw << 0, 1, 1, 0;
  const auto d = validate_metric(raw, 1e-9);
  CHECK(d.size() == 2);
  CHECK(d(0, 1) == 1.0);
}

TEST_CASE("validate_metric accepts the three-point space with a near pair") {
  Mat raw(3, 3);
  raw << 0, 1, 1, 1, 0, 0.01, 1, 0.01, 0;
  ValidationReport rep;
  const auto d = validate_metric(raw, 1e-9, {}, &rep);
  CHECK(d(1, 2) == 0.01);
  CHECK(rep.max_triangle_violation <= 0);
  CHECK(rep.max_asymmetry == 0);
}

TEST_CASE("validate_metric rejects a nonzero diagonal") {
  Mat raw(2, 2);
  raw << 0, 1, 1, 0.5;
  CHECK(code_of([&] { validate_metric(raw, 1e-9); }) == ErrorCode::NonzeroDiagonal);
}

TEST_CASE("validate_metric input errors") {
  Mat rect(2, 3);
  rect.setZero();
  CHECK(code_of([&] { validate_metric(rect, 1e-9); }) == ErrorCode::NonSquare);

  Mat neg(2, 2);
  neg << 0, -1, -1, 0;
  CHECK(code_of([&] { validate_metric(neg, 1e-9); }) == ErrorCode::NegativeEntry);

  Mat inf(2, 2);
  inf << 0, std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), 0;
  CHECK(code_of([&] { validate_metric(inf, 1e-9); }) == ErrorCode::NonFiniteEntry);

  Mat nan(2, 2);
  nan << 0, std::nan(""), std::nan(""), 0;
  CHECK(code_of([&] { validate_metric(nan, 1e-9); }) == ErrorCode::NonFiniteEntry);

  Mat asym(2, 2);
  asym << 0, 1, 1.1, 0;
  CHECK(code_of([&] { validate_metric(asym, 1e-9); }) == ErrorCode::AsymmetryBeyondTolerance);

  Mat dup(3, 3);
  dup << 0, 1, 1, 1, 0, 0, 1, 0, 0;
  CHECK(code_of([&] { validate_metric(dup, 1e-9); }) == ErrorCode::DuplicatePoints);

  CHECK(code_of([&] { validate_metric(Mat::Zero(2, 2), -1.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("validate_metric symmetrizes small asymmetry exactly") {
  Mat raw(2, 2);
  raw << 0, 1, 1 + 1e-12, 0;
  ValidationReport rep;
  const auto d = validate_metric(raw, 1e-9, {}, &rep);
  CHECK(d(0, 1) == d(1, 0));
  CHECK(d(0, 1) == doctest::Approx(1 + 5e-13).epsilon(1e-15));
  CHECK(rep.max_asymmetry > 0);
}

TEST_CASE("validate_metric reports a triangle violation with its witness") {
  Mat raw(3, 3);
  raw << 0, 1, 5, 1, 0, 1, 5, 1, 0;
  try {
    validate_metric(raw, 1e-9);
    FAIL("expected TriangleViolation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TriangleViolation);
    const std::string msg = e.what();
    // the witness may be reported in either orientation
    const bool forward = msg.find("d(0,2) exceeds d(0,1) + d(1,2)") != std::string::npos;
    const bool backward = msg.find("d(2,0) exceeds d(2,1) + d(1,0)") != std::string::npos;
    CHECK((forward || backward));
    CHECK(msg.find("by 3") != std::string::npos);
  }
}

TEST_CASE("validate_metric keeps labels and checks their count") {
  Mat raw(2, 2);
  raw << 0, 1, 1, 0;
  const auto d = validate_metric(raw, 1e-9, {"a", "b"});
  CHECK(d.labels() == std::vector<std::string>{"a", "b"});
  CHECK(code_of([&] { validate_metric(raw, 1e-9, {"a"}); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("find_duplicate_groups merges coincident points") {
  Mat raw(4, 4);
  raw << 0, 0, 1, 1, 0, 0, 1, 1, 1, 1, 0, 2, 1, 1, 2, 0;
  const auto g = find_duplicate_groups(raw);
  CHECK(g.representatives == std::vector<Index>{0, 2, 3});
  CHECK(g.multiplicity == std::vector<Index>{2, 1, 1});
  CHECK(g.group_of == std::vector<Index>{0, 0, 1, 2});
}

TEST_CASE("reduced_test_matrix examples") {
  Mat raw(2, 2);
  raw << 0, 1, 1, 0;
  const auto t2 = reduced_test_matrix(MetricMatrix<double>::unchecked(raw), 0);
  CHECK(t2.rows() == 1);
  CHECK(t2(0, 0) == 2.0);

  const auto t3 = reduced_test_matrix(example1(0.01), 0);
  CHECK(t3(0, 0) == 2.0);
  CHECK(t3(1, 1) == 2.0);
  CHECK(t3(0, 1) == doctest::Approx(1.99).epsilon(1e-15));
  CHECK(t3(1, 0) == t3(0, 1));

  CHECK(code_of([&] { reduced_test_matrix(example1(0.01), 3); }) == ErrorCode::IndexOutOfRange);
  CHECK(code_of([&] { reduced_test_matrix(example1(0.01), -1); }) == ErrorCode::IndexOutOfRange);
}

TEST_CASE("classify_negative_type examples") {
  Rng rng(11);
  CHECK(classify_negative_type(random_euclidean(rng, 10, 2)).kind == NegativeType::StrictNegativeType);

  const auto nsew = spherical_distance_matrix(sphere_points(true));
  CHECK(nsew.antipodes_present);
  CHECK(classify_negative_type(nsew.metric).kind == NegativeType::NegativeTypeOnly);

  const auto d1 = random_euclidean(rng, 4, 2), d2 = random_euclidean(rng, 5, 2);
  CHECK(classify_negative_type(lp_product(d1, d2, 1.0).result).kind == NegativeType::NegativeTypeOnly);

  const auto k23 = classify_negative_type(k23_metric());
  CHECK(k23.kind == NegativeType::NotNegativeType);
  CHECK(k23.min_eigenvalue < 0);
}

TEST_CASE("three points N, S, E on the sphere are geodesically collinear and strict") {
  const auto nse = spherical_distance_matrix(sphere_points(false));
  CHECK(nse.antipodes_present);
  CHECK(classify_negative_type(nse.metric).kind == NegativeType::StrictNegativeType);
}

TEST_CASE("classification near the boundary is never strict") {
  const auto c = classify_negative_type(c4_metric());
  CHECK(c.kind == NegativeType::NegativeTypeOnly);
  CHECK(std::abs(c.min_eigenvalue) <= 1e-10 * c.max_abs_eigenvalue);
}

TEST_CASE("euclidean_distance_matrix examples") {
  Mat pts(3, 2);
  pts << 0, 0, 1, 0, 0, 1;
  const auto d2 = euclidean_distance_matrix(pts);
  CHECK(d2(0, 1) == 1.0);
  CHECK(d2(0, 2) == 1.0);
  CHECK(d2(1, 2) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  const auto d1 = euclidean_distance_matrix(pts, 1.0);
  CHECK(d1(1, 2) == 2.0);
  const auto d3 = euclidean_distance_matrix(pts, 3.0);
  CHECK(d3(1, 2) == doctest::Approx(std::cbrt(2.0)).epsilon(1e-14));

  Mat dup(2, 2);
  dup << 1, 2, 1, 2;
  CHECK(code_of([&] { euclidean_distance_matrix(dup); }) == ErrorCode::DuplicatePoints);
  CHECK(code_of([&] { euclidean_distance_matrix(pts, 0.5); }) == ErrorCode::InvalidExponent);
}

TEST_CASE("spherical_distance_matrix examples") {
  Mat v(2, 2);
  v << 1, 0, 0, 1;
  const auto s = spherical_distance_matrix(v);
  CHECK(s.metric(0, 1) == doctest::Approx(std::numbers::pi / 2).epsilon(1e-15));
  CHECK_FALSE(s.antipodes_present);

  Mat a(2, 2);
  a << 1, 0, -1, 0;
  const auto sa = spherical_distance_matrix(a);
  CHECK(sa.antipodes_present);
  CHECK(sa.metric(0, 1) == std::numbers::pi);

  Mat z(2, 2);
  z << 0, 0, 1, 0;
  CHECK(code_of([&] { spherical_distance_matrix(z); }) == ErrorCode::ZeroVector);

  Mat same(2, 2);
  same << 1, 0, 2, 0;
  CHECK(code_of([&] { spherical_distance_matrix(same); }) == ErrorCode::DuplicatePoints);
}

TEST_CASE("spherical distances stay accurate for nearly parallel vectors") {
  Mat v(2, 2);
  v << 1, 0, 1, 1e-9;
  const auto s = spherical_distance_matrix(v);
  CHECK(s.metric(0, 1) == doctest::Approx(1e-9).epsilon(1e-12));
}

TEST_CASE("single_linkage_ultrametric examples") {
  const auto u = single_linkage_ultrametric(line_metric({0, 1, 3}));
  CHECK(u(0, 2) == 2.0);
  CHECK(u(0, 1) == 1.0);
  CHECK(u(1, 2) == 2.0);

  const auto again = single_linkage_ultrametric(u);
  CHECK(again.matrix() == u.matrix());

  Mat two(2, 2);
  two << 0, 3, 3, 0;
  CHECK(single_linkage_ultrametric(MetricMatrix<double>::unchecked(two)).matrix() == two);
}

TEST_CASE("restrict and scaled") {
  const auto d = example1(0.1);
  const std::vector<Index> idx{2, 0};
  const auto r = d.restrict(idx);
  CHECK(r.size() == 2);
  CHECK(r(0, 1) == 1.0);
  CHECK(d.scaled(2.0)(1, 2) == 0.2);
  const std::vector<Index> bad{5};
  CHECK(code_of([&] { d.restrict(bad); }) == ErrorCode::IndexOutOfRange);
}

TEST_CASE("property: test matrix symmetric and classification independent of k") {
  Rng rng(101);
  for (int trial = 0; trial < 40; ++trial) {
    const Index n = rng.integer(2, 30);
    const Index dim = rng.integer(1, 4);
    MetricMatrix<double> d = trial % 4 == 3 ? single_linkage_ultrametric(random_euclidean(rng, n, dim))
                                            : random_euclidean(rng, n, dim);
    const auto base = classify_negative_type(d);
    for (Index k = 0; k < n; ++k) {
      const Mat t = reduced_test_matrix(d, k);
      CHECK(t == t.transpose());
      CHECK(classify_negative_type(d, 1e-10, k).kind == base.kind);
    }
  }
}

TEST_CASE("property: Euclidean L2 matrices are strict negative type") {
  Rng rng(202);
  for (int trial = 0; trial < 60; ++trial) {
    const Index n = rng.integer(2, 50);
    const auto d = random_euclidean(rng, n, rng.integer(1, 6));
    CHECK(classify_negative_type(d).kind == NegativeType::StrictNegativeType);
  }
}

TEST_CASE("property: single-linkage ultrametrics") {
  Rng rng(303);
  for (int trial = 0; trial < 40; ++trial) {
    const Index n = rng.integer(2, 50);
    const auto d = random_euclidean(rng, n, rng.integer(1, 4));
    const auto u = single_linkage_ultrametric(d);
    CHECK(u.matrix() == minimax_closure(d.matrix()));
    CHECK((u.matrix().array() <= d.matrix().array()).all());
    bool strong = true;
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        for (Index k = 0; k < n; ++k) strong = strong && u(j, k) <= std::max(u(j, i), u(i, k));
    CHECK(strong);
    CHECK(classify_negative_type(u).kind != NegativeType::NotNegativeType);
  }
}

}  // TEST_SUITE
