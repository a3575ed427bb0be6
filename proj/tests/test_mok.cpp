#include <doctest.h>

#include <cmath>
#include <cstring>

#include "helpers.hpp"

using namespace convaff;
using namespace testing;

namespace {

// max over theta in [0,1] of min_d <theta l1 + (1 - theta) l2, d>. The inner
// function is concave piecewise linear in theta, so its maximum sits at an
// endpoint or where two of the lines cross.
double two_piece_max_min(const Mat& pieces, const Mat& d) {
  const Vec u = (pieces.row(0) * d).transpose();
  const Vec v = (pieces.row(1) * d).transpose();
  auto g = [&](double t) { return (t * u + (1 - t) * v).minCoeff(); };
  double best = std::max(g(0), g(1));
  for (Index i = 0; i < d.cols(); ++i) {
    for (Index j = i + 1; j < d.cols(); ++j) {
      const double denom = (u(i) - v(i)) - (u(j) - v(j));
      if (std::abs(denom) < 1e-15) continue;
      const double t = (v(j) - v(i)) / denom;
      if (t > 0 && t < 1) best = std::max(best, g(t));
    }
  }
  return best;
}

double direct_target(const PolyhedralSublinear<double>& s, const Mat& d) {
  double best = 1e300;
  for (Index k = 0; k < d.cols(); ++k) best = std::min(best, evaluate(s, d.col(k)));
  return best;
}

}  // namespace

TEST_CASE("midpoint report examples") {
  const auto s = abs_sublinear();
  auto r = check_midpoint(s, columns({0.7}));
  CHECK(r.satisfied());
  CHECK(r.witnesses.empty());

  r = check_midpoint(s, columns({-1, 1}));
  CHECK_FALSE(r.satisfied());
  CHECK(r.violated_pairs == 1);
  CHECK(r.worst.first == 0);
  CHECK(r.worst.second == 1);
  CHECK(r.worst.value == doctest::Approx(1.0));

  const PolyhedralSublinear<double> relu(mat({{1}, {0}}));
  r = check_midpoint(relu, columns({0, 1}));
  CHECK(r.satisfied());
  REQUIRE(r.witnesses.size() == 1);
  CHECK(r.witnesses[0].candidate == 0);
  CHECK(r.witnesses[0].value == 0.0);

  CHECK_THROWS_AS(check_midpoint(s, Mat(1, 0)), Error);
}

TEST_CASE("witnesses follow input order") {
  // both candidates pass for the pair (0, 2); the first one is recorded
  const PolyhedralSublinear<double> relu(mat({{1}, {0}}));
  const auto r = check_midpoint(relu, columns({0, 0.5, 1}));
  REQUIRE(r.satisfied());
  REQUIRE(r.witnesses.size() == 3);
  for (const auto& w : r.witnesses) {
    CHECK(w.first < w.second);
    CHECK(w.candidate == 0);
  }
}

TEST_CASE("hand-solved certificates") {
  const auto s = abs_sublinear();
  auto c = solve_mok(s, columns({1}));
  CHECK(c.linear.w(0) == doctest::Approx(1.0));
  CHECK(c.value == doctest::Approx(1.0));
  CHECK(c.target == 1.0);
  CHECK(std::abs(c.gap) <= 1e-12);
  CHECK(c.midpoint.satisfied());

  const PolyhedralSublinear<double> relu(mat({{1}, {0}}));
  c = solve_mok(relu, columns({0, 1}));
  CHECK(std::abs(c.linear.w(0)) <= 1e-12);
  CHECK(std::abs(c.value) <= 1e-12);
  CHECK(c.target == 0.0);
  CHECK(c.guarantee_holds(1e-8));

  c = solve_mok(s, columns({-1, 1}));
  CHECK_FALSE(c.midpoint.satisfied());
  CHECK(c.weights(0) == doctest::Approx(0.5));
  CHECK(c.weights(1) == doctest::Approx(0.5));
  CHECK(std::abs(c.value) <= 1e-12);
  CHECK(c.target == 1.0);
  CHECK(c.gap == doctest::Approx(1.0));
  CHECK(c.guarantee_holds(1e-8));
}

TEST_CASE("weights lie in the simplex and L is their combination") {
  SplitMix64 rng(101);
  for (int trial = 0; trial < 40; ++trial) {
    const Index d = rng.integer(1, 4), p = rng.integer(1, 6), n = rng.integer(1, 10);
    Mat pieces(p, d), pts(d, n);
    for (Index i = 0; i < p; ++i) pieces.row(i) = random_vec(rng, d, 2).transpose();
    for (Index k = 0; k < n; ++k) pts.col(k) = random_vec(rng, d, 3);
    const PolyhedralSublinear<double> s(pieces);
    const auto c = solve_mok(s, pts);
    CHECK((c.weights.array() >= 0).all());
    CHECK(std::abs(c.weights.sum() - 1) <= 1e-12);
    CHECK((c.linear.w - pieces.transpose() * c.weights).norm() <= 1e-12);
    CHECK(c.gap >= -1e-9);
    CHECK(c.target == direct_target(s, pts));
    CHECK(c.guarantee_holds(1e-8));
    for (int k = 0; k < 250; ++k) {
      const Vec v = random_vec(rng, d, 10);
      CHECK(c.linear.w.dot(v) <= evaluate(s, v) + 1e-12);
    }
  }
}

TEST_CASE("two-piece instances match the exact max-min") {
  SplitMix64 rng(55);
  for (int trial = 0; trial < 100; ++trial) {
    const Index d = rng.integer(1, 3), n = rng.integer(1, 8);
    Mat pieces(2, d), pts(d, n);
    for (Index i = 0; i < 2; ++i) pieces.row(i) = random_vec(rng, d, 2).transpose();
    for (Index k = 0; k < n; ++k) pts.col(k) = random_vec(rng, d, 3);
    const auto c = solve_mok(PolyhedralSublinear<double>(pieces), pts);
    CHECK(c.value == doctest::Approx(two_piece_max_min(pieces, pts)).epsilon(1e-10));
  }
}

TEST_CASE("midpoint-satisfied instances close the gap") {
  // D on the ray t u and every piece with <l, u> >= 0: the smallest member
  // witnesses every pair, and inf_D S = t_min max_i <l_i, u>
  SplitMix64 rng(66);
  for (int trial = 0; trial < 60; ++trial) {
    const Index d = rng.integer(1, 3), p = rng.integer(1, 5), n = rng.integer(1, 8);
    const Vec u = random_vec(rng, d, 1).normalized();
    Mat pieces(p, d);
    for (Index i = 0; i < p; ++i) {
      Vec l = random_vec(rng, d, 2);
      if (l.dot(u) < 0) l = -l;
      pieces.row(i) = l.transpose();
    }
    Mat pts(d, n);
    double t_min = 1e300;
    for (Index k = 0; k < n; ++k) {
      const double t = rng.uniform(0, 3);
      t_min = std::min(t_min, t);
      pts.col(k) = t * u;
    }
    const PolyhedralSublinear<double> s(pieces);
    const auto c = solve_mok(s, pts);
    REQUIRE(c.midpoint.satisfied());
    CHECK(std::abs(c.gap) <= 1e-8);
    CHECK(c.target == doctest::Approx(t_min * (pieces * u).maxCoeff()).epsilon(1e-12));
  }
}

TEST_CASE("certificates are bit-identical across runs") {
  SplitMix64 rng(9);
  Mat pieces(5, 3), pts(3, 12);
  for (Index i = 0; i < 5; ++i) pieces.row(i) = random_vec(rng, 3, 2).transpose();
  for (Index k = 0; k < 12; ++k) pts.col(k) = random_vec(rng, 3, 3);
  const PolyhedralSublinear<double> s(pieces);
  const auto a = solve_mok(s, pts), b = solve_mok(s, pts);
  CHECK(a.weights == b.weights);
  CHECK(a.linear.w == b.linear.w);
  CHECK(std::memcmp(&a.value, &b.value, sizeof(double)) == 0);
  CHECK(std::memcmp(&a.lp_value, &b.lp_value, sizeof(double)) == 0);
}

TEST_CASE("errors") {
  const auto s = abs_sublinear();
  try {
    solve_mok(s, Mat(1, 0));
    FAIL("expected EmptySet");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptySet);
  }
  CHECK_THROWS_AS(solve_mok(s, Mat(Mat::Zero(2, 3))), Error);
}
