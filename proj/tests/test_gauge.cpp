#include <doctest.h>

#include <cmath>

#include "helpers.hpp"

using namespace convaff;
using namespace testing;

namespace {

ConvexOracle<double> square_oracle() {
  return {[](const Vec& x) { return x.squaredNorm(); }, {}, 1};
}

ConvexOracle<double> hyperbola_oracle() {
  return {[](const Vec& x) { return std::sqrt(1 + x.squaredNorm()); }, {}, 1};
}

// root of mu^2 + alpha mu - x^2 = 0, written without cancellation
double square_gauge(double x, double alpha) {
  const double disc = std::sqrt(alpha * alpha + 4 * x * x);
  return alpha > 0 ? 2 * x * x / (alpha + disc) : (disc - alpha) / 2;
}

// sqrt(mu^2 + 1) - 2 mu = alpha, the larger root of 3mu^2 + 4 alpha mu + alpha^2 - 1
double hyperbola_gauge(double alpha) {
  return (-4 * alpha + std::sqrt(4 * alpha * alpha + 12)) / 6;
}

// independent bisection on the written-out pieces
double scan_gauge(const MaxAffineFn<double>& f, const Vec& x, double alpha) {
  const double f0 = f.value_at_origin();
  auto fx = [&](double mu) { return mu * (brute_eval(f, Vec(x / mu)) - f0 - 1); };
  double lo = 0, hi = 1;
  while (!(fx(hi) < alpha)) hi *= 2;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (mid > 0 && fx(mid) < alpha) hi = mid;
    else lo = mid;
  }
  return hi;
}

}  // namespace

TEST_CASE("shift subtracts f(0) + 1") {
  const auto s = shift(abs_fn());
  CHECK(s.offsets()(0) == -1.0);
  CHECK(s.offsets()(1) == -1.0);
  CHECK(s(vec({0})) == -1.0);

  const auto t = shift(max_affine_1d({{1, 1}, {-2, 0}}));
  CHECK(t.slopes()(0, 0) == 1.0);
  CHECK(t.slopes()(1, 0) == -2.0);
  CHECK(t.offsets()(0) == -1.0);
  CHECK(t.offsets()(1) == -2.0);
  CHECK(t(vec({0})) == -1.0);
  CHECK(t.origin_value() == 1.0);

  const auto c = shift(max_affine_1d({{0, 4.5}}));
  CHECK(c.offsets()(0) == -1.0);

  SplitMix64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const auto f = random_max_affine(rng, rng.integer(1, 4), rng.integer(1, 6));
    const auto fs = shift(f);
    CHECK(fs(Vec(Vec::Zero(f.dim()))) == -1.0);
    CHECK((fs.offsets().array() <= -1.0).all());
  }
}

TEST_CASE("perspective values") {
  const auto f = abs_fn();
  CHECK(perspective(f, vec({2}), 1.0) == doctest::Approx(1.0));
  CHECK(perspective(f, vec({2}), 5.0) == doctest::Approx(-3.0));
  CHECK(perspective(f, vec({0}), 3.0) == doctest::Approx(-3.0));
  CHECK(perspective(square_oracle(), vec({0}), 3.0) == doctest::Approx(-3.0));
  CHECK_THROWS_AS(perspective(f, vec({1}), 0.0), Error);
  CHECK_THROWS_AS(perspective(square_oracle(), vec({1}), -1.0), Error);

  // f_x(nu) + nu <= f_x(mu) + mu for mu < nu
  SplitMix64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Index d = rng.integer(1, 3);
    const auto g = random_max_affine(rng, d, rng.integer(1, 5));
    const Vec x = random_vec(rng, d, 3);
    const double mu = rng.uniform(0.01, 5), nu = mu + rng.uniform(0.01, 5);
    CHECK(perspective(g, x, nu) + nu <= perspective(g, x, mu) + mu + 1e-12);
    CHECK(perspective(g, x, mu) ==
          doctest::Approx(mu * (brute_eval(g, Vec(x / mu)) - g.value_at_origin() - 1)).epsilon(1e-12));
  }
}

TEST_CASE("zero branch") {
  const auto f = abs_fn();
  CHECK(gauge_is_zero(f, vec({1}), 2.0));
  CHECK_FALSE(gauge_is_zero(f, vec({1}), 0.5));
  CHECK(gauge_is_zero(f, vec({0}), 1.0));
  CHECK(gauge_is_zero(to_oracle(f), vec({1}), 2.0));
  CHECK_FALSE(gauge_is_zero(to_oracle(f), vec({1}), 0.5));
  CHECK(gauge_is_zero(square_oracle(), vec({0}), 1.0));
  CHECK_FALSE(gauge_is_zero(square_oracle(), vec({1}), 1e6));

  // recession slope equals alpha and is approached from below
  const ZeroTest t = gauge_zero_test(hyperbola_oracle(), vec({1}), 1.0);
  CHECK(t.zero);
  CHECK(eval_gauge(hyperbola_oracle(), vec({1}), 1.0).value == 0.0);
}

TEST_CASE("closed form examples") {
  const auto f = abs_fn();
  auto g = eval_gauge(f, vec({2}), 1.0);
  CHECK(g.branch == GaugeBranch::Root);
  CHECK(g.value == doctest::Approx(1.0));
  CHECK(g.residual <= 1e-12);

  g = eval_gauge(f, vec({0}), -2.0);
  CHECK(g.value == doctest::Approx(2.0));

  const double on_graph = shift(f)(vec({3}));
  CHECK(on_graph == 2.0);
  CHECK(eval_gauge(f, vec({3}), on_graph).value == doctest::Approx(1.0));

  g = eval_gauge(f, vec({1}), 2.0);
  CHECK(g.branch == GaugeBranch::Zero);
  CHECK(g.value == 0.0);
  CHECK(g.residual == 0.0);
}

TEST_CASE("bisection path examples") {
  auto g = eval_gauge(to_oracle(abs_fn()), vec({2}), 1.0);
  CHECK(g.value == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(g.residual <= 1e-8);
  g = eval_gauge(square_oracle(), vec({2}), 0.0);
  CHECK(g.branch == GaugeBranch::Root);
  CHECK(std::abs(g.value - 2.0) <= 1e-9);

  SplitMix64 rng(11);
  for (int k = 0; k < 200; ++k) {
    const double x = rng.uniform(-5, 5), alpha = rng.uniform(-5, 5);
    const auto v = eval_gauge(square_oracle(), vec({x}), alpha);
    CHECK(std::abs(v.value - square_gauge(x, alpha)) <= 1e-6);
    const double be = rng.uniform(-3, 0.99);
    CHECK(std::abs(eval_gauge(hyperbola_oracle(), vec({1}), be).value - hyperbola_gauge(be)) <= 1e-6);
  }
}

TEST_CASE("bisection reports bracket failure") {
  const ConvexOracle<double> constant{[](const Vec&) { return 0.0; }, {}, 1};
  CHECK_THROWS_AS(eval_gauge(constant, vec({0}), -1e100), Error);
  try {
    eval_gauge(constant, vec({0}), -1e100);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::BracketFailure);
  }
  CHECK(eval_gauge(constant, vec({0}), -1e10).value == doctest::Approx(1e10));
}

TEST_CASE("closed form, bisection and a scan agree") {
  SplitMix64 rng(29);
  for (int trial = 0; trial < 60; ++trial) {
    const Index d = rng.integer(1, 4);
    const auto f = random_max_affine(rng, d, rng.integer(1, 6));
    const auto fs = shift(f);
    const auto o = to_oracle(f);
    for (int k = 0; k < 20; ++k) {
      const Vec x = random_vec(rng, d, 3);
      const double alpha = rng.uniform(-3, 3);
      const auto closed = eval_gauge(fs, x, alpha);
      const auto bis = eval_gauge(o, x, alpha);
      CHECK(std::abs(closed.value - bis.value) <= 1e-9);
      CHECK(gauge_is_zero(fs, x, alpha) == (closed.value == 0.0));
      if (closed.branch == GaugeBranch::Root) {
        CHECK(std::abs(closed.value * fs(Vec(x / closed.value)) - alpha) <= 1e-8);
        CHECK(std::abs(closed.value - scan_gauge(f, x, alpha)) <= 1e-9 * std::max(1.0, closed.value));
      }
    }
  }
}

TEST_CASE("sublinearity instances on the absolute value") {
  const auto f = abs_fn();
  auto s = [&](double x, double a) { return eval_gauge(f, vec({x}), a).value; };
  CHECK(s(4, 2) == doctest::Approx(2.0));
  CHECK(s(4, 2) == doctest::Approx(2 * s(2, 1)));
  CHECK(s(2, 1) == doctest::Approx(1.0));
  CHECK(s(-1, 1) == 0.0);
  CHECK(s(1, 2) == 0.0);
  CHECK(s(2, 1) + s(-1, 1) >= s(1, 2));
  CHECK(s(3, 1) == doctest::Approx(2.0));
  CHECK(s(3, 1) >= 1.0);
}

TEST_CASE("sublinearity suite on random instances") {
  SplitMix64 rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    const Index d = rng.integer(1, 4);
    const auto f = random_max_affine(rng, d, rng.integer(1, 6));
    const auto fs = shift(f);
    Mat pts(d, 80);
    Vec alphas(80);
    for (Index k = 0; k < 80; ++k) {
      pts.col(k) = random_vec(rng, d, 3);
      alphas(k) = rng.uniform(-3, 3);
    }
    const auto r = sublinearity_suite(fs, pts, alphas);
    CHECK(r.axis.ok());
    CHECK(r.hypograph.ok());
    CHECK(r.graph.ok());
    CHECK(r.origin.ok());
    CHECK(r.homogeneity.ok());
    CHECK(r.subadditivity.ok());
    CHECK(r.axis.passed == 80);
    CHECK(r.worst_root_residual <= 1e-8);

    const auto o = to_oracle(f);
    const auto rb = sublinearity_suite(
        fs, pts, alphas, [&](const Vec& x, double a) { return eval_gauge(o, x, a); });
    CHECK(rb.graph.ok());
    CHECK(rb.subadditivity.ok());
    CHECK(rb.homogeneity.ok());
  }
}

TEST_CASE("a broken gauge is caught") {
  const auto fs = shift(abs_fn());
  Mat pts(1, 20);
  Vec alphas(20);
  SplitMix64 rng(8);
  for (Index k = 0; k < 20; ++k) {
    pts(0, k) = rng.uniform(-3, 3);
    alphas(k) = rng.uniform(-3, 3);
  }
  auto wrong = [&](const Vec& x, double a) {
    GaugeValue<double> g = eval_gauge(fs, x, a);
    g.value *= 1.01;
    return g;
  };
  const auto r = sublinearity_suite(fs, pts, alphas, wrong);
  CHECK_FALSE(r.graph.ok());
  CHECK(r.graph.worst >= 0.01 - 1e-12);
  CHECK(r.graph.witness.size() == 2);
}

TEST_CASE("suite input validation") {
  const auto fs = shift(abs_fn());
  CHECK_THROWS_AS(sublinearity_suite(fs, Mat(1, 0), Vec(0)), Error);
  CHECK_THROWS_AS(sublinearity_suite(fs, Mat(Mat::Zero(2, 3)), Vec(Vec::Zero(3))), Error);
  CHECK_THROWS_AS(eval_gauge(fs, vec({1, 2}), 0.0), Error);
}
