#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"

using namespace convaff;
using namespace testing;

namespace {

FiniteScoredSet<double> scored(std::initializer_list<std::pair<double, double>> members) {
  FiniteScoredSet<double> b{Mat(1, static_cast<Index>(members.size())),
                            Vec(static_cast<Index>(members.size()))};
  Index k = 0;
  for (const auto& [x, beta] : members) {
    b.points(0, k) = x;
    b.scores(k) = beta;
    ++k;
  }
  return b;
}

Polytope<double> interval(double a, double b) { return {columns({a, b})}; }

// exact minimum of a max-affine function of one variable on [a, b]: an
// endpoint or a crossing of two pieces
double interval_min(const MaxAffineFn<double>& f, double a, double b) {
  auto val = [&](double x) { return brute_eval(f, vec({x})); };
  double best = std::min(val(a), val(b));
  for (Index i = 0; i < f.pieces(); ++i) {
    for (Index j = i + 1; j < f.pieces(); ++j) {
      const double ds = f.slopes()(i, 0) - f.slopes()(j, 0);
      if (std::abs(ds) < 1e-15) continue;
      const double x = (f.offsets()(j) - f.offsets()(i)) / ds;
      if (x > a && x < b) best = std::min(best, val(x));
    }
  }
  return best;
}

double sampled_min_gap(const MaxAffineFn<double>& f, const AffineMap<double>& a, SplitMix64& rng,
                       int n, double box) {
  double worst = 1e300;
  for (int k = 0; k < n; ++k) {
    const Vec x = random_vec(rng, f.dim(), box);
    worst = std::min(worst, brute_eval(f, x) - a.w.dot(x) - a.c);
  }
  return worst;
}

}  // namespace

TEST_CASE("support system for the absolute value") {
  const auto sys = build_gauge_support_lp(shift(abs_fn()));
  CHECK(sys.variables() == 2);
  CHECK(sys.slopes(0, 0) == 1.0);
  CHECK(sys.slopes(1, 0) == -1.0);
  CHECK(sys.budget(0) == 1.0);
  CHECK(sys.budget(1) == 1.0);

  const Vec mu = vec({1, 0});
  REQUIRE(sys.feasible(mu));
  const auto l = sys.lifted(mu);
  CHECK(l.Lambda.w(0) == 1.0);
  CHECK(l.lambda == 1.0);
  // x - alpha <= max(|x| - alpha, 0)
  for (double x = -4; x <= 4; x += 0.5) {
    for (double a = -4; a <= 4; a += 0.5) {
      CHECK(l(vec({x}), a) <= std::max(std::abs(x) - a, 0.0) + 1e-12);
    }
  }
  const auto zero = sys.lifted(Vec::Zero(2));
  CHECK(sys.feasible(Vec(Vec::Zero(2))));
  CHECK(zero.lambda == 0.0);
  CHECK_FALSE(sys.feasible(vec({0.7, 0.7})));

  // hand-eliminated form |Lambda| <= lambda <= 1
  SplitMix64 rng(4);
  for (int k = 0; k < 200; ++k) {
    const Vec m = vec({rng.uniform(), rng.uniform()});
    const auto ll = sys.lifted(m);
    CHECK(std::abs(ll.Lambda.w(0)) <= ll.lambda + 1e-15);
    CHECK(sys.feasible(m) == (ll.lambda <= 1 + 1e-12));
  }
}

TEST_CASE("support set soundness against the gauge and the conjugate") {
  SplitMix64 rng(808);
  for (int trial = 0; trial < 25; ++trial) {
    const Index d = rng.integer(1, 3);
    const auto f = random_max_affine(rng, d, rng.integer(1, 5));
    const auto fs = shift(f);
    const auto sys = build_gauge_support_lp(fs);
    Vec mu(sys.variables());
    for (Index i = 0; i < mu.size(); ++i) mu(i) = rng.uniform();
    mu /= sys.budget.dot(mu);  // on the budget boundary
    REQUIRE(sys.feasible(mu));
    const auto l = sys.lifted(mu);
    for (int k = 0; k < 400; ++k) {
      const Vec x = random_vec(rng, d, 5);
      const double alpha = rng.uniform(-5, 5);
      CHECK(l(x, alpha) <= eval_gauge(fs, x, alpha).value + 1e-9);
      // sup_x Lambda x - lambda fs(x) <= 1
      CHECK(l.Lambda.w.dot(x) - l.lambda * brute_eval(fs.function(), x) <= 1 + 1e-9);
    }
  }
}

TEST_CASE("infimum over scored sets") {
  const auto f = abs_fn();
  CHECK(min_over_scored_set<double>(f, scored({{2, 5}})).value == 7.0);
  CHECK(min_over_scored_set<double>(f, scored({{0, 0}})).value == 0.0);
  const LiftedPolytope<double> c{interval(1, 3), AffineTransform<double>::identity(1),
                                 {vec({0}), 0.0}};
  const auto m = min_over_scored_set<double>(f, c);
  CHECK(m.value == doctest::Approx(1.0));
  CHECK(m.point(0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(min_over_scored_set<double>(max_affine_1d({{1, 0}}), scored({{-2e12, 0}})), Error);
}

TEST_CASE("convex minimum over a polytope") {
  const auto f = abs_fn();
  auto h = min_convex_over_polytope(f, interval(1, 3));
  CHECK(h.point(0) == doctest::Approx(1.0));
  CHECK(h.value == doctest::Approx(1.0));
  h = min_convex_over_polytope(f, interval(-1, 1));
  CHECK(std::abs(h.point(0)) <= 1e-12);
  CHECK(std::abs(h.value) <= 1e-12);
  h = min_convex_over_polytope(max_affine_1d({{0, 2.5}}), interval(-4, 9));
  CHECK(h.value == 2.5);

  SplitMix64 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = random_max_affine(rng, 1, rng.integer(1, 6));
    const double a = rng.uniform(-3, 0), b = rng.uniform(0, 3);
    CHECK(min_convex_over_polytope(g, interval(a, b)).value ==
          doctest::Approx(interval_min(g, a, b)).epsilon(1e-10));
  }
}

TEST_CASE("pairwise recession condition") {
  const auto relu = max_affine_1d({{1, 0}, {0, 0}});
  CHECK(check_AFF3(abs_fn(), scored({{4, 1}})).satisfied());

  auto r = check_AFF3(relu, scored({{0, 0}, {0.5, 0}, {1, 0}}));
  REQUIRE(r.satisfied());
  REQUIRE(r.witnesses.size() == 3);
  // the first member witnesses every pair; the middle one would also do for (0, 2)
  for (const auto& w : r.witnesses) CHECK(w.candidate == 0);
  r = check_AFF3(relu, scored({{0.5, 0}, {0, 0}, {1, 0}}));
  REQUIRE(r.satisfied());
  for (const auto& w : r.witnesses) {
    if (w.first == 1 && w.second == 2) CHECK(w.candidate == 0);
  }

  r = check_AFF3(abs_fn(), scored({{0, 0}, {1, 0}}));
  CHECK_FALSE(r.satisfied());
  CHECK(r.worst.first == 0);
  CHECK(r.worst.second == 1);
  CHECK(r.worst.value == doctest::Approx(0.5));
}

TEST_CASE("synthesis from a finite scored set") {
  const auto f = abs_fn();
  auto c = synth_affine_from_B<double>(f, scored({{2, 5}}));
  CHECK(c.affine.w(0) == doctest::Approx(1.0));
  CHECK(std::abs(c.affine.c) <= 1e-12);
  CHECK(c.lhs == doctest::Approx(7.0));
  CHECK(c.rhs == 7.0);
  CHECK(c.lifted.Lambda.w(0) == doctest::Approx(1.0));
  CHECK(c.lifted.lambda == doctest::Approx(1.0));
  CHECK(c.t_star == doctest::Approx(1.0));
  CHECK(c.conclusion_holds(ToleranceConfig{}));

  // supporting map at a point
  c = synth_affine_from_B<double>(f, scored({{2, 0}}));
  CHECK(c.affine.w(0) == doctest::Approx(1.0));
  CHECK(c.affine.w(0) * 2 + c.affine.c == doctest::Approx(2.0));
  CHECK(c.dominated(ToleranceConfig{}));
}

TEST_CASE("synthesis over a lifted interval") {
  const auto f = abs_fn();
  const LiftedPolytope<double> b{interval(-1, 1), AffineTransform<double>::identity(1),
                                 {vec({0}), 0.0}};
  const auto c = synth_affine_from_B<double>(f, b);
  CHECK(std::abs(c.affine.w(0)) <= 1e-12);
  CHECK(std::abs(c.affine.c) <= 1e-12);
  CHECK(std::abs(c.lhs) <= 1e-12);
  CHECK(std::abs(c.rhs) <= 1e-12);
  CHECK(std::abs(c.lifted.Lambda.w(0)) <= 1e-12);
  CHECK(c.lifted.lambda == doctest::Approx(1.0));
  CHECK(c.t_star == doctest::Approx(1.0));
  CHECK(c.condition.structural);
  // S_f(+-1, -1) = 2 and S_f(0, -1) = 1 on the lifted set
  CHECK(eval_gauge(f, vec({1}), -1.0).value == doctest::Approx(2.0));
  CHECK(eval_gauge(f, vec({-1}), -1.0).value == doctest::Approx(2.0));
  CHECK(eval_gauge(f, vec({0}), -1.0).value == doctest::Approx(1.0));
}

TEST_CASE("supporting map at a point") {
  const auto f = abs_fn();
  auto a = support_at_point(f, vec({2}));
  CHECK(a.w(0) == 1.0);
  CHECK(a.c == 0.0);
  a = support_at_point(f, vec({0}));
  CHECK(a.w(0) == 1.0);
  CHECK(a.c == 0.0);
  a = support_at_point(max_affine_1d({{1, 0}, {0, 0}}), vec({-1}));
  CHECK(a.w(0) == 0.0);
  CHECK(a.c == 0.0);

  SplitMix64 rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const Index d = rng.integer(1, 3);
    const auto g = random_max_affine(rng, d, rng.integer(1, 5));
    const Vec x = random_vec(rng, d, 3);
    const auto direct = support_at_point(g, x);
    CHECK(direct.w.dot(x) + direct.c == doctest::Approx(brute_eval(g, x)).epsilon(1e-12));
    CHECK(sampled_min_gap(g, direct, rng, 500, 10) >= -1e-12);
    const auto via = synth_affine_from_B<double>(g, FiniteScoredSet<double>{x, vec({0})});
    CHECK(via.dominated(ToleranceConfig{}));
    CHECK(via.affine.w.dot(x) + via.affine.c == doctest::Approx(brute_eval(g, x)).epsilon(1e-9));
  }
}

TEST_CASE("Sun type synthesis") {
  const auto f = abs_fn();
  auto c = synth_sun(f, interval(1, 3));
  CHECK(c.affine.w(0) == doctest::Approx(1.0));
  CHECK(std::abs(c.affine.c) <= 1e-12);
  CHECK(c.lhs == doctest::Approx(1.0));
  CHECK(c.rhs == doctest::Approx(1.0));
  CHECK(c.kind == CertificateKind::Exact);

  c = synth_sun(f, interval(-1, 1));
  CHECK(std::abs(c.affine.w(0)) <= 1e-12);
  CHECK(std::abs(c.lhs) <= 1e-12);

  try {
    synth_sun(f, columns({-1, 1}));
    FAIL("expected a condition violation");
  } catch (const ConditionViolatedError& e) {
    CHECK(e.kind() == ErrorKind::ConditionViolated);
    CHECK(e.report().worst.first == 0);
    CHECK(e.report().worst.second == 1);
  }

  // a finite Z with slack satisfies the condition
  c = synth_sun(max_affine_1d({{1, 0}, {0, 0}}), columns({0, 0.5, 1}));
  CHECK(c.condition.satisfied());
  CHECK(c.conclusion_holds(ToleranceConfig{}));
}

TEST_CASE("Sun synthesis on random intervals matches the exact infimum") {
  SplitMix64 rng(71);
  const ToleranceConfig tol;
  for (int trial = 0; trial < 60; ++trial) {
    const auto f = random_max_affine(rng, 1, rng.integer(1, 6));
    const double a = rng.uniform(-3, 1), b = a + rng.uniform(0.1, 3);
    const auto c = synth_sun(f, interval(a, b), tol, std::uint64_t(trial));
    const double exact = interval_min(f, a, b);
    const double inf_a = std::min(c.affine.w(0) * a, c.affine.w(0) * b) + c.affine.c;
    CHECK(c.rhs == doctest::Approx(exact).epsilon(1e-10));
    CHECK(std::abs(inf_a - exact) <= 1e-6);
    CHECK(sampled_min_gap(f, c.affine, rng, 2000, 20) >= -1e-7);
    CHECK(c.conclusion_holds(tol));
    CHECK(c.lifted.lambda > 1e-12);
  }
}

TEST_CASE("convex-affine synthesis") {
  const auto f = abs_fn();
  auto c = synth_cahbl(f, CahblTable<double>{columns({2}), vec({5})});
  CHECK(c.affine.w(0) == doctest::Approx(1.0));
  CHECK(c.lhs == doctest::Approx(7.0));
  CHECK(c.rhs == 7.0);

  const CahblPolytope<double> z{interval(0, 1), AffineTransform<double>::identity(1),
                                AffineMap<double>{vec({-1}), 0.0}};
  c = synth_cahbl(f, z);
  CHECK(c.kind == CertificateKind::Exact);
  CHECK(c.affine.w(0) == doctest::Approx(1.0));
  CHECK(std::abs(c.affine.c) <= 1e-12);
  CHECK(std::abs(c.lhs) <= 1e-12);
  CHECK(std::abs(c.rhs) <= 1e-12);

  // singleton with k = 0 reduces to the supporting map
  c = synth_cahbl(f, CahblTable<double>{columns({2}), vec({0})});
  const auto s = support_at_point(f, vec({2}));
  CHECK(c.affine.w(0) == doctest::Approx(s.w(0)));
  CHECK(c.affine.c == doctest::Approx(s.c));

  CHECK_THROWS_AS(synth_cahbl(f, CahblTable<double>{columns({0, 1}), vec({0, 0})}),
                  ConditionViolatedError);
}

TEST_CASE("non-affine k uses a marked grid certificate") {
  // k(z) = max(z, -z) on [-1, 1]
  const auto f = abs_fn();
  const CahblPolytope<double> z{interval(-1, 2), AffineTransform<double>{mat({{2}}), vec({-1})},
                                abs_fn()};
  const ToleranceConfig tol;
  const auto c = synth_cahbl(f, z, tol);
  CHECK(c.kind == CertificateKind::Approximate);
  CHECK(c.grid_resolution == tol.grid_resolution);
  CHECK(c.dominated(tol));
  // inf over [-1, 2] of |2z - 1| + |z| is 1/2 at z = 1/2
  CHECK(c.rhs == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(std::abs(c.gap) <= 1e-6);
}

TEST_CASE("unbounded infimum falls back to a supporting map") {
  const auto f = max_affine_1d({{1, 0}});
  const auto c = synth_sun(f, columns({-2e12, 5}));
  CHECK(c.kind == CertificateKind::Fallback);
  REQUIRE(c.fallback_point.size() == 1);
  const double x0 = c.fallback_point(0);
  CHECK(c.affine.w(0) * x0 + c.affine.c == doctest::Approx(brute_eval(f, vec({x0}))));
  CHECK(c.dominated(ToleranceConfig{}));
  CHECK(c.conclusion_holds(ToleranceConfig{}));
}

TEST_CASE("multi-dimensional polytopes") {
  SplitMix64 rng(92);
  const ToleranceConfig tol;
  for (int trial = 0; trial < 20; ++trial) {
    const Index d = rng.integer(2, 3);
    const auto f = random_max_affine(rng, d, rng.integer(2, 5));
    Polytope<double> c{Mat(d, d + 2)};
    for (Index j = 0; j < c.vertex_count(); ++j) c.vertices.col(j) = random_vec(rng, d, 2);
    const auto cert = synth_sun(f, c, tol, std::uint64_t(trial));
    CHECK(cert.conclusion_holds(tol));
    const RowVector<double> av = (cert.affine.w.transpose() * c.vertices).array() + cert.affine.c;
    CHECK(std::abs(av.minCoeff() - cert.rhs) <= 1e-6);
    // every sampled point of C has f >= rhs
    for (int k = 0; k < 500; ++k) {
      Vec w(c.vertex_count());
      for (Index j = 0; j < w.size(); ++j) w(j) = -std::log(1 - rng.uniform());
      w /= w.sum();
      CHECK(brute_eval(f, Vec(c.vertices * w)) >= cert.rhs - 1e-9);
    }
  }
}

TEST_CASE("determinism") {
  SplitMix64 rng(5);
  const auto f = random_max_affine(rng, 2, 4);
  Polytope<double> c{Mat(2, 4)};
  for (Index j = 0; j < 4; ++j) c.vertices.col(j) = random_vec(rng, 2, 2);
  const auto a = synth_sun(f, c, ToleranceConfig{}, 7), b = synth_sun(f, c, ToleranceConfig{}, 7);
  CHECK(a.affine.w == b.affine.w);
  CHECK(a.affine.c == b.affine.c);
  CHECK(a.domination.worst_deficit == b.domination.worst_deficit);
  CHECK(a.support_weights == b.support_weights);
}
