#include <doctest.h>

#include <cmath>

#include "convaff/harness.hpp"
#include "helpers.hpp"

using namespace convaff;
using namespace testing;
namespace h = convaff::harness;

namespace {

std::function<double(const Vec&)> as_fn(const MaxAffineFn<double>& f) {
  return [f](const Vec& x) { return brute_eval(f, x); };
}

const h::Metric* find_metric(const h::SuiteResult& r, const std::string& name) {
  for (const auto& m : r.metrics) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("generators are deterministic and valid") {
  h::Dims dims;
  dims.d = 2;
  dims.p = 3;
  const auto a = h::gen_instance(h::InstanceKind::MaxAffine, dims, 42);
  const auto b = h::gen_instance(h::InstanceKind::MaxAffine, dims, 42);
  const auto& fa = std::get<MaxAffineFn<double>>(a);
  const auto& fb = std::get<MaxAffineFn<double>>(b);
  CHECK(fa.slopes() == fb.slopes());
  CHECK(fa.offsets() == fb.offsets());
  CHECK(fa.dim() == 2);
  CHECK(fa.pieces() == 3);
  CHECK(fa.slopes().allFinite());
  CHECK((fa.slopes().array().abs() <= 2).all());
  CHECK((fa.offsets().array().abs() <= 2).all());
  CHECK_NOTHROW(MaxAffineFn<double>(fa.slopes(), fa.offsets()));
  CHECK(h::instance_to_json(a) == h::instance_to_json(b));

  dims.v = 4;
  const auto p = std::get<Polytope<double>>(h::gen_instance(h::InstanceKind::Polytope, dims, 7));
  CHECK(p.dim() == 2);
  CHECK(p.vertex_count() == 4);
  CHECK(p.vertices.allFinite());

  const auto other = std::get<MaxAffineFn<double>>(h::gen_instance(h::InstanceKind::MaxAffine, dims, 43));
  CHECK(other.slopes() != fa.slopes());

  dims.size = 5;
  const auto s = std::get<FiniteScoredSet<double>>(h::gen_instance(h::InstanceKind::ScoredSet, dims, 1));
  CHECK(s.points.cols() == 5);
  CHECK(s.scores.size() == 5);

  dims.n = 2;
  const auto hb = std::get<HblInstance<double>>(h::gen_instance(h::InstanceKind::Hbl, dims, 1));
  CHECK(hb.spaces.size() == 2);
  CHECK(hb.size() == 5);
}

TEST_CASE("generator caps") {
  h::Dims dims;
  dims.d = 7;
  CHECK_THROWS_AS(h::gen_instance(h::InstanceKind::MaxAffine, dims, 1), Error);
  dims.d = 0;
  try {
    h::gen_instance(h::InstanceKind::MaxAffine, dims, 1);
    FAIL("expected a config error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
  }
  h::Caps caps;
  caps.d = 10;
  dims.d = 8;
  CHECK_NOTHROW(h::gen_instance(h::InstanceKind::MaxAffine, dims, 1, caps));
  CHECK(h::parse_instance_kind("scored_set") == h::InstanceKind::ScoredSet);
  CHECK(std::string(h::to_string(h::InstanceKind::Hbl)) == "hbl");
  CHECK_THROWS_AS(h::parse_instance_kind("cube"), Error);
}

TEST_CASE("gauge oracle examples") {
  const auto f = as_fn(abs_fn());
  CHECK(std::abs(h::gauge_oracle(f, vec({2}), 1.0) - 1.0) <= 1e-6);
  CHECK(std::abs(h::gauge_oracle(f, vec({0}), -2.0) - 2.0) <= 1e-6);
  CHECK(std::abs(h::gauge_oracle(f, vec({3}), 2.0) - 1.0) <= 1e-6);
  CHECK(h::gauge_oracle(f, vec({1}), 2.0) == 0.0);

  const std::function<double(const Vec&)> flat = [](const Vec&) { return 0.0; };
  CHECK_THROWS_AS(h::gauge_oracle(flat, vec({0}), -1e20), Error);
}

TEST_CASE("gauge oracle agrees with the library") {
  SplitMix64 rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    const Index d = rng.integer(1, 3);
    const auto g = random_max_affine(rng, d, rng.integer(1, 5));
    for (int k = 0; k < 10; ++k) {
      const Vec x = random_vec(rng, d, 3);
      const double alpha = rng.uniform(-3, 3);
      CHECK(std::abs(h::gauge_oracle(as_fn(g), x, alpha) - eval_gauge(g, x, alpha).value) <= 1e-5);
    }
  }
}

TEST_CASE("grid minimum oracle") {
  const auto f = as_fn(abs_fn());
  CHECK(std::abs(h::grid_min_oracle(f, columns({1, 3}), 1e-3) - 1.0) <= 1e-3);
  CHECK(std::abs(h::grid_min_oracle(f, columns({-1, 1}), 1e-3)) <= 1e-3);
  CHECK(h::grid_min_oracle(f, columns({-2.5}), 1e-3) == 2.5);

  // affine functions attain their minimum at a vertex
  SplitMix64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec w = random_vec(rng, 2, 2);
    const double c = rng.uniform(-1, 1);
    Mat v(2, 4);
    for (Index j = 0; j < 4; ++j) v.col(j) = random_vec(rng, 2, 2);
    const std::function<double(const Vec&)> a = [&](const Vec& x) { return w.dot(x) + c; };
    const double vmin = ((w.transpose() * v).array() + c).minCoeff();
    const double g = h::grid_min_oracle(a, v, 1.0 / 16);
    CHECK(g >= vmin - 1e-12);
    CHECK(g <= vmin + 1e-12);
  }
}

TEST_CASE("suite configuration") {
  h::SuiteConfig empty;
  CHECK(empty.suites.empty());
  try {
    h::run_property_suite(empty);
    FAIL("expected a config error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
  }

  h::SuiteConfig unknown = h::SuiteConfig::defaults();
  unknown.suites = {"nope"};
  CHECK_THROWS_AS(h::run_property_suite(unknown), Error);

  const auto defaults = h::SuiteConfig::defaults();
  CHECK(defaults.suites == h::suite_names());
  CHECK(h::default_trials("gauge_abs") == 1000);
  CHECK(h::default_trials("gauge_quadratic") == 500);
  CHECK(h::default_trials("sublinearity") == 200);
  CHECK(h::default_trials("mok") == 100);
  CHECK(h::default_trials("synth") == 100);
  CHECK(h::default_trials("sun_oracle") == 50);
  CHECK(h::default_trials("hbl") == 30);

  const Json j = h::to_json(defaults);
  const h::SuiteConfig back = h::suite_config_from_json(j);
  CHECK(h::to_json(back) == j);
  CHECK_THROWS_AS(h::suite_config_from_json(Json{{"bogus", 1}}), Error);
  CHECK_THROWS_AS(h::suite_config_from_json(Json{{"trials", {{"mok", 0}}}}), Error);
  CHECK_THROWS_AS(h::suite_config_from_json(Json{{"caps", {{"d", 0}}}}), Error);
  CHECK_THROWS_AS(h::suite_config_from_json(Json{{"tolerances", {{"tol_lp", "x"}}}}), Error);
}

TEST_CASE("every suite passes with reduced trial counts") {
  h::SuiteConfig config = h::SuiteConfig::defaults();
  for (const auto& name : h::suite_names()) config.trials[name] = 4;
  const auto report = h::run_property_suite(config);
  CHECK(report.suites.size() == h::suite_names().size());
  for (const auto& s : report.suites) {
    CAPTURE(s.name);
    CHECK(s.trials == 4);
    CHECK(s.passed());
    for (const auto& m : s.metrics) {
      CAPTURE(m.name);
      CHECK(m.passed());
    }
  }
  CHECK(report.passed());
}

TEST_CASE("loosened gauge tolerance is caught") {
  h::SuiteConfig config = h::SuiteConfig::defaults();
  config.suites = {"gauge_paths"};
  config.trials["gauge_paths"] = 10;
  config.tolerances.tol_gauge = 1e-1;
  config.tolerances.gauge_width = 1e-1;
  const auto report = h::run_property_suite(config);
  REQUIRE(report.suites.size() == 1);
  const auto* graph = find_metric(report.suites[0], "bisection.graph");
  REQUIRE(graph != nullptr);
  CHECK_FALSE(graph->passed());
  CHECK_FALSE(report.passed());
}

TEST_CASE("reports are reproducible") {
  h::SuiteConfig config = h::SuiteConfig::defaults();
  config.suites = {"gauge_abs", "mok", "synth"};
  config.trials = {{"gauge_abs", 20}, {"mok", 5}, {"synth", 5}};
  const std::string a = h::to_json(h::run_property_suite(config)).dump();
  const std::string b = h::to_json(h::run_property_suite(config)).dump();
  CHECK(a == b);
  CHECK(a.find("seconds") == std::string::npos);

  config.seed += 1;
  CHECK(h::to_json(h::run_property_suite(config)).dump() != a);
}
