#include "convaff/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace convaff::harness {

namespace {

using Vec = Vector<double>;
using Mat = Matrix<double>;

std::uint64_t label_of(const std::string& name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Mat uniform_matrix(SplitMix64& rng, Index rows, Index cols, double lo = -2.0, double hi = 2.0) {
  Mat m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.uniform(lo, hi);
  return m;
}

Vec uniform_vector(SplitMix64& rng, Index n, double lo = -2.0, double hi = 2.0) {
  return uniform_matrix(rng, n, 1, lo, hi);
}

Index pick(SplitMix64& rng, Index lo, Index hi) {
  return static_cast<Index>(rng.integer(static_cast<long>(lo), static_cast<long>(std::max(lo, hi))));
}

MaxAffineFn<double> random_max_affine(SplitMix64& rng, Index d, Index p) {
  Mat a = uniform_matrix(rng, p, d);
  Vec b = uniform_vector(rng, p);
  return {std::move(a), std::move(b)};
}

std::string describe(const Vec& v) {
  std::ostringstream s;
  s.precision(17);
  s << "(";
  for (Index i = 0; i < v.size(); ++i) s << (i ? ", " : "") << v(i);
  s << ")";
  return s.str();
}

// Tracks the worst value of one measured quantity.
class Tracker {
 public:
  Tracker(std::string name, double threshold) {
    m_.name = std::move(name);
    m_.threshold = threshold;
  }
  void see(double value, std::uint64_t seed, const std::string& witness = {}) {
    if (std::isnan(value)) value = std::numeric_limits<double>::infinity();
    if (m_.samples == 0 || value > m_.worst) {
      m_.worst = value;
      m_.witness_seed = seed;
      m_.witness = witness;
    }
    ++m_.samples;
  }
  Metric metric() const { return m_; }

 private:
  Metric m_;
};

struct SuiteContext {
  const SuiteConfig& config;
  std::uint64_t base;
  long trials;

  std::uint64_t trial_seed(long t) const { return derive_seed(base, static_cast<std::uint64_t>(t)); }
  Index cap_d(Index want) const { return std::min(want, config.caps.d); }
  Index cap_p(Index want) const { return std::min(want, config.caps.p); }
  Index cap_v(Index want) const { return std::min(want, config.caps.v); }
  Index cap_size(Index want) const { return std::min(want, config.caps.size); }
};

// ---------------------------------------------------------------------------
// Suites

SuiteResult gauge_abs_suite(const SuiteContext& ctx) {
  Mat a(2, 1);
  a << 1, -1;
  const MaxAffineFn<double> f(a, Vec::Zero(2));
  const ConvexOracle<double> oracle = to_oracle(f);
  Tracker closed("abs_error", 1e-8), bisect("abs_error_bisection", 1e-8);
  for (long t = 0; t < ctx.trials; ++t) {
    const std::uint64_t seed = ctx.trial_seed(t);
    SplitMix64 rng(seed);
    Vec x(1);
    x(0) = rng.uniform(-10, 10);
    const double alpha = rng.uniform(-10, 10);
    const double expected = std::max(std::abs(x(0)) - alpha, 0.0);
    const std::string w = "x=" + describe(x) + " alpha=" + std::to_string(alpha);
    closed.see(std::abs(eval_gauge(f, x, alpha, ctx.config.tolerances).value - expected), seed, w);
    bisect.see(std::abs(eval_gauge(oracle, x, alpha, ctx.config.tolerances).value - expected), seed, w);
  }
  return {"gauge_abs", 1, ctx.trials, {closed.metric(), bisect.metric()}, 0.0};
}

SuiteResult gauge_quadratic_suite(const SuiteContext& ctx) {
  ConvexOracle<double> square{[](const Vec& x) { return x.squaredNorm(); },
                              [](const Vec& x) { return Vec(2 * x); }, 1};
  Tracker err("abs_error", 1e-6);
  for (long t = 0; t < ctx.trials; ++t) {
    const std::uint64_t seed = ctx.trial_seed(t);
    SplitMix64 rng(seed);
    Vec x(1);
    x(0) = rng.uniform(-10, 10);
    const double alpha = rng.uniform(-10, 10);
    // positive root of mu^2 + alpha mu - x^2, in the cancellation-free form
    const double disc = std::sqrt(alpha * alpha + 4 * x(0) * x(0));
    const double expected = alpha > 0 ? 2 * x(0) * x(0) / (alpha + disc) : (disc - alpha) / 2;
    err.see(std::abs(eval_gauge(square, x, alpha, ctx.config.tolerances).value - expected), seed,
            "x=" + describe(x) + " alpha=" + std::to_string(alpha));
  }
  return {"gauge_quadratic", 2, ctx.trials, {err.metric()}, 0.0};
}

struct SublinearSample {
  MaxAffineFn<double> f;
  Mat points;
  Vec alphas;
};

SublinearSample sublinear_sample(const SuiteContext& ctx, std::uint64_t seed, Index count) {
  SplitMix64 rng(seed);
  const Index d = pick(rng, 1, ctx.cap_d(4));
  const Index p = pick(rng, 1, ctx.cap_p(6));
  MaxAffineFn<double> f = random_max_affine(rng, d, p);
  Mat points = uniform_matrix(rng, d, count, -3, 3);
  Vec alphas = uniform_vector(rng, count, -3, 3);
  return {std::move(f), std::move(points), std::move(alphas)};
}

constexpr Index kSublinearPoints = 200;

SuiteResult sublinearity_suite_run(const SuiteContext& ctx) {
  const SublinearityTolerances st;
  Tracker axis("axis", st.axis), graph("graph", st.graph), hyp("hypograph", st.hypograph),
      origin("origin", st.axis), homog("homogeneity", st.homogeneity),
      subadd("subadditivity", st.subadditivity);
  for (long t = 0; t < ctx.trials; ++t) {
    const std::uint64_t seed = ctx.trial_seed(t);
    const SublinearSample s = sublinear_sample(ctx, seed, kSublinearPoints);
    const SublinearityReport r =
        sublinearity_suite(shift(s.f), s.points, s.alphas, ctx.config.tolerances, st);
    axis.see(r.axis.worst, seed);
    graph.see(r.graph.worst, seed);
    hyp.see(r.hypograph.worst, seed);
    origin.see(r.origin.worst, seed);
    homog.see(r.homogeneity.worst, seed);
    subadd.see(r.subadditivity.worst, seed);
  }
  return {"sublinearity", 3, ctx.trials,
          {axis.metric(), graph.metric(), hyp.metric(), origin.metric(), homog.metric(),
           subadd.metric()},
          0.0};
}

SuiteResult implicit_residual_suite(const SuiteContext& ctx) {
  Tracker reported("root_residual", 1e-8), recomputed("root_residual_recomputed", 1e-8);
  for (long t = 0; t < ctx.trials; ++t) {
    const std::uint64_t seed = ctx.trial_seed(t);
    const SublinearSample s = sublinear_sample(ctx, seed, kSublinearPoints);
    const ShiftedFn<double> fs = shift(s.f);
    const SublinearityReport r =
        sublinearity_suite(fs, s.points, s.alphas, ctx.config.tolerances, SublinearityTolerances{});
    if (r.root_evaluations > 0) reported.see(r.worst_root_residual, seed);
    for (Index k = 0; k < s.points.cols(); ++k) {
      const Vec x = s.points.col(k);
      const GaugeValue<double> g = eval_gauge(fs, x, s.alphas(k), ctx.config.tolerances);
      if (g.branch != GaugeBranch::Root || g.value <= 0) continue;
      // mu * (f(x / mu) - f(0) - 1) = alpha
      const double mu = g.value;
      const double lhs = mu * (evaluate(s.f, Vec(x / mu)) - s.f.value_at_origin() - 1.0);
      recomputed.see(std::abs(lhs - s.alphas(k)), seed, "k=" + std::to_string(k));
    }
  }
  return {"implicit_residual", 4, ctx.trials, {reported.metric(), recomputed.metric()}, 0.0};
}

SuiteResult gauge_paths_suite(const SuiteContext& ctx) {
  const SublinearityTolerances st;
  Tracker axis("bisection.axis", st.axis), graph("bisection.graph", st.graph),
      hyp("bisection.hypograph", st.hypograph), homog("bisection.homogeneity", st.homogeneity),
      subadd("bisection.subadditivity", st.subadditivity),
      agree("closed_vs_bisection", 1e-9), oracle("closed_vs_gauge_oracle", 1e-5),
      zero("negativity_mismatches", 0.0), mono("perspective_monotonicity", 1e-10),
      failures("numerical_failures", 0.0);
  const ToleranceConfig& tol = ctx.config.tolerances;
  for (long t = 0; t < ctx.trials; ++t) {
    const std::uint64_t seed = ctx.trial_seed(t);
    const SublinearSample s = sublinear_sample(ctx, seed, 50);
    const ShiftedFn<double> fs = shift(s.f);
    const ConvexOracle<double> co = to_oracle(s.f);
    std::function<double(const Vec&)> fv = [&](const Vec& x) { return evaluate(s.f, x); };

    long failed = 0;
    try {
      const SublinearityReport r = sublinearity_suite(
          fs, s.points, s.alphas,
          [&](const Vec& x, double alpha) { return eval_gauge(co, x, alpha, tol); }, st);
      axis.see(r.axis.worst, seed);
      graph.see(r.graph.worst, seed);
      hyp.see(r.hypograph.worst, seed);
      homog.see(r.homogeneity.worst, seed);
      subadd.see(r.subadditivity.worst, seed);
    } catch (const Error&) {
      ++failed;
    }

    long mismatches = 0;
    SplitMix64 rng(derive_seed(seed, 1));
    for (Index k = 0; k < s.points.cols(); ++k) {
      const Vec x = s.points.col(k);
      const double alpha = s.alphas(k);
      const double closed = eval_gauge(fs, x, alpha, tol).value;
      try {
        agree.see(std::abs(closed - eval_gauge(co, x, alpha, tol).value), seed, "k=" + std::to_string(k));
      } catch (const Error&) {
        ++failed;
      }
      oracle.see(std::abs(closed - gauge_oracle(fv, x, alpha)), seed, "k=" + std::to_string(k));

      const double margin = (s.f.slopes() * x).maxCoeff() - alpha;
      if (std::abs(margin) > 1e-6 && gauge_is_zero(fs, x, alpha, tol) != gauge_is_zero(co, x, alpha, tol))
        ++mismatches;

      const double mu = rng.uniform(1e-3, 10), nu = mu + rng.uniform(1e-3, 10);
      mono.see((perspective(fs, x, nu) + nu) - (perspective(fs, x, mu) + mu), seed,
               "k=" + std::to_string(k));
    }
    zero.see(double(mismatches), seed);
    failures.see(double(failed), seed);
  }
  return {"gauge_paths", 0, ctx.trials,
          {axis.metric(), graph.metric(), hyp.metric(), homog.metric(), subadd.metric(),
           agree.metric(), oracle.metric(), zero.metric(), mono.metric(), failures.metric()},
          0.0};
}

// S with pieces l_i satisfying <l_i, u> < 0 for a unit u, and D containing
// a far point R u: that point is a witness for every pair.
struct MokSample {
  PolyhedralSublinear<double> s;
  Mat points;
};

MokSample satisfied_mok(const SuiteContext& ctx, std::uint64_t seed) {
  SplitMix64 rng(seed);
  const Index d = pick(rng, 1, ctx.cap_d(4));
  const Index p = pick(rng, 1, ctx.cap_p(6));
  const Index n = pick(rng, 1, ctx.cap_size(12));
  Vec u = uniform_vector(rng, d, -1, 1);
  if (u.norm() < 1e-3) u = Vec::Unit(d, 0);
  u.normalize();
  Mat pieces = uniform_matrix(rng, p, d);
  for (Index i = 0; i < p; ++i) {
    const double c = rng.uniform(0.5, 2.0);
    pieces.row(i) -= (pieces.row(i).dot(u.transpose()) + c) * u.transpose();
  }
  if (p > 1 && rng.uniform() < 0.5) pieces.row(0).setZero();
  Mat points = uniform_matrix(rng, d, n);
  points.col(pick(rng, 0, n - 1)) = 100.0 * u;
  return {PolyhedralSublinear<double>(std::move(pieces)), std::move(points)};
}

SuiteResult mok_suite(const SuiteContext& ctx) {
  Tracker guarantee("satisfied_gap", 1e-8), negative("negative_gap", 1e-9),
      generator("generator_not_satisfied", 0.0), dominated("structural_domination", 1e-10),
      hand1("hand_abs_D1", 0.0), hand2("hand_relu_D01", 0.0);
  const ToleranceConfig& tol = ctx.config.tolerances;
  for (long t = 0; t < ctx.trials; ++t) {
    const std::uint64_t seed = ctx.trial_seed(t);
    const MokSample m = satisfied_mok(ctx, seed);
    const MokCertificate<double> cert = solve_mok(m.s, m.points, tol);
    generator.see(cert.midpoint.satisfied() ? 0.0 : 1.0, seed);
    if (cert.midpoint.satisfied()) guarantee.see(std::abs(cert.gap), seed);
    negative.see(-cert.gap, seed);

    // Unconstrained instance: the gap is one-sided regardless of the hypothesis.
    SplitMix64 rng(derive_seed(seed, 2));
    const Index d = m.s.dim();
    const PolyhedralSublinear<double> s2(uniform_matrix(rng, pick(rng, 1, ctx.cap_p(6)), d));
    const Mat d2 = uniform_matrix(rng, d, pick(rng, 1, ctx.cap_size(12)));
    const MokCertificate<double> free_cert = solve_mok(s2, d2, tol);
    negative.see(-free_cert.gap, seed, "unconstrained");

    const Mat probes = uniform_matrix(rng, d, 10000, -10, 10);
    const RowVector<double> l = cert.linear.w.transpose() * probes;
    const RowVector<double> sv = (m.s.pieces() * probes).colwise().maxCoeff();
    dominated.see((l - sv).maxCoeff(), seed);
  }

  Mat abs_pieces(2, 1);
  abs_pieces << 1, -1;
  Mat one(1, 1);
  one << 1;
  hand1.see(std::abs(solve_mok(PolyhedralSublinear<double>(abs_pieces), one, tol).value - 1.0), 0);
  Mat relu(2, 1);
  relu << 1, 0;
  Mat zero_one(1, 2);
  zero_one << 0, 1;
  hand2.see(std::abs(solve_mok(PolyhedralSublinear<double>(relu), zero_one, tol).value), 0);

  return {"mok", 5, ctx.trials,
          {guarantee.metric(), negative.metric(), generator.metric(), dominated.metric(),
           hand1.metric(), hand2.metric()},
          0.0};
}

// Finite (points, scores) with one member far below the rest: it is the
// witness of every pair.
FiniteScoredSet<double> slack_set(SplitMix64& rng, Index d, Index n) {
  Mat points = uniform_matrix(rng, d, n);
  Vec scores = uniform_vector(rng, n);
  scores(pick(rng, 0, n - 1)) = -rng.uniform(50, 100);
  return {std::move(points), std::move(scores)};
}

struct SynthTrial {
  MaxAffineFn<double> f;
  SynthCertificate<double> cert;
  std::string kind;
};

SynthTrial synth_trial(const SuiteContext& ctx, long t, std::uint64_t seed) {
  SplitMix64 rng(seed);
  const ToleranceConfig& tol = ctx.config.tolerances;
  const Index d = pick(rng, 1, ctx.cap_d(t % 5 == 2 || t % 5 == 3 ? 3 : 4));
  const Index p = pick(rng, 1, ctx.cap_p(6));
  MaxAffineFn<double> f = random_max_affine(rng, d, p);
  switch (t % 5) {
    case 0: {
      const FiniteScoredSet<double> b = slack_set(rng, d, pick(rng, 2, ctx.cap_size(12)));
      return {f, synth_affine_from_B<double>(f, b, tol, seed), "finite_slack"};
    }
    case 1: {
      const FiniteScoredSet<double> b{uniform_matrix(rng, d, 1), uniform_vector(rng, 1)};
      return {f, synth_affine_from_B<double>(f, b, tol, seed), "singleton"};
    }
    case 2: {
      const Polytope<double> c{uniform_matrix(rng, d, pick(rng, 1, ctx.cap_v(6)))};
      return {f, synth_sun(f, c, tol, seed), "sun_polytope"};
    }
    case 3: {
      const Index q = pick(rng, 1, ctx.cap_d(3));
      const Polytope<double> c{uniform_matrix(rng, q, pick(rng, 1, ctx.cap_v(5)))};
      const AffineTransform<double> j{uniform_matrix(rng, d, q), uniform_vector(rng, d)};
      const AffineMap<double> k{uniform_vector(rng, q), rng.uniform(-2, 2)};
      return {f, synth_cahbl(f, CahblPolytope<double>{c, j, k}, tol, seed), "cahbl_polytope"};
    }
    default: {
      const FiniteScoredSet<double> b = slack_set(rng, d, pick(rng, 2, ctx.cap_size(12)));
      return {f, synth_cahbl(f, CahblTable<double>{b.points, b.scores}, tol, seed), "cahbl_finite"};
    }
  }
}

SuiteResult synth_suite(const SuiteContext& ctx) {
  const ToleranceConfig& tol = ctx.config.tolerances;
  Tracker deficit("domination_deficit", 1e-7), gap("lhs_rhs_gap", 1e-6),
      lambda("negative_lambda", -1e-12), tstar("t_star_deficit", 1e-8),
      condition("condition_not_satisfied", 0.0), kind("not_exact", 0.0),
      sound("support_set_soundness", 1e-9);
  for (long t = 0; t < ctx.trials; ++t) {
    const std::uint64_t seed = ctx.trial_seed(t);
    const SynthTrial trial = synth_trial(ctx, t, seed);
    const SynthCertificate<double>& c = trial.cert;
    deficit.see(-c.domination.worst_deficit, seed, trial.kind);
    gap.see(std::abs(double(c.lhs - c.rhs)), seed, trial.kind);
    lambda.see(-c.lifted.lambda, seed, trial.kind);
    tstar.see(1.0 - c.t_star, seed, trial.kind);
    condition.see(c.condition.satisfied() ? 0.0 : 1.0, seed, trial.kind);
    kind.see(c.kind == CertificateKind::Exact ? 0.0 : 1.0, seed, trial.kind);

    // Every feasible mu gives a lifted functional dominated by S_f.
    const ShiftedFn<double> fs = shift(trial.f);
    const GaugeSupportSystem<double> sys = build_gauge_support_lp(fs);
    SplitMix64 rng(derive_seed(seed, 3));
    std::vector<Vec> pool{c.support_weights};
    for (Index i = 0; i < sys.variables(); ++i) pool.push_back(Vec::Unit(sys.variables(), i) / sys.budget(i));
    for (int r = 0; r < 3; ++r) {
      Vec mu = uniform_vector(rng, sys.variables(), 0, 1);
      mu *= rng.uniform() / std::max(1e-300, sys.budget.dot(mu));
      pool.push_back(mu);
    }
    const Index d = trial.f.dim();
    for (long s = 0; s < 10000; ++s) {
      const Vec x = uniform_vector(rng, d, -5, 5);
      const double alpha = rng.uniform(-5, 5);
      const LiftedLinear<double> l = sys.lifted(pool[static_cast<std::size_t>(s) % pool.size()]);
      sound.see(l(x, alpha) - eval_gauge(fs, x, alpha, tol).value, seed, trial.kind);
    }
  }
  return {"synth", 6, ctx.trials,
          {deficit.metric(), gap.metric(), lambda.metric(), tstar.metric(), condition.metric(),
           kind.metric(), sound.metric()},
          0.0};
}

SuiteResult sun_oracle_suite(const SuiteContext& ctx) {
  const ToleranceConfig& tol = ctx.config.tolerances;
  Tracker sun("sun_vs_oracle", 2e-3), lp("lp_vs_oracle", 2e-3), affine("affine_below_vertices", 1e-12);
  const double resolution = 1.0 / 1024.0;
  for (long t = 0; t < ctx.trials; ++t) {
    const std::uint64_t seed = ctx.trial_seed(t);
    SplitMix64 rng(seed);
    const Index d = pick(rng, 1, ctx.cap_d(2));
    const Index p = pick(rng, 1, ctx.cap_p(6));
    const MaxAffineFn<double> f = random_max_affine(rng, d, p);
    const Polytope<double> c{uniform_matrix(rng, d, pick(rng, 1, ctx.cap_v(3)))};

    const SynthCertificate<double> cert = synth_sun(f, c, tol, seed);
    const double oracle =
        grid_min_oracle([&](const Vec& x) { return evaluate(f, x); }, c.vertices, resolution);
    const double inf_a = ((cert.affine.w.transpose() * c.vertices).array() + cert.affine.c).minCoeff();
    sun.see(std::abs(inf_a - oracle), seed);
    lp.see(std::abs(min_convex_over_polytope(f, c).lp_value - oracle), seed);

    const double affine_oracle = grid_min_oracle(
        [&](const Vec& x) { return cert.affine.w.dot(x) + cert.affine.c; }, c.vertices, resolution);
    affine.see(inf_a - affine_oracle, seed);
  }
  return {"sun_oracle", 7, ctx.trials, {sun.metric(), lp.metric(), affine.metric()}, 0.0};
}

SuiteResult hbl_suite(const SuiteContext& ctx) {
  const ToleranceConfig& tol = ctx.config.tolerances;
  Tracker product("product_value", 1e-8), identity("identity_weight", 0.0),
      dominated("per_space_domination", 1e-10), hand("hand_k_slack", 1e-8);
  for (long t = 0; t < ctx.trials; ++t) {
    const std::uint64_t seed = ctx.trial_seed(t);
    Dims dims;
    SplitMix64 rng(seed);
    dims.n = 3;
    dims.d = pick(rng, 1, ctx.cap_d(3));
    dims.p = pick(rng, 1, ctx.cap_p(4));
    dims.size = pick(rng, 1, ctx.cap_size(12));
    const auto inst = std::get<HblInstance<double>>(
        gen_instance(InstanceKind::Hbl, dims, derive_seed(seed, 4), ctx.config.caps));
    const HblCertificate<double> cert = solve_hbl_n(inst, tol);
    const MokCertificate<double> mok =
        solve_mok(expand_product(inst.spaces), stack_tables(inst.tables), tol);
    product.see(std::abs(cert.value - mok.value), seed);

    for (std::size_t m = 0; m < inst.spaces.size(); ++m) {
      const Mat probes = uniform_matrix(rng, inst.spaces[m].dim(), 1000, -10, 10);
      const RowVector<double> l = cert.linear[m].w.transpose() * probes;
      const RowVector<double> sv = (inst.spaces[m].pieces() * probes).colwise().maxCoeff();
      dominated.see((l - sv).maxCoeff(), seed);
    }

    const Index d = pick(rng, 1, ctx.cap_d(3));
    const Index z = pick(rng, 1, ctx.cap_size(12));
    const PolyhedralSublinear<double> s(uniform_matrix(rng, pick(rng, 1, ctx.cap_p(4)), d));
    const HblCertificate<double> jk =
        solve_hbl_jk(s, uniform_matrix(rng, d, z), uniform_vector(rng, z), tol);
    identity.see(jk.identity_weight ? std::abs(*jk.identity_weight - 1.0) : 1.0, seed);
  }

  Mat abs_pieces(2, 1);
  abs_pieces << 1, -1;
  Mat j(1, 2);
  j << 0, 1;
  Vec k(2);
  k << 0, -10;
  hand.see(std::abs(solve_hbl_jk(PolyhedralSublinear<double>(abs_pieces), j, k, tol).value + 9.0), 0);
  return {"hbl", 8, ctx.trials,
          {product.metric(), identity.metric(), dominated.metric(), hand.metric()}, 0.0};
}

using SuiteFn = SuiteResult (*)(const SuiteContext&);

struct SuiteEntry {
  const char* name;
  long trials;
  SuiteFn run;
};

const std::vector<SuiteEntry>& registry() {
  static const std::vector<SuiteEntry> entries{
      {"gauge_abs", 1000, gauge_abs_suite},
      {"gauge_quadratic", 500, gauge_quadratic_suite},
      {"sublinearity", 200, sublinearity_suite_run},
      {"implicit_residual", 200, implicit_residual_suite},
      {"gauge_paths", 40, gauge_paths_suite},
      {"mok", 100, mok_suite},
      {"synth", 100, synth_suite},
      {"sun_oracle", 50, sun_oracle_suite},
      {"hbl", 30, hbl_suite},
  };
  return entries;
}

const SuiteEntry& entry(const std::string& name) {
  for (const auto& e : registry())
    if (name == e.name) return e;
  throw Error(ErrorKind::Config, "unknown suite '" + name + "'");
}

void validate(const SuiteConfig& c) {
  require(!c.suites.empty(), ErrorKind::Config, "suite list is empty");
  for (const auto& s : c.suites) entry(s);
  for (const auto& [name, n] : c.trials) {
    entry(name);
    require(n >= 1, ErrorKind::Config, "trial count for '" + name + "' must be >= 1");
  }
  require(c.caps.d >= 1 && c.caps.p >= 1 && c.caps.size >= 1 && c.caps.v >= 1 && c.caps.n >= 1,
          ErrorKind::Config, "all caps must be >= 1");
}

}  // namespace

// ---------------------------------------------------------------------------

const char* to_string(InstanceKind k) {
  switch (k) {
    case InstanceKind::MaxAffine: return "max_affine";
    case InstanceKind::Polytope: return "polytope";
    case InstanceKind::ScoredSet: return "scored_set";
    case InstanceKind::Hbl: return "hbl";
  }
  return "unknown";
}

InstanceKind parse_instance_kind(const std::string& name) {
  for (InstanceKind k : {InstanceKind::MaxAffine, InstanceKind::Polytope, InstanceKind::ScoredSet,
                         InstanceKind::Hbl})
    if (name == to_string(k)) return k;
  throw Error(ErrorKind::InvalidArgument, "unknown instance kind '" + name + "'");
}

Instance gen_instance(InstanceKind kind, const Dims& dims, std::uint64_t seed, const Caps& caps) {
  auto check = [](Index value, Index cap, const char* what) {
    require(value >= 1 && value <= cap, ErrorKind::Config,
            std::string(what) + " = " + std::to_string(value) + " outside [1, " +
                std::to_string(cap) + "]");
  };
  check(dims.d, caps.d, "d");
  SplitMix64 rng(seed);
  switch (kind) {
    case InstanceKind::MaxAffine:
      check(dims.p, caps.p, "p");
      return random_max_affine(rng, dims.d, dims.p);
    case InstanceKind::Polytope:
      check(dims.v, caps.v, "v");
      return Polytope<double>{uniform_matrix(rng, dims.d, dims.v)};
    case InstanceKind::ScoredSet: {
      check(dims.size, caps.size, "size");
      Mat points = uniform_matrix(rng, dims.d, dims.size);
      Vec scores = uniform_vector(rng, dims.size);
      return FiniteScoredSet<double>{std::move(points), std::move(scores)};
    }
    case InstanceKind::Hbl: {
      check(dims.p, caps.p, "p");
      check(dims.size, caps.size, "size");
      check(dims.n, caps.n, "n");
      HblInstance<double> inst;
      for (Index m = 0; m < dims.n; ++m) {
        inst.spaces.emplace_back(uniform_matrix(rng, dims.p, dims.d));
        inst.tables.push_back(uniform_matrix(rng, dims.d, dims.size));
      }
      return inst;
    }
  }
  throw Error(ErrorKind::InvalidArgument, "unknown instance kind");
}

double gauge_oracle(const std::function<double(const Vector<double>&)>& f, const Vector<double>& x,
                    double alpha) {
  const double f0 = f(Vec::Zero(x.size()));
  auto inside = [&](double mu) { return mu * (f(Vec(x / mu)) - f0 - 1.0) < alpha; };

  // Coarse scan over powers of two.
  int first = 41;
  for (int k = -40; k <= 40; ++k) {
    if (inside(std::ldexp(1.0, k))) {
      first = k;
      break;
    }
  }
  if (first > 40) throw Error(ErrorKind::ScanExhausted, "no grid mu up to 2^40 lies in I(x, alpha)");
  if (first == -40) return 0.0;

  // The boundary lies in (lo, hi]; refine three times on uniform grids.
  double lo = std::ldexp(1.0, first - 1), hi = std::ldexp(1.0, first);
  const long steps = std::max(10L, static_cast<long>(std::ceil(std::cbrt((hi - lo) / 1e-6))));
  for (int level = 0; level < 3; ++level) {
    const double step = (hi - lo) / double(steps);
    long j = 1;
    while (j < steps && !inside(lo + double(j) * step)) ++j;
    hi = lo + double(j) * step;
    lo = hi - step;
  }
  return hi;
}

double grid_min_oracle(const std::function<double(const Vector<double>&)>& f,
                       const Matrix<double>& vertices, double resolution) {
  require(vertices.cols() >= 1, ErrorKind::EmptySet, "grid oracle needs a vertex");
  require(resolution > 0 && resolution <= 1, ErrorKind::InvalidArgument, "resolution in (0, 1]");
  const long n = std::max(1L, std::lround(1.0 / resolution));
  const Index m = vertices.cols();
  double best = std::numeric_limits<double>::infinity();
  std::vector<long> counts(static_cast<std::size_t>(m), 0);

  // Depth-first over counts c_0..c_{m-1} >= 0 with sum n.
  std::function<void(Index, long)> visit = [&](Index j, long left) {
    if (j == m - 1) {
      counts[static_cast<std::size_t>(j)] = left;
      Vec point = Vec::Zero(vertices.rows());
      for (Index i = 0; i < m; ++i) {
        const long c = counts[static_cast<std::size_t>(i)];
        if (c == n) {
          point = vertices.col(i);
          break;
        }
        if (c > 0) point += (double(c) / double(n)) * vertices.col(i);
      }
      best = std::min(best, f(point));
      return;
    }
    for (long c = 0; c <= left; ++c) {
      counts[static_cast<std::size_t>(j)] = c;
      visit(j + 1, left - c);
    }
  };
  visit(0, n);
  return best;
}

bool SuiteResult::passed() const {
  return std::all_of(metrics.begin(), metrics.end(), [](const Metric& m) { return m.passed(); });
}

bool SuiteReport::passed() const {
  return std::all_of(suites.begin(), suites.end(), [](const SuiteResult& s) { return s.passed(); });
}

SuiteConfig SuiteConfig::defaults() {
  SuiteConfig c;
  c.suites = suite_names();
  return c;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& e : registry()) out.emplace_back(e.name);
    return out;
  }();
  return names;
}

long default_trials(const std::string& suite) { return entry(suite).trials; }

SuiteResult run_suite(const std::string& name, const SuiteConfig& config) {
  validate(config);
  const SuiteEntry& e = entry(name);
  const auto it = config.trials.find(name);
  const SuiteContext ctx{config, derive_seed(config.seed, label_of(name)),
                         it == config.trials.end() ? e.trials : it->second};
  const auto start = std::chrono::steady_clock::now();
  SuiteResult r = e.run(ctx);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

SuiteReport run_property_suite(const SuiteConfig& config) {
  validate(config);
  SuiteReport report;
  report.seed = config.seed;
  report.include_timing = config.include_timing;
  for (const auto& name : config.suites) report.suites.push_back(run_suite(name, config));
  return report;
}

// ---------------------------------------------------------------------------
// JSON

Json to_json(const SuiteReport& report) {
  Json suites = Json::array();
  for (const auto& s : report.suites) {
    Json metrics = Json::array();
    for (const auto& m : s.metrics) {
      Json jm{{"name", m.name},         {"worst", m.worst},     {"threshold", m.threshold},
              {"samples", m.samples},   {"passed", m.passed()}, {"witness_seed", m.witness_seed}};
      if (!m.witness.empty()) jm["witness"] = m.witness;
      metrics.push_back(std::move(jm));
    }
    Json js{{"name", s.name}, {"criterion", s.criterion}, {"trials", s.trials},
            {"passed", s.passed()}, {"metrics", std::move(metrics)}};
    if (report.include_timing) js["seconds"] = s.seconds;
    suites.push_back(std::move(js));
  }
  return {{"seed", report.seed}, {"passed", report.passed()}, {"suites", std::move(suites)}};
}

namespace {

const std::vector<std::pair<const char*, double ToleranceConfig::*>>& real_tolerances() {
  static const std::vector<std::pair<const char*, double ToleranceConfig::*>> fields{
      {"tol_zero", &ToleranceConfig::tol_zero},
      {"tol_gauge", &ToleranceConfig::tol_gauge},
      {"gauge_width", &ToleranceConfig::gauge_width},
      {"tol_mid", &ToleranceConfig::tol_mid},
      {"tol_lp", &ToleranceConfig::tol_lp},
      {"lambda_min", &ToleranceConfig::lambda_min},
      {"tol_gap", &ToleranceConfig::tol_gap},
      {"tol_dom", &ToleranceConfig::tol_dom},
      {"domination_box", &ToleranceConfig::domination_box},
      {"unbounded_sentinel", &ToleranceConfig::unbounded_sentinel},
  };
  return fields;
}

const std::vector<std::pair<const char*, int ToleranceConfig::*>>& int_tolerances() {
  static const std::vector<std::pair<const char*, int ToleranceConfig::*>> fields{
      {"gauge_iteration_cap", &ToleranceConfig::gauge_iteration_cap},
      {"zero_test_log2_horizon", &ToleranceConfig::zero_test_log2_horizon},
      {"domination_samples", &ToleranceConfig::domination_samples},
      {"grid_resolution", &ToleranceConfig::grid_resolution},
  };
  return fields;
}

const std::vector<std::pair<const char*, Index Caps::*>>& cap_fields() {
  static const std::vector<std::pair<const char*, Index Caps::*>> fields{
      {"d", &Caps::d}, {"p", &Caps::p}, {"size", &Caps::size}, {"v", &Caps::v}, {"n", &Caps::n}};
  return fields;
}

void require_object(const Json& j, const std::string& path) {
  require(j.is_object(), ErrorKind::Config, path + ": expected an object");
}

double number_at(const Json& j, const std::string& path) {
  require(j.is_number(), ErrorKind::Config, path + ": expected a number");
  return j.get<double>();
}

long integer_at(const Json& j, const std::string& path) {
  require(j.is_number_integer(), ErrorKind::Config, path + ": expected an integer");
  return j.get<long>();
}

}  // namespace

void apply_tolerance_overrides(const Json& j, ToleranceConfig& t, const std::string& path) {
  require_object(j, path);
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    const std::string sub = path + "." + it.key();
    for (const auto& [name, field] : real_tolerances())
      if (it.key() == name) {
        t.*field = number_at(it.value(), sub);
        known = true;
      }
    for (const auto& [name, field] : int_tolerances())
      if (it.key() == name) {
        t.*field = static_cast<int>(integer_at(it.value(), sub));
        known = true;
      }
    if (it.key() == "grid_point_cap") {
      t.grid_point_cap = integer_at(it.value(), sub);
      known = true;
    }
    require(known, ErrorKind::Config, sub + ": unknown field");
  }
}

Json to_json(const ToleranceConfig& t) {
  Json out = Json::object();
  for (const auto& [name, field] : real_tolerances()) out[name] = t.*field;
  for (const auto& [name, field] : int_tolerances()) out[name] = t.*field;
  out["grid_point_cap"] = t.grid_point_cap;
  return out;
}

Json to_json(const SuiteConfig& c) {
  Json caps = Json::object();
  for (const auto& [name, field] : cap_fields()) caps[name] = c.caps.*field;
  Json trials = Json::object();
  for (const auto& [name, n] : c.trials) trials[name] = n;
  return {{"seed", c.seed},     {"suites", c.suites},         {"trials", trials},
          {"caps", caps},       {"tolerances", to_json(c.tolerances)},
          {"include_timing", c.include_timing}};
}

SuiteConfig suite_config_from_json(const Json& j) {
  require_object(j, "config");
  SuiteConfig c = SuiteConfig::defaults();
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const Json& v = it.value();
    const std::string path = "config." + key;
    if (key == "seed") {
      require(v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0),
              ErrorKind::Config, path + ": expected a nonnegative integer");
      c.seed = v.get<std::uint64_t>();
    } else if (key == "suites") {
      require(v.is_array(), ErrorKind::Config, path + ": expected an array of suite names");
      c.suites.clear();
      for (const auto& s : v) {
        require(s.is_string(), ErrorKind::Config, path + ": expected suite names");
        c.suites.push_back(s.get<std::string>());
      }
    } else if (key == "trials") {
      require_object(v, path);
      for (auto t = v.begin(); t != v.end(); ++t) c.trials[t.key()] = integer_at(t.value(), path + "." + t.key());
    } else if (key == "caps") {
      require_object(v, path);
      for (auto t = v.begin(); t != v.end(); ++t) {
        bool known = false;
        for (const auto& [name, field] : cap_fields()) {
          if (t.key() == name) {
            c.caps.*field = integer_at(t.value(), path + "." + name);
            known = true;
          }
        }
        require(known, ErrorKind::Config, path + "." + t.key() + ": unknown field");
      }
    } else if (key == "tolerances") {
      apply_tolerance_overrides(v, c.tolerances, path);
    } else if (key == "include_timing") {
      require(v.is_boolean(), ErrorKind::Config, path + ": expected a boolean");
      c.include_timing = v.get<bool>();
    } else {
      throw Error(ErrorKind::Config, path + ": unknown field");
    }
  }
  validate(c);
  return c;
}

Json instance_to_json(const Instance& instance) {
  return std::visit(
      [](const auto& inst) -> Json {
        using T = std::decay_t<decltype(inst)>;
        if constexpr (std::is_same_v<T, MaxAffineFn<double>>) {
          return {{"instance", "max_affine"}, {"f", convaff::to_json(inst)}};
        } else if constexpr (std::is_same_v<T, Polytope<double>>) {
          return {{"instance", "polytope"}, {"vertices", convaff::to_json(inst.vertices)}};
        } else if constexpr (std::is_same_v<T, FiniteScoredSet<double>>) {
          return {{"instance", "scored_set"},
                  {"points", convaff::to_json(inst.points)},
                  {"scores", convaff::to_json(inst.scores)}};
        } else {
          Json spaces = Json::array(), tables = Json::array();
          for (std::size_t m = 0; m < inst.spaces.size(); ++m) {
            spaces.push_back(convaff::to_json(inst.spaces[m]));
            tables.push_back(convaff::to_json(inst.tables[m]));
          }
          return {{"instance", "hbl"}, {"spaces", spaces}, {"tables", tables}};
        }
      },
      instance);
}

}  // namespace convaff::harness
