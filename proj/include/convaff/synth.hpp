#ifndef CONVAFF_SYNTH_HPP
#define CONVAFF_SYNTH_HPP

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "convaff/core.hpp"
#include "convaff/gauge.hpp"
#include "convaff/lp.hpp"
#include "convaff/midpoint.hpp"
#include "convaff/polytope.hpp"
#include "convaff/random.hpp"
#include "convaff/tolerance.hpp"

namespace convaff {

// ---------------------------------------------------------------------------
// Scored sets B subset of E x R

/// Finite B: column k of `points` is b_k, `scores(k)` is beta_k.
template <typename Scalar>
struct FiniteScoredSet {
  Matrix<Scalar> points;
  Vector<Scalar> scores;
};

/// B = {(map(z), score(z)) : z in conv(vertices)} with affine map and score.
template <typename Scalar>
struct LiftedPolytope {
  Polytope<Scalar> domain;
  AffineTransform<Scalar> map;
  AffineMap<Scalar> score;
};

template <typename Scalar>
using ScoredSet = std::variant<FiniteScoredSet<Scalar>, LiftedPolytope<Scalar>>;

/// L(x, alpha) = <Lambda, x> - lambda * alpha on E x R.
template <typename Scalar>
struct LiftedLinear {
  LinearMap<Scalar> Lambda;
  Scalar lambda{0};

  template <typename Derived>
  Scalar operator()(const Eigen::MatrixBase<Derived>& x, Scalar alpha) const {
    return Lambda.w.dot(x) - lambda * alpha;
  }
};

/// Lifted linear maps dominated by S_f, parameterized by mu >= 0:
///   Lambda = sum_i mu_i a_i,  lambda = sum_i mu_i,  sum_i mu_i (-shifted b_i) <= 1.
/// For max-affine f the conjugate of the shifted function is the
/// minimum of -sum nu_i shifted b_i over nu in the simplex with
/// sum nu_i a_i = y, which gives exactly this set.
template <typename Scalar>
struct GaugeSupportSystem {
  Matrix<Scalar> slopes;  // p x d, row i is a_i
  Vector<Scalar> budget;  // -shifted b_i, all >= 1

  Index variables() const { return slopes.rows(); }

  LiftedLinear<Scalar> lifted(const Vector<Scalar>& mu) const {
    return {{slopes.transpose() * mu}, mu.sum()};
  }

  bool feasible(const Vector<Scalar>& mu, Scalar tol = Scalar(1e-12)) const {
    return mu.size() == variables() && (mu.array() >= -tol).all() &&
           budget.dot(mu) <= Scalar(1) + tol;
  }
};

template <typename Scalar>
GaugeSupportSystem<Scalar> build_gauge_support_lp(const ShiftedFn<Scalar>& fs) {
  return {fs.slopes(), -fs.offsets()};
}

// ---------------------------------------------------------------------------
// Certificates

struct DominationReport {
  long samples = 0;
  double worst_deficit = std::numeric_limits<double>::infinity();  // min f(x) - A(x)
  std::vector<double> witness;
};

enum class CertificateKind { Exact, Approximate, Fallback };

inline const char* to_string(CertificateKind k) {
  switch (k) {
    case CertificateKind::Exact: return "exact";
    case CertificateKind::Approximate: return "approximate";
    case CertificateKind::Fallback: return "fallback";
  }
  return "unknown";
}

template <typename Scalar>
struct SynthCertificate {
  AffineMap<Scalar> affine;
  LiftedLinear<Scalar> lifted;
  Vector<Scalar> support_weights;  // mu
  Scalar delta{0};                 // inf_B f(b) + beta
  Scalar lhs{0};                   // inf_B A(b) + beta
  Scalar rhs{0};                   // = delta
  Scalar gap{0};                   // rhs - lhs
  Scalar t_star{0};                // optimum of the support LP, >= 1 when tight
  Vector<Scalar> minimizer;        // point of B (or of the index polytope) realising delta
  DominationReport domination;
  MidpointReport condition;
  CertificateKind kind = CertificateKind::Exact;
  long grid_resolution = 0;        // barycentric resolution 1/n, Approximate only
  Index constraint_points = 0;
  Vector<Scalar> fallback_point;   // Fallback only

  bool dominated(const ToleranceConfig& tol) const {
    return domination.worst_deficit >= -tol.tol_dom;
  }
  bool tight(const ToleranceConfig& tol) const { return std::abs(double(gap)) <= tol.tol_gap; }
  bool optimality_marker(const ToleranceConfig& tol) const {
    return double(t_star) >= 1.0 - tol.tol_lp;
  }
  /// All guarantees of an accepted certificate, checked together.
  bool conclusion_holds(const ToleranceConfig& tol) const {
    if (kind == CertificateKind::Fallback) return dominated(tol);
    return condition.satisfied() && dominated(tol) && tight(tol) && optimality_marker(tol) &&
           double(lifted.lambda) > tol.lambda_min;
  }
};

// ---------------------------------------------------------------------------
// Infima

template <typename Scalar>
struct ScoredMinimum {
  Scalar value{0};
  Vector<Scalar> point;  // b (finite) or z (polytope)
};

namespace detail {

template <typename Scalar>
void check_unbounded(Scalar value, const ToleranceConfig& tol) {
  if (!(double(value) >= tol.unbounded_sentinel))
    throw Error(ErrorKind::UnboundedBelow, "infimum over the set is below the -1e12 sentinel");
}

}  // namespace detail

/// min over conv(vertices) of F, exact by LP.
template <typename Scalar>
HullMinimum<Scalar> min_convex_over_polytope(const MaxAffineFn<Scalar>& f,
                                             const Polytope<Scalar>& c) {
  return minimize_over_hull<Scalar>({f}, c);
}

template <typename Scalar>
ScoredMinimum<Scalar> min_over_scored_set(const MaxAffineFn<Scalar>& f, const ScoredSet<Scalar>& b,
                                          const ToleranceConfig& tol = {}) {
  ScoredMinimum<Scalar> out;
  if (const auto* fin = std::get_if<FiniteScoredSet<Scalar>>(&b)) {
    require(fin->points.cols() >= 1, ErrorKind::EmptySet, "B must be nonempty");
    detail::require_dim(fin->points.cols(), fin->scores.size(), "B scores");
    const RowVector<Scalar> values = evaluate_columns(f, fin->points) + fin->scores.transpose();
    Index k = 0;
    out.value = values.minCoeff(&k);
    out.point = fin->points.col(k);
  } else {
    const auto& lp = std::get<LiftedPolytope<Scalar>>(b);
    const MaxAffineFn<Scalar> lifted = add(compose(f, lp.map), lp.score);
    const HullMinimum<Scalar> hull = minimize_over_hull<Scalar>({lifted}, lp.domain);
    out.value = hull.value;
    out.point = hull.point;
  }
  detail::check_unbounded(out.value, tol);
  return out;
}

// ---------------------------------------------------------------------------
// Conditions

/// For all pairs of B some (b, beta) in B has
///   f(rho [b - b1/2 - b2/2]) + rho [beta - beta1/2 - beta2/2] <= f(0) for all rho >= 0.
/// With w and kappa the bracketed differences this holds iff
/// max_i <a_i, w> + kappa <= 0.
template <typename Scalar>
MidpointReport check_AFF3(const MaxAffineFn<Scalar>& f, const FiniteScoredSet<Scalar>& b,
                          double tol = ToleranceConfig{}.tol_mid) {
  require(b.points.cols() >= 1, ErrorKind::EmptySet, "B must be nonempty");
  detail::require_dim(f.dim(), b.points.rows(), "B points");
  detail::require_dim(b.points.cols(), b.scores.size(), "B scores");
  return scan_midpoint(
      b.points.cols(),
      [&](Index k, Index i, Index j) {
        const Vector<Scalar> w = b.points.col(k) - (b.points.col(i) + b.points.col(j)) / Scalar(2);
        const Scalar kappa = b.scores(k) - (b.scores(i) + b.scores(j)) / Scalar(2);
        return (f.slopes() * w).maxCoeff() + kappa;
      },
      tol);
}

// ---------------------------------------------------------------------------
// Pipelines

/// A(y) = f(x) + <g, y - x> with g the lowest-index active slope.
template <typename Scalar>
AffineMap<Scalar> support_at_point(const MaxAffineFn<Scalar>& f, const Vector<Scalar>& x) {
  return tangent(subgradient(f, x), x, evaluate(f, x));
}

template <typename Scalar>
DominationReport sample_domination(const MaxAffineFn<Scalar>& f, const AffineMap<Scalar>& a,
                                   const Matrix<Scalar>& anchors, std::uint64_t seed,
                                   const ToleranceConfig& tol) {
  const Index d = f.dim();
  const long n = tol.domination_samples;
  SplitMix64 rng(seed);
  Matrix<Scalar> x(d, n);
  for (long s = 0; s < n; ++s) {
    // Three regimes: the working box, a wide box, and near the set itself.
    const long regime = s % 4;
    for (Index i = 0; i < d; ++i) x(i, s) = Scalar(rng.uniform(-1.0, 1.0) * tol.domination_box);
    if (regime == 1) x.col(s) *= Scalar(100);
    if (regime == 2 && anchors.cols() > 0) {
      const Index k = static_cast<Index>(rng.integer(0, anchors.cols() - 1));
      x.col(s) = anchors.col(k) + x.col(s) * Scalar(1e-3);
    }
  }
  const RowVector<Scalar> deficit =
      evaluate_columns(f, x) - ((a.w.transpose() * x).array() + a.c).matrix();
  DominationReport r;
  r.samples = n;
  Index worst = 0;
  r.worst_deficit = double(deficit.minCoeff(&worst));
  r.witness.assign(x.col(worst).data(), x.col(worst).data() + d);
  return r;
}

namespace detail {

inline constexpr std::uint64_t kDominationSeedLabel = 0xD0A11A7E;

// Core of every pipeline. Columns of `points` and entries of `scores` are the
// members (b, beta) of B whose constraints enter the LP; `lhs_points` /
// `lhs_scores` are the members over which inf_B A(b) + beta is reported.
template <typename Scalar>
SynthCertificate<Scalar> synthesize(const MaxAffineFn<Scalar>& f, Scalar delta,
                                    const Matrix<Scalar>& points, const Vector<Scalar>& scores,
                                    bool row_generation, const ToleranceConfig& tol,
                                    std::uint64_t seed) {
  const ShiftedFn<Scalar> fs = shift(f);
  const GaugeSupportSystem<Scalar> support = build_gauge_support_lp(fs);
  const Scalar f0 = fs.origin_value();
  const Index p = support.variables();

  // D = {(b, delta - beta - f(0) - 1)}; maximize t subject to
  // <Lambda, b> - lambda * eta >= t for every member, i.e.
  // sum_i mu_i (<a_i, b> - eta) - t >= 0.
  const Vector<Scalar> eta = (delta - f0 - Scalar(1)) - scores.array();
  Matrix<Scalar> candidates(points.cols(), p + 1);
  candidates.leftCols(p) = (support.slopes * points).transpose();
  candidates.leftCols(p).colwise() -= eta;
  candidates.col(p).setConstant(-1);
  const Vector<Scalar> candidate_rhs = Vector<Scalar>::Zero(points.cols());

  LinearProgram<Scalar> base(p + 1, 1);
  base.objective(p) = 1;
  base.free[static_cast<std::size_t>(p)] = true;
  base.rows.row(0).head(p) = support.budget.transpose();
  base.rhs(0) = 1;
  base.senses[0] = RowSense::LessEqual;

  std::vector<Index> active;
  if (row_generation) {
    const Index step = std::max<Index>(1, points.cols() / 64);
    for (Index k = 0; k < points.cols(); k += step) active.push_back(k);
  } else {
    for (Index k = 0; k < points.cols(); ++k) active.push_back(k);
  }
  const LpSolution<Scalar> sol = solve_lp_with_row_generation(
      base, candidates, candidate_rhs, std::move(active), Scalar(row_generation ? 1e-13 : 0));
  require(sol.optimal(), ErrorKind::LpFailure,
          std::string("support linear program: ") + to_string(sol.status));

  SynthCertificate<Scalar> cert;
  cert.support_weights = sol.x.head(p).cwiseMax(Scalar(0));
  cert.lifted = support.lifted(cert.support_weights);
  cert.t_star = sol.x(p);
  cert.delta = delta;
  cert.rhs = delta;
  cert.constraint_points = points.cols();

  const Scalar lambda = cert.lifted.lambda;
  if (!(double(lambda) > tol.lambda_min))
    throw Error(ErrorKind::DegenerateLambda, "lambda = " + std::to_string(double(lambda)));

  // A = Lambda / lambda - 1 / lambda + f(0) + 1
  cert.affine.w = cert.lifted.Lambda.w / lambda;
  cert.affine.c = f0 + Scalar(1) - Scalar(1) / lambda;

  const RowVector<Scalar> lhs_values =
      ((cert.affine.w.transpose() * points).array() + cert.affine.c).matrix() + scores.transpose();
  cert.lhs = lhs_values.minCoeff();
  cert.gap = cert.rhs - cert.lhs;
  cert.domination = sample_domination(f, cert.affine, points, seed, tol);
  return cert;
}

template <typename Scalar>
SynthCertificate<Scalar> fallback_certificate(const MaxAffineFn<Scalar>& f,
                                              const Vector<Scalar>& x0, const Matrix<Scalar>& points,
                                              const Vector<Scalar>& scores,
                                              const ToleranceConfig& tol, std::uint64_t seed) {
  SynthCertificate<Scalar> cert;
  cert.kind = CertificateKind::Fallback;
  cert.affine = support_at_point(f, x0);
  cert.fallback_point = x0;
  cert.lifted = {{cert.affine.w}, Scalar(1)};
  const RowVector<Scalar> f_values = evaluate_columns(f, points) + scores.transpose();
  const RowVector<Scalar> a_values =
      ((cert.affine.w.transpose() * points).array() + cert.affine.c).matrix() + scores.transpose();
  cert.delta = f_values.minCoeff();
  cert.rhs = cert.delta;
  cert.lhs = a_values.minCoeff();
  cert.gap = cert.rhs - cert.lhs;
  cert.constraint_points = points.cols();
  cert.domination = sample_domination(f, cert.affine, points, seed, tol);
  cert.condition.note = "infimum below sentinel; supporting map at a point of the set";
  return cert;
}

template <typename Scalar>
void lift_vertices(const LiftedPolytope<Scalar>& lp, Matrix<Scalar>& points, Vector<Scalar>& scores) {
  points = lp.map.matrix * lp.domain.vertices;
  points.colwise() += lp.map.offset;
  scores = (lp.score.w.transpose() * lp.domain.vertices).transpose().array() + lp.score.c;
}

}  // namespace detail

/// Affine minorant A <= f with inf_B A(b) + beta = inf_B f(b) + beta whenever
/// the pairwise condition holds (checked for finite B, automatic for a lifted
/// polytope with affine score).
template <typename Scalar>
SynthCertificate<Scalar> synth_affine_from_B(const MaxAffineFn<Scalar>& f, const ScoredSet<Scalar>& b,
                                             const ToleranceConfig& tol = {},
                                             std::uint64_t seed = 0) {
  const ScoredMinimum<Scalar> minimum = min_over_scored_set(f, b, tol);
  Matrix<Scalar> points;
  Vector<Scalar> scores;
  MidpointReport condition;
  if (const auto* fin = std::get_if<FiniteScoredSet<Scalar>>(&b)) {
    points = fin->points;
    scores = fin->scores;
    condition = check_AFF3(f, *fin, tol.tol_mid);
  } else {
    const auto& lp = std::get<LiftedPolytope<Scalar>>(b);
    detail::require_dim(f.dim(), lp.map.output_dim(), "lifted polytope map");
    detail::require_dim(lp.domain.dim(), lp.map.input_dim(), "lifted polytope domain");
    detail::require_dim(lp.domain.dim(), lp.score.dim(), "lifted polytope score");
    detail::lift_vertices(lp, points, scores);
    condition = MidpointReport::by_convexity(
        "convex index set with affine map and score: the midpoint is a witness");
  }
  SynthCertificate<Scalar> cert = detail::synthesize(
      f, minimum.value, points, scores, false, tol,
      derive_seed(seed, detail::kDominationSeedLabel));
  cert.minimizer = minimum.point;
  cert.condition = std::move(condition);
  return cert;
}

/// Finite Z: hypothesis checked, ConditionViolatedError carries the witness.
template <typename Scalar>
SynthCertificate<Scalar> synth_sun(const MaxAffineFn<Scalar>& f, const Matrix<Scalar>& z,
                                   const ToleranceConfig& tol = {}, std::uint64_t seed = 0) {
  require(z.cols() >= 1, ErrorKind::EmptySet, "Z must be nonempty");
  const FiniteScoredSet<Scalar> b{z, Vector<Scalar>::Zero(z.cols())};
  MidpointReport condition = check_AFF3(f, b, tol.tol_mid);
  if (!condition.satisfied())
    throw ConditionViolatedError("Z fails the midpoint recession condition", std::move(condition));
  try {
    return synth_affine_from_B<Scalar>(f, b, tol, seed);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::UnboundedBelow) throw;
    return detail::fallback_certificate<Scalar>(f, z.col(0), b.points, b.scores, tol,
                                                derive_seed(seed, detail::kDominationSeedLabel));
  }
}

/// Convex (polytope) C: the condition holds with the midpoint as witness.
template <typename Scalar>
SynthCertificate<Scalar> synth_sun(const MaxAffineFn<Scalar>& f, const Polytope<Scalar>& c,
                                   const ToleranceConfig& tol = {}, std::uint64_t seed = 0) {
  require(c.vertex_count() >= 1, ErrorKind::EmptySet, "C must have a vertex");
  const LiftedPolytope<Scalar> b{c, AffineTransform<Scalar>::identity(c.dim()),
                                 {Vector<Scalar>::Zero(c.dim()), Scalar(0)}};
  try {
    return synth_affine_from_B<Scalar>(f, b, tol, seed);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::UnboundedBelow) throw;
    return detail::fallback_certificate<Scalar>(f, c.vertices.col(0), c.vertices,
                                                Vector<Scalar>::Zero(c.vertex_count()), tol,
                                                derive_seed(seed, detail::kDominationSeedLabel));
  }
}

/// Finite Z given as tables: column k of `j` is j(z_k), `k(k)` is k(z_k).
template <typename Scalar>
struct CahblTable {
  Matrix<Scalar> j;
  Vector<Scalar> k;
};

/// Z = conv(vertices) with affine j and either affine or max-affine k.
template <typename Scalar>
struct CahblPolytope {
  Polytope<Scalar> domain;
  AffineTransform<Scalar> j;
  std::variant<AffineMap<Scalar>, MaxAffineFn<Scalar>> k;
};

template <typename Scalar>
SynthCertificate<Scalar> synth_cahbl(const MaxAffineFn<Scalar>& f, const CahblTable<Scalar>& z,
                                     const ToleranceConfig& tol = {}, std::uint64_t seed = 0) {
  require(z.j.cols() >= 1, ErrorKind::EmptySet, "Z must be nonempty");
  const FiniteScoredSet<Scalar> b{z.j, z.k};
  MidpointReport condition = check_AFF3(f, b, tol.tol_mid);
  if (!condition.satisfied())
    throw ConditionViolatedError("(j, k) fails the convex-affine midpoint condition",
                                 std::move(condition));
  try {
    return synth_affine_from_B<Scalar>(f, b, tol, seed);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::UnboundedBelow) throw;
    return detail::fallback_certificate<Scalar>(f, z.j.col(0), b.points, b.scores, tol,
                                                derive_seed(seed, detail::kDominationSeedLabel));
  }
}

/// Affine k: exact vertex reduction. Max-affine k with several pieces: the
/// support LP is imposed on a barycentric grid of the domain and the
/// certificate is marked Approximate.
template <typename Scalar>
SynthCertificate<Scalar> synth_cahbl(const MaxAffineFn<Scalar>& f, const CahblPolytope<Scalar>& z,
                                     const ToleranceConfig& tol = {}, std::uint64_t seed = 0) {
  require(z.domain.vertex_count() >= 1, ErrorKind::EmptySet, "C must have a vertex");
  detail::require_dim(f.dim(), z.j.output_dim(), "j output");
  detail::require_dim(z.domain.dim(), z.j.input_dim(), "j input");

  const AffineMap<Scalar>* affine_k = std::get_if<AffineMap<Scalar>>(&z.k);
  std::optional<AffineMap<Scalar>> collapsed;
  if (!affine_k) {
    const auto& mk = std::get<MaxAffineFn<Scalar>>(z.k);
    detail::require_dim(z.domain.dim(), mk.dim(), "k input");
    if (mk.pieces() == 1) {
      collapsed = AffineMap<Scalar>{mk.slopes().row(0).transpose(), mk.offsets()(0)};
      affine_k = &*collapsed;
    }
  }

  const Matrix<Scalar> vertex_j = [&] {
    Matrix<Scalar> m = z.j.matrix * z.domain.vertices;
    m.colwise() += z.j.offset;
    return m;
  }();

  if (affine_k) {
    const LiftedPolytope<Scalar> b{z.domain, z.j, *affine_k};
    try {
      return synth_affine_from_B<Scalar>(f, b, tol, seed);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::UnboundedBelow) throw;
      const Vector<Scalar> scores =
          (affine_k->w.transpose() * z.domain.vertices).transpose().array() + affine_k->c;
      return detail::fallback_certificate<Scalar>(f, vertex_j.col(0), vertex_j, scores, tol,
                                                  derive_seed(seed, detail::kDominationSeedLabel));
    }
  }

  const auto& mk = std::get<MaxAffineFn<Scalar>>(z.k);
  const HullMinimum<Scalar> minimum = minimize_over_hull<Scalar>({compose(f, z.j), mk}, z.domain);
  const long n = grid_resolution_for(tol.grid_resolution, z.domain.vertex_count(), tol.grid_point_cap);
  const Matrix<Scalar> grid = barycentric_grid(z.domain, n);
  Matrix<Scalar> points = z.j.matrix * grid;
  points.colwise() += z.j.offset;
  const Vector<Scalar> scores = evaluate_columns(mk, grid).transpose();

  try {
    detail::check_unbounded(minimum.value, tol);
  } catch (const Error&) {
    return detail::fallback_certificate<Scalar>(f, points.col(0), points, scores, tol,
                                                derive_seed(seed, detail::kDominationSeedLabel));
  }
  SynthCertificate<Scalar> cert = detail::synthesize(
      f, minimum.value, points, scores, true, tol, derive_seed(seed, detail::kDominationSeedLabel));
  cert.kind = CertificateKind::Approximate;
  cert.grid_resolution = n;
  cert.minimizer = minimum.point;
  cert.condition = MidpointReport::by_convexity(
      "convex index set with affine j and convex k: the midpoint is a witness");
  return cert;
}

}  // namespace convaff

#endif  // CONVAFF_SYNTH_HPP
