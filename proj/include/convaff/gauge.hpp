#ifndef CONVAFF_GAUGE_HPP
#define CONVAFF_GAUGE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "convaff/core.hpp"
#include "convaff/tolerance.hpp"

namespace convaff {

/// f - f(0) - 1 for max-affine f: same slopes, offsets b_i - f(0) - 1.
/// The largest shifted offset is exactly -1 and every offset is <= -1.
template <typename Scalar>
class ShiftedFn {
 public:
  explicit ShiftedFn(const MaxAffineFn<Scalar>& f)
      : origin_value_(f.value_at_origin()),
        shifted_(f.slopes(), f.offsets().array() - (f.value_at_origin() + Scalar(1))) {}

  const MaxAffineFn<Scalar>& function() const { return shifted_; }
  Index dim() const { return shifted_.dim(); }
  Index pieces() const { return shifted_.pieces(); }
  const Matrix<Scalar>& slopes() const { return shifted_.slopes(); }
  const Vector<Scalar>& offsets() const { return shifted_.offsets(); }

  /// f(0) of the unshifted function.
  Scalar origin_value() const { return origin_value_; }

  template <typename Derived>
  Scalar operator()(const Eigen::MatrixBase<Derived>& x) const {
    return evaluate(shifted_, x);
  }

 private:
  Scalar origin_value_;
  MaxAffineFn<Scalar> shifted_;
};

template <typename Scalar>
ShiftedFn<Scalar> shift(const MaxAffineFn<Scalar>& f) {
  return ShiftedFn<Scalar>(f);
}

enum class GaugeBranch { Zero, Root };

inline const char* to_string(GaugeBranch b) { return b == GaugeBranch::Zero ? "zero" : "root"; }

template <typename Scalar>
struct GaugeValue {
  Scalar value{0};
  GaugeBranch branch = GaugeBranch::Zero;
  Scalar residual{0};
  int iterations = 0;
};

// ---------------------------------------------------------------------------
// Perspective f_x(mu) = mu * shifted_f(x / mu)

template <typename Scalar, typename Derived>
Scalar perspective(const ShiftedFn<Scalar>& fs, const Eigen::MatrixBase<Derived>& x, Scalar mu) {
  require(mu > Scalar(0), ErrorKind::InvalidArgument, "perspective needs mu > 0");
  detail::require_dim(fs.dim(), x.rows(), "perspective argument");
  return (fs.slopes() * x + mu * fs.offsets()).maxCoeff();
}

template <typename Scalar, typename Derived>
Scalar perspective(const MaxAffineFn<Scalar>& f, const Eigen::MatrixBase<Derived>& x, Scalar mu) {
  return perspective(shift(f), x, mu);
}

template <typename Scalar>
Scalar perspective(const ConvexOracle<Scalar>& f, const Vector<Scalar>& x, Scalar mu) {
  require(mu > Scalar(0), ErrorKind::InvalidArgument, "perspective needs mu > 0");
  const Scalar f0 = f.value(Vector<Scalar>::Zero(f.dim));
  return mu * (f.value(x / mu) - f0 - Scalar(1));
}

// ---------------------------------------------------------------------------
// Zero branch: S_f(x, alpha) = 0 iff f(rho x) - alpha rho <= f(0) for all
// rho >= 0. For max-affine f this is exactly max_i <a_i, x> <= alpha.

template <typename Scalar, typename Derived>
bool gauge_is_zero(const ShiftedFn<Scalar>& fs, const Eigen::MatrixBase<Derived>& x, Scalar alpha,
                   const ToleranceConfig& tol = {}) {
  detail::require_dim(fs.dim(), x.rows(), "gauge argument");
  return (fs.slopes() * x).maxCoeff() <= alpha + Scalar(tol.tol_zero);
}

template <typename Scalar, typename Derived>
bool gauge_is_zero(const MaxAffineFn<Scalar>& f, const Eigen::MatrixBase<Derived>& x, Scalar alpha,
                   const ToleranceConfig& tol = {}) {
  detail::require_dim(f.dim(), x.rows(), "gauge argument");
  return (f.slopes() * x).maxCoeff() <= alpha + Scalar(tol.tol_zero);
}

struct ZeroTest {
  bool zero = false;
  bool conclusive = true;
};

/// Sampled test over rho in {2^0, ..., 2^H}. The difference quotient
/// (f(rho x) - f(0)) / rho is nondecreasing in rho, so a failure at any
/// sample is conclusive; passing every sample is conclusive only when the
/// quotient has flattened out by the last two samples.
template <typename Scalar>
ZeroTest gauge_zero_test(const ConvexOracle<Scalar>& f, const Vector<Scalar>& x, Scalar alpha,
                         const ToleranceConfig& tol = {}) {
  detail::require_dim(f.dim, x.rows(), "gauge argument");
  const Scalar f0 = f.value(Vector<Scalar>::Zero(f.dim));
  Scalar previous = -std::numeric_limits<Scalar>::infinity();
  Scalar quotient = previous;
  for (int k = 0; k <= tol.zero_test_log2_horizon; ++k) {
    const Scalar rho = std::ldexp(Scalar(1), k);
    previous = quotient;
    quotient = (f.value(rho * x) - f0) / rho;
    if (quotient > alpha + Scalar(tol.tol_zero)) return {false, true};
  }
  const Scalar flat = Scalar(1e-9) * std::max(Scalar(1), std::abs(alpha));
  return {true, quotient - previous <= flat};
}

template <typename Scalar>
bool gauge_is_zero(const ConvexOracle<Scalar>& f, const Vector<Scalar>& x, Scalar alpha,
                   const ToleranceConfig& tol = {}) {
  const ZeroTest t = gauge_zero_test(f, x, alpha, tol);
  return t.zero && t.conclusive;
}

// ---------------------------------------------------------------------------
// Gauge evaluation

/// Closed form for max-affine f: max_i (<a_i,x> - alpha) / (-shifted b_i),
/// clamped at zero. Every shifted offset is <= -1.
template <typename Scalar, typename Derived>
GaugeValue<Scalar> eval_gauge(const ShiftedFn<Scalar>& fs, const Eigen::MatrixBase<Derived>& x,
                              Scalar alpha, const ToleranceConfig& tol = {}) {
  detail::require_dim(fs.dim(), x.rows(), "gauge argument");
  if (gauge_is_zero(fs, x, alpha, tol)) return {};
  const Vector<Scalar> slope_values = fs.slopes() * x;
  const Scalar value =
      ((slope_values.array() - alpha) / (-fs.offsets().array())).maxCoeff();
  GaugeValue<Scalar> g;
  g.value = std::max(value, Scalar(0));
  g.branch = GaugeBranch::Root;
  g.residual = std::abs((slope_values + g.value * fs.offsets()).maxCoeff() - alpha);
  return g;
}

template <typename Scalar, typename Derived>
GaugeValue<Scalar> eval_gauge(const MaxAffineFn<Scalar>& f, const Eigen::MatrixBase<Derived>& x,
                              Scalar alpha, const ToleranceConfig& tol = {}) {
  return eval_gauge(shift(f), x, alpha, tol);
}

/// Bracketing plus bisection on the strictly decreasing perspective.
template <typename Scalar>
GaugeValue<Scalar> eval_gauge(const ConvexOracle<Scalar>& f, const Vector<Scalar>& x, Scalar alpha,
                              const ToleranceConfig& tol = {}) {
  const ZeroTest zero = gauge_zero_test(f, x, alpha, tol);
  if (zero.zero && zero.conclusive) return {};

  const Scalar f0 = f.value(Vector<Scalar>::Zero(f.dim));
  auto fx = [&](Scalar mu) { return mu * (f.value(x / mu) - f0 - Scalar(1)); };

  GaugeValue<Scalar> g;
  g.branch = GaugeBranch::Root;
  Scalar lo = 1, hi = 1;
  if (fx(Scalar(1)) < alpha) {
    bool found = false;
    for (int k = 0; k < tol.gauge_iteration_cap; ++k) {
      ++g.iterations;
      lo = hi / 2;
      if (fx(lo) >= alpha) {
        found = true;
        break;
      }
      hi = lo;
    }
    if (!found) {
      // Every probe down to 2^-cap lies in I(x, alpha).
      if (zero.zero) return {};
      throw Error(ErrorKind::BracketFailure, "no lower bracket for the gauge root");
    }
  } else {
    bool found = false;
    for (int k = 0; k < tol.gauge_iteration_cap; ++k) {
      ++g.iterations;
      hi = lo * 2;
      if (fx(hi) < alpha) {
        found = true;
        break;
      }
      lo = hi;
    }
    if (!found) throw Error(ErrorKind::BracketFailure, "perspective did not fall below alpha");
  }

  // bisect until the bracket is narrow and the midpoint solves the equation
  Scalar mid = lo + (hi - lo) / 2;
  Scalar f_mid = fx(mid);
  int steps = 0;
  while (hi - lo > Scalar(tol.gauge_width) * std::max(Scalar(1), hi) ||
         std::abs(f_mid - alpha) > Scalar(tol.tol_gauge)) {
    if (f_mid == alpha) break;
    if (++steps > tol.gauge_iteration_cap)
      throw Error(ErrorKind::BracketFailure, "bisection iteration cap reached");
    if (f_mid < alpha) hi = mid;
    else lo = mid;
    const Scalar next = lo + (hi - lo) / 2;
    if (!(next > lo && next < hi)) break;
    mid = next;
    f_mid = fx(mid);
  }
  g.iterations += steps;
  g.value = mid;
  g.residual = std::abs(f_mid - alpha);
  if (g.residual > Scalar(tol.tol_gauge))
    throw Error(ErrorKind::BracketFailure, "root residual above tolerance after bisection");
  return g;
}

// ---------------------------------------------------------------------------
// Sublinearity report

struct SublinearityTolerances {
  double axis = 1e-8;
  double graph = 1e-8;
  double hypograph = 1e-8;
  double homogeneity = 1e-9;
  double subadditivity = 1e-9;
};

struct PropertyCheck {
  std::string name;
  long passed = 0;
  long failed = 0;
  double worst = 0.0;          // largest violation seen; negative values are margins
  std::vector<double> witness; // point (x..., alpha[, extra]) realising `worst`

  bool ok() const { return failed == 0; }
};

inline PropertyCheck named(std::string name) {
  PropertyCheck c;
  c.name = std::move(name);
  return c;
}

struct SublinearityReport {
  PropertyCheck axis = named("axis");
  PropertyCheck hypograph = named("hypograph");
  PropertyCheck graph = named("graph");
  PropertyCheck origin = named("origin");
  PropertyCheck homogeneity = named("homogeneity");
  PropertyCheck subadditivity = named("subadditivity");
  double worst_root_residual = 0.0;
  long root_evaluations = 0;

  std::array<const PropertyCheck*, 6> checks() const {
    return {&axis, &hypograph, &graph, &origin, &homogeneity, &subadditivity};
  }

  bool ok() const {
    for (const PropertyCheck* c : checks())
      if (!c->ok()) return false;
    return true;
  }
};

namespace detail {

template <typename Scalar>
void record(PropertyCheck& check, double violation, double tol, const Vector<Scalar>& x,
            Scalar alpha, double extra = std::numeric_limits<double>::quiet_NaN()) {
  if (violation <= tol) ++check.passed;
  else ++check.failed;
  if (check.witness.empty() || violation > check.worst) {
    check.worst = violation;
    check.witness.assign(x.data(), x.data() + x.size());
    check.witness.push_back(static_cast<double>(alpha));
    if (!std::isnan(extra)) check.witness.push_back(extra);
  }
}

}  // namespace detail

/// Scales used for the homogeneity check at sample k.
inline double homogeneity_scale(Index k) {
  static constexpr double scales[] = {0.5, 2.0, 3.75, 10.0};
  return scales[k % 4];
}

/// Checks the six sublinearity properties of S_f at every sample column
/// (x_k, alpha_k). `gauge(x, alpha)` evaluates S_f, so closed-form and
/// bisection paths can be run through the same report.
///
/// axis:          S(0, a_k) = a_k^-
/// hypograph:     S(x_k, sf(x_k) - |a_k|) >= 1
/// graph:         S(x_k, sf(x_k)) = 1
/// origin:        S(0, 0) = 0
/// homogeneity:   S(t x_k, t a_k) = t S(x_k, a_k), relative to max(1, t S)
/// subadditivity: S(v_k) + S(v_k+1) >= S(v_k + v_k+1), cyclically
template <typename Scalar, typename Gauge>
SublinearityReport sublinearity_suite(const ShiftedFn<Scalar>& fs, const Matrix<Scalar>& points,
                                      const Vector<Scalar>& alphas, Gauge gauge,
                                      const SublinearityTolerances& tol = {}) {
  require(points.cols() >= 1, ErrorKind::EmptySet, "sublinearity suite needs samples");
  detail::require_dim(fs.dim(), points.rows(), "sample points");
  detail::require_dim(points.cols(), alphas.size(), "sample alphas");

  SublinearityReport report;
  const Index n = points.cols();
  const Vector<Scalar> zero = Vector<Scalar>::Zero(fs.dim());
  auto eval = [&](const Vector<Scalar>& x, Scalar alpha) {
    const GaugeValue<Scalar> g = gauge(x, alpha);
    if (g.branch == GaugeBranch::Root) {
      ++report.root_evaluations;
      report.worst_root_residual = std::max(report.worst_root_residual, double(g.residual));
    }
    return g.value;
  };

  {
    const Scalar s = eval(zero, Scalar(0));
    detail::record(report.origin, std::abs(double(s)), tol.axis, zero, Scalar(0));
  }
  for (Index k = 0; k < n; ++k) {
    const Vector<Scalar> x = points.col(k);
    const Scalar alpha = alphas(k);

    const Scalar axis_value = eval(zero, alpha);
    const Scalar negative_part = std::max(-alpha, Scalar(0));
    detail::record(report.axis, std::abs(double(axis_value - negative_part)), tol.axis, zero, alpha);

    const Scalar on_graph = fs(x);
    detail::record(report.graph, std::abs(double(eval(x, on_graph) - Scalar(1))), tol.graph, x,
                   on_graph);

    const Scalar below = on_graph - std::abs(alpha);
    detail::record(report.hypograph, double(Scalar(1) - eval(x, below)), tol.hypograph, x, below);

    const Scalar t = Scalar(homogeneity_scale(k));
    const Scalar base = eval(x, alpha);
    const Scalar scaled = eval(Vector<Scalar>(t * x), t * alpha);
    const double rel = std::abs(double(scaled - t * base)) / std::max(1.0, double(t * base));
    detail::record(report.homogeneity, rel, tol.homogeneity, x, alpha, double(t));

    const Index next = (k + 1) % n;
    const Vector<Scalar> y = points.col(next);
    const Scalar gamma = alphas(next);
    const Scalar slack = base + eval(y, gamma) - eval(Vector<Scalar>(x + y), alpha + gamma);
    detail::record(report.subadditivity, -double(slack), tol.subadditivity, x, alpha,
                   double(next));
  }
  return report;
}

template <typename Scalar>
SublinearityReport sublinearity_suite(const ShiftedFn<Scalar>& fs, const Matrix<Scalar>& points,
                                      const Vector<Scalar>& alphas,
                                      const ToleranceConfig& gauge_tol = {},
                                      const SublinearityTolerances& tol = {}) {
  return sublinearity_suite(
      fs, points, alphas,
      [&](const Vector<Scalar>& x, Scalar alpha) { return eval_gauge(fs, x, alpha, gauge_tol); },
      tol);
}

}  // namespace convaff

#endif  // CONVAFF_GAUGE_HPP
