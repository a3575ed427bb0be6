#ifndef CONVAFF_MOK_HPP
#define CONVAFF_MOK_HPP

#include <cmath>
#include <vector>

#include "convaff/core.hpp"
#include "convaff/lp.hpp"
#include "convaff/midpoint.hpp"
#include "convaff/tolerance.hpp"

namespace convaff {

// ---------------------------------------------------------------------------
// Max-min over a product of simplices.
//
//   maximize t  over theta^m in simplex(p_m), m = 0..n-1
//   s.t.  sum_m <theta^m, coeffs[m].col(k)> + constant(k) >= t   for every k
//
// With coeffs[m](i, k) = <l^m_i, j_m(z_k)> this is exactly the problem of
// choosing L_m in the convex hull of the pieces of S_m (the support set of a
// polyhedral sublinear functional) to maximize inf_Z sum_m L_m o j_m.
// Spaces with a single piece have their weight fixed at exactly 1.

template <typename Scalar>
struct SimplexMaxMin {
  LpStatus status = LpStatus::Infeasible;
  std::vector<Vector<Scalar>> weights;
  Scalar lp_value{0};  // t at the optimum
  Scalar value{0};     // min_k of the constraint expression at the weights
  Index pivots = 0;
};

template <typename Scalar>
SimplexMaxMin<Scalar> solve_simplex_max_min(const std::vector<Matrix<Scalar>>& coeffs,
                                            const Vector<Scalar>& constant,
                                            std::vector<Index> initial_rows = {},
                                            Index direct_row_limit = 512) {
  require(!coeffs.empty(), ErrorKind::InvalidArgument, "max-min needs at least one space");
  const Index rows = constant.size();
  require(rows >= 1, ErrorKind::EmptySet, "max-min needs at least one constraint column");

  // Variable layout: weights of multi-piece spaces, then t.
  std::vector<Index> offset(coeffs.size(), -1);
  Index vars = 0;
  Vector<Scalar> fixed = constant;
  for (std::size_t m = 0; m < coeffs.size(); ++m) {
    detail::require_dim(rows, coeffs[m].cols(), "max-min coefficient columns");
    require(coeffs[m].rows() >= 1, ErrorKind::InvalidArgument, "space without pieces");
    if (coeffs[m].rows() == 1) {
      fixed += coeffs[m].row(0).transpose();
    } else {
      offset[m] = vars;
      vars += coeffs[m].rows();
    }
  }
  const Index t_var = vars++;
  Index simplex_rows = 0;
  for (Index o : offset) simplex_rows += (o >= 0);

  LinearProgram<Scalar> base(vars, simplex_rows);
  base.objective(t_var) = 1;
  base.free[static_cast<std::size_t>(t_var)] = true;
  Index r = 0;
  for (std::size_t m = 0; m < coeffs.size(); ++m) {
    if (offset[m] < 0) continue;
    base.rows.row(r).segment(offset[m], coeffs[m].rows()).setOnes();
    base.rhs(r) = 1;
    base.senses[static_cast<std::size_t>(r)] = RowSense::Equal;
    ++r;
  }

  // sum_m <theta^m, coeff column> - t >= -fixed(k)
  Matrix<Scalar> candidates = Matrix<Scalar>::Zero(rows, vars);
  for (std::size_t m = 0; m < coeffs.size(); ++m) {
    if (offset[m] >= 0)
      candidates.middleCols(offset[m], coeffs[m].rows()) = coeffs[m].transpose();
  }
  candidates.col(t_var).setConstant(-1);
  const Vector<Scalar> candidate_rhs = -fixed;

  LpSolution<Scalar> sol;
  if (rows <= direct_row_limit) {
    std::vector<Index> all(static_cast<std::size_t>(rows));
    for (Index k = 0; k < rows; ++k) all[static_cast<std::size_t>(k)] = k;
    sol = solve_lp_with_row_generation(base, candidates, candidate_rhs, std::move(all), Scalar(0));
  } else {
    if (initial_rows.empty()) {
      const Index step = std::max<Index>(1, rows / 64);
      for (Index k = 0; k < rows; k += step) initial_rows.push_back(k);
    }
    sol = solve_lp_with_row_generation(base, candidates, candidate_rhs, std::move(initial_rows),
                                       Scalar(1e-13));
  }

  SimplexMaxMin<Scalar> out;
  out.status = sol.status;
  out.pivots = sol.pivots;
  if (!sol.optimal()) return out;

  out.weights.resize(coeffs.size());
  Vector<Scalar> total = constant;
  for (std::size_t m = 0; m < coeffs.size(); ++m) {
    Vector<Scalar> w;
    if (offset[m] < 0) {
      w = Vector<Scalar>::Ones(1);
    } else {
      w = sol.x.segment(offset[m], coeffs[m].rows()).cwiseMax(Scalar(0));
      const Scalar sum = w.sum();
      require(sum > Scalar(0), ErrorKind::LpFailure, "simplex weights vanished");
      if (sum != Scalar(1)) w /= sum;
    }
    total += coeffs[m].transpose() * w;
    out.weights[m] = std::move(w);
  }
  out.lp_value = sol.x(t_var);
  out.value = total.minCoeff();
  return out;
}

// ---------------------------------------------------------------------------
// Mazur-Orlicz-Konig for polyhedral S and finite D (columns of `points`).

template <typename Scalar>
MidpointReport check_midpoint(const PolyhedralSublinear<Scalar>& s, const Matrix<Scalar>& points,
                              double tol_mid = ToleranceConfig{}.tol_mid) {
  require(points.cols() >= 1, ErrorKind::EmptySet, "D must be nonempty");
  detail::require_dim(s.dim(), points.rows(), "D points");
  return scan_midpoint(
      points.cols(),
      [&](Index k, Index i, Index j) {
        const Vector<Scalar> w = points.col(k) - (points.col(i) + points.col(j)) / Scalar(2);
        return evaluate(s, w);
      },
      tol_mid);
}

template <typename Scalar>
struct MokCertificate {
  LinearMap<Scalar> linear;
  Vector<Scalar> weights;  // over the pieces of S
  Scalar value{0};         // inf_D L
  Scalar target{0};        // inf_D S
  Scalar gap{0};           // target - value
  Scalar lp_value{0};
  MidpointReport midpoint;

  /// The existence guarantee: midpoint hypothesis => |gap| <= tol.
  bool guarantee_holds(double tol_lp) const {
    return !midpoint.satisfied() || std::abs(double(gap)) <= tol_lp;
  }
};

template <typename Scalar>
MokCertificate<Scalar> solve_mok(const PolyhedralSublinear<Scalar>& s, const Matrix<Scalar>& points,
                                 const ToleranceConfig& tol = {}) {
  require(points.cols() >= 1, ErrorKind::EmptySet, "D must be nonempty");
  detail::require_dim(s.dim(), points.rows(), "D points");

  const Matrix<Scalar> piece_values = s.pieces() * points;
  const SimplexMaxMin<Scalar> mm =
      solve_simplex_max_min<Scalar>({piece_values}, Vector<Scalar>::Zero(points.cols()));
  require(mm.status == LpStatus::Optimal, ErrorKind::LpFailure,
          std::string("MOK linear program: ") + to_string(mm.status));

  MokCertificate<Scalar> cert;
  cert.weights = mm.weights.front();
  cert.linear.w = s.pieces().transpose() * cert.weights;
  cert.value = (cert.linear.w.transpose() * points).minCoeff();
  cert.target = piece_values.colwise().maxCoeff().minCoeff();
  cert.gap = cert.target - cert.value;
  cert.lp_value = mm.lp_value;
  cert.midpoint = check_midpoint(s, points, tol.tol_mid);
  return cert;
}

}  // namespace convaff

#endif  // CONVAFF_MOK_HPP
