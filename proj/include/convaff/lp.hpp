#ifndef CONVAFF_LP_HPP
#define CONVAFF_LP_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "convaff/core.hpp"

namespace convaff {

enum class RowSense { LessEqual, GreaterEqual, Equal };

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

inline const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::Optimal: return "Optimal";
    case LpStatus::Infeasible: return "Infeasible";
    case LpStatus::Unbounded: return "Unbounded";
    case LpStatus::IterationLimit: return "IterationLimit";
  }
  return "Unknown";
}

/// maximize objective . x  subject to  rows(r) . x  (sense_r)  rhs(r),
/// with x_j >= 0 unless free(j).
template <typename Scalar>
struct LinearProgram {
  LinearProgram(Index variables, Index constraints)
      : objective(Vector<Scalar>::Zero(variables)),
        free(static_cast<std::size_t>(variables), false),
        rows(Matrix<Scalar>::Zero(constraints, variables)),
        rhs(Vector<Scalar>::Zero(constraints)),
        senses(static_cast<std::size_t>(constraints), RowSense::LessEqual) {}

  Index variables() const { return objective.size(); }
  Index constraints() const { return rows.rows(); }

  Vector<Scalar> objective;
  std::vector<bool> free;
  Matrix<Scalar> rows;
  Vector<Scalar> rhs;
  std::vector<RowSense> senses;
};

template <typename Scalar>
struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  Vector<Scalar> x;
  Scalar objective = std::numeric_limits<Scalar>::quiet_NaN();
  Index pivots = 0;

  bool optimal() const { return status == LpStatus::Optimal; }
};

struct LpOptions {
  double pivot_tol = 1e-11;
  double cost_tol = 1e-12;
  double feasibility_tol = 1e-9;
  double ray_cost_tol = 1e-9;  // reduced costs above -this on a ray are roundoff
  long pivot_cap = 100000;
  long refactor_interval = 64;  // pivots between tableau recomputations
};

namespace detail {

// Dense two-phase tableau simplex. Entering and leaving choices follow
// Bland's rule, so the method terminates on degenerate problems and the
// pivot sequence is a pure function of the input.
template <typename Scalar>
class Tableau {
 public:
  Tableau(const LinearProgram<Scalar>& lp, const LpOptions& opt) : opt_(opt) {
    const Index n = lp.variables();
    const Index m = lp.constraints();

    // Column layout: structural (free variables split in two), then
    // slack/surplus, then artificial.
    positive_col_.resize(static_cast<std::size_t>(n));
    negative_col_.assign(static_cast<std::size_t>(n), -1);
    Index col = 0;
    for (Index j = 0; j < n; ++j) {
      positive_col_[static_cast<std::size_t>(j)] = col++;
      if (lp.free[static_cast<std::size_t>(j)]) negative_col_[static_cast<std::size_t>(j)] = col++;
    }
    const Index structural = col;

    std::vector<Scalar> sign(static_cast<std::size_t>(m), Scalar(1));
    std::vector<RowSense> sense(lp.senses);
    Index slacks = 0, artificials = 0;
    for (Index r = 0; r < m; ++r) {
      auto& s = sense[static_cast<std::size_t>(r)];
      if (lp.rhs(r) < 0) {
        sign[static_cast<std::size_t>(r)] = Scalar(-1);
        if (s == RowSense::LessEqual) s = RowSense::GreaterEqual;
        else if (s == RowSense::GreaterEqual) s = RowSense::LessEqual;
      }
      if (s != RowSense::Equal) ++slacks;
      if (s != RowSense::LessEqual) ++artificials;
    }
    first_artificial_ = structural + slacks;
    cols_ = first_artificial_ + artificials;
    table_ = Matrix<Scalar>::Zero(m + 1, cols_ + 1);
    basis_.assign(static_cast<std::size_t>(m), -1);

    Index slack_col = structural, art_col = first_artificial_;
    for (Index r = 0; r < m; ++r) {
      const Scalar sg = sign[static_cast<std::size_t>(r)];
      for (Index j = 0; j < n; ++j) {
        const Scalar a = sg * lp.rows(r, j);
        table_(r, positive_col_[static_cast<std::size_t>(j)]) = a;
        if (negative_col_[static_cast<std::size_t>(j)] >= 0)
          table_(r, negative_col_[static_cast<std::size_t>(j)]) = -a;
      }
      table_(r, cols_) = sg * lp.rhs(r);
      switch (sense[static_cast<std::size_t>(r)]) {
        case RowSense::LessEqual:
          table_(r, slack_col) = 1;
          basis_[static_cast<std::size_t>(r)] = slack_col++;
          break;
        case RowSense::GreaterEqual:
          table_(r, slack_col++) = -1;
          table_(r, art_col) = 1;
          basis_[static_cast<std::size_t>(r)] = art_col++;
          break;
        case RowSense::Equal:
          table_(r, art_col) = 1;
          basis_[static_cast<std::size_t>(r)] = art_col++;
          break;
      }
    }
    original_ = table_.topRows(m);
    cost_ = Vector<Scalar>::Zero(cols_);
  }

  LpSolution<Scalar> solve(const LinearProgram<Scalar>& lp) {
    LpSolution<Scalar> out;
    const Index m = table_.rows() - 1;

    // Phase 1: maximize -sum(artificials).
    if (cols_ > first_artificial_) {
      for (Index c = first_artificial_; c < cols_; ++c) cost_(c) = -1;
      const LpStatus status = optimize(cols_, true);
      out.pivots = pivots_;
      if (status != LpStatus::Optimal) {
        out.status = status;
        return out;
      }
      const Scalar scale = std::max<Scalar>(Scalar(1), table_.col(cols_).head(m).cwiseAbs().maxCoeff());
      if (table_(m, cols_) < -Scalar(opt_.feasibility_tol) * scale) {
        out.status = LpStatus::Infeasible;
        return out;
      }
      drive_out_artificials();
    }

    // Phase 2 over structural and slack columns only.
    for (Index c = 0; c < cols_; ++c) cost_(c) = structural_cost(lp, c);
    const LpStatus status = optimize(first_artificial_, false);
    out.pivots = pivots_;
    out.status = status;
    if (status != LpStatus::Optimal) return out;

    Vector<Scalar> column_value = Vector<Scalar>::Zero(cols_);
    for (Index r = 0; r < m; ++r) column_value(basis_[static_cast<std::size_t>(r)]) = table_(r, cols_);
    out.x.resize(lp.variables());
    for (Index j = 0; j < lp.variables(); ++j) {
      Scalar v = column_value(positive_col_[static_cast<std::size_t>(j)]);
      if (negative_col_[static_cast<std::size_t>(j)] >= 0)
        v -= column_value(negative_col_[static_cast<std::size_t>(j)]);
      out.x(j) = v;
    }
    out.objective = lp.objective.dot(out.x);
    return out;
  }

 private:
  Scalar structural_cost(const LinearProgram<Scalar>& lp, Index c) const {
    for (Index j = 0; j < lp.variables(); ++j) {
      if (positive_col_[static_cast<std::size_t>(j)] == c) return lp.objective(j);
      if (negative_col_[static_cast<std::size_t>(j)] == c) return -lp.objective(j);
    }
    return Scalar(0);
  }

  // Objective row holds reduced costs z_j - c_j; entry m of the last column
  // holds the current objective value.
  void set_objective_row() {
    const Index m = table_.rows() - 1;
    table_.row(m).setZero();
    table_.row(m).head(cols_) = -cost_.transpose();
    for (Index r = 0; r < m; ++r) {
      const Scalar cb = cost_(basis_[static_cast<std::size_t>(r)]);
      if (cb != Scalar(0)) table_.row(m) += cb * table_.row(r);
    }
  }

  // Recomputes the tableau from the original rows and the current basis,
  // discarding the roundoff accumulated by pivoting.
  void refactor() {
    const Index m = table_.rows() - 1;
    since_refactor_ = 0;
    if (m == 0) return;
    Matrix<Scalar> b(m, m);
    for (Index r = 0; r < m; ++r) b.col(r) = original_.col(basis_[static_cast<std::size_t>(r)]);
    const Eigen::PartialPivLU<Matrix<Scalar>> lu(b);
    Matrix<Scalar> fresh = lu.solve(original_);
    if (!fresh.allFinite()) return;
    for (Index r = 0; r < m; ++r) {
      fresh.row(r) /= fresh(r, basis_[static_cast<std::size_t>(r)]);
      fresh(r, basis_[static_cast<std::size_t>(r)]) = Scalar(1);
      Scalar& v = fresh(r, cols_);
      if (v < Scalar(0) && v > -Scalar(opt_.feasibility_tol)) v = Scalar(0);
    }
    table_.topRows(m) = fresh;
    set_objective_row();
  }

  bool has_entering(Index allowed_cols) const {
    const Index m = table_.rows() - 1;
    for (Index c = 0; c < allowed_cols; ++c)
      if (table_(m, c) < -Scalar(opt_.cost_tol)) return true;
    return false;
  }

  // Pivots to optimality, then refactors and resumes if the fresh reduced
  // costs still admit an entering column.
  LpStatus optimize(Index allowed_cols, bool bounded) {
    set_objective_row();
    LpStatus status = LpStatus::Optimal;
    for (int round = 0; round < 4; ++round) {
      status = iterate(allowed_cols, bounded);
      if (status != LpStatus::Optimal) return status;
      refactor();
      if (!has_entering(allowed_cols)) break;
    }
    return status;
  }

  // A column with a negative reduced cost but no positive entry is a ray
  // unless the reduced cost is roundoff; such columns are set aside. In
  // phase 1 the objective is bounded by zero, so every ray is roundoff.
  LpStatus iterate(Index allowed_cols, bool bounded) {
    const Index m = table_.rows() - 1;
    std::vector<bool> set_aside(static_cast<std::size_t>(allowed_cols), false);
    while (true) {
      Index enter = -1;
      for (Index c = 0; c < allowed_cols; ++c) {
        if (!set_aside[static_cast<std::size_t>(c)] && table_(m, c) < -Scalar(opt_.cost_tol)) {
          enter = c;
          break;
        }
      }
      if (enter < 0) return LpStatus::Optimal;

      Index leave = -1;
      Scalar best = std::numeric_limits<Scalar>::infinity();
      for (Index r = 0; r < m; ++r) {
        const Scalar a = table_(r, enter);
        if (a <= Scalar(opt_.pivot_tol)) continue;
        const Scalar ratio = table_(r, cols_) / a;
        if (leave < 0) {
          leave = r;
          best = ratio;
          continue;
        }
        const Scalar tie = Scalar(1e-12) * (Scalar(1) + std::abs(best));
        if (ratio < best - tie) {
          leave = r;
          best = ratio;
        } else if (ratio <= best + tie &&
                   basis_[static_cast<std::size_t>(r)] < basis_[static_cast<std::size_t>(leave)]) {
          leave = r;
          best = std::min(best, ratio);
        }
      }
      if (leave < 0) {
        if (!bounded && table_(m, enter) < -Scalar(opt_.ray_cost_tol)) return LpStatus::Unbounded;
        set_aside[static_cast<std::size_t>(enter)] = true;
        continue;
      }
      if (++pivots_ > opt_.pivot_cap) return LpStatus::IterationLimit;
      pivot(leave, enter);
      if (++since_refactor_ >= opt_.refactor_interval) refactor();
    }
  }

  void pivot(Index r, Index c) {
    table_.row(r) /= table_(r, c);
    for (Index i = 0; i < table_.rows(); ++i) {
      if (i == r) continue;
      const Scalar factor = table_(i, c);
      if (factor != Scalar(0)) table_.row(i) -= factor * table_.row(r);
    }
    table_(r, c) = Scalar(1);
    basis_[static_cast<std::size_t>(r)] = c;
  }

  // Artificials still basic after phase 1 sit at level zero. Pivot them out
  // on their largest entry where possible; a row with no usable pivot is
  // redundant and stays inert.
  void drive_out_artificials() {
    const Index m = table_.rows() - 1;
    for (Index r = 0; r < m; ++r) {
      if (basis_[static_cast<std::size_t>(r)] < first_artificial_) continue;
      Index best = -1;
      for (Index c = 0; c < first_artificial_; ++c) {
        if (std::abs(table_(r, c)) > Scalar(opt_.pivot_tol) &&
            (best < 0 || std::abs(table_(r, c)) > std::abs(table_(r, best))))
          best = c;
      }
      if (best >= 0) pivot(r, best);
    }
  }

  LpOptions opt_;
  Matrix<Scalar> table_;
  Matrix<Scalar> original_;
  Vector<Scalar> cost_;
  Index since_refactor_ = 0;
  std::vector<Index> basis_;
  std::vector<Index> positive_col_;
  std::vector<Index> negative_col_;
  Index first_artificial_ = 0;
  Index cols_ = 0;
  Index pivots_ = 0;
};

}  // namespace detail

template <typename Scalar>
LpSolution<Scalar> solve_lp(const LinearProgram<Scalar>& lp, const LpOptions& options = {}) {
  require(lp.rows.cols() == lp.variables() && lp.rhs.size() == lp.constraints() &&
              static_cast<Index>(lp.senses.size()) == lp.constraints() &&
              static_cast<Index>(lp.free.size()) == lp.variables(),
          ErrorKind::DimensionMismatch, "linear program shape");
  require(lp.rows.allFinite() && lp.rhs.allFinite() && lp.objective.allFinite(),
          ErrorKind::InvalidArgument, "linear program has non-finite data");
  detail::Tableau<Scalar> tableau(lp, options);
  return tableau.solve(lp);
}

/// Solves `base` augmented with rows `candidates(k) . x >= candidate_rhs(k)`
/// by adding the most violated candidate rows until none is violated by more
/// than `tol`. The result is optimal for the fully augmented problem.
template <typename Scalar>
LpSolution<Scalar> solve_lp_with_row_generation(const LinearProgram<Scalar>& base,
                                                const Matrix<Scalar>& candidates,
                                                const Vector<Scalar>& candidate_rhs,
                                                std::vector<Index> active, Scalar tol,
                                                const LpOptions& options = {},
                                                Index batch = 8) {
  std::vector<bool> in_set(static_cast<std::size_t>(candidates.rows()), false);
  for (Index k : active) in_set[static_cast<std::size_t>(k)] = true;
  while (true) {
    LinearProgram<Scalar> lp(base.variables(), base.constraints() + static_cast<Index>(active.size()));
    lp.objective = base.objective;
    lp.free = base.free;
    lp.rows.topRows(base.constraints()) = base.rows;
    lp.rhs.head(base.constraints()) = base.rhs;
    std::copy(base.senses.begin(), base.senses.end(), lp.senses.begin());
    for (std::size_t i = 0; i < active.size(); ++i) {
      const Index r = base.constraints() + static_cast<Index>(i);
      lp.rows.row(r) = candidates.row(active[i]);
      lp.rhs(r) = candidate_rhs(active[i]);
      lp.senses[static_cast<std::size_t>(r)] = RowSense::GreaterEqual;
    }
    LpSolution<Scalar> sol = solve_lp(lp, options);
    if (!sol.optimal()) return sol;

    const Vector<Scalar> slack = candidates * sol.x - candidate_rhs;
    std::vector<Index> violated;
    for (Index k = 0; k < slack.size(); ++k) {
      if (!in_set[static_cast<std::size_t>(k)] && slack(k) < -tol) violated.push_back(k);
    }
    if (violated.empty()) return sol;
    std::stable_sort(violated.begin(), violated.end(),
                     [&](Index a, Index b) { return slack(a) < slack(b); });
    if (static_cast<Index>(violated.size()) > batch) violated.resize(static_cast<std::size_t>(batch));
    for (Index k : violated) {
      in_set[static_cast<std::size_t>(k)] = true;
      active.push_back(k);
    }
  }
}

}  // namespace convaff

#endif  // CONVAFF_LP_HPP
