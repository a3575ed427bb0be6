#ifndef CONVAFF_POLYTOPE_HPP
#define CONVAFF_POLYTOPE_HPP

#include <cmath>
#include <string>
#include <vector>

#include "convaff/core.hpp"
#include "convaff/lp.hpp"

namespace convaff {

template <typename Scalar>
struct HullMinimum {
  Vector<Scalar> point;     // minimizer in conv(vertices)
  Vector<Scalar> weights;   // barycentric weights of `point`
  Scalar value{0};          // objective evaluated at `point`
  Scalar lp_value{0};
};

/// Minimizes sum_t terms[t](z) over z in conv(vertices) by one LP with an
/// epigraph variable per term. Exact for max-affine terms.
template <typename Scalar>
HullMinimum<Scalar> minimize_over_hull(const std::vector<MaxAffineFn<Scalar>>& terms,
                                       const Polytope<Scalar>& c) {
  require(c.vertex_count() >= 1, ErrorKind::EmptySet, "polytope needs a vertex");
  require(!terms.empty(), ErrorKind::InvalidArgument, "nothing to minimize");
  const Index m = c.vertex_count();
  const Index nterms = static_cast<Index>(terms.size());
  Index rows = 1;
  for (const auto& term : terms) {
    detail::require_dim(c.dim(), term.dim(), "hull objective");
    rows += term.pieces();
  }

  // variables: nu (m), t (nterms, free)
  LinearProgram<Scalar> lp(m + nterms, rows);
  for (Index t = 0; t < nterms; ++t) {
    lp.objective(m + t) = -1;
    lp.free[static_cast<std::size_t>(m + t)] = true;
  }
  Index r = 0;
  for (Index t = 0; t < nterms; ++t) {
    const auto& term = terms[static_cast<std::size_t>(t)];
    const Matrix<Scalar> at_vertices = term.slopes() * c.vertices;
    for (Index i = 0; i < term.pieces(); ++i, ++r) {
      // t - sum_j nu_j <a_i, v_j> >= b_i
      lp.rows.row(r).head(m) = -at_vertices.row(i);
      lp.rows(r, m + t) = 1;
      lp.rhs(r) = term.offsets()(i);
      lp.senses[static_cast<std::size_t>(r)] = RowSense::GreaterEqual;
    }
  }
  lp.rows.row(r).head(m).setOnes();
  lp.rhs(r) = 1;
  lp.senses[static_cast<std::size_t>(r)] = RowSense::Equal;

  const LpSolution<Scalar> sol = solve_lp(lp);
  require(sol.optimal(), ErrorKind::LpFailure,
          std::string("hull minimization: ") + to_string(sol.status));

  HullMinimum<Scalar> out;
  out.weights = sol.x.head(m).cwiseMax(Scalar(0));
  out.weights /= out.weights.sum();
  out.point = c.vertices * out.weights;
  out.lp_value = -sol.objective;
  out.value = 0;
  for (const auto& term : terms) out.value += evaluate(term, out.point);
  return out;
}

/// Number of points of the barycentric grid of resolution 1/n over m vertices,
/// C(n + m - 1, m - 1), computed in floating point.
inline double barycentric_grid_size(long n, long m) {
  double count = 1;
  for (long i = 1; i < m; ++i) count = count * double(n + i) / double(i);
  return std::round(count);
}

/// All points sum_j (c_j / n) v_j with nonnegative integers c summing to n,
/// as columns; vertices themselves come first.
template <typename Scalar>
Matrix<Scalar> barycentric_grid(const Polytope<Scalar>& c, long n) {
  const Index m = c.vertex_count();
  require(m >= 1 && n >= 1, ErrorKind::InvalidArgument, "grid needs vertices and resolution");
  const auto total = static_cast<Index>(barycentric_grid_size(n, m));
  Matrix<Scalar> points(c.dim(), total);
  for (Index j = 0; j < m; ++j) points.col(j) = c.vertices.col(j);
  Index col = m;

  std::vector<long> counts(static_cast<std::size_t>(m), 0);
  counts[0] = n;
  // Enumerate compositions in colexicographic order.
  while (true) {
    long at_max = 0;
    for (long v : counts) at_max += (v == n);
    if (at_max == 0) {
      Vector<Scalar> w(m);
      for (Index j = 0; j < m; ++j) w(j) = Scalar(counts[static_cast<std::size_t>(j)]) / Scalar(n);
      points.col(col++) = c.vertices * w;
    }
    // next composition
    Index k = 0;
    while (k < m - 1 && counts[static_cast<std::size_t>(k)] == 0) ++k;
    if (k == m - 1) break;
    const long carry = counts[static_cast<std::size_t>(k)];
    counts[static_cast<std::size_t>(k)] = 0;
    counts[0] = carry - 1;
    ++counts[static_cast<std::size_t>(k + 1)];
  }
  require(col == total, ErrorKind::InvalidArgument, "grid enumeration count mismatch");
  return points;
}

/// Largest resolution n <= preferred whose grid has at most `cap` points.
inline long grid_resolution_for(long preferred, long vertices, long cap) {
  long n = preferred;
  while (n > 1 && barycentric_grid_size(n, vertices) > double(cap)) n /= 2;
  return n;
}

}  // namespace convaff

#endif  // CONVAFF_POLYTOPE_HPP
