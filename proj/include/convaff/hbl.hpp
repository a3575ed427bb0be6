#ifndef CONVAFF_HBL_HPP
#define CONVAFF_HBL_HPP

#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "convaff/core.hpp"
#include "convaff/midpoint.hpp"
#include "convaff/mok.hpp"
#include "convaff/polytope.hpp"
#include "convaff/synth.hpp"
#include "convaff/tolerance.hpp"

namespace convaff {

/// n spaces E_m = R^{d_m} with sublinear S_m, a finite index set Z and maps
/// j_m given as tables: column z of tables[m] is j_m(z). Optional scalar
/// k(z) enters as an extra space R with the identity functional.
template <typename Scalar>
struct HblInstance {
  std::vector<PolyhedralSublinear<Scalar>> spaces;
  std::vector<Matrix<Scalar>> tables;
  std::optional<Vector<Scalar>> k;

  Index size() const { return tables.empty() ? 0 : tables.front().cols(); }
};

/// Index set Z = conv(vertices) with affine j_m and optional convex k.
template <typename Scalar>
struct PolytopeHblInstance {
  std::vector<PolyhedralSublinear<Scalar>> spaces;
  Polytope<Scalar> domain;
  std::vector<AffineTransform<Scalar>> maps;
  std::optional<std::variant<AffineMap<Scalar>, MaxAffineFn<Scalar>>> k;
};

template <typename Scalar>
struct HblCertificate {
  std::vector<LinearMap<Scalar>> linear;       // L_m
  std::vector<Vector<Scalar>> weights;         // theta^m over the pieces of S_m
  std::optional<Scalar> identity_weight;       // M on the k-space, exactly 1
  Scalar value{0};                             // inf_Z sum L_m o j_m (+ k)
  Scalar target{0};                            // inf_Z sum S_m o j_m (+ k)
  Scalar gap{0};
  Scalar lp_value{0};
  MidpointReport midpoint;
  CertificateKind kind = CertificateKind::Exact;
  long grid_resolution = 0;

  bool guarantee_holds(double tol_lp) const {
    return !midpoint.satisfied() || std::abs(double(gap)) <= tol_lp;
  }
};

namespace detail {

template <typename Scalar>
void validate_hbl(const HblInstance<Scalar>& inst) {
  require(!inst.spaces.empty(), ErrorKind::InvalidArgument, "HBL needs at least one space");
  require(inst.spaces.size() == inst.tables.size(), ErrorKind::DimensionMismatch,
          "one table per space");
  require(inst.size() >= 1, ErrorKind::EmptySet, "Z must be nonempty");
  for (std::size_t m = 0; m < inst.spaces.size(); ++m) {
    require_dim(inst.spaces[m].dim(), inst.tables[m].rows(), "j_m output");
    require_dim(inst.size(), inst.tables[m].cols(), "j_m table size");
  }
  if (inst.k) require_dim(inst.size(), inst.k->size(), "k table size");
}

template <typename Scalar>
MaxAffineFn<Scalar> as_max_affine(const PolyhedralSublinear<Scalar>& s) {
  return {s.pieces(), Vector<Scalar>::Zero(s.piece_count())};
}

}  // namespace detail

template <typename Scalar>
MidpointReport check_midpoint_hbl(const HblInstance<Scalar>& inst,
                                  double tol = ToleranceConfig{}.tol_mid) {
  detail::validate_hbl(inst);
  return scan_midpoint(
      inst.size(),
      [&](Index c, Index i, Index j) {
        Scalar total = 0;
        for (std::size_t m = 0; m < inst.spaces.size(); ++m) {
          const Matrix<Scalar>& t = inst.tables[m];
          total += evaluate(inst.spaces[m], Vector<Scalar>(t.col(c) - (t.col(i) + t.col(j)) / Scalar(2)));
        }
        if (inst.k) {
          const Vector<Scalar>& k = *inst.k;
          total += k(c) - (k(i) + k(j)) / Scalar(2);
        }
        return total;
      },
      tol);
}

namespace detail {

template <typename Scalar>
HblCertificate<Scalar> solve_tables(const std::vector<PolyhedralSublinear<Scalar>>& spaces,
                                    const std::vector<Matrix<Scalar>>& tables,
                                    const std::optional<Vector<Scalar>>& k) {
  std::vector<Matrix<Scalar>> coeffs;
  coeffs.reserve(spaces.size() + 1);
  for (std::size_t m = 0; m < spaces.size(); ++m) coeffs.push_back(spaces[m].pieces() * tables[m]);
  if (k) coeffs.push_back(k->transpose());  // identity functional, single piece {1}

  const Index n = tables.front().cols();
  const SimplexMaxMin<Scalar> mm = solve_simplex_max_min<Scalar>(coeffs, Vector<Scalar>::Zero(n));
  require(mm.status == LpStatus::Optimal, ErrorKind::LpFailure,
          std::string("HBL linear program: ") + to_string(mm.status));

  HblCertificate<Scalar> cert;
  RowVector<Scalar> target = RowVector<Scalar>::Zero(n);
  for (std::size_t m = 0; m < spaces.size(); ++m) {
    cert.weights.push_back(mm.weights[m]);
    cert.linear.push_back({spaces[m].pieces().transpose() * mm.weights[m]});
    target += coeffs[m].colwise().maxCoeff();
  }
  if (k) {
    cert.identity_weight = mm.weights.back()(0);
    target += k->transpose();
  }
  cert.value = mm.value;
  cert.lp_value = mm.lp_value;
  cert.target = target.minCoeff();
  cert.gap = cert.target - cert.value;
  return cert;
}

}  // namespace detail

/// Product-space reduction: one LP over a simplex per space.
template <typename Scalar>
HblCertificate<Scalar> solve_hbl_n(const HblInstance<Scalar>& inst, const ToleranceConfig& tol = {}) {
  detail::validate_hbl(inst);
  HblCertificate<Scalar> cert = detail::solve_tables(inst.spaces, inst.tables, inst.k);
  cert.midpoint = check_midpoint_hbl(inst, tol.tol_mid);
  return cert;
}

/// Polytope index set: vertex reduction when k is absent or affine, a
/// barycentric grid (Approximate) when k is max-affine with several pieces.
/// The target is always the exact LP minimum over the polytope.
template <typename Scalar>
HblCertificate<Scalar> solve_hbl_n(const PolytopeHblInstance<Scalar>& inst,
                                   const ToleranceConfig& tol = {}) {
  require(!inst.spaces.empty(), ErrorKind::InvalidArgument, "HBL needs at least one space");
  require(inst.spaces.size() == inst.maps.size(), ErrorKind::DimensionMismatch, "one map per space");
  require(inst.domain.vertex_count() >= 1, ErrorKind::EmptySet, "C must have a vertex");
  const Index q = inst.domain.dim();

  std::vector<MaxAffineFn<Scalar>> terms;
  for (std::size_t m = 0; m < inst.spaces.size(); ++m) {
    detail::require_dim(q, inst.maps[m].input_dim(), "j_m input");
    detail::require_dim(inst.spaces[m].dim(), inst.maps[m].output_dim(), "j_m output");
    terms.push_back(compose(detail::as_max_affine(inst.spaces[m]), inst.maps[m]));
  }

  const MaxAffineFn<Scalar>* convex_k = nullptr;
  std::optional<MaxAffineFn<Scalar>> k_fn;
  if (inst.k) {
    if (const auto* a = std::get_if<AffineMap<Scalar>>(&*inst.k)) {
      detail::require_dim(q, a->dim(), "k input");
      k_fn = MaxAffineFn<Scalar>(a->w.transpose(), Vector<Scalar>::Constant(1, a->c));
    } else {
      k_fn = std::get<MaxAffineFn<Scalar>>(*inst.k);
      detail::require_dim(q, k_fn->dim(), "k input");
      if (k_fn->pieces() > 1) convex_k = &*k_fn;
    }
    terms.push_back(*k_fn);
  }

  long resolution = 0;
  Matrix<Scalar> points = inst.domain.vertices;
  if (convex_k) {
    resolution = grid_resolution_for(tol.grid_resolution, inst.domain.vertex_count(), tol.grid_point_cap);
    points = barycentric_grid(inst.domain, resolution);
  }
  std::vector<Matrix<Scalar>> tables;
  for (const auto& map : inst.maps) {
    Matrix<Scalar> t = map.matrix * points;
    t.colwise() += map.offset;
    tables.push_back(std::move(t));
  }
  std::optional<Vector<Scalar>> k_values;
  if (k_fn) k_values = evaluate_columns(*k_fn, points).transpose();

  HblCertificate<Scalar> cert = detail::solve_tables(inst.spaces, tables, k_values);
  cert.target = minimize_over_hull(terms, inst.domain).value;
  cert.gap = cert.target - cert.value;
  cert.midpoint = MidpointReport::by_convexity("convex index set with affine maps");
  if (convex_k) {
    cert.kind = CertificateKind::Approximate;
    cert.grid_resolution = resolution;
  }
  return cert;
}

/// One sublinear S with j and scalar k; the k-space carries the identity.
template <typename Scalar>
HblCertificate<Scalar> solve_hbl_jk(const PolyhedralSublinear<Scalar>& s, const Matrix<Scalar>& j,
                                    const Vector<Scalar>& k, const ToleranceConfig& tol = {}) {
  return solve_hbl_n(HblInstance<Scalar>{{s}, {j}, k}, tol);
}

template <typename Scalar>
HblCertificate<Scalar> solve_hbl_jk(const PolyhedralSublinear<Scalar>& s, const Polytope<Scalar>& c,
                                    const AffineTransform<Scalar>& j,
                                    const std::variant<AffineMap<Scalar>, MaxAffineFn<Scalar>>& k,
                                    const ToleranceConfig& tol = {}) {
  return solve_hbl_n(PolytopeHblInstance<Scalar>{{s}, c, {j}, k}, tol);
}

/// S(x_1, ..., x_n) = sum_m S_m(x_m) written out as one polyhedral
/// sublinear functional on the product space (prod_m p_m pieces).
template <typename Scalar>
PolyhedralSublinear<Scalar> expand_product(const std::vector<PolyhedralSublinear<Scalar>>& spaces) {
  Index total_dim = 0, count = 1;
  for (const auto& s : spaces) {
    total_dim += s.dim();
    count *= s.piece_count();
  }
  Matrix<Scalar> pieces(count, total_dim);
  for (Index r = 0; r < count; ++r) {
    Index rest = r, col = 0;
    for (const auto& s : spaces) {
      const Index i = rest % s.piece_count();
      rest /= s.piece_count();
      pieces.row(r).segment(col, s.dim()) = s.pieces().row(i);
      col += s.dim();
    }
  }
  return PolyhedralSublinear<Scalar>(std::move(pieces));
}

/// Stacks j_1(z), ..., j_n(z) into points of the product space.
template <typename Scalar>
Matrix<Scalar> stack_tables(const std::vector<Matrix<Scalar>>& tables) {
  Index rows = 0;
  for (const auto& t : tables) rows += t.rows();
  Matrix<Scalar> out(rows, tables.front().cols());
  Index r = 0;
  for (const auto& t : tables) {
    out.middleRows(r, t.rows()) = t;
    r += t.rows();
  }
  return out;
}

}  // namespace convaff

#endif  // CONVAFF_HBL_HPP
