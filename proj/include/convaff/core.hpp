#ifndef CONVAFF_CORE_HPP
#define CONVAFF_CORE_HPP

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "convaff/error.hpp"

namespace convaff {

using Index = Eigen::Index;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

namespace detail {

inline void require_dim(Index expected, Index actual, const char* what) {
  if (expected != actual) {
    throw Error(ErrorKind::DimensionMismatch, std::string(what) + ": expected dimension " +
                                                  std::to_string(expected) + ", got " +
                                                  std::to_string(actual));
  }
}

}  // namespace detail

template <typename Derived>
void validate_vector(const Eigen::MatrixBase<Derived>& x, Index dim, const char* what = "vector") {
  require(x.cols() == 1, ErrorKind::DimensionMismatch, std::string(what) + " must be a column");
  detail::require_dim(dim, x.rows(), what);
  require(x.allFinite(), ErrorKind::InvalidArgument, std::string(what) + " has non-finite entries");
}

/// f(x) = max_i (<a_i, x> + b_i). Row i of `slopes` is a_i.
template <typename Scalar>
class MaxAffineFn {
 public:
  MaxAffineFn(Matrix<Scalar> slopes, Vector<Scalar> offsets)
      : slopes_(std::move(slopes)), offsets_(std::move(offsets)) {
    require(slopes_.rows() >= 1, ErrorKind::InvalidArgument, "max-affine function needs a piece");
    require(slopes_.cols() >= 1, ErrorKind::InvalidArgument, "max-affine function needs d >= 1");
    detail::require_dim(slopes_.rows(), offsets_.size(), "max-affine offsets");
    require(slopes_.allFinite() && offsets_.allFinite(), ErrorKind::InvalidArgument,
            "max-affine coefficients must be finite");
  }

  Index dim() const { return slopes_.cols(); }
  Index pieces() const { return slopes_.rows(); }
  const Matrix<Scalar>& slopes() const { return slopes_; }
  const Vector<Scalar>& offsets() const { return offsets_; }

  /// f(0) = max_i b_i.
  Scalar value_at_origin() const { return offsets_.maxCoeff(); }

 private:
  Matrix<Scalar> slopes_;
  Vector<Scalar> offsets_;
};

/// S(x) = max_i <l_i, x>. Row i of `pieces` is l_i; S(0) = 0 and positive
/// homogeneity hold by construction.
template <typename Scalar>
class PolyhedralSublinear {
 public:
  explicit PolyhedralSublinear(Matrix<Scalar> pieces) : pieces_(std::move(pieces)) {
    require(pieces_.rows() >= 1, ErrorKind::InvalidArgument, "sublinear functional needs a piece");
    require(pieces_.cols() >= 1, ErrorKind::InvalidArgument, "sublinear functional needs d >= 1");
    require(pieces_.allFinite(), ErrorKind::InvalidArgument,
            "sublinear coefficients must be finite");
  }

  Index dim() const { return pieces_.cols(); }
  Index piece_count() const { return pieces_.rows(); }
  const Matrix<Scalar>& pieces() const { return pieces_; }

 private:
  Matrix<Scalar> pieces_;
};

template <typename Scalar>
struct LinearMap {
  Vector<Scalar> w;

  Index dim() const { return w.size(); }
};

template <typename Scalar>
struct AffineMap {
  Vector<Scalar> w;
  Scalar c{0};

  Index dim() const { return w.size(); }
};

/// z -> matrix * z + offset, mapping R^q into R^d.
template <typename Scalar>
struct AffineTransform {
  Matrix<Scalar> matrix;
  Vector<Scalar> offset;

  Index input_dim() const { return matrix.cols(); }
  Index output_dim() const { return matrix.rows(); }

  static AffineTransform identity(Index d) {
    return {Matrix<Scalar>::Identity(d, d), Vector<Scalar>::Zero(d)};
  }
};

/// conv of the columns of `vertices`.
template <typename Scalar>
struct Polytope {
  Matrix<Scalar> vertices;

  Index dim() const { return vertices.rows(); }
  Index vertex_count() const { return vertices.cols(); }
};

/// A general convex function given by evaluation only. Used by the gauge
/// module's bisection path.
template <typename Scalar>
struct ConvexOracle {
  std::function<Scalar(const Vector<Scalar>&)> value;
  std::function<Vector<Scalar>(const Vector<Scalar>&)> subgradient;  // may be empty
  Index dim = 0;
};

// ---------------------------------------------------------------------------
// Evaluation

template <typename Scalar, typename Derived>
Scalar evaluate(const MaxAffineFn<Scalar>& f, const Eigen::MatrixBase<Derived>& x) {
  detail::require_dim(f.dim(), x.rows(), "max-affine argument");
  return (f.slopes() * x + f.offsets()).maxCoeff();
}

/// Values of f at every column of `points`.
template <typename Scalar, typename Derived>
RowVector<Scalar> evaluate_columns(const MaxAffineFn<Scalar>& f,
                                   const Eigen::MatrixBase<Derived>& points) {
  detail::require_dim(f.dim(), points.rows(), "max-affine argument");
  Matrix<Scalar> values = f.slopes() * points;
  values.colwise() += f.offsets();
  return values.colwise().maxCoeff();
}

/// a_i for the lowest index i attaining the maximum.
template <typename Scalar, typename Derived>
Vector<Scalar> subgradient(const MaxAffineFn<Scalar>& f, const Eigen::MatrixBase<Derived>& x) {
  detail::require_dim(f.dim(), x.rows(), "max-affine argument");
  const Vector<Scalar> values = f.slopes() * x + f.offsets();
  Index best = 0;
  for (Index i = 1; i < values.size(); ++i) {
    if (values(i) > values(best)) best = i;
  }
  return f.slopes().row(best).transpose();
}

template <typename Scalar, typename Derived>
Scalar evaluate(const PolyhedralSublinear<Scalar>& s, const Eigen::MatrixBase<Derived>& x) {
  detail::require_dim(s.dim(), x.rows(), "sublinear argument");
  return (s.pieces() * x).maxCoeff();
}

template <typename Scalar, typename Derived>
Scalar evaluate(const LinearMap<Scalar>& l, const Eigen::MatrixBase<Derived>& x) {
  detail::require_dim(l.dim(), x.rows(), "linear map argument");
  return l.w.dot(x);
}

template <typename Scalar, typename Derived>
Scalar evaluate(const AffineMap<Scalar>& a, const Eigen::MatrixBase<Derived>& x) {
  detail::require_dim(a.dim(), x.rows(), "affine map argument");
  return a.w.dot(x) + a.c;
}

template <typename Scalar, typename Derived>
Vector<Scalar> apply(const AffineTransform<Scalar>& t, const Eigen::MatrixBase<Derived>& z) {
  detail::require_dim(t.input_dim(), z.rows(), "affine transform argument");
  return t.matrix * z + t.offset;
}

// ---------------------------------------------------------------------------
// Algebra on max-affine functions; every result is again exact.

/// f o t, a max-affine function on the input space of t.
template <typename Scalar>
MaxAffineFn<Scalar> compose(const MaxAffineFn<Scalar>& f, const AffineTransform<Scalar>& t) {
  detail::require_dim(f.dim(), t.output_dim(), "compose");
  return {f.slopes() * t.matrix, f.offsets() + f.slopes() * t.offset};
}

/// f + a for affine a.
template <typename Scalar>
MaxAffineFn<Scalar> add(const MaxAffineFn<Scalar>& f, const AffineMap<Scalar>& a) {
  detail::require_dim(f.dim(), a.dim(), "add affine");
  Matrix<Scalar> slopes = f.slopes().rowwise() + a.w.transpose();
  return {std::move(slopes), f.offsets().array() + a.c};
}

/// Pointwise sum f + g; pieces are all pairs (i, j).
template <typename Scalar>
MaxAffineFn<Scalar> add(const MaxAffineFn<Scalar>& f, const MaxAffineFn<Scalar>& g) {
  detail::require_dim(f.dim(), g.dim(), "add max-affine");
  const Index p = f.pieces(), q = g.pieces();
  Matrix<Scalar> slopes(p * q, f.dim());
  Vector<Scalar> offsets(p * q);
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < q; ++j) {
      slopes.row(i * q + j) = f.slopes().row(i) + g.slopes().row(j);
      offsets(i * q + j) = f.offsets()(i) + g.offsets()(j);
    }
  }
  return {std::move(slopes), std::move(offsets)};
}

template <typename Scalar>
AffineMap<Scalar> as_affine(const LinearMap<Scalar>& l) {
  return {l.w, Scalar(0)};
}

/// Tangent affine map f(x) + <g, y - x>.
template <typename Scalar>
AffineMap<Scalar> tangent(const Vector<Scalar>& g, const Vector<Scalar>& x, Scalar fx) {
  return {g, fx - g.dot(x)};
}

template <typename Scalar>
ConvexOracle<Scalar> to_oracle(const MaxAffineFn<Scalar>& f) {
  return {[f](const Vector<Scalar>& x) { return evaluate(f, x); },
          [f](const Vector<Scalar>& x) { return subgradient(f, x); }, f.dim()};
}

}  // namespace convaff

#endif  // CONVAFF_CORE_HPP
