#ifndef CONVAFF_TESTS_HELPERS_HPP
#define CONVAFF_TESTS_HELPERS_HPP

#include <initializer_list>
#include <vector>

#include "convaff/convaff.hpp"

namespace testing {

using convaff::Index;
using Vec = convaff::Vector<double>;
using Mat = convaff::Matrix<double>;

inline Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

inline Mat mat(std::initializer_list<std::initializer_list<double>> rows) {
  const Index r = static_cast<Index>(rows.size());
  const Index c = static_cast<Index>(rows.begin()->size());
  Mat out(r, c);
  Index i = 0;
  for (const auto& row : rows) {
    Index j = 0;
    for (double x : row) out(i, j++) = x;
    ++i;
  }
  return out;
}

// one row per point in the input, returned as columns
inline Mat columns(std::initializer_list<double> scalars) {
  Mat out(1, static_cast<Index>(scalars.size()));
  Index j = 0;
  for (double x : scalars) out(0, j++) = x;
  return out;
}

// max(a_i x + b_i) on R
inline convaff::MaxAffineFn<double> max_affine_1d(std::initializer_list<std::pair<double, double>> pieces) {
  Mat a(static_cast<Index>(pieces.size()), 1);
  Vec b(static_cast<Index>(pieces.size()));
  Index i = 0;
  for (const auto& [slope, offset] : pieces) {
    a(i, 0) = slope;
    b(i) = offset;
    ++i;
  }
  return {a, b};
}

inline convaff::MaxAffineFn<double> abs_fn() { return max_affine_1d({{1, 0}, {-1, 0}}); }

inline convaff::PolyhedralSublinear<double> abs_sublinear() {
  return convaff::PolyhedralSublinear<double>(mat({{1}, {-1}}));
}

inline convaff::MaxAffineFn<double> random_max_affine(convaff::SplitMix64& rng, Index d, Index p) {
  Mat a(p, d);
  Vec b(p);
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < d; ++j) a(i, j) = rng.uniform(-2, 2);
    b(i) = rng.uniform(-2, 2);
  }
  return {a, b};
}

inline Vec random_vec(convaff::SplitMix64& rng, Index d, double box) {
  Vec x(d);
  for (Index j = 0; j < d; ++j) x(j) = rng.uniform(-box, box);
  return x;
}

// brute force max_i of the pieces written out one by one
inline double brute_eval(const convaff::MaxAffineFn<double>& f, const Vec& x) {
  double best = -1e300;
  for (Index i = 0; i < f.pieces(); ++i) {
    double v = f.offsets()(i);
    for (Index j = 0; j < f.dim(); ++j) v += f.slopes()(i, j) * x(j);
    if (v > best) best = v;
  }
  return best;
}

}  // namespace testing

#endif  // CONVAFF_TESTS_HELPERS_HPP
