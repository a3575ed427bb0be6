#ifndef CONVAFF_TOLERANCE_HPP
#define CONVAFF_TOLERANCE_HPP

#include <cstdint>

namespace convaff {

// Every comparison threshold used by the solvers. One instance is threaded
// through all calls so a run can be audited (and mutated) from one place.
struct ToleranceConfig {
  // gauge
  double tol_zero = 1e-12;        // slack in the zero-branch test
  double tol_gauge = 1e-8;        // |f_x(value) - alpha| bound on root branch
  double gauge_width = 1e-12;     // bisection width, relative to max(1, hi)
  int gauge_iteration_cap = 200;  // per bracketing direction and for bisection
  int zero_test_log2_horizon = 40;

  // mok / hbl
  double tol_mid = 1e-9;
  double tol_lp = 1e-8;

  // synth
  double lambda_min = 1e-12;
  double tol_gap = 1e-6;
  double tol_dom = 1e-7;
  int domination_samples = 10000;
  double domination_box = 10.0;
  double unbounded_sentinel = -1e12;
  int grid_resolution = 256;
  long grid_point_cap = 200000;
};

}  // namespace convaff

#endif  // CONVAFF_TOLERANCE_HPP
