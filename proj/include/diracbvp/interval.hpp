#pragma once

#include <utility>

#include "diracbvp/heat.hpp"
#include "diracbvp/invariants.hpp"
#include "diracbvp/path.hpp"
#include "diracbvp/structure.hpp"
#include "diracbvp/types.hpp"

namespace diracbvp {

// Solution map f(b) = T f(a) of f' = -A(x) f, fourth-order commutator-corrected
// exponential stepper with two Gauss nodes per step.
struct Propagator {
  Matrix t;
  int step_count = 0;
  double global_error_estimate = 0.0;
};

Propagator propagate(const MatrixPath& path, double a, double b, double tolerance);

struct IntervalIndexReport {
  int kernel_dim = 0;
  int cokernel_dim = 0;
  int index = 0;
  HalfInt sf;
  int pair_index_left = 0;   // ind(P_>=0(A(a)), P)
  int pair_index_right = 0;  // ind(P_>=0(A(b)), Q)
  HalfInt xi_left;
  HalfInt xi_right;
  double integral_term = 0.0;
  double integral_error = 0.0;
  double line1_residual = 0.0;
  long long line2_residual_twice = 0;  // exact, in half-units
  bool sf_methods_agree = false;
};

// Kernel and cokernel of d/dx + A(x) with P f(a) = 0, (I-Q) f(b) = 0, via the
// propagator and its adjoint.
IntervalIndexReport interval_index(const MatrixPath& path, const OrthoProjection& p,
                                   const OrthoProjection& q, double tolerance);

// The constant term of the rescaled derivative trace, integrated over the
// interval; expected to vanish for matrix families.
std::pair<double, double> integral_term(const MatrixPath& path, const TGrid& grid);

// Populates the full report and the residuals of both displayed index
// identities: the spectral-asymmetry line and the spectral-flow line.
IntervalIndexReport verify_interval_index_identity(const MatrixPath& path,
                                                   const OrthoProjection& p,
                                                   const OrthoProjection& q,
                                                   const TGrid& grid,
                                                   double tolerance = 1e-10);

}  // namespace diracbvp
