#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "diracbvp/path.hpp"
#include "diracbvp/structure.hpp"
#include "diracbvp/types.hpp"

namespace diracbvp {

// Compactly supported cutoff with value 1 on [0, plateau_end] and 0 past
// support_end. The smooth kind uses the standard exponential bridge, the
// smoothed-indicator kind a quintic polynomial step.
struct CutoffFunction {
  enum class Kind { SmoothBump, SmoothedIndicator };
  Kind kind = Kind::SmoothBump;
  double plateau_end = 1.0;
  double support_end = 3.0;

  double operator()(double x) const;
  double value_at_zero() const { return 1.0; }
  double integral() const;  // quadrature, cached per call site
};

// One scalar channel of the boundary value problem in a basis adapted to A, P
// (and omega when present): -d^2/dx^2 + a^2 on the half line with either a
// Dirichlet condition or the complementary Robin condition f'(0) + a f(0) = 0.
struct ScalarBlock {
  double a = 0.0;
  bool dirichlet = false;
  double omega_weight = 1.0;  // <v, omega v> for the adapted basis vector
  CVector vec;
};

struct BlockDecomposition {
  std::vector<ScalarBlock> blocks;
};

// Requires [P, A] = 0, P gamma-symmetric, and P acting as 0/1 on each adapted
// basis vector. Throws CommutationViolation / NormalFormError.
BlockDecomposition commuting_normal_form(const DiracStructure& s,
                                         const OrthoProjection& p,
                                         bool need_omega);

// Closed-form heat kernel of one scalar block at (x, y, t).
double scalar_block_kernel(double a, bool dirichlet, double x, double y, double t,
                           bool use_quadrature = false);

// Matrix heat kernel of the half-line problem with boundary projection p_plus.
Matrix sommerfeld_kernel(const DiracStructure& s, const OrthoProjection& p_plus,
                         double x, double y, double t, bool use_quadrature = false);

// integral_0^inf phi(x) tr[(omega) k(x,x,t)] dx via per-block quadrature.
double halfline_heat_trace(const DiracStructure& s, const OrthoProjection& p,
                           const CutoffFunction& phi, bool insert_omega, double t);

double scalar_block_trace(double a, bool dirichlet, const CutoffFunction& phi,
                          double t);

struct HeatGrid {
  double X = 12.0;
  int n_points = 600;
};

struct NumericTrace {
  double value = 0.0;
  double richardson_error = 0.0;
};

// Finite-difference oracle: symmetric second-order discretization of D^2_P on
// [0, X] with boundary rows P f(0) = 0 and (I-P)(f' + A f)(0) = 0, far-end
// Dirichlet; weighted trace via eigendecomposition; error estimated from
// grids n and 2n. Throws GridTooCoarse if the estimate exceeds `tolerance`.
NumericTrace heat_trace_numeric(const DiracStructure& s, const OrthoProjection& p,
                                const CutoffFunction& phi, bool insert_omega,
                                double t, const HeatGrid& grid,
                                double tolerance = -1.0);

NumericTrace heat_trace_numeric_path(const MatrixPath& a_of_x,
                                     const OrthoProjection& p,
                                     const CutoffFunction& phi, bool insert_omega,
                                     double t, const HeatGrid& grid,
                                     double tolerance = -1.0);

struct TGrid {
  double t0 = 0.5;
  double ratio = 0.65;
  int count = 14;

  std::vector<double> values() const;
};

struct HeatTraceSamples {
  std::vector<double> t_values;  // strictly decreasing
  std::vector<double> values;
  std::vector<double> est_error;
  std::string provenance;  // "exact-block" or "discretized"
};

HeatTraceSamples sample_halfline_trace(const DiracStructure& s,
                                       const OrthoProjection& p,
                                       const CutoffFunction& phi, bool insert_omega,
                                       const TGrid& grid);

std::string heat_samples_to_csv(const HeatTraceSamples& samples);

struct ExpansionFit {
  double p = 0.5;
  int max_j = 6;
  bool with_logs = false;
  std::map<std::pair<int, int>, double> coeffs;  // (j, k) -> a_jk
  double lim = 0.0;       // coefficient of t^0 log^0 t, 0 if absent from the model
  double residual = 0.0;  // max absolute misfit over the samples
  double conditioning = 0.0;
};

// Least squares fit of sum_j a_j0 t^(j/2-p) (+ a_j1 t^(j/2-p) log t) over the
// sample set, solved in s = sqrt(t) with column equilibration.
ExpansionFit lim_extract(const std::vector<double>& t_values,
                         const std::vector<double>& values, double p, int max_j,
                         bool include_logs);

struct SupertraceIdentityReport {
  double lim = 0.0;
  HalfInt xi_plus;
  int kernel_dim_plus = 0;
  int pair_index = 0;
  double residual_minus = 0.0;  // |lim - (-xi + pair)|
  double residual_plus = 0.0;   // |lim - (+xi + pair)|
  std::string matching_sign;    // "minus", "plus", or "none"
  double fit_residual = 0.0;
};

// Extracts the constant term of the graded half-line heat trace and compares
// it against both sign readings of the reduced spectral-asymmetry identity.
SupertraceIdentityReport verify_supertrace_identity(const DiracStructure& s,
                                                    const OrthoProjection& p,
                                                    const CutoffFunction& phi,
                                                    const TGrid& grid,
                                                    double match_tol = 1e-3);

// Full expansion fit of tr[phi e^{-t D^2_P}] with p = 1/2; reports whether the
// fitted log coefficients with j/2 - p <= 0 sit below the noise floor.
struct ExpansionFitReport {
  ExpansionFit fit;
  double max_low_order_log = 0.0;
  double max_any_log = 0.0;
  bool low_order_logs_vanish = false;
};

ExpansionFitReport heat_expansion_fit(const DiracStructure& s,
                                      const OrthoProjection& p,
                                      const CutoffFunction& phi, const TGrid& grid,
                                      int max_j, double log_noise = 1e-6);

// Mode sum of the graded trace on a circle of circumference L with constant
// coefficients; K chosen from the requested tail bound.
double circle_supertrace(const DiracStructure& s, double L, double t,
                         int mode_cutoff, double tail_tol = 1e-12);

// (n+, n-) = dimensions of the decaying solution spaces at the two complex
// frequencies; equal iff a compatible boundary projection exists.
std::pair<int, int> deficiency_indices(const DiracStructure& s);

}  // namespace diracbvp
