#pragma once

#include <optional>
#include <vector>

#include "diracbvp/heat.hpp"
#include "diracbvp/interval.hpp"
#include "diracbvp/path.hpp"
#include "diracbvp/structure.hpp"

namespace diracbvp {

// Doubled problem: block diagonal gamma/A with flipped signs plus the swap
// involution coupling the two copies.
struct DoubledStructure {
  DiracStructure structure;
  Matrix tau;
  int base_dim = 0;
};

DoubledStructure make_doubled(const DiracStructure& base);

// The decoupling boundary projection diag(P_+, I - P_+) of the doubled problem.
OrthoProjection doubled_aps_projection(const DoubledStructure& d);

struct DeformationFamily {
  OrthoProjection base;
  Matrix tau;
  Matrix alpha;  // P - (I - P)
  double tol = 0.0;
};

// Requires tau P = (I-P) tau; alpha tau = -tau alpha follows and is validated.
DeformationFamily make_deformation_family(const OrthoProjection& p, const Matrix& tau,
                                          double tol);

// P(theta) = cos^2 P + sin^2 (I-P) + sin cos tau for |theta| < pi/2.
OrthoProjection p_theta(const DeformationFamily& family, double theta);

struct DeformationReport {
  std::vector<double> thetas;
  std::vector<int> pair_indices;       // vs the nonnegative projection of the
                                       // reduced doubled coefficient, when graded
  std::vector<double> lowest_eigenvalues;
  std::vector<double> boundary_condition_numbers;
  std::vector<bool> degenerate;
  bool all_wellposed = false;
  bool pair_index_constant = true;
  double lipschitz_bound_check = 0.0;  // max ||P(t1)-P(t2)|| / |t1-t2|
  double eigenvalue_jump_rate = 0.0;   // estimated C with jumps <= C * dtheta
  double max_eigenvalue_jump = 0.0;
};

DeformationReport verify_deformation_family(const DoubledStructure& d,
                                            const OrthoProjection& p,
                                            const std::vector<double>& theta_grid,
                                            const HeatGrid& grid);

struct GlueingReport {
  int ind_total = 0;
  int ind_left = 0;
  int ind_right = 0;
  long long residual = 0;  // integer identity defect, required 0
};

// Periodic path split at `cut`; complementary conditions (P, I-P) at the cuts.
GlueingReport glueing_check_circle(const MatrixPath& periodic_path,
                                   const OrthoProjection& p, double cut,
                                   double tolerance = 1e-10);

// Index over [a,b] with (P0, Q0) against the sum over [a,c] and [c,b] with a
// transmission projection R at the cut.
GlueingReport glueing_check_interval(const MatrixPath& path, const OrthoProjection& p0,
                                     const OrthoProjection& q0, double cut,
                                     const OrthoProjection& r,
                                     double tolerance = 1e-10);

struct ProjectionIdentityReport {
  int ind_nonneg_flipped_complement = 0;  // ind(P_>=0(-A), I-P)
  int ind_complement_positive = 0;        // ind(I-P_>0(A), I-P)
  int ind_positive = 0;                   // ind(P_>0(A), P)
  int ind_nonneg = 0;                     // ind(P_>=0(A), P)
  int kernel_dim = 0;
  bool chain1_holds = false;  // first = second = -third
  bool chain2_holds = false;  // fourth = kernel + third
};

ProjectionIdentityReport projection_index_identities(const HermitianOperator& a_plus,
                                                     const OrthoProjection& p_plus);

}  // namespace diracbvp
