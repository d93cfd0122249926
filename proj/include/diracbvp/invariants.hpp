#pragma once

#include <vector>

#include "diracbvp/path.hpp"
#include "diracbvp/structure.hpp"
#include "diracbvp/types.hpp"

namespace diracbvp {

// Spectral asymmetry sum over nonzero eigenvalues: sum sign(l) |l|^(-s).
double eta_function(const HermitianOperator& a, double s,
                    double rank_tol = kDefaultRankTol);

// eta(A; 0): number of positive minus number of negative eigenvalues.
int eta_invariant(const HermitianOperator& a, double rank_tol = kDefaultRankTol);

// xi(A) = (eta(A) + dim ker A) / 2, with the sign that satisfies
// sf = xi(A(b)) - xi(A(a)) for matrix families.
HalfInt xi_invariant(const HermitianOperator& a, double rank_tol = kDefaultRankTol);

struct Crossing {
  double x;
  int branch;  // index into the ascending eigenvalue ordering
  int dir;     // +1 upward through zero, -1 downward
};

struct FlowReport {
  HalfInt sf;            // endpoint formula, authoritative
  HalfInt sf_crossings;  // signed crossing count (valid when !partial)
  std::vector<Crossing> crossings;
  HalfInt xi_start;
  HalfInt xi_end;
  bool method_agreement = false;
  bool partial = false;  // crossing tracker gave up; only the endpoint value stands
};

// Computes the spectral flow twice: (i) xi(A(b)) - xi(A(a)); (ii) adaptive
// crossing tracking refined until each step is smaller than half the spectral
// gap around zero. Throws nothing on refinement failure; the report is marked
// partial instead.
FlowReport spectral_flow(const MatrixPath& path, int initial_grid = 32,
                         double rank_tol = kDefaultRankTol,
                         int max_nodes = 20000);

}  // namespace diracbvp
