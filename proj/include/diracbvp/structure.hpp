#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "diracbvp/types.hpp"

namespace diracbvp {

// Hermitian coefficient operator with the tolerance it was validated against.
struct HermitianOperator {
  Matrix m;
  double tol = 0.0;
};

HermitianOperator make_hermitian(const Matrix& m, double tol);

// Full eigendecomposition with deterministic ordering: eigenvalues ascending,
// ties broken lexicographically after phase normalization (first significant
// component of each eigenvector made real positive).
struct SpectralData {
  RealVector eigenvalues;
  Matrix eigenvectors;  // orthonormal columns
  double rank_tol = kDefaultRankTol;

  double zero_threshold() const {
    const double scale = eigenvalues.size() ? eigenvalues.cwiseAbs().maxCoeff() : 0.0;
    return rank_threshold(rank_tol, scale);
  }
};

SpectralData spectral_factorize(const HermitianOperator& h,
                                double rank_tol = kDefaultRankTol);

struct OrthoProjection {
  Matrix p;
  int rank = 0;
  double tol = 0.0;
};

OrthoProjection make_projection(const Matrix& p, double tol,
                                double rank_tol = kDefaultRankTol);

// Closed/open interval over the classified eigenvalue axis. Eigenvalues inside
// the kernel band are treated as exactly zero before membership is tested.
struct IntervalSelector {
  double lo;
  double hi;
  bool lo_closed;
  bool hi_closed;

  static IntervalSelector open_positive();
  static IntervalSelector closed_nonnegative();
  static IntervalSelector open_negative();
  static IntervalSelector closed_nonpositive();
  bool contains(double x) const;
};

OrthoProjection spectral_projection(const SpectralData& spec,
                                    const std::vector<IntervalSelector>& predicate);

struct DiracStructure {
  int dim = 0;
  Matrix gamma;
  HermitianOperator a_op;
  std::optional<Matrix> omega;
  double tol = 0.0;
  std::map<std::string, double> residuals;  // identity name -> max-norm residual
};

// Checks gamma^* = -gamma, gamma^2 = -I, gamma A + A gamma = 0, and for omega:
// omega = omega^*, omega^2 = I, [omega, A] = 0, omega gamma = -gamma omega.
DiracStructure validate_structure(const Matrix& gamma, const Matrix& a,
                                  const std::optional<Matrix>& omega, double tol);

struct GammaSplit {
  Matrix basis_plus;   // orthonormal basis of ker(gamma - i)
  Matrix basis_minus;  // orthonormal basis of ker(gamma + i)
  Matrix a_plus;       // block of A mapping H+ -> H-
  Matrix a_minus;      // block of A mapping H- -> H+
};

GammaSplit gamma_split(const DiracStructure& s);

// dim(ker A  ∩ ker(gamma-i)) - dim(ker A ∩ ker(gamma+i)), via stacked-basis ranks.
int ind_a_plus(const DiracStructure& s);

// Signature of the boundary pairing restricted to ker A, oriented so that it
// coincides with ind_a_plus (cross-checked internally).
int kernel_signature(const DiracStructure& s);

struct SymmetryCheck {
  bool holds = false;
  double residual = 0.0;
};

// Eq-check of gamma^* P gamma = I - P.
SymmetryCheck is_gamma_symmetric(const OrthoProjection& p, const DiracStructure& s);

// True iff gamma^* P gamma - (I - P) is positive semidefinite.
bool symmetric_extension_check(const OrthoProjection& p, const DiracStructure& s);

// dim(ker P2 ∩ im P1) - dim(ker P1 ∩ im P2).
int fredholm_pair_index(const OrthoProjection& p1, const OrthoProjection& p2);

// Spectral projection onto the positive part of A plus a deterministic
// Lagrangian half of ker A. Throws NoGammaSymmetricProjection when the kernel
// signature is nonzero.
OrthoProjection aps_projection(const DiracStructure& s);

struct WellPosedReport {
  bool gamma_symmetric = false;
  double gamma_residual = 0.0;
  int pair_index = 0;
  bool wellposed = false;
  // Set when P equals the complement of the reference boundary projection;
  // the self-adjoint domain of that condition is strictly larger than the
  // graph-norm domain.
  bool domain_caveat = false;
};

WellPosedReport is_wellposed(const OrthoProjection& p, const DiracStructure& s);

enum class ReduceChecks { OmegaOnly, OmegaAndA };

struct OmegaReduction {
  HermitianOperator a_plus;
  std::optional<OrthoProjection> p_plus;
  Matrix basis;  // orthonormal basis of ker(omega - I)
};

// Restricts A (and optionally P) to the +1 eigenspace of omega.
OmegaReduction omega_reduce(const DiracStructure& s,
                            const OrthoProjection* p = nullptr,
                            ReduceChecks checks = ReduceChecks::OmegaAndA);

// ---- subspace utilities (shared by the index machinery) -------------------

int rank_of(const Matrix& m, double rank_tol = kDefaultRankTol);
Matrix range_basis(const OrthoProjection& p);
Matrix kernel_basis(const OrthoProjection& p);
int nullity_of(const Matrix& m, int ambient_cols, double rank_tol = kDefaultRankTol);

}  // namespace diracbvp
