#include "diracbvp/structure.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace diracbvp {

namespace {

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << what << " must be square, got " << m.rows() << "x" << m.cols();
    throw DimensionMismatch(os.str());
  }
}

void require_same_dim(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream os;
    os << what << ": dimension mismatch " << a.rows() << "x" << a.cols()
       << " vs " << b.rows() << "x" << b.cols();
    throw DimensionMismatch(os.str());
  }
}

// Columns sorted by eigenvalue; within numerically tied eigenvalues the order
// is fixed by lexicographic comparison of the phase-normalized entries.
void normalize_phases(Matrix& vecs) {
  for (Eigen::Index c = 0; c < vecs.cols(); ++c) {
    const double colmax = vecs.col(c).cwiseAbs().maxCoeff();
    if (colmax == 0.0) continue;
    for (Eigen::Index r = 0; r < vecs.rows(); ++r) {
      const Complex v = vecs(r, c);
      if (std::abs(v) > 1e-8 * colmax) {
        vecs.col(c) *= std::conj(v) / std::abs(v);
        break;
      }
    }
  }
}

bool lex_less(const Matrix& vecs, Eigen::Index a, Eigen::Index b) {
  for (Eigen::Index r = 0; r < vecs.rows(); ++r) {
    const Complex va = vecs(r, a), vb = vecs(r, b);
    if (va.real() != vb.real()) return va.real() < vb.real();
    if (va.imag() != vb.imag()) return va.imag() < vb.imag();
  }
  return false;
}

}  // namespace

HermitianOperator make_hermitian(const Matrix& m, double tol) {
  require_square(m, "hermitian operator");
  if (!all_finite(m)) throw StructureViolation("matrix entries must be finite");
  const double res = max_abs(m - m.adjoint());
  if (res > tol) {
    std::ostringstream os;
    os << "matrix is not hermitian: residual " << res << " > tol " << tol;
    throw StructureViolation(os.str());
  }
  return HermitianOperator{(m + Matrix(m.adjoint())) / 2.0, tol};
}

SpectralData spectral_factorize(const HermitianOperator& h, double rank_tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h.m);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceFailure("eigendecomposition did not converge");
  }
  RealVector vals = solver.eigenvalues();
  Matrix vecs = solver.eigenvectors();
  normalize_phases(vecs);

  const Eigen::Index n = vals.size();
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  const double tie_tol = 1e-12 * std::max(1.0, vals.cwiseAbs().maxCoeff());
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return vals(a) < vals(b); });
  // resolve ties within near-degenerate runs
  Eigen::Index run_start = 0;
  for (Eigen::Index i = 1; i <= n; ++i) {
    if (i == n || vals(order[i]) - vals(order[i - 1]) > tie_tol) {
      if (i - run_start > 1) {
        std::stable_sort(order.begin() + run_start, order.begin() + i,
                         [&](Eigen::Index a, Eigen::Index b) { return lex_less(vecs, a, b); });
      }
      run_start = i;
    }
  }

  SpectralData out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(vecs.rows(), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.eigenvalues(i) = vals(order[i]);
    out.eigenvectors.col(i) = vecs.col(order[i]);
  }
  out.rank_tol = rank_tol;

  const double scale = std::max(1.0, max_abs(h.m));
  const double res = max_abs(h.m * out.eigenvectors -
                             out.eigenvectors * out.eigenvalues.asDiagonal().toDenseMatrix().cast<Complex>());
  if (res > 1e-10 * scale) {
    std::ostringstream os;
    os << "eigendecomposition residual " << res << " exceeds 1e-10 * " << scale;
    throw ConvergenceFailure(os.str());
  }
  return out;
}

OrthoProjection make_projection(const Matrix& p, double tol, double rank_tol) {
  require_square(p, "projection");
  if (!all_finite(p)) throw StructureViolation("projection entries must be finite");
  const double herm = max_abs(p - p.adjoint());
  if (herm > tol) {
    std::ostringstream os;
    os << "projection is not self-adjoint: residual " << herm << " > " << tol;
    throw StructureViolation(os.str());
  }
  const double idem = max_abs(p * p - p);
  if (idem > tol) {
    std::ostringstream os;
    os << "projection is not idempotent: residual " << idem << " > " << tol;
    throw StructureViolation(os.str());
  }
  Eigen::JacobiSVD<Matrix> svd(p);
  int rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()(i) > 0.5) ++rank;
  }
  (void)rank_tol;
  const double tr = p.trace().real();
  if (std::abs(tr - rank) > tol * p.rows() + 1e-12) {
    std::ostringstream os;
    os << "projection trace " << tr << " does not match rank " << rank;
    throw StructureViolation(os.str());
  }
  return OrthoProjection{p, rank, tol};
}

IntervalSelector IntervalSelector::open_positive() {
  return {0.0, std::numeric_limits<double>::infinity(), false, false};
}
IntervalSelector IntervalSelector::closed_nonnegative() {
  return {0.0, std::numeric_limits<double>::infinity(), true, false};
}
IntervalSelector IntervalSelector::open_negative() {
  return {-std::numeric_limits<double>::infinity(), 0.0, false, false};
}
IntervalSelector IntervalSelector::closed_nonpositive() {
  return {-std::numeric_limits<double>::infinity(), 0.0, false, true};
}

bool IntervalSelector::contains(double x) const {
  const bool above = lo_closed ? x >= lo : x > lo;
  const bool below = hi_closed ? x <= hi : x < hi;
  return above && below;
}

OrthoProjection spectral_projection(const SpectralData& spec,
                                    const std::vector<IntervalSelector>& predicate) {
  const double thresh = spec.zero_threshold();
  const Eigen::Index n = spec.eigenvalues.size();
  Matrix p = Matrix::Zero(spec.eigenvectors.rows(), spec.eigenvectors.rows());
  int rank = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lambda = spec.eigenvalues(i);
    const double classified = std::abs(lambda) <= thresh ? 0.0 : lambda;
    bool selected = false;
    for (const auto& iv : predicate) {
      if (iv.contains(classified)) {
        selected = true;
        break;
      }
    }
    if (selected) {
      p += spec.eigenvectors.col(i) * spec.eigenvectors.col(i).adjoint();
      ++rank;
    }
  }
  return OrthoProjection{p, rank, default_structure_tol(static_cast<int>(n))};
}

DiracStructure validate_structure(const Matrix& gamma, const Matrix& a,
                                  const std::optional<Matrix>& omega, double tol) {
  require_square(gamma, "gamma");
  require_same_dim(gamma, a, "gamma vs A");
  if (omega) require_same_dim(gamma, *omega, "gamma vs omega");
  if (tol <= 0.0) throw Error("tol must be positive");
  if (!all_finite(gamma) || !all_finite(a) || (omega && !all_finite(*omega))) {
    throw StructureViolation("matrix entries must be finite");
  }

  const int dim = static_cast<int>(gamma.rows());
  const Matrix id = Matrix::Identity(dim, dim);

  DiracStructure s;
  s.dim = dim;
  s.gamma = gamma;
  s.tol = tol;

  auto check = [&](const std::string& name, double res) {
    s.residuals[name] = res;
    if (res > tol) {
      std::ostringstream os;
      os << "structure identity '" << name << "' violated: residual " << res
         << " > tol " << tol;
      throw StructureViolation(os.str());
    }
  };

  check("gamma_skew_adjoint", max_abs(gamma.adjoint() + gamma));
  check("gamma_square", max_abs(gamma * gamma + id));
  check("a_hermitian", max_abs(a - a.adjoint()));
  check("gamma_anticommutes_a", max_abs(gamma * a + a * gamma));
  if (omega) {
    const Matrix& w = *omega;
    check("omega_hermitian", max_abs(w - w.adjoint()));
    check("omega_square", max_abs(w * w - id));
    check("omega_commutes_a", max_abs(w * a - a * w));
    check("omega_anticommutes_gamma", max_abs(w * gamma + gamma * w));
    s.omega = w;
  }
  s.a_op = HermitianOperator{(a + Matrix(a.adjoint())) / 2.0, tol};
  return s;
}

GammaSplit gamma_split(const DiracStructure& s) {
  // i*gamma is hermitian with spectrum {-1, +1}; ker(gamma - i) is its -1 eigenspace.
  const Matrix igamma = Complex(0, 1) * s.gamma;
  SpectralData spec = spectral_factorize(make_hermitian(igamma, std::max(s.tol, 1e-12)));
  const Eigen::Index n = spec.eigenvalues.size();
  std::vector<Eigen::Index> plus, minus;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lambda = spec.eigenvalues(i);
    if (std::abs(lambda + 1.0) <= 1e-8) {
      plus.push_back(i);
    } else if (std::abs(lambda - 1.0) <= 1e-8) {
      minus.push_back(i);
    } else {
      std::ostringstream os;
      os << "gamma eigenvalue deviates from +-i: i*gamma gave " << lambda;
      throw StructureViolation(os.str());
    }
  }
  GammaSplit out;
  out.basis_plus.resize(n, plus.size());
  out.basis_minus.resize(n, minus.size());
  for (size_t k = 0; k < plus.size(); ++k) out.basis_plus.col(k) = spec.eigenvectors.col(plus[k]);
  for (size_t k = 0; k < minus.size(); ++k) out.basis_minus.col(k) = spec.eigenvectors.col(minus[k]);
  out.a_plus = out.basis_minus.adjoint() * s.a_op.m * out.basis_plus;
  out.a_minus = out.basis_plus.adjoint() * s.a_op.m * out.basis_minus;
  return out;
}

namespace {

Matrix kernel_basis_of(const DiracStructure& s) {
  SpectralData spec = spectral_factorize(s.a_op);
  const double thresh = spec.zero_threshold();
  std::vector<Eigen::Index> zero;
  for (Eigen::Index i = 0; i < spec.eigenvalues.size(); ++i) {
    if (std::abs(spec.eigenvalues(i)) <= thresh) zero.push_back(i);
  }
  Matrix k(s.dim, zero.size());
  for (size_t j = 0; j < zero.size(); ++j) k.col(j) = spec.eigenvectors.col(zero[j]);
  return k;
}

int stacked_intersection_dim(const Matrix& basis_a, const Matrix& basis_b) {
  // dim(span A ∩ span B) = dim A + dim B - rank([A B])
  if (basis_a.cols() == 0 || basis_b.cols() == 0) return 0;
  Matrix stacked(basis_a.rows(), basis_a.cols() + basis_b.cols());
  stacked << basis_a, basis_b;
  return static_cast<int>(basis_a.cols() + basis_b.cols()) - rank_of(stacked);
}

}  // namespace

int ind_a_plus(const DiracStructure& s) {
  const GammaSplit split = gamma_split(s);
  const Matrix k = kernel_basis_of(s);
  const int plus = stacked_intersection_dim(k, split.basis_plus);
  const int minus = stacked_intersection_dim(k, split.basis_minus);
  return plus - minus;
}

int kernel_signature(const DiracStructure& s) {
  const Matrix k = kernel_basis_of(s);
  if (k.cols() == 0) return 0;
  const Matrix form = k.adjoint() * (Complex(0, 1) * s.gamma) * k;
  SpectralData spec = spectral_factorize(make_hermitian(form, 1e-8));
  int sig = 0;
  for (Eigen::Index i = 0; i < spec.eigenvalues.size(); ++i) {
    const double mu = spec.eigenvalues(i);
    if (std::abs(mu + 1.0) <= 1e-6) {
      ++sig;  // ker(gamma - i) direction
    } else if (std::abs(mu - 1.0) <= 1e-6) {
      --sig;
    } else {
      std::ostringstream os;
      os << "boundary pairing on ker A is not unitary-involutive: eigenvalue " << mu;
      throw StructureViolation(os.str());
    }
  }
  return sig;
}

SymmetryCheck is_gamma_symmetric(const OrthoProjection& p, const DiracStructure& s) {
  require_same_dim(p.p, s.gamma, "projection vs structure");
  const Matrix id = Matrix::Identity(s.dim, s.dim);
  const double res = max_abs(s.gamma.adjoint() * p.p * s.gamma - (id - p.p));
  const double tol = std::max(s.tol, p.tol);
  return SymmetryCheck{res <= tol, res};
}

bool symmetric_extension_check(const OrthoProjection& p, const DiracStructure& s) {
  require_same_dim(p.p, s.gamma, "projection vs structure");
  const Matrix id = Matrix::Identity(s.dim, s.dim);
  const Matrix diff = s.gamma.adjoint() * p.p * s.gamma - (id - p.p);
  SpectralData spec = spectral_factorize(make_hermitian(diff, 1e-8));
  const double tol = std::max(s.tol, p.tol);
  return spec.eigenvalues.size() == 0 || spec.eigenvalues(0) >= -tol;
}

int fredholm_pair_index(const OrthoProjection& p1, const OrthoProjection& p2) {
  require_same_dim(p1.p, p2.p, "fredholm pair");
  const Matrix b1 = range_basis(p1);
  const Matrix b2 = range_basis(p2);
  const int ker2_im1 = p1.rank - rank_of(p2.p * b1);
  const int ker1_im2 = p2.rank - rank_of(p1.p * b2);
  return ker2_im1 - ker1_im2;
}

OrthoProjection aps_projection(const DiracStructure& s) {
  const int sig = kernel_signature(s);
  if (sig != 0) {
    std::ostringstream os;
    os << "kernel signature is " << sig
       << "; no boundary projection compatible with the pairing exists";
    throw NoGammaSymmetricProjection(os.str());
  }
  SpectralData spec = spectral_factorize(s.a_op);
  const double thresh = spec.zero_threshold();
  Matrix p = Matrix::Zero(s.dim, s.dim);
  int rank = 0;
  std::vector<Eigen::Index> zero;
  for (Eigen::Index i = 0; i < spec.eigenvalues.size(); ++i) {
    const double lambda = spec.eigenvalues(i);
    if (lambda > thresh) {
      p += spec.eigenvectors.col(i) * spec.eigenvectors.col(i).adjoint();
      ++rank;
    } else if (std::abs(lambda) <= thresh) {
      zero.push_back(i);
    }
  }
  if (!zero.empty()) {
    // Lagrangian half of ker A: pair the ker(gamma-i) and ker(gamma+i)
    // directions in deterministic order and keep (u_j + v_j)/sqrt(2).
    Matrix k(s.dim, zero.size());
    for (size_t j = 0; j < zero.size(); ++j) k.col(j) = spec.eigenvectors.col(zero[j]);
    const Matrix form = k.adjoint() * (Complex(0, 1) * s.gamma) * k;
    SpectralData fs = spectral_factorize(make_hermitian(form, 1e-8));
    std::vector<Eigen::Index> on_plus, on_minus;
    for (Eigen::Index i = 0; i < fs.eigenvalues.size(); ++i) {
      if (fs.eigenvalues(i) < 0.0) {
        on_plus.push_back(i);
      } else {
        on_minus.push_back(i);
      }
    }
    if (on_plus.size() != on_minus.size()) {
      throw NoGammaSymmetricProjection("kernel halves are unbalanced");
    }
    for (size_t j = 0; j < on_plus.size(); ++j) {
      const CVector u = k * fs.eigenvectors.col(on_plus[j]);
      const CVector v = k * fs.eigenvectors.col(on_minus[j]);
      const CVector w = (u + v) / std::sqrt(2.0);
      p += w * w.adjoint();
      ++rank;
    }
  }
  OrthoProjection out{p, rank, std::max(s.tol, default_structure_tol(s.dim))};
  const SymmetryCheck sym = is_gamma_symmetric(out, s);
  if (!sym.holds) {
    std::ostringstream os;
    os << "constructed boundary projection failed the symmetry relation, residual "
       << sym.residual;
    throw StructureViolation(os.str());
  }
  return out;
}

WellPosedReport is_wellposed(const OrthoProjection& p, const DiracStructure& s) {
  WellPosedReport report;
  const SymmetryCheck sym = is_gamma_symmetric(p, s);
  report.gamma_symmetric = sym.holds;
  report.gamma_residual = sym.residual;
  const OrthoProjection p_plus = aps_projection(s);
  report.pair_index = fredholm_pair_index(p, p_plus);
  report.wellposed = sym.holds;
  const Matrix anti = Matrix::Identity(s.dim, s.dim) - p_plus.p;
  report.domain_caveat = max_abs(p.p - anti) <= std::max(p.tol, s.tol) * 10.0;
  return report;
}

OmegaReduction omega_reduce(const DiracStructure& s, const OrthoProjection* p,
                            ReduceChecks checks) {
  if (!s.omega) throw MissingGrading("structure carries no grading involution");
  const Matrix& w = *s.omega;
  if (p) {
    const double res_w = max_abs(p->p * w - w * p->p);
    if (res_w > std::max(s.tol, p->tol)) {
      std::ostringstream os;
      os << "[P, omega] residual " << res_w;
      throw CommutationViolation(os.str());
    }
    if (checks == ReduceChecks::OmegaAndA) {
      const double res_a = max_abs(p->p * s.a_op.m - s.a_op.m * p->p);
      if (res_a > std::max(s.tol, p->tol)) {
        std::ostringstream os;
        os << "[P, A] residual " << res_a;
        throw CommutationViolation(os.str());
      }
    }
  }
  SpectralData spec = spectral_factorize(make_hermitian(w, std::max(s.tol, 1e-12)));
  std::vector<Eigen::Index> plus;
  for (Eigen::Index i = 0; i < spec.eigenvalues.size(); ++i) {
    if (spec.eigenvalues(i) > 0.0) plus.push_back(i);
  }
  Matrix basis(s.dim, plus.size());
  for (size_t j = 0; j < plus.size(); ++j) basis.col(j) = spec.eigenvectors.col(plus[j]);

  OmegaReduction out;
  out.basis = basis;
  Matrix a_red = basis.adjoint() * s.a_op.m * basis;
  a_red = (a_red + Matrix(a_red.adjoint())) / 2.0;
  out.a_plus = HermitianOperator{a_red, s.tol};
  if (p) {
    Matrix p_red = basis.adjoint() * p->p * basis;
    p_red = (p_red + Matrix(p_red.adjoint())) / 2.0;
    out.p_plus = make_projection(p_red, std::max({s.tol, p->tol, 1e-9}));
  }
  return out;
}

int rank_of(const Matrix& m, double rank_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  const double thresh = rank_threshold(rank_tol, sv(0));
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > thresh) ++r;
  }
  return r;
}

Matrix range_basis(const OrthoProjection& p) {
  SpectralData spec = spectral_factorize(make_hermitian(p.p, std::max(p.tol, 1e-9)));
  std::vector<Eigen::Index> sel;
  for (Eigen::Index i = 0; i < spec.eigenvalues.size(); ++i) {
    if (spec.eigenvalues(i) > 0.5) sel.push_back(i);
  }
  Matrix b(p.p.rows(), sel.size());
  for (size_t j = 0; j < sel.size(); ++j) b.col(j) = spec.eigenvectors.col(sel[j]);
  return b;
}

Matrix kernel_basis(const OrthoProjection& p) {
  SpectralData spec = spectral_factorize(make_hermitian(p.p, std::max(p.tol, 1e-9)));
  std::vector<Eigen::Index> sel;
  for (Eigen::Index i = 0; i < spec.eigenvalues.size(); ++i) {
    if (spec.eigenvalues(i) <= 0.5) sel.push_back(i);
  }
  Matrix b(p.p.rows(), sel.size());
  for (size_t j = 0; j < sel.size(); ++j) b.col(j) = spec.eigenvectors.col(sel[j]);
  return b;
}

int nullity_of(const Matrix& m, int ambient_cols, double rank_tol) {
  return ambient_cols - rank_of(m, rank_tol);
}

}  // namespace diracbvp
