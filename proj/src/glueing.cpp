#include "diracbvp/glueing.hpp"

#include <cmath>
#include <sstream>

#include "diracbvp/discretization.hpp"

namespace diracbvp {

DoubledStructure make_doubled(const DiracStructure& base) {
  const int d = base.dim;
  Matrix gamma_tilde = Matrix::Zero(2 * d, 2 * d);
  gamma_tilde.topLeftCorner(d, d) = base.gamma;
  gamma_tilde.bottomRightCorner(d, d) = -base.gamma;
  Matrix a_tilde = Matrix::Zero(2 * d, 2 * d);
  a_tilde.topLeftCorner(d, d) = base.a_op.m;
  a_tilde.bottomRightCorner(d, d) = -base.a_op.m;
  std::optional<Matrix> omega_tilde;
  if (base.omega) {
    Matrix w = Matrix::Zero(2 * d, 2 * d);
    w.topLeftCorner(d, d) = *base.omega;
    w.bottomRightCorner(d, d) = *base.omega;
    omega_tilde = w;
  }
  DoubledStructure out;
  out.structure = validate_structure(gamma_tilde, a_tilde, omega_tilde, 2 * base.tol);
  out.base_dim = d;
  Matrix tau = Matrix::Zero(2 * d, 2 * d);
  tau.topRightCorner(d, d) = Matrix::Identity(d, d);
  tau.bottomLeftCorner(d, d) = Matrix::Identity(d, d);
  out.tau = tau;

  // inherited relations of the swap involution
  const double tol = out.structure.tol;
  const double res_sq = max_abs(tau * tau - Matrix::Identity(2 * d, 2 * d));
  const double res_anti_a = max_abs(tau * a_tilde + a_tilde * tau);
  const double res_anti_g = max_abs(tau * gamma_tilde + gamma_tilde * tau);
  if (res_sq > tol || res_anti_a > tol || res_anti_g > tol) {
    throw StructureViolation("swap involution relations failed on the doubled data");
  }
  return out;
}

OrthoProjection doubled_aps_projection(const DoubledStructure& d) {
  const DiracStructure base = validate_structure(
      d.structure.gamma.topLeftCorner(d.base_dim, d.base_dim),
      d.structure.a_op.m.topLeftCorner(d.base_dim, d.base_dim), std::nullopt,
      d.structure.tol);
  const OrthoProjection p_plus = aps_projection(base);
  Matrix p = Matrix::Zero(2 * d.base_dim, 2 * d.base_dim);
  p.topLeftCorner(d.base_dim, d.base_dim) = p_plus.p;
  p.bottomRightCorner(d.base_dim, d.base_dim) =
      Matrix::Identity(d.base_dim, d.base_dim) - p_plus.p;
  return make_projection(p, std::max(p_plus.tol, d.structure.tol));
}

DeformationFamily make_deformation_family(const OrthoProjection& p, const Matrix& tau,
                                          double tol) {
  if (p.p.rows() != tau.rows() || tau.rows() != tau.cols()) {
    throw DimensionMismatch("projection and involution dimensions differ");
  }
  const Matrix eye = Matrix::Identity(tau.rows(), tau.cols());
  const double res_tau = max_abs(tau * p.p - (eye - p.p) * tau);
  if (res_tau > tol) {
    std::ostringstream os;
    os << "tau P = (I-P) tau fails with residual " << res_tau;
    throw FamilyInvariantViolation(os.str());
  }
  DeformationFamily family;
  family.base = p;
  family.tau = tau;
  family.alpha = p.p - (eye - p.p);
  family.tol = tol;
  const double res_alpha = max_abs(family.alpha * tau + tau * family.alpha);
  if (res_alpha > tol) {
    throw FamilyInvariantViolation("alpha does not anticommute with tau");
  }
  return family;
}

OrthoProjection p_theta(const DeformationFamily& family, double theta) {
  if (!(std::abs(theta) < M_PI / 2.0)) {
    throw DomainError("deformation parameter must satisfy |theta| < pi/2");
  }
  const double c = std::cos(theta), s = std::sin(theta);
  const Matrix eye = Matrix::Identity(family.tau.rows(), family.tau.cols());
  const Matrix p =
      c * c * family.base.p + s * s * (eye - family.base.p) + s * c * family.tau;
  return make_projection(p, std::max(family.tol, 1e-9));
}

DeformationReport verify_deformation_family(const DoubledStructure& d,
                                            const OrthoProjection& p,
                                            const std::vector<double>& theta_grid,
                                            const HeatGrid& grid) {
  if (theta_grid.empty()) throw ConfigError("theta grid must be nonempty");
  const DeformationFamily family =
      make_deformation_family(p, d.tau, std::max(p.tol, d.structure.tol) * 10.0);

  const Matrix a_tilde = d.structure.a_op.m;
  const Matrix q_const = a_tilde * a_tilde;
  const OrthoProjection p_plus = aps_projection(d.structure);
  const OrthoProjection p_far = make_projection(
      Matrix::Identity(d.structure.dim, d.structure.dim) - p_plus.p, p_plus.tol);

  std::optional<OrthoProjection> p_geq_reduced;
  if (d.structure.omega) {
    const OmegaReduction red = omega_reduce(d.structure, nullptr);
    SpectralData spec = spectral_factorize(red.a_plus);
    p_geq_reduced = spectral_projection(spec, {IntervalSelector::closed_nonnegative()});
  }

  DeformationReport report;
  report.thetas = theta_grid;
  report.all_wellposed = true;

  std::vector<RealVector> spectra;
  Matrix prev_p;
  double prev_theta = 0.0;
  for (size_t i = 0; i < theta_grid.size(); ++i) {
    const double theta = theta_grid[i];
    const OrthoProjection p_t = p_theta(family, theta);

    const WellPosedReport wp = is_wellposed(p_t, d.structure);
    report.all_wellposed = report.all_wellposed && wp.wellposed;

    if (i > 0) {
      const double rate = max_abs(p_t.p - prev_p) / std::abs(theta - prev_theta);
      report.lipschitz_bound_check = std::max(report.lipschitz_bound_check, rate);
    }
    prev_p = p_t.p;
    prev_theta = theta;

    if (p_geq_reduced) {
      const OmegaReduction red_t =
          omega_reduce(d.structure, &p_t, ReduceChecks::OmegaOnly);
      report.pair_indices.push_back(fredholm_pair_index(*p_geq_reduced, *red_t.p_plus));
    }

    BlockHalfLine disc([&](double) { return q_const; }, [&](double) { return a_tilde; },
                       p_t, p_far, grid.X, grid.n_points);
    spectra.push_back(disc.eigenvalues());
    report.lowest_eigenvalues.push_back(disc.eigenvalues()(0));

    // boundary-row conditioning: the reduced Robin block at the origin
    const Matrix frame = kernel_basis(p_t);
    double cond = 1.0;
    if (frame.cols() > 0) {
      const double h = grid.X / grid.n_points;
      const Matrix row = (2.0 / (h * h)) * Matrix::Identity(frame.cols(), frame.cols()) -
                         (2.0 / h) * (frame.adjoint() * a_tilde * frame) +
                         frame.adjoint() * q_const * frame;
      Eigen::JacobiSVD<Matrix> svd(row);
      const auto& sv = svd.singularValues();
      cond = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1) : 1e300;
    }
    report.boundary_condition_numbers.push_back(cond);
    report.degenerate.push_back(std::abs(theta) >= 1.45 ||
                                cond > 50.0 * report.boundary_condition_numbers.front());
  }

  for (size_t i = 1; i < report.pair_indices.size(); ++i) {
    if (report.pair_indices[i] != report.pair_indices[0]) {
      report.pair_index_constant = false;
    }
  }

  double max_rate = 0.0, max_jump = 0.0;
  const int tracked = spectra.empty() ? 0 : std::min<int>(12, spectra.front().size());
  for (size_t i = 1; i < spectra.size(); ++i) {
    const double dtheta = std::abs(theta_grid[i] - theta_grid[i - 1]);
    for (int j = 0; j < tracked; ++j) {
      const double jump = std::abs(spectra[i](j) - spectra[i - 1](j));
      max_jump = std::max(max_jump, jump);
      if (dtheta > 0) max_rate = std::max(max_rate, jump / dtheta);
    }
  }
  report.eigenvalue_jump_rate = max_rate;
  report.max_eigenvalue_jump = max_jump;
  return report;
}

GlueingReport glueing_check_circle(const MatrixPath& periodic_path,
                                   const OrthoProjection& p, double cut,
                                   double tolerance) {
  const double a = periodic_path.a(), b = periodic_path.b();
  if (!(cut > a && cut < b)) throw DomainError("cut must lie inside the parameter interval");
  const double res = max_abs(periodic_path.value(a) - periodic_path.value(b));
  if (res > 1e-9 * std::max(1.0, max_abs(periodic_path.value(a)))) {
    throw DomainError("path is not periodic across the parameter interval");
  }
  const Matrix eye = Matrix::Identity(periodic_path.dim(), periodic_path.dim());
  const OrthoProjection p_comp = make_projection(eye - p.p, std::max(p.tol, 1e-9));

  const IntervalIndexReport left =
      interval_index(periodic_path.restricted(a, cut), p, p_comp, tolerance);
  const IntervalIndexReport right =
      interval_index(periodic_path.restricted(cut, b), p_comp, p, tolerance);

  GlueingReport report;
  report.ind_left = left.index;
  report.ind_right = right.index;
  report.ind_total = 0;  // closed problem
  report.residual = std::llabs(static_cast<long long>(left.index + right.index));
  return report;
}

GlueingReport glueing_check_interval(const MatrixPath& path, const OrthoProjection& p0,
                                     const OrthoProjection& q0, double cut,
                                     const OrthoProjection& r, double tolerance) {
  if (!(cut > path.a() && cut < path.b())) {
    throw DomainError("cut must lie inside the parameter interval");
  }
  const IntervalIndexReport whole = interval_index(path, p0, q0, tolerance);
  const IntervalIndexReport left =
      interval_index(path.restricted(path.a(), cut), p0, r, tolerance);
  const IntervalIndexReport right =
      interval_index(path.restricted(cut, path.b()), r, q0, tolerance);

  GlueingReport report;
  report.ind_total = whole.index;
  report.ind_left = left.index;
  report.ind_right = right.index;
  report.residual =
      std::llabs(static_cast<long long>(whole.index - left.index - right.index));
  return report;
}

ProjectionIdentityReport projection_index_identities(const HermitianOperator& a_plus,
                                                     const OrthoProjection& p_plus) {
  if (a_plus.m.rows() != p_plus.p.rows()) {
    throw DimensionMismatch("operator and projection dimensions differ");
  }
  const int dim = static_cast<int>(a_plus.m.rows());
  const Matrix eye = Matrix::Identity(dim, dim);

  SpectralData spec = spectral_factorize(a_plus);
  const OrthoProjection p_pos = spectral_projection(spec, {IntervalSelector::open_positive()});
  const OrthoProjection p_geq =
      spectral_projection(spec, {IntervalSelector::closed_nonnegative()});
  SpectralData spec_flipped =
      spectral_factorize(HermitianOperator{Matrix(-a_plus.m), a_plus.tol});
  const OrthoProjection p_geq_flipped =
      spectral_projection(spec_flipped, {IntervalSelector::closed_nonnegative()});

  const OrthoProjection p_comp = make_projection(eye - p_plus.p, std::max(p_plus.tol, 1e-9));
  const OrthoProjection p_pos_comp = make_projection(eye - p_pos.p, 1e-9);

  ProjectionIdentityReport report;
  report.ind_nonneg_flipped_complement = fredholm_pair_index(p_geq_flipped, p_comp);
  report.ind_complement_positive = fredholm_pair_index(p_pos_comp, p_comp);
  report.ind_positive = fredholm_pair_index(p_pos, p_plus);
  report.ind_nonneg = fredholm_pair_index(p_geq, p_plus);

  const double thresh = spec.zero_threshold();
  for (Eigen::Index i = 0; i < spec.eigenvalues.size(); ++i) {
    if (std::abs(spec.eigenvalues(i)) <= thresh) ++report.kernel_dim;
  }

  report.chain1_holds =
      report.ind_nonneg_flipped_complement == report.ind_complement_positive &&
      report.ind_complement_positive == -report.ind_positive;
  report.chain2_holds = report.ind_nonneg == report.kernel_dim + report.ind_positive;
  return report;
}

}  // namespace diracbvp
