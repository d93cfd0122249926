#include "diracbvp/heat.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "diracbvp/discretization.hpp"
#include "diracbvp/invariants.hpp"
#include "diracbvp/quadrature.hpp"

namespace diracbvp {

double CutoffFunction::operator()(double x) const {
  if (x <= plateau_end) return 1.0;
  if (x >= support_end) return 0.0;
  const double u = (x - plateau_end) / (support_end - plateau_end);
  if (kind == Kind::SmoothBump) {
    // standard exponential bridge, 1 at u=0, 0 at u=1, all derivatives flat
    const double f0 = std::exp(-1.0 / u);
    const double f1 = std::exp(-1.0 / (1.0 - u));
    return f1 / (f0 + f1);
  }
  const double u3 = u * u * u;
  return 1.0 - (10.0 * u3 - 15.0 * u3 * u + 6.0 * u3 * u * u);
}

double CutoffFunction::integral() const {
  const auto& self = *this;
  return plateau_end + adaptive_simpson([&self](double x) { return self(x); },
                                        plateau_end, support_end, 1e-14);
}

BlockDecomposition commuting_normal_form(const DiracStructure& s,
                                         const OrthoProjection& p,
                                         bool need_omega) {
  if (p.p.rows() != s.dim) throw DimensionMismatch("projection vs structure dimension");
  if (need_omega && !s.omega) throw MissingGrading("structure carries no grading involution");

  const double scale = std::max(1.0, max_abs(s.a_op.m));
  const double ctol = std::max({s.tol, p.tol, 1e-10 * s.dim}) * scale * 10.0;
  const double res_a = max_abs(p.p * s.a_op.m - s.a_op.m * p.p);
  if (res_a > ctol) {
    std::ostringstream os;
    os << "[P, A] residual " << res_a << " exceeds " << ctol;
    throw CommutationViolation(os.str());
  }
  if (need_omega) {
    const double res_w = max_abs(p.p * (*s.omega) - (*s.omega) * p.p);
    if (res_w > ctol) {
      std::ostringstream os;
      os << "[P, omega] residual " << res_w << " exceeds " << ctol;
      throw CommutationViolation(os.str());
    }
  }
  const SymmetryCheck sym = is_gamma_symmetric(p, s);
  if (!sym.holds) {
    std::ostringstream os;
    os << "boundary projection is not compatible with gamma, residual " << sym.residual;
    throw NormalFormError(os.str());
  }

  SpectralData spec = spectral_factorize(s.a_op);
  const double zero_thresh = spec.zero_threshold();
  const double cluster_tol = 1e-6 * scale;

  BlockDecomposition out;
  Eigen::Index i = 0;
  while (i < spec.eigenvalues.size()) {
    Eigen::Index j = i;
    while (j + 1 < spec.eigenvalues.size() &&
           spec.eigenvalues(j + 1) - spec.eigenvalues(j) <= cluster_tol) {
      ++j;
    }
    const Eigen::Index width = j - i + 1;
    Matrix cluster(s.dim, width);
    double mean = 0.0;
    for (Eigen::Index c = 0; c < width; ++c) {
      cluster.col(c) = spec.eigenvectors.col(i + c);
      mean += spec.eigenvalues(i + c);
    }
    mean /= width;
    const double a_val = std::abs(mean) <= zero_thresh ? 0.0 : mean;

    Matrix p_restricted = cluster.adjoint() * p.p * cluster;
    p_restricted = (p_restricted + Matrix(p_restricted.adjoint())) / 2.0;
    SpectralData ps = spectral_factorize(make_hermitian(p_restricted, 1e-8));
    for (Eigen::Index c = 0; c < width; ++c) {
      const double mu = ps.eigenvalues(c);
      if (std::abs(mu) > 1e-6 && std::abs(mu - 1.0) > 1e-6) {
        std::ostringstream os;
        os << "P does not act blockwise on the spectral decomposition (eigenvalue "
           << mu << " on cluster at " << mean << ")";
        throw NormalFormError(os.str());
      }
      ScalarBlock block;
      block.a = a_val;
      block.dirichlet = mu > 0.5;
      block.vec = cluster * ps.eigenvectors.col(c);
      if (s.omega) {
        block.omega_weight = (block.vec.adjoint() * (*s.omega) * block.vec).real()(0, 0);
      }
      out.blocks.push_back(std::move(block));
    }
    i = j + 1;
  }
  return out;
}

namespace {

double gauss_factor(double u, double t) {
  return std::exp(-u * u / (4.0 * t)) / std::sqrt(4.0 * M_PI * t);
}

// a * exp(-w^2/4t - t a^2) * erfcx((w - 2ta)/(2 sqrt(t))), assembled on the
// stable branch for either sign of the argument.
double reflected_tail(double a, double w, double t) {
  if (a == 0.0) return 0.0;
  const double zeta = (w - 2.0 * t * a) / (2.0 * std::sqrt(t));
  const double gaussians = std::exp(-w * w / (4.0 * t) - t * a * a);
  if (zeta >= 0.0) {
    return a * gaussians * erfcx(zeta);
  }
  return a * (2.0 * std::exp(-a * w) - gaussians * erfcx(-zeta));
}

double reflected_tail_quadrature(double a, double w, double t) {
  if (a == 0.0) return 0.0;
  const double zmax = std::max(0.0, 2.0 * t * a - w) + 14.0 * std::sqrt(t) + 2.0;
  const double value = adaptive_simpson(
      [&](double z) { return std::exp(-(w + z) * (w + z) / (4.0 * t) + a * z); }, 0.0,
      zmax, 1e-15 * (1.0 + std::abs(a)));
  return a * std::exp(-t * a * a) * value / std::sqrt(M_PI * t);
}

}  // namespace

double scalar_block_kernel(double a, bool dirichlet, double x, double y, double t,
                           bool use_quadrature) {
  if (t <= 0.0) throw DomainError("heat kernel needs t > 0");
  if (x < 0.0 || y < 0.0) throw DomainError("half-line coordinates must be >= 0");
  const double decay = std::exp(-t * a * a);
  const double direct = gauss_factor(x - y, t) * decay;
  const double image = gauss_factor(x + y, t) * decay;
  if (dirichlet) return direct - image;
  const double tail = use_quadrature ? reflected_tail_quadrature(a, x + y, t)
                                     : reflected_tail(a, x + y, t);
  return direct + image + tail;
}

Matrix sommerfeld_kernel(const DiracStructure& s, const OrthoProjection& p_plus,
                         double x, double y, double t, bool use_quadrature) {
  if (t <= 0.0) throw DomainError("heat kernel needs t > 0");
  if (x < 0.0 || y < 0.0) throw DomainError("half-line coordinates must be >= 0");
  const BlockDecomposition blocks = commuting_normal_form(s, p_plus, false);
  Matrix k = Matrix::Zero(s.dim, s.dim);
  for (const auto& b : blocks.blocks) {
    const double kb = scalar_block_kernel(b.a, b.dirichlet, x, y, t, use_quadrature);
    k += kb * (b.vec * b.vec.adjoint());
  }
  return k;
}

double scalar_block_trace(double a, bool dirichlet, const CutoffFunction& phi,
                          double t) {
  if (t <= 0.0) throw DomainError("heat trace needs t > 0");
  const double rt = std::sqrt(t);
  const double decay = std::exp(-t * a * a);
  const double bulk = decay * phi.integral() / std::sqrt(4.0 * M_PI * t);

  // image term in the boundary-layer variable x = sqrt(t) u
  const double umax_img = std::min(phi.support_end / rt, 9.0);
  const double image = decay / std::sqrt(4.0 * M_PI) *
                       adaptive_simpson(
                           [&](double u) { return phi(rt * u) * std::exp(-u * u); },
                           0.0, umax_img, 1e-14);
  if (dirichlet) return bulk - image;

  double tail = 0.0;
  if (a != 0.0) {
    const double c = a * rt;
    const double umax = std::min(phi.support_end / rt, std::max(9.0, c + 9.0));
    tail = rt * adaptive_simpson(
                    [&](double u) { return phi(rt * u) * reflected_tail(a, 2.0 * rt * u, t); },
                    0.0, umax, 1e-14 * (1.0 + std::abs(a)));
  }
  return bulk + image + tail;
}

double halfline_heat_trace(const DiracStructure& s, const OrthoProjection& p,
                           const CutoffFunction& phi, bool insert_omega, double t) {
  const BlockDecomposition blocks = commuting_normal_form(s, p, insert_omega);
  double sum = 0.0;
  for (const auto& b : blocks.blocks) {
    const double w = insert_omega ? b.omega_weight : 1.0;
    if (w == 0.0) continue;
    sum += w * scalar_block_trace(b.a, b.dirichlet, phi, t);
  }
  return sum;
}

namespace {

double numeric_trace_once(const BlockDecomposition& blocks, const CutoffFunction& phi,
                          bool insert_omega, double t, double X, int n) {
  double sum = 0.0;
  for (const auto& b : blocks.blocks) {
    const double w = insert_omega ? b.omega_weight : 1.0;
    if (w == 0.0) continue;
    const double a = b.a;
    ScalarHalfLine disc([a](double) { return a * a; }, b.a, b.dirichlet, X, n);
    sum += w * disc.weighted_trace(t, [&phi](double x) { return phi(x); });
  }
  return sum;
}

}  // namespace

NumericTrace heat_trace_numeric(const DiracStructure& s, const OrthoProjection& p,
                                const CutoffFunction& phi, bool insert_omega,
                                double t, const HeatGrid& grid, double tolerance) {
  if (t <= 0.0) throw DomainError("heat trace needs t > 0");
  const BlockDecomposition blocks = commuting_normal_form(s, p, insert_omega);
  const double coarse = numeric_trace_once(blocks, phi, insert_omega, t, grid.X, grid.n_points);
  const double fine = numeric_trace_once(blocks, phi, insert_omega, t, grid.X, 2 * grid.n_points);
  NumericTrace out;
  out.value = fine;
  out.richardson_error = std::abs(fine - coarse) / 3.0;
  if (tolerance > 0.0 && out.richardson_error > tolerance) {
    std::ostringstream os;
    os << "richardson estimate " << out.richardson_error << " exceeds tolerance "
       << tolerance;
    throw GridTooCoarse(os.str());
  }
  return out;
}

NumericTrace heat_trace_numeric_path(const MatrixPath& a_of_x, const OrthoProjection& p,
                                     const CutoffFunction& phi, bool insert_omega,
                                     double t, const HeatGrid& grid, double tolerance) {
  if (t <= 0.0) throw DomainError("heat trace needs t > 0");
  if (insert_omega) {
    throw MissingGrading("variable-coefficient oracle carries no grading weights");
  }
  auto q_of_x = [&](double x) -> Matrix {
    const Matrix a = a_of_x.value(x);
    return a * a - a_of_x.derivative(x);
  };
  auto a_eval = [&](double x) -> Matrix { return a_of_x.value(x); };
  auto run = [&](int n) {
    BlockHalfLine disc(q_of_x, a_eval, p, std::nullopt, grid.X, n);
    return disc.weighted_trace(t, [&phi](double x) { return phi(x); }, std::nullopt);
  };
  const double coarse = run(grid.n_points);
  const double fine = run(2 * grid.n_points);
  NumericTrace out;
  out.value = fine;
  out.richardson_error = std::abs(fine - coarse) / 3.0;
  if (tolerance > 0.0 && out.richardson_error > tolerance) {
    throw GridTooCoarse("richardson estimate exceeds tolerance");
  }
  return out;
}

std::vector<double> TGrid::values() const {
  if (!(t0 > 0.0) || !(ratio > 0.0) || ratio >= 1.0 || count < 1) {
    throw ConfigError("t grid needs t0 > 0, 0 < ratio < 1, count >= 1");
  }
  std::vector<double> t(count);
  double v = t0;
  for (int i = 0; i < count; ++i) {
    t[i] = v;
    v *= ratio;
  }
  return t;
}

HeatTraceSamples sample_halfline_trace(const DiracStructure& s,
                                       const OrthoProjection& p,
                                       const CutoffFunction& phi, bool insert_omega,
                                       const TGrid& grid) {
  HeatTraceSamples out;
  out.t_values = grid.values();
  out.provenance = "exact-block";
  for (double t : out.t_values) {
    const double v = halfline_heat_trace(s, p, phi, insert_omega, t);
    out.values.push_back(v);
    out.est_error.push_back(1e-11 * std::max(1.0, std::abs(v)));
  }
  return out;
}

std::string heat_samples_to_csv(const HeatTraceSamples& samples) {
  std::ostringstream os;
  os.precision(17);
  os << "t,value,est_error,provenance\r\n";
  for (size_t i = 0; i < samples.t_values.size(); ++i) {
    os << samples.t_values[i] << "," << samples.values[i] << ","
       << samples.est_error[i] << "," << samples.provenance << "\r\n";
  }
  return os.str();
}

ExpansionFit lim_extract(const std::vector<double>& t_values,
                         const std::vector<double>& values, double p, int max_j,
                         bool include_logs) {
  if (t_values.size() != values.size()) {
    throw DimensionMismatch("t grid and sample count differ");
  }
  const int n = static_cast<int>(t_values.size());
  const int terms = max_j + 1;
  const int cols = include_logs ? 2 * terms : terms;
  if (n < 2 * terms) {
    std::ostringstream os;
    os << "need at least " << 2 * terms << " samples for max_j=" << max_j << ", got " << n;
    throw InsufficientSamples(os.str());
  }

  RealMatrix design(n, cols);
  for (int i = 0; i < n; ++i) {
    const double t = t_values[i];
    if (!(t > 0.0)) throw DomainError("samples need t > 0");
    const double s = std::sqrt(t);
    const double logt = std::log(t);
    for (int j = 0; j <= max_j; ++j) {
      const double base = std::pow(s, j - 2.0 * p);
      design(i, j) = base;
      if (include_logs) design(i, terms + j) = base * logt;
    }
  }

  RealVector col_scale(cols);
  for (int c = 0; c < cols; ++c) {
    const double nrm = design.col(c).norm();
    col_scale(c) = nrm > 0.0 ? nrm : 1.0;
    design.col(c) /= col_scale(c);
  }

  RealVector rhs(n);
  for (int i = 0; i < n; ++i) rhs(i) = values[i];

  Eigen::JacobiSVD<RealMatrix> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double cond = svd.singularValues()(0) /
                      svd.singularValues()(svd.singularValues().size() - 1);
  if (!(cond < 1e12)) {
    std::ostringstream os;
    os << "design matrix conditioning " << cond << " exceeds 1e12";
    throw IllConditioned(os.str());
  }
  RealVector coeff = svd.solve(rhs);
  for (int c = 0; c < cols; ++c) coeff(c) /= col_scale(c);

  ExpansionFit fit;
  fit.p = p;
  fit.max_j = max_j;
  fit.with_logs = include_logs;
  fit.conditioning = cond;
  for (int j = 0; j <= max_j; ++j) {
    fit.coeffs[{j, 0}] = coeff(j);
    if (include_logs) fit.coeffs[{j, 1}] = coeff(terms + j);
  }
  const double two_p = 2.0 * p;
  const int j_const = static_cast<int>(std::lround(two_p));
  if (std::abs(two_p - j_const) < 1e-12 && j_const >= 0 && j_const <= max_j) {
    fit.lim = fit.coeffs[{j_const, 0}];
  } else {
    fit.lim = 0.0;
  }

  double fmax = 1.0, miss = 0.0;
  for (int i = 0; i < n; ++i) fmax = std::max(fmax, std::abs(values[i]));
  for (int i = 0; i < n; ++i) {
    const double t = t_values[i];
    const double s = std::sqrt(t);
    double model = 0.0;
    for (int j = 0; j <= max_j; ++j) {
      const double base = std::pow(s, j - 2.0 * p);
      model += fit.coeffs[{j, 0}] * base;
      if (include_logs) model += fit.coeffs[{j, 1}] * base * std::log(t);
    }
    miss = std::max(miss, std::abs(model - values[i]));
  }
  fit.residual = miss / fmax;
  return fit;
}

SupertraceIdentityReport verify_supertrace_identity(const DiracStructure& s,
                                                    const OrthoProjection& p,
                                                    const CutoffFunction& phi,
                                                    const TGrid& grid,
                                                    double match_tol) {
  const HeatTraceSamples samples = sample_halfline_trace(s, p, phi, true, grid);
  const int max_j = std::min(7, grid.count / 2 - 1);
  const ExpansionFit fit = lim_extract(samples.t_values, samples.values, 0.5, max_j, false);

  const OmegaReduction red = omega_reduce(s, &p, ReduceChecks::OmegaAndA);
  SpectralData spec = spectral_factorize(red.a_plus);
  const OrthoProjection p_geq =
      spectral_projection(spec, {IntervalSelector::closed_nonnegative()});

  SupertraceIdentityReport report;
  report.lim = fit.lim;
  report.fit_residual = fit.residual;
  report.xi_plus = xi_invariant(red.a_plus);
  const double thresh = spec.zero_threshold();
  for (Eigen::Index i = 0; i < spec.eigenvalues.size(); ++i) {
    if (std::abs(spec.eigenvalues(i)) <= thresh) ++report.kernel_dim_plus;
  }
  report.pair_index = fredholm_pair_index(p_geq, *red.p_plus);
  const double xi = report.xi_plus.value();
  report.residual_minus = std::abs(fit.lim - (-xi + report.pair_index));
  report.residual_plus = std::abs(fit.lim - (xi + report.pair_index));
  if (report.residual_minus <= match_tol && report.residual_minus <= report.residual_plus) {
    report.matching_sign = "minus";
  } else if (report.residual_plus <= match_tol) {
    report.matching_sign = "plus";
  } else {
    report.matching_sign = "none";
  }
  return report;
}

ExpansionFitReport heat_expansion_fit(const DiracStructure& s,
                                      const OrthoProjection& p,
                                      const CutoffFunction& phi, const TGrid& grid,
                                      int max_j, double log_noise) {
  const HeatTraceSamples samples = sample_halfline_trace(s, p, phi, false, grid);
  ExpansionFitReport report;
  report.fit = lim_extract(samples.t_values, samples.values, 0.5, max_j, true);
  for (const auto& [jk, value] : report.fit.coeffs) {
    if (jk.second != 1) continue;
    report.max_any_log = std::max(report.max_any_log, std::abs(value));
    if (jk.first / 2.0 - report.fit.p <= 1e-12) {
      report.max_low_order_log = std::max(report.max_low_order_log, std::abs(value));
    }
  }
  report.low_order_logs_vanish = report.max_low_order_log <= log_noise;
  return report;
}

double circle_supertrace(const DiracStructure& s, double L, double t,
                         int mode_cutoff, double tail_tol) {
  if (!s.omega) throw MissingGrading("circle supertrace needs the grading involution");
  if (!(L > 0.0) || !(t > 0.0)) throw DomainError("need L > 0 and t > 0");
  const double k_freq = 2.0 * M_PI * mode_cutoff / L;
  const double tail = s.dim * std::exp(-t * k_freq * k_freq);
  if (tail >= tail_tol) {
    std::ostringstream os;
    os << "mode cutoff " << mode_cutoff << " leaves tail bound " << tail
       << " above " << tail_tol;
    throw TailBoundViolated(os.str());
  }
  SpectralData spec = spectral_factorize(s.a_op);
  double graded = 0.0;  // tr[omega exp(-t A^2)]
  for (Eigen::Index i = 0; i < spec.eigenvalues.size(); ++i) {
    const double w =
        (spec.eigenvectors.col(i).adjoint() * (*s.omega) * spec.eigenvectors.col(i))
            .real()(0, 0);
    graded += w * std::exp(-t * spec.eigenvalues(i) * spec.eigenvalues(i));
  }
  double mode_sum = 1.0;
  for (int k = 1; k <= mode_cutoff; ++k) {
    const double freq = 2.0 * M_PI * k / L;
    mode_sum += 2.0 * std::exp(-t * freq * freq);
  }
  return mode_sum * graded;
}

std::pair<int, int> deficiency_indices(const DiracStructure& s) {
  const Complex i_unit(0.0, 1.0);
  const Matrix m_plus = s.a_op.m - i_unit * s.gamma;   // decaying solutions for D f = -i f
  const Matrix m_minus = s.a_op.m + i_unit * s.gamma;
  auto positives = [&](const Matrix& m) {
    SpectralData spec = spectral_factorize(make_hermitian(m, std::max(s.tol, 1e-10)));
    const double thresh = spec.zero_threshold();
    int count = 0;
    for (Eigen::Index k = 0; k < spec.eigenvalues.size(); ++k) {
      if (spec.eigenvalues(k) > thresh) ++count;
    }
    return count;
  };
  const int n_plus = positives(m_plus);
  const int n_minus = positives(m_minus);
  const int sig = kernel_signature(s);
  if ((n_plus == n_minus) != (sig == 0)) {
    throw StructureViolation(
        "deficiency indices disagree with the kernel signature criterion");
  }
  return {n_plus, n_minus};
}

}  // namespace diracbvp
