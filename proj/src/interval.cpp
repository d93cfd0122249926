#include "diracbvp/interval.hpp"

#include <cmath>
#include <sstream>
#include <unsupported/Eigen/MatrixFunctions>

#include "diracbvp/quadrature.hpp"

namespace diracbvp {

namespace {

// One pass with a fixed step count. B(x) = sign * A(x)^T_or_not; the adjoint
// problem g' = A(x)^* g reuses the same stepper through the callback.
Matrix propagate_fixed(const std::function<Matrix(double)>& rhs, int dim, double a,
                       double b, int steps) {
  const double h = (b - a) / steps;
  const double node_offset = std::sqrt(3.0) / 6.0;
  Matrix t = Matrix::Identity(dim, dim);
  for (int i = 0; i < steps; ++i) {
    const double x0 = a + i * h;
    const double x1 = x0 + (0.5 - node_offset) * h;
    const double x2 = x0 + (0.5 + node_offset) * h;
    const Matrix b1 = rhs(x1);
    const Matrix b2 = rhs(x2);
    const Matrix omega =
        (h / 2.0) * (b1 + b2) +
        (std::sqrt(3.0) / 12.0) * h * h * (b2 * b1 - b1 * b2);
    t = omega.exp() * t;
  }
  return t;
}

Propagator propagate_rhs(const std::function<Matrix(double)>& rhs, int dim, double a,
                         double b, double tolerance) {
  if (!(a < b)) throw DomainError("propagation needs a < b");
  int steps = 16;
  Matrix coarse = propagate_fixed(rhs, dim, a, b, steps);
  const int max_steps = 1 << 18;
  while (true) {
    Matrix fine = propagate_fixed(rhs, dim, a, b, 2 * steps);
    const double est = (fine - coarse).norm() / 15.0;  // fourth order
    if (est <= tolerance) {
      return Propagator{fine, 2 * steps, est};
    }
    if (2 * steps >= max_steps) {
      std::ostringstream os;
      os << "richardson estimate " << est << " still above " << tolerance << " at "
         << 2 * steps << " steps";
      throw ToleranceUnreachable(os.str());
    }
    steps *= 2;
    coarse = fine;
  }
}

OrthoProjection nonneg_projection(const Matrix& a_val) {
  SpectralData spec = spectral_factorize(make_hermitian(a_val, 1e-9 * std::max(1.0, max_abs(a_val))));
  return spectral_projection(spec, {IntervalSelector::closed_nonnegative()});
}

}  // namespace

Propagator propagate(const MatrixPath& path, double a, double b, double tolerance) {
  if (a < path.a() - 1e-12 || b > path.b() + 1e-12) {
    throw DomainError("propagation interval outside path interval");
  }
  auto rhs = [&path](double x) -> Matrix { return -path.value(x); };
  return propagate_rhs(rhs, path.dim(), a, b, tolerance);
}

IntervalIndexReport interval_index(const MatrixPath& path, const OrthoProjection& p,
                                   const OrthoProjection& q, double tolerance) {
  if (p.p.rows() != path.dim() || q.p.rows() != path.dim()) {
    throw DimensionMismatch("projection dimensions do not match the path");
  }
  const int dim = path.dim();
  const Matrix eye = Matrix::Identity(dim, dim);

  const Propagator fwd = propagate(path, path.a(), path.b(), tolerance);
  auto adjoint_rhs = [&path](double x) -> Matrix { return Matrix(path.value(x).adjoint()); };
  const Propagator adj = propagate_rhs(adjoint_rhs, dim, path.a(), path.b(), tolerance);

  // kernel: v in ker P with (I-Q) T v = 0, solved on a basis of ker P
  const Matrix ker_p = kernel_basis(p);
  const int kernel_dim =
      static_cast<int>(ker_p.cols()) - rank_of((eye - q.p) * fwd.t * ker_p);

  // cokernel: w in im P with Q S w = 0
  const Matrix im_p = range_basis(p);
  const int cokernel_dim = static_cast<int>(im_p.cols()) - rank_of(q.p * adj.t * im_p);

  IntervalIndexReport report;
  report.kernel_dim = kernel_dim;
  report.cokernel_dim = cokernel_dim;
  report.index = kernel_dim - cokernel_dim;
  return report;
}

std::pair<double, double> integral_term(const MatrixPath& path, const TGrid& grid) {
  const std::vector<double> t_values = grid.values();
  const int n = static_cast<int>(t_values.size());
  // the sampled function is sqrt(t) times an entire function of t, so the fit
  // model is the half-integer power ladder plus the constant column whose
  // coefficient is the constant term under scrutiny
  const int ladder = std::min(10, n - 2);

  RealMatrix design(n, ladder + 1);
  RealVector col_scale(ladder + 1);
  for (int i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    for (int k = 0; k < ladder; ++k) {
      design(i, k + 1) = std::pow(t_values[i], k + 0.5);
    }
  }
  for (int c = 0; c <= ladder; ++c) {
    col_scale(c) = design.col(c).norm();
    design.col(c) /= col_scale(c);
  }
  Eigen::JacobiSVD<RealMatrix> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);

  auto lim_at = [&](double x) {
    SpectralData spec = spectral_factorize(
        make_hermitian(path.value(x), 1e-9 * std::max(1.0, max_abs(path.value(x)))));
    const Matrix d = path.derivative(x);
    const Matrix d_in_basis = spec.eigenvectors.adjoint() * d * spec.eigenvectors;
    RealVector samples(n);
    double scale = 1.0;
    for (int s_i = 0; s_i < n; ++s_i) {
      const double t = t_values[s_i];
      double tr = 0.0;
      for (Eigen::Index i = 0; i < spec.eigenvalues.size(); ++i) {
        tr += d_in_basis(i, i).real() *
              std::exp(-t * spec.eigenvalues(i) * spec.eigenvalues(i));
      }
      samples(s_i) = std::sqrt(t) * tr;
      scale = std::max(scale, std::abs(samples(s_i)));
    }
    RealVector coeff = svd.solve(samples);
    const double constant = coeff(0) / col_scale(0);
    RealVector misfit = design * coeff - samples;
    const double residual = misfit.cwiseAbs().maxCoeff() + 1e-14 * scale;
    return std::make_pair(constant, residual);
  };

  int nodes = 16;
  double prev = 0.0;
  double value = 0.0, err = 0.0;
  for (int round = 0; round < 4; ++round) {
    const auto& rule = GaussLegendre::rule(nodes);
    value = 0.0;
    err = 0.0;
    const double mid = 0.5 * (path.a() + path.b());
    const double half = 0.5 * (path.b() - path.a());
    for (size_t i = 0; i < rule.nodes.size(); ++i) {
      const auto [lim, res] = lim_at(mid + half * rule.nodes[i]);
      value += rule.weights[i] * lim;
      err += std::abs(rule.weights[i]) * (res + 1e-12);
    }
    value *= -half / std::sqrt(M_PI);
    err *= half / std::sqrt(M_PI);
    if (round > 0 && std::abs(value - prev) < 1e-8) break;
    prev = value;
    nodes *= 2;
  }
  return {value, err + std::abs(value - prev)};
}

IntervalIndexReport verify_interval_index_identity(const MatrixPath& path,
                                                   const OrthoProjection& p,
                                                   const OrthoProjection& q,
                                                   const TGrid& grid,
                                                   double tolerance) {
  IntervalIndexReport report = interval_index(path, p, q, tolerance);

  const FlowReport flow = spectral_flow(path);
  report.sf = flow.sf;
  report.sf_methods_agree = flow.method_agreement;

  const Matrix a_start = path.value(path.a());
  const Matrix a_end = path.value(path.b());
  report.pair_index_left = fredholm_pair_index(nonneg_projection(a_start), p);
  report.pair_index_right = fredholm_pair_index(nonneg_projection(a_end), q);
  report.xi_left = xi_invariant(HermitianOperator{a_start, 1e-9});
  report.xi_right = xi_invariant(HermitianOperator{a_end, 1e-9});

  const auto [integral, integral_err] = integral_term(path, grid);
  report.integral_term = integral;
  report.integral_error = integral_err;

  const double line1 = integral - report.xi_left.value() + report.pair_index_left +
                       report.xi_right.value() - report.pair_index_right;
  report.line1_residual = std::abs(report.index - line1);

  const long long line2_twice = report.sf.twice() +
                                2LL * (report.pair_index_left - report.pair_index_right);
  report.line2_residual_twice = std::llabs(2LL * report.index - line2_twice);
  return report;
}

}  // namespace diracbvp
