#include "diracbvp/discretization.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

namespace diracbvp {

namespace {

RealVector tridiag_eigenvalues(const RealVector& diag, const RealVector& sub) {
  Eigen::SelfAdjointEigenSolver<RealMatrix> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw DiscretizationFailure("tridiagonal eigenvalue iteration failed");
  }
  return solver.eigenvalues();
}

}  // namespace

ScalarHalfLine::ScalarHalfLine(const std::function<double(double)>& q, double robin_a,
                               bool dirichlet, double X, int n) {
  if (n < 8) throw DiscretizationFailure("need at least 8 grid points");
  const double h = X / n;
  const double inv_h2 = 1.0 / (h * h);
  const int m = dirichlet ? n - 1 : n;  // far end is Dirichlet either way
  nodes_.resize(m);
  mass_.resize(m);
  diag_.resize(m);
  sub_.resize(m - 1);
  for (int i = 0; i < m; ++i) {
    const double x = dirichlet ? (i + 1) * h : i * h;
    nodes_[i] = x;
    mass_[i] = h;
    diag_(i) = 2.0 * inv_h2 + q(x);
  }
  for (int i = 0; i + 1 < m; ++i) sub_(i) = -inv_h2;
  if (!dirichlet) {
    // ghost-point Robin row at x=0, half mass
    mass_[0] = 0.5 * h;
    diag_(0) += -2.0 * robin_a / h;
    sub_(0) = -std::sqrt(2.0) * inv_h2;
  }
}

RealVector ScalarHalfLine::eigenvalues() const {
  return tridiag_eigenvalues(diag_, sub_);
}

double ScalarHalfLine::weighted_trace(double t,
                                      const std::function<double(double)>& weight) const {
  const int m = static_cast<int>(nodes_.size());
  RealVector w(m);
  double wmax = 0.0;
  for (int i = 0; i < m; ++i) {
    w(i) = weight(nodes_[i]) * mass_[i];
    wmax = std::max(wmax, std::abs(w(i)));
  }
  if (wmax == 0.0) return 0.0;
  const double eps = 1e-2 / wmax;
  const RealVector l_plus = tridiag_eigenvalues(diag_ + eps * w, sub_);
  const RealVector l_minus = tridiag_eigenvalues(diag_ - eps * w, sub_);
  double s_plus = 0.0, s_minus = 0.0;
  for (int i = 0; i < l_plus.size(); ++i) {
    s_plus += std::exp(-t * l_plus(i));
    s_minus += std::exp(-t * l_minus(i));
  }
  return -(s_plus - s_minus) / (2.0 * eps * t);
}

double ScalarHalfLine::kernel_entry(double t, int i, int j) const {
  const int m = static_cast<int>(nodes_.size());
  if (i < 0 || j < 0 || i >= m || j >= m) throw DomainError("kernel index out of range");
  const int max_krylov = std::min(m, 700);
  RealMatrix v(m, max_krylov);
  RealVector alpha(max_krylov), beta(max_krylov);
  v.col(0).setZero();
  v(j, 0) = 1.0;

  auto matvec = [&](const RealVector& x) {
    RealVector y = diag_.cwiseProduct(x);
    for (int r = 0; r + 1 < m; ++r) {
      y(r) += sub_(r) * x(r + 1);
      y(r + 1) += sub_(r) * x(r);
    }
    return y;
  };

  auto evaluate = [&](int k) {
    Eigen::SelfAdjointEigenSolver<RealMatrix> small;
    small.computeFromTridiagonal(alpha.head(k + 1), beta.head(k),
                                 Eigen::ComputeEigenvectors);
    RealVector coeff = RealVector::Zero(k + 1);
    for (int r = 0; r <= k; ++r) {
      coeff += std::exp(-t * small.eigenvalues()(r)) * small.eigenvectors()(0, r) *
               small.eigenvectors().col(r);
    }
    return (v.leftCols(k + 1) * coeff)(i);
  };

  double result = 0.0, result_prev = 0.0;
  for (int k = 0; k < max_krylov; ++k) {
    RealVector y = matvec(v.col(k));
    alpha(k) = v.col(k).dot(y);
    y -= alpha(k) * v.col(k);
    if (k > 0) y -= beta(k - 1) * v.col(k - 1);
    for (int r = 0; r <= k; ++r) y -= v.col(r).dot(y) * v.col(r);
    beta(k) = y.norm();
    const bool breakdown = beta(k) < 1e-13 * std::max(1.0, std::abs(alpha(k)));
    if (breakdown || (k + 1) % 25 == 0 || k + 1 == max_krylov) {
      result = evaluate(k);
      if (breakdown ||
          (k > 60 && std::abs(result - result_prev) < 1e-13 * std::max(1.0, std::abs(result)))) {
        break;
      }
      result_prev = result;
    }
    if (k + 1 < max_krylov) v.col(k + 1) = y / beta(k);
  }
  return result / std::sqrt(mass_[i] * mass_[j]);
}

int ScalarHalfLine::node_index(double x) const {
  int best = 0;
  double dist = std::abs(nodes_[0] - x);
  for (size_t i = 1; i < nodes_.size(); ++i) {
    const double d = std::abs(nodes_[i] - x);
    if (d < dist) {
      dist = d;
      best = static_cast<int>(i);
    }
  }
  if (dist > 1e-9) {
    std::ostringstream os;
    os << "x=" << x << " is not a grid node (nearest " << nodes_[best] << ")";
    throw DomainError(os.str());
  }
  return best;
}

BlockHalfLine::BlockHalfLine(const std::function<Matrix(double)>& q_of_x,
                             const std::function<Matrix(double)>& a_of_x,
                             const OrthoProjection& p_left,
                             const std::optional<OrthoProjection>& p_right,
                             double X, int n) {
  if (n < 8) throw DiscretizationFailure("need at least 8 grid points");
  dim_ = static_cast<int>(p_left.p.rows());
  const double h = X / n;
  const double inv_h2 = 1.0 / (h * h);
  const Matrix eye = Matrix::Identity(dim_, dim_);

  struct Node {
    double x;
    double mass;
    Matrix frame;
    int robin_sign;  // -1 left boundary, +1 right boundary, 0 interior
  };
  std::vector<Node> nodes;
  const Matrix frame_left = kernel_basis(p_left);
  if (frame_left.cols() > 0) nodes.push_back({0.0, 0.5 * h, frame_left, -1});
  for (int i = 1; i < n; ++i) nodes.push_back({i * h, h, eye, 0});
  if (p_right) {
    const Matrix frame_right = kernel_basis(*p_right);
    if (frame_right.cols() > 0) nodes.push_back({X, 0.5 * h, frame_right, +1});
  }

  int total = 0;
  node_offset_.clear();
  for (const auto& nd : nodes) {
    node_offset_.push_back(total);
    total += static_cast<int>(nd.frame.cols());
  }
  if (total == 0) throw DiscretizationFailure("no free components in discretization");

  Matrix b = Matrix::Zero(total, total);
  for (size_t k = 0; k < nodes.size(); ++k) {
    const auto& nd = nodes[k];
    x_of_node_.push_back(nd.x);
    node_mass_.push_back(nd.mass);
    node_frame_.push_back(nd.frame);
    const int off = node_offset_[k];
    const int w = static_cast<int>(nd.frame.cols());

    Matrix diag_block = (2.0 * inv_h2) * Matrix::Identity(w, w) +
                        nd.frame.adjoint() * q_of_x(nd.x) * nd.frame;
    if (nd.robin_sign != 0) {
      diag_block += (2.0 * nd.robin_sign / h) *
                    (nd.frame.adjoint() * a_of_x(nd.x) * nd.frame);
    }
    b.block(off, off, w, w) = (diag_block + Matrix(diag_block.adjoint())) / 2.0;

    if (k + 1 < nodes.size()) {
      const auto& nx = nodes[k + 1];
      const int off2 = node_offset_[k + 1];
      const int w2 = static_cast<int>(nx.frame.cols());
      // half-mass similarity turns the boundary coupling -2/h^2 and its
      // interior counterpart -1/h^2 into a symmetric -sqrt(2)/h^2
      const double scale =
          (nd.robin_sign != 0 || nx.robin_sign != 0) ? -std::sqrt(2.0) * inv_h2 : -inv_h2;
      const Matrix coupling = nd.frame.adjoint() * nx.frame;
      b.block(off, off2, w, w2) = scale * coupling;
      b.block(off2, off, w2, w) = scale * coupling.adjoint();
    }
  }

  Eigen::SelfAdjointEigenSolver<Matrix> solver(b);
  if (solver.info() != Eigen::Success) {
    throw DiscretizationFailure("block half-line eigendecomposition failed");
  }
  eigenvalues_ = solver.eigenvalues();
  eigenvectors_ = solver.eigenvectors();
}

double BlockHalfLine::weighted_trace(double t,
                                     const std::function<double(double)>& weight,
                                     const std::optional<Matrix>& component_weight) const {
  double sum = 0.0;
  std::vector<Matrix> reduced_weight;
  if (component_weight) {
    for (const auto& frame : node_frame_) {
      reduced_weight.push_back(frame.adjoint() * (*component_weight) * frame);
    }
  }
  for (int k = 0; k < eigenvalues_.size(); ++k) {
    const double decay = std::exp(-t * eigenvalues_(k));
    if (decay < 1e-300) continue;
    double d = 0.0;
    for (size_t nd = 0; nd < x_of_node_.size(); ++nd) {
      const double phi = weight(x_of_node_[nd]);
      if (phi == 0.0) continue;
      const int off = node_offset_[nd];
      const int w = static_cast<int>(node_frame_[nd].cols());
      const auto seg = eigenvectors_.col(k).segment(off, w);
      double val;
      if (component_weight) {
        val = (seg.adjoint() * reduced_weight[nd] * seg)(0, 0).real();
      } else {
        val = seg.squaredNorm();
      }
      d += phi * node_mass_[nd] * val;
    }
    sum += decay * d;
  }
  return sum;
}

}  // namespace diracbvp
