#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "diracbvp/structure.hpp"
#include "diracbvp/types.hpp"

namespace diracbvp {

// Symmetric second-order discretization of -d^2/dx^2 + q(x) on [0, X] with
// either a Dirichlet or a Robin condition f'(0) + a f(0) = 0 at the origin and
// Dirichlet at X. The boundary node carries half mass, which restores symmetry
// of the ghost-point Robin row.
class ScalarHalfLine {
 public:
  ScalarHalfLine(const std::function<double(double)>& q, double robin_a,
                 bool dirichlet, double X, int n);

  // sum_m w(x_m) m_m (exp(-tL))_mm, evaluated from eigenvalues only through
  // the derivative identity tr[W exp(-tB)] = -(1/t) d/de tr exp(-t(B+eW)).
  double weighted_trace(double t, const std::function<double(double)>& weight) const;

  // Heat kernel value at grid nodes i, j via a Lanczos exponential action.
  double kernel_entry(double t, int i, int j) const;

  int node_index(double x) const;
  const std::vector<double>& nodes() const { return nodes_; }
  RealVector eigenvalues() const;

 private:
  std::vector<double> nodes_;
  std::vector<double> mass_;
  RealVector diag_;
  RealVector sub_;
};

// Block version for a full boundary projection: P f(0) = 0 and
// (I-P)(f' + A(0) f)(0) = 0, assembled in reduced coordinates at the boundary
// node. Far end is Dirichlet, or the mirrored projected condition when a
// right-hand projection is supplied.
class BlockHalfLine {
 public:
  BlockHalfLine(const std::function<Matrix(double)>& q_of_x,
                const std::function<Matrix(double)>& a_of_x,
                const OrthoProjection& p_left,
                const std::optional<OrthoProjection>& p_right, double X, int n);

  double weighted_trace(double t, const std::function<double(double)>& weight,
                        const std::optional<Matrix>& component_weight) const;

  const RealVector& eigenvalues() const { return eigenvalues_; }

 private:
  int dim_ = 0;
  std::vector<double> x_of_node_;
  std::vector<double> node_mass_;
  std::vector<Matrix> node_frame_;
  std::vector<int> node_offset_;
  RealVector eigenvalues_;
  Matrix eigenvectors_;
};

}  // namespace diracbvp
