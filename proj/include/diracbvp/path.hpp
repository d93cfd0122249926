#pragma once

#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <vector>

#include "diracbvp/types.hpp"

namespace diracbvp {

enum class TermKind { Poly, Cos, Sin };

struct PathTerm {
  TermKind kind;
  int degree_or_freq;  // poly degree or trig frequency
  Matrix coeff;        // hermitian
};

// Smooth family x -> A(x) given by a polynomial-plus-trigonometric coefficient
// table, so values and derivatives are exact. With a plateau x0 the evaluator
// clamps: A(x) = A(x0) and A'(x) = 0 for x >= x0.
class MatrixPath {
 public:
  MatrixPath(double a, double b, std::vector<PathTerm> terms,
             std::optional<double> plateau_x0 = std::nullopt);

  Matrix value(double x) const;
  Matrix derivative(double x) const;

  double a() const { return a_; }
  double b() const { return b_; }
  int dim() const { return dim_; }
  const std::optional<double>& plateau_x0() const { return plateau_x0_; }
  const std::vector<PathTerm>& terms() const { return terms_; }

  MatrixPath restricted(double a2, double b2) const;
  // Exact reparametrization x -> a + b - x (the coefficient table is closed
  // under reflection).
  MatrixPath reversed() const;

  // Spot-checks hermiticity, the derivative table against central differences,
  // and the plateau on a validation grid. Throws StructureViolation.
  void validate(int grid_points = 33) const;

  nlohmann::json to_json() const;
  static MatrixPath from_json(const nlohmann::json& j);

 private:
  double a_, b_;
  std::vector<PathTerm> terms_;
  std::optional<double> plateau_x0_;
  int dim_;

  Matrix table_value(double x) const;
  Matrix table_derivative(double x) const;
};

}  // namespace diracbvp
