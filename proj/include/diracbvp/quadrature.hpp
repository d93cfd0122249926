#pragma once

#include <functional>
#include <vector>

#include "diracbvp/types.hpp"

namespace diracbvp {

// Adaptive Simpson on [a, b] with absolute tolerance.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth = 40);

// Gauss-Legendre rule on [-1, 1]; nodes via Newton iteration, deterministic.
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
  static const GaussLegendre& rule(int n);

  double integrate(const std::function<double(double)>& f, double a, double b) const;
};

// exp(z^2) * erfc(z), overflow-free for large positive z.
double erfcx(double z);

}  // namespace diracbvp
