#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace diracbvp {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

// Eigenvalues/singular values with |s| <= rank_tol * max(1, scale) count as zero.
inline constexpr double kDefaultRankTol = 1e-8;

inline double rank_threshold(double rank_tol, double scale) {
  return rank_tol * std::max(1.0, scale);
}

// Default structural tolerance, scaled with dimension.
inline double default_structure_tol(int dim) { return 1e-10 * dim; }

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define DIRACBVP_DEFINE_ERROR(Name)                               \
  struct Name : Error {                                           \
    explicit Name(const std::string& msg) : Error(msg) {}         \
  }

DIRACBVP_DEFINE_ERROR(DimensionMismatch);
DIRACBVP_DEFINE_ERROR(StructureViolation);
DIRACBVP_DEFINE_ERROR(ConvergenceFailure);
DIRACBVP_DEFINE_ERROR(NoGammaSymmetricProjection);
DIRACBVP_DEFINE_ERROR(CommutationViolation);
DIRACBVP_DEFINE_ERROR(MissingGrading);
DIRACBVP_DEFINE_ERROR(NormalFormError);
DIRACBVP_DEFINE_ERROR(DomainError);
DIRACBVP_DEFINE_ERROR(GridTooCoarse);
DIRACBVP_DEFINE_ERROR(IllConditioned);
DIRACBVP_DEFINE_ERROR(InsufficientSamples);
DIRACBVP_DEFINE_ERROR(RefinementBudgetExceeded);
DIRACBVP_DEFINE_ERROR(ToleranceUnreachable);
DIRACBVP_DEFINE_ERROR(TailBoundViolated);
DIRACBVP_DEFINE_ERROR(FamilyInvariantViolation);
DIRACBVP_DEFINE_ERROR(DiscretizationFailure);
DIRACBVP_DEFINE_ERROR(InfeasibleRequest);
DIRACBVP_DEFINE_ERROR(ConfigError);

#undef DIRACBVP_DEFINE_ERROR

// Exact half-integer arithmetic; stores twice the value.
class HalfInt {
 public:
  HalfInt() : twice_(0) {}
  static HalfInt from_halves(long long twice) { return HalfInt(twice); }
  static HalfInt from_int(long long n) { return HalfInt(2 * n); }

  long long twice() const { return twice_; }
  double value() const { return 0.5 * static_cast<double>(twice_); }
  bool is_integer() const { return twice_ % 2 == 0; }

  HalfInt operator+(HalfInt o) const { return HalfInt(twice_ + o.twice_); }
  HalfInt operator-(HalfInt o) const { return HalfInt(twice_ - o.twice_); }
  HalfInt operator-() const { return HalfInt(-twice_); }
  bool operator==(HalfInt o) const { return twice_ == o.twice_; }
  bool operator!=(HalfInt o) const { return twice_ != o.twice_; }

 private:
  explicit HalfInt(long long twice) : twice_(twice) {}
  long long twice_;
};

inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool all_finite(const Matrix& m) {
  return m.allFinite();
}

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw Error(msg);
}

}  // namespace diracbvp
