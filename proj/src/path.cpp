#include "diracbvp/path.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <sstream>

#include "diracbvp/matrix_json.hpp"

namespace diracbvp {

namespace {

const char* kind_name(TermKind k) {
  switch (k) {
    case TermKind::Poly: return "poly";
    case TermKind::Cos: return "cos";
    case TermKind::Sin: return "sin";
  }
  return "?";
}

TermKind kind_from_name(const std::string& s) {
  if (s == "poly") return TermKind::Poly;
  if (s == "cos") return TermKind::Cos;
  if (s == "sin") return TermKind::Sin;
  throw ConfigError("unknown path term kind '" + s + "'");
}

}  // namespace

MatrixPath::MatrixPath(double a, double b, std::vector<PathTerm> terms,
                       std::optional<double> plateau_x0)
    : a_(a), b_(b), terms_(std::move(terms)), plateau_x0_(plateau_x0) {
  if (!(a_ < b_)) throw Error("path interval needs a < b");
  if (terms_.empty()) throw Error("path needs at least one term");
  dim_ = static_cast<int>(terms_.front().coeff.rows());
  for (const auto& t : terms_) {
    if (t.coeff.rows() != dim_ || t.coeff.cols() != dim_) {
      throw DimensionMismatch("path term coefficient dimensions differ");
    }
    if (t.degree_or_freq < 0) throw Error("path term degree/frequency must be >= 0");
  }
}

Matrix MatrixPath::table_value(double x) const {
  Matrix out = Matrix::Zero(dim_, dim_);
  for (const auto& t : terms_) {
    const int k = t.degree_or_freq;
    double f = 0.0;
    switch (t.kind) {
      case TermKind::Poly: f = std::pow(x, k); break;
      case TermKind::Cos: f = std::cos(k * x); break;
      case TermKind::Sin: f = std::sin(k * x); break;
    }
    out += f * t.coeff;
  }
  return out;
}

Matrix MatrixPath::table_derivative(double x) const {
  Matrix out = Matrix::Zero(dim_, dim_);
  for (const auto& t : terms_) {
    const int k = t.degree_or_freq;
    double f = 0.0;
    switch (t.kind) {
      case TermKind::Poly: f = k == 0 ? 0.0 : k * std::pow(x, k - 1); break;
      case TermKind::Cos: f = -k * std::sin(k * x); break;
      case TermKind::Sin: f = k * std::cos(k * x); break;
    }
    out += f * t.coeff;
  }
  return out;
}

Matrix MatrixPath::value(double x) const {
  if (plateau_x0_ && x >= *plateau_x0_) return table_value(*plateau_x0_);
  return table_value(x);
}

Matrix MatrixPath::derivative(double x) const {
  if (plateau_x0_ && x >= *plateau_x0_) return Matrix::Zero(dim_, dim_);
  return table_derivative(x);
}

MatrixPath MatrixPath::restricted(double a2, double b2) const {
  if (a2 < a_ - 1e-12 || b2 > b_ + 1e-12 || !(a2 < b2)) {
    throw DomainError("restriction interval outside path interval");
  }
  return MatrixPath(a2, b2, terms_, plateau_x0_);
}

MatrixPath MatrixPath::reversed() const {
  // substitute x -> a + b - x term by term
  const double s = a_ + b_;
  std::vector<PathTerm> out;
  for (const auto& t : terms_) {
    const int k = t.degree_or_freq;
    switch (t.kind) {
      case TermKind::Poly: {
        // (s - x)^k = sum_m C(k,m) s^(k-m) (-1)^m x^m
        double binom = 1.0;
        for (int m = 0; m <= k; ++m) {
          const double c = binom * std::pow(s, k - m) * ((m % 2 == 0) ? 1.0 : -1.0);
          out.push_back({TermKind::Poly, m, c * t.coeff});
          binom = binom * (k - m) / (m + 1.0);
        }
        break;
      }
      case TermKind::Cos: {
        // cos(k(s-x)) = cos(ks)cos(kx) + sin(ks)sin(kx)
        out.push_back({TermKind::Cos, k, std::cos(k * s) * t.coeff});
        out.push_back({TermKind::Sin, k, std::sin(k * s) * t.coeff});
        break;
      }
      case TermKind::Sin: {
        out.push_back({TermKind::Sin, k, -std::cos(k * s) * t.coeff});
        out.push_back({TermKind::Cos, k, std::sin(k * s) * t.coeff});
        break;
      }
    }
  }
  std::optional<double> plateau;  // a right plateau does not reflect to one
  return MatrixPath(a_, b_, std::move(out), plateau);
}

void MatrixPath::validate(int grid_points) const {
  const double scale_h = 1e-4 * (b_ - a_);
  double deriv_scale = 0.0;
  for (int i = 0; i < grid_points; ++i) {
    const double x = a_ + (b_ - a_) * (i + 0.5) / grid_points;
    deriv_scale = std::max(deriv_scale, max_abs(derivative(x)));
  }
  deriv_scale = std::max(1.0, deriv_scale);
  for (int i = 0; i < grid_points; ++i) {
    const double x = a_ + (b_ - a_) * (i + 0.5) / grid_points;
    const Matrix v = value(x);
    const double herm = max_abs(v - v.adjoint());
    if (herm > 1e-10 * std::max(1.0, max_abs(v))) {
      std::ostringstream os;
      os << "path value at x=" << x << " is not hermitian, residual " << herm;
      throw StructureViolation(os.str());
    }
    if (x - scale_h >= a_ && x + scale_h <= b_) {
      const Matrix fd = (value(x + scale_h) - value(x - scale_h)) / (2 * scale_h);
      const double res = max_abs(derivative(x) - fd);
      if (res > 1e-6 * deriv_scale) {
        std::ostringstream os;
        os << "path derivative mismatch at x=" << x << ", residual " << res;
        throw StructureViolation(os.str());
      }
    }
  }
  if (plateau_x0_) {
    const Matrix ref = value(*plateau_x0_);
    for (int i = 0; i < grid_points; ++i) {
      const double x = *plateau_x0_ + (b_ - *plateau_x0_) * i / std::max(1, grid_points - 1);
      if (x > b_) break;
      const double res = max_abs(value(x) - ref);
      if (res > 1e-12 * std::max(1.0, max_abs(ref))) {
        throw StructureViolation("plateau violated past x0");
      }
    }
  }
}

nlohmann::json MatrixPath::to_json() const {
  nlohmann::json j;
  j["interval"] = {a_, b_};
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : terms_) {
    nlohmann::json tj;
    tj["kind"] = kind_name(t.kind);
    tj["degree_or_freq"] = t.degree_or_freq;
    tj["matrix"] = matrix_to_json(t.coeff);
    terms.push_back(tj);
  }
  j["terms"] = terms;
  if (plateau_x0_) j["plateau_x0"] = *plateau_x0_;
  return j;
}

MatrixPath MatrixPath::from_json(const nlohmann::json& j) {
  if (!j.contains("interval") || !j.contains("terms")) {
    throw ConfigError("path JSON needs fields interval, terms");
  }
  const auto iv = j.at("interval").get<std::vector<double>>();
  if (iv.size() != 2) throw ConfigError("path interval must be [a, b]");
  std::vector<PathTerm> terms;
  for (const auto& tj : j.at("terms")) {
    PathTerm t;
    t.kind = kind_from_name(tj.at("kind").get<std::string>());
    t.degree_or_freq = tj.at("degree_or_freq").get<int>();
    t.coeff = matrix_from_json(tj.at("matrix"));
    terms.push_back(std::move(t));
  }
  std::optional<double> plateau;
  if (j.contains("plateau_x0") && !j.at("plateau_x0").is_null()) {
    plateau = j.at("plateau_x0").get<double>();
  }
  return MatrixPath(iv[0], iv[1], std::move(terms), plateau);
}

}  // namespace diracbvp
