#include "diracbvp/matrix_json.hpp"

#include <nlohmann/json.hpp>

namespace diracbvp {

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<double> re, im;
  re.reserve(m.size());
  im.reserve(m.size());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      re.push_back(m(r, c).real());
      im.push_back(m(r, c).imag());
    }
  }
  j["re"] = re;
  j["im"] = im;
  return j;
}

Matrix matrix_from_json(const nlohmann::json& j) {
  if (!j.contains("rows") || !j.contains("cols") || !j.contains("re") ||
      !j.contains("im")) {
    throw ConfigError("matrix JSON needs fields rows, cols, re, im");
  }
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  if (rows <= 0 || cols <= 0) throw ConfigError("matrix dimensions must be positive");
  const auto re = j.at("re").get<std::vector<double>>();
  const auto im = j.at("im").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(re.size()) != rows * cols ||
      static_cast<Eigen::Index>(im.size()) != rows * cols) {
    throw ConfigError("matrix entry count does not match rows*cols");
  }
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto k = static_cast<size_t>(r * cols + c);
      m(r, c) = Complex(re[k], im[k]);
    }
  }
  if (!all_finite(m)) throw ConfigError("matrix entries must be finite");
  return m;
}

}  // namespace diracbvp
