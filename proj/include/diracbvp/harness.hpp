#pragma once

#include <cstdint>
#include <map>
#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <string>
#include <vector>

#include "diracbvp/heat.hpp"
#include "diracbvp/path.hpp"
#include "diracbvp/structure.hpp"

namespace diracbvp {

// Counter-split deterministic stream: one substream per (seed, instance, tag),
// so adding instances never perturbs earlier ones.
class Rng {
 public:
  Rng(uint64_t seed, uint64_t stream);
  uint64_t next_u64();
  double uniform();            // [0, 1)
  double normal();             // standard normal
  Complex complex_normal();    // complex standard normal
  int uniform_int(int lo, int hi);  // inclusive

 private:
  uint64_t state_;
  uint64_t inc_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// gamma = i diag(I, -I); A = [[0, B], [B*, 0]] with a seeded Gaussian block and
// the requested number of zeroed singular values; optional grading built from
// the singular frames of B.
DiracStructure generate_structure(uint64_t seed, int dim_plus, int dim_minus,
                                  int kernel_dim, bool with_omega,
                                  double tol = -1.0);

// Trig (and optionally plateau/polynomial) coefficient table with hermitian
// Gaussian coefficients; derivative table is exact by construction.
MatrixPath generate_path(uint64_t seed, int dim, int n_terms,
                         std::optional<double> plateau,
                         double a = 0.0, double b = 2.0,
                         bool periodic = false);

OrthoProjection generate_projection(uint64_t seed, int dim, int rank);

struct ThetaGrid {
  double lo = -1.2;
  double hi = 1.2;
  int count = 33;
  std::vector<double> values() const;
};

struct ScenarioConfig {
  uint64_t seed = 1;
  int dim = 4;
  int kernel_dim = 0;
  std::string suite = "structure";
  int instances = 10;
  int workers = 4;
  std::map<std::string, double> tolerances;
  TGrid t_grid;
  ThetaGrid theta_grid;
  HeatGrid x_grid;
  std::string out;

  double tol(const std::string& name, double fallback) const;
  nlohmann::json to_json() const;
  static ScenarioConfig from_json(const nlohmann::json& j);
};

struct CheckResult {
  std::string name;
  bool pass = false;
  double residual = 0.0;
  std::string detail;
};

struct InstanceReport {
  int id = 0;
  uint64_t seed = 0;
  bool pass = false;
  std::vector<CheckResult> checks;
};

struct RunReport {
  ScenarioConfig config;
  std::vector<InstanceReport> instances;
  bool pass = false;
  double wall_seconds = 0.0;
  std::string version;
  std::string commit;
  std::string hash;  // FNV-1a over all numeric outputs, order-independent

  nlohmann::json to_json() const;
};

// Known suites: structure, s2, s5, s6, s7, s9, ms, s8, identities.
RunReport run_suite(const ScenarioConfig& config);

std::string report_hash(const std::vector<InstanceReport>& instances);

}  // namespace diracbvp
