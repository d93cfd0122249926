#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "diracbvp/glueing.hpp"
#include "diracbvp/harness.hpp"
#include "diracbvp/interval.hpp"
#include "diracbvp/matrix_json.hpp"
#include "diracbvp/version.hpp"

namespace {

using namespace diracbvp;

nlohmann::json load_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open '" + path + "'");
  nlohmann::json j;
  is >> j;
  return j;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open output '" + path + "'");
  os << j.dump(2) << "\n";
}

nlohmann::json index_report_json(const IntervalIndexReport& r) {
  nlohmann::json j;
  j["kernel_dim"] = r.kernel_dim;
  j["cokernel_dim"] = r.cokernel_dim;
  j["index"] = r.index;
  j["sf"] = r.sf.value();
  j["pair_index_left"] = r.pair_index_left;
  j["pair_index_right"] = r.pair_index_right;
  j["xi_left"] = r.xi_left.value();
  j["xi_right"] = r.xi_right.value();
  j["integral_term"] = r.integral_term;
  j["integral_error"] = r.integral_error;
  j["line1_residual"] = r.line1_residual;
  j["line2_residual"] = 0.5 * static_cast<double>(r.line2_residual_twice);
  j["sf_methods_agree"] = r.sf_methods_agree;
  return j;
}

int cmd_check_structure(uint64_t seed, int dim, double tol, const std::string& out) {
  const int dim_plus = dim / 2;
  const int dim_minus = dim - dim_plus;
  const DiracStructure s = generate_structure(
      seed, dim_plus, dim_minus, 0, dim_plus == dim_minus, tol > 0 ? tol : -1.0);
  nlohmann::json j;
  j["dim"] = s.dim;
  j["seed"] = seed;
  j["residuals"] = s.residuals;
  j["kernel_signature"] = kernel_signature(s);
  j["chiral_index"] = ind_a_plus(s);
  double max_res = 0.0;
  for (const auto& [k, v] : s.residuals) max_res = std::max(max_res, v);
  j["pass"] = max_res <= s.tol;
  std::cout << "structure dim=" << s.dim << " max residual " << max_res << "\n";
  if (!out.empty()) write_json(out, j);
  return max_res <= s.tol ? 0 : 1;
}

int cmd_index_interval(const std::string& path_file, const std::string& p_file,
                       const std::string& q_file, double tol_prop,
                       const std::string& out) {
  const MatrixPath path = MatrixPath::from_json(load_json(path_file));
  path.validate();
  const Matrix pm = matrix_from_json(load_json(p_file));
  const Matrix qm = matrix_from_json(load_json(q_file));
  const OrthoProjection p = make_projection(pm, 1e-9);
  const OrthoProjection q = make_projection(qm, 1e-9);
  const IntervalIndexReport report =
      verify_interval_index_identity(path, p, q, TGrid{}, tol_prop);
  std::cout << "index " << report.index << " = sf " << report.sf.value() << " + "
            << report.pair_index_left << " - " << report.pair_index_right
            << " (integer residual " << 0.5 * report.line2_residual_twice << ")\n";
  if (!out.empty()) write_json(out, index_report_json(report));
  return report.line2_residual_twice == 0 ? 0 : 1;
}

int cmd_heat_trace(uint64_t seed, int dim, double t0, double ratio, int count,
                   const std::string& out) {
  const int m = std::max(1, dim / 2);
  const DiracStructure s = generate_structure(seed, m, m, 0, true);
  const OrthoProjection p = aps_projection(s);
  CutoffFunction phi;
  const TGrid grid{t0, ratio, count};
  const HeatTraceSamples samples = sample_halfline_trace(s, p, phi, true, grid);
  const std::string csv = heat_samples_to_csv(samples);
  if (out.empty()) {
    std::cout << csv;
  } else {
    std::ofstream os(out);
    if (!os) throw ConfigError("cannot open output '" + out + "'");
    os << csv;
    std::cout << "wrote " << samples.t_values.size() << " samples to " << out << "\n";
  }
  return 0;
}

int cmd_generate(uint64_t seed, int dim, int kernel_dim, const std::string& out) {
  const int m_plus = dim / 2;
  const int m_minus = dim - m_plus;
  const DiracStructure s = generate_structure(seed, m_plus, m_minus,
                                              std::min(kernel_dim, std::min(m_plus, m_minus)),
                                              m_plus == m_minus);
  nlohmann::json js;
  js["gamma"] = matrix_to_json(s.gamma);
  js["a"] = matrix_to_json(s.a_op.m);
  if (s.omega) js["omega"] = matrix_to_json(*s.omega);
  js["tol"] = s.tol;
  write_json(out + "_structure.json", js);

  const MatrixPath path = generate_path(seed, dim, 3, std::nullopt, 0.0, 2.0);
  write_json(out + "_path.json", path.to_json());
  std::cout << "wrote " << out << "_structure.json and " << out << "_path.json\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-dimensional boundary value problems for operators g(d/dx + A)"};
  app.set_version_flag("--version", std::string(diracbvp::kVersion));
  app.require_subcommand(1);

  uint64_t seed = 1;
  int dim = 4;
  int kernel_dim = 0;
  int instances = 0;
  int workers = 0;
  double tol = -1.0;
  std::string out, config_file;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "master seed");
    cmd->add_option("--dim", dim, "coefficient space dimension");
    cmd->add_option("--tol", tol, "tolerance override");
    cmd->add_option("--out", out, "output path");
  };

  auto* check = app.add_subcommand("check-structure", "generate and validate one instance");
  add_common(check);

  auto* index = app.add_subcommand("index-interval", "boundary value index of d/dx + A(x)");
  std::string path_file, p_file, q_file;
  index->add_option("--path", path_file, "path JSON file")->required();
  index->add_option("--p", p_file, "left projection JSON")->required();
  index->add_option("--q", q_file, "right projection JSON")->required();
  index->add_option("--tol", tol, "propagation tolerance");
  index->add_option("--out", out, "report JSON path");

  auto* heat = app.add_subcommand("heat-trace", "sample the graded half-line heat trace");
  double t0 = 0.5, ratio = 0.65;
  int count = 14;
  add_common(heat);
  heat->add_option("--t0", t0, "largest t");
  heat->add_option("--ratio", ratio, "geometric ratio");
  heat->add_option("--count", count, "number of samples");

  auto* verify = app.add_subcommand("verify", "run a verification suite");
  std::string suite;
  verify->add_option("--suite", suite, "structure|s2|s5|s6|s7|s9|ms|s8|identities");
  verify->add_option("--config", config_file, "scenario config JSON");
  verify->add_option("--seed", seed, "master seed");
  verify->add_option("--dim", dim, "dimension parameter");
  verify->add_option("--instances", instances, "instance count");
  verify->add_option("--workers", workers, "worker threads");
  verify->add_option("--out", out, "report JSON path");

  auto* gen = app.add_subcommand("generate", "emit structure and path JSON files");
  add_common(gen);
  gen->add_option("--kernel-dim", kernel_dim, "requested dim ker A");

  CLI11_PARSE(app, argc, argv);

  try {
    if (check->parsed()) {
      return cmd_check_structure(seed, dim, tol, out);
    }
    if (index->parsed()) {
      return cmd_index_interval(path_file, p_file, q_file, tol > 0 ? tol : 1e-10, out);
    }
    if (heat->parsed()) {
      return cmd_heat_trace(seed, dim, t0, ratio, count, out);
    }
    if (gen->parsed()) {
      if (out.empty()) out = "generated";
      return cmd_generate(seed, dim, kernel_dim, out);
    }
    if (verify->parsed()) {
      diracbvp::ScenarioConfig cfg;
      if (!config_file.empty()) {
        cfg = diracbvp::ScenarioConfig::from_json(load_json(config_file));
      }
      if (!suite.empty()) cfg.suite = suite;
      if (verify->count("--seed")) cfg.seed = seed;
      if (verify->count("--dim")) cfg.dim = dim;
      if (instances > 0) cfg.instances = instances;
      if (workers > 0) cfg.workers = workers;
      if (!out.empty()) cfg.out = out;
      const diracbvp::RunReport report = diracbvp::run_suite(cfg);
      int failed = 0;
      for (const auto& inst : report.instances) {
        if (!inst.pass) {
          ++failed;
          std::cout << "FAIL instance " << inst.id << " seed " << inst.seed << "\n";
        }
      }
      std::cout << "suite " << cfg.suite << ": " << (report.instances.size() - failed)
                << "/" << report.instances.size() << " instances passed, hash "
                << report.hash << " (" << report.wall_seconds << " s)\n";
      return report.pass ? 0 : 1;
    }
  } catch (const diracbvp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
