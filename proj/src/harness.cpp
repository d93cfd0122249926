#include "diracbvp/harness.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

#include "diracbvp/glueing.hpp"
#include "diracbvp/interval.hpp"
#include "diracbvp/invariants.hpp"
#include "diracbvp/version.hpp"

namespace diracbvp {

namespace {

uint64_t splitmix64(uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(uint64_t seed, uint64_t stream) {
  uint64_t mix = seed;
  (void)splitmix64(mix);
  mix ^= 0x632be59bd9b4e019ULL * (stream + 1);
  state_ = splitmix64(mix);
  inc_ = splitmix64(mix) | 1ULL;
}

uint64_t Rng::next_u64() {
  // pcg-style output on a splitmix walk; deterministic and portable
  state_ = state_ * 6364136223846793005ULL + inc_;
  uint64_t x = state_;
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  return x;
}

double Rng::uniform() {
  return (next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u = 0.0, v = 0.0, s = 0.0;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * factor;
  have_spare_ = true;
  return u * factor;
}

Complex Rng::complex_normal() {
  const double re = normal();
  const double im = normal();
  return Complex(re, im) / std::sqrt(2.0);
}

int Rng::uniform_int(int lo, int hi) {
  return lo + static_cast<int>(next_u64() % static_cast<uint64_t>(hi - lo + 1));
}

namespace {

Matrix ginibre(Rng& rng, int rows, int cols) {
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = rng.complex_normal();
  }
  return m;
}

Matrix hermitian_gaussian(Rng& rng, int dim, double scale) {
  const Matrix g = ginibre(rng, dim, dim);
  return scale * (g + Matrix(g.adjoint())) / 2.0;
}

}  // namespace

DiracStructure generate_structure(uint64_t seed, int dim_plus, int dim_minus,
                                  int kernel_dim, bool with_omega, double tol) {
  if (dim_plus < 0 || dim_minus < 0 || dim_plus + dim_minus < 1) {
    throw ConfigError("structure dimensions must be nonnegative with dim >= 1");
  }
  if (kernel_dim > std::min(dim_plus, dim_minus)) {
    throw ConfigError("kernel_dim exceeds min(dim_plus, dim_minus)");
  }
  if (with_omega && dim_plus != dim_minus) {
    throw InfeasibleRequest("a grading involution needs dim_plus == dim_minus");
  }
  const int dim = dim_plus + dim_minus;
  if (tol <= 0.0) tol = default_structure_tol(dim);

  Matrix gamma = Matrix::Zero(dim, dim);
  gamma.topLeftCorner(dim_plus, dim_plus) =
      Complex(0, 1) * Matrix::Identity(dim_plus, dim_plus);
  gamma.bottomRightCorner(dim_minus, dim_minus) =
      Complex(0, -1) * Matrix::Identity(dim_minus, dim_minus);

  const int inner = std::min(dim_plus, dim_minus);
  Matrix b = Matrix::Zero(dim_plus, dim_minus);
  Matrix w_block = Matrix::Zero(dim_plus, dim_minus);
  for (int attempt = 0; attempt < 200; ++attempt) {
    Rng rng(seed, 1000 + attempt);
    if (inner == 0) break;
    Matrix raw = ginibre(rng, dim_plus, dim_minus) / std::sqrt(static_cast<double>(inner));
    Eigen::JacobiSVD<Matrix> svd(raw, Eigen::ComputeFullU | Eigen::ComputeFullV);
    RealVector sv = svd.singularValues();
    for (int k = 0; k < kernel_dim; ++k) sv(inner - 1 - k) = 0.0;
    // margins keep spectral classifications unambiguous downstream
    bool ok = true;
    for (int k = 0; k < inner - kernel_dim; ++k) {
      if (sv(k) < 0.25) ok = false;
      if (k > 0 && sv(k - 1) - sv(k) < 0.05) ok = false;
    }
    if (!ok) continue;
    Matrix sigma = Matrix::Zero(dim_plus, dim_minus);
    for (int k = 0; k < inner; ++k) sigma(k, k) = sv(k);
    b = svd.matrixU() * sigma * svd.matrixV().adjoint();
    w_block = svd.matrixU() *
              Matrix::Identity(dim_plus, dim_minus) * svd.matrixV().adjoint();
    break;
  }

  Matrix a = Matrix::Zero(dim, dim);
  a.topRightCorner(dim_plus, dim_minus) = b;
  a.bottomLeftCorner(dim_minus, dim_plus) = b.adjoint();

  std::optional<Matrix> omega;
  if (with_omega) {
    Matrix w = Matrix::Zero(dim, dim);
    w.topRightCorner(dim_plus, dim_minus) = w_block;
    w.bottomLeftCorner(dim_minus, dim_plus) = w_block.adjoint();
    omega = w;
  }
  return validate_structure(gamma, a, omega, tol);
}

MatrixPath generate_path(uint64_t seed, int dim, int n_terms,
                         std::optional<double> plateau, double a, double b,
                         bool periodic) {
  if (n_terms < 1) throw ConfigError("path needs n_terms >= 1");
  Rng rng(seed, 2000);
  std::vector<PathTerm> terms;
  if (plateau) {
    // constant + powers of (x - x0) with exponent >= 3, so A' and A'' vanish
    // at x0 and the clamped evaluator is C^2
    const double x0 = *plateau;
    terms.push_back({TermKind::Poly, 0, hermitian_gaussian(rng, dim, 1.0)});
    for (int k = 3; k <= n_terms + 2; ++k) {
      const Matrix coeff = hermitian_gaussian(rng, dim, 1.0 / (k * k));
      double binom = 1.0;
      for (int m = 0; m <= k; ++m) {
        const double c = binom * std::pow(-x0, k - m);
        terms.push_back({TermKind::Poly, m, c * coeff});
        binom = binom * (k - m) / (m + 1.0);
      }
    }
    return MatrixPath(a, b, std::move(terms), plateau);
  }
  terms.push_back({TermKind::Poly, 0, hermitian_gaussian(rng, dim, 1.0)});
  for (int k = 1; k <= n_terms; ++k) {
    terms.push_back({TermKind::Cos, k, hermitian_gaussian(rng, dim, 1.0 / (k * k))});
    terms.push_back({TermKind::Sin, k, hermitian_gaussian(rng, dim, 1.0 / (k * k))});
  }
  if (!periodic) {
    terms.push_back({TermKind::Poly, 1, hermitian_gaussian(rng, dim, 0.5)});
  }
  return MatrixPath(a, b, std::move(terms), std::nullopt);
}

OrthoProjection generate_projection(uint64_t seed, int dim, int rank) {
  if (rank < 0 || rank > dim) throw ConfigError("projection rank out of range");
  if (rank == 0) {
    return make_projection(Matrix::Zero(dim, dim), 1e-10);
  }
  Rng rng(seed, 3000);
  const Matrix g = ginibre(rng, dim, rank);
  Eigen::HouseholderQR<Matrix> qr(g);
  const Matrix q = qr.householderQ() * Matrix::Identity(dim, rank);
  Matrix p = q * q.adjoint();
  p = (p + Matrix(p.adjoint())) / 2.0;
  return make_projection(p, 1e-10);
}

std::vector<double> ThetaGrid::values() const {
  if (count < 1) throw ConfigError("theta grid needs count >= 1");
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = 0.5 * (lo + hi);
    return out;
  }
  for (int i = 0; i < count; ++i) out[i] = lo + (hi - lo) * i / (count - 1);
  return out;
}

double ScenarioConfig::tol(const std::string& name, double fallback) const {
  auto it = tolerances.find(name);
  return it == tolerances.end() ? fallback : it->second;
}

nlohmann::json ScenarioConfig::to_json() const {
  nlohmann::json j;
  j["seed"] = seed;
  j["dim"] = dim;
  j["kernel_dim"] = kernel_dim;
  j["suite"] = suite;
  j["instances"] = instances;
  j["workers"] = workers;
  j["tolerances"] = tolerances;
  j["t_grid"] = {{"t0", t_grid.t0}, {"ratio", t_grid.ratio}, {"count", t_grid.count}};
  j["theta_grid"] = {{"lo", theta_grid.lo}, {"hi", theta_grid.hi}, {"count", theta_grid.count}};
  j["x_grid"] = {{"X", x_grid.X}, {"n_points", x_grid.n_points}};
  j["out"] = out;
  return j;
}

ScenarioConfig ScenarioConfig::from_json(const nlohmann::json& j) {
  ScenarioConfig c;
  try {
    if (j.contains("seed")) c.seed = j.at("seed").get<uint64_t>();
    if (j.contains("dim")) c.dim = j.at("dim").get<int>();
    if (j.contains("kernel_dim")) c.kernel_dim = j.at("kernel_dim").get<int>();
    if (j.contains("suite")) c.suite = j.at("suite").get<std::string>();
    if (j.contains("instances")) c.instances = j.at("instances").get<int>();
    if (j.contains("workers")) c.workers = j.at("workers").get<int>();
    if (j.contains("tolerances")) {
      c.tolerances = j.at("tolerances").get<std::map<std::string, double>>();
    }
    if (j.contains("t_grid")) {
      const auto& t = j.at("t_grid");
      if (t.contains("t0")) c.t_grid.t0 = t.at("t0").get<double>();
      if (t.contains("ratio")) c.t_grid.ratio = t.at("ratio").get<double>();
      if (t.contains("count")) c.t_grid.count = t.at("count").get<int>();
    }
    if (j.contains("theta_grid")) {
      const auto& t = j.at("theta_grid");
      if (t.contains("lo")) c.theta_grid.lo = t.at("lo").get<double>();
      if (t.contains("hi")) c.theta_grid.hi = t.at("hi").get<double>();
      if (t.contains("count")) c.theta_grid.count = t.at("count").get<int>();
    }
    if (j.contains("x_grid")) {
      const auto& t = j.at("x_grid");
      if (t.contains("X")) c.x_grid.X = t.at("X").get<double>();
      if (t.contains("n_points")) c.x_grid.n_points = t.at("n_points").get<int>();
    }
    if (j.contains("out")) c.out = j.at("out").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad scenario config: ") + e.what());
  }
  if (c.dim < 1) throw ConfigError("field 'dim': must be >= 1");
  if (c.kernel_dim < 0 || c.kernel_dim > c.dim) {
    throw ConfigError("field 'kernel_dim': must lie in [0, dim]");
  }
  if (c.instances < 1) throw ConfigError("field 'instances': must be >= 1");
  if (c.workers < 1) throw ConfigError("field 'workers': must be >= 1");
  for (const auto& [name, value] : c.tolerances) {
    if (!(value > 0.0)) throw ConfigError("field 'tolerances." + name + "': must be > 0");
  }
  return c;
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void add_check(InstanceReport& inst, const std::string& name, bool pass,
               double residual, const std::string& detail = "") {
  inst.checks.push_back({name, pass, residual, detail});
}

// --- per-suite instance runners --------------------------------------------

void run_structure_instance(const ScenarioConfig& cfg, InstanceReport& inst) {
  Rng rng(inst.seed, 1);
  const int dim = rng.uniform_int(2, std::min(16, std::max(2, cfg.dim)));
  const int dim_plus = rng.uniform_int(0, dim);
  const int dim_minus = dim - dim_plus;
  const int kernel = rng.uniform_int(0, std::min(dim_plus, dim_minus));
  const bool with_omega = dim_plus == dim_minus && rng.uniform() < 0.5;

  const DiracStructure s =
      generate_structure(inst.seed, dim_plus, dim_minus, kernel, with_omega);
  double max_res = 0.0;
  for (const auto& [name, res] : s.residuals) max_res = std::max(max_res, res);
  add_check(inst, "structure_residuals", max_res <= 1e-10 * dim, max_res);

  const int sig = kernel_signature(s);
  const int ind = ind_a_plus(s);
  add_check(inst, "signature_equals_chiral_index", sig == ind,
            std::abs(sig - ind), "sig=" + std::to_string(sig));

  const DiracStructure again =
      generate_structure(inst.seed, dim_plus, dim_minus, kernel, with_omega);
  const double regen = max_abs(s.a_op.m - again.a_op.m) + max_abs(s.gamma - again.gamma);
  add_check(inst, "generator_deterministic", regen == 0.0, regen);
}

void run_s2_instance(const ScenarioConfig& cfg, InstanceReport& inst, int id,
                     int negatives) {
  const bool negative = id < negatives;
  Rng rng(inst.seed, 2);
  if (negative) {
    int dim_plus, dim_minus;
    if (id == 0) {
      dim_plus = 1;  // the scalar model with no admissible boundary projection
      dim_minus = 0;
    } else {
      dim_plus = rng.uniform_int(1, 5);
      dim_minus = dim_plus;
      while (dim_minus == dim_plus) dim_minus = rng.uniform_int(0, 5);
    }
    const DiracStructure s = generate_structure(inst.seed, dim_plus, dim_minus,
                                                std::min(dim_plus, dim_minus), false);
    bool threw = false;
    try {
      aps_projection(s);
    } catch (const NoGammaSymmetricProjection&) {
      threw = true;
    }
    add_check(inst, "aps_rejects_nonzero_signature", threw, threw ? 0.0 : 1.0,
              "dims=(" + std::to_string(dim_plus) + "," + std::to_string(dim_minus) + ")");
    const auto [n_plus, n_minus] = deficiency_indices(s);
    add_check(inst, "deficiency_indices_differ", n_plus != n_minus,
              n_plus == n_minus ? 1.0 : 0.0);
    return;
  }

  const int m = rng.uniform_int(1, std::max(1, cfg.dim / 2));
  const int kernel = rng.uniform_int(0, std::min(2, m));
  const DiracStructure s = generate_structure(inst.seed, m, m, kernel, false);
  const OrthoProjection p_plus = aps_projection(s);
  const SymmetryCheck sym = is_gamma_symmetric(p_plus, s);
  add_check(inst, "aps_gamma_symmetric", sym.residual <= 1e-10, sym.residual);

  SpectralData spec = spectral_factorize(s.a_op);
  const OrthoProjection p_pos = spectral_projection(spec, {IntervalSelector::open_positive()});
  const OrthoProjection p_geq =
      spectral_projection(spec, {IntervalSelector::closed_nonnegative()});
  auto min_eig = [](const Matrix& m_in) {
    SpectralData sd = spectral_factorize(make_hermitian(m_in, 1e-8));
    return sd.eigenvalues.size() ? sd.eigenvalues(0) : 0.0;
  };
  const double lower = min_eig(p_plus.p - p_pos.p);
  const double upper = min_eig(p_geq.p - p_plus.p);
  add_check(inst, "aps_between_spectral_projections",
            lower >= -1e-10 && upper >= -1e-10, std::min(lower, upper));

  const auto [n_plus, n_minus] = deficiency_indices(s);
  add_check(inst, "deficiency_indices_balanced", n_plus == n_minus,
            std::abs(n_plus - n_minus));
}

OrthoProjection build_commuting_projection(const DiracStructure& s, Rng& rng,
                                           std::string* branch_log = nullptr) {
  SpectralData spec = spectral_factorize(s.a_op);
  const double thresh = spec.zero_threshold();
  const int n = static_cast<int>(spec.eigenvalues.size());
  Matrix p = Matrix::Zero(s.dim, s.dim);

  for (int i = 0; i < n; ++i) {
    const double l = spec.eigenvalues(i);
    if (l <= thresh) continue;  // handle each +-pair from its positive member
    const bool aps_branch = rng.uniform() < 0.5;
    const int j = n - 1 - i;  // mirrored index of the -l eigenvector
    if (std::abs(spec.eigenvalues(j) + l) > 1e-6 * std::max(1.0, std::abs(l))) {
      throw StructureViolation("spectrum is not symmetric under sign flip");
    }
    const auto v_pos = spec.eigenvectors.col(i);
    const auto v_neg = spec.eigenvectors.col(j);
    if (aps_branch) {
      p += v_pos * v_pos.adjoint();
    } else {
      p += v_neg * v_neg.adjoint();
    }
    if (branch_log) *branch_log += aps_branch ? "+" : "-";
  }

  // kernel Lagrangian: one grading half of ker A (omega-invariant and
  // compatible with gamma by the pairing of the halves)
  std::vector<int> zero_idx;
  for (int i = 0; i < n; ++i) {
    if (std::abs(spec.eigenvalues(i)) <= thresh) zero_idx.push_back(i);
  }
  if (!zero_idx.empty()) {
    if (!s.omega) throw MissingGrading("kernel selection needs the grading");
    Matrix k(s.dim, zero_idx.size());
    for (size_t c = 0; c < zero_idx.size(); ++c) k.col(c) = spec.eigenvectors.col(zero_idx[c]);
    Matrix m_omega = k.adjoint() * (*s.omega) * k;
    m_omega = (m_omega + Matrix(m_omega.adjoint())) / 2.0;
    SpectralData ws = spectral_factorize(make_hermitian(m_omega, 1e-8));
    const bool plus_half = rng.uniform() < 0.5;
    for (Eigen::Index c = 0; c < ws.eigenvalues.size(); ++c) {
      const bool is_plus = ws.eigenvalues(c) > 0.0;
      if (is_plus == plus_half) {
        const CVector vec = k * ws.eigenvectors.col(c);
        p += vec * vec.adjoint();
      }
    }
    if (branch_log) *branch_log += plus_half ? "K+" : "K-";
  }
  return make_projection(p, std::max(s.tol, 1e-9));
}

void run_s5_instance(const ScenarioConfig& cfg, InstanceReport& inst) {
  Rng rng(inst.seed, 3);
  const int m = rng.uniform_int(1, std::max(1, std::min(3, cfg.dim / 2)));
  const int kernel = rng.uniform() < 0.4 ? std::min(1, m) : 0;
  const DiracStructure s = generate_structure(inst.seed, m, m, kernel, true);
  const OrthoProjection p = build_commuting_projection(s, rng);

  CutoffFunction phi;
  phi.kind = CutoffFunction::Kind::SmoothBump;
  phi.plateau_end = 1.0;
  phi.support_end = 3.0;

  const double match_tol = cfg.tol("s5_match", 1e-3);
  const SupertraceIdentityReport rep =
      verify_supertrace_identity(s, p, phi, cfg.t_grid, match_tol);
  add_check(inst, "supertrace_sign_match", rep.matching_sign != "none",
            std::min(rep.residual_minus, rep.residual_plus), rep.matching_sign);
  add_check(inst, "supertrace_residual",
            std::min(rep.residual_minus, rep.residual_plus) <= match_tol,
            std::min(rep.residual_minus, rep.residual_plus));

  int t_tag = 0;
  for (double t : {0.2, 0.5}) {
    const double exact = halfline_heat_trace(s, p, phi, true, t);
    const NumericTrace numeric = heat_trace_numeric(s, p, phi, true, t, cfg.x_grid);
    const double bar = 2.0 * numeric.richardson_error + 1e-8;
    add_check(inst, "oracle_agreement_" + std::to_string(t_tag++),
              std::abs(exact - numeric.value) <= bar, std::abs(exact - numeric.value),
              "t=" + format_double(t) + " bar=" + format_double(bar));
  }
}

void run_s6_instance(const ScenarioConfig& cfg, InstanceReport& inst) {
  Rng rng(inst.seed, 4);
  const int m = rng.uniform_int(1, 2);
  const DiracStructure base = generate_structure(inst.seed, m, m, 0, true);
  const DoubledStructure doubled = make_doubled(base);
  const OrthoProjection p = doubled_aps_projection(doubled);

  const DeformationReport rep = verify_deformation_family(
      doubled, p, cfg.theta_grid.values(), cfg.x_grid);
  add_check(inst, "family_all_wellposed", rep.all_wellposed,
            rep.all_wellposed ? 0.0 : 1.0);
  add_check(inst, "family_lipschitz", rep.lipschitz_bound_check <= 2.0 + 1e-9,
            rep.lipschitz_bound_check);
  add_check(inst, "family_pair_index_constant", rep.pair_index_constant,
            rep.pair_index_constant ? 0.0 : 1.0);
  const double dtheta = (cfg.theta_grid.hi - cfg.theta_grid.lo) /
                        std::max(1, cfg.theta_grid.count - 1);
  const double bound = rep.eigenvalue_jump_rate * dtheta;
  add_check(inst, "family_eigenvalue_jumps", rep.max_eigenvalue_jump <= bound + 1e-12,
            rep.max_eigenvalue_jump, "C=" + format_double(rep.eigenvalue_jump_rate));
}

void run_s7_instance(const ScenarioConfig& cfg, InstanceReport& inst) {
  Rng rng(inst.seed, 5);
  const int dim = rng.uniform_int(2, std::max(2, std::min(8, cfg.dim * 2)));

  MatrixPath path = generate_path(inst.seed, dim, 3, std::nullopt, 0.0, 1.5);
  for (int attempt = 0; attempt < 50; ++attempt) {
    SpectralData sa = spectral_factorize(make_hermitian(path.value(path.a()), 1e-9));
    SpectralData sb = spectral_factorize(make_hermitian(path.value(path.b()), 1e-9));
    const double ga = sa.eigenvalues.cwiseAbs().minCoeff();
    const double gb = sb.eigenvalues.cwiseAbs().minCoeff();
    if (ga > 0.05 && gb > 0.05) break;
    path = generate_path(inst.seed + 7919 * (attempt + 1), dim, 3, std::nullopt, 0.0, 1.5);
  }

  const OrthoProjection p =
      generate_projection(inst.seed ^ 0xabcdULL, dim, rng.uniform_int(0, dim));
  const OrthoProjection q =
      generate_projection(inst.seed ^ 0x1234ULL, dim, rng.uniform_int(0, dim));

  const IntervalIndexReport rep =
      verify_interval_index_identity(path, p, q, cfg.t_grid, cfg.tol("propagate", 1e-10));
  add_check(inst, "index_identity_integer", rep.line2_residual_twice == 0,
            static_cast<double>(rep.line2_residual_twice),
            "index=" + std::to_string(rep.index));
  add_check(inst, "integral_term_vanishes",
            std::abs(rep.integral_term) <= 1e-8 + rep.integral_error,
            std::abs(rep.integral_term), "bar=" + format_double(rep.integral_error));
  add_check(inst, "index_identity_line1", rep.line1_residual <= 1e-6 + rep.integral_error,
            rep.line1_residual);
  add_check(inst, "sf_methods_agree", rep.sf_methods_agree,
            rep.sf_methods_agree ? 0.0 : 1.0);
}

void run_s9_instance(const ScenarioConfig& cfg, InstanceReport& inst, int id) {
  Rng rng(inst.seed, 6);
  const int variant = id % 3;
  if (variant == 0) {
    // constant reduced coefficient from a graded structure, circle split
    const int m = rng.uniform_int(1, 3);
    const DiracStructure s = generate_structure(inst.seed, m, m, 0, true);
    const OmegaReduction red = omega_reduce(s, nullptr);
    SpectralData spec = spectral_factorize(red.a_plus);
    const OrthoProjection p_geq =
        spectral_projection(spec, {IntervalSelector::closed_nonnegative()});
    std::vector<PathTerm> constant{{TermKind::Poly, 0, red.a_plus.m}};
    const MatrixPath path(0.0, 2.0 * M_PI, constant);
    const GlueingReport rep = glueing_check_circle(path, p_geq, M_PI);
    add_check(inst, "circle_glueing_integer", rep.residual == 0,
              static_cast<double>(rep.residual),
              "ind=" + std::to_string(rep.ind_left) + "," + std::to_string(rep.ind_right));
  } else if (variant == 1) {
    const int dim = rng.uniform_int(2, 5);
    const MatrixPath path =
        generate_path(inst.seed, dim, 2, std::nullopt, 0.0, 2.0 * M_PI, true);
    const OrthoProjection p =
        generate_projection(inst.seed ^ 0x77ULL, dim, rng.uniform_int(0, dim));
    const double cut = M_PI * (0.5 + rng.uniform());
    const GlueingReport rep = glueing_check_circle(path, p, cut);
    add_check(inst, "circle_glueing_integer", rep.residual == 0,
              static_cast<double>(rep.residual));
  } else {
    const int dim = rng.uniform_int(2, 5);
    const MatrixPath path = generate_path(inst.seed, dim, 2, std::nullopt, 0.0, 1.0);
    const OrthoProjection p0 =
        generate_projection(inst.seed ^ 0x11ULL, dim, rng.uniform_int(0, dim));
    const OrthoProjection q0 =
        generate_projection(inst.seed ^ 0x22ULL, dim, rng.uniform_int(0, dim));
    const bool reuse = rng.uniform() < 0.5;
    const OrthoProjection r =
        reuse ? p0 : generate_projection(inst.seed ^ 0x33ULL, dim, rng.uniform_int(0, dim));
    const GlueingReport rep = glueing_check_interval(path, p0, q0, 0.5, r);
    add_check(inst, "interval_glueing_integer", rep.residual == 0,
              static_cast<double>(rep.residual),
              "R=" + std::string(reuse ? "P0" : "random"));
  }
}

void run_ms_instance(const ScenarioConfig& cfg, InstanceReport& inst) {
  Rng rng(inst.seed, 7);
  const int m = rng.uniform_int(1, 3);
  const int kernel = rng.uniform_int(0, std::min(1, m));
  const DiracStructure s = generate_structure(inst.seed, m, m, kernel, true);
  const double L = 2.0 * M_PI;
  const std::vector<double> ts{0.1, 0.37, 1.0, 2.0};
  const double t_min = ts.front();
  const int cutoff = static_cast<int>(std::ceil(
                         L / (2.0 * M_PI) * std::sqrt(std::log(s.dim / 1e-13) / t_min))) +
                     2;
  std::vector<double> values;
  for (double t : ts) values.push_back(circle_supertrace(s, L, t, cutoff));
  double spread = 0.0;
  for (size_t i = 0; i < values.size(); ++i) {
    for (size_t j = i + 1; j < values.size(); ++j) {
      spread = std::max(spread, std::abs(values[i] - values[j]));
    }
  }
  add_check(inst, "supertrace_t_independent", spread < cfg.tol("ms", 1e-10), spread,
            "S=" + format_double(values.front()));
}

void run_s8_instance(const ScenarioConfig& cfg, InstanceReport& inst) {
  Rng rng(inst.seed, 8);
  CutoffFunction phi;
  phi.kind = CutoffFunction::Kind::SmoothBump;
  phi.plateau_end = 2.5;
  phi.support_end = 6.0;

  TGrid grid = cfg.t_grid;
  if (grid.t0 > 0.3) grid.t0 = 0.25;
  if (grid.count < 20) grid.count = 20;

  // scalar Dirichlet block: leading and constant coefficients are known
  {
    std::vector<double> ts = grid.values();
    std::vector<double> samples;
    for (double t : ts) samples.push_back(scalar_block_trace(0.0, true, phi, t));
    const ExpansionFit fit = lim_extract(ts, samples, 0.5, 6, true);
    const double lead_target = phi.integral() / std::sqrt(4.0 * M_PI);
    const double lead_err = std::abs(fit.coeffs.at({0, 0}) - lead_target) /
                            std::abs(lead_target);
    add_check(inst, "dirichlet_leading_coefficient", lead_err <= 0.01, lead_err);
    const double const_err = std::abs(fit.lim - (-phi.value_at_zero() / 4.0));
    add_check(inst, "dirichlet_constant_term", const_err <= 0.02 * 0.25, const_err);
    double max_log = 0.0;
    for (const auto& [jk, v] : fit.coeffs) {
      if (jk.second == 1) max_log = std::max(max_log, std::abs(v));
    }
    add_check(inst, "dirichlet_no_logs", max_log <= 1e-6, max_log);
  }

  // constant-coefficient problem with the spectral boundary projection
  {
    const double sigma = 0.3 + 0.2 * rng.uniform();
    Matrix gamma(2, 2), a(2, 2);
    gamma << Complex(0, 1), 0, 0, Complex(0, -1);
    a << 0, sigma, sigma, 0;
    const DiracStructure s = validate_structure(gamma, a, std::nullopt, 1e-10);
    const OrthoProjection p_plus = aps_projection(s);
    const ExpansionFitReport rep = heat_expansion_fit(s, p_plus, phi, grid, 6);
    add_check(inst, "aps_low_order_logs_vanish", rep.low_order_logs_vanish,
              rep.max_low_order_log);
    add_check(inst, "aps_all_logs_small", rep.max_any_log <= 1e-6, rep.max_any_log,
              "sigma=" + format_double(sigma));
    const double lead_target = 2.0 * phi.integral() / std::sqrt(4.0 * M_PI);
    const double lead_err =
        std::abs(rep.fit.coeffs.at({0, 0}) - lead_target) / lead_target;
    add_check(inst, "aps_leading_coefficient", lead_err <= 0.01, lead_err);
  }
}

void run_identities_instance(const ScenarioConfig& cfg, InstanceReport& inst, int id) {
  Rng rng(inst.seed, 9);
  if (id == 0) {
    // exhaustive sweep over diagonal configurations up to dim 4
    long long cases = 0, failures = 0;
    const double entries[3] = {-1.0, 0.0, 1.5};
    for (int dim = 1; dim <= 4; ++dim) {
      const int n_a = static_cast<int>(std::pow(3, dim));
      for (int ai = 0; ai < n_a; ++ai) {
        RealVector diag(dim);
        int rest = ai;
        for (int k = 0; k < dim; ++k) {
          diag(k) = entries[rest % 3];
          rest /= 3;
        }
        Matrix a = Matrix::Zero(dim, dim);
        for (int k = 0; k < dim; ++k) a(k, k) = diag(k);
        for (int pi = 0; pi < (1 << dim); ++pi) {
          Matrix p = Matrix::Zero(dim, dim);
          for (int k = 0; k < dim; ++k) {
            if (pi & (1 << k)) p(k, k) = 1.0;
          }
          const ProjectionIdentityReport rep = projection_index_identities(
              HermitianOperator{a, 1e-12}, make_projection(p, 1e-12));
          ++cases;
          if (!rep.chain1_holds || !rep.chain2_holds) ++failures;
        }
      }
    }
    add_check(inst, "identities_exhaustive_diagonal", failures == 0,
              static_cast<double>(failures), std::to_string(cases) + " cases");
    return;
  }
  const int dim = rng.uniform_int(1, std::max(1, cfg.dim));
  Matrix a = hermitian_gaussian(rng, dim, 1.0);
  if (rng.uniform() < 0.4 && dim >= 2) {
    // plant a kernel
    SpectralData spec = spectral_factorize(make_hermitian(a, 1e-9));
    Matrix v = spec.eigenvectors;
    RealVector vals = spec.eigenvalues;
    vals(rng.uniform_int(0, dim - 1)) = 0.0;
    a = v * vals.asDiagonal().toDenseMatrix().cast<Complex>() * v.adjoint();
    a = (a + Matrix(a.adjoint())) / 2.0;
  }
  const OrthoProjection p =
      generate_projection(inst.seed ^ 0x99ULL, dim, rng.uniform_int(0, dim));
  const ProjectionIdentityReport rep =
      projection_index_identities(HermitianOperator{a, 1e-9}, p);
  add_check(inst, "identities_chain1", rep.chain1_holds, rep.chain1_holds ? 0.0 : 1.0);
  add_check(inst, "identities_chain2", rep.chain2_holds, rep.chain2_holds ? 0.0 : 1.0);
}

void run_instance(const ScenarioConfig& cfg, InstanceReport& inst, int id,
                  int s2_negatives) {
  try {
    if (cfg.suite == "structure") {
      run_structure_instance(cfg, inst);
    } else if (cfg.suite == "s2") {
      run_s2_instance(cfg, inst, id, s2_negatives);
    } else if (cfg.suite == "s5") {
      run_s5_instance(cfg, inst);
    } else if (cfg.suite == "s6") {
      run_s6_instance(cfg, inst);
    } else if (cfg.suite == "s7") {
      run_s7_instance(cfg, inst);
    } else if (cfg.suite == "s9") {
      run_s9_instance(cfg, inst, id);
    } else if (cfg.suite == "ms") {
      run_ms_instance(cfg, inst);
    } else if (cfg.suite == "s8") {
      run_s8_instance(cfg, inst);
    } else if (cfg.suite == "identities") {
      run_identities_instance(cfg, inst, id);
    } else {
      throw ConfigError("unknown suite '" + cfg.suite + "'");
    }
  } catch (const std::exception& e) {
    add_check(inst, "exception", false, 1.0, e.what());
  }
  inst.pass = true;
  for (const auto& c : inst.checks) inst.pass = inst.pass && c.pass;
}

}  // namespace

std::string report_hash(const std::vector<InstanceReport>& instances) {
  uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  std::vector<const InstanceReport*> sorted;
  for (const auto& inst : instances) sorted.push_back(&inst);
  std::sort(sorted.begin(), sorted.end(),
            [](const InstanceReport* a, const InstanceReport* b) { return a->id < b->id; });
  for (const auto* inst : sorted) {
    feed(std::to_string(inst->id));
    feed(std::to_string(inst->seed));
    for (const auto& c : inst->checks) {
      feed(c.name);
      feed(c.pass ? "1" : "0");
      feed(format_double(c.residual));
      feed(c.detail);
    }
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

RunReport run_suite(const ScenarioConfig& config) {
  const auto t_start = std::chrono::steady_clock::now();

  static const std::vector<std::string> known{"structure", "s2", "s5", "s6",
                                              "s7", "s9", "ms", "s8", "identities"};
  if (std::find(known.begin(), known.end(), config.suite) == known.end()) {
    throw ConfigError("unknown suite '" + config.suite + "'");
  }

  const int n = config.instances;
  const int s2_negatives = std::max(1, (n + 5) / 6);
  std::vector<InstanceReport> instances(n);
  for (int i = 0; i < n; ++i) {
    instances[i].id = i;
    instances[i].seed = config.seed + i;
  }

  std::atomic<int> next{0};
  auto worker = [&]() {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= n) break;
      run_instance(config, instances[i], i, s2_negatives);
    }
  };
  const int n_workers = std::max(1, std::min(config.workers, n));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  RunReport report;
  report.config = config;
  report.instances = std::move(instances);
  report.pass = true;
  for (const auto& inst : report.instances) report.pass = report.pass && inst.pass;
  report.version = kVersion;
  report.commit = kCommit;
  report.hash = report_hash(report.instances);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

  if (!config.out.empty()) {
    std::ofstream os(config.out);
    if (!os) throw ConfigError("cannot open output path '" + config.out + "'");
    os << report.to_json().dump(2) << "\n";

    std::ofstream csv(config.out + ".csv");
    csv << "instance,seed,check,pass,residual,detail\r\n";
    for (const auto& inst : report.instances) {
      for (const auto& c : inst.checks) {
        std::string detail = c.detail;
        for (auto& ch : detail) {
          if (ch == ',') ch = ';';
        }
        csv << inst.id << "," << inst.seed << "," << c.name << "," << (c.pass ? 1 : 0)
            << "," << format_double(c.residual) << "," << detail << "\r\n";
      }
    }
  }
  return report;
}

nlohmann::json RunReport::to_json() const {
  nlohmann::json j;
  j["config"] = config.to_json();
  j["pass"] = pass;
  j["wall_seconds"] = wall_seconds;
  j["version"] = version;
  j["commit"] = commit;
  j["hash"] = hash;
  nlohmann::json insts = nlohmann::json::array();
  for (const auto& inst : instances) {
    nlohmann::json ji;
    ji["id"] = inst.id;
    ji["seed"] = inst.seed;
    ji["pass"] = inst.pass;
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : inst.checks) {
      nlohmann::json jc;
      jc["name"] = c.name;
      jc["pass"] = c.pass;
      if (std::isfinite(c.residual)) {
        jc["residual"] = c.residual;
      } else {
        jc["residual"] = format_double(c.residual);  // no NaN in JSON output
      }
      if (!c.detail.empty()) jc["detail"] = c.detail;
      checks.push_back(jc);
    }
    ji["checks"] = checks;
    insts.push_back(ji);
  }
  j["instances"] = insts;
  return j;
}

}  // namespace diracbvp
