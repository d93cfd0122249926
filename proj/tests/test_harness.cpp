#include <doctest.h>

#include <nlohmann/json.hpp>

#include "diracbvp/harness.hpp"

using namespace diracbvp;

TEST_SUITE("harness") {

TEST_CASE("rng streams are independent and deterministic") {
  Rng a(42, 0), b(42, 0), c(42, 1);
  for (int i = 0; i < 100; ++i) {
    const uint64_t va = a.next_u64();
    CHECK(va == b.next_u64());
  }
  bool differs = false;
  Rng a2(42, 0);
  for (int i = 0; i < 10; ++i) {
    if (a2.next_u64() != c.next_u64()) differs = true;
  }
  CHECK(differs);
}

TEST_CASE("structure generator soundness") {
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed, 99);
    const int dp = rng.uniform_int(1, 5);
    const int dm = rng.uniform_int(0, 5);
    const int kernel = rng.uniform_int(0, std::min(dp, dm));
    const DiracStructure s = generate_structure(seed, dp, dm, kernel, false);
    for (const auto& [name, res] : s.residuals) {
      CAPTURE(name);
      CHECK(res <= s.tol);
    }
    CHECK(kernel_signature(s) == dp - dm);
  }
}

TEST_CASE("structure generator determinism and kernel surgery") {
  const DiracStructure s1 = generate_structure(7, 3, 3, 1, true);
  const DiracStructure s2 = generate_structure(7, 3, 3, 1, true);
  CHECK(max_abs(s1.a_op.m - s2.a_op.m) == 0.0);
  CHECK(max_abs(*s1.omega - *s2.omega) == 0.0);

  SpectralData spec = spectral_factorize(s1.a_op);
  int zeros = 0;
  for (Eigen::Index i = 0; i < spec.eigenvalues.size(); ++i) {
    if (std::abs(spec.eigenvalues(i)) <= spec.zero_threshold()) ++zeros;
  }
  CHECK(zeros == 2);  // kernel_dim on each chiral side
}

TEST_CASE("omega infeasible for asymmetric dimensions") {
  CHECK_THROWS_AS(generate_structure(5, 2, 1, 0, true), InfeasibleRequest);
}

TEST_CASE("path generator validates") {
  for (uint64_t seed = 3; seed <= 8; ++seed) {
    const MatrixPath path = generate_path(seed, 4, 3, std::nullopt, 0.0, 2.0);
    path.validate();
  }
  const MatrixPath plateau = generate_path(11, 3, 2, 1.0, 0.0, 2.0);
  plateau.validate();
  CHECK(max_abs(plateau.value(1.3) - plateau.value(1.0)) == 0.0);
}

TEST_CASE("periodic path closes") {
  const MatrixPath path = generate_path(13, 3, 2, std::nullopt, 0.0, 2.0 * M_PI, true);
  CHECK(max_abs(path.value(0.0) - path.value(2.0 * M_PI)) < 1e-12);
}

TEST_CASE("config json round trip and validation") {
  ScenarioConfig cfg;
  cfg.seed = 99;
  cfg.suite = "s7";
  cfg.instances = 5;
  cfg.tolerances["propagate"] = 1e-9;
  const ScenarioConfig back = ScenarioConfig::from_json(cfg.to_json());
  CHECK(back.seed == 99);
  CHECK(back.suite == "s7");
  CHECK(back.instances == 5);
  CHECK(back.tol("propagate", 0.0) == 1e-9);

  nlohmann::json bad = cfg.to_json();
  bad["instances"] = 0;
  CHECK_THROWS_AS(ScenarioConfig::from_json(bad), ConfigError);
  nlohmann::json bad2 = cfg.to_json();
  bad2["tolerances"] = {{"x", -1.0}};
  CHECK_THROWS_AS(ScenarioConfig::from_json(bad2), ConfigError);
}

TEST_CASE("unknown suite raises config error") {
  ScenarioConfig cfg;
  cfg.suite = "nope";
  CHECK_THROWS_AS(run_suite(cfg), ConfigError);
}

TEST_CASE("suite reports are deterministic") {
  ScenarioConfig cfg;
  cfg.suite = "structure";
  cfg.seed = 17;
  cfg.instances = 8;
  cfg.workers = 4;
  const RunReport r1 = run_suite(cfg);
  cfg.workers = 1;  // worker count must not affect the hash
  const RunReport r2 = run_suite(cfg);
  CHECK(r1.pass);
  CHECK(r1.hash == r2.hash);
}

TEST_CASE("identities suite exhaustive instance") {
  ScenarioConfig cfg;
  cfg.suite = "identities";
  cfg.seed = 23;
  cfg.instances = 4;
  const RunReport rep = run_suite(cfg);
  CHECK(rep.pass);
}

TEST_CASE("ms suite on a small run") {
  ScenarioConfig cfg;
  cfg.suite = "ms";
  cfg.seed = 29;
  cfg.instances = 3;
  const RunReport rep = run_suite(cfg);
  CHECK(rep.pass);
}

}  // TEST_SUITE
