#include <doctest.h>

#include <cmath>

#include "diracbvp/harness.hpp"
#include "diracbvp/interval.hpp"

using namespace diracbvp;

namespace {

MatrixPath constant_scalar(double a_val, double a = 0.0, double b = 1.0) {
  Matrix m(1, 1);
  m << a_val;
  std::vector<PathTerm> terms{{TermKind::Poly, 0, m}};
  return MatrixPath(a, b, std::move(terms));
}

MatrixPath scalar_x(double a, double b) {
  std::vector<PathTerm> terms{{TermKind::Poly, 1, Matrix::Identity(1, 1)}};
  return MatrixPath(a, b, std::move(terms));
}

OrthoProjection scalar_proj(double v) {
  Matrix m(1, 1);
  m << v;
  return make_projection(m, 1e-10);
}

}  // namespace

TEST_SUITE("interval") {

TEST_CASE("propagator closed forms") {
  Matrix d(2, 2);
  d << 1, 0, 0, -1;
  std::vector<PathTerm> terms{{TermKind::Poly, 0, d}};
  const MatrixPath path(0.0, 1.0, terms);
  const Propagator prop = propagate(path, 0.0, 1.0, 1e-12);
  Matrix expected(2, 2);
  expected << std::exp(-1.0), 0, 0, std::exp(1.0);
  CHECK(max_abs(prop.t - expected) < 1e-11);

  // separable scalar: f' = -x f gives exp(-1/2)
  const Propagator scalar = propagate(scalar_x(0.0, 1.0), 0.0, 1.0, 1e-12);
  CHECK(std::abs(scalar.t(0, 0) - std::exp(-0.5)) < 1e-11);
}

TEST_CASE("propagator composition") {
  const MatrixPath path = generate_path(3, 4, 3, std::nullopt, 0.0, 1.0);
  const Propagator whole = propagate(path, 0.0, 1.0, 1e-12);
  const Propagator left = propagate(path, 0.0, 0.5, 1e-12);
  const Propagator right = propagate(path, 0.5, 1.0, 1e-12);
  CHECK(max_abs(whole.t - right.t * left.t) < 1e-10);
}

TEST_CASE("propagator reports unreachable tolerance") {
  const MatrixPath path = generate_path(4, 3, 3, std::nullopt, 0.0, 1.0);
  CHECK_THROWS_AS(propagate(path, 0.0, 1.0, 1e-19), ToleranceUnreachable);
}

TEST_CASE("interval index on scalar examples") {
  // a > 0 constant, conditions f(0) = 0 and f(1) = 0: kernel 0, cokernel 1
  const IntervalIndexReport both_ends =
      interval_index(constant_scalar(1.3), scalar_proj(1), scalar_proj(0), 1e-10);
  CHECK(both_ends.kernel_dim == 0);
  CHECK(both_ends.cokernel_dim == 1);
  CHECK(both_ends.index == -1);

  const IntervalIndexReport one_end =
      interval_index(constant_scalar(1.3), scalar_proj(1), scalar_proj(1), 1e-10);
  CHECK(one_end.index == 0);

  // A(x) = x on [-1, 1] with no conditions: Gaussian kernel direction
  const IntervalIndexReport gaussian =
      interval_index(scalar_x(-1.0, 1.0), scalar_proj(0), scalar_proj(1), 1e-10);
  CHECK(gaussian.kernel_dim == 1);
  CHECK(gaussian.cokernel_dim == 0);
  CHECK(gaussian.index == 1);
}

TEST_CASE("index identity on scalar examples") {
  const TGrid grid{0.5, 0.65, 14};
  const IntervalIndexReport gaussian = verify_interval_index_identity(
      scalar_x(-1.0, 1.0), scalar_proj(0), scalar_proj(1), grid);
  CHECK(gaussian.index == 1);
  CHECK(gaussian.sf.value() == doctest::Approx(1.0));
  CHECK(gaussian.pair_index_left == 0);
  CHECK(gaussian.pair_index_right == 0);
  CHECK(gaussian.line2_residual_twice == 0);
  CHECK(std::abs(gaussian.integral_term) <= 1e-8 + gaussian.integral_error);
  CHECK(gaussian.line1_residual <= 1e-6 + gaussian.integral_error);

  const IntervalIndexReport dirichlet = verify_interval_index_identity(
      constant_scalar(2.0), scalar_proj(1), scalar_proj(0), grid);
  CHECK(dirichlet.index == -1);
  CHECK(dirichlet.sf.value() == doctest::Approx(0.0));
  CHECK(dirichlet.pair_index_left == 0);
  CHECK(dirichlet.pair_index_right == 1);
  CHECK(dirichlet.line2_residual_twice == 0);
}

TEST_CASE("integral term vanishes for matrix families") {
  const TGrid grid{0.5, 0.65, 14};
  for (uint64_t seed : {5ULL, 9ULL}) {
    const MatrixPath path = generate_path(seed, 3, 2, std::nullopt, 0.0, 1.5);
    const auto [value, err] = integral_term(path, grid);
    CHECK(std::abs(value) <= 1e-8 + err);
  }
  const auto [cv, ce] = integral_term(constant_scalar(1.0), grid);
  CHECK(cv == 0.0);

  const auto [xv, xe] = integral_term(scalar_x(-1.0, 1.0), grid);
  CHECK(std::abs(xv) <= 1e-10 + xe);
}

TEST_CASE("adjoint duality of the index") {
  // the adjoint boundary problem swaps kernel and cokernel
  for (uint64_t seed = 41; seed <= 45; ++seed) {
    Rng rng(seed, 11);
    const int dim = rng.uniform_int(2, 5);
    const MatrixPath path = generate_path(seed, dim, 2, std::nullopt, 0.0, 1.0);
    const OrthoProjection p = generate_projection(seed ^ 0x5ULL, dim, rng.uniform_int(0, dim));
    const OrthoProjection q = generate_projection(seed ^ 0x6ULL, dim, rng.uniform_int(0, dim));
    const IntervalIndexReport fwd = interval_index(path, p, q, 1e-10);
    // adjoint problem: -d/dx + A with the complementary conditions, realized
    // as the forward problem for -A with projections (I-P, I-Q)
    std::vector<PathTerm> neg_terms;
    for (const auto& term : path.terms()) {
      neg_terms.push_back({term.kind, term.degree_or_freq, Matrix(-term.coeff)});
    }
    const MatrixPath adj_path(path.a(), path.b(), neg_terms);
    const Matrix eye = Matrix::Identity(dim, dim);
    const IntervalIndexReport adj =
        interval_index(adj_path, make_projection(eye - p.p, 1e-9),
                       make_projection(eye - q.p, 1e-9), 1e-10);
    CHECK(adj.index == -fwd.index);
    CHECK(adj.kernel_dim == fwd.cokernel_dim);
    CHECK(adj.cokernel_dim == fwd.kernel_dim);
  }
}

TEST_CASE("index additivity under concatenation") {
  for (uint64_t seed = 51; seed <= 55; ++seed) {
    Rng rng(seed, 12);
    const int dim = rng.uniform_int(2, 5);
    const MatrixPath path = generate_path(seed, dim, 2, std::nullopt, 0.0, 1.0);
    const OrthoProjection p = generate_projection(seed ^ 0x7ULL, dim, rng.uniform_int(0, dim));
    const OrthoProjection q = generate_projection(seed ^ 0x8ULL, dim, rng.uniform_int(0, dim));
    const OrthoProjection r = generate_projection(seed ^ 0x9ULL, dim, rng.uniform_int(0, dim));
    const int whole = interval_index(path, p, q, 1e-10).index;
    const int left = interval_index(path.restricted(0.0, 0.4), p, r, 1e-10).index;
    const int right = interval_index(path.restricted(0.4, 1.0), r, q, 1e-10).index;
    CHECK(whole == left + right);
  }
}

TEST_CASE("index stability under small perturbations") {
  const uint64_t seed = 61;
  Rng rng(seed, 13);
  const int dim = 4;
  const MatrixPath path = generate_path(seed, dim, 2, std::nullopt, 0.0, 1.0);
  const OrthoProjection p = generate_projection(seed ^ 0xaULL, dim, 2);
  const OrthoProjection q = generate_projection(seed ^ 0xbULL, dim, 2);
  const int base = interval_index(path, p, q, 1e-10).index;

  std::vector<PathTerm> perturbed = path.terms();
  Matrix eps = Matrix::Zero(dim, dim);
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) eps(r, c) = rng.complex_normal();
  }
  eps = 1e-3 * (eps + Matrix(eps.adjoint())) / 2.0;
  perturbed.push_back({TermKind::Poly, 0, eps});
  const MatrixPath path2(path.a(), path.b(), perturbed);
  CHECK(interval_index(path2, p, q, 1e-10).index == base);
}

TEST_CASE("random instances satisfy the integer identity") {
  const TGrid grid{0.5, 0.65, 14};
  for (uint64_t seed = 71; seed <= 78; ++seed) {
    Rng rng(seed, 14);
    const int dim = rng.uniform_int(2, 6);
    MatrixPath path = generate_path(seed, dim, 3, std::nullopt, 0.0, 1.5);
    const OrthoProjection p = generate_projection(seed ^ 0xcULL, dim, rng.uniform_int(0, dim));
    const OrthoProjection q = generate_projection(seed ^ 0xdULL, dim, rng.uniform_int(0, dim));
    const IntervalIndexReport rep = verify_interval_index_identity(path, p, q, grid);
    CHECK(rep.line2_residual_twice == 0);
  }
}

}  // TEST_SUITE
