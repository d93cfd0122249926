#include "diracbvp/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>

namespace diracbvp {

namespace {

struct SpectrumCounts {
  int pos = 0, neg = 0, zero = 0;
};

SpectrumCounts count_spectrum(const HermitianOperator& a, double rank_tol) {
  SpectralData spec = spectral_factorize(a, rank_tol);
  const double thresh = spec.zero_threshold();
  SpectrumCounts c;
  for (Eigen::Index i = 0; i < spec.eigenvalues.size(); ++i) {
    const double l = spec.eigenvalues(i);
    if (std::abs(l) <= thresh) {
      ++c.zero;
    } else if (l > 0) {
      ++c.pos;
    } else {
      ++c.neg;
    }
  }
  return c;
}

}  // namespace

double eta_function(const HermitianOperator& a, double s, double rank_tol) {
  SpectralData spec = spectral_factorize(a, rank_tol);
  const double thresh = spec.zero_threshold();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < spec.eigenvalues.size(); ++i) {
    const double l = spec.eigenvalues(i);
    if (std::abs(l) <= thresh) continue;
    sum += (l > 0 ? 1.0 : -1.0) * std::pow(std::abs(l), -s);
  }
  return sum;
}

int eta_invariant(const HermitianOperator& a, double rank_tol) {
  const SpectrumCounts c = count_spectrum(a, rank_tol);
  return c.pos - c.neg;
}

HalfInt xi_invariant(const HermitianOperator& a, double rank_tol) {
  const SpectrumCounts c = count_spectrum(a, rank_tol);
  return HalfInt::from_halves(c.pos - c.neg + c.zero);
}

namespace {

// Eigenvalue classes at one sample point.
struct Sample {
  double x;
  RealVector eigenvalues;  // ascending
  double gap;              // min |l| over nonzero eigenvalues, +inf if none
  std::vector<int> cls;    // -1, 0, +1 per branch
};

Sample make_sample(const MatrixPath& path, double x, double rank_tol, double scale) {
  Sample s;
  s.x = x;
  SpectralData spec = spectral_factorize(
      make_hermitian(path.value(x), 1e-9 * std::max(1.0, scale)), rank_tol);
  s.eigenvalues = spec.eigenvalues;
  const double thresh = rank_threshold(rank_tol, scale);
  s.gap = std::numeric_limits<double>::infinity();
  s.cls.resize(s.eigenvalues.size());
  for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) {
    const double l = s.eigenvalues(i);
    if (std::abs(l) <= thresh) {
      s.cls[i] = 0;
    } else {
      s.cls[i] = l > 0 ? 1 : -1;
      s.gap = std::min(s.gap, std::abs(l));
    }
  }
  return s;
}

}  // namespace

FlowReport spectral_flow(const MatrixPath& path, int initial_grid, double rank_tol,
                         int max_nodes) {
  FlowReport report;
  const HermitianOperator a_start{path.value(path.a()), 1e-9};
  const HermitianOperator a_end{path.value(path.b()), 1e-9};
  report.xi_start = xi_invariant(a_start, rank_tol);
  report.xi_end = xi_invariant(a_end, rank_tol);
  report.sf = report.xi_end - report.xi_start;

  // global eigenvalue scale for a uniform kernel threshold along the path
  double scale = 0.0;
  for (int i = 0; i <= 16; ++i) {
    const double x = path.a() + (path.b() - path.a()) * i / 16.0;
    scale = std::max(scale, max_abs(path.value(x)));
  }

  initial_grid = std::max(initial_grid, 2);
  std::list<Sample> samples;
  for (int i = 0; i <= initial_grid; ++i) {
    const double x = path.a() + (path.b() - path.a()) * i / initial_grid;
    samples.push_back(make_sample(path, x, rank_tol, scale));
  }

  // refine until each step is below half the spectral gap at its left node
  bool budget_ok = true;
  auto it = samples.begin();
  while (std::next(it) != samples.end()) {
    auto nx = std::next(it);
    const double delta = (path.value(nx->x) - path.value(it->x)).norm();  // Frobenius bound
    const bool fine_enough =
        !std::isfinite(it->gap) || delta < 0.5 * it->gap ||
        (nx->x - it->x) < 1e-15 * (path.b() - path.a());
    if (fine_enough) {
      ++it;
      continue;
    }
    if (static_cast<int>(samples.size()) >= max_nodes) {
      budget_ok = false;
      break;
    }
    const double mid = 0.5 * (it->x + nx->x);
    samples.insert(nx, make_sample(path, mid, rank_tol, scale));
  }

  if (!budget_ok) {
    report.partial = true;
    report.method_agreement = false;
    report.sf_crossings = HalfInt::from_int(0);
    return report;
  }

  // signed crossings: weight +1/2 for classes {0, +}, -1/2 for class -,
  // so the per-branch transition count telescopes to the endpoint formula.
  long long twice_sum = 0;
  for (auto cur = samples.begin(); std::next(cur) != samples.end(); ++cur) {
    const auto nx = std::next(cur);
    const int n = static_cast<int>(cur->cls.size());
    for (int j = 0; j < n; ++j) {
      const int w0 = cur->cls[j] == -1 ? -1 : 1;
      const int w1 = nx->cls[j] == -1 ? -1 : 1;
      if (w0 == w1) continue;
      const int dir = (w1 - w0) / 2;  // +-1
      twice_sum += 2 * dir;
      double x_loc;
      const double l0 = cur->eigenvalues(j), l1 = nx->eigenvalues(j);
      if (cur->cls[j] != 0 && nx->cls[j] != 0 && l1 != l0) {
        x_loc = cur->x + (nx->x - cur->x) * (0.0 - l0) / (l1 - l0);
      } else if (cur->cls[j] == 0) {
        x_loc = cur->x;
      } else {
        x_loc = nx->x;
      }
      report.crossings.push_back({x_loc, j, dir});
    }
  }
  report.sf_crossings = HalfInt::from_halves(twice_sum);
  report.method_agreement = report.sf_crossings == report.sf;
  return report;
}

}  // namespace diracbvp
