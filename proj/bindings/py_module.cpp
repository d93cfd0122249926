#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>

#include "diracbvp/glueing.hpp"
#include "diracbvp/harness.hpp"
#include "diracbvp/interval.hpp"
#include "diracbvp/version.hpp"

namespace py = pybind11;
using namespace diracbvp;

namespace {

OrthoProjection projection_from_matrix(const Matrix& p, double tol) {
  return make_projection(p, tol);
}

MatrixPath path_from_terms(
    double a, double b,
    const std::vector<std::tuple<std::string, int, Matrix>>& terms,
    std::optional<double> plateau) {
  std::vector<PathTerm> parsed;
  for (const auto& [kind, k, coeff] : terms) {
    TermKind tk;
    if (kind == "poly") {
      tk = TermKind::Poly;
    } else if (kind == "cos") {
      tk = TermKind::Cos;
    } else if (kind == "sin") {
      tk = TermKind::Sin;
    } else {
      throw ConfigError("term kind must be poly, cos, or sin");
    }
    parsed.push_back({tk, k, coeff});
  }
  return MatrixPath(a, b, std::move(parsed), plateau);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Boundary value problems for operators gamma (d/dx + A) on "
            "finite-dimensional coefficient spaces: spectral boundary "
            "projections, spectral flow, eta/xi invariants, half-line heat "
            "kernels, interval indices, and glueing identities.";
  m.attr("__version__") = kVersion;

  py::register_exception<Error>(m, "DiracBvpError");

  py::class_<HermitianOperator>(m, "HermitianOperator")
      .def(py::init([](const Matrix& mat, double tol) {
             return make_hermitian(mat, tol);
           }),
           py::arg("matrix"), py::arg("tol") = 1e-10)
      .def_property_readonly("matrix",
                             [](const HermitianOperator& h) { return h.m; });

  py::class_<OrthoProjection>(m, "OrthoProjection")
      .def(py::init(&projection_from_matrix), py::arg("matrix"), py::arg("tol") = 1e-9)
      .def_property_readonly("matrix", [](const OrthoProjection& p) { return p.p; })
      .def_readonly("rank", &OrthoProjection::rank);

  py::class_<DiracStructure>(m, "DiracStructure")
      .def_property_readonly("gamma", [](const DiracStructure& s) { return s.gamma; })
      .def_property_readonly("a", [](const DiracStructure& s) { return s.a_op.m; })
      .def_property_readonly("omega",
                             [](const DiracStructure& s) -> std::optional<Matrix> {
                               return s.omega;
                             })
      .def_readonly("dim", &DiracStructure::dim)
      .def_readonly("residuals", &DiracStructure::residuals);

  m.def(
      "validate_structure",
      [](const Matrix& gamma, const Matrix& a, std::optional<Matrix> omega, double tol) {
        return validate_structure(gamma, a, omega, tol);
      },
      py::arg("gamma"), py::arg("a"), py::arg("omega") = std::nullopt,
      py::arg("tol") = 1e-10);

  m.def("aps_projection", &aps_projection);
  m.def(
      "is_gamma_symmetric",
      [](const OrthoProjection& p, const DiracStructure& s) {
        const auto check = is_gamma_symmetric(p, s);
        return py::make_tuple(check.holds, check.residual);
      },
      py::arg("p"), py::arg("structure"));
  m.def("symmetric_extension_check", &symmetric_extension_check);
  m.def("fredholm_pair_index", &fredholm_pair_index);
  m.def("kernel_signature", &kernel_signature);
  m.def("ind_a_plus", &ind_a_plus);
  m.def(
      "is_wellposed",
      [](const OrthoProjection& p, const DiracStructure& s) {
        const WellPosedReport rep = is_wellposed(p, s);
        py::dict d;
        d["gamma_symmetric"] = rep.gamma_symmetric;
        d["gamma_residual"] = rep.gamma_residual;
        d["pair_index"] = rep.pair_index;
        d["wellposed"] = rep.wellposed;
        d["domain_caveat"] = rep.domain_caveat;
        return d;
      },
      py::arg("p"), py::arg("structure"));

  m.def(
      "eta_function",
      [](const Matrix& a, double s) {
        return eta_function(make_hermitian(a, 1e-9), s);
      },
      py::arg("a"), py::arg("s"));
  m.def(
      "eta_invariant",
      [](const Matrix& a) { return eta_invariant(make_hermitian(a, 1e-9)); },
      py::arg("a"));
  m.def(
      "xi_invariant",
      [](const Matrix& a) { return xi_invariant(make_hermitian(a, 1e-9)).value(); },
      py::arg("a"));

  py::class_<MatrixPath>(m, "MatrixPath")
      .def(py::init(&path_from_terms), py::arg("a"), py::arg("b"), py::arg("terms"),
           py::arg("plateau_x0") = std::nullopt)
      .def("value", &MatrixPath::value)
      .def("derivative", &MatrixPath::derivative)
      .def("validate", &MatrixPath::validate, py::arg("grid_points") = 33)
      .def_property_readonly("dim", &MatrixPath::dim)
      .def("to_json", [](const MatrixPath& p) { return p.to_json().dump(); })
      .def_static("from_json", [](const std::string& text) {
        return MatrixPath::from_json(nlohmann::json::parse(text));
      });

  m.def(
      "spectral_flow",
      [](const MatrixPath& path, int grid) {
        const FlowReport rep = spectral_flow(path, grid);
        py::dict d;
        d["sf"] = rep.sf.value();
        d["sf_crossings"] = rep.sf_crossings.value();
        d["xi_start"] = rep.xi_start.value();
        d["xi_end"] = rep.xi_end.value();
        d["method_agreement"] = rep.method_agreement;
        d["partial"] = rep.partial;
        py::list crossings;
        for (const auto& c : rep.crossings) {
          py::dict cd;
          cd["x"] = c.x;
          cd["branch"] = c.branch;
          cd["dir"] = c.dir;
          crossings.append(cd);
        }
        d["crossings"] = crossings;
        return d;
      },
      py::arg("path"), py::arg("grid") = 32);

  py::class_<CutoffFunction>(m, "CutoffFunction")
      .def(py::init([](double plateau_end, double support_end, const std::string& kind) {
             CutoffFunction phi;
             phi.plateau_end = plateau_end;
             phi.support_end = support_end;
             phi.kind = kind == "smooth-bump" ? CutoffFunction::Kind::SmoothBump
                                              : CutoffFunction::Kind::SmoothedIndicator;
             return phi;
           }),
           py::arg("plateau_end") = 1.0, py::arg("support_end") = 3.0,
           py::arg("kind") = "smooth-bump")
      .def("__call__", &CutoffFunction::operator())
      .def("integral", &CutoffFunction::integral);

  m.def("sommerfeld_kernel", &sommerfeld_kernel, py::arg("structure"),
        py::arg("p_plus"), py::arg("x"), py::arg("y"), py::arg("t"),
        py::arg("use_quadrature") = false);
  m.def("halfline_heat_trace", &halfline_heat_trace, py::arg("structure"), py::arg("p"),
        py::arg("phi"), py::arg("insert_omega"), py::arg("t"));
  m.def(
      "heat_trace_numeric",
      [](const DiracStructure& s, const OrthoProjection& p, const CutoffFunction& phi,
         bool insert_omega, double t, double X, int n_points) {
        const NumericTrace out =
            heat_trace_numeric(s, p, phi, insert_omega, t, HeatGrid{X, n_points});
        return py::make_tuple(out.value, out.richardson_error);
      },
      py::arg("structure"), py::arg("p"), py::arg("phi"), py::arg("insert_omega"),
      py::arg("t"), py::arg("X") = 12.0, py::arg("n_points") = 600);
  m.def(
      "lim_extract",
      [](const std::vector<double>& t, const std::vector<double>& f, double p, int max_j,
         bool logs) {
        const ExpansionFit fit = lim_extract(t, f, p, max_j, logs);
        py::dict d;
        d["p"] = fit.p;
        d["lim"] = fit.lim;
        d["residual"] = fit.residual;
        d["conditioning"] = fit.conditioning;
        py::dict coeffs;
        for (const auto& [jk, v] : fit.coeffs) {
          coeffs[py::str(std::to_string(jk.first) + "," + std::to_string(jk.second))] = v;
        }
        d["coeffs"] = coeffs;
        return d;
      },
      py::arg("t_values"), py::arg("values"), py::arg("p"), py::arg("max_j"),
      py::arg("include_logs") = false);
  m.def("circle_supertrace", &circle_supertrace, py::arg("structure"), py::arg("L"),
        py::arg("t"), py::arg("mode_cutoff"), py::arg("tail_tol") = 1e-12);
  m.def("deficiency_indices", &deficiency_indices);

  m.def(
      "interval_index",
      [](const MatrixPath& path, const OrthoProjection& p, const OrthoProjection& q,
         double tolerance, bool full) {
        const IntervalIndexReport rep =
            full ? verify_interval_index_identity(path, p, q, TGrid{}, tolerance)
                 : interval_index(path, p, q, tolerance);
        py::dict d;
        d["kernel_dim"] = rep.kernel_dim;
        d["cokernel_dim"] = rep.cokernel_dim;
        d["index"] = rep.index;
        if (full) {
          d["sf"] = rep.sf.value();
          d["pair_index_left"] = rep.pair_index_left;
          d["pair_index_right"] = rep.pair_index_right;
          d["integral_term"] = rep.integral_term;
          d["line1_residual"] = rep.line1_residual;
          d["line2_residual"] = 0.5 * static_cast<double>(rep.line2_residual_twice);
        }
        return d;
      },
      py::arg("path"), py::arg("p"), py::arg("q"), py::arg("tolerance") = 1e-10,
      py::arg("full") = false);

  py::class_<DoubledStructure>(m, "DoubledStructure")
      .def_property_readonly("structure",
                             [](const DoubledStructure& d) { return d.structure; })
      .def_property_readonly("tau", [](const DoubledStructure& d) { return d.tau; })
      .def_readonly("base_dim", &DoubledStructure::base_dim);

  m.def("make_doubled", &make_doubled);
  m.def("doubled_aps_projection", &doubled_aps_projection);
  m.def(
      "p_theta",
      [](const OrthoProjection& p, const Matrix& tau, double theta) {
        const DeformationFamily family = make_deformation_family(p, tau, 1e-8);
        return p_theta(family, theta);
      },
      py::arg("p"), py::arg("tau"), py::arg("theta"));
  m.def(
      "projection_index_identities",
      [](const Matrix& a, const OrthoProjection& p) {
        const ProjectionIdentityReport rep =
            projection_index_identities(make_hermitian(a, 1e-9), p);
        py::dict d;
        d["ind_nonneg_flipped_complement"] = rep.ind_nonneg_flipped_complement;
        d["ind_complement_positive"] = rep.ind_complement_positive;
        d["ind_positive"] = rep.ind_positive;
        d["ind_nonneg"] = rep.ind_nonneg;
        d["kernel_dim"] = rep.kernel_dim;
        d["chain1_holds"] = rep.chain1_holds;
        d["chain2_holds"] = rep.chain2_holds;
        return d;
      },
      py::arg("a"), py::arg("p"));

  m.def("generate_structure", &generate_structure, py::arg("seed"), py::arg("dim_plus"),
        py::arg("dim_minus"), py::arg("kernel_dim") = 0, py::arg("with_omega") = false,
        py::arg("tol") = -1.0);
  m.def("generate_path", &generate_path, py::arg("seed"), py::arg("dim"),
        py::arg("n_terms") = 3, py::arg("plateau") = std::nullopt, py::arg("a") = 0.0,
        py::arg("b") = 2.0, py::arg("periodic") = false);
  m.def("generate_projection", &generate_projection, py::arg("seed"), py::arg("dim"),
        py::arg("rank"));

  m.def(
      "run_suite",
      [](const std::string& config_json) {
        const ScenarioConfig cfg =
            ScenarioConfig::from_json(nlohmann::json::parse(config_json));
        return run_suite(cfg).to_json().dump();
      },
      py::arg("config_json"),
      "Run a verification suite from a scenario config JSON string; returns the "
      "report as JSON.");
}
