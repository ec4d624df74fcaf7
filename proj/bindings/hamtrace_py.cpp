#include "hamtrace/config.hpp"
#include "hamtrace/galerkin.hpp"
#include "hamtrace/index_stability.hpp"
#include "hamtrace/iterated_integrals.hpp"
#include "hamtrace/monodromy.hpp"
#include "hamtrace/spectral_oracle.hpp"
#include "hamtrace/sturm_liouville.hpp"
#include "hamtrace/threebody.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace hamtrace;

namespace {

Problem problem_from_json(const std::string& text) { return parse_problem_config(text); }

} // namespace

PYBIND11_MODULE(_hamtrace, m) {
    m.doc() = "trace formulas and spectral oracles for twisted-periodic linear "
              "Hamiltonian systems";

    py::register_exception<config_error>(m, "ConfigError");
    py::register_exception<domain_error>(m, "DomainError");

    py::class_<MatrixPath>(m, "MatrixPath")
        .def_static("constant", &MatrixPath::constant, py::arg("matrix"), py::arg("T"))
        .def_static(
            "builtin",
            [](const std::string& name, const std::map<std::string, double>& params) {
                std::vector<std::pair<std::string, double>> ps(params.begin(), params.end());
                return make_builtin(name, ps);
            },
            py::arg("name"), py::arg("params"))
        .def_static(
            "tabulated",
            [](std::vector<double> t, std::vector<Mat> v, const std::string& interp) {
                return MatrixPath::tabulated(std::move(t), std::move(v),
                                             interp == "linear" ? Interp::Linear : Interp::Cubic);
            },
            py::arg("times"), py::arg("values"), py::arg("interp") = "cubic")
        .def("__call__", &MatrixPath::eval, py::arg("t"))
        .def_property_readonly("dim", &MatrixPath::dim)
        .def_property_readonly("period", &MatrixPath::period);

    py::class_<BoundaryData>(m, "BoundaryData")
        .def_static("make", &BoundaryData::make, py::arg("S"), py::arg("nu"), py::arg("T"))
        .def_readonly("S", &BoundaryData::S)
        .def_readonly("nu", &BoundaryData::nu)
        .def_readonly("omega", &BoundaryData::omega)
        .def_readonly("T", &BoundaryData::T);

    py::class_<Problem>(m, "Problem")
        .def_static("from_json", &problem_from_json, py::arg("text"))
        .def_readonly("n", &Problem::n)
        .def_readonly("B", &Problem::B)
        .def_readonly("D", &Problem::D)
        .def_readonly("bc", &Problem::bc);

    py::class_<FundamentalSolution>(m, "FundamentalSolution")
        .def("__call__", &FundamentalSolution::eval, py::arg("t"))
        .def_property_readonly("endpoint", &FundamentalSolution::at_T)
        .def_property_readonly("sympl_drift", &FundamentalSolution::sympl_drift);

    m.def(
        "integrate_fundamental",
        [](const MatrixPath& B, cplx lambda, const MatrixPath* D, double tol) {
            return integrate_fundamental(B, lambda, D, tol);
        },
        py::arg("B"), py::arg("lambda") = cplx(0, 0), py::arg("D") = nullptr,
        py::arg("tol") = 1e-10);

    py::class_<MonodromyReport>(m, "MonodromyReport")
        .def_readonly("M", &MonodromyReport::M)
        .def_readonly("eigenvalues", &MonodromyReport::eigenvalues)
        .def_readonly("classification", &MonodromyReport::classification)
        .def_readonly("e_total", &MonodromyReport::e_total);

    m.def(
        "monodromy",
        [](const MatrixPath& B, const BoundaryData& bc, double tol) {
            return monodromy(B, bc, {bc.omega}, tol);
        },
        py::arg("B"), py::arg("bc"), py::arg("tol") = 1e-10);

    py::class_<TraceReport>(m, "TraceReport")
        .def_readonly("values", &TraceReport::values)
        .def_readonly("method", &TraceReport::method)
        .def_readonly("closed_form_m1", &TraceReport::closed_form_m1)
        .def_readonly("closed_form_m2", &TraceReport::closed_form_m2);

    m.def("trace_power", &trace_power, py::arg("B"), py::arg("D"), py::arg("bc"),
          py::arg("m_max"), py::arg("tol") = 1e-11);
    m.def("trace_power_special", &trace_power_special, py::arg("B"), py::arg("D"), py::arg("bc"),
          py::arg("hyp_tol") = 1e-10, py::arg("tol") = 1e-11);

    py::class_<IdentityResult>(m, "IdentityResult")
        .def_readonly("closed_form", &IdentityResult::closed_form)
        .def_readonly("partial_sum", &IdentityResult::partial_sum)
        .def_readonly("tail_value", &IdentityResult::tail_value)
        .def_readonly("tail_bound", &IdentityResult::tail_bound);

    m.def("identity_suite", &identity_suite, py::arg("nu"), py::arg("alpha"), py::arg("m"),
          py::arg("K") = 10000);

    py::class_<EigenvalueHit>(m, "EigenvalueHit")
        .def_readonly("lam", &EigenvalueHit::lambda)
        .def_readonly("multiplicity", &EigenvalueHit::multiplicity)
        .def_readonly("residual", &EigenvalueHit::residual);

    py::class_<SpectrumSlice>(m, "SpectrumSlice")
        .def_readonly("eigenvalues", &SpectrumSlice::eigenvalues)
        .def_readonly("method", &SpectrumSlice::method)
        .def("total_multiplicity", &SpectrumSlice::total_multiplicity);

    m.def("eigenvalues_by_shooting", &eigenvalues_by_shooting, py::arg("B"), py::arg("D"),
          py::arg("bc"), py::arg("window"), py::arg("grid"), py::arg("tol") = 1e-10,
          py::arg("sqrt_density") = false);

    py::class_<PowerSum>(m, "PowerSum")
        .def_readonly("value", &PowerSum::value)
        .def_readonly("error_bound", &PowerSum::error_bound);

    m.def("reciprocal_power_sum", &reciprocal_power_sum, py::arg("slice"), py::arg("m"));

    py::class_<TruncatedDeterminant>(m, "TruncatedDeterminant")
        .def_readonly("value", &TruncatedDeterminant::value)
        .def_readonly("levels", &TruncatedDeterminant::levels)
        .def_readonly("values", &TruncatedDeterminant::values)
        .def_readonly("extrapolated", &TruncatedDeterminant::extrapolated)
        .def_readonly("rate", &TruncatedDeterminant::rate);

    m.def("truncated_fredholm", &truncated_fredholm, py::arg("B"), py::arg("D"), py::arg("bc"),
          py::arg("alpha"), py::arg("N"));

    py::class_<SturmLiouvilleProblem>(m, "SturmLiouvilleProblem")
        .def(py::init<MatrixPath, MatrixPath, MatrixPath, MatrixPath, Mat, cplx>(), py::arg("P"),
             py::arg("Q"), py::arg("R"), py::arg("R1"), py::arg("Sbar"), py::arg("nu"));

    m.def("lagrangian_trace", &lagrangian_trace, py::arg("slp"), py::arg("m_max"),
          py::arg("tol") = 1e-11);
    m.def(
        "krein_sums",
        [](const MatrixPath& R, double T) {
            KreinData kd{R, T};
            return krein_sums(kd);
        },
        py::arg("R"), py::arg("T"));

    // three-body surface
    auto tb = m.def_submodule("threebody");
    tb.def("beta_of_masses", &threebody::beta_of_masses);
    tb.def("B_path", &threebody::B_path, py::arg("beta"), py::arg("e"), py::arg("t"));
    tb.def("f_closed", &threebody::f_closed, py::arg("beta"), py::arg("omega"),
           py::arg("tol_res") = 1e-4, py::arg("tol_pole") = 1e-6);
    tb.def("f_quadrature", &threebody::f_quadrature, py::arg("beta"), py::arg("omega"),
           py::arg("sign") = -1, py::arg("tol") = 1e-11);
    tb.def("f_eval", &threebody::f_eval, py::arg("beta"), py::arg("omega"));
    tb.def("f_hat", &threebody::f_hat, py::arg("beta"), py::arg("scan") = 256);
    tb.def("g_closed", &threebody::g_closed, py::arg("beta"), py::arg("nu"));
    tb.def("g_hat", &threebody::g_hat, py::arg("beta"), py::arg("scan") = 256);
    tb.def(
        "classify_point",
        [](double beta, double e) {
            auto r = threebody::classify_point(beta, e);
            py::dict d;
            d["verdict"] = r.verdict;
            d["criterion"] = r.criterion;
            d["eigenvalues"] = r.eigenvalues;
            d["configuration"] = r.eigenvalue_configuration;
            return d;
        },
        py::arg("beta"), py::arg("e"));
}
