#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "vh/angular.hpp"
#include "vh/atoms.hpp"
#include "vh/harvesting.hpp"
#include "vh/oracle.hpp"
#include "vh/specfun.hpp"
#include "vh/survey.hpp"

namespace py = pybind11;

namespace {

vh::QuadTol make_tol(double rtol, double atol) {
    vh::QuadTol t;
    t.rtol = rtol;
    t.atol = atol;
    return t;
}

py::dict scan_to_dict(const vh::ScanResult& r) {
    py::dict out;
    out["axes"] = r.axis_names;
    std::vector<std::string> models;
    for (auto m : r.models) models.push_back(vh::to_string(m));
    out["models"] = models;
    py::list rows;
    for (const auto& row : r.rows) {
        py::dict d;
        d["coords"] = row.coords;
        d["values"] = row.values;
        rows.append(d);
    }
    out["rows"] = rows;
    return out;
}

}  // namespace

PYBIND11_MODULE(_vacharvest, m) {
    m.doc() = "Entanglement harvesting with hydrogenlike detectors";
    m.attr("__version__") = VH_VERSION_STRING;

    py::register_exception<vh::domain_error>(m, "DomainError", PyExc_ValueError);
    py::register_exception<vh::convergence_error>(m, "ConvergenceError", PyExc_RuntimeError);

    py::enum_<vh::ModelKind>(m, "ModelKind")
        .value("em_dipole", vh::ModelKind::em_dipole)
        .value("udw_scalar", vh::ModelKind::udw_scalar)
        .value("udw_derivative", vh::ModelKind::udw_derivative);
    py::enum_<vh::SwitchingVariant>(m, "Switching")
        .value("gaussian", vh::SwitchingVariant::gaussian)
        .value("cropped", vh::SwitchingVariant::cropped);
    py::enum_<vh::Spacing>(m, "Spacing").value("linear", vh::Spacing::linear).value("log", vh::Spacing::log);

    py::class_<vh::Params>(m, "Params")
        .def(py::init<>())
        .def(py::init([](py::kwargs kw) {
            vh::Params p;
            for (auto [k, v] : kw) {
                auto key = k.cast<std::string>();
                if (key == "model")
                    p.model = py::isinstance<py::str>(v) ? vh::model_from_string(v.cast<std::string>()) : v.cast<vh::ModelKind>();
                else if (key == "switching")
                    p.switching.variant = v.cast<std::string>() == "cropped" ? vh::SwitchingVariant::cropped
                                                                             : vh::SwitchingVariant::gaussian;
                else
                    vh::set_param(p, key, v.cast<double>());
            }
            return p;
        }))
        .def_readwrite("model", &vh::Params::model)
        .def_readwrite("a0_omega", &vh::Params::a0_omega)
        .def_readwrite("omega_T", &vh::Params::omega_T)
        .def_readwrite("omega_T_b", &vh::Params::omega_T_b)
        .def_readwrite("d_over_T", &vh::Params::d_over_T)
        .def_readwrite("tba_over_T", &vh::Params::tba_over_T)
        .def_readwrite("psi", &vh::Params::psi)
        .def_readwrite("theta", &vh::Params::theta)
        .def_readwrite("phi", &vh::Params::phi)
        .def_readwrite("coupling", &vh::Params::coupling)
        .def_property(
            "switching", [](const vh::Params& p) { return p.switching.variant; },
            [](vh::Params& p, vh::SwitchingVariant v) { p.switching.variant = v; })
        .def_property(
            "crop_sigmas", [](const vh::Params& p) { return p.switching.crop_sigmas; },
            [](vh::Params& p, double v) { p.switching.crop_sigmas = v; });

    py::class_<vh::PointResult>(m, "PointResult")
        .def_readonly("L_aa", &vh::PointResult::L_aa)
        .def_readonly("L_bb", &vh::PointResult::L_bb)
        .def_readonly("abs_L_ab", &vh::PointResult::abs_L_ab)
        .def_readonly("abs_M", &vh::PointResult::abs_M)
        .def_readonly("N2", &vh::PointResult::N2)
        .def_readonly("N", &vh::PointResult::N)
        .def_readonly("concurrence", &vh::PointResult::concurrence)
        .def_readonly("err_N2", &vh::PointResult::err_N2)
        .def_readonly("log_scale", &vh::PointResult::log_scale)
        .def_readonly("N2_scaled", &vh::PointResult::N2_scaled)
        .def_readonly("err_N2_scaled", &vh::PointResult::err_N2_scaled)
        .def_readonly("harvestable", &vh::PointResult::harvestable)
        .def_readonly("converged", &vh::PointResult::converged)
        .def_readonly("error", &vh::PointResult::error)
        .def("__repr__", [](const vh::PointResult& r) {
            std::ostringstream os;
            os << "PointResult(N2=" << vh::format_double(r.N2) << ", N=" << vh::format_double(r.N)
               << ", harvestable=" << r.harvestable << ")";
            return os.str();
        });

    py::class_<vh::Axis>(m, "Axis")
        .def(py::init([](std::string name, double lo, double hi, int count, vh::Spacing s) {
                 return vh::Axis{std::move(name), lo, hi, count, s};
             }),
             py::arg("name"), py::arg("min"), py::arg("max"), py::arg("count"), py::arg("spacing") = vh::Spacing::linear)
        .def("values", &vh::Axis::values);

    m.def(
        "evaluate",
        [](const vh::Params& p, double rtol, double atol, double threshold_factor) {
            py::gil_scoped_release release;
            return vh::evaluate_point(p, make_tol(rtol, atol), threshold_factor);
        },
        py::arg("params"), py::arg("rtol") = 1e-10, py::arg("atol") = 1e-16, py::arg("threshold_factor") = 10.0);

    m.def(
        "scan",
        [](const std::vector<vh::Axis>& axes, const vh::Params& fixed, const std::vector<vh::ModelKind>& models,
           unsigned threads, double rtol, double atol) {
            vh::ScanGrid g{axes, fixed, models};
            vh::ScanOptions o;
            o.tol = make_tol(rtol, atol);
            o.threads = threads;
            vh::ScanResult r;
            {
                py::gil_scoped_release release;
                r = vh::run_scan(g, o);
            }
            return scan_to_dict(r);
        },
        py::arg("axes"), py::arg("fixed") = vh::Params{}, py::arg("models") = std::vector<vh::ModelKind>{},
        py::arg("threads") = 1, py::arg("rtol") = 1e-10, py::arg("atol") = 1e-16);

    m.def(
        "scan_csv",
        [](const std::vector<vh::Axis>& axes, const vh::Params& fixed, const std::vector<vh::ModelKind>& models,
           unsigned threads) {
            vh::ScanGrid g{axes, fixed, models};
            vh::ScanOptions o;
            o.threads = threads;
            std::ostringstream os;
            {
                py::gil_scoped_release release;
                vh::write_csv(os, vh::run_scan(g, o));
            }
            return os.str();
        },
        py::arg("axes"), py::arg("fixed") = vh::Params{}, py::arg("models") = std::vector<vh::ModelKind>{},
        py::arg("threads") = 1);

    m.def("selfcheck", [] {
        std::vector<vh::OracleReport> r;
        {
            py::gil_scoped_release release;
            r = vh::run_all();
        }
        py::list out;
        for (const auto& x : r) {
            py::dict d;
            d["name"] = x.name;
            d["family"] = x.family;
            d["rel_err"] = x.rel_err;
            d["tolerance"] = x.tolerance;
            d["cases"] = x.cases;
            d["pass"] = x.pass;
            d["note"] = x.note;
            out.append(d);
        }
        return out;
    });

    m.def("negativity2", &vh::negativity2, py::arg("L_aa"), py::arg("L_bb"), py::arg("abs_M"));
    m.def("faddeeva_w", &vh::faddeeva_w);
    m.def("erfc", &vh::erfc_complex);
    m.def("spherical_bessel_j", &vh::spherical_bessel_j, py::arg("l"), py::arg("x"));
    m.def(
        "wigner_3j",
        [](int l1, int l2, int l3, int m1, int m2, int m3) { return vh::wigner_3j({l1, l2, l3, m1, m2, m3}); });
    m.def("wigner_D", [](int l, int mu, int mm, double psi, double theta, double phi) {
        return vh::wigner_D(l, mu, mm, {psi, theta, phi});
    });
    m.def("gaunt_integral", [](const std::vector<std::tuple<int, int, bool>>& idx) {
        std::vector<vh::HarmonicIndex> h;
        for (auto [l, mm, c] : idx) h.push_back({l, mm, c});
        return vh::gaunt_integral(h);
    });
    m.def("radial_overlap", &vh::radial_overlap, py::arg("l"), py::arg("k"), py::arg("a0"));
    m.def("wavefunction_overlap_log10", &vh::wavefunction_overlap_log10, py::arg("d"), py::arg("a0"));
    m.def("time_integral_closed", &vh::time_integral_closed, py::arg("omega_a"), py::arg("omega_b"), py::arg("k"),
          py::arg("t_a"), py::arg("t_b"), py::arg("T"));
    m.def("optimal_orientations", [] {
        std::vector<std::tuple<double, double, double>> out;
        for (const auto& a : vh::optimal_orientations()) out.emplace_back(a.psi, a.theta, a.phi);
        return out;
    });
}
