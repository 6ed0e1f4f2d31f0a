#include "oseen/checks.hpp"
#include "oseen/config.hpp"
#include "oseen/decay_lab.hpp"
#include "oseen/experiments.hpp"
#include "oseen/kernels.hpp"
#include "oseen/potentials.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace oseen;

namespace {

MultiIndex derivative(const std::string& d) {
    if (d == "value") return MultiIndex::value();
    if (d == "dt") return MultiIndex::dt();
    if (d == "d1") return MultiIndex::dx(0);
    if (d == "d2") return MultiIndex::dx(1);
    if (d == "d3") return MultiIndex::dx(2);
    throw py::value_error("derivative must be one of value, d1, d2, d3, dt");
}

const char* kind_name(ConfigIssue::Kind k) {
    switch (k) {
        case ConfigIssue::Kind::Schema: return "schema";
        case ConfigIssue::Kind::Domain: return "domain";
        default: return "path";
    }
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Oseen exterior-flow decay experiments";

    m.def("wake_weight", [](const Vec3& x) { return wake_weight(x); }, py::arg("x"));
    m.def("heat_kernel", [](const Vec3& z, double t, const std::string& d) { return heat_kernel(z, t, derivative(d)); },
          py::arg("z"), py::arg("t"), py::arg("derivative") = "value");
    m.def("stokes_kernel", [](const Vec3& z, double t, const std::string& d) { return stokes_kernel(z, t, derivative(d)); },
          py::arg("z"), py::arg("t"), py::arg("derivative") = "value");
    m.def("oseen_kernel",
          [](const Vec3& z, double t, double tau, const std::string& d) { return oseen_kernel(z, t, tau, derivative(d)); },
          py::arg("z"), py::arg("t"), py::arg("tau"), py::arg("derivative") = "value");

    m.def(
        "initial_potential",
        [](const std::string& kind, const Vec3& center, double radius, const Vec3& direction, const Vec3& x, double t,
           double tau, const std::string& d) {
            InitialField a;
            if (kind == "vector_bump") a = InitialField::vector_bump(center, radius, direction);
            else if (kind == "curl_bump") a = InitialField::curl_bump(center, radius, direction);
            else throw py::value_error("kind must be vector_bump or curl_bump");
            return Vec3(eval_initial_potential(a, x, t, tau, derivative(d)));
        },
        py::arg("kind"), py::arg("center"), py::arg("radius"), py::arg("direction"), py::arg("x"), py::arg("t"),
        py::arg("tau"), py::arg("derivative") = "value");

    py::class_<RateInputs>(m, "RateInputs")
        .def(py::init<>())
        .def_readwrite("zeta1", &RateInputs::zeta1)
        .def_readwrite("zeta2", &RateInputs::zeta2)
        .def_readwrite("q0", &RateInputs::q0)
        .def_readwrite("s0", &RateInputs::s0)
        .def_readwrite("p0", &RateInputs::p0)
        .def_readwrite("kappa1", &RateInputs::kappa1)
        .def_readwrite("q1", &RateInputs::q1)
        .def_readwrite("q1_hat", &RateInputs::q1_hat)
        .def_readwrite("q1_bar", &RateInputs::q1_bar)
        .def_readwrite("alpha", &RateInputs::alpha)
        .def("violations", &RateInputs::violations, py::arg("nonlinear") = false)
        .def_static("compact_regime", &RateInputs::compact_regime, py::arg("zeta"), py::arg("alpha"));

    m.def("predict_linear_rates", [](const RateInputs& in) {
        const auto r = predict_linear_rates(in);
        return py::make_tuple(r.rho1, r.rho2);
    });
    m.def(
        "predict_nonlinear_rates",
        [](const RateInputs& in, double delta) {
            const auto r = predict_nonlinear_rates(in, delta);
            py::dict d;
            d["first"] = r.first;
            d["second"] = r.second;
            d["limit_first"] = r.limit_first;
            d["limit_second"] = r.limit_second;
            return d;
        },
        py::arg("inputs"), py::arg("delta") = 0.0);
    py::register_exception<std::domain_error>(m, "DomainError", PyExc_ValueError);

    m.def("z_bound_phi", &z_bound_phi);
    m.def("z_value", &z_value, py::arg("j"), py::arg("k"), py::arg("epsilon"));
    m.def("z_bound_counterexamples", [](const std::vector<double>& grid) {
        std::vector<double> out;
        for (const auto& c : verify_z_bound(grid).counterexamples) out.push_back(c.epsilon);
        return out;
    });

    m.def("kernel_checks", [](std::uint64_t seed) {
        py::list rows;
        for (const auto& c : kernel_checks(seed)) {
            py::dict d;
            d["name"] = c.name;
            d["tag"] = c.tag;
            d["predicted"] = c.predicted;
            d["measured"] = c.measured;
            d["pass"] = c.pass;
            rows.append(d);
        }
        return rows;
    }, py::arg("seed") = 1);

    m.def("default_config", [] { return default_config().dump(); });
    m.def("validate_config", [](const std::string& text) {
        py::list out;
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            out.append(py::make_tuple("schema", "", std::string("invalid JSON: ") + e.what()));
            return out;
        }
        for (const auto& i : validate_config(doc)) out.append(py::make_tuple(kind_name(i.kind), i.path, i.message));
        return out;
    });
    m.def(
        "run",
        [](const std::string& text) {
            const auto cfg = parse_config(nlohmann::json::parse(text));
            std::ostringstream log;
            int rc;
            {
                py::gil_scoped_release nogil;
                rc = run_experiments(cfg, log);
            }
            return py::make_tuple(rc, log.str());
        },
        py::arg("config_json"));
    m.def("report", [](const std::string& dir) {
        int failed = 0;
        const std::string table = render_report(dir, &failed);
        return py::make_tuple(failed, table);
    });
}
