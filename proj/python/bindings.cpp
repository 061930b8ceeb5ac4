#include "perhom/builtin_models.hpp"
#include "perhom/errors.hpp"
#include "perhom/model_io.hpp"
#include "perhom/report.hpp"
#include "perhom/verify.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

namespace py = pybind11;
using namespace perhom;

namespace {

py::object from_json(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

SimulationConfig sim_config(double epsilon, std::size_t n_paths, double dt, std::uint64_t seed, unsigned workers) {
    SimulationConfig cfg;
    cfg.epsilon = epsilon;
    cfg.n_paths = n_paths;
    cfg.dt = dt;
    cfg.seed = seed;
    cfg.workers = workers;
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_perhom, m) {
    m.doc() = "Homogenisation of periodic Levy-type processes";
    m.attr("__version__") = PERHOM_VERSION;

    static py::handle error_type = PyErr_NewException("perhom._perhom.PerhomError", PyExc_RuntimeError, nullptr);
    m.attr("PerhomError") = error_type;
    // the instance carries the stable error code, e.g. err.code == "model-invalid"
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object inst = py::reinterpret_borrow<py::object>(error_type)(e.what());
            inst.attr("code") = to_string(e.code());
            PyErr_SetObject(error_type.ptr(), inst.ptr());
        }
    });

    py::class_<LevyTripletModel>(m, "Model")
        .def_property_readonly("name", &LevyTripletModel::name)
        .def_property_readonly("dim", &LevyTripletModel::dim)
        .def_property_readonly("hash", [](const LevyTripletModel& mod) { return model_hash(mod); })
        .def("to_json", [](const LevyTripletModel& mod) { return serialize_model(mod); })
        .def("__repr__", [](const LevyTripletModel& mod) { return "<perhom.Model '" + mod.name() + "'>"; });

    m.def("builtin_model_names", &builtin_model_names);
    m.def("builtin_model", &builtin_model, py::arg("name"));
    m.def("load_model", &load_model, py::arg("path"), "File path, or \"builtin:NAME\".");
    m.def("parse_model", [](const std::string& text) { return parse_model(text); }, py::arg("text"));

    m.def(
        "solve",
        [](const LevyTripletModel& mod, std::vector<int> resolution, unsigned workers) {
            std::optional<SolvedModel> solved;
            {
                py::gil_scoped_release release;
                solved.emplace(solve_model(mod, default_grid(mod, resolution), workers));
            }
            const SolvedModel& s = *solved;
            py::dict out;
            out["resolution"] = s.grid.resolution();
            out["pi"] = s.pi.weights;
            out["beta"] = s.corrector.beta;
            out["mean_drift"] = s.law.mean_drift;
            out["sigma"] = s.law.sigma;
            out["t1"] = s.law.t1;
            out["t2"] = s.law.t2;
            out["t3"] = s.law.t3;
            out["t4"] = s.law.t4;
            out["reduced_path_used"] = s.law.reduced_path_used;
            out["positive_semidefinite"] = s.law.positive_semidefinite;
            return out;
        },
        py::arg("model"), py::arg("resolution") = std::vector<int>{}, py::arg("workers") = 1u);

    m.def(
        "simulate",
        [](const LevyTripletModel& mod, double epsilon, std::size_t n_paths, double dt, std::uint64_t seed,
           unsigned workers) {
            std::optional<PathEnsemble> ens;
            {
                py::gil_scoped_release release;
                const SolvedModel s = solve_model(mod, default_grid(mod), workers);
                ens.emplace(simulate_paths(mod, s.law, sim_config(epsilon, n_paths, dt, seed, workers), &s.corrector, &s.grid));
            }
            const PathEnsemble& e = *ens;
            py::dict out;
            out["endpoints"] = e.endpoints;
            out["ctilde"] = e.ctilde;
            out["large_jumps"] = e.large_jumps;
            out["steps_per_path"] = e.steps_per_path;
            out["dt_used"] = e.dt_used;
            return out;
        },
        py::arg("model"), py::arg("epsilon"), py::arg("n_paths") = 1000, py::arg("dt") = 0.01, py::arg("seed") = 1,
        py::arg("workers") = 1u);

    m.def(
        "verify",
        [](const LevyTripletModel& mod, std::vector<double> epsilons, std::size_t n_paths, double dt,
           std::uint64_t seed, unsigned workers) {
            VerifyConfig cfg;
            cfg.epsilons = std::move(epsilons);
            cfg.sim = sim_config(1.0, n_paths, dt, seed, workers);
            nlohmann::json j;
            {
                py::gil_scoped_release release;
                j = to_json(full_report(mod, cfg));
            }
            return from_json(j);
        },
        py::arg("model"), py::arg("epsilons") = std::vector<double>{0.2, 0.1, 0.05}, py::arg("n_paths") = 1000,
        py::arg("dt") = 0.01, py::arg("seed") = 1, py::arg("workers") = 1u);
}
