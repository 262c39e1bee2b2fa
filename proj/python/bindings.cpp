#include "semidiff/config.hpp"
#include "semidiff/diffusion.hpp"
#include "semidiff/experiment.hpp"
#include "semidiff/sampler.hpp"
#include "semidiff/scalarization.hpp"
#include "semidiff/task.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace semidiff;

namespace {

ConditionalTask gaussian_task(const Mat& A, const Vec& b, const Mat& cov, const std::string& name) {
    return ConditionalTask::gaussian({A, b}, cov, {}, name);
}

py::dict axioms_dict(const AxiomReport& r) {
    py::dict d;
    d["n_samples"] = r.n_samples;
    d["homogeneity"] = r.homogeneity;
    d["reverse_triangle"] = r.reverse_triangle;
    d["square_property_checked"] = r.square_property_checked;
    d["square_property"] = r.square_property;
    d["passed"] = r.passed();
    d["first_violation"] = r.first_violation ? py::object(py::str(r.first_violation->axiom)) : py::object(py::none());
    return d;
}

}  // namespace

PYBIND11_MODULE(_semidiff, m) {
    m.doc() = "semidiff core bindings";
    m.attr("__version__") = artifact_version();

    m.def("alpha", &alpha, py::arg("t"));
    m.def("sigma2", &sigma2, py::arg("t"));

    py::class_<Scalarization>(m, "Scalarization")
        .def_static("linear", &Scalarization::linear, py::arg("weights"))
        .def_static("chebyshev", &Scalarization::chebyshev, py::arg("smoothing_temp") = 0.0)
        .def_static("lp", &Scalarization::lp, py::arg("p"))
        .def_property_readonly("id", &Scalarization::id)
        .def("__call__", [](const Scalarization& s, const Vec& u) { return evaluate(s, u); })
        .def("subgradient", [](const Scalarization& s, const Vec& u) { return subgradient(s, u); })
        .def("__repr__", [](const Scalarization& s) { return "<Scalarization " + s.id() + ">"; });

    m.def(
        "check_axioms",
        [](const Scalarization& s, int k, std::size_t n_samples, std::uint64_t seed) {
            Rng rng = make_rng(seed);
            return axioms_dict(check_axioms(s, k, n_samples, rng));
        },
        py::arg("scalarization"), py::arg("k"), py::arg("n_samples") = 10000, py::arg("seed") = 0);

    py::class_<ConditionalTask>(m, "ConditionalTask")
        .def_static("gaussian", &gaussian_task, py::arg("A"), py::arg("b"), py::arg("cov"), py::arg("name") = "")
        .def_property_readonly("d_x", &ConditionalTask::d_x)
        .def_property_readonly("d_y", &ConditionalTask::d_y)
        .def_property_readonly("name", &ConditionalTask::name)
        .def("density", &ConditionalTask::density, py::arg("x"), py::arg("y"))
        .def("conditional_mean", &ConditionalTask::conditional_mean, py::arg("y"))
        .def(
            "oracle_score",
            [](const ConditionalTask& t, const Mat& x, const Mat& y, const Vec& times) {
                return t.oracle_score(x, y, times);
            },
            py::arg("x"), py::arg("y"), py::arg("t"))
        .def(
            "sample_pairs",
            [](const ConditionalTask& t, Eigen::Index n, std::uint64_t seed) {
                Rng rng = make_rng(seed);
                return t.sample_pairs(n, rng);
            },
            py::arg("n"), py::arg("seed") = 0)
        .def(
            "sample_oracle",
            [](const ConditionalTask& t, const Mat& y, int n_steps, std::uint64_t seed) {
                SamplerConfig cfg;
                cfg.n_steps = n_steps;
                Rng rng = make_rng(seed);
                return reverse_sde_sample(t.oracle_field(), y, cfg, rng);
            },
            py::arg("y"), py::arg("n_steps") = 200, py::arg("seed") = 0,
            "Reverse-SDE samples driven by the exact score, one column per column of y.");

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def_readonly("name", &ExperimentConfig::name)
        .def_readonly("seeds", &ExperimentConfig::seeds)
        .def_property_readonly("mode", [](const ExperimentConfig& c) { return to_string(c.mode); })
        .def_property_readonly("hash", [](const ExperimentConfig& c) { return config_hash(c); })
        .def("validate", &ExperimentConfig::validate)
        .def("plan", [](const ExperimentConfig& c) { return describe_plan(c); })
        .def("to_json", [](const ExperimentConfig& c) { return to_json(c).dump(); });

    m.def("load_config", &load_config, py::arg("path"));
    m.def("parse_config", [](const std::string& text) { return parse_config(nlohmann::json::parse(text)); },
          py::arg("text"));
    m.def(
        "run_experiment",
        [](const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
            RunSummary s;
            {
                py::gil_scoped_release release;
                s = run_experiment(cfg, out_dir);
            }
            py::dict d;
            d["dir"] = s.dir;
            d["rows"] = s.rows;
            d["warnings"] = s.warnings;
            return d;
        },
        py::arg("config"), py::arg("out_dir"));
}
