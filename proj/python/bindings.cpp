#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "leaky/commands.hpp"
#include "leaky/config.hpp"
#include "leaky/errors.hpp"
#include "leaky/oned.hpp"
#include "leaky/specfun.hpp"
#include "leaky/spectral.hpp"

namespace py = pybind11;
using namespace leaky;

namespace {

CurveSpec curve_from(const std::string& text) {
    try {
        return parse_curve(Json::parse(text));
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("curve is not valid JSON: ") + e.what());
    }
}

py::dict run(const std::string& command, const std::string& config_text) {
    Json doc;
    try {
        doc = Json::parse(config_text);
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    const ExperimentConfig cfg = parse_config(doc);
    CommandResult r;
    if (command == "threshold") {
        r = run_threshold(cfg);
    } else if (command == "bands") {
        r = run_bands(cfg);
    } else if (command == "bound-state") {
        r = run_bound_state(cfg);
    } else if (command == "oned") {
        r = run_oned(cfg);
    } else {
        throw ConfigError("unknown command '" + command + "'");
    }
    py::dict files;
    for (const auto& f : r.files) {
        files[py::str(f.name)] = py::str(f.content);
    }
    py::dict out;
    out["summary"] = r.summary;
    out["files"] = files;
    out["config_hash"] = cfg.hash;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Spectra of leaky curves via Birman-Schwinger matrices";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

    m.def("bessel_k0", &specfun::bessel_k0, py::arg("x"));
    m.def("bessel_k1", &specfun::bessel_k1, py::arg("x"));
    m.def("k_ratio", &specfun::k_ratio, py::arg("x"));

    m.def("run", &run, py::arg("command"), py::arg("config_json"),
          "Run a subcommand on a JSON config; returns summary, files and config_hash.");

    m.def(
        "find_threshold",
        [](const std::string& curve, double alpha, std::size_t n_cell) {
            ThresholdOptions o;
            o.n_cell = n_cell;
            const Threshold t = find_threshold(curve_from(curve), alpha, o);
            py::dict d;
            d["kappa0"] = t.kappa0;
            d["eps0"] = t.eps0;
            d["n_cell"] = t.n_cell;
            d["n_images"] = t.n_images;
            d["mu_at_root"] = t.mu_at_root;
            return d;
        },
        py::arg("curve_json"), py::arg("alpha"), py::arg("n_cell") = 32);

    m.def(
        "line_mu_max",
        [](const std::string& curve, double alpha, double kappa, double window_W, std::size_t n) {
            return mu_max(build_line_bs(curve_from(curve), alpha, kappa, window_W, n));
        },
        py::arg("curve_json"), py::arg("alpha"), py::arg("kappa"), py::arg("window_W"), py::arg("n"));

    m.def(
        "band_structure",
        [](const std::string& curve, double alpha, std::size_t n_theta, std::size_t bands, std::size_t n_cell) {
            BandOptions o;
            o.n_theta = n_theta;
            o.bands = bands;
            o.n_cell = n_cell;
            const BandStructure b = band_structure(curve_from(curve), alpha, o);
            py::dict d;
            d["theta"] = b.theta;
            d["energies"] = b.energies;
            d["status"] = b.status;
            return d;
        },
        py::arg("curve_json"), py::arg("alpha"), py::arg("n_theta") = 17, py::arg("bands") = 2,
        py::arg("n_cell") = 32);

    m.def(
        "square_array_band_bottom",
        [](double depth, double width, double spacing, std::size_t steps_per_period) {
            WellArray1D arr;
            arr.spacing = spacing;
            arr.well.depth = depth;
            arr.well.width = width;
            return band_bottom_1d(arr, steps_per_period).eps0;
        },
        py::arg("depth"), py::arg("width"), py::arg("spacing"), py::arg("steps_per_period") = 400);
}
