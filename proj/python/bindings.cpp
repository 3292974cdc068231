#include <sstream>

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tdlab/config.hpp"
#include "tdlab/errors.hpp"
#include "tdlab/limits.hpp"
#include "tdlab/pencil.hpp"
#include "tdlab/pool.hpp"
#include "tdlab/rng.hpp"
#include "tdlab/svg.hpp"
#include "tdlab/sweep.hpp"

namespace py = pybind11;
using namespace tdlab;

namespace {

// Points arrive as JSON text in the config schema; the python side dumps dicts.
PointConfig point(const std::string& js) { return apply_overrides(PointConfig{}, nlohmann::json::parse(js)); }

std::pair<cplx, cplx> taus(const TauSolution& s) { return {s.tau1, s.tau2}; }

std::string csv_text(const CsvTable& t) {
    std::ostringstream os;
    t.write(os);
    return os.str();
}

}  // namespace

PYBIND11_MODULE(_tdlab, m) {
    m.doc() = "NTK ridge regression asymptotics and simulation (C++ core)";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    m.def("builtin_names", &builtin_names);
    m.def("moments", [](const std::string& name) {
        nlohmann::json j = moments(center(builtin(name)));
        return j.dump();
    });

    m.def("solve_tau", [](const std::string& p, cplx z) { return taus(solve_tau(z, point(p).model())); });
    m.def("solve_tau_real", [](const std::string& p) {
        auto mp = point(p).model();
        auto s = solve_tau_real(mp.gamma, mp);
        return py::make_tuple(s.tau1.real(), s.tau2.real(), s.dtau1, s.dtau2);
    });
    m.def("pencil_fixed_point", [](const std::string& p, cplx z) {
        return taus(pencil_fixed_point(z, point(p).model()));
    });
    m.def("tau_residual", [](const std::string& p, cplx t1, cplx t2, cplx z) {
        return tau_residual(t1, t2, z, point(p).model());
    });

    m.def("errors", [](const std::string& p) {
        auto r = error_report(point(p).model());
        return std::map<std::string, double>{{"e_train", r.e_train}, {"e_test", r.e_test}};
    });
    m.def("test_error_components", [](const std::string& p) {
        auto r = test_error_components(point(p).model());
        return r.components.value_or(std::map<std::string, double>{});
    });
    m.def("gcv_check", [](const std::string& p) { return gcv_check(point(p).model()); });

    m.def("limit", [](const std::string& p, const std::string& which) -> double {
        auto mp = point(p).model();
        if (which == "large_width") return limit_large_width(mp);
        if (which == "small_width") return limit_small_width(mp);
        if (which == "k1_ridgeless") return limit_k1_ridgeless(mp);
        if (which == "k2_ridgeless") return limit_k2_ridgeless(mp);
        throw ConfigError("unknown limit '" + which + "'");
    });
    m.def("limit_expansion", [](const std::string& p, const std::string& which) {
        auto mp = point(p).model();
        AsymptoticTerm t;
        if (which == "large_dataset") t = limit_large_dataset(mp);
        else if (which == "small_phi") t = limit_small_phi(mp);
        else throw ConfigError("unknown expansion '" + which + "'");
        return std::make_pair(t.order, t.coefficient);
    });

    m.def(
        "mc_test_error",
        [](const std::string& p, int trials, std::uint64_t seed, int threads) {
            SimResult r;
            {
                py::gil_scoped_release nogil;
                r = mc_test_error(point(p).sim(trials, seed), trials, resolve_threads(threads));
            }
            return py::dict(py::arg("mean") = r.mean, py::arg("stderr") = r.stderr_, py::arg("values") = r.values,
                            py::arg("train_mean") = r.train_mean);
        },
        py::arg("point"), py::arg("trials"), py::arg("seed") = 1, py::arg("threads") = 0);

    m.def("run", [](const std::string& mode, const std::string& config, int threads) {
        SweepConfig c = parse_config(nlohmann::json::parse(config));
        RunOptions o;
        o.threads = resolve_threads(threads);
        py::gil_scoped_release nogil;
        if (mode == "theory") return csv_text(run_theory(c, o));
        if (mode == "limits") return csv_text(run_limits(c, o));
        if (mode == "simulate") return csv_text(run_simulate(c, o));
        if (mode == "validate") return csv_text(run_validate(c, o).table);
        if (mode == "phase") return csv_text(run_phase_diagram(c, o));
        if (mode == "train") return csv_text(run_train(c, o));
        throw ConfigError("unknown mode '" + mode + "'");
    });
    m.def("render_plot", [](const std::string& csv, const std::string& style) {
        std::istringstream is(csv);
        return render_plot(CsvTable::read(is), style);
    });

    m.def("philox_block", [](std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key) {
        return Philox::bijection(counter, key);
    });
}
