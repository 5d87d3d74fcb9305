#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "levyfluct/asymptotics.hpp"
#include "levyfluct/montecarlo.hpp"
#include "levyfluct/supremum.hpp"

namespace py = pybind11;
using namespace lf;

namespace {

ModelSpec spec_of(const std::string& kind, double alpha, double a, std::optional<double> d_star) {
    ModelKind k = kind_from_name(kind);
    if (k != ModelKind::SubordinatorMinusDrift) d_star = 0.0;
    return ModelSpec::make(k, alpha, a, d_star);
}

py::array_t<double> field_array(const Field2D& f) {
    py::array_t<double> out({f.tg.size(), f.xg.size()});
    std::copy(f.v.begin(), f.v.end(), out.mutable_data());
    return out;
}

py::array_t<double> vec(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "levyfluct: entrance laws and supremum densities of Levy processes";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<PrerequisiteError>(m, "PrerequisiteError", PyExc_RuntimeError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<InvariantError>(m, "InvariantError", PyExc_RuntimeError);

    m.def(
        "density",
        [](const std::string& kind, double t, std::vector<double> x, double alpha, double a) {
            Model model(spec_of(kind, alpha, a, 0.5));
            std::vector<double> out;
            for (double xi : x) out.push_back(model.p(t, xi));
            return vec(out);
        },
        py::arg("kind"), py::arg("t"), py::arg("x"), py::arg("alpha") = 1.0, py::arg("a") = 0.0);
    m.def(
        "levy_density",
        [](const std::string& kind, std::vector<double> x, double alpha, double a) {
            Model model(spec_of(kind, alpha, a, 0.5));
            std::vector<double> out;
            for (double xi : x) out.push_back(model.levy_density(xi));
            return vec(out);
        },
        py::arg("kind"), py::arg("x"), py::arg("alpha") = 1.0, py::arg("a") = 0.0);
    m.def("time_grid", [](double T, int n, double gamma) { return vec(build_time_grid(T, n, gamma).t); },
          py::arg("T"), py::arg("n"), py::arg("gamma") = 2.0);

    m.def(
        "pipeline",
        [](const std::string& kind, double alpha, double a, std::optional<double> d_star, double T, int n,
           double gamma, double x_min, double x_max, int m_space, const std::string& mode, int space_intervals) {
            Model model(spec_of(kind, alpha, a, d_star));
            SolverOptions o;
            o.space_intervals = space_intervals;
            SpaceMode md = mode == "geometric" ? SpaceMode::Geometric : SpaceMode::Linear;
            QStarSolution sol;
            ExcursionFunctions ex;
            SupremumSolution sup;
            {
                py::gil_scoped_release nogil;
                sol = solve_qstar(model, build_time_grid(T, n, gamma), build_space_grid(x_min, x_max, m_space, md), o);
                ex = excursion_mass(sol, o);
                solve_dual_tail(ex, o);
                sup = supremum_density(model, sol, ex);
            }
            py::dict d;
            d["t"] = vec(sol.q.tg.t);
            d["x"] = vec(sol.q.xg.x);
            d["qstar"] = field_array(sol.q);
            d["f"] = field_array(sup.f);
            d["atom_mass"] = vec(sup.atom_mass);
            d["m_star"] = vec(ex.m_star);
            d["N_star"] = vec(ex.N_star);
            d["m"] = vec(ex.m);
            d["N"] = vec(ex.N);
            d["d_star"] = ex.d_star;
            d["residual_defining"] = sol.residuals.residual_defining;
            d["residual_cross"] = sol.residuals.residual_cross;
            d["renewal_residual"] = renewal_residual(ex);
            return d;
        },
        py::arg("kind"), py::arg("alpha") = 1.0, py::arg("a") = 0.0, py::arg("d_star") = py::none(),
        py::arg("T") = 1.0, py::arg("n") = 40, py::arg("gamma") = 2.0, py::arg("x_min") = 0.05,
        py::arg("x_max") = 4.0, py::arg("m") = 100, py::arg("mode") = "linear", py::arg("space_intervals") = 400);

    m.def(
        "simulate_terminal",
        [](const std::string& kind, double t, std::size_t n_paths, std::uint64_t seed, double alpha, double a) {
            ModelSpec s = spec_of(kind, alpha, a, 0.5);
            std::vector<double> v;
            {
                py::gil_scoped_release nogil;
                v = simulate_terminal(s, t, n_paths, seed);
            }
            return vec(v);
        },
        py::arg("kind"), py::arg("t"), py::arg("n_paths"), py::arg("seed"), py::arg("alpha") = 1.0,
        py::arg("a") = 0.0);
    m.def(
        "estimate_dstar",
        [](double alpha, double a, double t_max, int n_steps, std::size_t n_paths, std::uint64_t seed) {
            ModelSpec s = ModelSpec::make(ModelKind::SubordinatorMinusDrift, alpha, a);
            DStarReport r;
            {
                py::gil_scoped_release nogil;
                r = estimate_dstar_with_checks(s, t_max, n_steps, n_paths, seed);
            }
            py::dict d;
            d["d_star"] = r.d_star;
            d["stderr"] = r.d_star_stderr;
            d["seed_stable"] = r.seed_stable;
            d["doubling_stable"] = r.doubling_stable;
            return d;
        },
        py::arg("alpha") = 1.0, py::arg("a") = 1.0, py::arg("t_max") = 5.0, py::arg("n_steps") = 10000,
        py::arg("n_paths") = 100000, py::arg("seed") = 1);
    m.def("git_blob_sha1", [](const std::string& s) { return git_blob_sha1(s); });
}
