#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <sstream>

#include "flexmatch/asymptotics.hpp"
#include "flexmatch/atlas.hpp"
#include "flexmatch/bounds.hpp"
#include "flexmatch/cli.hpp"
#include "flexmatch/errors.hpp"
#include "flexmatch/graph.hpp"
#include "flexmatch/model.hpp"
#include "flexmatch/rde.hpp"
#include "flexmatch/variational.hpp"

namespace py = pybind11;
using namespace flexmatch;

namespace {

MaximizeOptions grid_options(int grid_n) {
    MaximizeOptions o;
    o.grid_n = grid_n;
    return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Matching rates of 2-type bipartite random graphs under flexibility allocation";

    static py::exception<ParameterError> parameter_error(m, "ParameterError", PyExc_ValueError);
    static py::exception<NumericError> numeric_error(m, "NumericError", PyExc_ArithmeticError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ParameterError& e) {
            py::set_error(parameter_error, e.what());
        } catch (const NumericError& e) {
            py::set_error(numeric_error, e.what());
        }
    });

    py::class_<Allocation>(m, "Allocation")
        .def_static("one_sided", &Allocation::one_sided)
        .def_static("two_sided", &Allocation::two_sided)
        .def_static("custom", &Allocation::custom, py::arg("b_left"), py::arg("b_right"))
        .def_property_readonly("mode", [](const Allocation& a) { return to_string(a.mode); })
        .def_readonly("b_left", &Allocation::b_left)
        .def_readonly("b_right", &Allocation::b_right);

    py::class_<ModelSpec>(m, "ModelSpec")
        .def_static(
            "from_parts",
            [](const Pair& p, const Pair& q, const Matrix2& c) { return ModelSpec::from_parts(p, q, {c}); },
            py::arg("p"), py::arg("q"), py::arg("c"))
        .def_readonly("p", &ModelSpec::p)
        .def_readonly("q", &ModelSpec::q)
        .def_property_readonly("c", [](const ModelSpec& s) { return s.c.c; })
        .def_readonly("lam", &ModelSpec::lambda)
        .def_readonly("big_m", &ModelSpec::big_m)
        .def_readonly("a_left", &ModelSpec::a_left)
        .def_readonly("a_right", &ModelSpec::a_right)
        .def("edge_density", &ModelSpec::edge_density)
        .def("swapped_sides", &ModelSpec::swapped_sides);

    m.def("flex_model", &flex_model, py::arg("budget"), py::arg("alpha"), py::arg("alpha_f"),
          py::arg("allocation") = Allocation::one_sided());
    m.def("eval_F", &eval_F, py::arg("model"), py::arg("t1"), py::arg("t2"));
    m.def("grad_F", &grad_F, py::arg("model"), py::arg("t1"), py::arg("t2"));
    m.def("H_map", &H_map, py::arg("model"), py::arg("t1"), py::arg("t2"));

    py::class_<MaximizerResult>(m, "MaximizerResult")
        .def_readonly("t_star", &MaximizerResult::t_star)
        .def_readonly("f_star", &MaximizerResult::f_star)
        .def_readonly("eta", &MaximizerResult::eta)
        .def_readonly("iterations", &MaximizerResult::iterations)
        .def_readonly("residual", &MaximizerResult::residual);
    m.def(
        "maximize_F", [](const ModelSpec& model, int grid_n) { return maximize_F(model, grid_options(grid_n)); },
        py::arg("model"), py::arg("grid_n") = 401);

    py::class_<EtaPair>(m, "EtaPair")
        .def_readonly("eta_os", &EtaPair::eta_os)
        .def_readonly("eta_ts", &EtaPair::eta_ts)
        .def_readonly("adv_os", &EtaPair::adv_os)
        .def_readonly("os", &EtaPair::os)
        .def_readonly("ts", &EtaPair::ts);
    m.def(
        "eta_pair",
        [](double b, double a, double af, int grid_n) { return eta_pair(b, a, af, grid_options(grid_n)); },
        py::arg("budget"), py::arg("alpha"), py::arg("alpha_f"), py::arg("grid_n") = 401);

    py::class_<LimitReport>(m, "LimitReport")
        .def_readonly("u_os", &LimitReport::u_os)
        .def_readonly("u_ts", &LimitReport::u_ts)
        .def_readonly("y_os_star", &LimitReport::y_os_star)
        .def_readonly("y_ts_star", &LimitReport::y_ts_star)
        .def_readonly("max_phi_ts", &LimitReport::max_phi_ts);
    m.def(
        "phi_limits",
        [](double b, double a, double y) {
            const PhiValues v = phi_limits(b, a, y);
            return py::make_tuple(v.phi_os, v.phi_ts);
        },
        py::arg("budget"), py::arg("alpha"), py::arg("y"));
    m.def("limit_unmatched", &limit_unmatched, py::arg("budget"), py::arg("alpha"));
    m.def("b_star", &b_star);
    m.def("solve_c_B", &solve_c_B, py::arg("budget"));
    m.def("solve_alpha_bar", &solve_alpha_bar, py::arg("budget"));

    py::class_<FmzBounds>(m, "FmzBounds")
        .def_readonly("alpha_star", &FmzBounds::alpha_star)
        .def_readonly("alpha_f_star", &FmzBounds::alpha_f_star)
        .def_readonly("admissible", &FmzBounds::admissible)
        .def_readonly("m_reg", &FmzBounds::m_reg)
        .def_readonly("c_fmz", &FmzBounds::c_fmz)
        .def_readonly("l_fmz", &FmzBounds::l_fmz)
        .def_readonly("u_fmz", &FmzBounds::u_fmz)
        .def_readonly("gamma", &FmzBounds::gamma)
        .def_readonly("lam", &FmzBounds::lambda);
    m.def("fmz_bounds", &fmz_bounds, py::arg("budget"), py::arg("alpha"), py::arg("alpha_f"));

    py::class_<BipartiteGraph>(m, "BipartiteGraph")
        .def_readonly("n", &BipartiteGraph::n)
        .def_readonly("edge_count", &BipartiteGraph::edge_count)
        .def_readonly("supply_types", &BipartiteGraph::supply_types)
        .def_readonly("demand_types", &BipartiteGraph::demand_types)
        .def_readonly("adjacency", &BipartiteGraph::adjacency);
    m.def("sample_graph", &sample_graph, py::arg("model"), py::arg("n"), py::arg("seed"));
    m.def(
        "max_matching", [](const BipartiteGraph& g) { return max_matching(g).size; }, py::arg("graph"));

    py::class_<MonteCarloEstimate>(m, "MonteCarloEstimate")
        .def_readonly("mean", &MonteCarloEstimate::mean)
        .def_readonly("std_err", &MonteCarloEstimate::std_err)
        .def_readonly("fractions", &MonteCarloEstimate::fractions);
    m.def("monte_carlo_rate", &monte_carlo_rate, py::arg("model"), py::arg("n"), py::arg("trials"),
          py::arg("seed"), py::arg("jobs") = 1, py::call_guard<py::gil_scoped_release>());

    py::class_<RdeEstimate>(m, "RdeEstimate")
        .def_readonly("eta_hat", &RdeEstimate::eta_hat)
        .def_readonly("std_err", &RdeEstimate::std_err)
        .def_property_readonly("positivity", [](const RdeEstimate& e) { return e.run.t_history.back(); });
    m.def(
        "rde_matching_rate",
        [](const ModelSpec& model, int pop_size, int iters, int root_samples, std::uint64_t seed, int jobs) {
            RdeOptions o;
            o.pop_size = pop_size;
            o.iters = iters;
            o.root_samples = root_samples;
            o.seed = seed;
            o.jobs = jobs;
            return rde_matching_rate(model, o);
        },
        py::arg("model"), py::arg("pop_size") = 100000, py::arg("iters") = 200,
        py::arg("root_samples") = 1000000, py::arg("seed") = 0, py::arg("jobs") = 1,
        py::call_guard<py::gil_scoped_release>());

    py::class_<DominanceCell>(m, "DominanceCell")
        .def_readonly("budget", &DominanceCell::budget)
        .def_readonly("alpha", &DominanceCell::alpha)
        .def_readonly("alpha_f", &DominanceCell::alpha_f)
        .def_readonly("eta_os", &DominanceCell::eta_os)
        .def_readonly("eta_ts", &DominanceCell::eta_ts)
        .def_readonly("adv_os", &DominanceCell::adv_os)
        .def_property_readonly("verdict", [](const DominanceCell& c) { return to_string(c.verdict); })
        .def_readonly("fmz_admissible", &DominanceCell::fmz_admissible);
    m.def("classify", [](double b, double a, double af, double tie_tol) { return classify(b, a, af, tie_tol); },
          py::arg("budget"), py::arg("alpha"), py::arg("alpha_f"), py::arg("tie_tol") = kDefaultTieTol);
    m.def(
        "sweep",
        [](std::vector<double> budgets, std::tuple<double, double, int> alpha,
           std::tuple<double, double, int> premium, bool gap_axis, int grid_n, int jobs) {
            SweepSpec spec;
            spec.budgets = std::move(budgets);
            spec.alpha = {std::get<0>(alpha), std::get<1>(alpha), std::get<2>(alpha)};
            spec.premium = {std::get<0>(premium), std::get<1>(premium), std::get<2>(premium)};
            spec.premium_axis = gap_axis ? PremiumAxis::Gap : PremiumAxis::Absolute;
            spec.options.grid_n = grid_n;
            spec.jobs = jobs;
            return sweep(spec);
        },
        py::arg("budgets"), py::arg("alpha"), py::arg("premium"), py::arg("gap_axis") = true,
        py::arg("grid_n") = 401, py::arg("jobs") = 1, py::call_guard<py::gil_scoped_release>());
    m.def(
        "crossover_alpha_f",
        [](double b, double a, double search_max) {
            const Crossover c = crossover_alpha_f(b, a, search_max);
            return py::make_tuple(c.alpha_f, c.other_crossings);
        },
        py::arg("budget"), py::arg("alpha"), py::arg("search_max"));

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            const int code = run_cli(args, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command line in-process; returns (exit_code, stdout, stderr).");
}
