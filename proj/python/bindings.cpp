#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pdint/harness.hpp"

namespace py = pybind11;
using namespace pdint;

namespace {

RunSpec make_spec(const std::string& problem, const std::map<std::string, std::string>& params,
                  const std::string& method, const std::string& correction, const std::string& mode,
                  std::optional<double> atol, std::optional<double> rtol, std::optional<double> h,
                  std::optional<double> t0, std::optional<double> tf, std::optional<double> eps, bool guard) {
    RunSpec s;
    s.problem = problem;
    for (const auto& [k, v] : params) s.params[k] = v;
    s.config.method = parse_method(method);
    s.config.correction = parse_correction(correction);
    s.config.mode = parse_step_mode(mode);
    if (atol) s.config.atol = *atol;
    if (rtol) s.config.rtol = *rtol;
    if (h) s.config.h = *h;
    if (eps) s.config.scaling.epsilon_fixed = *eps;
    s.config.positivity_guard_rejection = guard;
    s.t0 = t0;
    s.tf = tf;
    return s;
}

py::array_t<double> states_array(const Trajectory& t) {
    const std::size_t n = t.states.size(), d = n ? t.states.front().size() : 0;
    py::array_t<double> out({n, d});
    auto view = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) view(i, j) = t.states[i][j];
    return out;
}

py::dict trajectory_dict(const Trajectory& t) {
    py::dict d;
    d["status"] = std::string(to_string(t.status));
    d["message"] = t.message;
    d["t"] = py::array_t<double>(t.times.size(), t.times.data());
    d["y"] = states_array(t);
    d["min_component"] = py::array_t<double>(t.min_component.size(), t.min_component.data());
    d["h_used"] = py::array_t<double>(t.h_used.size(), t.h_used.data());
    d["clip_count"] = t.clip_count;
    d["accepted_steps"] = t.accepted_steps;
    d["rejected_steps"] = t.rejected_steps;
    return d;
}

#define SPEC_ARGS                                                                                                  \
    py::arg("problem"), py::kw_only(), py::arg("params") = std::map<std::string, std::string>{},                  \
        py::arg("method") = "sdirk21", py::arg("correction") = "none", py::arg("mode") = "adaptive",               \
        py::arg("atol") = py::none(), py::arg("rtol") = py::none(), py::arg("h") = py::none(),                     \
        py::arg("t0") = py::none(), py::arg("tf") = py::none(), py::arg("eps") = py::none(),                       \
        py::arg("guard") = false

}  // namespace

PYBIND11_MODULE(_pdint, m) {
    m.doc() = "Positivity-preserving SDIRK integration of production-destruction systems";

    py::register_exception<SpecError>(m, "SpecError", PyExc_ValueError);

    m.def("problem_names", &problem_names);

    m.def(
        "integrate",
        [](const std::string& problem, const std::map<std::string, std::string>& params, const std::string& method,
           const std::string& correction, const std::string& mode, std::optional<double> atol,
           std::optional<double> rtol, std::optional<double> h, std::optional<double> t0, std::optional<double> tf,
           std::optional<double> eps, bool guard) {
            const RunSpec s = make_spec(problem, params, method, correction, mode, atol, rtol, h, t0, tf, eps, guard);
            IntegrateResult r;
            {
                py::gil_scoped_release release;
                r = run_integrate(s);
            }
            py::dict d = trajectory_dict(r.trajectory);
            py::dict inv;
            for (const auto& e : r.invariant_errors) inv[py::str(e.label)] = e.value;
            d["invariant_errors"] = inv;
            d["seconds"] = r.seconds;
            return d;
        },
        SPEC_ARGS, "Integrate one problem; returns a dict of arrays and run statistics.");

    m.def(
        "invariants",
        [](const std::string& problem, const std::map<std::string, std::string>& params, const std::string& method,
           const std::string& correction, const std::string& mode, std::optional<double> atol,
           std::optional<double> rtol, std::optional<double> h, std::optional<double> t0, std::optional<double> tf,
           std::optional<double> eps, bool guard) {
            RunSpec s = make_spec(problem, params, method, correction, mode, atol, rtol, h, t0, tf, eps, guard);
            s.corrections.clear();
            std::vector<InvariantRow> rows;
            {
                py::gil_scoped_release release;
                rows = run_invariants(s);
            }
            py::list out;
            for (const auto& r : rows)
                out.append(py::dict(py::arg("correction") = std::string(to_string(r.correction)),
                                    py::arg("label") = r.label, py::arg("error") = r.error,
                                    py::arg("status") = std::string(to_string(r.status))));
            return out;
        },
        SPEC_ARGS, "Relative invariant errors for none, final and all corrections.");

    m.def(
        "convergence",
        [](const std::string& problem, const std::map<std::string, std::string>& params, const std::string& method,
           const std::string& correction, const std::string& mode, std::optional<double> atol,
           std::optional<double> rtol, std::optional<double> h, std::optional<double> t0, std::optional<double> tf,
           std::optional<double> eps, bool guard, const std::vector<double>& sweep) {
            RunSpec s = make_spec(problem, params, method, correction, mode, atol, rtol, h, t0, tf, eps, guard);
            s.sweep = sweep;
            ConvergenceReport rep;
            {
                py::gil_scoped_release release;
                rep = run_convergence(s);
            }
            py::dict d;
            d["slope"] = rep.slope;
            d["status"] = std::string(to_string(rep.status));
            d["message"] = rep.message;
            std::vector<double> ctl, steps, errs;
            for (const auto& p : rep.points) {
                ctl.push_back(p.control);
                steps.push_back(p.mean_step);
                errs.push_back(p.error);
            }
            d["control"] = ctl;
            d["mean_step"] = steps;
            d["error"] = errs;
            return d;
        },
        SPEC_ARGS, py::arg("sweep") = std::vector<double>{}, "Convergence study; returns the fitted slope.");

    m.def(
        "steptrace",
        [](const std::string& problem, const std::map<std::string, std::string>& params, const std::string& method,
           const std::string& correction, const std::string& mode, std::optional<double> atol,
           std::optional<double> rtol, std::optional<double> h, std::optional<double> t0, std::optional<double> tf,
           std::optional<double> eps, bool guard) {
            const RunSpec s = make_spec(problem, params, method, correction, mode, atol, rtol, h, t0, tf, eps, guard);
            Trajectory t;
            {
                py::gil_scoped_release release;
                t = run_steptrace(s);
            }
            py::dict d;
            d["status"] = std::string(to_string(t.status));
            std::vector<double> ts, hs, mins;
            std::vector<bool> acc;
            for (const auto& a : t.attempts) {
                ts.push_back(a.t);
                hs.push_back(a.h);
                acc.push_back(a.accepted);
                mins.push_back(a.min_predictor_component);
            }
            d["t"] = ts;
            d["h"] = hs;
            d["accepted"] = acc;
            d["min_predictor_component"] = mins;
            return d;
        },
        SPEC_ARGS, "Every attempted step of an adaptive run.");

    m.def(
        "tableau",
        [](const std::string& name) {
            const auto t = tableau(name);
            py::dict d;
            std::vector<std::vector<double>> a(t.stages);
            for (std::size_t i = 0; i < t.stages; ++i) a[i].assign(t.a.row(i).begin(), t.a.row(i).end());
            d["A"] = a;
            d["b"] = t.b;
            d["b_hat"] = t.b_hat;
            d["c"] = t.c;
            d["order"] = t.order;
            d["embedded_order"] = t.embedded_order;
            d["gamma"] = t.gamma;
            return d;
        },
        py::arg("name"));
}
