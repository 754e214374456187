#include "pdint/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace pdint {

Problem resolve_problem(const RunSpec& spec) {
    try {
        return make_problem(spec.problem, spec.params);
    } catch (const ProblemConfigError& e) {
        throw SpecError(e.what());
    }
}

TimeSpan resolve_span(const RunSpec& spec, const Problem& problem, bool convergence) {
    TimeSpan span = convergence ? problem.convergence_span : problem.run_span;
    if (spec.t0) span.t0 = *spec.t0;
    if (spec.tf) span.tf = *spec.tf;
    if (!std::isfinite(span.t0) || !std::isfinite(span.tf)) throw SpecError("time span must be finite");
    if (!(span.tf > span.t0)) throw SpecError("time span is empty: tf must exceed t0");
    return span;
}

namespace {

void check_config(const SolverConfig& config) {
    try {
        config.validate();
    } catch (const ConfigError& e) {
        throw SpecError(e.what());
    }
    if (config.correction == CorrectionMode::all_stages && !tableau(config.method).stiffly_accurate)
        throw SpecError("all-stages correction needs a stiffly accurate method");
}

Trajectory integrate_checked(const Problem& p, const SolverConfig& config, TimeSpan span) {
    try {
        return integrate(p.model, config, span.t0, span.tf, p.y0);
    } catch (const ConfigError& e) {
        throw SpecError(e.what());
    }
}

std::vector<InvariantError> invariant_errors(const Problem& p, const Trajectory& traj) {
    std::vector<InvariantError> out;
    for (const auto& inv : p.model.invariants()) {
        double e = std::numeric_limits<double>::quiet_NaN();
        try {
            e = invariant_error(traj, inv.w);
        } catch (const ZeroInvariantError&) {
        }
        out.push_back({inv.label, inv.exact, e});
    }
    return out;
}

ExitCode exit_for(RunStatus s) { return s == RunStatus::completed ? ExitCode::completed : ExitCode::solver_failure; }

template <class Fn>
void write_file(const std::string& path, Fn&& fn) {
    if (path.empty()) throw SpecError("no output path given");
    std::ofstream os(path);
    if (!os) throw SpecError("cannot open output file '" + path + "'");
    os << std::setprecision(17);
    fn(os);
    if (!os) throw std::runtime_error("failed writing '" + path + "'");
}

double mean_step(const Trajectory& traj, TimeSpan span) {
    return traj.accepted_steps == 0 ? 0.0 : (span.tf - span.t0) / static_cast<double>(traj.accepted_steps);
}

void warn_kdv_all_stages(const Problem& p, CorrectionMode c, std::ostream& log) {
    if (p.name == "kdv" && c == CorrectionMode::all_stages)
        log << "warning: all-stages correction is known to distort KdV dynamics\n";
}

}  // namespace

IntegrateResult run_integrate(const RunSpec& spec) {
    check_config(spec.config);
    const Problem p = resolve_problem(spec);
    const TimeSpan span = resolve_span(spec, p, false);
    const auto start = std::chrono::steady_clock::now();
    IntegrateResult res;
    res.trajectory = integrate_checked(p, spec.config, span);
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    res.invariant_errors = invariant_errors(p, res.trajectory);
    return res;
}

std::vector<InvariantRow> run_invariants(const RunSpec& spec) {
    std::vector<CorrectionMode> modes = spec.corrections;
    if (modes.empty()) modes = {CorrectionMode::none, CorrectionMode::final_stage, CorrectionMode::all_stages};
    std::vector<InvariantRow> rows;
    for (CorrectionMode m : modes) {
        RunSpec s = spec;
        s.config.correction = m;
        const IntegrateResult r = run_integrate(s);
        for (const auto& e : r.invariant_errors) rows.push_back({m, e.label, e.value, r.trajectory.status});
    }
    return rows;
}

double relative_l2_error(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionError("relative_l2_error: length mismatch");
    Vector diff(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
    const double nb = norm_2(b);
    if (nb == 0.0) throw DegenerateDataError("relative_l2_error: reference is zero");
    return norm_2(diff) / nb;
}

ConvergenceReport run_convergence(const RunSpec& spec) {
    const Problem p = resolve_problem(spec);
    const TimeSpan span = resolve_span(spec, p, true);
    ConvergenceReport rep;
    rep.fixed_step = spec.config.mode == StepMode::fixed;

    std::vector<double> sweep = spec.sweep;
    if (sweep.empty()) {
        if (rep.fixed_step) {
            for (double n : {20.0, 40.0, 80.0}) sweep.push_back((span.tf - span.t0) / n);
        } else {
            sweep = {1e-5, 1e-6, 1e-7, 1e-8};
        }
    }
    if (sweep.size() < 3) throw SpecError("a convergence study needs at least three sweep points");
    for (double v : sweep)
        if (!(v > 0.0) || !std::isfinite(v)) throw SpecError("sweep values must be positive");
    {
        SolverConfig probe = spec.config;
        if (rep.fixed_step) probe.h = sweep.front();
        check_config(probe);
    }

    // Reference: the fourth-order method, same correction, much finer resolution.
    SolverConfig ref = spec.config;
    ref.method = MethodName::sdirk43;
    ref.record_attempts = false;
    ref.record_states = false;
    ref.max_attempts = std::max<std::size_t>(ref.max_attempts, 50'000'000);
    if (rep.fixed_step) {
        ref.h = *std::min_element(sweep.begin(), sweep.end()) / 8.0;
    } else {
        ref.atol = ref.rtol = 1e-14;
        ref.stage_solver.tol = std::min(ref.stage_solver.tol, ref.rtol);
        ref.h = 0.0;
    }
    const Trajectory ref_traj = integrate_checked(p, ref, span);
    if (ref_traj.status != RunStatus::completed) {
        rep.status = ref_traj.status;
        rep.message = "reference run failed: " + ref_traj.message;
        return rep;
    }
    const Vector& y_ref = ref_traj.final_state();

    std::vector<double> xs, ys;
    for (double v : sweep) {
        SolverConfig c = spec.config;
        c.record_attempts = false;
        c.record_states = false;
        if (rep.fixed_step) {
            c.h = v;
        } else {
            c.atol = c.rtol = v;
        }
        const Trajectory t = integrate_checked(p, c, span);
        if (t.status != RunStatus::completed) {
            rep.status = t.status;
            rep.message = "sweep point " + std::to_string(v) + " failed: " + t.message;
            return rep;
        }
        ConvergencePoint pt{v, mean_step(t, span), t.accepted_steps, relative_l2_error(t.final_state(), y_ref)};
        rep.points.push_back(pt);
        xs.push_back(pt.mean_step);
        ys.push_back(pt.error);
    }
    try {
        rep.slope = fit_slope(xs, ys);
    } catch (const DegenerateDataError& e) {
        rep.slope = std::numeric_limits<double>::quiet_NaN();
        rep.message = e.what();
    }
    return rep;
}

Trajectory run_steptrace(const RunSpec& spec) {
    RunSpec s = spec;
    s.config.record_attempts = true;
    return run_integrate(s).trajectory;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    const std::size_t d = traj.empty() ? 0 : traj.states.front().size();
    os << "t";
    for (std::size_t i = 1; i <= d; ++i) os << ",y" << i;
    os << ",min_component,h_used,clip_count\n";
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        os << traj.times[k];
        for (double v : traj.states[k]) os << ',' << v;
        os << ',' << traj.min_component[k] << ',' << traj.h_used[k] << ',' << traj.clip_count[k] << '\n';
    }
}

void write_invariants_csv(std::ostream& os, const std::vector<InvariantRow>& rows) {
    os << "label,correction,E_I\n";
    for (const auto& r : rows) os << r.label << ',' << to_string(r.correction) << ',' << r.error << '\n';
}

void write_convergence_csv(std::ostream& os, const ConvergenceReport& report) {
    os << (report.fixed_step ? "h" : "tol") << ",mean_step,accepted_steps,error,slope\n";
    for (const auto& p : report.points)
        os << p.control << ',' << p.mean_step << ',' << p.accepted_steps << ',' << p.error << ',' << report.slope
           << '\n';
}

void write_steptrace_csv(std::ostream& os, const Trajectory& traj) {
    os << "attempt,t,h,accepted,min_predictor_component\n";
    for (const auto& a : traj.attempts)
        os << a.index << ',' << a.t << ',' << a.h << ',' << (a.accepted ? 1 : 0) << ',' << a.min_predictor_component
           << '\n';
}

ExitCode cmd_integrate(const RunSpec& spec, std::ostream& log) {
    const Problem p = resolve_problem(spec);
    warn_kdv_all_stages(p, spec.config.correction, log);
    const IntegrateResult r = run_integrate(spec);
    write_file(spec.out, [&](std::ostream& os) { write_trajectory_csv(os, r.trajectory); });
    const auto& t = r.trajectory;
    log << std::setprecision(6);
    log << "status: " << to_string(t.status) << '\n';
    if (!t.message.empty()) log << "message: " << t.message << '\n';
    log << "accepted_steps: " << t.accepted_steps << "\nrejected_steps: " << t.rejected_steps << '\n';
    log << std::setprecision(17) << "min_component: " << t.overall_min_component() << '\n' << std::setprecision(6);
    for (const auto& e : r.invariant_errors)
        log << "E_" << e.label << ": " << e.value << (e.exact ? " (exact)" : "") << '\n';
    log << "seconds: " << r.seconds << '\n';
    return exit_for(t.status);
}

ExitCode cmd_invariants(const RunSpec& spec, std::ostream& log) {
    const Problem p = resolve_problem(spec);
    for (CorrectionMode m : spec.corrections) warn_kdv_all_stages(p, m, log);
    const auto rows = run_invariants(spec);
    write_file(spec.out, [&](std::ostream& os) { write_invariants_csv(os, rows); });
    ExitCode code = ExitCode::completed;
    log << std::setprecision(6);
    for (const auto& r : rows) {
        log << to_string(r.correction) << ' ' << r.label << ": " << r.error << " [" << to_string(r.status) << "]\n";
        if (r.status != RunStatus::completed) code = ExitCode::solver_failure;
    }
    return code;
}

ExitCode cmd_convergence(const RunSpec& spec, std::ostream& log) {
    const Problem p = resolve_problem(spec);
    warn_kdv_all_stages(p, spec.config.correction, log);
    const ConvergenceReport rep = run_convergence(spec);
    write_file(spec.out, [&](std::ostream& os) { write_convergence_csv(os, rep); });
    log << std::setprecision(6);
    for (const auto& pt : rep.points)
        log << (rep.fixed_step ? "h=" : "tol=") << pt.control << " mean_step=" << pt.mean_step
            << " error=" << pt.error << '\n';
    log << "slope: " << rep.slope << '\n';
    if (!rep.message.empty()) log << "message: " << rep.message << '\n';
    return exit_for(rep.status);
}

ExitCode cmd_steptrace(const RunSpec& spec, std::ostream& log) {
    const Trajectory t = run_steptrace(spec);
    write_file(spec.out, [&](std::ostream& os) { write_steptrace_csv(os, t); });
    double h_first = t.attempts.empty() ? 0.0 : t.attempts.front().h;
    double h_last = t.attempts.empty() ? 0.0 : t.attempts.back().h;
    log << std::setprecision(6) << "status: " << to_string(t.status) << '\n'
        << "attempts: " << t.attempts.size() << "\ninitial_h: " << h_first << "\nfinal_h: " << h_last << '\n';
    if (!t.message.empty()) log << "message: " << t.message << '\n';
    // A collapsed step is the expected outcome of this experiment, not a CLI error.
    return t.status == RunStatus::solver_failure ? ExitCode::solver_failure : ExitCode::completed;
}

}  // namespace pdint
