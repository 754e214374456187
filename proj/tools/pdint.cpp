#include <iostream>

#include <CLI11.hpp>

#include "pdint/harness.hpp"

namespace {

struct CliOptions {
    std::string problem;
    std::vector<std::string> params;
    std::string method = "sdirk21";
    std::vector<std::string> corrections;
    std::string mode = "adaptive";
    std::optional<double> atol, rtol, h, t0, tf, eps;
    bool guard = false;
    std::string out;
    std::vector<double> sweep;
    int max_iter = 50;
    double stage_tol = 1e-12;
};

void add_common(CLI::App* cmd, CliOptions& o) {
    cmd->set_help_flag("--help", "print this help message and exit");
    cmd->add_option("--problem", o.problem, "robertson | mapk | stratospheric | kdv")->required();
    cmd->add_option("--param", o.params, "model parameter override key=value (repeatable)");
    cmd->add_option("--method", o.method, "sdirk21 | sdirk32 | sdirk43");
    cmd->add_option("--correction", o.corrections, "none | final | all");
    cmd->add_option("--mode", o.mode, "adaptive | fixed");
    cmd->add_option("--atol", o.atol);
    cmd->add_option("--rtol", o.rtol);
    cmd->add_option("--h", o.h, "uniform step (fixed) or initial step (adaptive)");
    cmd->add_option("--t0", o.t0);
    cmd->add_option("--tf", o.tf);
    cmd->add_option("--eps", o.eps, "ratio-scaling floor epsilon");
    cmd->add_flag("--guard", o.guard, "reject steps whose predictor has negative components");
    cmd->add_option("--out", o.out, "output CSV path")->required();
    cmd->add_option("--max-iter", o.max_iter, "stage solver iteration limit");
    cmd->add_option("--stage-tol", o.stage_tol, "stage solver relative residual tolerance");
}

pdint::RunSpec to_spec(const CliOptions& o, bool multi_correction) {
    using namespace pdint;
    RunSpec spec;
    spec.problem = o.problem;
    for (const auto& kv : o.params) parse_param(kv, spec.params);
    auto& c = spec.config;
    c.method = parse_method(o.method);
    c.mode = parse_step_mode(o.mode);
    if (o.corrections.size() > 1 && !multi_correction) throw SpecError("--correction given more than once");
    for (const auto& name : o.corrections) spec.corrections.push_back(parse_correction(name));
    if (!spec.corrections.empty()) c.correction = spec.corrections.front();
    if (c.mode == StepMode::fixed && (o.atol || o.rtol))
        throw SpecError("--atol/--rtol apply to adaptive mode; use --h with --mode fixed");
    if (o.atol) c.atol = *o.atol;
    if (o.rtol) c.rtol = *o.rtol;
    if (o.h) c.h = *o.h;
    if (o.eps) c.scaling.epsilon_fixed = *o.eps;
    c.positivity_guard_rejection = o.guard;
    c.stage_solver.max_iter = o.max_iter;
    c.stage_solver.tol = o.stage_tol;
    spec.t0 = o.t0;
    spec.tf = o.tf;
    spec.out = o.out;
    spec.sweep = o.sweep;
    return spec;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Positivity-preserving SDIRK integration of production-destruction systems"};
    app.require_subcommand(1);
    CliOptions o;
    auto* integrate = app.add_subcommand("integrate", "integrate one problem and write the trajectory");
    auto* invariants = app.add_subcommand("invariants", "tabulate relative invariant errors");
    auto* convergence = app.add_subcommand("convergence", "tolerance or step-size convergence study");
    auto* steptrace = app.add_subcommand("steptrace", "write every attempted step");
    for (auto* cmd : {integrate, invariants, convergence, steptrace}) add_common(cmd, o);
    convergence->add_option("--sweep", o.sweep, "tolerances (adaptive) or step sizes (fixed)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(pdint::ExitCode::invalid_spec);
    }

    try {
        const pdint::RunSpec spec = to_spec(o, invariants->parsed());
        pdint::ExitCode code;
        if (integrate->parsed()) code = pdint::cmd_integrate(spec, std::cout);
        else if (invariants->parsed()) code = pdint::cmd_invariants(spec, std::cout);
        else if (convergence->parsed()) code = pdint::cmd_convergence(spec, std::cout);
        else code = pdint::cmd_steptrace(spec, std::cout);
        return static_cast<int>(code);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(pdint::ExitCode::invalid_spec);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(pdint::ExitCode::solver_failure);
    }
}
