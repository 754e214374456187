#pragma once

// Experiment drivers behind the pdint CLI: trajectory runs, invariant tables,
// convergence studies and step-attempt traces, all written as CSV.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pdint/problems.hpp"
#include "pdint/sdirk.hpp"

namespace pdint {

enum class ExitCode : int { completed = 0, solver_failure = 1, invalid_spec = 2 };

struct RunSpec {
    std::string problem;
    ParamMap params;
    SolverConfig config;
    /// Unset values fall back to the problem's default span for the command.
    std::optional<double> t0;
    std::optional<double> tf;
    std::string out;
    /// Corrections to tabulate in `invariants`; empty means none, final and all.
    std::vector<CorrectionMode> corrections;
    /// Tolerances (adaptive) or step sizes (fixed) for `convergence`.
    std::vector<double> sweep;
};

struct InvariantError {
    std::string label;
    bool exact = false;
    double value = 0.0;
};

struct IntegrateResult {
    Trajectory trajectory;
    std::vector<InvariantError> invariant_errors;
    double seconds = 0.0;
};

struct InvariantRow {
    CorrectionMode correction;
    std::string label;
    double error;
    RunStatus status;
};

struct ConvergencePoint {
    double control = 0.0;
    double mean_step = 0.0;
    std::size_t accepted_steps = 0;
    double error = 0.0;
};

struct ConvergenceReport {
    bool fixed_step = false;
    std::vector<ConvergencePoint> points;
    /// Least-squares slope of log error against log mean step size.
    double slope = 0.0;
    RunStatus status = RunStatus::completed;
    std::string message;
};

/// Exception carrying an exit code of 2; thrown for every invalid run spec.
class SpecError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Resolves the problem and time span; throws SpecError.
Problem resolve_problem(const RunSpec& spec);
TimeSpan resolve_span(const RunSpec& spec, const Problem& problem, bool convergence);

IntegrateResult run_integrate(const RunSpec& spec);
std::vector<InvariantRow> run_invariants(const RunSpec& spec);
ConvergenceReport run_convergence(const RunSpec& spec);
Trajectory run_steptrace(const RunSpec& spec);

/// Relative l2 distance ||a - b|| / ||b||.
double relative_l2_error(std::span<const double> a, std::span<const double> b);

void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
void write_invariants_csv(std::ostream& os, const std::vector<InvariantRow>& rows);
void write_convergence_csv(std::ostream& os, const ConvergenceReport& report);
void write_steptrace_csv(std::ostream& os, const Trajectory& traj);

/// Full CLI commands: run, write CSV to spec.out, print a summary to `log`.
ExitCode cmd_integrate(const RunSpec& spec, std::ostream& log);
ExitCode cmd_invariants(const RunSpec& spec, std::ostream& log);
ExitCode cmd_convergence(const RunSpec& spec, std::ostream& log);
ExitCode cmd_steptrace(const RunSpec& spec, std::ostream& log);

}  // namespace pdint
