#pragma once

// SDIRK integration of production-destruction systems with optional Patankar
// correction of the step result (final-stage) or of every stage (all-stages).

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "pdint/numerics.hpp"
#include "pdint/patankar.hpp"
#include "pdint/pds.hpp"
#include "pdint/tableau.hpp"
#include "pdint/trajectory.hpp"

namespace pdint {

enum class CorrectionMode { none, final_stage, all_stages };
enum class StepMode { adaptive, fixed };

CorrectionMode parse_correction(std::string_view name);
std::string_view to_string(CorrectionMode m) noexcept;
StepMode parse_step_mode(std::string_view name);
std::string_view to_string(StepMode m) noexcept;

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class StageConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct StageSolverOptions {
    int max_iter = 50;
    /// Residual tolerance relative to the magnitude of the terms of the stage equation.
    double tol = 1e-12;
};

struct ControllerOptions {
    double safety = 0.9;
    double fac_min = 0.2;
    double fac_max = 5.0;
    /// <= 0 selects 1e4 * machine epsilon * max(|t0|, |tf|).
    double h_min = 0.0;
};

struct SolverConfig {
    MethodName method = MethodName::sdirk21;
    StepMode mode = StepMode::adaptive;
    /// Initial step (adaptive) or uniform step (fixed). <= 0 selects (tf - t0) * 1e-4 in adaptive mode.
    double h = 0.0;
    double atol = 1e-6;
    double rtol = 1e-6;
    CorrectionMode correction = CorrectionMode::none;
    ScalingPolicy scaling;
    ControllerOptions controller;
    StageSolverOptions stage_solver;
    bool positivity_guard_rejection = false;
    std::size_t max_attempts = 2'000'000;
    /// Keep every attempted step in Trajectory::attempts.
    bool record_attempts = true;
    /// When false the trajectory keeps only the initial and the latest state.
    bool record_states = true;

    /// Throws ConfigError on inconsistent settings.
    void validate() const;
};

struct StageSolveResult {
    Vector y;
    int iterations = 0;
    bool used_newton = false;
};

/// Solves Y = y_n + rhs_accum + h a_ii f(t_stage, Y). Graph-Laplacian models
/// use frozen-G fixed-point iteration Y <- (I - h a_ii G(t,Y))^{-1}(y_n + rhs_accum)
/// with a finite-difference Newton fallback after max_iter/2 iterations; H-form
/// models use simplified Newton. Throws StageConvergenceError.
StageSolveResult solve_stage(const Model& model, double t_stage, std::span<const double> y_n, double h, double a_ii,
                             std::span<const double> rhs_accum, const StageSolverOptions& opts = {},
                             double atol = 1e-6);

struct PredictorResult {
    std::vector<Vector> stages;
    Vector y_pred;
    Vector y_hat;
};

PredictorResult predictor_step(const Model& model, double t_n, std::span<const double> y_n, double h,
                               const ButcherTableau& tab, const StageSolverOptions& opts = {}, double atol = 1e-6);

struct StepOutcome {
    bool accepted = false;
    double t_new = 0.0;
    Vector y_pred;
    Vector y_corrected;
    std::vector<Vector> stages;
    double err = 0.0;
    double h_used = 0.0;
    double h_next = 0.0;
    CorrectionDiagnostics diagnostics;
};

/// One predictor step followed by the configured correction. The error
/// estimate always comes from the uncorrected predictor and embedded solution.
StepOutcome corrected_step(const Model& model, double t_n, std::span<const double> y_n, double h,
                           const ButcherTableau& tab, const SolverConfig& config);

Trajectory integrate(const Model& model, const SolverConfig& config, double t0, double tf,
                     std::span<const double> y0);

}  // namespace pdint
