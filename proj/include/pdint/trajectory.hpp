#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pdint/numerics.hpp"

namespace pdint {

enum class RunStatus { completed, step_too_small, solver_failure };

std::string_view to_string(RunStatus s) noexcept;

/// One attempted step, accepted or not.
struct StepAttempt {
    std::size_t index = 0;
    double t = 0.0;
    double h = 0.0;
    bool accepted = false;
    double min_predictor_component = 0.0;
    double err = 0.0;
    /// "error", "guard", "stage", or empty when accepted.
    std::string reject_reason;
};

/// Accepted states of one integration. Entry 0 is the initial state; the
/// per-step columns (h_used, clip_count) hold 0 there.
struct Trajectory {
    std::vector<double> times;
    std::vector<Vector> states;
    std::vector<double> min_component;
    /// invariant_values[k][j] = w_j^T states[k]
    std::vector<Vector> invariant_values;
    std::vector<std::size_t> clip_count;
    std::vector<double> h_used;
    /// Worst post-solve negativity per accepted step (0 when none).
    std::vector<double> post_solve_min;

    std::vector<StepAttempt> attempts;
    RunStatus status = RunStatus::completed;
    std::string message;
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;

    bool empty() const noexcept { return states.empty(); }
    const Vector& final_state() const { return states.back(); }
    double overall_min_component() const noexcept;
};

/// max_k |w^T y_k - w^T y_0| / |w^T y_0|. Throws ZeroInvariantError when
/// w^T y_0 == 0.
double invariant_error(const Trajectory& trajectory, std::span<const double> w);

/// Largest one-step relative change |w^T y_{k+1} - w^T y_k| / |w^T y_k|.
double max_step_invariant_drift(const Trajectory& trajectory, std::span<const double> w);

}  // namespace pdint
