#include "pdint/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pdint/pds.hpp"

namespace pdint {

std::string_view to_string(RunStatus s) noexcept {
    switch (s) {
        case RunStatus::completed: return "completed";
        case RunStatus::step_too_small: return "step_too_small";
        case RunStatus::solver_failure: return "solver_failure";
    }
    return "unknown";
}

double Trajectory::overall_min_component() const noexcept {
    if (min_component.empty()) return std::numeric_limits<double>::quiet_NaN();
    return *std::min_element(min_component.begin(), min_component.end());
}

double invariant_error(const Trajectory& trajectory, std::span<const double> w) {
    if (trajectory.empty()) throw std::invalid_argument("invariant_error: empty trajectory");
    const double i0 = dot(w, trajectory.states.front());
    if (i0 == 0.0) throw ZeroInvariantError("invariant_error: initial invariant value is zero");
    double worst = 0.0;
    for (const auto& y : trajectory.states) worst = std::max(worst, std::abs(dot(w, y) - i0) / std::abs(i0));
    return worst;
}

double max_step_invariant_drift(const Trajectory& trajectory, std::span<const double> w) {
    double worst = 0.0;
    for (std::size_t k = 1; k < trajectory.states.size(); ++k) {
        const double prev = dot(w, trajectory.states[k - 1]);
        const double cur = dot(w, trajectory.states[k]);
        if (prev == 0.0) continue;
        worst = std::max(worst, std::abs(cur - prev) / std::abs(prev));
    }
    return worst;
}

}  // namespace pdint
