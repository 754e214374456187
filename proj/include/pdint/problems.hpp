#pragma once

// Benchmark production-destruction systems and a name-based registry.

#include <map>
#include <string>
#include <string_view>

#include "pdint/pds.hpp"

namespace pdint {

class ProblemConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

GraphLaplacianModel robertson();

/// alpha in [0,1] splits the y1-y2 coupling; w2 is exact for alpha = 1, w1 for alpha = 0.
GraphLaplacianModel mapk(double alpha = 1.0);

/// Diurnal photolysis factor; t in seconds.
double sigma_diurnal(double t);

GraphLaplacianModel stratospheric();

struct KdvConfig {
    std::size_t n_cells = 256;
    double x_lo = -10.0;
    double x_hi = 10.0;
    double alpha = 1.0;
    double rho = 0.0;
    double nu = 1.0;
    /// Constant added to the initial profile.
    double shift = 0.0;

    double dx() const noexcept { return (x_hi - x_lo) / static_cast<double>(n_cells); }
    double center(std::size_t i) const noexcept { return x_lo + (static_cast<double>(i) + 0.5) * dx(); }
    void validate() const;
};

/// Periodic finite-volume discretization in H-form. The cell flux is
/// f_i = -(alpha y_i^2 + rho y_i + nu (L_x y)_i), interfaces carry the average
/// of neighbouring cell fluxes, and dy_i/dt = (f_{i+1/2} - f_{i-1/2}) / dx.
HFormModel kdv(const KdvConfig& cfg = {});

/// Interface fluxes f_{i+1/2}, i = 0..n-1 (the last one wraps to cell 0).
Vector kdv_interface_fluxes(const KdvConfig& cfg, std::span<const double> y);

/// 6 sech^2(x_i) + shift at cell centres.
Vector kdv_initial(const KdvConfig& cfg = {});

struct TimeSpan {
    double t0 = 0.0;
    double tf = 0.0;
};

/// A registry entry: model, reference initial state and default time spans.
struct Problem {
    std::string name;
    Model model;
    Vector y0;
    TimeSpan run_span;
    TimeSpan convergence_span;
    /// Convergence studies use fixed steps rather than tolerance sweeps.
    bool fixed_step_convergence = false;
};

using ParamMap = std::map<std::string, std::string, std::less<>>;

/// Parses "k=v" into the map; throws ProblemConfigError on malformed input.
void parse_param(std::string_view kv, ParamMap& out);

/// Builds "robertson", "mapk", "stratospheric" or "kdv" with overrides.
/// Throws ProblemConfigError for unknown names, keys or bad values.
Problem make_problem(std::string_view name, const ParamMap& params = {});

std::vector<std::string> problem_names();

}  // namespace pdint
