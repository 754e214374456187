#include "pdint/problems.hpp"

#include <charconv>
#include <cmath>
#include <numbers>

namespace pdint {

GraphLaplacianModel robertson() {
    GraphLaplacianModel m;
    m.label = "robertson";
    m.dim = 3;
    m.eval_g = [](double, std::span<const double> y) {
        return DenseMatrix{
            {-0.04, 1e4 * y[2], 0.0},
            {0.04, -3e7 * y[1] - 1e4 * y[2], 0.0},
            {0.0, 3e7 * y[1], 0.0},
        };
    };
    m.invariants = {{"mass", {1.0, 1.0, 1.0}, true}};
    m.y_scale = {1.0, 1.0, 1.0};
    return m;
}

GraphLaplacianModel mapk(double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ProblemConfigError("mapk: alpha must lie in [0, 1]");
    constexpr double k1 = 100.0 / 3.0, k2 = 1.0 / 3.0, k3 = 50.0, k4 = 0.5, k5 = 10.0 / 3.0, k6 = 0.1, k7 = 0.7;
    GraphLaplacianModel m;
    m.label = "mapk";
    m.dim = 6;
    m.eval_g = [alpha](double, std::span<const double> y) {
        return DenseMatrix{
            {-(k7 + k1 * y[1]), 0.0, 0.0, k2, 0.0, k6},
            {0.0, -k1 * y[0], k5, 0.0, 0.0, 0.0},
            {0.0, 0.0, -(k3 * y[0] + k5), k2, k4, 0.0},
            {(1.0 - alpha) * k1 * y[1], alpha * k1 * y[0], 0.0, -k2, 0.0, 0.0},
            {0.0, 0.0, k3 * y[0], 0.0, -k4, 0.0},
            {k7, 0.0, 0.0, 0.0, 0.0, -k6},
        };
    };
    m.invariants = {{"C1", {1, 0, 0, 1, 0, 1}, alpha == 0.0}, {"C2", {0, 1, 1, 1, 1, 0}, alpha == 1.0}};
    m.y_scale = Vector(6, 2.0);
    return m;
}

double sigma_diurnal(double t) {
    constexpr double t_rise = 4.5, t_set = 19.5;
    double t_local = std::fmod(t / 3600.0, 24.0);
    if (t_local < 0.0) t_local += 24.0;
    if (t_local < t_rise || t_local > t_set) return 0.0;
    const double w = (2.0 * t_local - t_rise - t_set) / (t_set - t_rise);
    return 0.5 + 0.5 * std::cos(std::numbers::pi * std::abs(w) * w);
}

GraphLaplacianModel stratospheric() {
    GraphLaplacianModel m;
    m.label = "stratospheric";
    m.dim = 6;
    m.eval_g = [](double t, std::span<const double> y) {
        const double s = sigma_diurnal(t);
        const double k1 = 2.643e-10 * s * s * s;
        const double k2 = 8.018e-17;
        const double k3 = 6.120e-4 * s;
        const double k4 = 1.576e-15;
        const double k5 = 1.070e-3 * s * s;
        const double k6 = 7.110e-11;
        const double k7 = 1.200e-10;
        const double k8 = 6.062e-15;
        const double k9 = 1.069e-11;
        const double k10 = 1.289e-2 * s;
        const double gam = k3 + k5 + k4 * y[1] + k7 * y[0] + k8 * y[4];
        return DenseMatrix{
            {-(k6 + k7 * y[2]), 0.0, k5, 0.0, 0.0, 0.0},
            {k6, -(k2 * y[3] + k4 * y[2] + k9 * y[5]), k3, 2.0 * k1, 0.0, k10},
            {0.0, k2 * y[3] / 3.0, -gam, 2.0 * k2 * y[1] / 3.0, 0.0, 0.0},
            {0.5 * k7 * y[2], k4 * y[2] + 0.5 * k9 * y[5], gam + 0.5 * k7 * y[0], -(k1 + k2 * y[1]), 0.0,
             0.5 * k9 * y[1]},
            {0.0, 0.0, 0.0, 0.0, -k8 * y[2], k10 + k9 * y[1]},
            {0.0, 0.0, 0.0, 0.0, k8 * y[2], -(k10 + k9 * y[1])},
        };
    };
    // w_O is not a left kernel vector of this G; only nitrogen is preserved exactly.
    m.invariants = {{"M_O", {1, 1, 3, 2, 1, 2}, false}, {"M_N", {0, 0, 0, 0, 1, 1}, true}};
    m.y_scale = {2e2, 2e9, 1e12, 3.4e16, 2e9, 5e8};
    m.sample_t_lo = 0.0;
    m.sample_t_hi = 86400.0;
    return m;
}

void KdvConfig::validate() const {
    if (n_cells < 8) throw ProblemConfigError("kdv: n_cells must be at least 8");
    if (!(x_hi > x_lo)) throw ProblemConfigError("kdv: domain must satisfy x_hi > x_lo");
    if (!(nu >= 0.0)) throw ProblemConfigError("kdv: nu must be nonnegative");
    if (!std::isfinite(alpha) || !std::isfinite(rho) || !std::isfinite(shift) || !std::isfinite(nu))
        throw ProblemConfigError("kdv: coefficients must be finite");
    if (!(shift >= 0.0)) throw ProblemConfigError("kdv: shift must be nonnegative");
}

Vector kdv_interface_fluxes(const KdvConfig& cfg, std::span<const double> y) {
    const std::size_t n = cfg.n_cells;
    if (y.size() != n) throw DimensionError("kdv: state has wrong length");
    const double dx = cfg.dx();
    const double inv_dx2 = 1.0 / (dx * dx);
    Vector cell(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double lap = (y[(i + n - 1) % n] - 2.0 * y[i] + y[(i + 1) % n]) * inv_dx2;
        cell[i] = -(cfg.alpha * y[i] * y[i] + cfg.rho * y[i] + cfg.nu * lap);
    }
    Vector face(n);
    for (std::size_t i = 0; i < n; ++i) face[i] = 0.5 * (cell[i] + cell[(i + 1) % n]);
    return face;
}

HFormModel kdv(const KdvConfig& cfg) {
    cfg.validate();
    const std::size_t n = cfg.n_cells;
    HFormModel m;
    m.label = "kdv";
    m.dim = n;
    m.eval_h = [cfg, n](std::span<const double> y) {
        const Vector face = kdv_interface_fluxes(cfg, y);
        const double dx = cfg.dx();
        DenseMatrix d(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t ip = (i + 1) % n;
            // f >= 0 moves mass from cell i+1 into cell i
            if (face[i] >= 0.0)
                d(ip, i) += face[i] / dx;
            else
                d(i, ip) += -face[i] / dx;
        }
        return assemble_h_from_destruction(d);
    };
    m.rhs_direct = [cfg, n](std::span<const double> y) {
        const Vector face = kdv_interface_fluxes(cfg, y);
        const double dx = cfg.dx();
        Vector out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = (face[i] - face[(i + n - 1) % n]) / dx;
        return out;
    };
    m.invariants = {{"M", Vector(n, cfg.dx()), true}};
    m.y_scale = Vector(n, 6.0 + cfg.shift);
    return m;
}

Vector kdv_initial(const KdvConfig& cfg) {
    cfg.validate();
    Vector y(cfg.n_cells);
    for (std::size_t i = 0; i < cfg.n_cells; ++i) {
        const double s = 1.0 / std::cosh(cfg.center(i));
        y[i] = 6.0 * s * s + cfg.shift;
    }
    return y;
}

void parse_param(std::string_view kv, ParamMap& out) {
    const auto eq = kv.find('=');
    if (eq == std::string_view::npos || eq == 0 || eq + 1 == kv.size())
        throw ProblemConfigError("parameter '" + std::string(kv) + "' is not of the form key=value");
    out[std::string(kv.substr(0, eq))] = std::string(kv.substr(eq + 1));
}

namespace {

double to_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v))
        throw ProblemConfigError("parameter " + key + ": '" + text + "' is not a finite number");
    return v;
}

std::size_t to_count(const std::string& key, const std::string& text) {
    const double v = to_double(key, text);
    if (v < 0.0 || v != std::floor(v) || v > 1e7) throw ProblemConfigError("parameter " + key + " must be a count");
    return static_cast<std::size_t>(v);
}

void reject_unknown(std::string_view problem, const ParamMap& params, std::initializer_list<std::string_view> known) {
    for (const auto& [key, _] : params) {
        bool ok = false;
        for (auto k : known) ok = ok || key == k;
        if (!ok) throw ProblemConfigError("problem " + std::string(problem) + " has no parameter '" + key + "'");
    }
}

}  // namespace

Problem make_problem(std::string_view name, const ParamMap& params) {
    constexpr double hour = 3600.0;
    if (name == "robertson") {
        reject_unknown(name, params, {});
        return {"robertson", robertson(), {1.0, 0.0, 0.0}, {0.0, 1e4}, {0.0, 5000.0}, false};
    }
    if (name == "mapk") {
        reject_unknown(name, params, {"alpha"});
        double alpha = 1.0;
        if (auto it = params.find("alpha"); it != params.end()) alpha = to_double(it->first, it->second);
        return {"mapk", mapk(alpha), {0.1, 0.175, 0.15, 1.15, 0.81, 0.5}, {0.0, 200.0}, {0.0, 60.0}, false};
    }
    if (name == "stratospheric") {
        reject_unknown(name, params, {});
        return {"stratospheric",
                stratospheric(),
                {9.906e1, 6.624e8, 5.326e11, 1.697e16, 8.725e8, 2.240e8},
                {12.0 * hour, 36.0 * hour},
                {19.0 * hour, 29.0 * hour},
                false};
    }
    if (name == "kdv") {
        reject_unknown(name, params, {"n_cells", "x_lo", "x_hi", "alpha", "rho", "nu", "shift"});
        KdvConfig cfg;
        for (const auto& [key, value] : params) {
            if (key == "n_cells") cfg.n_cells = to_count(key, value);
            else if (key == "x_lo") cfg.x_lo = to_double(key, value);
            else if (key == "x_hi") cfg.x_hi = to_double(key, value);
            else if (key == "alpha") cfg.alpha = to_double(key, value);
            else if (key == "rho") cfg.rho = to_double(key, value);
            else if (key == "nu") cfg.nu = to_double(key, value);
            else if (key == "shift") cfg.shift = to_double(key, value);
        }
        cfg.validate();
        return {"kdv", kdv(cfg), kdv_initial(cfg), {0.0, 0.35}, {0.0, 0.35}, true};
    }
    throw ProblemConfigError("unknown problem '" + std::string(name) +
                             "' (expected robertson, mapk, stratospheric or kdv)");
}

std::vector<std::string> problem_names() { return {"robertson", "mapk", "stratospheric", "kdv"}; }

}  // namespace pdint
