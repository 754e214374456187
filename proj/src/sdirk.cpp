#include "pdint/sdirk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace pdint {

CorrectionMode parse_correction(std::string_view name) {
    if (name == "none") return CorrectionMode::none;
    if (name == "final" || name == "final-stage") return CorrectionMode::final_stage;
    if (name == "all" || name == "all-stages") return CorrectionMode::all_stages;
    throw UnknownNameError("unknown correction mode '" + std::string(name) + "' (expected none, final or all)");
}

std::string_view to_string(CorrectionMode m) noexcept {
    switch (m) {
        case CorrectionMode::none: return "none";
        case CorrectionMode::final_stage: return "final";
        case CorrectionMode::all_stages: return "all";
    }
    return "unknown";
}

StepMode parse_step_mode(std::string_view name) {
    if (name == "adaptive") return StepMode::adaptive;
    if (name == "fixed") return StepMode::fixed;
    throw UnknownNameError("unknown step mode '" + std::string(name) + "' (expected adaptive or fixed)");
}

std::string_view to_string(StepMode m) noexcept { return m == StepMode::adaptive ? "adaptive" : "fixed"; }

void SolverConfig::validate() const {
    if (!(atol > 0.0)) throw ConfigError("atol must be positive");
    if (!(rtol >= 0.0)) throw ConfigError("rtol must be nonnegative");
    if (mode == StepMode::fixed && !(h > 0.0)) throw ConfigError("fixed mode requires a positive step");
    if (!(controller.fac_min < 1.0 && controller.fac_max > 1.0)) throw ConfigError("controller needs fac_min < 1 < fac_max");
    if (!(controller.safety > 0.0 && controller.safety <= 1.0)) throw ConfigError("controller safety must be in (0, 1]");
    if (stage_solver.max_iter < 2) throw ConfigError("stage solver needs at least two iterations");
    if (!(stage_solver.tol > 0.0)) throw ConfigError("stage solver tolerance must be positive");
    if (scaling.mode == ScalingPolicy::Mode::fixed && !(scaling.epsilon_fixed > 0.0))
        throw ConfigError("epsilon must be positive");
    if (scaling.mode == ScalingPolicy::Mode::step_scaled && !(scaling.epsilon_coeff > 0.0))
        throw ConfigError("epsilon coefficient must be positive");
}

namespace {

constexpr double kMachEps = std::numeric_limits<double>::epsilon();

double min_of(std::span<const double> v) { return *std::min_element(v.begin(), v.end()); }

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

DenseMatrix fd_jacobian(const Model& model, double t, std::span<const double> y, std::span<const double> f0,
                        double atol) {
    const std::size_t d = y.size();
    DenseMatrix jac(d, d);
    Vector yp(y.begin(), y.end());
    const double sq = std::sqrt(kMachEps);
    for (std::size_t j = 0; j < d; ++j) {
        const double delta = sq * std::max(std::abs(y[j]), atol);
        const double saved = yp[j];
        yp[j] = saved + delta;
        const double step = yp[j] - saved;
        const Vector fp = model.rhs(t, yp);
        yp[j] = saved;
        for (std::size_t i = 0; i < d; ++i) jac(i, j) = (fp[i] - f0[i]) / step;
    }
    return jac;
}

DenseMatrix shifted(const DenseMatrix& m, double coeff) {
    // I - coeff * m
    DenseMatrix out = (-coeff) * m;
    for (std::size_t i = 0; i < out.rows(); ++i) out(i, i) += 1.0;
    return out;
}

/// Stage equation Y = base + ha f(t, Y) with residual measured against the
/// magnitude of its terms.
class StageEquation {
public:
    StageEquation(const Model& model, double t, double ha, Vector base, const StageSolverOptions& opts, double atol)
        : model_(model), t_(t), ha_(ha), base_(std::move(base)), opts_(opts), atol_(atol) {}

    const Vector& base() const noexcept { return base_; }
    double t() const noexcept { return t_; }
    double ha() const noexcept { return ha_; }

    /// Weighted residual norm; fills residual. `g` is G(t,Y) when available.
    double residual_norm(std::span<const double> y, std::span<const double> f, const DenseMatrix* g,
                         Vector& residual) const {
        const std::size_t d = y.size();
        residual.resize(d);
        const double ynorm = norm_inf(y);
        const double fnorm = norm_inf(f);
        double s = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            residual[i] = y[i] - base_[i] - ha_ * f[i];
            double scale = std::abs(y[i]) + std::abs(base_[i]);
            if (g != nullptr) {
                double terms = 0.0;
                for (std::size_t j = 0; j < d; ++j) terms += std::abs((*g)(i, j) * y[j]);
                scale += std::abs(ha_) * terms;
            } else {
                scale += ynorm + std::abs(ha_) * fnorm;
            }
            const double e = residual[i] / (opts_.tol * atol_ + opts_.tol * scale);
            s += e * e;
        }
        return std::sqrt(s / static_cast<double>(d));
    }

    const Model& model() const noexcept { return model_; }
    const StageSolverOptions& opts() const noexcept { return opts_; }
    double atol() const noexcept { return atol_; }

private:
    const Model& model_;
    double t_;
    double ha_;
    Vector base_;
    const StageSolverOptions& opts_;
    double atol_;
};

struct IterationTracker {
    double best = std::numeric_limits<double>::infinity();
    double previous = std::numeric_limits<double>::infinity();
    Vector best_y;

    /// True when the iteration has stalled at a round-off floor close to the tolerance.
    bool stalled(double norm) const { return norm <= 1e3 && norm >= 0.5 * previous; }

    void update(double norm, std::span<const double> y) {
        if (norm < best) {
            best = norm;
            best_y.assign(y.begin(), y.end());
        }
        previous = norm;
    }
};

/// Full or simplified Newton on the stage equation. `lu` may carry a
/// precomputed factorization of I - ha J to reuse (simplified Newton).
bool newton_iterate(const StageEquation& eq, Vector& y, int max_iter, const LuFactorization* frozen, int& iterations) {
    const Model& model = eq.model();
    Vector f = model.rhs(eq.t(), y);
    Vector r;
    IterationTracker track;
    std::optional<LuFactorization> own;
    for (int k = 0; k <= max_iter; ++k) {
        if (!all_finite(y) || !all_finite(f)) return false;
        const double n = eq.residual_norm(y, f, nullptr, r);
        if (n <= 1.0 || (k > 1 && track.stalled(n))) return true;
        track.update(n, y);
        if (k == max_iter) break;
        const LuFactorization* lu = frozen;
        if (lu == nullptr) {
            own.emplace(shifted(fd_jacobian(model, eq.t(), y, f, eq.atol()), eq.ha()));
            lu = &*own;
        }
        lu->solve_in_place(r);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] -= r[i];
        f = model.rhs(eq.t(), y);
        ++iterations;
    }
    if (!track.best_y.empty()) y = track.best_y;
    return false;
}

/// Frozen-G fixed point for graph-Laplacian models.
bool picard_iterate(const StageEquation& eq, Vector& y, int max_iter, int& iterations) {
    const auto& gm = eq.model().graph();
    DenseMatrix g = gm.eval_g(eq.t(), y);
    Vector f = g.multiply(y);
    Vector r;
    IterationTracker track;
    for (int k = 0; k <= max_iter; ++k) {
        if (!all_finite(y) || !g.all_finite()) return false;
        const double n = eq.residual_norm(y, f, &g, r);
        if (n <= 1.0 || (k > 1 && track.stalled(n))) return true;
        track.update(n, y);
        if (k == max_iter) break;
        y = lu_solve(shifted(g, eq.ha()), eq.base());
        g = gm.eval_g(eq.t(), y);
        f = g.multiply(y);
        ++iterations;
    }
    if (!track.best_y.empty()) y = track.best_y;
    return false;
}

/// Per-step stage solver; caches the simplified-Newton factorization used by
/// H-form models across the stages of one step (all stages share a_ii = gamma).
class StageSolver {
public:
    StageSolver(const Model& model, const StageSolverOptions& opts, double atol)
        : model_(model), opts_(opts), atol_(atol) {}

    StageSolveResult solve(double t_stage, std::span<const double> y_n, double h, double a_ii,
                           std::span<const double> rhs_accum) {
        const std::size_t d = y_n.size();
        if (rhs_accum.size() != d || model_.dim() != d) throw DimensionError("solve_stage: dimension mismatch");
        if (!(h > 0.0)) throw std::invalid_argument("solve_stage: h must be positive");
        Vector base(d);
        for (std::size_t i = 0; i < d; ++i) base[i] = y_n[i] + rhs_accum[i];
        if (a_ii == 0.0) return {base, 0, false};

        StageEquation eq(model_, t_stage, h * a_ii, base, opts_, atol_);
        StageSolveResult out;
        out.y.assign(y_n.begin(), y_n.end());
        const int half = std::max(1, opts_.max_iter / 2);

        if (!model_.is_h_form()) {
            bool ok = false;
            try {
                ok = picard_iterate(eq, out.y, half, out.iterations);
            } catch (const SingularMatrixError&) {
                out.y.assign(y_n.begin(), y_n.end());
            }
            if (!ok) {
                if (!all_finite(out.y)) out.y.assign(y_n.begin(), y_n.end());
                out.used_newton = true;
                ok = newton_iterate(eq, out.y, opts_.max_iter - half, nullptr, out.iterations);
            }
            if (!ok) throw StageConvergenceError("stage solver did not converge at t=" + std::to_string(t_stage));
            return out;
        }

        out.used_newton = true;
        const double ha = h * a_ii;
        if (!frozen_ || frozen_ha_ != ha || frozen_t_ != t_stage_anchor_) {
            const Vector f0 = model_.rhs(t_stage, y_n);
            frozen_.emplace(shifted(fd_jacobian(model_, t_stage, y_n, f0, atol_), ha));
            frozen_ha_ = ha;
            frozen_t_ = t_stage_anchor_;
        }
        bool ok = newton_iterate(eq, out.y, half, &*frozen_, out.iterations);
        if (!ok) {
            if (!all_finite(out.y)) out.y.assign(y_n.begin(), y_n.end());
            ok = newton_iterate(eq, out.y, opts_.max_iter - half, nullptr, out.iterations);
        }
        if (!ok) throw StageConvergenceError("stage solver did not converge at t=" + std::to_string(t_stage));
        return out;
    }

    /// Marks the start of a new step so cached factorizations are refreshed.
    void begin_step(double t_n) { t_stage_anchor_ = t_n; }

private:
    const Model& model_;
    const StageSolverOptions& opts_;
    double atol_;
    std::optional<LuFactorization> frozen_;
    double frozen_ha_ = 0.0;
    double frozen_t_ = std::numeric_limits<double>::quiet_NaN();
    double t_stage_anchor_ = 0.0;
};

Vector combine(std::span<const double> y_n, double h, std::span<const double> weights, const std::vector<Vector>& f) {
    Vector out(y_n.begin(), y_n.end());
    for (std::size_t j = 0; j < weights.size(); ++j) {
        if (weights[j] == 0.0) continue;
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += h * weights[j] * f[j][i];
    }
    return out;
}

Vector accumulate(double h, std::span<const double> a_row, const std::vector<Vector>& f, std::size_t d) {
    Vector acc(d, 0.0);
    for (std::size_t j = 0; j + 1 < a_row.size(); ++j)
        for (std::size_t i = 0; i < d; ++i) acc[i] += h * a_row[j] * f[j][i];
    return acc;
}

PredictorResult run_predictor(StageSolver& solver, const Model& model, double t_n, std::span<const double> y_n,
                              double h, const ButcherTableau& tab) {
    const std::size_t d = y_n.size();
    solver.begin_step(t_n);
    PredictorResult out;
    std::vector<Vector> f;
    f.reserve(tab.stages);
    for (std::size_t i = 0; i < tab.stages; ++i) {
        const auto row = tab.a_row(i);
        const double ti = t_n + tab.c[i] * h;
        out.stages.push_back(solver.solve(ti, y_n, h, row.back(), accumulate(h, row, f, d)).y);
        f.push_back(model.rhs(ti, out.stages.back()));
    }
    out.y_pred = tab.stiffly_accurate ? out.stages.back() : combine(y_n, h, tab.b, f);
    out.y_hat = combine(y_n, h, tab.b_hat, f);
    return out;
}

/// Zeroes post-solve negativity, recording the conservation defect it causes.
void finalize_corrected(Vector& y, const Model& model, CorrectionDiagnostics& diag) {
    double defect = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] >= 0.0) continue;
        for (const auto& inv : model.invariants())
            if (inv.exact) defect += std::abs(inv.w[i] * y[i]);
        y[i] = 0.0;
    }
    diag.conservation_defect += defect;
}

Vector stage_argument(const Model& model, std::span<const double> y, CorrectionDiagnostics& diag) {
    if (!model.is_h_form() && model.graph().strong_sign) return {y.begin(), y.end()};
    diag.absorb_clip(y);
    return clip(y);
}

CorrectorResult final_stage_correction(const Model& model, double t_n, std::span<const double> y_n, double h,
                                       const ButcherTableau& tab, const PredictorResult& pred, double eps) {
    CorrectionDiagnostics diag;
    diag.absorb_clip(pred.y_pred);
    std::vector<DenseMatrix> mats;
    mats.reserve(tab.stages);
    for (std::size_t j = 0; j < tab.stages; ++j) {
        const Vector arg = stage_argument(model, pred.stages[j], diag);
        mats.push_back(model.structure_matrix(t_n + tab.c[j] * h, arg));
    }
    CorrectorResult res;
    if (model.is_h_form()) {
        res = h_form_corrector(y_n, h, tab.b, mats, pred.y_pred, eps);
    } else {
        std::vector<DiagonalMatrix> sigmas;
        sigmas.reserve(tab.stages);
        bool active = false;
        for (std::size_t j = 0; j < tab.stages; ++j) {
            sigmas.push_back(ratio_scaling(pred.stages[j], pred.y_pred, eps));
            active = active || !sigmas.back().is_identity();
        }
        res = corrector_solve(y_n, h, averaged_g_final(tab.b, mats, sigmas));
        res.diagnostics.scaling_active = active;
    }
    res.diagnostics.merge(diag);
    return res;
}

struct AllStagesResult {
    PredictorResult pred;  // stages: corrected 1..s-1 and predicted s
    Vector y_corrected;
    CorrectionDiagnostics diagnostics;
};

AllStagesResult all_stages_correction(StageSolver& solver, const Model& model, double t_n,
                                      std::span<const double> y_n, double h, const ButcherTableau& tab, double eps) {
    const std::size_t d = y_n.size();
    solver.begin_step(t_n);
    AllStagesResult out;
    std::vector<Vector> corrected;
    std::vector<Vector> f;
    std::vector<DenseMatrix> mats;
    for (std::size_t i = 0; i < tab.stages; ++i) {
        const auto row = tab.a_row(i);
        const double ti = t_n + tab.c[i] * h;
        const Vector predicted = solver.solve(ti, y_n, h, row.back(), accumulate(h, row, f, d)).y;
        const Vector clipped_pred = clip(predicted);
        const Vector arg = stage_argument(model, predicted, out.diagnostics);
        const DenseMatrix m_diag = model.structure_matrix(ti, arg);

        CorrectorResult res;
        if (model.is_h_form()) {
            std::vector<DiagonalMatrix> ones(i, DiagonalMatrix::identity(d));
            DenseMatrix h_bar = stage_corrected_g(row, mats, ones, m_diag);
            const Vector unit(d, 1.0);
            const DiagonalMatrix sigma = ratio_scaling(unit, predicted, eps);
            h_bar.scale_columns(sigma.diag);
            res = corrector_solve(y_n, h, h_bar);
            res.diagnostics.scaling_active = !sigma.is_identity();
        } else {
            std::vector<DiagonalMatrix> sigmas;
            bool active = false;
            for (std::size_t j = 0; j < i; ++j) {
                sigmas.push_back(ratio_scaling(corrected[j], clipped_pred, eps));
                active = active || !sigmas.back().is_identity();
            }
            res = corrector_solve(y_n, h, stage_corrected_g(row, mats, sigmas, m_diag));
            res.diagnostics.scaling_active = active;
        }
        finalize_corrected(res.y, model, res.diagnostics);
        out.diagnostics.merge(res.diagnostics);

        if (i + 1 == tab.stages) {
            out.pred.stages = corrected;
            out.pred.stages.push_back(predicted);
            f.push_back(model.rhs(ti, predicted));
            out.pred.y_pred = predicted;
            out.pred.y_hat = combine(y_n, h, tab.b_hat, f);
            out.y_corrected = std::move(res.y);
        } else {
            mats.push_back(model.structure_matrix(ti, res.y));
            f.push_back(model.rhs(ti, res.y));
            corrected.push_back(std::move(res.y));
        }
    }
    return out;
}

StepOutcome do_step(StageSolver& solver, const Model& model, double t_n, std::span<const double> y_n, double h,
                    const ButcherTableau& tab, const SolverConfig& config) {
    StepOutcome out;
    out.h_used = h;
    out.t_new = t_n + h;
    const double eps = config.scaling.resolve(h, tab.order);

    switch (config.correction) {
        case CorrectionMode::none: {
            auto pred = run_predictor(solver, model, t_n, y_n, h, tab);
            out.y_corrected = pred.y_pred;
            out.y_pred = std::move(pred.y_pred);
            out.stages = std::move(pred.stages);
            out.diagnostics.post_solve_min_component = std::min(0.0, min_of(out.y_pred));
            Vector diff(out.y_pred.size());
            for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = out.y_pred[i] - pred.y_hat[i];
            out.err = wrms_norm(diff, out.y_pred, config.atol, config.rtol);
            break;
        }
        case CorrectionMode::final_stage: {
            auto pred = run_predictor(solver, model, t_n, y_n, h, tab);
            auto res = final_stage_correction(model, t_n, y_n, h, tab, pred, eps);
            finalize_corrected(res.y, model, res.diagnostics);
            Vector diff(pred.y_pred.size());
            for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = pred.y_pred[i] - pred.y_hat[i];
            out.err = wrms_norm(diff, pred.y_pred, config.atol, config.rtol);
            out.y_corrected = std::move(res.y);
            out.y_pred = std::move(pred.y_pred);
            out.stages = std::move(pred.stages);
            out.diagnostics = res.diagnostics;
            break;
        }
        case CorrectionMode::all_stages: {
            if (!tab.stiffly_accurate)
                throw ConfigError("all-stages correction requires a stiffly accurate tableau (" + tab.name + ")");
            auto res = all_stages_correction(solver, model, t_n, y_n, h, tab, eps);
            Vector diff(res.pred.y_pred.size());
            for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = res.pred.y_pred[i] - res.pred.y_hat[i];
            out.err = wrms_norm(diff, res.pred.y_pred, config.atol, config.rtol);
            out.y_corrected = std::move(res.y_corrected);
            out.y_pred = std::move(res.pred.y_pred);
            out.stages = std::move(res.pred.stages);
            out.diagnostics = res.diagnostics;
            break;
        }
    }

    if (config.mode == StepMode::fixed) {
        out.accepted = true;
        out.h_next = h;
    } else {
        out.accepted = out.err <= 1.0;
        const auto& c = config.controller;
        const double expo = -1.0 / (tab.embedded_order + 1.0);
        const double fac = out.err > 0.0 ? c.safety * std::pow(out.err, expo) : c.fac_max;
        out.h_next = h * std::clamp(fac, c.fac_min, c.fac_max);
    }
    return out;
}


}  // namespace

StageSolveResult solve_stage(const Model& model, double t_stage, std::span<const double> y_n, double h, double a_ii,
                             std::span<const double> rhs_accum, const StageSolverOptions& opts, double atol) {
    StageSolver solver(model, opts, atol);
    solver.begin_step(t_stage);
    return solver.solve(t_stage, y_n, h, a_ii, rhs_accum);
}

PredictorResult predictor_step(const Model& model, double t_n, std::span<const double> y_n, double h,
                               const ButcherTableau& tab, const StageSolverOptions& opts, double atol) {
    StageSolver solver(model, opts, atol);
    return run_predictor(solver, model, t_n, y_n, h, tab);
}

StepOutcome corrected_step(const Model& model, double t_n, std::span<const double> y_n, double h,
                           const ButcherTableau& tab, const SolverConfig& config) {
    StageSolver solver(model, config.stage_solver, config.atol);
    return do_step(solver, model, t_n, y_n, h, tab, config);
}

Trajectory integrate(const Model& model, const SolverConfig& config, double t0, double tf, std::span<const double> y0) {
    config.validate();
    if (!(tf > t0)) throw ConfigError("integrate: tf must exceed t0");
    if (y0.size() != model.dim()) throw DimensionError("integrate: initial state has wrong dimension");
    require_finite(y0, "integrate: initial state");
    if (config.correction != CorrectionMode::none && min_of(y0) < 0.0)
        throw ConfigError("integrate: corrected integration needs a nonnegative initial state");

    const ButcherTableau tab = tableau(config.method);
    if (config.correction == CorrectionMode::all_stages && !tab.stiffly_accurate)
        throw ConfigError("all-stages correction requires a stiffly accurate tableau");

    StageSolver solver(model, config.stage_solver, config.atol);
    Trajectory traj;
    Vector y(y0.begin(), y0.end());
    double t = t0;

    auto record = [&](double h_used, std::size_t clips, double post_min) {
        if (!config.record_states && traj.times.size() >= 2) {
            traj.times.pop_back();
            traj.states.pop_back();
            traj.min_component.pop_back();
            traj.invariant_values.pop_back();
            traj.clip_count.pop_back();
            traj.h_used.pop_back();
            traj.post_solve_min.pop_back();
        }
        traj.times.push_back(t);
        traj.states.push_back(y);
        traj.min_component.push_back(min_of(y));
        Vector inv;
        inv.reserve(model.invariants().size());
        for (const auto& w : model.invariants()) inv.push_back(dot(w.w, y));
        traj.invariant_values.push_back(std::move(inv));
        traj.clip_count.push_back(clips);
        traj.h_used.push_back(h_used);
        traj.post_solve_min.push_back(post_min);
    };
    record(0.0, 0, 0.0);

    const double span = tf - t0;
    const double h_min = config.controller.h_min > 0.0
                             ? config.controller.h_min
                             : 1e4 * kMachEps * std::max(std::abs(t0), std::abs(tf));

    auto log_attempt = [&](double h, bool accepted, double min_pred, double err, const char* reason) {
        if (!config.record_attempts) return;
        traj.attempts.push_back({traj.attempts.size(), t, h, accepted, min_pred, err, reason});
    };

    if (config.mode == StepMode::fixed) {
        const auto steps = static_cast<std::size_t>(std::ceil(span / config.h * (1.0 - 1e-12)));
        const double h = span / static_cast<double>(std::max<std::size_t>(steps, 1));
        for (std::size_t k = 0; k < std::max<std::size_t>(steps, 1); ++k) {
            StepOutcome out;
            try {
                out = do_step(solver, model, t, y, h, tab, config);
            } catch (const StageConvergenceError& e) {
                log_attempt(h, false, std::numeric_limits<double>::quiet_NaN(), 0.0, "stage");
                traj.status = RunStatus::solver_failure;
                traj.message = e.what();
                return traj;
            } catch (const SingularMatrixError& e) {
                log_attempt(h, false, std::numeric_limits<double>::quiet_NaN(), 0.0, "stage");
                traj.status = RunStatus::solver_failure;
                traj.message = e.what();
                return traj;
            }
            log_attempt(h, true, min_of(out.y_pred), out.err, "");
            t = (k + 1 == steps) ? tf : t0 + static_cast<double>(k + 1) * h;
            y = std::move(out.y_corrected);
            ++traj.accepted_steps;
            record(h, out.diagnostics.clip_count, out.diagnostics.post_solve_min_component);
        }
        traj.status = RunStatus::completed;
        return traj;
    }

    double h = config.h > 0.0 ? config.h : span * 1e-4;
    h = std::min(h, span);
    bool hold_growth = false;
    std::size_t attempts = 0;

    while (t < tf) {
        if (h < h_min) {
            traj.status = RunStatus::step_too_small;
            std::ostringstream msg;
            msg << "step size " << h << " fell below h_min " << h_min;
            traj.message = msg.str();
            return traj;
        }
        if (++attempts > config.max_attempts) {
            traj.status = RunStatus::solver_failure;
            traj.message = "attempt limit reached";
            return traj;
        }
        bool last = false;
        if (t + h >= tf - 1e-12 * span) {
            h = tf - t;
            last = true;
        }

        StepOutcome out;
        try {
            out = do_step(solver, model, t, y, h, tab, config);
        } catch (const StageConvergenceError&) {
            log_attempt(h, false, std::numeric_limits<double>::quiet_NaN(), 0.0, "stage");
            ++traj.rejected_steps;
            h *= 0.5;
            hold_growth = true;
            continue;
        } catch (const SingularMatrixError&) {
            log_attempt(h, false, std::numeric_limits<double>::quiet_NaN(), 0.0, "stage");
            ++traj.rejected_steps;
            h *= 0.5;
            hold_growth = true;
            continue;
        }

        const double min_pred = min_of(out.y_pred);
        if (!out.accepted || !std::isfinite(out.err)) {
            log_attempt(h, false, min_pred, out.err, "error");
            ++traj.rejected_steps;
            h = std::isfinite(out.h_next) ? std::min(out.h_next, h) : 0.5 * h;
            hold_growth = true;
            continue;
        }
        if (config.positivity_guard_rejection && min_pred < 0.0) {
            log_attempt(h, false, min_pred, out.err, "guard");
            ++traj.rejected_steps;
            h *= 0.5;
            hold_growth = true;
            continue;
        }

        log_attempt(h, true, min_pred, out.err, "");
        t = last ? tf : t + h;
        y = std::move(out.y_corrected);
        ++traj.accepted_steps;
        record(h, out.diagnostics.clip_count, out.diagnostics.post_solve_min_component);
        double h_next = out.h_next;
        if (hold_growth) h_next = std::min(h_next, h);
        hold_growth = false;
        if (!last) h = h_next;
    }
    traj.status = RunStatus::completed;
    return traj;
}

}  // namespace pdint
