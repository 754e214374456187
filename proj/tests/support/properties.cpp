#include "properties.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "pdint/patankar.hpp"
#include "pdint/problems.hpp"
#include "pdint/sdirk.hpp"

namespace pdint::testing {

namespace {

using Rng = std::mt19937_64;

DenseMatrix random_rates(Rng& rng, std::size_t d) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_real_distribution<double> expo(-4.0, 4.0);
    DenseMatrix l(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            if (i != j && u(rng) < 0.6) l(i, j) = std::pow(10.0, expo(rng));
    return l;
}

std::size_t random_dim(Rng& rng) { return std::uniform_int_distribution<std::size_t>(1, 8)(rng); }

void fail(PropertyResult& r, const std::string& what) {
    if (r.passed) r.detail = what;
    r.passed = false;
}

}  // namespace

PropertyResult mmatrix_inverse_nonnegative(std::size_t cases, std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> lh(-3.0, 3.0);
    PropertyResult r;
    for (std::size_t c = 0; c < cases; ++c) {
        const std::size_t d = random_dim(rng);
        const DenseMatrix g = assemble_g_from_rates(random_rates(rng, d));
        DenseMatrix a = DenseMatrix::identity(d);
        a.axpy(-std::pow(10.0, lh(rng)), g);
        const LuFactorization lu(a);
        for (std::size_t j = 0; j < d; ++j) {
            Vector e(d, 0.0);
            e[j] = 1.0;
            for (double v : lu.solve(e)) {
                r.worst = std::min(r.worst, v);
                if (v < -1e-12) fail(r, "negative inverse entry");
            }
        }
        ++r.cases;
    }
    return r;
}

PropertyResult scaled_combination_closure(std::size_t cases, std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    PropertyResult r;
    for (std::size_t c = 0; c < cases; ++c) {
        const std::size_t d = random_dim(rng);
        const std::size_t s = std::uniform_int_distribution<std::size_t>(1, 5)(rng);
        std::vector<DenseMatrix> gs;
        std::vector<DiagonalMatrix> sig;
        Vector b(s);
        for (std::size_t j = 0; j < s; ++j) {
            gs.push_back(assemble_g_from_rates(random_rates(rng, d)));
            Vector y(d), z(d);
            for (std::size_t i = 0; i < d; ++i) {
                y[i] = u(rng) - 0.2;
                z[i] = u(rng) - 0.2;
            }
            sig.push_back(ratio_scaling(y, z, 1e-10));
            b[j] = u(rng);
        }
        const DenseMatrix m = averaged_g_final(b, gs, sig);
        const double scale = std::max(m.norm_inf(), 1.0);
        const bool sign_ok = validate_sign_structure(m, 0.0).passed();
        const double kern = validate_left_kernel(m, Vector(d, 1.0)) / scale;
        r.worst = std::max(r.worst, kern);
        if (!sign_ok) fail(r, "sign pattern broken");
        if (kern > 1e-12) fail(r, "column sums nonzero");
        ++r.cases;
    }
    return r;
}

PropertyResult clip_properties(std::size_t cases, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    PropertyResult r;
    for (std::size_t c = 0; c < cases; ++c) {
        const std::size_t d = random_dim(rng);
        Vector v(d), x(d);
        for (std::size_t i = 0; i < d; ++i) {
            v[i] = n(rng) * std::pow(10.0, n(rng));
            x[i] = u(rng);
        }
        const Vector once = clip(v);
        if (clip(once) != once) fail(r, "clip not idempotent");
        double e_clip = 0, e_raw = 0;
        for (std::size_t i = 0; i < d; ++i) {
            if (std::abs(once[i] - x[i]) > std::abs(v[i] - x[i])) fail(r, "clip increased a component error");
            e_clip += (once[i] - x[i]) * (once[i] - x[i]);
            e_raw += (v[i] - x[i]) * (v[i] - x[i]);
        }
        if (e_clip > e_raw) fail(r, "clip increased the error norm");
        ++r.cases;
    }
    return r;
}

PropertyResult corrector_inactive(std::size_t cases, std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const MethodName methods[] = {MethodName::sdirk21, MethodName::sdirk32, MethodName::sdirk43};
    PropertyResult r;
    for (std::size_t c = 0; c < cases; ++c) {
        // Irreducible cycle with modest rates: all states stay well inside the orthant.
        const std::size_t d = std::uniform_int_distribution<std::size_t>(2, 6)(rng);
        DenseMatrix rates(d, d);
        for (std::size_t i = 0; i < d; ++i) rates(i, (i + 1) % d) = 0.2 + u(rng);
        const DenseMatrix g = assemble_g_from_rates(rates);
        GraphLaplacianModel gm;
        gm.dim = d;
        gm.eval_g = [g](double, std::span<const double>) { return g; };
        gm.invariants = {{"mass", Vector(d, 1.0), true}};
        const Model model(gm);
        Vector y(d);
        for (auto& v : y) v = 0.5 + u(rng);
        const auto tab = tableau(methods[c % 3]);
        SolverConfig cfg;
        cfg.mode = StepMode::fixed;
        cfg.correction = c % 2 == 0 ? CorrectionMode::final_stage : CorrectionMode::all_stages;
        for (int step = 0; step < 10; ++step) {
            const auto out = corrected_step(model, 0.1 * step, y, 0.1, tab, cfg);
            for (std::size_t i = 0; i < d; ++i) {
                const double rel = std::abs(out.y_corrected[i] - out.y_pred[i]) / std::abs(out.y_pred[i]);
                r.worst = std::max(r.worst, rel);
                if (!(out.y_pred[i] > 0.0)) fail(r, "trajectory left the positive orthant");
                if (rel > 1e-12) fail(r, "corrector changed a positive step");
            }
            y = out.y_pred;
        }
        ++r.cases;
    }
    return r;
}

PropertyResult kdv_rhs_oracle(std::size_t cases, std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    PropertyResult r;
    for (std::size_t c = 0; c < cases; ++c) {
        KdvConfig cfg;
        cfg.n_cells = 8 + c % 57;
        cfg.alpha = 0.5 + u(rng);
        cfg.rho = u(rng) - 0.5;
        cfg.nu = u(rng);
        const std::size_t n = cfg.n_cells;
        Vector y(n);
        for (auto& v : y) v = 6.0 * u(rng);
        // Direct evaluation of the conservative divergence from its definition.
        const double dx = cfg.dx();
        Vector cell(n), face(n), expect(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double lap = (y[(i + n - 1) % n] - 2 * y[i] + y[(i + 1) % n]) / (dx * dx);
            cell[i] = -(cfg.alpha * y[i] * y[i] + cfg.rho * y[i] + cfg.nu * lap);
        }
        for (std::size_t i = 0; i < n; ++i) face[i] = 0.5 * (cell[i] + cell[(i + 1) % n]);
        for (std::size_t i = 0; i < n; ++i) expect[i] = (face[i] - face[(i + n - 1) % n]) / dx;
        const HFormModel m = kdv(cfg);
        const DenseMatrix h = m.eval_h(y);
        const Vector got = h.multiply(Vector(n, 1.0));
        const Vector direct = m.rhs_direct(y);
        const double scale = std::max(norm_inf(expect), 1.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double e = std::max(std::abs(got[i] - expect[i]), std::abs(direct[i] - expect[i])) / scale;
            r.worst = std::max(r.worst, e);
            if (e > 1e-12) fail(r, "H-form rhs differs from flux differences");
        }
        ++r.cases;
    }
    return r;
}

namespace {

Vector robertson_newton(std::span<const double> base, double ha) {
    Vector y(base.begin(), base.end());
    for (int it = 0; it < 200; ++it) {
        const double f1 = -0.04 * y[0] + 1e4 * y[1] * y[2];
        const double f3 = 3e7 * y[1] * y[1];
        const double f2 = -f1 - f3;
        const Vector res{y[0] - base[0] - ha * f1, y[1] - base[1] - ha * f2, y[2] - base[2] - ha * f3};
        const DenseMatrix jac{
            {-0.04, 1e4 * y[2], 1e4 * y[1]},
            {0.04, -1e4 * y[2] - 6e7 * y[1], -1e4 * y[1]},
            {0.0, 6e7 * y[1], 0.0},
        };
        DenseMatrix m = DenseMatrix::identity(3);
        m.axpy(-ha, jac);
        const Vector dy = lu_solve(m, res);
        double change = 0.0;
        for (std::size_t i = 0; i < 3; ++i) {
            y[i] -= dy[i];
            change = std::max(change, std::abs(dy[i]) / (1e-300 + std::abs(y[i])));
        }
        if (change < 1e-15) break;
    }
    return y;
}

}  // namespace

PropertyResult stage_solver_oracle(std::size_t cases, std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Model model(robertson());
    // States along a corrected reference trajectory.
    SolverConfig cfg;
    cfg.correction = CorrectionMode::final_stage;
    cfg.atol = cfg.rtol = 1e-8;
    const Trajectory ref = integrate(model, cfg, 0.0, 1e4, Vector{1, 0, 0});
    const MethodName methods[] = {MethodName::sdirk21, MethodName::sdirk32, MethodName::sdirk43};
    PropertyResult r;
    for (std::size_t c = 0; c < cases; ++c) {
        const Vector& yn = ref.states[std::uniform_int_distribution<std::size_t>(0, ref.states.size() - 1)(rng)];
        const double gam = tableau(methods[c % 3]).gamma;
        const double h = std::pow(10.0, -4.0 + 4.0 * u(rng));
        Vector acc(3, 0.0);
        if (c % 2 == 1) {
            // a nonzero accumulated term from an explicit-looking prior stage
            const Vector f = model.rhs(0.0, yn);
            for (std::size_t i = 0; i < 3; ++i) acc[i] = 0.1 * h * f[i];
        }
        Vector base(3);
        for (std::size_t i = 0; i < 3; ++i) base[i] = yn[i] + acc[i];
        const Vector oracle = robertson_newton(base, h * gam);
        const auto got = solve_stage(model, 0.0, yn, h, gam, acc, {}, 1e-10);
        for (std::size_t i = 0; i < 3; ++i) {
            const double e = std::abs(got.y[i] - oracle[i]) / std::max(1.0, std::abs(oracle[i]));
            r.worst = std::max(r.worst, e);
            if (e > 1e-10) {
                std::ostringstream os;
                os << "mismatch at case " << c << " h=" << h;
                fail(r, os.str());
            }
        }
        ++r.cases;
    }
    return r;
}

GraphLaplacianModel clipping_synthetic(double k) {
    GraphLaplacianModel m;
    m.label = "clipping-synthetic";
    m.dim = 3;
    m.eval_g = [k](double, std::span<const double> y) {
        const double a = y[0], b = y[1];
        return DenseMatrix{
            {-k * b, 0.0, 0.0},
            {0.0, -k * a - 0.5, 1.0},
            {k * b, k * a + 0.5, -1.0},
        };
    };
    m.invariants = {{"mass", {1.0, 1.0, 1.0}, true}};
    m.y_scale = {1.0, 1.0, 1.0};
    return m;
}

Vector clipping_synthetic_initial(double a0) { return {a0, 1.0, 0.0}; }

}  // namespace pdint::testing
