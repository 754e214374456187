#include <doctest.h>

#include <cmath>
#include <random>

#include "pdint/problems.hpp"
#include "pdint/sdirk.hpp"

using namespace pdint;
using doctest::Approx;

namespace {

GraphLaplacianModel constant_model(DenseMatrix g) {
    GraphLaplacianModel m;
    m.label = "linear";
    m.dim = g.rows();
    m.eval_g = [g](double, std::span<const double>) { return g; };
    m.invariants = {{"mass", Vector(m.dim, 1.0), true}};
    m.y_scale = Vector(m.dim, 1.0);
    return m;
}

// Plain Newton on Y - base - h a f(Y) = 0 with the analytic Robertson Jacobian.
Vector robertson_newton(std::span<const double> base, double ha) {
    Vector y(base.begin(), base.end());
    for (int it = 0; it < 100; ++it) {
        const double f1 = -0.04 * y[0] + 1e4 * y[1] * y[2];
        const double f3 = 3e7 * y[1] * y[1];
        const double f2 = -f1 - f3;
        const Vector r{y[0] - base[0] - ha * f1, y[1] - base[1] - ha * f2, y[2] - base[2] - ha * f3};
        DenseMatrix jac{
            {-0.04, 1e4 * y[2], 1e4 * y[1]},
            {0.04, -1e4 * y[2] - 6e7 * y[1], -1e4 * y[1]},
            {0.0, 6e7 * y[1], 0.0},
        };
        DenseMatrix m = DenseMatrix::identity(3);
        m.axpy(-ha, jac);
        const Vector dy = lu_solve(m, r);
        double step = 0.0;
        for (std::size_t i = 0; i < 3; ++i) {
            y[i] -= dy[i];
            step = std::max(step, std::abs(dy[i]) / (1e-12 + std::abs(y[i])));
        }
        if (step < 1e-15) break;
    }
    return y;
}

}  // namespace

TEST_CASE("tableau coefficients") {
    const auto t21 = tableau(MethodName::sdirk21);
    CHECK(t21.gamma == Approx(0.2928932188).epsilon(1e-10));
    CHECK(t21.b[0] == Approx(1.0 / std::sqrt(2.0)));
    CHECK(t21.b_hat == Vector{2.0 / 3.0, 1.0 / 3.0});
    const auto t32 = tableau("sdirk32");
    CHECK(t32.gamma == 9.0 / 40.0);
    CHECK(t32.a(1, 0) == 163.0 / 520.0);
    CHECK(t32.b[2] == -723.0 / 9272.0);
    const auto t43 = tableau("sdirk43");
    CHECK(t43.gamma == 0.25);
    CHECK(t43.b[2] == 99.0 / 35.0);
    const Vector c{0.25, 0.9, 2.0 / 3.0, 0.6, 1.0};
    for (std::size_t i = 0; i < 5; ++i) CHECK(t43.c[i] == Approx(c[i]).epsilon(1e-14));
    CHECK_THROWS_AS(tableau("rk4"), UnknownNameError);
}

TEST_CASE("tableau order conditions") {
    for (auto name : {MethodName::sdirk21, MethodName::sdirk32, MethodName::sdirk43}) {
        const auto t = tableau(name);
        INFO(t.name);
        double sb = 0, sbc = 0, sbh = 0, sbhc = 0;
        for (std::size_t i = 0; i < t.stages; ++i) {
            sb += t.b[i];
            sbc += t.b[i] * t.c[i];
            sbh += t.b_hat[i];
            sbhc += t.b_hat[i] * t.c[i];
            CHECK(t.a(i, i) == t.gamma);
        }
        CHECK(sb == Approx(1.0).epsilon(1e-13));
        CHECK(sbc == Approx(0.5).epsilon(1e-13));
        CHECK(sbh == Approx(1.0).epsilon(1e-13));
        if (t.embedded_order >= 2) CHECK(sbhc == Approx(0.5).epsilon(1e-13));
        CHECK(t.stiffly_accurate);
    }
}

TEST_CASE("solve_stage trivial cases") {
    const DenseMatrix g{{-2, 1}, {2, -1}};
    const Model m(constant_model(g));
    const Vector yn{0.6, 0.4}, acc{0.1, -0.05};
    const auto r = solve_stage(m, 0.0, yn, 0.5, 0.3, acc);
    DenseMatrix a = DenseMatrix::identity(2);
    a.axpy(-0.15, g);
    const Vector expect = lu_solve(a, Vector{0.7, 0.35});
    CHECK(r.y[0] == Approx(expect[0]).epsilon(1e-14));
    CHECK(r.y[1] == Approx(expect[1]).epsilon(1e-14));
    CHECK(r.iterations <= 2);
    const auto e = solve_stage(m, 0.0, yn, 0.5, 0.0, acc);
    CHECK(e.y[0] == Approx(0.7));
    CHECK(e.y[1] == Approx(0.35));
}

TEST_CASE("solve_stage matches a Newton oracle on Robertson") {
    const Model m(robertson());
    const double gam = tableau(MethodName::sdirk21).gamma;
    const auto r = solve_stage(m, 0.0, Vector{1, 0, 0}, 1e-4, gam, Vector{0, 0, 0});
    const Vector o = robertson_newton(Vector{1, 0, 0}, 1e-4 * gam);
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(r.y[i] - o[i]) <= 1e-10 * std::max(1.0, std::abs(o[i])));
}

TEST_CASE("predictor matches the stability function on y' = -y") {
    const Model m(constant_model(DenseMatrix{{-1.0}}));
    const auto t = tableau(MethodName::sdirk21);
    const double z = -0.1, g = t.gamma, a21 = t.a(1, 0);
    const double y1 = 1.0 / (1.0 - g * z);
    const double r = (1.0 + z * a21 * y1) / (1.0 - g * z);
    const auto p = predictor_step(m, 0.0, Vector{1.0}, 0.1, t);
    CHECK(p.y_pred[0] == Approx(r).epsilon(1e-14));
    CHECK(p.y_pred == p.stages.back());
}

TEST_CASE("predictor with G = 0 is the identity") {
    const Model m(constant_model(DenseMatrix(2, 2)));
    const auto p = predictor_step(m, 0.0, Vector{0.2, 0.8}, 0.3, tableau(MethodName::sdirk43));
    for (const auto& s : p.stages) CHECK(s == Vector{0.2, 0.8});
    CHECK(p.y_pred == Vector{0.2, 0.8});
}

TEST_CASE("corrected_step inactive on positive decay") {
    const Model m(constant_model(DenseMatrix{{-1, 0}, {1, 0}}));
    for (auto mode : {CorrectionMode::final_stage, CorrectionMode::all_stages}) {
        SolverConfig c;
        c.correction = mode;
        c.mode = StepMode::fixed;
        const auto s = corrected_step(m, 0.0, Vector{1, 0.5}, 0.1, tableau(MethodName::sdirk21), c);
        for (std::size_t i = 0; i < 2; ++i)
            CHECK(std::abs(s.y_corrected[i] - s.y_pred[i]) <= 1e-12 * std::abs(s.y_pred[i]));
    }
}

TEST_CASE("corrected_step removes Robertson negativity and keeps mass") {
    const Model m(robertson());
    const Vector yn{0.5, 1e-6, 0.5 - 1e-6};
    for (auto mode : {CorrectionMode::final_stage, CorrectionMode::all_stages}) {
        SolverConfig c;
        c.correction = mode;
        c.mode = StepMode::fixed;
        const auto s = corrected_step(m, 0.0, yn, 1e4, tableau(MethodName::sdirk21), c);
        double mn = 0, sum = 0;
        for (double v : s.y_pred) mn = std::min(mn, v);
        CHECK(mn < 0.0);
        for (double v : s.y_corrected) {
            CHECK(v >= 0.0);
            sum += v;
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);
        CHECK(s.diagnostics.clip_count > 0);
    }
}

TEST_CASE("integrate constant problem in fixed mode") {
    const Model m(constant_model(DenseMatrix(2, 2)));
    SolverConfig c;
    c.mode = StepMode::fixed;
    c.h = 0.3;
    const auto t = integrate(m, c, 0.0, 1.0, Vector{1, 2});
    CHECK(t.status == RunStatus::completed);
    CHECK(t.accepted_steps == 4);
    CHECK(t.times.back() == 1.0);
    for (const auto& y : t.states) CHECK(y == Vector{1, 2});
}

TEST_CASE("integrate Robertson with final-stage correction") {
    const Model m(robertson());
    SolverConfig c;
    c.correction = CorrectionMode::final_stage;
    const auto t = integrate(m, c, 0.0, 1e4, Vector{1, 0, 0});
    CHECK(t.status == RunStatus::completed);
    CHECK(t.overall_min_component() >= 0.0);
    CHECK(t.times.back() == 1e4);
    CHECK(max_step_invariant_drift(t, Vector{1, 1, 1}) <= 1e-12);
    for (const auto& a : t.attempts)
        if (a.accepted) CHECK(a.err <= 1.0);
}

TEST_CASE("integrate rejects bad configurations") {
    const Model m(robertson());
    SolverConfig c;
    c.atol = -1;
    CHECK_THROWS_AS(integrate(m, c, 0.0, 1.0, Vector{1, 0, 0}), ConfigError);
    c = {};
    c.mode = StepMode::fixed;
    CHECK_THROWS_AS(integrate(m, c, 0.0, 1.0, Vector{1, 0, 0}), ConfigError);
    c = {};
    CHECK_THROWS(integrate(m, c, 1.0, 1.0, Vector{1, 0, 0}));
    CHECK_THROWS(integrate(m, c, 0.0, 1.0, Vector{1, 0}));
    c.correction = CorrectionMode::final_stage;
    CHECK_THROWS(integrate(m, c, 0.0, 1.0, Vector{1, -1, 0}));
}

TEST_CASE("name parsing") {
    CHECK(parse_correction("none") == CorrectionMode::none);
    CHECK(parse_correction("final") == CorrectionMode::final_stage);
    CHECK(parse_correction("all") == CorrectionMode::all_stages);
    CHECK(parse_step_mode("fixed") == StepMode::fixed);
    CHECK(parse_method("sdirk32") == MethodName::sdirk32);
    CHECK_THROWS(parse_correction("some"));
    CHECK_THROWS(parse_step_mode("auto"));
}
