#include <doctest.h>

#include <cmath>

#include "pdint/pds.hpp"
#include "pdint/problems.hpp"
#include "pdint/trajectory.hpp"

using namespace pdint;

TEST_CASE("validate_sign_structure") {
    CHECK(validate_sign_structure(DenseMatrix{{-1, 2}, {3, -4}}, 0.0).passed());
    const auto r = validate_sign_structure(DenseMatrix{{1, 0}, {0, -1}}, 0.0);
    REQUIRE(r.sign_violations.size() == 1);
    CHECK(r.sign_violations[0].row == 0);
    CHECK(r.sign_violations[0].col == 0);
    CHECK(validate_sign_structure(DenseMatrix{{-1, -0.5}, {0, 0}}, 0.0).sign_violations.size() == 1);
    CHECK(validate_sign_structure(robertson().eval_g(0.0, Vector{1, 0, 0}), 0.0).passed());
}

TEST_CASE("validate_left_kernel") {
    CHECK(validate_left_kernel(DenseMatrix{{-1, 2}, {1, -2}}, Vector{1, 1}) == 0.0);
    const auto s = stratospheric();
    const Vector y{50, 5e8, 5e11, 1.7e16, 5e8, 2e8};
    const DenseMatrix g = s.eval_g(12 * 3600.0, y);
    CHECK(validate_left_kernel(g, Vector{0, 0, 0, 0, 1, 1}) <= 1e-10 * g.norm_inf());
    CHECK(validate_left_kernel(g, Vector{1, 1, 3, 2, 1, 2}) > 0.0);
}

TEST_CASE("assemble_g_from_rates") {
    CHECK(assemble_g_from_rates(DenseMatrix{{0, 0.5}, {0, 0}}) == DenseMatrix{{-0.5, 0}, {0.5, 0}});
    CHECK(assemble_g_from_rates(DenseMatrix(2, 2)) == DenseMatrix(2, 2));
    CHECK(assemble_g_from_rates(DenseMatrix{{0, 1}, {1, 0}}) == DenseMatrix{{-1, 1}, {1, -1}});
    CHECK_THROWS_AS(assemble_g_from_rates(DenseMatrix{{0, -1}, {0, 0}}), NegativeRateError);
}

TEST_CASE("assemble_h_from_destruction") {
    CHECK(assemble_h_from_destruction(DenseMatrix(2, 2)) == DenseMatrix(2, 2));
    CHECK(assemble_h_from_destruction(DenseMatrix{{0, 2}, {0, 0}}) == DenseMatrix{{-2, 0}, {2, 0}});
    CHECK_THROWS_AS(assemble_h_from_destruction(DenseMatrix{{0, -2}, {0, 0}}), NegativeRateError);
}

TEST_CASE("validate_model on the benchmark problems") {
    for (const auto& name : problem_names()) {
        ParamMap params;
        if (name == "kdv") params["n_cells"] = "32";
        const Problem p = make_problem(name, params);
        ValidationOptions opts;
        opts.samples = 20;
        const auto rep = validate_model(p.model, opts);
        INFO(name);
        CHECK(rep.passed());
        CHECK(rep.samples_checked == 20);
    }
}

TEST_CASE("validate_model flags a broken invariant") {
    GraphLaplacianModel m;
    m.label = "leaky";
    m.dim = 2;
    m.eval_g = [](double, std::span<const double>) { return DenseMatrix{{-1, 0}, {0.5, 0}}; };
    m.invariants = {{"mass", {1, 1}, true}};
    m.y_scale = {1, 1};
    CHECK_FALSE(validate_model(m).passed());
}

TEST_CASE("Model::rhs for both forms") {
    const Model g(robertson());
    CHECK(g.rhs(0.0, Vector{1, 0, 0}) == Vector{-0.04, 0.04, 0.0});
    HFormModel h;
    h.dim = 2;
    h.eval_h = [](std::span<const double>) { return DenseMatrix{{-2, 0}, {2, 0}}; };
    const Model hm(h);
    CHECK(hm.rhs(0.0, Vector{1, 1}) == Vector{-2, 2});
}

TEST_CASE("invariant_error") {
    Trajectory t;
    t.states = {{1.0}, {1.0}, {1.0}};
    CHECK(invariant_error(t, Vector{1.0}) == 0.0);
    t.states = {{1.0}, {1.1}, {0.95}};
    CHECK(invariant_error(t, Vector{1.0}) == doctest::Approx(0.1).epsilon(1e-14));
    t.states = {{0.0}, {1.0}};
    CHECK_THROWS_AS(invariant_error(t, Vector{1.0}), ZeroInvariantError);
}
