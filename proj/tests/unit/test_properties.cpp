#include <doctest.h>

#include "../support/properties.hpp"
#include "pdint/sdirk.hpp"

using namespace pdint;
using namespace pdint::testing;

TEST_CASE("M-matrix inverse is nonnegative") {
    const auto r = mmatrix_inverse_nonnegative(1000, 11);
    INFO(r.detail << " worst=" << r.worst);
    CHECK(r.passed);
    CHECK(r.cases == 1000);
}

TEST_CASE("scaled combinations stay graph Laplacians") {
    const auto r = scaled_combination_closure(1000, 12);
    INFO(r.detail << " worst=" << r.worst);
    CHECK(r.passed);
}

TEST_CASE("clipping is idempotent and never increases the error") {
    const auto r = clip_properties(10000, 13);
    INFO(r.detail);
    CHECK(r.passed);
}

TEST_CASE("corrector is inactive on positive trajectories") {
    const auto r = corrector_inactive(60, 14);
    INFO(r.detail << " worst=" << r.worst);
    CHECK(r.passed);
}

TEST_CASE("KdV rhs equals the flux-difference oracle") {
    const auto r = kdv_rhs_oracle(100, 15);
    INFO(r.detail << " worst=" << r.worst);
    CHECK(r.passed);
}

TEST_CASE("solve_stage equals the Newton oracle") {
    const auto r = stage_solver_oracle(50, 16);
    INFO(r.detail << " worst=" << r.worst);
    CHECK(r.passed);
}

TEST_CASE("synthetic problem clips on every step") {
    const Model m(clipping_synthetic());
    SolverConfig c;
    c.mode = StepMode::fixed;
    c.correction = CorrectionMode::final_stage;
    c.h = 0.1;
    const auto t = integrate(m, c, 0.0, 2.0, clipping_synthetic_initial());
    REQUIRE(t.status == RunStatus::completed);
    for (std::size_t k = 1; k < t.clip_count.size(); ++k) CHECK(t.clip_count[k] > 0);
    CHECK(t.overall_min_component() >= 0.0);
}
