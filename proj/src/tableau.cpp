#include "pdint/tableau.hpp"

#include <cmath>

namespace pdint {

MethodName parse_method(std::string_view name) {
    if (name == "sdirk21") return MethodName::sdirk21;
    if (name == "sdirk32") return MethodName::sdirk32;
    if (name == "sdirk43") return MethodName::sdirk43;
    throw UnknownNameError("unknown method '" + std::string(name) + "' (expected sdirk21, sdirk32 or sdirk43)");
}

std::string_view to_string(MethodName m) noexcept {
    switch (m) {
        case MethodName::sdirk21: return "sdirk21";
        case MethodName::sdirk32: return "sdirk32";
        case MethodName::sdirk43: return "sdirk43";
    }
    return "unknown";
}

std::vector<double> ButcherTableau::a_row(std::size_t i) const {
    return {a.row(i).begin(), a.row(i).begin() + static_cast<std::ptrdiff_t>(i) + 1};
}

namespace {

ButcherTableau make(std::string name, DenseMatrix a, Vector b_hat, int p, int p_hat) {
    ButcherTableau t;
    t.name = std::move(name);
    t.stages = a.rows();
    t.c.assign(t.stages, 0.0);
    for (std::size_t i = 0; i < t.stages; ++i)
        for (std::size_t j = 0; j <= i; ++j) t.c[i] += a(i, j);
    t.b.assign(a.row(t.stages - 1).begin(), a.row(t.stages - 1).end());
    t.gamma = a(0, 0);
    t.a = std::move(a);
    t.b_hat = std::move(b_hat);
    t.order = p;
    t.embedded_order = p_hat;
    t.stage_order = 1;
    t.stiffly_accurate = true;
    return t;
}

ButcherTableau sdirk21() {
    const double g = 1.0 - 1.0 / std::sqrt(2.0);
    const double r = 1.0 / std::sqrt(2.0);
    return make("sdirk21", DenseMatrix{{g, 0.0}, {r, g}}, {2.0 / 3.0, 1.0 / 3.0}, 2, 1);
}

ButcherTableau sdirk32() {
    constexpr double g = 9.0 / 40.0;
    DenseMatrix a{
        {g, 0.0, 0.0, 0.0},
        {163.0 / 520.0, g, 0.0, 0.0},
        {-6481433.0 / 8838675.0, 87795409.0 / 70709400.0, g, 0.0},
        {4032.0 / 9943.0, 6929.0 / 15485.0, -723.0 / 9272.0, g},
    };
    // Second-order, L-stable embedded weights (sum 1, b_hat.c = 1/2, R_hat(inf) = 0).
    Vector b_hat{20801082561383358.0 / 77609989151488793.0, 309336252104339941.0 / 620879913211910344.0,
                 145135000616503539.0 / 620879913211910344.0, 0.0};
    return make("sdirk32", std::move(a), std::move(b_hat), 3, 2);
}

ButcherTableau sdirk43() {
    constexpr double g = 0.25;
    DenseMatrix a{
        {g, 0.0, 0.0, 0.0, 0.0},
        {13.0 / 20.0, g, 0.0, 0.0, 0.0},
        {580.0 / 1287.0, -175.0 / 5148.0, g, 0.0, 0.0},
        {12698.0 / 37375.0, -201.0 / 2990.0, 891.0 / 11500.0, g, 0.0},
        {944.0 / 1365.0, -400.0 / 819.0, 99.0 / 35.0, -575.0 / 252.0, g},
    };
    Vector b_hat{41911.0 / 60060.0, -83975.0 / 144144.0, 3393.0 / 1120.0, -27025.0 / 11088.0, 103.0 / 352.0};
    return make("sdirk43", std::move(a), std::move(b_hat), 4, 3);
}

}  // namespace

ButcherTableau tableau(MethodName name) {
    switch (name) {
        case MethodName::sdirk21: return sdirk21();
        case MethodName::sdirk32: return sdirk32();
        case MethodName::sdirk43: return sdirk43();
    }
    throw UnknownNameError("unknown method");
}

}  // namespace pdint
