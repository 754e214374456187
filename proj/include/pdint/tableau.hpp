#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "pdint/numerics.hpp"

namespace pdint {

enum class MethodName { sdirk21, sdirk32, sdirk43 };

class UnknownNameError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

MethodName parse_method(std::string_view name);
std::string_view to_string(MethodName m) noexcept;

/// Lower-triangular SDIRK coefficients with an embedded weight set.
struct ButcherTableau {
    std::string name;
    std::size_t stages = 0;
    DenseMatrix a;
    Vector b;
    Vector b_hat;
    Vector c;
    int order = 0;
    int embedded_order = 0;
    int stage_order = 1;
    double gamma = 0.0;
    bool stiffly_accurate = false;

    /// Row i of A up to and including the diagonal.
    std::vector<double> a_row(std::size_t i) const;
};

ButcherTableau tableau(MethodName name);
inline ButcherTableau tableau(std::string_view name) { return tableau(parse_method(name)); }

}  // namespace pdint
