#pragma once

// Production-destruction models in graph-Laplacian form y' = G(t,y) y and in
// H-form y' = H(y) 1, plus the structural checks both forms must satisfy.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "pdint/numerics.hpp"

namespace pdint {

class NegativeRateError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ZeroInvariantError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Linear invariant w^T y. `exact` means w^T G(t,y) = 0 holds identically for
/// the chosen G, so the corrector preserves it to round-off; otherwise the
/// invariant is only tracked.
struct Invariant {
    std::string label;
    Vector w;
    bool exact = true;
};

using GFunction = std::function<DenseMatrix(double t, std::span<const double> y)>;
using HFunction = std::function<DenseMatrix(std::span<const double> y)>;
using RhsFunction = std::function<Vector(std::span<const double> y)>;

struct GraphLaplacianModel {
    std::string label;
    std::size_t dim = 0;
    GFunction eval_g;
    std::vector<Invariant> invariants;
    /// Sign pattern holds for all y, not only y >= 0; stage arguments are then
    /// used unclipped by the corrector.
    bool strong_sign = false;
    bool nonneg_domain_only = true;
    /// Per-component upper bound for random structural sampling.
    Vector y_scale;
    /// Time window for random structural sampling (non-autonomous models).
    double sample_t_lo = 0.0;
    double sample_t_hi = 0.0;
};

struct HFormModel {
    std::string label;
    std::size_t dim = 0;
    HFunction eval_h;
    /// Optional fast evaluation of H(y) 1; must agree with eval_h.
    RhsFunction rhs_direct;
    std::vector<Invariant> invariants;
    Vector y_scale;
};

/// Either form of production-destruction system. Immutable after construction
/// and safe to evaluate concurrently as long as the wrapped callables are pure.
class Model {
public:
    Model(GraphLaplacianModel m);  // NOLINT(google-explicit-constructor)
    Model(HFormModel m);           // NOLINT(google-explicit-constructor)

    std::size_t dim() const noexcept;
    const std::string& label() const noexcept;
    const std::vector<Invariant>& invariants() const noexcept;
    const Vector& y_scale() const noexcept;

    bool is_h_form() const noexcept { return std::holds_alternative<HFormModel>(impl_); }
    const GraphLaplacianModel& graph() const { return std::get<GraphLaplacianModel>(impl_); }
    const HFormModel& h_form() const { return std::get<HFormModel>(impl_); }

    /// f(t,y): G(t,y) y or H(y) 1.
    Vector rhs(double t, std::span<const double> y) const;

    /// The structure matrix at (t,y): G(t,y) for graph-Laplacian models, H(y)
    /// for H-form models.
    DenseMatrix structure_matrix(double t, std::span<const double> y) const;

private:
    std::variant<GraphLaplacianModel, HFormModel> impl_;
};

struct SignViolation {
    std::size_t row;
    std::size_t col;
    double value;
};

struct KernelResidual {
    std::size_t invariant;
    double residual;
};

struct StructureReport {
    std::vector<SignViolation> sign_violations;
    std::vector<KernelResidual> kernel_residuals;
    std::size_t samples_checked = 0;

    bool passed() const noexcept { return sign_violations.empty() && kernel_residuals.empty(); }
    void merge(const StructureReport& other);
};

/// Reports every diagonal entry > tol and every off-diagonal entry < -tol.
StructureReport validate_sign_structure(const DenseMatrix& m, double tol);

/// ||w^T M||_inf.
double validate_left_kernel(const DenseMatrix& m, std::span<const double> w);

/// Relative tolerance for kernel residuals of invariants flagged exact.
inline constexpr double kernel_tolerance = 1e-10;

struct ValidationOptions {
    std::size_t samples = 100;
    std::uint64_t seed = 20240611;
    /// Sign tolerance relative to ||G||_inf.
    double sign_tol_rel = 0.0;
    double kernel_tol_rel = kernel_tolerance;
};

/// Samples y uniformly on [0, y_scale] componentwise (and t on the model's
/// sampling window) and checks the sign pattern and every exact invariant.
/// H-form models are also checked for zero column sums.
StructureReport validate_model(const Model& model, const ValidationOptions& opts = {});

/// G = L^T - diag(L 1) for nonnegative transition rates L.
DenseMatrix assemble_g_from_rates(const DenseMatrix& rates);

/// H = D^T - diag(D 1) for nonnegative destruction rates D.
DenseMatrix assemble_h_from_destruction(const DenseMatrix& destruction);

}  // namespace pdint
