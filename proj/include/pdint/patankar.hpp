#pragma once

// Positivity-restoring correction primitives: clipping, ratio scaling, the
// averaged graph-Laplacian matrices of the final-stage and per-stage
// correctors, and the M-matrix corrector solve.

#include <span>
#include <vector>

#include "pdint/numerics.hpp"

namespace pdint {

/// Nonnegative diagonal matrix stored by its diagonal.
struct DiagonalMatrix {
    Vector diag;

    static DiagonalMatrix identity(std::size_t n) { return {Vector(n, 1.0)}; }
    std::size_t dim() const noexcept { return diag.size(); }
    DenseMatrix dense() const { return DenseMatrix::diagonal(diag); }
    bool is_identity() const noexcept;
};

struct ScalingPolicy {
    enum class Mode { fixed, step_scaled };

    Mode mode = Mode::fixed;
    double epsilon_fixed = 1e-10;
    /// eps = epsilon_coeff * h^(p+1) in step-scaled mode.
    double epsilon_coeff = 1.0;

    /// Threshold used for a step of size h with a method of order p. Always > 0.
    double resolve(double h, int order) const;
};

struct CorrectionDiagnostics {
    std::size_t clip_count = 0;
    /// Most negative value removed by clipping stage or predictor arguments
    /// (0 when nothing was clipped).
    double max_negative_clipped = 0.0;
    /// True when some ratio-scaling entry differs from one.
    bool scaling_active = false;
    double post_solve_min_component = 0.0;
    /// Components below -1e-12 ||y_n||_inf after the M-matrix solve.
    std::size_t post_solve_negative_count = 0;
    /// |w^T| change introduced by zeroing those components, summed over invariants.
    double conservation_defect = 0.0;

    void absorb_clip(std::span<const double> v);
    void merge(const CorrectionDiagnostics& other);
};

/// max(v, 0) componentwise.
Vector clip(std::span<const double> v);

/// diag( max(Y_l, 0) / max(Z_l, eps) ).
DiagonalMatrix ratio_scaling(std::span<const double> y, std::span<const double> z, double eps);

/// sum_j b_j G_j Sigma_j, the diagonal factors scaling the columns of G_j.
DenseMatrix averaged_g_final(std::span<const double> b, std::span<const DenseMatrix> g_list,
                             std::span<const DiagonalMatrix> sigma_list);

/// sum_{j<i} a_{i,j} G_j Sigma_j + a_{i,i} G_diag, where a_row has length i and
/// the prior lists length i-1.
DenseMatrix stage_corrected_g(std::span<const double> a_row, std::span<const DenseMatrix> g_prior,
                              std::span<const DiagonalMatrix> sigma_prior, const DenseMatrix& g_diag);

struct CorrectorResult {
    Vector y;
    CorrectionDiagnostics diagnostics;
};

/// Solves (I - h G_bar) y = y_n. The result is returned as computed; callers
/// decide what to do with round-off negativity recorded in the diagnostics.
CorrectorResult corrector_solve(std::span<const double> y_n, double h, const DenseMatrix& g_bar);

/// H-form corrector: H_bar = (sum_j b_j H_j) diag(1 / max(y_pred, eps)),
/// then (I - h H_bar) y = y_n.
CorrectorResult h_form_corrector(std::span<const double> y_n, double h, std::span<const double> b,
                                 std::span<const DenseMatrix> h_list, std::span<const double> y_pred, double eps);

/// Threshold below which post-solve components count as genuine negativity.
inline constexpr double post_solve_negativity_tol = 1e-12;

}  // namespace pdint
