#include "pdint/patankar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pdint {

bool DiagonalMatrix::is_identity() const noexcept {
    return std::all_of(diag.begin(), diag.end(), [](double x) { return x == 1.0; });
}

double ScalingPolicy::resolve(double h, int order) const {
    const double eps = mode == Mode::fixed ? epsilon_fixed : epsilon_coeff * std::pow(h, order + 1);
    if (!(eps > 0.0)) {
        // step-scaled eps can underflow for tiny h
        return std::max(eps, std::numeric_limits<double>::min());
    }
    return eps;
}

void CorrectionDiagnostics::absorb_clip(std::span<const double> v) {
    for (double x : v) {
        if (x < 0.0) {
            ++clip_count;
            max_negative_clipped = std::min(max_negative_clipped, x);
        }
    }
}

void CorrectionDiagnostics::merge(const CorrectionDiagnostics& other) {
    clip_count += other.clip_count;
    max_negative_clipped = std::min(max_negative_clipped, other.max_negative_clipped);
    scaling_active = scaling_active || other.scaling_active;
    post_solve_min_component = std::min(post_solve_min_component, other.post_solve_min_component);
    post_solve_negative_count += other.post_solve_negative_count;
    conservation_defect += other.conservation_defect;
}

Vector clip(std::span<const double> v) {
    Vector out(v.begin(), v.end());
    for (double& x : out) x = std::max(x, 0.0);
    return out;
}

DiagonalMatrix ratio_scaling(std::span<const double> y, std::span<const double> z, double eps) {
    if (y.size() != z.size()) throw DimensionError("ratio_scaling: length mismatch");
    if (!(eps > 0.0)) throw std::invalid_argument("ratio_scaling: eps must be positive");
    DiagonalMatrix s{Vector(y.size())};
    for (std::size_t l = 0; l < y.size(); ++l) s.diag[l] = std::max(y[l], 0.0) / std::max(z[l], eps);
    return s;
}

namespace {

void accumulate_scaled(DenseMatrix& acc, double coeff, const DenseMatrix& g, const DiagonalMatrix& sigma) {
    if (g.rows() != acc.rows() || g.cols() != acc.cols() || sigma.dim() != acc.cols())
        throw DimensionError("averaged G: matrix dimension mismatch");
    if (coeff == 0.0) return;
    const std::size_t n = acc.rows();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) acc(i, j) += coeff * g(i, j) * sigma.diag[j];
}

}  // namespace

DenseMatrix averaged_g_final(std::span<const double> b, std::span<const DenseMatrix> g_list,
                             std::span<const DiagonalMatrix> sigma_list) {
    if (b.size() != g_list.size() || b.size() != sigma_list.size())
        throw DimensionError("averaged_g_final: list lengths differ");
    if (b.empty()) throw DimensionError("averaged_g_final: empty stage list");
    DenseMatrix acc(g_list.front().rows(), g_list.front().cols());
    for (std::size_t j = 0; j < b.size(); ++j) accumulate_scaled(acc, b[j], g_list[j], sigma_list[j]);
    return acc;
}

DenseMatrix stage_corrected_g(std::span<const double> a_row, std::span<const DenseMatrix> g_prior,
                              std::span<const DiagonalMatrix> sigma_prior, const DenseMatrix& g_diag) {
    if (a_row.empty() || g_prior.size() + 1 != a_row.size() || sigma_prior.size() != g_prior.size())
        throw DimensionError("stage_corrected_g: list lengths inconsistent with stage index");
    DenseMatrix acc(g_diag.rows(), g_diag.cols());
    for (std::size_t j = 0; j < g_prior.size(); ++j) accumulate_scaled(acc, a_row[j], g_prior[j], sigma_prior[j]);
    acc.axpy(a_row.back(), g_diag);
    return acc;
}

CorrectorResult corrector_solve(std::span<const double> y_n, double h, const DenseMatrix& g_bar) {
    if (!g_bar.square() || g_bar.rows() != y_n.size()) throw DimensionError("corrector_solve: dimension mismatch");
    if (!(h > 0.0)) throw std::invalid_argument("corrector_solve: h must be positive");
    const std::size_t n = y_n.size();
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) m(i, j) = -h * g_bar(i, j);
        m(i, i) += 1.0;
    }
    CorrectorResult out{lu_solve(m, y_n), {}};
    const double floor = -post_solve_negativity_tol * norm_inf(y_n);
    double mn = 0.0;
    for (double x : out.y) {
        mn = std::min(mn, x);
        if (x < floor) ++out.diagnostics.post_solve_negative_count;
    }
    out.diagnostics.post_solve_min_component = mn;
    return out;
}

CorrectorResult h_form_corrector(std::span<const double> y_n, double h, std::span<const double> b,
                                 std::span<const DenseMatrix> h_list, std::span<const double> y_pred, double eps) {
    if (b.size() != h_list.size() || b.empty()) throw DimensionError("h_form_corrector: list lengths differ");
    const Vector ones(y_n.size(), 1.0);
    const DiagonalMatrix sigma = ratio_scaling(ones, y_pred, eps);
    const std::vector<DiagonalMatrix> sigmas(b.size(), sigma);
    const DenseMatrix h_bar = averaged_g_final(b, h_list, sigmas);
    CorrectorResult out = corrector_solve(y_n, h, h_bar);
    out.diagnostics.scaling_active = !sigma.is_identity();
    return out;
}

}  // namespace pdint
