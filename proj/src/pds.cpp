#include "pdint/pds.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace pdint {

Model::Model(GraphLaplacianModel m) : impl_(std::move(m)) {
    const auto& g = std::get<GraphLaplacianModel>(impl_);
    if (g.dim == 0 || !g.eval_g) throw std::invalid_argument("GraphLaplacianModel: empty model");
    for (const auto& inv : g.invariants)
        if (inv.w.size() != g.dim) throw DimensionError("GraphLaplacianModel: invariant length mismatch");
}

Model::Model(HFormModel m) : impl_(std::move(m)) {
    const auto& h = std::get<HFormModel>(impl_);
    if (h.dim == 0 || !h.eval_h) throw std::invalid_argument("HFormModel: empty model");
    for (const auto& inv : h.invariants)
        if (inv.w.size() != h.dim) throw DimensionError("HFormModel: invariant length mismatch");
}

std::size_t Model::dim() const noexcept {
    return std::visit([](const auto& m) { return m.dim; }, impl_);
}

const std::string& Model::label() const noexcept {
    return std::visit([](const auto& m) -> const std::string& { return m.label; }, impl_);
}

const std::vector<Invariant>& Model::invariants() const noexcept {
    return std::visit([](const auto& m) -> const std::vector<Invariant>& { return m.invariants; }, impl_);
}

const Vector& Model::y_scale() const noexcept {
    return std::visit([](const auto& m) -> const Vector& { return m.y_scale; }, impl_);
}

Vector Model::rhs(double t, std::span<const double> y) const {
    if (const auto* g = std::get_if<GraphLaplacianModel>(&impl_)) return g->eval_g(t, y).multiply(y);
    const auto& h = std::get<HFormModel>(impl_);
    if (h.rhs_direct) return h.rhs_direct(y);
    const DenseMatrix hm = h.eval_h(y);
    Vector out(h.dim, 0.0);
    for (std::size_t i = 0; i < h.dim; ++i)
        for (double x : hm.row(i)) out[i] += x;
    return out;
}

DenseMatrix Model::structure_matrix(double t, std::span<const double> y) const {
    if (const auto* g = std::get_if<GraphLaplacianModel>(&impl_)) return g->eval_g(t, y);
    return std::get<HFormModel>(impl_).eval_h(y);
}

void StructureReport::merge(const StructureReport& other) {
    sign_violations.insert(sign_violations.end(), other.sign_violations.begin(), other.sign_violations.end());
    kernel_residuals.insert(kernel_residuals.end(), other.kernel_residuals.begin(), other.kernel_residuals.end());
    samples_checked += other.samples_checked;
}

StructureReport validate_sign_structure(const DenseMatrix& m, double tol) {
    if (!m.square()) throw DimensionError("validate_sign_structure: matrix is not square");
    StructureReport report;
    report.samples_checked = 1;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) {
            const double v = m(i, j);
            const bool bad = (i == j) ? v > tol : v < -tol;
            if (bad) report.sign_violations.push_back({i, j, v});
        }
    return report;
}

double validate_left_kernel(const DenseMatrix& m, std::span<const double> w) {
    return norm_inf(m.left_multiply(w));
}

StructureReport validate_model(const Model& model, const ValidationOptions& opts) {
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t d = model.dim();
    Vector scale = model.y_scale();
    if (scale.size() != d) scale.assign(d, 1.0);

    double t_lo = 0.0, t_hi = 0.0;
    if (!model.is_h_form()) {
        t_lo = model.graph().sample_t_lo;
        t_hi = model.graph().sample_t_hi;
    }

    const Vector ones(d, 1.0);
    StructureReport report;
    Vector y(d);
    for (std::size_t s = 0; s < opts.samples; ++s) {
        for (std::size_t i = 0; i < d; ++i) y[i] = scale[i] * unit(rng);
        const double t = t_lo + (t_hi - t_lo) * unit(rng);
        const DenseMatrix m = model.structure_matrix(t, y);
        const double mnorm = m.norm_inf();

        auto signs = validate_sign_structure(m, opts.sign_tol_rel * mnorm);
        report.merge(signs);

        const auto& invs = model.invariants();
        for (std::size_t k = 0; k < invs.size(); ++k) {
            if (!invs[k].exact) continue;
            const double r = validate_left_kernel(m, invs[k].w);
            if (r > opts.kernel_tol_rel * mnorm * norm_inf(invs[k].w)) report.kernel_residuals.push_back({k, r});
        }
        if (model.is_h_form()) {
            const double r = validate_left_kernel(m, ones);
            if (r > opts.kernel_tol_rel * mnorm) report.kernel_residuals.push_back({invs.size(), r});
        }
    }
    report.samples_checked = opts.samples;
    return report;
}

namespace {

DenseMatrix laplacian_from_outflow_rates(const DenseMatrix& rates, const char* what) {
    if (!rates.square()) throw DimensionError(std::string(what) + ": matrix is not square");
    const std::size_t n = rates.rows();
    DenseMatrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        double outflow = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double r = rates(i, j);
            if (r < 0.0) {
                throw NegativeRateError(std::string(what) + ": negative rate at (" + std::to_string(i) + "," +
                                        std::to_string(j) + ")");
            }
            if (i == j) continue;
            out(j, i) = r;
            outflow += r;
        }
        // The self-rate cancels between L^T and diag(L 1).
        out(i, i) = -outflow;
    }
    return out;
}

}  // namespace

DenseMatrix assemble_g_from_rates(const DenseMatrix& rates) {
    return laplacian_from_outflow_rates(rates, "assemble_g_from_rates");
}

DenseMatrix assemble_h_from_destruction(const DenseMatrix& destruction) {
    return laplacian_from_outflow_rates(destruction, "assemble_h_from_destruction");
}

}  // namespace pdint
