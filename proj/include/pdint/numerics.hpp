#pragma once

// Small dense linear-algebra kernel: row-major matrices, LU with partial
// pivoting, weighted norms and log-log slope fitting.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdint {

using Vector = std::vector<double>;

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class SingularMatrixError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DegenerateDataError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NonFiniteError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Dense row-major matrix. Entries are checked for finiteness when a matrix is
/// built from explicit data; element access through operator() is unchecked.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols);
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
    DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

    static DenseMatrix identity(std::size_t n);
    static DenseMatrix zeros(std::size_t n) { return DenseMatrix(n, n); }
    static DenseMatrix diagonal(std::span<const double> diag);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool square() const noexcept { return rows_ == cols_; }

    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

    std::span<const double> entries() const noexcept { return data_; }
    std::span<double> entries() noexcept { return data_; }
    std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }

    DenseMatrix& operator+=(const DenseMatrix& other);
    DenseMatrix& operator-=(const DenseMatrix& other);
    DenseMatrix& operator*=(double s) noexcept;

    /// this += s * other
    void axpy(double s, const DenseMatrix& other);

    /// Multiplies column j by scale[j] (right multiplication by a diagonal matrix).
    void scale_columns(std::span<const double> scale);

    DenseMatrix transposed() const;
    Vector multiply(std::span<const double> x) const;
    /// x^T * this
    Vector left_multiply(std::span<const double> x) const;
    DenseMatrix multiply(const DenseMatrix& other) const;

    double norm_inf() const noexcept;
    bool all_finite() const noexcept;

    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator*(double s, DenseMatrix a);

/// Throws NonFiniteError if any entry is NaN or infinite.
void require_finite(std::span<const double> v, const char* what);

double norm_inf(std::span<const double> v) noexcept;
double norm_2(std::span<const double> v) noexcept;
double dot(std::span<const double> a, std::span<const double> b);

/// LU factorization with partial (row) pivoting, PA = LU.
class LuFactorization {
public:
    static constexpr double pivot_tolerance = 1e-300;

    explicit LuFactorization(DenseMatrix a);

    std::size_t dim() const noexcept { return lu_.rows(); }
    Vector solve(std::span<const double> b) const;
    /// Overwrites b with the solution.
    void solve_in_place(std::span<double> b) const;

private:
    DenseMatrix lu_;
    std::vector<std::size_t> perm_;
};

/// Solves A x = b. Throws SingularMatrixError when a pivot magnitude falls
/// below 1e-300.
Vector lu_solve(const DenseMatrix& a, std::span<const double> b);

/// sqrt( (1/d) sum_i (delta_i / (atol + rtol*|y_ref_i|))^2 )
double wrms_norm(std::span<const double> delta, std::span<const double> y_ref, double atol, double rtol);

/// Slope of the least-squares line through (ln xs, ln ys).
double fit_slope(std::span<const double> xs, std::span<const double> ys);

}  // namespace pdint
