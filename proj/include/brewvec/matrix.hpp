#ifndef BREWVEC_MATRIX_HPP
#define BREWVEC_MATRIX_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace brewvec {

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    void fill(double value);
    bool all_finite() const noexcept;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Sum of a[i]*b[i] accumulated in index order. Sizes must match.
double dot(std::span<const double> a, std::span<const double> b) noexcept;

/// Builds a matrix from nested rows; all rows must have equal length.
Matrix matrix_from_rows(const std::vector<std::vector<double>>& rows);

}  // namespace brewvec

#endif  // BREWVEC_MATRIX_HPP
