#pragma once

#include <cstddef>
#include <vector>

#include "rebasin/errors.hpp"

namespace rebasin {

// Dense row-major double matrix. The universal numeric carrier: weights,
// biases (n x 1), batches, permutation parameters.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {
        if (rows == 0 || cols == 0) throw DimensionError("Matrix: rows and cols must be >= 1");
    }
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
        : rows_(rows), cols_(cols), data_(std::move(entries)) {
        if (rows == 0 || cols == 0) throw DimensionError("Matrix: rows and cols must be >= 1");
        if (data_.size() != rows * cols) throw DimensionError("Matrix: entry count != rows*cols");
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    Matrix transposed() const;

    bool operator==(const Matrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

// C = A * B
Matrix matmul(const Matrix& a, const Matrix& b);
// C = A * B^T
Matrix matmul_nt(const Matrix& a, const Matrix& b);
// C = A^T * B
Matrix matmul_tn(const Matrix& a, const Matrix& b);

Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix scaled(const Matrix& a, double s);
// alpha*a + beta*b
Matrix lincomb(double alpha, const Matrix& a, double beta, const Matrix& b);

double sum_all(const Matrix& a);
double sum_squares(const Matrix& a);
double max_abs(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);
double l1_diff(const Matrix& a, const Matrix& b);
bool all_finite(const Matrix& a);

}  // namespace rebasin
