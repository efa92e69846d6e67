#include "rebasin/matrix.hpp"

#include <cmath>

namespace rebasin {

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw DimensionError("matmul: inner dimensions disagree");
    Matrix c(a.rows(), b.cols());
    const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
    for (std::size_t i = 0; i < n; ++i) {
        double* ci = &c.data()[i * m];
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = a(i, p);
            if (aip == 0.0) continue;
            const double* bp = &b.data()[p * m];
            for (std::size_t j = 0; j < m; ++j) ci[j] += aip * bp[j];
        }
    }
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols())
        throw DimensionError("matmul_nt: inner dimensions disagree");
    Matrix c(a.rows(), b.rows());
    const std::size_t n = a.rows(), k = a.cols(), m = b.rows();
    for (std::size_t i = 0; i < n; ++i) {
        const double* ai = &a.data()[i * k];
        for (std::size_t j = 0; j < m; ++j) {
            const double* bj = &b.data()[j * k];
            double s = 0.0;
            for (std::size_t p = 0; p < k; ++p) s += ai[p] * bj[p];
            c(i, j) = s;
        }
    }
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows())
        throw DimensionError("matmul_tn: inner dimensions disagree");
    Matrix c(a.cols(), b.cols());
    const std::size_t n = a.cols(), k = a.rows(), m = b.cols();
    for (std::size_t p = 0; p < k; ++p) {
        const double* ap = &a.data()[p * n];
        const double* bp = &b.data()[p * m];
        for (std::size_t i = 0; i < n; ++i) {
            const double api = ap[i];
            if (api == 0.0) continue;
            double* ci = &c.data()[i * m];
            for (std::size_t j = 0; j < m; ++j) ci[j] += api * bp[j];
        }
    }
    return c;
}

static void check_same(const Matrix& a, const Matrix& b, const char* op) {
    if (!a.same_shape(b)) throw DimensionError(std::string(op) + ": shape mismatch");
}

Matrix add(const Matrix& a, const Matrix& b) {
    check_same(a, b, "add");
    Matrix c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += b[i];
    return c;
}

Matrix sub(const Matrix& a, const Matrix& b) {
    check_same(a, b, "sub");
    Matrix c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c[i] -= b[i];
    return c;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    check_same(a, b, "hadamard");
    Matrix c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= b[i];
    return c;
}

Matrix scaled(const Matrix& a, double s) {
    Matrix c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= s;
    return c;
}

Matrix lincomb(double alpha, const Matrix& a, double beta, const Matrix& b) {
    check_same(a, b, "lincomb");
    Matrix c(a.rows(), a.cols());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = alpha * a[i] + beta * b[i];
    return c;
}

double sum_all(const Matrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i];
    return s;
}

double sum_squares(const Matrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * a[i];
    return s;
}

double max_abs(const Matrix& a) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i]));
    return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    check_same(a, b, "max_abs_diff");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

double l1_diff(const Matrix& a, const Matrix& b) {
    check_same(a, b, "l1_diff");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
    return s;
}

bool all_finite(const Matrix& a) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!std::isfinite(a[i])) return false;
    return true;
}

}  // namespace rebasin
