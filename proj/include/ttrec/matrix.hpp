// Dense row-major matrix of doubles plus the handful of kernels the
// rest of the library is built on. No external linear algebra dependency.
#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ttrec {

using Vector = std::vector<double>;

struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> v;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), v(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return v[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return v[r * cols + c]; }

    double* row(std::size_t r) { return v.data() + r * cols; }
    const double* row(std::size_t r) const { return v.data() + r * cols; }

    std::span<const double> row_span(std::size_t r) const { return {row(r), cols}; }

    void zero() { std::fill(v.begin(), v.end(), 0.0); }

    bool all_finite() const {
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    }
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

// C = A * B^T. Both operands row-major, so the inner loop runs over two
// contiguous rows and vectorizes.
inline Matrix matmul_bt(const Matrix& a, const Matrix& b) {
    require(a.cols == b.cols, "matmul_bt: inner dimensions do not conform");
    Matrix c(a.rows, b.rows);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* ar = a.row(i);
        double* cr = c.row(i);
        for (std::size_t j = 0; j < b.rows; ++j) {
            const double* br = b.row(j);
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols; ++k) s += ar[k] * br[k];
            cr[j] = s;
        }
    }
    return c;
}

// C = A * B with the ikj ordering (j-contiguous accumulation).
inline Matrix matmul(const Matrix& a, const Matrix& b) {
    require(a.cols == b.rows, "matmul: inner dimensions do not conform");
    Matrix c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        double* cr = c.row(i);
        const double* ar = a.row(i);
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = ar[k];
            if (aik == 0.0) continue;
            const double* br = b.row(k);
            for (std::size_t j = 0; j < b.cols; ++j) cr[j] += aik * br[j];
        }
    }
    return c;
}

// C += A^T * B, accumulated row of B at a time (used for weight gradients).
inline void add_at_b(Matrix& c, const Matrix& a, const Matrix& b) {
    require(a.rows == b.rows && c.rows == a.cols && c.cols == b.cols,
            "add_at_b: dimensions do not conform");
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* ar = a.row(i);
        const double* br = b.row(i);
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double w = ar[k];
            if (w == 0.0) continue;
            double* cr = c.row(k);
            for (std::size_t j = 0; j < b.cols; ++j) cr[j] += w * br[j];
        }
    }
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace ttrec
