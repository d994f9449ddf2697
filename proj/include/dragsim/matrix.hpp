#pragma once

#include <cstddef>
#include <vector>

#include "dragsim/errors.hpp"

namespace dragsim {

// Dense row-major matrix of doubles. Just enough linear algebra for the
// dense-network engine; no views, no expression templates.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}

    double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
    double* row(int r) { return data.data() + static_cast<size_t>(r) * cols; }
    const double* row(int r) const { return data.data() + static_cast<size_t>(r) * cols; }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

inline Matrix row_matrix(const std::vector<double>& v) {
    Matrix m(1, static_cast<int>(v.size()));
    m.data = v;
    return m;
}

// out = a * b^T, where a is N x K and b is M x K (rows of b are output
// features). This is the layout used by layer weights (out x in).
inline Matrix matmul_bt(const Matrix& a, const Matrix& b) {
    if (a.cols != b.cols) throw DimensionMismatch("matmul_bt: inner dimensions differ");
    Matrix out(a.rows, b.rows);
    for (int i = 0; i < a.rows; ++i) {
        const double* ai = a.row(i);
        double* oi = out.row(i);
        for (int j = 0; j < b.rows; ++j) {
            const double* bj = b.row(j);
            double acc = 0.0;
            for (int k = 0; k < a.cols; ++k) acc += ai[k] * bj[k];
            oi[j] = acc;
        }
    }
    return out;
}

// out = a * b, a is N x K, b is K x M.
inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) throw DimensionMismatch("matmul: inner dimensions differ");
    Matrix out(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i) {
        const double* ai = a.row(i);
        double* oi = out.row(i);
        for (int k = 0; k < a.cols; ++k) {
            const double aik = ai[k];
            const double* bk = b.row(k);
            for (int j = 0; j < b.cols; ++j) oi[j] += aik * bk[j];
        }
    }
    return out;
}

// out = a^T * b, a is N x K, b is N x M, result K x M.
inline Matrix matmul_at(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows) throw DimensionMismatch("matmul_at: row counts differ");
    Matrix out(a.cols, b.cols);
    for (int n = 0; n < a.rows; ++n) {
        const double* an = a.row(n);
        const double* bn = b.row(n);
        for (int k = 0; k < a.cols; ++k) {
            const double ank = an[k];
            double* ok = out.row(k);
            for (int j = 0; j < b.cols; ++j) ok[j] += ank * bn[j];
        }
    }
    return out;
}

}  // namespace dragsim
