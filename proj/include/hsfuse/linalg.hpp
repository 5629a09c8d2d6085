#pragma once

// Small dense row-major matrix with fixed-order contractions. Every output
// coefficient is accumulated in the same index order regardless of how many
// columns the right operand has, so a batched product equals the per-column
// product bit for bit.

#include <cassert>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace hsfuse {

struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> d;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), d(static_cast<size_t>(r) * c, 0.0) {}

    double& operator()(int i, int j) { return d[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return d[static_cast<size_t>(i) * cols + j]; }
    double* row(int i) { return d.data() + static_cast<size_t>(i) * cols; }
    const double* row(int i) const { return d.data() + static_cast<size_t>(i) * cols; }
    size_t size() const { return d.size(); }

    void set_zero() { std::fill(d.begin(), d.end(), 0.0); }
};

// C = A * B, A: m x k, B: k x n.
inline Mat matmul(const Mat& a, const Mat& b) {
    if (a.cols != b.rows) throw std::invalid_argument("matmul: dimension mismatch");
    Mat c(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i) {
        const double* ai = a.row(i);
        double* ci = c.row(i);
        for (int l = 0; l < a.cols; ++l) {
            const double s = ai[l];
            const double* bl = b.row(l);
            for (int j = 0; j < b.cols; ++j) ci[j] += s * bl[j];
        }
    }
    return c;
}

// C = A^T * B, A: k x m, B: k x n.
inline Mat matmul_tn(const Mat& a, const Mat& b) {
    if (a.rows != b.rows) throw std::invalid_argument("matmul_tn: dimension mismatch");
    Mat c(a.cols, b.cols);
    for (int l = 0; l < a.rows; ++l) {
        const double* al = a.row(l);
        const double* bl = b.row(l);
        for (int i = 0; i < a.cols; ++i) {
            const double s = al[i];
            double* ci = c.row(i);
            for (int j = 0; j < b.cols; ++j) ci[j] += s * bl[j];
        }
    }
    return c;
}

// C = A * B^T, A: m x k, B: n x k.
inline Mat matmul_nt(const Mat& a, const Mat& b) {
    if (a.cols != b.cols) throw std::invalid_argument("matmul_nt: dimension mismatch");
    Mat c(a.rows, b.rows);
    for (int i = 0; i < a.rows; ++i) {
        const double* ai = a.row(i);
        for (int j = 0; j < b.rows; ++j) {
            const double* bj = b.row(j);
            double s = 0.0;
            for (int l = 0; l < a.cols; ++l) s += ai[l] * bj[l];
            c(i, j) = s;
        }
    }
    return c;
}

}  // namespace hsfuse
