#pragma once

// Independent brute-force oracles used to freeze expected values. These
// deliberately avoid the library's computation paths: plain loops, power
// iteration instead of LAPACK, central differences instead of backprop.

#include "hsfuse/cube.hpp"
#include "hsfuse/psf.hpp"

#include <Eigen/Core>
#include <cmath>
#include <vector>

namespace testsupport {

inline double oracle_rmse(const hsfuse::DataCube& x, const hsfuse::DataCube& y) {
    double s = 0.0;
    size_t n = 0;
    for (int i = 0; i < x.height; ++i)
        for (int j = 0; j < x.width; ++j)
            for (int k = 0; k < x.bands; ++k) {
                const double d = double(y.at(i, j, k)) - double(x.at(i, j, k));
                s += d * d;
                ++n;
            }
    return std::sqrt(s / n);
}

struct OracleBandStats {
    double mx, my, vx, vy, cov;
};

inline OracleBandStats oracle_band_stats(const hsfuse::DataCube& x,
                                         const hsfuse::DataCube& y, int k) {
    const double n = double(x.height) * x.width;
    double mx = 0, my = 0;
    for (int i = 0; i < x.height; ++i)
        for (int j = 0; j < x.width; ++j) {
            mx += x.at(i, j, k);
            my += y.at(i, j, k);
        }
    mx /= n;
    my /= n;
    double vx = 0, vy = 0, cov = 0;
    for (int i = 0; i < x.height; ++i)
        for (int j = 0; j < x.width; ++j) {
            const double a = x.at(i, j, k) - mx;
            const double b = y.at(i, j, k) - my;
            vx += a * a;
            vy += b * b;
            cov += a * b;
        }
    return {mx, my, vx / n, vy / n, cov / n};
}

inline double oracle_ssim(const hsfuse::DataCube& x, const hsfuse::DataCube& y,
                          double max_value = 1.0) {
    const double c1 = (0.01 * max_value) * (0.01 * max_value);
    const double c2 = (0.03 * max_value) * (0.03 * max_value);
    double total = 0;
    for (int k = 0; k < x.bands; ++k) {
        const auto s = oracle_band_stats(x, y, k);
        total += (2 * s.mx * s.my + c1) * (2 * s.cov + c2) /
                 ((s.mx * s.mx + s.my * s.my + c1) * (s.vx + s.vy + c2));
    }
    return total / x.bands;
}

inline double oracle_uiqi(const hsfuse::DataCube& x, const hsfuse::DataCube& y) {
    double total = 0;
    for (int k = 0; k < x.bands; ++k) {
        const auto s = oracle_band_stats(x, y, k);
        total += 4 * s.cov * s.mx * s.my /
                 ((s.vx + s.vy) * (s.mx * s.mx + s.my * s.my));
    }
    return total / x.bands;
}

inline double oracle_ergas(const hsfuse::DataCube& x, const hsfuse::DataCube& y,
                           double ratio) {
    const double n = double(x.height) * x.width;
    double acc = 0;
    for (int k = 0; k < x.bands; ++k) {
        double mean = 0, err2 = 0;
        for (int i = 0; i < x.height; ++i)
            for (int j = 0; j < x.width; ++j) {
                mean += x.at(i, j, k);
                const double d = double(y.at(i, j, k)) - x.at(i, j, k);
                err2 += d * d;
            }
        mean /= n;
        err2 /= n;
        acc += err2 / (mean * mean);
    }
    return 100.0 * ratio * std::sqrt(acc / x.bands);
}

inline double oracle_sam(const hsfuse::DataCube& x, const hsfuse::DataCube& y,
                         double eps = 1e-8, double delta = 1e-9) {
    double total = 0;
    for (int i = 0; i < x.height; ++i)
        for (int j = 0; j < x.width; ++j) {
            double dot = 0, nx = 0, ny = 0;
            for (int k = 0; k < x.bands; ++k) {
                dot += double(x.at(i, j, k)) * y.at(i, j, k);
                nx += double(x.at(i, j, k)) * x.at(i, j, k);
                ny += double(y.at(i, j, k)) * y.at(i, j, k);
            }
            double arg = dot / (std::sqrt(nx) * std::sqrt(ny) + eps);
            arg = std::min(arg, 1.0 - delta);
            total += std::acos(std::max(-1.0, arg)) * 180.0 / M_PI;
        }
    return total / (double(x.height) * x.width);
}

// Naive O(HWk^2) per-band convolution with symmetric padding, no clamp step
// fusion: clamps at the end like the implementation contract requires.
inline hsfuse::DataCube oracle_convolve(const hsfuse::DataCube& cube,
                                        const hsfuse::PsfKernel& kernel) {
    hsfuse::DataCube out(cube.height, cube.width, cube.bands);
    auto reflect = [](int i, int n) {
        while (i < 0 || i >= n) {
            if (i < 0) i = -i - 1;
            if (i >= n) i = 2 * n - 1 - i;
        }
        return i;
    };
    for (int k = 0; k < cube.bands; ++k)
        for (int i = 0; i < cube.height; ++i)
            for (int j = 0; j < cube.width; ++j) {
                double s = 0;
                for (int u = -7; u <= 7; ++u)
                    for (int v = -7; v <= 7; ++v)
                        s += kernel.at(u + 7, v + 7) *
                             cube.at(reflect(i + u, cube.height), reflect(j + v, cube.width), k);
                out.at(i, j, k) = float(std::clamp(s, 0.0, 1.0));
            }
    return out;
}

// Leading singular triple by power iteration on A^T A.
struct LeadingSvd {
    double sigma;
    Eigen::VectorXd u;
    Eigen::VectorXd v;
};

inline LeadingSvd oracle_leading_svd(const Eigen::MatrixXd& a, int iters = 2000) {
    Eigen::VectorXd v = Eigen::VectorXd::Ones(a.cols()).normalized();
    for (int it = 0; it < iters; ++it)
        v = (a.transpose() * (a * v)).normalized();
    const Eigen::VectorXd av = a * v;
    const double sigma = av.norm();
    return {sigma, av / sigma, v};
}

}  // namespace testsupport
