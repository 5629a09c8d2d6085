#pragma once

// Reference-based reconstruction quality metrics: RMSE, PSNR, SSIM, UIQI,
// ERGAS, SAM. SSIM and UIQI use global per-band statistics and are averaged
// over bands; windowed variants are deliberately not the default.

#include "hsfuse/cube.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

namespace hsfuse {

struct MetricOptions {
    double max_value = 1.0;    // peak signal level for PSNR/SSIM constants
    double sam_eps = 1e-8;
    double sam_delta = 1e-9;
    double ergas_ratio = 1.0;  // HR-over-LR ground-sample-distance ratio (1/r)
};

inline constexpr double psnr_infinite = std::numeric_limits<double>::infinity();

struct QualityReport {
    double rmse = 0.0;
    double psnr_db = 0.0;      // psnr_infinite when reconstruction is exact
    double ssim = 0.0;
    double uiqi = 0.0;
    double ergas = 0.0;
    double sam_deg = 0.0;
    size_t params = 0;
    size_t flops = 0;
    double wall_time_s = 0.0;
    int sam_zero_pixels = 0;   // pixels eps-guarded toward 90 degrees
    int ergas_zero_mean_bands = 0;
};

namespace detail {

inline void require_same_dims(const DataCube& x, const DataCube& y, const char* what) {
    if (x.height != y.height || x.width != y.width || x.bands != y.bands)
        throw std::invalid_argument(std::string(what) + ": cube dimensions differ");
}

struct BandStats {
    double mean_x = 0, mean_y = 0, var_x = 0, var_y = 0, cov = 0;
};

inline BandStats band_stats(const DataCube& x, const DataCube& y, int k) {
    BandStats s;
    const size_t n = x.pixel_count();
    for (size_t p = 0; p < n; ++p) {
        s.mean_x += x.values[p * x.bands + k];
        s.mean_y += y.values[p * y.bands + k];
    }
    s.mean_x /= n;
    s.mean_y /= n;
    for (size_t p = 0; p < n; ++p) {
        const double dx = x.values[p * x.bands + k] - s.mean_x;
        const double dy = y.values[p * y.bands + k] - s.mean_y;
        s.var_x += dx * dx;
        s.var_y += dy * dy;
        s.cov += dx * dy;
    }
    s.var_x /= n;
    s.var_y /= n;
    s.cov /= n;
    return s;
}

}  // namespace detail

inline double rmse(const DataCube& x, const DataCube& x_hat) {
    detail::require_same_dims(x, x_hat, "rmse");
    double s = 0.0;
    for (size_t i = 0; i < x.values.size(); ++i) {
        const double d = static_cast<double>(x_hat.values[i]) - x.values[i];
        s += d * d;
    }
    return std::sqrt(s / x.values.size());
}

inline double psnr(const DataCube& x, const DataCube& x_hat,
                   const MetricOptions& opts = {}) {
    const double r = rmse(x, x_hat);
    if (r == 0.0) return psnr_infinite;
    return 10.0 * std::log10(opts.max_value * opts.max_value / (r * r));
}

inline double ssim(const DataCube& x, const DataCube& x_hat,
                   const MetricOptions& opts = {}) {
    detail::require_same_dims(x, x_hat, "ssim");
    const double c1 = std::pow(0.01 * opts.max_value, 2);
    const double c2 = std::pow(0.03 * opts.max_value, 2);
    double total = 0.0;
    for (int k = 0; k < x.bands; ++k) {
        const auto s = detail::band_stats(x, x_hat, k);
        const double num = (2 * s.mean_x * s.mean_y + c1) * (2 * s.cov + c2);
        const double den =
            (s.mean_x * s.mean_x + s.mean_y * s.mean_y + c1) * (s.var_x + s.var_y + c2);
        total += num / den;
    }
    return total / x.bands;
}

inline double uiqi(const DataCube& x, const DataCube& x_hat) {
    detail::require_same_dims(x, x_hat, "uiqi");
    double total = 0.0;
    for (int k = 0; k < x.bands; ++k) {
        const auto s = detail::band_stats(x, x_hat, k);
        const double den = (s.var_x + s.var_y) * (s.mean_x * s.mean_x + s.mean_y * s.mean_y);
        if (den < 1e-300) {
            // both bands constant: identical -> 1, otherwise no agreement
            bool equal = true;
            for (size_t p = 0; p < x.pixel_count() && equal; ++p)
                equal = x.values[p * x.bands + k] == x_hat.values[p * x_hat.bands + k];
            total += equal ? 1.0 : 0.0;
            continue;
        }
        total += 4.0 * s.cov * s.mean_x * s.mean_y / den;
    }
    return total / x.bands;
}

inline double ergas(const DataCube& x, const DataCube& x_hat,
                    const MetricOptions& opts = {}, int* zero_mean_bands = nullptr) {
    detail::require_same_dims(x, x_hat, "ergas");
    const size_t n = x.pixel_count();
    double acc = 0.0;
    int flagged = 0;
    for (int k = 0; k < x.bands; ++k) {
        double mean = 0.0, err2 = 0.0;
        for (size_t p = 0; p < n; ++p) {
            const double gx = x.values[p * x.bands + k];
            const double d = static_cast<double>(x_hat.values[p * x_hat.bands + k]) - gx;
            mean += gx;
            err2 += d * d;
        }
        mean /= n;
        err2 /= n;
        double m2 = mean * mean;
        if (m2 < 1e-24) {
            m2 = 1e-24;
            ++flagged;
        }
        acc += err2 / m2;
    }
    if (zero_mean_bands) *zero_mean_bands = flagged;
    return 100.0 * opts.ergas_ratio * std::sqrt(acc / x.bands);
}

inline double sam(const DataCube& x, const DataCube& x_hat,
                  const MetricOptions& opts = {}, int* zero_pixels = nullptr) {
    detail::require_same_dims(x, x_hat, "sam");
    const size_t n = x.pixel_count();
    double total = 0.0;
    int flagged = 0;
    for (size_t p = 0; p < n; ++p) {
        double dot = 0.0, nx = 0.0, ny = 0.0;
        for (int k = 0; k < x.bands; ++k) {
            const double a = x.values[p * x.bands + k];
            const double b = x_hat.values[p * x_hat.bands + k];
            dot += a * b;
            nx += a * a;
            ny += b * b;
        }
        const double denom = std::sqrt(nx) * std::sqrt(ny) + opts.sam_eps;
        if (nx == 0.0 || ny == 0.0) ++flagged;
        const double arg = std::min(dot / denom, 1.0 - opts.sam_delta);
        total += std::acos(std::clamp(arg, -1.0, 1.0)) * 180.0 / M_PI;
    }
    if (zero_pixels) *zero_pixels = flagged;
    return total / n;
}

inline QualityReport evaluate(const DataCube& x, const DataCube& x_hat,
                              const MetricOptions& opts = {}) {
    QualityReport report;
    report.rmse = rmse(x, x_hat);
    report.psnr_db = psnr(x, x_hat, opts);
    report.ssim = ssim(x, x_hat, opts);
    report.uiqi = uiqi(x, x_hat);
    report.ergas = ergas(x, x_hat, opts, &report.ergas_zero_mean_bands);
    report.sam_deg = sam(x, x_hat, opts, &report.sam_zero_pixels);
    return report;
}

inline std::string report_csv_header() {
    return "rmse,psnr_db,ssim,uiqi,ergas,sam_deg,params,flops";
}

inline std::string report_csv_row(const QualityReport& r) {
    std::ostringstream out;
    out.precision(10);
    out << r.rmse << ",";
    if (std::isinf(r.psnr_db)) out << "inf";
    else out << r.psnr_db;
    out << "," << r.ssim << "," << r.uiqi << "," << r.ergas << "," << r.sam_deg
        << "," << r.params << "," << r.flops;
    return out.str();
}

inline std::string report_text(const QualityReport& r) {
    std::ostringstream out;
    out.precision(6);
    out << "rmse     " << r.rmse << "\n";
    out << "psnr_db  ";
    if (std::isinf(r.psnr_db)) out << "inf";
    else out << r.psnr_db;
    out << "\n";
    out << "ssim     " << r.ssim << "\n";
    out << "uiqi     " << r.uiqi << "\n";
    out << "ergas    " << r.ergas << "\n";
    out << "sam_deg  " << r.sam_deg << "\n";
    if (r.params) out << "params   " << r.params << "\n";
    if (r.flops) out << "flops    " << r.flops << "\n";
    return out.str();
}

}  // namespace hsfuse
