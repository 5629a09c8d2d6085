#pragma once

// Wald's-protocol synthetic observation generation: per-band blur, stride
// decimation, SNR-referenced Gaussian noise, spectral projection, and the
// block-replicated coarse spectral prior.

#include "hsfuse/cube.hpp"
#include "hsfuse/psf.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <random>

namespace hsfuse {

inline constexpr double noise_disabled = std::numeric_limits<double>::infinity();

// SNR pairing from the synthetic grid: (4,35) (8,30) (16,25) (32,20) dB.
inline double snr_for_factor(int r) {
    switch (r) {
        case 4: return 35.0;
        case 8: return 30.0;
        case 16: return 25.0;
        case 32: return 20.0;
        default: return noise_disabled;
    }
}

namespace detail {

// symmetric (edge-repeating) reflection of index i into [0, n)
inline int reflect_index(int i, int n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
}

inline uint64_t mix_seed(uint64_t seed, uint64_t stream) {
    uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    x ^= x >> 30; x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27; x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

}  // namespace detail

// Independent 2-D convolution of each band, symmetric boundary padding,
// output clamped to [0,1].
inline DataCube convolve_per_band(const DataCube& cube, const PsfKernel& kernel) {
    cube.validate();
    if (cube.height < PsfKernel::size || cube.width < PsfKernel::size)
        throw std::invalid_argument("convolve_per_band: cube smaller than kernel");
    DataCube out(cube.height, cube.width, cube.bands);
    out.wavelengths = cube.wavelengths;
    for (int i = 0; i < cube.height; ++i) {
        for (int j = 0; j < cube.width; ++j) {
            for (int k = 0; k < cube.bands; ++k) {
                double s = 0.0;
                for (int du = -PsfKernel::half; du <= PsfKernel::half; ++du) {
                    const int ii = detail::reflect_index(i + du, cube.height);
                    for (int dv = -PsfKernel::half; dv <= PsfKernel::half; ++dv) {
                        const int jj = detail::reflect_index(j + dv, cube.width);
                        s += kernel.at(du + PsfKernel::half, dv + PsfKernel::half) *
                             cube.at(ii, jj, k);
                    }
                }
                out.at(i, j, k) = static_cast<float>(std::clamp(s, 0.0, 1.0));
            }
        }
    }
    return out;
}

// Stride sampling: keeps the top-left pixel of each r x r block.
inline DataCube decimate(const DataCube& cube, int r) {
    cube.validate();
    if (r < 1) throw std::invalid_argument("decimate: r must be >= 1");
    if (r > cube.height || r > cube.width)
        throw std::invalid_argument("decimate: r exceeds a spatial dimension");
    if (r == 1) return cube;
    DataCube out(cube.height / r, cube.width / r, cube.bands);
    out.wavelengths = cube.wavelengths;
    for (int i = 0; i < out.height; ++i)
        for (int j = 0; j < out.width; ++j)
            for (int k = 0; k < cube.bands; ++k)
                out.at(i, j, k) = cube.at(i * r, j * r, k);
    return out;
}

// Zero-mean Gaussian noise per band, variance sigma_k^2 = P_k / 10^(snr/10)
// with P_k the band's mean squared signal. Each band draws from its own
// stream keyed by (seed, band), so results do not depend on band order.
// Output clamped to [0,1]. snr_db = +inf disables noise.
inline DataCube add_noise_snr(const DataCube& cube, double snr_db, uint64_t seed) {
    cube.validate();
    if (std::isinf(snr_db) && snr_db > 0) return cube;
    if (!std::isfinite(snr_db))
        throw std::invalid_argument("add_noise_snr: snr_db must be finite or +inf");
    DataCube out = cube;
    const size_t npix = cube.pixel_count();
    for (int k = 0; k < cube.bands; ++k) {
        double power = 0.0;
        for (size_t n = 0; n < npix; ++n) {
            const double v = cube.values[n * cube.bands + k];
            power += v * v;
        }
        power /= static_cast<double>(npix);
        const double sigma = std::sqrt(power / std::pow(10.0, snr_db / 10.0));
        std::mt19937_64 rng(detail::mix_seed(seed, static_cast<uint64_t>(k)));
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (size_t n = 0; n < npix; ++n) {
            const double v = cube.values[n * cube.bands + k] + sigma * gauss(rng);
            out.values[n * cube.bands + k] = static_cast<float>(std::clamp(v, 0.0, 1.0));
        }
    }
    return out;
}

struct DegradeConfig {
    int r = 4;                               // spatial downsampling factor
    std::optional<double> hsi_snr_db;        // derived from r when unset
    double msi_snr_db = 40.0;
    uint64_t seed = 0;
    PsfKernel psf;
    SrfMatrix srf;

    double effective_hsi_snr() const {
        return hsi_snr_db ? *hsi_snr_db : snr_for_factor(r);
    }
};

// LR-HSI = noise(decimate(convolve(gt, psf), r)); HR-MSI = noise(gt x srf).
inline std::pair<DataCube, DataCube> wald_generate(const DataCube& gt,
                                                   const DegradeConfig& cfg) {
    DataCube blurred = convolve_per_band(gt, cfg.psf);
    DataCube lr_hsi = add_noise_snr(decimate(blurred, cfg.r),
                                    cfg.effective_hsi_snr(),
                                    detail::mix_seed(cfg.seed, 0x4851ULL));
    DataCube hr_msi = add_noise_snr(apply_srf(gt, cfg.srf), cfg.msi_snr_db,
                                    detail::mix_seed(cfg.seed, 0x5153ULL));
    return {std::move(lr_hsi), std::move(hr_msi)};
}

// Training-time CSP: downsample by s, replicate each pixel s x s. When s does
// not divide the spatial dims the trailing rows/cols are dropped; callers
// that pair CSP pixels with LR pixels must crop the LR cube to match.
inline DataCube build_csp(const DataCube& lr_hsi, int s, bool* truncated = nullptr) {
    lr_hsi.validate();
    if (s < 1) throw std::invalid_argument("build_csp: s must be >= 1");
    if (s > lr_hsi.height || s > lr_hsi.width)
        throw std::invalid_argument("build_csp: s exceeds a spatial dimension");
    const int h = (lr_hsi.height / s) * s;
    const int w = (lr_hsi.width / s) * s;
    if (truncated) *truncated = (h != lr_hsi.height || w != lr_hsi.width);
    DataCube coarse = decimate(crop(lr_hsi, {0, 0, h, w}), s);
    DataCube out(h, w, lr_hsi.bands);
    out.wavelengths = lr_hsi.wavelengths;
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j)
            for (int k = 0; k < lr_hsi.bands; ++k)
                out.at(i, j, k) = coarse.at(i / s, j / s, k);
    return out;
}

// Inference-time CSP: replicate each LR pixel r x r up to the HR grid.
inline DataCube build_inference_csp(const DataCube& lr_hsi, int r) {
    lr_hsi.validate();
    if (r < 1) throw std::invalid_argument("build_inference_csp: r must be >= 1");
    DataCube out(lr_hsi.height * r, lr_hsi.width * r, lr_hsi.bands);
    out.wavelengths = lr_hsi.wavelengths;
    for (int i = 0; i < out.height; ++i)
        for (int j = 0; j < out.width; ++j)
            for (int k = 0; k < lr_hsi.bands; ++k)
                out.at(i, j, k) = lr_hsi.at(i / r, j / r, k);
    return out;
}

}  // namespace hsfuse
