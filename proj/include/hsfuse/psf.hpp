#pragma once

// Analytic 15x15 point-spread-function kernels. Each family is evaluated on
// the integer grid u,v in [-7,7] and normalized so the entries sum to one.
// Signed families (Sinc, Hermite, Gabor) normalize by their algebraic sum; a
// near-zero sum is rejected instead of divided through.

#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>

namespace hsfuse {

enum class PsfKind {
    Gaussian,
    Kolmogorov,
    Airy,
    Moffat,
    Sinc,
    LorentzianSquared,
    Hermite,
    Parabolic,
    Gabor,
    Delta,
};

using PsfParams = std::map<std::string, double>;

struct PsfKernel {
    static constexpr int size = 15;
    static constexpr int half = 7;
    PsfKind kind = PsfKind::Delta;
    std::array<double, size * size> weights{};

    double at(int i, int j) const { return weights[static_cast<size_t>(i) * size + j]; }
    double& at(int i, int j) { return weights[static_cast<size_t>(i) * size + j]; }
};

inline const char* psf_kind_name(PsfKind kind) {
    switch (kind) {
        case PsfKind::Gaussian: return "gaussian";
        case PsfKind::Kolmogorov: return "kolmogorov";
        case PsfKind::Airy: return "airy";
        case PsfKind::Moffat: return "moffat";
        case PsfKind::Sinc: return "sinc";
        case PsfKind::LorentzianSquared: return "lorentzian_squared";
        case PsfKind::Hermite: return "hermite";
        case PsfKind::Parabolic: return "parabolic";
        case PsfKind::Gabor: return "gabor";
        case PsfKind::Delta: return "delta";
    }
    throw std::logic_error("psf_kind_name: bad kind");
}

inline PsfKind parse_psf_kind(const std::string& name) {
    for (PsfKind k : {PsfKind::Gaussian, PsfKind::Kolmogorov, PsfKind::Airy,
                      PsfKind::Moffat, PsfKind::Sinc, PsfKind::LorentzianSquared,
                      PsfKind::Hermite, PsfKind::Parabolic, PsfKind::Gabor,
                      PsfKind::Delta})
        if (name == psf_kind_name(k)) return k;
    throw std::invalid_argument("unknown PSF kind: " + name);
}

constexpr std::array<PsfKind, 10> all_psf_kinds = {
    PsfKind::Gaussian, PsfKind::Kolmogorov, PsfKind::Airy,     PsfKind::Moffat,
    PsfKind::Sinc,     PsfKind::LorentzianSquared, PsfKind::Hermite,
    PsfKind::Parabolic, PsfKind::Gabor,     PsfKind::Delta,
};

namespace detail {

inline double psf_param(const PsfParams& params, const std::string& name, double dflt) {
    auto it = params.find(name);
    return it == params.end() ? dflt : it->second;
}

inline double sinc1(double x) {
    if (x == 0.0) return 1.0;
    const double px = M_PI * x;
    return std::sin(px) / px;
}

}  // namespace detail

inline PsfKernel make_kernel(PsfKind kind, const PsfParams& params = {}) {
    using detail::psf_param;
    PsfKernel k;
    k.kind = kind;

    auto fill_radial = [&](auto&& f) {
        for (int i = 0; i < PsfKernel::size; ++i)
            for (int j = 0; j < PsfKernel::size; ++j) {
                const double u = i - PsfKernel::half;
                const double v = j - PsfKernel::half;
                k.at(i, j) = f(std::sqrt(u * u + v * v));
            }
    };
    auto fill_xy = [&](auto&& f) {
        for (int i = 0; i < PsfKernel::size; ++i)
            for (int j = 0; j < PsfKernel::size; ++j)
                k.at(i, j) = f(i - PsfKernel::half, j - PsfKernel::half);
    };

    switch (kind) {
        case PsfKind::Gaussian: {
            const double sigma = psf_param(params, "sigma", 2.5);
            if (!(sigma > 0.0)) throw std::invalid_argument("gaussian: sigma must be > 0");
            fill_radial([&](double r) { return std::exp(-r * r / (2.0 * sigma * sigma)); });
            break;
        }
        case PsfKind::Kolmogorov: {
            const double r0 = psf_param(params, "r0", 3.0);
            if (!(r0 > 0.0)) throw std::invalid_argument("kolmogorov: r0 must be > 0");
            fill_radial([&](double r) { return std::exp(-3.44 * std::pow(r / r0, 5.0 / 3.0)); });
            break;
        }
        case PsfKind::Airy: {
            const double R = psf_param(params, "R", 3.0);
            if (!(R > 0.0)) throw std::invalid_argument("airy: R must be > 0");
            fill_radial([&](double r) {
                const double x = M_PI * r / R;
                if (x == 0.0) return 1.0;
                const double a = 2.0 * std::cyl_bessel_j(1, x) / x;
                return a * a;
            });
            break;
        }
        case PsfKind::Moffat: {
            const double alpha = psf_param(params, "alpha", 3.0);
            const double beta = psf_param(params, "beta", 2.0);
            if (!(alpha > 0.0)) throw std::invalid_argument("moffat: alpha must be > 0");
            if (!(beta > 1.0)) throw std::invalid_argument("moffat: beta must be > 1");
            fill_radial([&](double r) {
                return std::pow(1.0 + r * r / (alpha * alpha), -beta);
            });
            break;
        }
        case PsfKind::Sinc: {
            const double scale = psf_param(params, "scale", 3.0);
            if (!(scale > 0.0)) throw std::invalid_argument("sinc: scale must be > 0");
            fill_xy([&](int u, int v) {
                return detail::sinc1(u / scale) * detail::sinc1(v / scale);
            });
            break;
        }
        case PsfKind::LorentzianSquared: {
            const double gamma = psf_param(params, "gamma", 2.0);
            if (!(gamma > 0.0)) throw std::invalid_argument("lorentzian_squared: gamma must be > 0");
            fill_radial([&](double r) {
                const double l = 1.0 / (1.0 + r * r / (gamma * gamma));
                return l * l;
            });
            break;
        }
        case PsfKind::Hermite: {
            const double sigma = psf_param(params, "sigma", 2.5);
            if (!(sigma > 0.0)) throw std::invalid_argument("hermite: sigma must be > 0");
            auto h2 = [](double x) { return 4.0 * x * x - 2.0; };
            fill_xy([&](int u, int v) {
                const double g = std::exp(-(u * u + v * v) / (2.0 * sigma * sigma));
                return h2(u / sigma) * h2(v / sigma) * g;
            });
            break;
        }
        case PsfKind::Parabolic: {
            const double R = psf_param(params, "R", 7.0);
            if (!(R > 0.0)) throw std::invalid_argument("parabolic: R must be > 0");
            fill_radial([&](double r) { return std::max(0.0, 1.0 - r * r / (R * R)); });
            break;
        }
        case PsfKind::Gabor: {
            const double sigma = psf_param(params, "sigma", 2.5);
            const double freq = psf_param(params, "freq", 0.15);
            if (!(sigma > 0.0)) throw std::invalid_argument("gabor: sigma must be > 0");
            fill_xy([&](int u, int v) {
                const double g = std::exp(-(u * u + v * v) / (2.0 * sigma * sigma));
                return g * std::cos(2.0 * M_PI * freq * u);
            });
            break;
        }
        case PsfKind::Delta: {
            k.weights.fill(0.0);
            k.at(PsfKernel::half, PsfKernel::half) = 1.0;
            return k;
        }
    }

    double sum = 0.0;
    for (double w : k.weights) sum += w;
    if (std::abs(sum) < 1e-6)
        throw std::invalid_argument(std::string("make_kernel: ") + psf_kind_name(kind) +
                                    " kernel sum too close to zero to normalize");
    for (double& w : k.weights) w /= sum;
    return k;
}

inline void save_kernel_csv(const PsfKernel& k, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_kernel_csv: cannot open " + path);
    out.precision(17);
    for (int i = 0; i < PsfKernel::size; ++i) {
        for (int j = 0; j < PsfKernel::size; ++j) {
            if (j) out << ",";
            out << k.at(i, j);
        }
        out << "\n";
    }
}

}  // namespace hsfuse
