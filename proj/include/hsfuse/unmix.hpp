#pragma once

// Endmember dictionary extraction: NNDSVD-initialized nonnegative matrix
// factorization with alternating exact coordinate-descent updates.

#include "hsfuse/cube.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace hsfuse {

struct EndmemberDictionary {
    Eigen::MatrixXd spectra;  // K x C, rows are endmembers

    int endmember_count() const { return static_cast<int>(spectra.rows()); }
    int band_count() const { return static_cast<int>(spectra.cols()); }

    void validate() const {
        if (spectra.rows() < 1 || spectra.cols() < 1)
            throw std::invalid_argument("endmembers: empty matrix");
        if ((spectra.array() < 0.0).any())
            throw std::invalid_argument("endmembers: negative entry");
        for (int k = 0; k < spectra.rows(); ++k)
            if (spectra.row(k).maxCoeff() <= 0.0)
                throw std::invalid_argument("endmembers: all-zero row");
    }
};

struct NmfOptions {
    int max_iters = 500;
    double rel_tol = 1e-5;     // on relative residual change
    double eps_floor = 1e-12;
    int inner_sweeps = 4;      // factor-update passes per logged iteration
};

struct NmfResult {
    Eigen::MatrixXd weights;   // N x K
    EndmemberDictionary dictionary;
    double residual = 0.0;     // final ||Y - WE||_F / ||Y||_F
    int iterations = 0;
    std::vector<double> residual_history;
};

// Plain NNDSVD: rank-K truncated SVD, leading pair from |u1|,|v1|, later
// pairs from the dominant sign-consistent part of each singular vector pair.
// Exact zeros are floored to eps so multiplicative updates can move them.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> nndsvd_init(
    const Eigen::MatrixXd& pixels, int K, double eps_floor = 1e-12) {
    const auto N = pixels.rows();
    const auto C = pixels.cols();
    if (K < 1 || K > std::min(N, C))
        throw std::invalid_argument("nndsvd_init: K out of range");
    if ((pixels.array() < 0.0).any())
        throw std::invalid_argument("nndsvd_init: negative input");

    Eigen::BDCSVD<Eigen::MatrixXd> svd(pixels, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::MatrixXd& U = svd.matrixU();
    const Eigen::MatrixXd& V = svd.matrixV();
    const Eigen::VectorXd& S = svd.singularValues();

    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(N, K);
    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(K, C);

    W.col(0) = std::sqrt(S(0)) * U.col(0).cwiseAbs();
    E.row(0) = std::sqrt(S(0)) * V.col(0).cwiseAbs().transpose();

    for (int t = 1; t < K; ++t) {
        Eigen::VectorXd u = U.col(t), v = V.col(t);
        Eigen::VectorXd up = u.cwiseMax(0.0), un = (-u).cwiseMax(0.0);
        Eigen::VectorXd vp = v.cwiseMax(0.0), vn = (-v).cwiseMax(0.0);
        const double nup = up.norm(), nun = un.norm();
        const double nvp = vp.norm(), nvn = vn.norm();
        const double termp = nup * nvp, termn = nun * nvn;
        double m;
        Eigen::VectorXd uu, vv;
        if (termp >= termn) {
            m = termp;
            uu = nup > 0 ? Eigen::VectorXd(up / nup) : up;
            vv = nvp > 0 ? Eigen::VectorXd(vp / nvp) : vp;
        } else {
            m = termn;
            uu = nun > 0 ? Eigen::VectorXd(un / nun) : un;
            vv = nvn > 0 ? Eigen::VectorXd(vn / nvn) : vn;
        }
        const double scale = std::sqrt(S(t) * m);
        W.col(t) = scale * uu;
        E.row(t) = scale * vv.transpose();
    }

    W = W.cwiseMax(0.0).unaryExpr([&](double x) { return x == 0.0 ? eps_floor : x; });
    E = E.cwiseMax(0.0).unaryExpr([&](double x) { return x == 0.0 ? eps_floor : x; });
    return {W, E};
}

// Alternating nonnegative least squares for min ||Y - WE||_F^2, (W,E) >= 0,
// solved by exact per-factor coordinate descent (HALS). Each column/row
// update is the closed-form clamped least-squares minimizer, so the
// objective is monotone non-increasing; multiplicative updates were tried
// first but converge far too slowly from an NNDSVD start with hard zeros.
inline NmfResult nmf(const Eigen::MatrixXd& pixels, int K, const NmfOptions& opts = {}) {
    if (opts.max_iters < 1) throw std::invalid_argument("nmf: max_iters must be >= 1");
    if (!(opts.rel_tol > 0.0)) throw std::invalid_argument("nmf: rel_tol must be > 0");

    auto [W, E] = nndsvd_init(pixels, K, opts.eps_floor);
    const double norm_y = pixels.norm();
    auto residual = [&](const Eigen::MatrixXd& w, const Eigen::MatrixXd& e) {
        return (pixels - w * e).norm() / (norm_y > 0 ? norm_y : 1.0);
    };

    NmfResult result;
    double prev = residual(W, E);
    result.residual_history.push_back(prev);
    int it = 0;
    for (; it < opts.max_iters; ++it) {
        for (int sweep = 0; sweep < std::max(opts.inner_sweeps, 1); ++sweep) {
            const Eigen::MatrixXd eet = E * E.transpose();
            const Eigen::MatrixXd yet = pixels * E.transpose();
            for (int k = 0; k < K; ++k) {
                const Eigen::VectorXd wk =
                    W.col(k) +
                    (yet.col(k) - W * eet.col(k)) / std::max(eet(k, k), opts.eps_floor);
                W.col(k) = wk.cwiseMax(opts.eps_floor);
            }
            const Eigen::MatrixXd wtw = W.transpose() * W;
            const Eigen::MatrixXd wty = W.transpose() * pixels;
            for (int k = 0; k < K; ++k) {
                const Eigen::VectorXd ek =
                    E.row(k).transpose() +
                    (wty.row(k).transpose() - (wtw.row(k) * E).transpose()) /
                        std::max(wtw(k, k), opts.eps_floor);
                E.row(k) = ek.cwiseMax(opts.eps_floor).transpose();
            }
        }
        const double res = residual(W, E);
        result.residual_history.push_back(res);
        const bool converged = std::abs(prev - res) < opts.rel_tol * std::max(prev, 1e-30);
        prev = res;
        if (converged) { ++it; break; }
    }
    result.weights = std::move(W);
    result.dictionary.spectra = std::move(E);
    result.residual = prev;
    result.iterations = it;
    result.dictionary.validate();
    return result;
}

// Configured endmember counts per known scene tag.
inline int choose_k(const std::string& dataset_tag, std::optional<int> override_k = {}) {
    if (override_k) return *override_k;
    if (dataset_tag == "pavia_center") return 9;
    if (dataset_tag == "pavia_university") return 9;
    throw std::invalid_argument("choose_k: unknown dataset tag '" + dataset_tag +
                                "' and no explicit K given");
}

inline void save_endmembers_csv(const EndmemberDictionary& dict, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_endmembers_csv: cannot open " + path);
    out.precision(17);
    for (int k = 0; k < dict.spectra.rows(); ++k) {
        for (int c = 0; c < dict.spectra.cols(); ++c) {
            if (c) out << ",";
            out << dict.spectra(k, c);
        }
        out << "\n";
    }
}

inline EndmemberDictionary load_endmembers_csv(const std::string& path) {
    SrfMatrix raw = load_srf_csv(path);  // same numeric CSV layout
    EndmemberDictionary dict;
    dict.spectra = raw.weights;
    dict.validate();
    return dict;
}

// K-band abundance cube for visual inspection of the NMF weights.
inline DataCube abundance_cube(const NmfResult& result, int height, int width) {
    return unflatten(result.weights, height, width);
}

}  // namespace hsfuse
