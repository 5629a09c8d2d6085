#pragma once

// Latent estimation network: a compact per-pixel MLP mapping MSI spectra
// (optionally concatenated with coarse-prior spectra) to K abundance-like
// latents, composed with a fixed linear-mixing head. Trained self-supervised
// with MAE loss, Adam, and a one-cycle learning-rate schedule.
//
// All dense products use the fixed-order routines in linalg.hpp, so batched
// inference is bit-identical to per-pixel inference and training is
// deterministic for a given seed.

#include "hsfuse/cube.hpp"
#include "hsfuse/degrade.hpp"
#include "hsfuse/linalg.hpp"
#include "hsfuse/unmix.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace hsfuse {

enum class Activation { Relu, LeakyRelu, Gelu, Tanh };
enum class OutputMode { Linear, Relu, Softmax };
enum class LossKind { Mae, Mse };

inline const char* activation_name(Activation a) {
    switch (a) {
        case Activation::Relu: return "relu";
        case Activation::LeakyRelu: return "leaky_relu";
        case Activation::Gelu: return "gelu";
        case Activation::Tanh: return "tanh";
    }
    throw std::logic_error("activation_name");
}

inline Activation parse_activation(const std::string& s) {
    for (Activation a : {Activation::Relu, Activation::LeakyRelu, Activation::Gelu,
                         Activation::Tanh})
        if (s == activation_name(a)) return a;
    throw std::invalid_argument("unknown activation: " + s);
}

inline const char* output_mode_name(OutputMode m) {
    switch (m) {
        case OutputMode::Linear: return "linear";
        case OutputMode::Relu: return "relu";
        case OutputMode::Softmax: return "softmax";
    }
    throw std::logic_error("output_mode_name");
}

inline OutputMode parse_output_mode(const std::string& s) {
    for (OutputMode m : {OutputMode::Linear, OutputMode::Relu, OutputMode::Softmax})
        if (s == output_mode_name(m)) return m;
    throw std::invalid_argument("unknown output mode: " + s);
}

struct LenModel {
    int d_in = 0;
    int hidden = 1024;
    int hidden_layers = 1;   // 0 = direct linear head, Table-6 deep variant uses 2
    int K = 0;
    Activation hidden_activation = Activation::Relu;
    OutputMode output_mode = OutputMode::Linear;
    std::vector<Mat> weights;              // layer l: dims[l+1] x dims[l]
    std::vector<std::vector<double>> biases;

    std::vector<int> layer_dims() const {
        std::vector<int> dims;
        dims.push_back(d_in);
        for (int l = 0; l < hidden_layers; ++l) dims.push_back(hidden);
        dims.push_back(K);
        return dims;
    }
};

inline LenModel init_len_model(int d_in, int hidden, int hidden_layers, int K,
                               Activation act, OutputMode out, uint64_t seed) {
    if (d_in < 1) throw std::invalid_argument("init_len_model: d_in must be >= 1");
    if (K < 1) throw std::invalid_argument("init_len_model: K must be >= 1");
    if (hidden_layers < 0) throw std::invalid_argument("init_len_model: negative hidden_layers");
    if (hidden_layers > 0 && hidden < 1)
        throw std::invalid_argument("init_len_model: hidden must be >= 1");
    LenModel m;
    m.d_in = d_in;
    m.hidden = hidden;
    m.hidden_layers = hidden_layers;
    m.K = K;
    m.hidden_activation = act;
    m.output_mode = out;
    const auto dims = m.layer_dims();
    std::mt19937_64 rng(detail::mix_seed(seed, 0x11ULL));
    for (size_t l = 0; l + 1 < dims.size(); ++l) {
        const int fan_in = dims[l];
        const double limit = std::sqrt(6.0 / fan_in);
        std::uniform_real_distribution<double> uni(-limit, limit);
        Mat w(dims[l + 1], dims[l]);
        for (double& x : w.d) x = uni(rng);
        m.weights.push_back(std::move(w));
        m.biases.emplace_back(dims[l + 1], 0.0);
    }
    return m;
}

inline size_t count_params(const LenModel& m) {
    if (m.d_in < 1) throw std::invalid_argument("count_params: model has no inputs");
    size_t n = 0;
    const auto dims = m.layer_dims();
    for (size_t l = 0; l + 1 < dims.size(); ++l)
        n += static_cast<size_t>(dims[l + 1]) * (dims[l] + 1);
    return n;
}

// FLOPs for one forward pass over `pixels` pixels including the linear-mixing
// head into `out_bands` spectral bands; a multiply-add counts as 2.
inline size_t estimate_flops(const LenModel& m, size_t pixels, int out_bands) {
    if (m.d_in < 1) throw std::invalid_argument("estimate_flops: model has no inputs");
    size_t per_pixel = 0;
    const auto dims = m.layer_dims();
    for (size_t l = 0; l + 1 < dims.size(); ++l)
        per_pixel += static_cast<size_t>(dims[l]) * dims[l + 1];
    per_pixel += static_cast<size_t>(m.K) * out_bands;
    return pixels * 2 * per_pixel;
}

namespace detail {

inline double act_eval(Activation a, double x) {
    switch (a) {
        case Activation::Relu: return x > 0 ? x : 0.0;
        case Activation::LeakyRelu: return x > 0 ? x : 0.01 * x;
        case Activation::Gelu: return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0)));
        case Activation::Tanh: return std::tanh(x);
    }
    return 0.0;
}

inline double act_grad(Activation a, double x) {
    switch (a) {
        case Activation::Relu: return x > 0 ? 1.0 : 0.0;
        case Activation::LeakyRelu: return x > 0 ? 1.0 : 0.01;
        case Activation::Gelu: {
            const double s = x / std::sqrt(2.0);
            const double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
            return 0.5 * (1.0 + std::erf(s)) + x * phi;
        }
        case Activation::Tanh: {
            const double t = std::tanh(x);
            return 1.0 - t * t;
        }
    }
    return 0.0;
}

inline void softmax_columns(Mat& a) {
    for (int j = 0; j < a.cols; ++j) {
        double mx = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < a.rows; ++i) mx = std::max(mx, a(i, j));
        double sum = 0.0;
        for (int i = 0; i < a.rows; ++i) {
            const double e = std::exp(a(i, j) - mx);
            a(i, j) = e;
            sum += e;
        }
        for (int i = 0; i < a.rows; ++i) a(i, j) /= sum;
    }
}

}  // namespace detail

struct ForwardCache {
    std::vector<Mat> inputs;   // input to each layer (post-activation of previous)
    std::vector<Mat> pre;      // pre-activation of each layer
    Mat output;                // post output-activation, K x B
};

// Batched forward pass; columns are pixels.
inline Mat forward_batch(const LenModel& m, const Mat& z, ForwardCache* cache = nullptr) {
    if (z.rows != m.d_in) throw std::invalid_argument("forward: input dimension mismatch");
    Mat x = z;
    ForwardCache local;
    ForwardCache& cc = cache ? *cache : local;
    cc.inputs.clear();
    cc.pre.clear();
    const size_t L = m.weights.size();
    for (size_t l = 0; l < L; ++l) {
        cc.inputs.push_back(x);
        Mat s = matmul(m.weights[l], x);
        for (int i = 0; i < s.rows; ++i) {
            const double b = m.biases[l][i];
            double* si = s.row(i);
            for (int j = 0; j < s.cols; ++j) si[j] += b;
        }
        cc.pre.push_back(s);
        if (l + 1 < L) {
            x = s;
            for (double& v : x.d) v = detail::act_eval(m.hidden_activation, v);
        } else {
            x = s;
            switch (m.output_mode) {
                case OutputMode::Linear: break;
                case OutputMode::Relu:
                    for (double& v : x.d) v = v > 0 ? v : 0.0;
                    break;
                case OutputMode::Softmax:
                    detail::softmax_columns(x);
                    break;
            }
        }
    }
    cc.output = x;
    return x;
}

// Per-pixel forward, identical to a width-1 batch.
inline std::vector<double> forward(const LenModel& m, const std::vector<double>& z) {
    if (static_cast<int>(z.size()) != m.d_in)
        throw std::invalid_argument("forward: input dimension mismatch");
    Mat zc(m.d_in, 1);
    for (int i = 0; i < m.d_in; ++i) zc(i, 0) = z[i];
    Mat a = forward_batch(m, zc);
    std::vector<double> out(m.K);
    for (int i = 0; i < m.K; ++i) out[i] = a(i, 0);
    return out;
}

// Linear mixing: y_hat = a E with E the K x C dictionary.
inline std::vector<double> reconstruct(const std::vector<double>& a,
                                       const EndmemberDictionary& dict) {
    if (static_cast<int>(a.size()) != dict.endmember_count())
        throw std::invalid_argument("reconstruct: latent dimension mismatch");
    std::vector<double> y(dict.band_count(), 0.0);
    for (int c = 0; c < dict.band_count(); ++c) {
        double s = 0.0;
        for (int k = 0; k < dict.endmember_count(); ++k) s += a[k] * dict.spectra(k, c);
        y[c] = s;
    }
    return y;
}

// Batch loss: MAE is the mean over pixels of the
// per-pixel spectral L1 norm; MSE the mean of the squared L2 norm.
inline double loss_value(const Mat& pred, const Mat& target, LossKind kind) {
    if (pred.rows != target.rows || pred.cols != target.cols)
        throw std::invalid_argument("loss: shape mismatch");
    double total = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) {
        const double d = pred.d[i] - target.d[i];
        total += kind == LossKind::Mae ? std::abs(d) : d * d;
    }
    return total / pred.cols;
}

struct LenGradients {
    std::vector<Mat> weights;
    std::vector<std::vector<double>> biases;
    double loss = 0.0;
};

// Analytic gradients of the batch loss w.r.t. all LEN parameters; the
// dictionary E is fixed and receives no gradient. MAE subgradient at an
// exactly-zero residual is 0.
inline LenGradients backward(const LenModel& m, const Mat& z, const Mat& y,
                             const EndmemberDictionary& dict, LossKind kind) {
    const int C = dict.band_count();
    if (y.rows != C) throw std::invalid_argument("backward: target band mismatch");
    if (dict.endmember_count() != m.K)
        throw std::invalid_argument("backward: dictionary/latent size mismatch");
    const int B = z.cols;

    Mat e_mat(m.K, C);
    for (int k = 0; k < m.K; ++k)
        for (int c = 0; c < C; ++c) e_mat(k, c) = dict.spectra(k, c);

    ForwardCache cache;
    Mat a = forward_batch(m, z, &cache);
    Mat pred = matmul_tn(e_mat, a);  // C x B

    LenGradients g;
    g.loss = loss_value(pred, y, kind);

    Mat dpred(C, B);
    const double inv_b = 1.0 / B;
    for (size_t i = 0; i < dpred.size(); ++i) {
        const double d = pred.d[i] - y.d[i];
        if (kind == LossKind::Mae)
            dpred.d[i] = d > 0 ? inv_b : (d < 0 ? -inv_b : 0.0);
        else
            dpred.d[i] = 2.0 * d * inv_b;
    }

    Mat da = matmul(e_mat, dpred);  // K x B

    const size_t L = m.weights.size();
    // through the output activation
    Mat ds = da;
    switch (m.output_mode) {
        case OutputMode::Linear: break;
        case OutputMode::Relu:
            for (size_t i = 0; i < ds.size(); ++i)
                if (cache.pre[L - 1].d[i] <= 0) ds.d[i] = 0.0;
            break;
        case OutputMode::Softmax: {
            const Mat& s = cache.output;
            for (int j = 0; j < B; ++j) {
                double dot = 0.0;
                for (int i = 0; i < m.K; ++i) dot += s(i, j) * da(i, j);
                for (int i = 0; i < m.K; ++i)
                    ds(i, j) = s(i, j) * (da(i, j) - dot);
            }
            break;
        }
    }

    g.weights.resize(L);
    g.biases.resize(L);
    for (size_t li = L; li-- > 0;) {
        g.weights[li] = matmul_nt(ds, cache.inputs[li]);
        g.biases[li].assign(static_cast<size_t>(ds.rows), 0.0);
        for (int i = 0; i < ds.rows; ++i) {
            double s = 0.0;
            const double* row = ds.row(i);
            for (int j = 0; j < ds.cols; ++j) s += row[j];
            g.biases[li][i] = s;
        }
        if (li > 0) {
            Mat dx = matmul_tn(m.weights[li], ds);
            for (size_t i = 0; i < dx.size(); ++i)
                dx.d[i] *= detail::act_grad(m.hidden_activation, cache.pre[li - 1].d[i]);
            ds = std::move(dx);
        }
    }
    return g;
}

// -------------------------------------------------------------------------
// Optimizer and schedule

struct TrainConfig {
    int epochs = 100;
    int batch_size = 4096;
    uint64_t seed = 0;
    double lr_max = 1e-3;
    double div_factor = 25.0;
    double final_div_factor = 1e4;
    double warmup_fraction = 0.3;
    LossKind loss = LossKind::Mae;
    // architecture
    int hidden = 1024;
    int hidden_layers = 1;
    Activation hidden_activation = Activation::Relu;
    OutputMode output_mode = OutputMode::Linear;

    void validate() const {
        if (epochs < 1 || batch_size < 1)
            throw std::invalid_argument("train config: epochs and batch_size must be >= 1");
        if (!(lr_max > 0)) throw std::invalid_argument("train config: lr_max must be > 0");
        if (!(warmup_fraction > 0 && warmup_fraction < 1))
            throw std::invalid_argument("train config: warmup_fraction must be in (0,1)");
    }
};

struct OneCycleState {
    long step = 0;
    long total_steps = 0;
};

// Cosine ramp lr_max/div_factor -> lr_max over warmup_fraction of the run,
// then cosine anneal to lr_max/final_div_factor.
inline double one_cycle_lr(const TrainConfig& cfg, const OneCycleState& state) {
    if (state.step < 0 || state.step > state.total_steps || state.total_steps < 1)
        throw std::invalid_argument("one_cycle_lr: invalid state");
    const double lr_init = cfg.lr_max / cfg.div_factor;
    const double lr_final = cfg.lr_max / cfg.final_div_factor;
    const double warm = cfg.warmup_fraction * state.total_steps;
    const double s = static_cast<double>(state.step);
    if (s <= warm)
        return lr_init + (cfg.lr_max - lr_init) * 0.5 * (1.0 - std::cos(M_PI * s / warm));
    const double t = (s - warm) / (state.total_steps - warm);
    return lr_final + (cfg.lr_max - lr_final) * 0.5 * (1.0 + std::cos(M_PI * t));
}

struct AdamState {
    std::vector<Mat> m_w, v_w;
    std::vector<std::vector<double>> m_b, v_b;
    long t = 0;

    static AdamState like(const LenModel& model) {
        AdamState s;
        for (const Mat& w : model.weights) {
            s.m_w.emplace_back(w.rows, w.cols);
            s.v_w.emplace_back(w.rows, w.cols);
        }
        for (const auto& b : model.biases) {
            s.m_b.emplace_back(b.size(), 0.0);
            s.v_b.emplace_back(b.size(), 0.0);
        }
        return s;
    }
};

inline void adam_update_scalar(double& param, double grad, double& m, double& v,
                               long t, double lr, double beta1 = 0.9,
                               double beta2 = 0.999, double eps = 1e-8) {
    m = beta1 * m + (1.0 - beta1) * grad;
    v = beta2 * v + (1.0 - beta2) * grad * grad;
    const double mh = m / (1.0 - std::pow(beta1, t));
    const double vh = v / (1.0 - std::pow(beta2, t));
    param -= lr * mh / (std::sqrt(vh) + eps);
}

inline void adam_step(LenModel& model, const LenGradients& grads, AdamState& state,
                      double lr) {
    ++state.t;
    for (size_t l = 0; l < model.weights.size(); ++l) {
        Mat& w = model.weights[l];
        const Mat& g = grads.weights[l];
        for (size_t i = 0; i < w.size(); ++i)
            adam_update_scalar(w.d[i], g.d[i], state.m_w[l].d[i], state.v_w[l].d[i],
                               state.t, lr);
        auto& b = model.biases[l];
        for (size_t i = 0; i < b.size(); ++i)
            adam_update_scalar(b[i], grads.biases[l][i], state.m_b[l][i],
                               state.v_b[l][i], state.t, lr);
    }
}

// -------------------------------------------------------------------------
// Training and inference over cubes

namespace detail {

// Stack cube pixels as matrix columns; optionally concatenate prior pixels.
inline Mat pixels_as_columns(const DataCube& a, const DataCube* b = nullptr) {
    const int rows = a.bands + (b ? b->bands : 0);
    Mat z(rows, static_cast<int>(a.pixel_count()));
    for (size_t n = 0; n < a.pixel_count(); ++n) {
        for (int k = 0; k < a.bands; ++k)
            z(k, static_cast<int>(n)) = a.values[n * a.bands + k];
        if (b)
            for (int k = 0; k < b->bands; ++k)
                z(a.bands + k, static_cast<int>(n)) = b->values[n * b->bands + k];
    }
    return z;
}

inline Mat gather_columns(const Mat& src, const std::vector<int>& idx, int from, int to) {
    Mat out(src.rows, to - from);
    for (int j = from; j < to; ++j)
        for (int i = 0; i < src.rows; ++i)
            out(i, j - from) = src(i, idx[j]);
    return out;
}

}  // namespace detail

struct TrainResult {
    LenModel model;
    double final_loss = 0.0;
};

// Self-supervised training on pixel pairs (z_n [++ csp_n], y_n).
inline TrainResult train(const DataCube& lr_msi, const DataCube& lr_hsi,
                         const EndmemberDictionary& dict, const TrainConfig& cfg,
                         const DataCube* csp = nullptr) {
    cfg.validate();
    if (lr_msi.height != lr_hsi.height || lr_msi.width != lr_hsi.width)
        throw std::invalid_argument("train: input/target spatial dims differ");
    if (csp && (csp->height != lr_msi.height || csp->width != lr_msi.width))
        throw std::invalid_argument("train: csp spatial dims differ");
    if (dict.band_count() != lr_hsi.bands)
        throw std::invalid_argument("train: dictionary band count mismatch");

    const Mat z_all = detail::pixels_as_columns(lr_msi, csp);
    const Mat y_all = detail::pixels_as_columns(lr_hsi);
    const int n = z_all.cols;
    const int d_in = z_all.rows;

    TrainResult result;
    result.model = init_len_model(d_in, cfg.hidden, cfg.hidden_layers,
                                  dict.endmember_count(), cfg.hidden_activation,
                                  cfg.output_mode, cfg.seed);
    AdamState adam = AdamState::like(result.model);
    const int batches = (n + cfg.batch_size - 1) / cfg.batch_size;
    OneCycleState sched{0, static_cast<long>(cfg.epochs) * batches};

    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::mt19937_64 rng(detail::mix_seed(cfg.seed, 0x200ULL + epoch));
        std::shuffle(idx.begin(), idx.end(), rng);
        double epoch_loss = 0.0;
        for (int b = 0; b < batches; ++b) {
            const int from = b * cfg.batch_size;
            const int to = std::min(n, from + cfg.batch_size);
            Mat zb = detail::gather_columns(z_all, idx, from, to);
            Mat yb = detail::gather_columns(y_all, idx, from, to);
            LenGradients g = backward(result.model, zb, yb, dict, cfg.loss);
            const double lr = one_cycle_lr(cfg, sched);
            adam_step(result.model, g, adam, lr);
            ++sched.step;
            epoch_loss += g.loss * (to - from);
        }
        result.final_loss = epoch_loss / n;
    }
    return result;
}

struct InferResult {
    DataCube hr_hsi;
    DataCube alle;
};

// Per-pixel forward + linear mixing over the whole HR grid. Processes pixels
// in fixed-size chunks; chunking cannot change results because every output
// coefficient is an independent fixed-order dot product.
inline InferResult infer(const LenModel& model, const DataCube& hr_msi,
                         const EndmemberDictionary& dict, const DataCube* csp = nullptr) {
    const int expect = hr_msi.bands + (csp ? csp->bands : 0);
    if (model.d_in != expect)
        throw std::invalid_argument("infer: model input width does not match inputs");
    if (csp && (csp->height != hr_msi.height || csp->width != hr_msi.width))
        throw std::invalid_argument("infer: csp spatial dims differ");
    if (dict.endmember_count() != model.K)
        throw std::invalid_argument("infer: dictionary/latent size mismatch");

    const int C = dict.band_count();
    Mat e_mat(model.K, C);
    for (int k = 0; k < model.K; ++k)
        for (int c = 0; c < C; ++c) e_mat(k, c) = dict.spectra(k, c);

    InferResult out;
    out.hr_hsi = DataCube(hr_msi.height, hr_msi.width, C);
    out.alle = DataCube(hr_msi.height, hr_msi.width, model.K);

    const Mat z_all = detail::pixels_as_columns(hr_msi, csp);
    const int n = z_all.cols;
    const int chunk = 4096;
    for (int from = 0; from < n; from += chunk) {
        const int to = std::min(n, from + chunk);
        Mat zb(z_all.rows, to - from);
        for (int j = from; j < to; ++j)
            for (int i = 0; i < z_all.rows; ++i) zb(i, j - from) = z_all(i, j);
        Mat a = forward_batch(model, zb);
        Mat y = matmul_tn(e_mat, a);
        for (int j = from; j < to; ++j) {
            for (int k = 0; k < model.K; ++k)
                out.alle.values[static_cast<size_t>(j) * model.K + k] =
                    static_cast<float>(a(k, j - from));
            for (int c = 0; c < C; ++c) {
                const double v = y(c, j - from);
                if (!std::isfinite(v))
                    throw std::runtime_error("infer: non-finite reconstruction value");
                out.hr_hsi.values[static_cast<size_t>(j) * C + c] = static_cast<float>(v);
            }
        }
    }
    return out;
}

// -------------------------------------------------------------------------
// Checkpoint: text header (<base>.hdr) + f64le weight payload (<base>.bin)

inline void save_len_model(const LenModel& m, const std::string& base) {
    {
        std::ofstream hdr(base + ".hdr");
        if (!hdr) throw std::runtime_error("save_len_model: cannot open " + base + ".hdr");
        hdr << "format=len-checkpoint\n";
        hdr << "d_in=" << m.d_in << "\n";
        hdr << "hidden=" << m.hidden << "\n";
        hdr << "hidden_layers=" << m.hidden_layers << "\n";
        hdr << "k=" << m.K << "\n";
        hdr << "activation=" << activation_name(m.hidden_activation) << "\n";
        hdr << "output_mode=" << output_mode_name(m.output_mode) << "\n";
        hdr << "dtype=f64le\n";
    }
    std::ofstream bin(base + ".bin", std::ios::binary);
    if (!bin) throw std::runtime_error("save_len_model: cannot open " + base + ".bin");
    auto put = [&](const double* p, size_t count) {
        bin.write(reinterpret_cast<const char*>(p),
                  static_cast<std::streamsize>(count * sizeof(double)));
    };
    for (size_t l = 0; l < m.weights.size(); ++l) {
        put(m.weights[l].d.data(), m.weights[l].size());
        put(m.biases[l].data(), m.biases[l].size());
    }
    if (!bin) throw std::runtime_error("save_len_model: write failed");
}

inline LenModel load_len_model(const std::string& base) {
    std::ifstream hdr(base + ".hdr");
    if (!hdr) throw std::runtime_error("load_len_model: cannot open " + base + ".hdr");
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(hdr, line)) {
        line = detail::trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("load_len_model: malformed header line: " + line);
        kv[detail::trim(line.substr(0, eq))] = detail::trim(line.substr(eq + 1));
    }
    if (kv["format"] != "len-checkpoint")
        throw std::runtime_error("load_len_model: not a checkpoint header");
    LenModel m;
    m.d_in = std::stoi(kv.at("d_in"));
    m.hidden = std::stoi(kv.at("hidden"));
    m.hidden_layers = std::stoi(kv.at("hidden_layers"));
    m.K = std::stoi(kv.at("k"));
    m.hidden_activation = parse_activation(kv.at("activation"));
    m.output_mode = parse_output_mode(kv.at("output_mode"));
    const auto dims = m.layer_dims();
    std::ifstream bin(base + ".bin", std::ios::binary);
    if (!bin) throw std::runtime_error("load_len_model: cannot open " + base + ".bin");
    for (size_t l = 0; l + 1 < dims.size(); ++l) {
        Mat w(dims[l + 1], dims[l]);
        bin.read(reinterpret_cast<char*>(w.d.data()),
                 static_cast<std::streamsize>(w.size() * sizeof(double)));
        m.weights.push_back(std::move(w));
        std::vector<double> b(dims[l + 1]);
        bin.read(reinterpret_cast<char*>(b.data()),
                 static_cast<std::streamsize>(b.size() * sizeof(double)));
        m.biases.push_back(std::move(b));
    }
    if (!bin) throw std::runtime_error("load_len_model: payload too short");
    return m;
}

}  // namespace hsfuse
