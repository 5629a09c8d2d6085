#include "hsfuse/len.hpp"

#include "support/planted.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <random>

using namespace hsfuse;

namespace {

LenModel tiny_model(int d_in, int hidden, int K, uint64_t seed,
                    Activation act = Activation::Relu,
                    OutputMode out = OutputMode::Linear) {
    return init_len_model(d_in, hidden, 1, K, act, out, seed);
}

EndmemberDictionary random_dict(int K, int C, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.05, 1.0);
    EndmemberDictionary dict;
    dict.spectra.resize(K, C);
    for (int k = 0; k < K; ++k)
        for (int c = 0; c < C; ++c) dict.spectra(k, c) = uni(rng);
    return dict;
}

Mat random_mat(int rows, int cols, uint64_t seed, double lo = -1.0, double hi = 1.0) {
    Mat m(rows, cols);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(lo, hi);
    for (double& v : m.d) v = uni(rng);
    return m;
}

}  // namespace

TEST_CASE("forward with zero parameters yields zero latents", "[len]") {
    LenModel m = tiny_model(3, 4, 2, 1);
    for (Mat& w : m.weights) w.set_zero();
    const auto a = forward(m, {0.5, -0.3, 0.9});
    for (double v : a) REQUIRE(v == 0.0);
}

TEST_CASE("softmax output is a probability vector", "[len]") {
    LenModel m = tiny_model(3, 5, 4, 2, Activation::Relu, OutputMode::Softmax);
    const auto a = forward(m, {0.2, 0.7, -0.1});
    double sum = 0;
    for (double v : a) {
        REQUIRE(v >= 0.0);
        sum += v;
    }
    REQUIRE(sum == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("forward matches a hand-unrolled scalar evaluation", "[len]") {
    LenModel m = tiny_model(2, 3, 2, 3);
    const std::vector<double> z = {0.4, -0.8};
    const auto got = forward(m, z);

    // independent scalar-by-scalar evaluation
    double hidden[3];
    for (int i = 0; i < 3; ++i) {
        double s = m.biases[0][i];
        for (int j = 0; j < 2; ++j) s += m.weights[0](i, j) * z[j];
        hidden[i] = s > 0 ? s : 0.0;
    }
    for (int i = 0; i < 2; ++i) {
        double s = m.biases[1][i];
        for (int j = 0; j < 3; ++j) s += m.weights[1](i, j) * hidden[j];
        REQUIRE(got[i] == Catch::Approx(s).margin(1e-12));
    }
}

TEST_CASE("reconstruct obeys linear mixing identities", "[len]") {
    const EndmemberDictionary dict = random_dict(3, 5, 4);
    std::vector<double> basis = {0.0, 1.0, 0.0};
    const auto y = reconstruct(basis, dict);
    for (int c = 0; c < 5; ++c) REQUIRE(y[c] == dict.spectra(1, c));

    const auto zero = reconstruct({0.0, 0.0, 0.0}, dict);
    for (double v : zero) REQUIRE(v == 0.0);

    std::vector<double> a = {0.3, -0.2, 1.4};
    const auto mixed = reconstruct(a, dict);
    for (int c = 0; c < 5; ++c) {
        double s = 0;
        for (int k = 0; k < 3; ++k) s += a[k] * dict.spectra(k, c);
        REQUIRE(mixed[c] == Catch::Approx(s).margin(1e-14));
    }
}

TEST_CASE("loss definitions: per-pixel L1, not band mean", "[len]") {
    Mat pred(10, 1), target(10, 1);
    for (int i = 0; i < 10; ++i) {
        target(i, 0) = 0.5;
        pred(i, 0) = 0.6;
    }
    REQUIRE(loss_value(pred, target, LossKind::Mae) == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(loss_value(pred, pred, LossKind::Mae) == 0.0);

    const Mat a = random_mat(4, 3, 5), b = random_mat(4, 3, 6);
    double mae = 0, mse = 0;
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 4; ++i) {
            mae += std::abs(a(i, j) - b(i, j));
            mse += (a(i, j) - b(i, j)) * (a(i, j) - b(i, j));
        }
    REQUIRE(loss_value(a, b, LossKind::Mae) == Catch::Approx(mae / 3).margin(1e-12));
    REQUIRE(loss_value(a, b, LossKind::Mse) == Catch::Approx(mse / 3).margin(1e-12));
}

TEST_CASE("zero residual under MSE gives zero gradients", "[len]") {
    LenModel m = tiny_model(2, 4, 3, 7);
    const EndmemberDictionary dict = random_dict(3, 5, 8);
    const Mat z = random_mat(2, 6, 9);
    ForwardCache cache;
    Mat a = forward_batch(m, z, &cache);
    Mat e_mat(3, 5);
    for (int k = 0; k < 3; ++k)
        for (int c = 0; c < 5; ++c) e_mat(k, c) = dict.spectra(k, c);
    const Mat y = matmul_tn(e_mat, a);  // targets equal predictions

    const LenGradients g = backward(m, z, y, dict, LossKind::Mse);
    REQUIRE(g.loss == 0.0);
    for (const Mat& gw : g.weights)
        for (double v : gw.d) REQUIRE(v == 0.0);
    // MAE subgradient at exactly-zero residual is zero by convention
    const LenGradients gm = backward(m, z, y, dict, LossKind::Mae);
    for (const Mat& gw : gm.weights)
        for (double v : gw.d) REQUIRE(v == 0.0);
}

TEST_CASE("analytic gradients match central finite differences", "[len]") {
    for (auto [act, out] :
         {std::pair{Activation::Relu, OutputMode::Linear},
          std::pair{Activation::Gelu, OutputMode::Softmax},
          std::pair{Activation::Tanh, OutputMode::Relu},
          std::pair{Activation::LeakyRelu, OutputMode::Linear}}) {
        LenModel m = tiny_model(2, 4, 3, 10, act, out);
        const EndmemberDictionary dict = random_dict(3, 5, 11);
        const Mat z = random_mat(2, 8, 12);
        const Mat y = random_mat(5, 8, 13, 0.0, 1.0);
        // MSE here: MAE is non-smooth so finite differences are unreliable at kinks
        const LenGradients g = backward(m, z, y, dict, LossKind::Mse);

        std::mt19937_64 rng(14);
        const double h = 1e-6;
        double max_rel = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            const size_t layer = rng() % m.weights.size();
            const size_t idx = rng() % m.weights[layer].size();
            LenModel plus = m, minus = m;
            plus.weights[layer].d[idx] += h;
            minus.weights[layer].d[idx] -= h;
            const double lp = backward(plus, z, y, dict, LossKind::Mse).loss;
            const double lm = backward(minus, z, y, dict, LossKind::Mse).loss;
            const double fd = (lp - lm) / (2 * h);
            const double an = g.weights[layer].d[idx];
            const double denom = std::max({std::abs(fd), std::abs(an), 1e-6});
            max_rel = std::max(max_rel, std::abs(fd - an) / denom);
        }
        INFO(activation_name(act) << "/" << output_mode_name(out));
        REQUIRE(max_rel <= 1e-4);
    }
}

TEST_CASE("no gradient reaches the dictionary", "[len]") {
    LenModel m = tiny_model(2, 4, 3, 15);
    const EndmemberDictionary dict = random_dict(3, 5, 16);
    const Eigen::MatrixXd before = dict.spectra;
    (void)backward(m, random_mat(2, 4, 17), random_mat(5, 4, 18), dict, LossKind::Mae);
    REQUIRE(dict.spectra == before);
}

TEST_CASE("one-cycle schedule hits its boundary values", "[len]") {
    TrainConfig cfg;
    cfg.lr_max = 1e-3;
    const long total = 100;
    REQUIRE(one_cycle_lr(cfg, {0, total}) == Catch::Approx(1e-3 / 25).margin(1e-15));
    REQUIRE(one_cycle_lr(cfg, {30, total}) == Catch::Approx(1e-3).margin(1e-12));
    REQUIRE(one_cycle_lr(cfg, {100, total}) == Catch::Approx(1e-3 / 1e4).margin(1e-12));
    // monotone up then down
    for (long s = 1; s <= 30; ++s)
        REQUIRE(one_cycle_lr(cfg, {s, total}) >= one_cycle_lr(cfg, {s - 1, total}));
    for (long s = 31; s <= 100; ++s)
        REQUIRE(one_cycle_lr(cfg, {s, total}) <= one_cycle_lr(cfg, {s - 1, total}));
}

TEST_CASE("adam: zero gradient leaves parameters unchanged", "[len]") {
    LenModel m = tiny_model(2, 3, 2, 19);
    const LenModel before = m;
    AdamState state = AdamState::like(m);
    LenGradients g;
    for (const Mat& w : m.weights) g.weights.emplace_back(w.rows, w.cols);
    for (const auto& b : m.biases) g.biases.emplace_back(b.size(), 0.0);
    adam_step(m, g, state, 1e-2);
    for (size_t l = 0; l < m.weights.size(); ++l)
        REQUIRE(m.weights[l].d == before.weights[l].d);
}

TEST_CASE("adam first step matches the closed-form scalar update", "[len]") {
    double p = 1.0, mom = 0.0, vel = 0.0;
    const double g = 0.5, lr = 0.1;
    adam_update_scalar(p, g, mom, vel, 1, lr);
    // bias-corrected first step: m_hat = g, v_hat = g^2
    const double expect = 1.0 - lr * g / (std::abs(g) + 1e-8);
    REQUIRE(p == Catch::Approx(expect).margin(1e-12));
}

TEST_CASE("training fits a planted scene through its own dictionary", "[len]") {
    const auto scene = testsupport::planted_scene(16, 16, 8, 3, 20);
    const NmfResult nm = nmf(flatten(scene.gt), 3);
    TrainConfig cfg;
    cfg.epochs = 150;
    cfg.batch_size = 64;
    cfg.hidden = 128;
    cfg.seed = 21;
    cfg.lr_max = 5e-3;
    // identity SRF: LR-MSI equals LR-HSI
    const TrainResult result = train(scene.gt, scene.gt, nm.dictionary, cfg);
    REQUIRE(result.final_loss <= 1e-2 * scene.gt.bands);  // per-pixel L1 over 8 bands
    REQUIRE(result.model.d_in == 8);

    const TrainResult again = train(scene.gt, scene.gt, nm.dictionary, cfg);
    for (size_t l = 0; l < result.model.weights.size(); ++l)
        REQUIRE(result.model.weights[l].d == again.model.weights[l].d);
}

TEST_CASE("csp concatenation widens the model input", "[len]") {
    const auto scene = testsupport::planted_scene(16, 16, 6, 2, 22);
    const NmfResult nm = nmf(flatten(scene.gt), 2);
    const SrfMatrix pan = make_gaussian_srf(6, 1);
    const DataCube lr_msi = apply_srf(scene.gt, pan);
    const DataCube csp = build_csp(scene.gt, 4);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 64;
    cfg.hidden = 16;
    const TrainResult with_csp = train(lr_msi, scene.gt, nm.dictionary, cfg, &csp);
    REQUIRE(with_csp.model.d_in == 1 + 6);
    const TrainResult without = train(lr_msi, scene.gt, nm.dictionary, cfg);
    REQUIRE(without.model.d_in == 1);
}

TEST_CASE("inference through an analytic inverse is near-lossless", "[len]") {
    // c = C = K with invertible E and identity SRF: the exact latent map is
    // linear, so a linear-head model with W = (E^T)^-1 reconstructs exactly.
    const int K = 3;
    EndmemberDictionary dict = random_dict(K, K, 23);
    dict.spectra += Eigen::MatrixXd::Identity(K, K) * 2.0;  // well conditioned
    const Eigen::MatrixXd inv = dict.spectra.transpose().inverse();

    LenModel m = init_len_model(K, 0, 0, K, Activation::Relu, OutputMode::Linear, 0);
    for (int i = 0; i < K; ++i)
        for (int j = 0; j < K; ++j) m.weights[0](i, j) = inv(i, j);

    const auto scene = testsupport::planted_scene(8, 8, K, K, 24);
    const InferResult out = infer(m, scene.gt, dict);
    REQUIRE(out.alle.bands == K);
    double mae = 0;
    for (size_t i = 0; i < scene.gt.values.size(); ++i)
        mae += std::abs(double(out.hr_hsi.values[i]) - scene.gt.values[i]);
    mae /= scene.gt.pixel_count();
    REQUIRE(mae <= 1e-6);
}

TEST_CASE("batched inference equals per-pixel inference bit-exactly", "[len]") {
    LenModel m = tiny_model(4, 32, 3, 25, Activation::Gelu);
    const EndmemberDictionary dict = random_dict(3, 6, 26);
    const auto scene = testsupport::planted_scene(16, 16, 4, 2, 27);
    const InferResult batched = infer(m, scene.gt, dict);
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j) {
            std::vector<double> z(4);
            for (int k = 0; k < 4; ++k) z[k] = scene.gt.at(i, j, k);
            const auto a = forward(m, z);
            for (int k = 0; k < 3; ++k)
                REQUIRE(batched.alle.at(i, j, k) == float(a[k]));
            const auto y = reconstruct(a, dict);
            for (int c = 0; c < 6; ++c)
                REQUIRE(batched.hr_hsi.at(i, j, c) == float(y[c]));
        }
}

TEST_CASE("parameter and flop counts follow the closed forms", "[len]") {
    LenModel m = tiny_model(4, 1024, 9, 28);
    REQUIRE(count_params(m) == 14345u);  // 5*1024 + 1025*9
    REQUIRE(estimate_flops(m, 10, 31) == 10u * 2u * (4u * 1024u + 1024u * 9u + 9u * 31u));
    REQUIRE(estimate_flops(m, 20, 31) == 2 * estimate_flops(m, 10, 31));

    LenModel direct = init_len_model(5, 0, 0, 3, Activation::Relu, OutputMode::Linear, 0);
    REQUIRE(count_params(direct) == (5u + 1u) * 3u);
    REQUIRE_THROWS_AS(init_len_model(0, 4, 1, 3, Activation::Relu, OutputMode::Linear, 0),
                      std::invalid_argument);
}

TEST_CASE("checkpoint round-trip is bit-exact", "[len]") {
    LenModel m = tiny_model(3, 8, 2, 29, Activation::Tanh, OutputMode::Softmax);
    const std::string base =
        (std::filesystem::temp_directory_path() / "hsfuse_test_model").string();
    save_len_model(m, base);
    const LenModel back = load_len_model(base);
    REQUIRE(back.d_in == m.d_in);
    REQUIRE(back.hidden_activation == m.hidden_activation);
    REQUIRE(back.output_mode == m.output_mode);
    for (size_t l = 0; l < m.weights.size(); ++l) {
        REQUIRE(back.weights[l].d == m.weights[l].d);
        REQUIRE(back.biases[l] == m.biases[l]);
    }
}
