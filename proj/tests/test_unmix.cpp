#include "hsfuse/unmix.hpp"

#include "support/oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <random>

using namespace hsfuse;

namespace {

Eigen::MatrixXd random_nonneg(int rows, int cols, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = uni(rng);
    return m;
}

}  // namespace

TEST_CASE("nndsvd reconstructs a rank-1 nonnegative matrix", "[unmix]") {
    const Eigen::MatrixXd u = random_nonneg(12, 1, 1);
    const Eigen::MatrixXd v = random_nonneg(1, 7, 2);
    const Eigen::MatrixXd a = u * v;
    const auto [w0, e0] = nndsvd_init(a, 1);
    REQUIRE((a - w0 * e0).norm() / a.norm() < 1e-8);
}

TEST_CASE("nndsvd output is nonnegative", "[unmix]") {
    const Eigen::MatrixXd a = random_nonneg(50, 20, 3);
    const auto [w0, e0] = nndsvd_init(a, 5);
    REQUIRE((w0.array() >= 0.0).all());
    REQUIRE((e0.array() >= 0.0).all());
}

TEST_CASE("nndsvd leading pair matches a power-iteration oracle", "[unmix]") {
    const Eigen::MatrixXd a = random_nonneg(30, 12, 4);
    const auto [w0, e0] = nndsvd_init(a, 3);
    const auto lead = testsupport::oracle_leading_svd(a);
    // leading singular vectors of a nonnegative matrix are sign-consistent
    const Eigen::VectorXd expect_w = std::sqrt(lead.sigma) * lead.u.cwiseAbs();
    const Eigen::VectorXd expect_e = std::sqrt(lead.sigma) * lead.v.cwiseAbs();
    REQUIRE((w0.col(0) - expect_w).cwiseAbs().maxCoeff() < 1e-6);
    REQUIRE((e0.row(0).transpose() - expect_e).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("nndsvd rejects bad inputs", "[unmix]") {
    const Eigen::MatrixXd a = random_nonneg(5, 4, 5);
    REQUIRE_THROWS_AS(nndsvd_init(a, 5), std::invalid_argument);
    Eigen::MatrixXd neg = a;
    neg(0, 0) = -1.0;
    REQUIRE_THROWS_AS(nndsvd_init(neg, 2), std::invalid_argument);
}

TEST_CASE("nmf recovers a planted factorization", "[unmix]") {
    const Eigen::MatrixXd w_true = random_nonneg(100, 4, 6);
    const Eigen::MatrixXd e_true = random_nonneg(4, 30, 7);
    const Eigen::MatrixXd pixels = w_true * e_true;
    const NmfResult result = nmf(pixels, 4);
    REQUIRE(result.residual <= 1e-3);
    REQUIRE((result.weights.array() >= 0.0).all());
    REQUIRE((result.dictionary.spectra.array() >= 0.0).all());
}

TEST_CASE("nmf with K = C fits a diagonal stack exactly", "[unmix]") {
    const int c = 4;
    Eigen::MatrixXd pixels(3 * c, c);
    pixels.setZero();
    for (int rep = 0; rep < 3; ++rep)
        for (int k = 0; k < c; ++k) pixels(rep * c + k, k) = 1.0 + 0.1 * rep;
    const NmfResult result = nmf(pixels, c);
    REQUIRE(result.residual <= 1e-6);
}

TEST_CASE("nmf objective is non-increasing", "[unmix]") {
    const Eigen::MatrixXd pixels = random_nonneg(60, 25, 8);
    NmfOptions opts;
    opts.max_iters = 200;
    opts.rel_tol = 1e-14;  // force the full iteration budget
    const NmfResult result = nmf(pixels, 5, opts);
    REQUIRE(result.residual_history.size() >= 2);
    for (size_t i = 1; i < result.residual_history.size(); ++i)
        REQUIRE(result.residual_history[i] <= result.residual_history[i - 1] + 1e-12);
    // optimization never worsens the NNDSVD start
    REQUIRE(result.residual <= result.residual_history.front() + 1e-12);
}

TEST_CASE("nmf is deterministic", "[unmix]") {
    const Eigen::MatrixXd pixels = random_nonneg(40, 15, 9);
    const NmfResult a = nmf(pixels, 3);
    const NmfResult b = nmf(pixels, 3);
    REQUIRE(a.weights == b.weights);
    REQUIRE(a.dictionary.spectra == b.dictionary.spectra);
    REQUIRE(a.residual == b.residual);
}

TEST_CASE("choose_k resolves tags and overrides", "[unmix]") {
    REQUIRE(choose_k("pavia_center") == 9);
    REQUIRE(choose_k("anything", 13) == 13);
    REQUIRE_THROWS_AS(choose_k("unknown_scene"), std::invalid_argument);
}

TEST_CASE("endmember csv round-trip", "[unmix]") {
    EndmemberDictionary dict;
    dict.spectra = random_nonneg(3, 6, 10).array() + 0.01;
    const std::string path =
        (std::filesystem::temp_directory_path() / "hsfuse_test_endmembers.csv").string();
    save_endmembers_csv(dict, path);
    const EndmemberDictionary back = load_endmembers_csv(path);
    REQUIRE((back.spectra - dict.spectra).cwiseAbs().maxCoeff() < 1e-15);
}
