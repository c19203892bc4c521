#include <cmath>

#include "doctest.h"

#include "dia/dataset.hpp"
#include "dia/rng.hpp"
#include "dia/shap.hpp"

#include "test_oracles.hpp"

using namespace dia;

namespace {

BatchModel linear_model(const std::vector<double>& weights, double bias = 0.0) {
    DenseNet net;
    Layer l;
    l.weights = Matrix(weights.size(), 1);
    for (std::size_t j = 0; j < weights.size(); ++j) l.weights(j, 0) = weights[j];
    l.bias = {bias};
    l.activation = Activation::Linear;
    net.layers.push_back(std::move(l));
    return net_model(std::move(net));
}

BackgroundSet random_background(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Rng rng(seed);
    Matrix m(rows, cols);
    for (double& v : m.data) v = rng.uniform01();
    return BackgroundSet{std::move(m)};
}

std::vector<double> background_means(const BackgroundSet& bg) {
    std::vector<double> means(bg.width(), 0.0);
    for (std::size_t i = 0; i < bg.count(); ++i)
        for (std::size_t j = 0; j < bg.width(); ++j) means[j] += bg.rows(i, j);
    for (double& m : means) m /= static_cast<double>(bg.count());
    return means;
}

}  // namespace

TEST_CASE("masked_expectation: full set returns the model at the instance") {
    BatchModel model = linear_model({1.0, -2.0, 0.5}, 0.3);
    BackgroundSet bg = random_background(20, 3, 1);
    std::vector<double> inst = {0.9, 0.1, 0.4};
    const double expected = 0.9 - 2.0 * 0.1 + 0.5 * 0.4 + 0.3;
    CHECK(masked_expectation(model, inst, {0, 1, 2}, bg) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("masked_expectation: empty set returns the background mean output") {
    BatchModel model = linear_model({2.0, 1.0});
    BackgroundSet bg = random_background(31, 2, 5);
    std::vector<double> inst = {0.0, 0.0};
    const std::vector<double> means = background_means(bg);
    CHECK(masked_expectation(model, inst, {}, bg) ==
          doctest::Approx(2.0 * means[0] + means[1]).epsilon(1e-10));
}

TEST_CASE("masked_expectation: linear model closed form for any subset") {
    BatchModel model = linear_model({1.5, -0.5, 2.0, 0.25});
    BackgroundSet bg = random_background(17, 4, 9);
    const std::vector<double> means = background_means(bg);
    std::vector<double> inst = {0.2, 0.8, 0.5, 0.1};
    const std::vector<double> w = {1.5, -0.5, 2.0, 0.25};

    const std::vector<std::vector<std::size_t>> subsets = {{0}, {1, 3}, {0, 2, 3}, {2}};
    for (const auto& S : subsets) {
        double expected = 0.0;
        for (std::size_t j = 0; j < 4; ++j) {
            const bool in_s = std::find(S.begin(), S.end(), j) != S.end();
            expected += w[j] * (in_s ? inst[j] : means[j]);
        }
        CHECK(masked_expectation(model, inst, S, bg) == doctest::Approx(expected).epsilon(1e-10));
    }
}

TEST_CASE("shap_exact: linear model recovers x - background mean") {
    BatchModel model = linear_model({1.0, 1.0});
    BackgroundSet bg = random_background(25, 2, 3);
    const std::vector<double> means = background_means(bg);
    std::vector<double> inst = {0.75, 0.3};

    ShapConfig cfg;
    InfluenceValues v = shap_exact(model, inst, bg, cfg);
    CHECK(v.phi(0, 0) == doctest::Approx(inst[0] - means[0]).epsilon(1e-10));
    CHECK(v.phi(0, 1) == doctest::Approx(inst[1] - means[1]).epsilon(1e-10));
}

TEST_CASE("shap_exact: dummy feature gets exactly zero") {
    BatchModel model = linear_model({0.7, 0.0, -1.2});  // feature 1 unused
    BackgroundSet bg = random_background(12, 3, 8);
    std::vector<double> inst = {0.5, 0.9, 0.2};
    ShapConfig cfg;
    InfluenceValues v = shap_exact(model, inst, bg, cfg);
    CHECK(v.phi(0, 1) == 0.0);
}

TEST_CASE("shap_exact: symmetric duplicated columns get equal values") {
    // model = (x0 + x1) * 0.5 + x2, columns 0 and 1 interchangeable
    BatchModel model = linear_model({0.5, 0.5, 1.0});
    Rng rng(13);
    Matrix bg_rows(15, 3);
    for (std::size_t i = 0; i < 15; ++i) {
        const double shared = rng.uniform01();
        bg_rows(i, 0) = shared;
        bg_rows(i, 1) = shared;  // identical background distribution for 0 and 1
        bg_rows(i, 2) = rng.uniform01();
    }
    BackgroundSet bg{std::move(bg_rows)};
    std::vector<double> inst = {0.6, 0.6, 0.2};
    ShapConfig cfg;
    InfluenceValues v = shap_exact(model, inst, bg, cfg);
    CHECK(std::fabs(v.phi(0, 0) - v.phi(0, 1)) < 1e-12);
}

TEST_CASE("shap_exact: efficiency within 1e-9") {
    Rng rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        DenseNet net = make_net({5, 6, 1}, {Activation::Relu, Activation::Linear}, derive_seed(21, trial));
        BatchModel model = net_model(std::move(net));
        BackgroundSet bg = random_background(10, 5, derive_seed(22, trial));
        std::vector<double> inst(5);
        for (double& v : inst) v = rng.uniform01();

        ShapConfig cfg;
        InfluenceValues v = shap_exact(model, inst, bg, cfg);
        double total = 0.0;
        for (std::size_t j = 0; j < 5; ++j) total += v.phi(0, j);
        const double prediction = model.eval(Matrix::row_vector(inst))(0, 0);
        CHECK(std::fabs(total - (prediction - v.base_value)) < 1e-9);
    }
}

TEST_CASE("shap_exact: linearity over models on a shared background") {
    BackgroundSet bg = random_background(9, 4, 30);
    std::vector<double> inst = {0.1, 0.9, 0.4, 0.7};

    DenseNet n1 = make_net({4, 5, 1}, {Activation::Relu, Activation::Linear}, 31);
    DenseNet n2 = make_net({4, 3, 1}, {Activation::Relu, Activation::Linear}, 32);
    BatchModel m1 = net_model(n1);
    BatchModel m2 = net_model(n2);
    const double a = 0.6, b = -1.4;
    BatchModel combo;
    combo.input_width = 4;
    combo.eval = [m1, m2, a, b](const Matrix& batch) {
        Matrix o1 = m1.eval(batch);
        Matrix o2 = m2.eval(batch);
        for (std::size_t i = 0; i < o1.data.size(); ++i) o1.data[i] = a * o1.data[i] + b * o2.data[i];
        return o1;
    };

    ShapConfig cfg;
    InfluenceValues v1 = shap_exact(m1, inst, bg, cfg);
    InfluenceValues v2 = shap_exact(m2, inst, bg, cfg);
    InfluenceValues vc = shap_exact(combo, inst, bg, cfg);
    for (std::size_t j = 0; j < 4; ++j)
        CHECK(std::fabs(vc.phi(0, j) - (a * v1.phi(0, j) + b * v2.phi(0, j))) < 1e-9);
}

TEST_CASE("shap_exact: refuses widths past the limit") {
    BatchModel model = linear_model(std::vector<double>(13, 1.0));
    BackgroundSet bg = random_background(5, 13, 2);
    std::vector<double> inst(13, 0.5);
    ShapConfig cfg;
    CHECK_THROWS_AS((void)shap_exact(model, inst, bg, cfg), std::invalid_argument);
}

TEST_CASE("shap_exact agrees with the all-permutations oracle on n <= 6") {
    Rng rng(77);
    for (int trial = 0; trial < 5; ++trial) {
        const std::size_t n = 3 + static_cast<std::size_t>(trial % 4);
        DenseNet net = make_net({n, 4, 1}, {Activation::Relu, Activation::Linear}, derive_seed(70, trial));
        BatchModel model = net_model(std::move(net));
        BackgroundSet bg = random_background(6, n, derive_seed(71, trial));
        std::vector<double> inst(n);
        for (double& v : inst) v = rng.uniform01();

        ShapConfig cfg;
        InfluenceValues fast = shap_exact(model, inst, bg, cfg);
        std::vector<double> slow = oracle::shap_all_permutations(model, inst, bg);
        for (std::size_t j = 0; j < n; ++j) CHECK(std::fabs(fast.phi(0, j) - slow[j]) < 1e-9);
    }
}

TEST_CASE("shap_permutation: one sample still telescopes to exact efficiency") {
    BatchModel model = linear_model({0.3, -0.9, 1.1});
    BackgroundSet bg = random_background(14, 3, 40);
    std::vector<double> inst = {0.4, 0.6, 0.9};
    ShapConfig cfg;
    cfg.mode = ShapMode::Permutation;
    cfg.permutation_samples = 1;
    InfluenceValues v = shap_permutation(model, inst, bg, cfg);
    double total = 0.0;
    for (std::size_t j = 0; j < 3; ++j) total += v.phi(0, j);
    const double prediction = model.eval(Matrix::row_vector(inst))(0, 0);
    CHECK(std::fabs(total - (prediction - v.base_value)) < 1e-12);
}

TEST_CASE("shap_permutation: converges to exact within 3 standard errors at n = 6") {
    DenseNet net = make_net({6, 8, 1}, {Activation::Relu, Activation::Linear}, 50);
    BatchModel model = net_model(std::move(net));
    BackgroundSet bg = random_background(8, 6, 51);
    Rng rng(52);
    std::vector<double> inst(6);
    for (double& v : inst) v = rng.uniform01();

    ShapConfig exact_cfg;
    InfluenceValues exact = shap_exact(model, inst, bg, exact_cfg);

    ShapConfig cfg;
    cfg.mode = ShapMode::Permutation;
    cfg.permutation_samples = 2000;
    cfg.seed = 99;
    InfluenceValues est = shap_permutation(model, inst, bg, cfg);
    for (std::size_t j = 0; j < 6; ++j) {
        const double gap = std::fabs(est.phi(0, j) - exact.phi(0, j));
        CHECK(gap <= 3.0 * est.std_errors(0, j) + 1e-12);
    }
}

TEST_CASE("shap_permutation: duplicated-column symmetry within 3 standard errors") {
    BatchModel model = linear_model({0.5, 0.5, 1.0});
    Rng rng(61);
    Matrix bg_rows(10, 3);
    for (std::size_t i = 0; i < 10; ++i) {
        const double shared = rng.uniform01();
        bg_rows(i, 0) = shared;
        bg_rows(i, 1) = shared;
        bg_rows(i, 2) = rng.uniform01();
    }
    BackgroundSet bg{std::move(bg_rows)};
    std::vector<double> inst = {0.8, 0.8, 0.3};
    ShapConfig cfg;
    cfg.mode = ShapMode::Permutation;
    cfg.permutation_samples = 1500;
    cfg.seed = 4;
    InfluenceValues v = shap_permutation(model, inst, bg, cfg);
    const double se = std::hypot(v.std_errors(0, 0), v.std_errors(0, 1));
    CHECK(std::fabs(v.phi(0, 0) - v.phi(0, 1)) <= 3.0 * se + 1e-12);
}

TEST_CASE("shap_permutation: bit-reproducible for the same seed and instance") {
    DenseNet net = make_net({5, 4, 1}, {Activation::Relu, Activation::Linear}, 80);
    BatchModel model = net_model(std::move(net));
    BackgroundSet bg = random_background(7, 5, 81);
    std::vector<double> inst = {0.1, 0.4, 0.6, 0.8, 0.2};
    ShapConfig cfg;
    cfg.mode = ShapMode::Permutation;
    cfg.permutation_samples = 50;
    cfg.seed = 812;
    InfluenceValues a = shap_permutation(model, inst, bg, cfg);
    InfluenceValues b = shap_permutation(model, inst, bg, cfg);
    CHECK(a.phi.data == b.phi.data);
    CHECK(a.std_errors.data == b.std_errors.data);
}

TEST_CASE("shap_batch: a batch of one equals the single-instance call") {
    BatchModel model = linear_model({1.0, 2.0, 3.0});
    BackgroundSet bg = random_background(11, 3, 90);
    std::vector<double> inst = {0.5, 0.25, 0.75};
    ShapConfig cfg;
    InfluenceValues single = shap_exact(model, inst, bg, cfg);
    InfluenceValues batch = shap_batch(model, Matrix::row_vector(inst), bg, cfg);
    CHECK(batch.phi.data == single.phi.data);
    CHECK(batch.base_value == single.base_value);
}

TEST_CASE("shap_batch: direct audit of the fixed x+y model touches only x and y") {
    TabularDataset ds = gen_xy_synthetic(300, 17);
    BatchModel model = net_model(xy_fixed_model());
    BackgroundSet bg{ds.matrix_of(Split::Train).gather_rows({0, 1, 2, 3, 4, 5, 6, 7, 8, 9})};
    Matrix instances = ds.matrix_of(Split::Test).gather_rows({0, 1, 2, 3, 4});

    ShapConfig cfg;
    InfluenceValues v = shap_batch(model, instances, bg, cfg);
    for (std::size_t i = 0; i < v.phi.rows; ++i)
        for (std::size_t j = 0; j < 9; ++j) {
            if (j == 0 || j == 3) {
                CHECK(std::fabs(v.phi(i, j)) > 1e-6);
            } else {
                CHECK(v.phi(i, j) == 0.0);
            }
        }
}

TEST_CASE("shap_batch: aggregation is invariant to instance order") {
    DenseNet net = make_net({4, 5, 1}, {Activation::Relu, Activation::Linear}, 95);
    BatchModel model = net_model(std::move(net));
    BackgroundSet bg = random_background(9, 4, 96);
    Rng rng(97);
    Matrix instances(6, 4);
    for (double& v : instances.data) v = rng.uniform01();
    Matrix reversed(6, 4);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 4; ++j) reversed(i, j) = instances(5 - i, j);

    for (ShapMode mode : {ShapMode::Exact, ShapMode::Permutation}) {
        ShapConfig cfg;
        cfg.mode = mode;
        cfg.permutation_samples = 40;
        cfg.seed = 5;
        InfluenceValues a = shap_batch(model, instances, bg, cfg);
        InfluenceValues b = shap_batch(model, reversed, bg, cfg);
        // per-instance values travel with their rows bit-for-bit
        for (std::size_t i = 0; i < 6; ++i)
            for (std::size_t j = 0; j < 4; ++j) CHECK(b.phi(i, j) == a.phi(5 - i, j));
        for (std::size_t j = 0; j < 4; ++j) {
            double mean_a = 0.0, mean_b = 0.0;
            for (std::size_t i = 0; i < 6; ++i) {
                mean_a += std::fabs(a.phi(i, j));
                mean_b += std::fabs(b.phi(i, j));
            }
            CHECK(mean_a == doctest::Approx(mean_b).epsilon(1e-13));
        }
    }
}
