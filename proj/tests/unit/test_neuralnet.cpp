#include "nidsrobust/datapipe.hpp"
#include "nidsrobust/error.hpp"
#include "nidsrobust/neuralnet.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace nidsrobust;

namespace {

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, double scale = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, scale);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
    return m;
}

std::vector<int> random_labels(std::size_t n, int k, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> c(0, k - 1);
    std::vector<int> y(n);
    for (auto& v : y) v = c(rng);
    return y;
}

DatasetBundle separable_bundle(std::size_t n = 2000, std::uint64_t seed = 7) {
    const auto [x, y] = synth_dataset({6.0, 2, 1.0, 0.5}, n, 10, seed);
    return make_bundle(x, y, 0.8, false, seed);
}

double accuracy(const DenseNetwork& net, const DatasetBundle& b) {
    const auto pred = argmax_rows(predict_proba(net, b.test_x.values));
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == b.test_y.ids[i];
    return static_cast<double>(hits) / static_cast<double>(pred.size());
}

}  // namespace

TEST_CASE("preset architectures") {
    const auto m1 = init_network(ArchitectureSpec::preset(1, 30, Activation::relu), 1);
    REQUIRE(m1.layers().size() == 2);
    CHECK(m1.layers()[0].weights.rows() == 30);
    CHECK(m1.layers()[0].weights.cols() == 64);
    CHECK(m1.layers()[1].weights.rows() == 64);
    CHECK(m1.layers()[1].weights.cols() == 2);

    const std::vector<std::vector<std::size_t>> widths{
        {64}, {64, 128}, {64, 128, 128}, {64, 128, 512, 128}, {64, 128, 512, 128, 64}};
    for (int d = 1; d <= 5; ++d) {
        CHECK(ArchitectureSpec::preset_widths(d) == widths[static_cast<std::size_t>(d - 1)]);
        const auto spec = ArchitectureSpec::preset(d, 12, Activation::elu, 0.5, 3);
        CHECK(spec.hidden.size() == static_cast<std::size_t>(d));
        CHECK(spec.output_classes == 3);
    }
    CHECK_THROWS_AS(ArchitectureSpec::preset(6, 12, Activation::relu), SchemaError);
    CHECK_THROWS_AS((ArchitectureSpec{4, {{0, Activation::relu}}, 0.0, 2}.validate()), SchemaError);
    CHECK_THROWS_AS((ArchitectureSpec{4, {}, 0.0, 1}.validate()), SchemaError);
    CHECK_THROWS_AS((ArchitectureSpec{4, {}, 1.0, 2}.validate()), SchemaError);
}

TEST_CASE("initialization is seeded Glorot uniform with zero bias") {
    const auto spec = ArchitectureSpec::preset(3, 20, Activation::tanh);
    const auto a = init_network(spec, 99);
    const auto b = init_network(spec, 99);
    const auto c = init_network(spec, 100);
    CHECK(a.serialize() == b.serialize());
    CHECK(a.serialize() != c.serialize());
    for (const auto& l : a.layers()) {
        const double limit = std::sqrt(6.0 / static_cast<double>(l.weights.rows() + l.weights.cols()));
        CHECK(l.weights.cwiseAbs().maxCoeff() <= limit);
        CHECK(l.weights.cwiseAbs().maxCoeff() > 0.9 * limit);
        CHECK(l.bias.isZero(0.0));
    }
}

TEST_CASE("softmax rows are normalized and zero weights give uniform output") {
    auto net = init_network(ArchitectureSpec{5, {{4, Activation::relu}}, 0.0, 3}, 1);
    for (auto& l : net.mutable_layers()) {
        l.weights.setZero();
        l.bias.setZero();
    }
    const auto p = predict_proba(net, random_matrix(6, 5, 3));
    CHECK((p.array() - 1.0 / 3.0).abs().maxCoeff() <= 1e-15);

    for (auto act : {Activation::relu, Activation::tanh, Activation::elu}) {
        const auto deep = init_network(ArchitectureSpec::preset(5, 7, act, 0.5, 4), 5);
        const Matrix x = random_matrix(50, 7, 11, 30.0);
        for (auto mode : {Mode::infer, Mode::train}) {
            const auto q = forward(deep, x, mode, 3).probabilities;
            CHECK((q.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-9);
            CHECK(q.minCoeff() >= 0.0);
            CHECK(q.maxCoeff() <= 1.0);
        }
    }
}

TEST_CASE("forward validates input width") {
    const auto net = init_network(ArchitectureSpec::preset(1, 4, Activation::relu), 1);
    CHECK_THROWS_AS(predict_proba(net, Matrix::Zero(3, 5)), SchemaError);
    CHECK_THROWS_AS(input_gradients(net, Matrix::Zero(3, 5), {0, 0, 0}), SchemaError);
}

TEST_CASE("dropout masks are seeded and absent at inference") {
    const auto spec = ArchitectureSpec::preset(2, 6, Activation::relu, 0.5);
    const auto net = init_network(spec, 4);
    const Matrix x = random_matrix(10, 6, 2);
    const auto a = forward(net, x, Mode::train, 77);
    const auto b = forward(net, x, Mode::train, 77);
    const auto c = forward(net, x, Mode::train, 78);
    REQUIRE(a.trace.dropout_masks.size() == 2);
    CHECK(a.trace.dropout_masks[0] == b.trace.dropout_masks[0]);
    CHECK(a.trace.dropout_masks[1] == b.trace.dropout_masks[1]);
    CHECK(a.trace.dropout_masks[0] != c.trace.dropout_masks[0]);
    for (Eigen::Index i = 0; i < a.trace.dropout_masks[0].size(); ++i) {
        const double m = a.trace.dropout_masks[0].data()[i];
        CHECK((m == 0.0 || m == 2.0));
    }
    CHECK(forward(net, x, Mode::infer).trace.dropout_masks.empty());

    // Inference output does not depend on dropout_p.
    auto spec0 = spec;
    spec0.dropout_p = 0.0;
    DenseNetwork plain(spec0, net.layers(), net.seed());
    CHECK(predict_proba(plain, x) == predict_proba(net, x));
}

TEST_CASE("loss values") {
    Matrix onehot(2, 2);
    onehot << 1, 0, 0, 1;
    CHECK(loss_J(onehot, {0, 1}) == 0.0);
    Matrix uniform = Matrix::Constant(3, 2, 0.5);
    CHECK(loss_J(uniform, {0, 1, 1}) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(loss_J(uniform, {0, 1, 1}) == doctest::Approx(0.6931).epsilon(1e-4));
    Matrix wrong(1, 2);
    wrong << 1.0, 0.0;
    CHECK(loss_J(wrong, {1}) == doctest::Approx(-std::log(1e-12)).epsilon(1e-15));
    CHECK(loss_J(wrong, {1}) == doctest::Approx(27.631).epsilon(1e-4));
}

TEST_CASE("parameter and input gradients match finite differences") {
    std::mt19937_64 rng(2024);
    for (int depth = 0; depth <= 3; ++depth)
        for (auto act : {Activation::relu, Activation::tanh, Activation::elu}) {
            const auto spec = oracle::random_arch(rng, depth, act, 5, 3);
            const auto net = init_network(spec, rng());
            const Matrix x = random_matrix(6, 5, rng());
            const auto y = random_labels(6, 3, rng());
            const auto pg = oracle::check_param_gradients(net, x, y);
            const auto ig = oracle::check_input_gradients(net, x, y);
            CAPTURE(depth);
            CHECK(pg.checked > 0);
            CHECK(ig.checked > 0);
            CHECK(pg.max_rel_err <= 1e-5);
            CHECK(ig.max_rel_err <= 1e-5);
        }
}

TEST_CASE("parameter gradients respect the trace's dropout masks") {
    const auto spec = ArchitectureSpec{4, {{5, Activation::tanh}, {3, Activation::elu}}, 0.5, 2};
    const auto net = init_network(spec, 8);
    const Matrix x = random_matrix(5, 4, 9);
    const std::vector<int> y{0, 1, 1, 0, 1};
    const auto fr = forward(net, x, Mode::train, 1234);
    const auto grads = param_gradients(net, x, y, fr.trace);
    DenseNetwork probe = net;
    const double h = 1e-5;
    double worst = 0.0;
    for (std::size_t l = 0; l < probe.layers().size(); ++l)
        for (Eigen::Index i = 0; i < probe.layers()[l].weights.size(); ++i) {
            double& w = probe.mutable_layers()[l].weights.data()[i];
            const double saved = w;
            w = saved + h;
            const double lp = oracle::cross_entropy(probe, x, y, &fr.trace.dropout_masks);
            w = saved - h;
            const double lm = oracle::cross_entropy(probe, x, y, &fr.trace.dropout_masks);
            w = saved;
            worst = std::max(worst, oracle::relative_error(grads[l].weights.data()[i], (lp - lm) / (2 * h)));
        }
    CHECK(worst <= 1e-5);
}

TEST_CASE("gradient edge cases") {
    const auto net = init_network(ArchitectureSpec::preset(2, 4, Activation::relu), 3);
    const Matrix zeros = Matrix::Zero(3, 4);
    const std::vector<int> y{0, 1, 0};
    const auto fr = forward(net, zeros, Mode::infer);
    const auto g = param_gradients(net, zeros, y, fr.trace);
    CHECK(g[0].weights.isZero(0.0));

    const Matrix x = random_matrix(4, 4, 5);
    const std::vector<int> yx{0, 1, 1, 0};
    Matrix twice(8, 4);
    twice << x, x;
    std::vector<int> ytwice = yx;
    ytwice.insert(ytwice.end(), yx.begin(), yx.end());
    const auto g1 = param_gradients(net, x, yx, forward(net, x, Mode::infer).trace);
    const auto g2 = param_gradients(net, twice, ytwice, forward(net, twice, Mode::infer).trace);
    for (std::size_t l = 0; l < g1.size(); ++l) {
        CHECK((g1[l].weights - g2[l].weights).cwiseAbs().maxCoeff() <= 1e-15);
        CHECK((g1[l].bias - g2[l].bias).cwiseAbs().maxCoeff() <= 1e-15);
    }

    CHECK_THROWS_AS(param_gradients(net, twice, ytwice, fr.trace), SchemaError);
    CHECK_THROWS_AS(param_gradients(net, x, yx, forward(net, x + Matrix::Constant(4, 4, 1.0), Mode::infer).trace),
                    SchemaError);
}

TEST_CASE("logistic input gradient has the closed form (p - onehot(y)) W^T") {
    auto net = init_network(ArchitectureSpec{3, {}, 0.0, 2}, 4);
    net.mutable_layers()[0].bias << 0.3, -0.2;
    const Matrix x = random_matrix(5, 3, 6);
    const std::vector<int> y{0, 1, 1, 0, 1};
    const Matrix g = input_gradients(net, x, y);
    const Matrix p = predict_proba(net, x);
    Matrix expected(5, 3);
    for (Eigen::Index i = 0; i < 5; ++i) {
        Vector r = p.row(i).transpose();
        r(y[static_cast<std::size_t>(i)]) -= 1.0;
        expected.row(i) = (net.layers()[0].weights * r).transpose();
    }
    CHECK((g - expected).cwiseAbs().maxCoeff() <= 1e-15);

    // Each row depends only on its own sample.
    const Matrix g0 = input_gradients(net, x.topRows(1), {y[0]});
    CHECK(g0.row(0) == g.row(0));
}

TEST_CASE("saturated samples have vanishing input gradient") {
    auto net = init_network(ArchitectureSpec{1, {}, 0.0, 2}, 1);
    net.mutable_layers()[0].weights << -40.0, 40.0;
    Matrix x(1, 1);
    x << 2.0;
    CHECK(input_gradients(net, x, {1}).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("activation derivatives") {
    auto net = init_network(ArchitectureSpec{1, {{1, Activation::relu}}, 0.0, 2}, 1);
    net.mutable_layers()[0].weights << 1.0;
    net.mutable_layers()[0].bias << 0.0;
    net.mutable_layers()[1].weights << 1.0, -1.0;
    for (double v : {-3.0, -1e-3, 0.0}) {
        Matrix x(1, 1);
        x << v;
        CHECK(input_gradients(net, x, {0})(0, 0) == 0.0);
    }
    std::mt19937_64 rng(3);
    for (auto act : {Activation::tanh, Activation::elu}) {
        auto n = init_network(ArchitectureSpec{1, {{1, act}}, 0.0, 2}, 1);
        n.mutable_layers()[0].weights << 1.0;
        n.mutable_layers()[1].weights << 1.0, -1.0;
        for (double v : {-2.5, -0.4, 0.3, 1.7}) {
            Matrix x(1, 1);
            x << v;
            const auto ig = oracle::check_input_gradients(n, x, {0});
            CHECK(ig.max_rel_err <= 1e-6);
        }
    }
}

TEST_CASE("fit reaches the separable floor and is deterministic") {
    const auto b = separable_bundle();
    TrainingConfig tc;
    tc.epochs = 10;
    tc.seed = 5;
    const auto net = init_network(ArchitectureSpec::preset(1, 10, Activation::relu), 5);
    const auto r1 = fit(net, b, tc);
    const auto r2 = fit(net, b, tc);
    CHECK(accuracy(r1.network, b) >= 0.99);
    CHECK(r1.network.serialize() == r2.network.serialize());
    CHECK(r1.loss_curve == r2.loss_curve);
    CHECK(r1.loss_curve.size() == 10);
    CHECK(r1.train_seconds > 0.0);
    CHECK(r1.network.feature_names == b.train_x.feature_names);
}

TEST_CASE("zero learning rate leaves parameters unchanged") {
    const auto b = separable_bundle(400);
    TrainingConfig tc;
    tc.epochs = 3;
    tc.learning_rate = 0.0;
    for (auto opt : {Optimizer::sgd, Optimizer::adam}) {
        tc.optimizer = opt;
        const auto net = init_network(ArchitectureSpec::preset(2, 10, Activation::tanh, 0.5), 2);
        const auto r = fit(net, b, tc);
        for (std::size_t l = 0; l < net.layers().size(); ++l) {
            CHECK(r.network.layers()[l].weights == net.layers()[l].weights);
            CHECK(r.network.layers()[l].bias == net.layers()[l].bias);
        }
        CHECK(r.loss_curve[0] == r.loss_curve[2]);
    }
}

TEST_CASE("training configuration validation and divergence") {
    const auto b = separable_bundle(400);
    const auto net = init_network(ArchitectureSpec::preset(1, 10, Activation::relu), 2);
    TrainingConfig bad;
    bad.epochs = 0;
    CHECK_THROWS_AS(fit(net, b, bad), SchemaError);
    bad = {};
    bad.batch_size = 0;
    CHECK_THROWS_AS(fit(net, b, bad), SchemaError);
    const auto wrong = init_network(ArchitectureSpec::preset(1, 9, Activation::relu), 2);
    CHECK_THROWS_AS(fit(wrong, b, {}), SchemaError);

    TrainingConfig wild;
    wild.optimizer = Optimizer::sgd;
    wild.learning_rate = 1e300;
    wild.epochs = 2;
    CHECK_THROWS_AS(fit(net, b, wild), DivergenceError);
}

TEST_CASE("adversarial training") {
    const auto [x, y] = synth_dataset({3.0, 4, 0.8, 0.5}, 3000, 10, 31);
    const auto b = make_bundle(x, y, 0.8, false, 31);
    TrainingConfig tc;
    tc.epochs = 8;
    tc.seed = 3;
    const auto net = init_network(ArchitectureSpec::preset(1, 10, Activation::relu), 3);

    AdvTrainConfig adv;
    adv.inner_attack = AttackConfig::defaults(AttackKind::fgsm, 0.3);
    adv.fraction = 1.0;
    const auto robust = adversarial_fit(net, b, tc, adv);
    const auto again = adversarial_fit(net, b, tc, adv);
    CHECK(robust.network.serialize() == again.network.serialize());

    const auto clean = fit(net, b, tc);
    CHECK(robust.network.serialize() != clean.network.serialize());

    // Smallest legal fraction behaves like clean training up to noise.
    AdvTrainConfig tiny = adv;
    tiny.fraction = 0.01;
    const auto nearly = adversarial_fit(net, b, tc, tiny);
    CHECK(std::abs(accuracy(nearly.network, b) - accuracy(clean.network, b)) <= 0.02);

    AdvTrainConfig bad = adv;
    bad.fraction = 0.0;
    CHECK_THROWS_AS(adversarial_fit(net, b, tc, bad), SchemaError);
    bad.fraction = 1.5;
    CHECK_THROWS_AS(adversarial_fit(net, b, tc, bad), SchemaError);
}

TEST_CASE("model serialization round-trip is bit-exact") {
    auto net = init_network(ArchitectureSpec::preset(4, 9, Activation::elu, 0.5, 3), 42);
    net.feature_names = {"a", "b", "c", "d", "e", "f", "g", "h", "i"};
    const auto bytes = net.serialize();
    const auto back = DenseNetwork::deserialize(bytes);
    CHECK(back.serialize() == bytes);
    CHECK(back.spec() == net.spec());
    CHECK(back.seed() == 42);
    CHECK(back.feature_names == net.feature_names);
    CHECK_THROWS_AS(DenseNetwork::deserialize(bytes.substr(0, bytes.size() / 2)), SchemaError);
    CHECK_THROWS_AS(DenseNetwork::deserialize("garbage!"), SchemaError);
}
