#include "nidsrobust/attacks.hpp"
#include "nidsrobust/error.hpp"
#include "nidsrobust/hash.hpp"
#include "nidsrobust/neuralnet.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

namespace nidsrobust {

std::string_view to_string(Optimizer o) { return o == Optimizer::adam ? "adam" : "sgd"; }

Optimizer parse_optimizer(std::string_view name) {
    if (name == "adam") return Optimizer::adam;
    if (name == "sgd") return Optimizer::sgd;
    throw SchemaError("unknown optimizer: " + std::string(name));
}

void TrainingConfig::validate() const {
    if (epochs < 1) throw SchemaError("training needs at least one epoch");
    if (batch_size < 1) throw SchemaError("batch size must be >= 1");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw SchemaError("learning rate must be >= 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
        throw SchemaError("adam moment coefficients must lie in [0, 1)");
    if (!(adam_epsilon > 0.0)) throw SchemaError("adam epsilon must be > 0");
}

void AdvTrainConfig::validate() const {
    inner_attack.validate();
    if (!(fraction > 0.0 && fraction <= 1.0)) throw SchemaError("adversarial fraction must lie in (0, 1]");
    if (from_epoch < 1) throw SchemaError("adversarial training from_epoch is 1-based");
}

namespace {

struct AdamState {
    std::vector<LayerGradient> m;
    std::vector<LayerGradient> v;
    std::size_t step = 0;
};

void apply_update(DenseNetwork& net, const GradientSet& grads, const TrainingConfig& cfg, AdamState& state) {
    auto& layers = net.mutable_layers();
    if (cfg.optimizer == Optimizer::sgd) {
        for (std::size_t l = 0; l < layers.size(); ++l) {
            layers[l].weights -= cfg.learning_rate * grads[l].weights;
            layers[l].bias -= cfg.learning_rate * grads[l].bias;
        }
        return;
    }
    if (state.m.empty()) {
        for (const auto& g : grads) {
            state.m.push_back({Matrix::Zero(g.weights.rows(), g.weights.cols()), Vector::Zero(g.bias.size())});
            state.v.push_back({Matrix::Zero(g.weights.rows(), g.weights.cols()), Vector::Zero(g.bias.size())});
        }
    }
    ++state.step;
    const double b1 = cfg.beta1;
    const double b2 = cfg.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
    const double lr = cfg.learning_rate;
    const double eps = cfg.adam_epsilon;
    auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
        m = b1 * m + (1.0 - b1) * g;
        v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
        param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
    };
    for (std::size_t l = 0; l < layers.size(); ++l) {
        update(layers[l].weights, state.m[l].weights, state.v[l].weights, grads[l].weights);
        update(layers[l].bias, state.m[l].bias, state.v[l].bias, grads[l].bias);
    }
}

bool parameters_finite(const DenseNetwork& net) {
    return std::all_of(net.layers().begin(), net.layers().end(),
                       [](const DenseLayer& l) { return l.weights.allFinite() && l.bias.allFinite(); });
}

FitResult train(DenseNetwork net, const DatasetBundle& bundle, const TrainingConfig& cfg, const AdvTrainConfig* adv) {
    cfg.validate();
    if (adv) {
        if (!(adv->fraction > 0.0 && adv->fraction <= 1.0))
            throw SchemaError("adversarial fraction must lie in (0, 1]");
        if (adv->from_epoch < 1) throw SchemaError("adversarial training from_epoch is 1-based");
    }
    if (bundle.train_x.features() != net.spec().input_dim)
        throw SchemaError("bundle has " + std::to_string(bundle.train_x.features()) + " features, network expects " +
                          std::to_string(net.spec().input_dim));
    if (static_cast<std::size_t>(bundle.train_y.k) != net.spec().output_classes)
        throw SchemaError("bundle class count does not match network outputs");
    if (bundle.train_x.samples() == 0) throw SchemaError("cannot train on an empty split");

    const auto& x = bundle.train_x.values;
    const auto& y = bundle.train_y.ids;
    const std::size_t n = bundle.train_x.samples();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    AdamState adam;
    FitResult result;
    const auto start = std::chrono::steady_clock::now();

    Matrix xb;
    std::vector<int> yb;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::mt19937_64 shuffle_rng(derive_seed(cfg.seed, 0x1000000ULL + epoch));
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        const bool adversarial = adv && epoch + 1 >= adv->from_epoch;

        for (std::size_t b = 0, batch = 0; b < n; b += cfg.batch_size, ++batch) {
            const std::size_t m = std::min(cfg.batch_size, n - b);
            xb.resize(static_cast<Eigen::Index>(m), x.cols());
            yb.resize(m);
            for (std::size_t i = 0; i < m; ++i) {
                xb.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(order[b + i]));
                yb[i] = y[order[b + i]];
            }
            const Seed batch_seed = derive_seed(cfg.seed, (epoch << 32) ^ batch);

            if (adversarial) {
                const auto count = std::max<std::size_t>(
                    1, static_cast<std::size_t>(std::llround(adv->fraction * static_cast<double>(m))));
                std::vector<std::size_t> pick(m);
                std::iota(pick.begin(), pick.end(), std::size_t{0});
                if (count < m) {
                    std::mt19937_64 pick_rng(derive_seed(batch_seed, 0xadULL));
                    std::shuffle(pick.begin(), pick.end(), pick_rng);
                    pick.resize(count);
                    std::sort(pick.begin(), pick.end());
                }
                Matrix xs(static_cast<Eigen::Index>(pick.size()), x.cols());
                std::vector<int> ys(pick.size());
                for (std::size_t i = 0; i < pick.size(); ++i) {
                    xs.row(static_cast<Eigen::Index>(i)) = xb.row(static_cast<Eigen::Index>(pick[i]));
                    ys[i] = yb[pick[i]];
                }
                AttackConfig inner = adv->inner_attack;
                inner.seed = derive_seed(batch_seed, inner.seed);
                if (inner.clip_to_feature_range && !inner.feature_range)
                    inner.feature_range = train_feature_range(bundle);
                const auto crafted = run_attack(net, xs, ys, inner);
                for (std::size_t i = 0; i < pick.size(); ++i)
                    xb.row(static_cast<Eigen::Index>(pick[i])) = crafted.x_adv.row(static_cast<Eigen::Index>(i));
            }

            const auto fr = forward(net, xb, Mode::train, derive_seed(batch_seed, 0xd0ULL));
            const auto grads = param_gradients(net, xb, yb, fr.trace);
            apply_update(net, grads, cfg, adam);
        }

        const double loss = loss_J(predict_proba(net, x), y);
        result.loss_curve.push_back(loss);
        if (!std::isfinite(loss) || !parameters_finite(net))
            throw DivergenceError("training diverged at epoch " + std::to_string(epoch + 1) +
                                  " (non-finite loss or parameters)");
    }

    result.train_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    net.feature_names = bundle.train_x.feature_names;
    result.network = std::move(net);
    return result;
}

}  // namespace

FitResult fit(DenseNetwork net, const DatasetBundle& bundle, const TrainingConfig& cfg) {
    return train(std::move(net), bundle, cfg, nullptr);
}

FitResult adversarial_fit(DenseNetwork net, const DatasetBundle& bundle, const TrainingConfig& cfg,
                          const AdvTrainConfig& adv) {
    return train(std::move(net), bundle, cfg, &adv);
}

}  // namespace nidsrobust
