#include "nidsrobust/neuralnet.hpp"

#include "nidsrobust/binio.hpp"
#include "nidsrobust/error.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace nidsrobust {

std::string_view to_string(Activation a) {
    switch (a) {
        case Activation::relu: return "relu";
        case Activation::tanh: return "tanh";
        case Activation::elu: return "elu";
    }
    return "?";
}

Activation parse_activation(std::string_view name) {
    if (name == "relu") return Activation::relu;
    if (name == "tanh") return Activation::tanh;
    if (name == "elu") return Activation::elu;
    throw SchemaError("unknown activation: " + std::string(name));
}

void ArchitectureSpec::validate() const {
    if (input_dim < 1) throw SchemaError("architecture input_dim must be >= 1");
    if (output_classes < 2) throw SchemaError("architecture needs at least two output classes");
    if (!(dropout_p >= 0.0 && dropout_p < 1.0)) throw SchemaError("dropout probability must lie in [0, 1)");
    for (const auto& h : hidden)
        if (h.width < 1) throw SchemaError("hidden layer width must be >= 1");
}

const std::vector<std::size_t>& ArchitectureSpec::preset_widths(int depth) {
    static const std::array<std::vector<std::size_t>, 5> widths = {{
        {64},
        {64, 128},
        {64, 128, 128},
        {64, 128, 512, 128},
        {64, 128, 512, 128, 64},
    }};
    if (depth < 1 || depth > 5) throw SchemaError("preset depth must be 1..5, got " + std::to_string(depth));
    return widths[static_cast<std::size_t>(depth - 1)];
}

ArchitectureSpec ArchitectureSpec::preset(int depth, std::size_t input_dim, Activation activation, double dropout_p,
                                          std::size_t output_classes) {
    ArchitectureSpec spec;
    spec.input_dim = input_dim;
    spec.dropout_p = dropout_p;
    spec.output_classes = output_classes;
    for (auto w : preset_widths(depth)) spec.hidden.push_back({w, activation});
    spec.validate();
    return spec;
}

DenseNetwork::DenseNetwork(ArchitectureSpec spec, std::vector<DenseLayer> layers, Seed seed)
    : spec_(std::move(spec)), layers_(std::move(layers)), seed_(seed) {
    validate();
}

std::size_t DenseNetwork::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
    return n;
}

void DenseNetwork::validate() const {
    spec_.validate();
    if (layers_.size() != spec_.hidden.size() + 1) throw SchemaError("layer count does not match architecture");
    std::size_t in = spec_.input_dim;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const std::size_t out = l < spec_.hidden.size() ? spec_.hidden[l].width : spec_.output_classes;
        const auto& layer = layers_[l];
        if (static_cast<std::size_t>(layer.weights.rows()) != in ||
            static_cast<std::size_t>(layer.weights.cols()) != out || static_cast<std::size_t>(layer.bias.size()) != out)
            throw SchemaError("layer " + std::to_string(l) + " shape does not chain");
        if (!layer.weights.allFinite() || !layer.bias.allFinite())
            throw SchemaError("layer " + std::to_string(l) + " has non-finite parameters");
        in = out;
    }
    if (!feature_names.empty() && feature_names.size() != spec_.input_dim)
        throw SchemaError("network feature_names length differs from input_dim");
}

DenseNetwork init_network(const ArchitectureSpec& spec, Seed seed) {
    spec.validate();
    std::mt19937_64 rng(seed);
    std::vector<DenseLayer> layers;
    std::size_t in = spec.input_dim;
    for (std::size_t l = 0; l <= spec.hidden.size(); ++l) {
        const std::size_t out = l < spec.hidden.size() ? spec.hidden[l].width : spec.output_classes;
        const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
        std::uniform_real_distribution<double> u(-limit, limit);
        DenseLayer layer{Matrix(static_cast<Eigen::Index>(in), static_cast<Eigen::Index>(out)),
                         Vector::Zero(static_cast<Eigen::Index>(out))};
        for (Eigen::Index r = 0; r < layer.weights.rows(); ++r)
            for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = u(rng);
        layers.push_back(std::move(layer));
        in = out;
    }
    return DenseNetwork(spec, std::move(layers), seed);
}

// ---------------------------------------------------------------------------
// Forward
// ---------------------------------------------------------------------------

namespace {

void activate(Activation a, const Matrix& z, Matrix& out) {
    switch (a) {
        case Activation::relu: out = z.cwiseMax(0.0); break;
        case Activation::tanh: out = z.array().tanh().matrix(); break;
        case Activation::elu:
            out = z.unaryExpr([](double v) { return v > 0.0 ? v : std::expm1(v); });
            break;
    }
}

// Derivative evaluated at the pre-activation. ReLU uses subgradient 0 at 0.
Matrix activation_derivative(Activation a, const Matrix& z) {
    switch (a) {
        case Activation::relu: return z.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; });
        case Activation::tanh:
            return z.unaryExpr([](double v) {
                const double t = std::tanh(v);
                return 1.0 - t * t;
            });
        case Activation::elu: return z.unaryExpr([](double v) { return v < 0.0 ? std::exp(v) : 1.0; });
    }
    return {};
}

void softmax_rows(const Matrix& z, Matrix& p) {
    p.resize(z.rows(), z.cols());
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        const double m = z.row(i).maxCoeff();
        double sum = 0.0;
        for (Eigen::Index c = 0; c < z.cols(); ++c) {
            const double e = std::exp(z(i, c) - m);
            p(i, c) = e;
            sum += e;
        }
        p.row(i) /= sum;
    }
}

void affine(const Matrix& a, const DenseLayer& layer, Matrix& z) {
    z.noalias() = a * layer.weights;
    z.rowwise() += layer.bias.transpose();
}

void check_input(const DenseNetwork& net, const Matrix& x) {
    if (static_cast<std::size_t>(x.cols()) != net.spec().input_dim)
        throw SchemaError("input has " + std::to_string(x.cols()) + " features, network expects " +
                          std::to_string(net.spec().input_dim));
}

// Softmax + cross-entropy gradient with respect to the logits, unscaled.
// Rows whose true-class probability sits below the clamp have a flat loss.
Matrix logit_gradient(const Matrix& probabilities, const std::vector<int>& y) {
    if (static_cast<std::size_t>(probabilities.rows()) != y.size())
        throw SchemaError("labels are not paired with the batch");
    Matrix delta = probabilities;
    for (Eigen::Index i = 0; i < delta.rows(); ++i) {
        const auto c = static_cast<Eigen::Index>(y[static_cast<std::size_t>(i)]);
        if (c < 0 || c >= delta.cols()) throw SchemaError("label id out of range");
        if (probabilities(i, c) < kProbabilityFloor) delta.row(i).setZero();
        else delta(i, c) -= 1.0;
    }
    return delta;
}

}  // namespace

ForwardResult forward(const DenseNetwork& net, const Matrix& x, Mode mode, Seed seed) {
    check_input(net, x);
    const auto& spec = net.spec();
    const auto& layers = net.layers();
    const bool use_dropout = mode == Mode::train && spec.dropout_p > 0.0;

    ForwardResult r;
    r.trace.mode = mode;
    r.trace.pre_activations.resize(layers.size());
    r.trace.activations.resize(layers.size() + 1);
    r.trace.activations[0] = x;

    std::mt19937_64 rng(seed);
    std::bernoulli_distribution keep(1.0 - spec.dropout_p);
    const double scale = use_dropout ? 1.0 / (1.0 - spec.dropout_p) : 1.0;

    for (std::size_t l = 0; l < layers.size(); ++l) {
        affine(r.trace.activations[l], layers[l], r.trace.pre_activations[l]);
        auto& out = r.trace.activations[l + 1];
        if (l + 1 == layers.size()) {
            softmax_rows(r.trace.pre_activations[l], out);
            break;
        }
        activate(spec.hidden[l].activation, r.trace.pre_activations[l], out);
        if (use_dropout) {
            Matrix mask(out.rows(), out.cols());
            for (Eigen::Index i = 0; i < mask.rows(); ++i)
                for (Eigen::Index j = 0; j < mask.cols(); ++j) mask(i, j) = keep(rng) ? scale : 0.0;
            out.array() *= mask.array();
            r.trace.dropout_masks.push_back(std::move(mask));
        }
    }
    r.probabilities = r.trace.activations.back();
    return r;
}

Matrix predict_proba(const DenseNetwork& net, const Matrix& x) {
    check_input(net, x);
    const auto& layers = net.layers();
    Matrix a = x;
    Matrix z;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        affine(a, layers[l], z);
        if (l + 1 == layers.size()) softmax_rows(z, a);
        else activate(net.spec().hidden[l].activation, z, a);
    }
    return a;
}

std::vector<int> argmax_rows(const Matrix& probabilities) {
    std::vector<int> out(static_cast<std::size_t>(probabilities.rows()));
    for (Eigen::Index i = 0; i < probabilities.rows(); ++i) {
        Eigen::Index best = 0;
        probabilities.row(i).maxCoeff(&best);
        out[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
    return out;
}

Vector sample_losses(const Matrix& probabilities, const std::vector<int>& y) {
    if (static_cast<std::size_t>(probabilities.rows()) != y.size())
        throw SchemaError("labels are not paired with the probabilities");
    Vector out(probabilities.rows());
    for (Eigen::Index i = 0; i < probabilities.rows(); ++i) {
        const double p = probabilities(i, static_cast<Eigen::Index>(y[static_cast<std::size_t>(i)]));
        out(i) = -std::log(std::max(p, kProbabilityFloor));
    }
    return out;
}

double loss_J(const Matrix& probabilities, const std::vector<int>& y) {
    if (y.empty()) return 0.0;
    return sample_losses(probabilities, y).mean();
}

// ---------------------------------------------------------------------------
// Gradients
// ---------------------------------------------------------------------------

GradientSet param_gradients(const DenseNetwork& net, const Matrix& x, const std::vector<int>& y,
                            const ForwardTrace& trace) {
    const auto& layers = net.layers();
    const auto& spec = net.spec();
    if (trace.activations.size() != layers.size() + 1 || trace.pre_activations.size() != layers.size() ||
        trace.activations[0].rows() != x.rows() || trace.activations[0].cols() != x.cols() ||
        trace.activations[0] != x)
        throw SchemaError("stale forward trace: not produced by this network on this batch");
    const bool masked = !trace.dropout_masks.empty();
    if (masked && trace.dropout_masks.size() != spec.hidden.size())
        throw SchemaError("stale forward trace: dropout mask count mismatch");

    Matrix delta = logit_gradient(trace.activations.back(), y) / static_cast<double>(x.rows());
    GradientSet grads(layers.size());
    for (std::size_t l = layers.size(); l-- > 0;) {
        grads[l].weights.noalias() = trace.activations[l].transpose() * delta;
        grads[l].bias = delta.colwise().sum().transpose();
        if (l == 0) break;
        Matrix back = delta * layers[l].weights.transpose();
        back.array() *= activation_derivative(spec.hidden[l - 1].activation, trace.pre_activations[l - 1]).array();
        if (masked) back.array() *= trace.dropout_masks[l - 1].array();
        delta = std::move(back);
    }
    return grads;
}

Matrix input_gradients(const DenseNetwork& net, const Matrix& x, const std::vector<int>& y) {
    const auto fr = forward(net, x, Mode::infer);
    const auto& layers = net.layers();
    const auto& trace = fr.trace;
    Matrix delta = logit_gradient(fr.probabilities, y);
    for (std::size_t l = layers.size(); l-- > 0;) {
        Matrix back = delta * layers[l].weights.transpose();
        if (l == 0) return back;
        back.array() *= activation_derivative(net.spec().hidden[l - 1].activation, trace.pre_activations[l - 1]).array();
        delta = std::move(back);
    }
    return {};
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {
constexpr char kModelMagic[8] = {'N', 'R', 'M', 'O', 'D', 'E', 'L', '1'};
constexpr std::uint32_t kModelVersion = 1;
}  // namespace

std::string DenseNetwork::serialize() const {
    std::ostringstream out(std::ios::binary);
    binio::write_magic(out, kModelMagic);
    binio::write_u32(out, kModelVersion);
    binio::write_u64(out, seed_);
    binio::write_u64(out, spec_.input_dim);
    binio::write_u64(out, spec_.output_classes);
    binio::write_f64(out, spec_.dropout_p);
    binio::write_u64(out, spec_.hidden.size());
    for (const auto& h : spec_.hidden) {
        binio::write_u64(out, h.width);
        binio::write_u32(out, static_cast<std::uint32_t>(h.activation));
    }
    binio::write_strings(out, feature_names);
    for (const auto& l : layers_) {
        binio::write_matrix(out, l.weights);
        binio::write_vector(out, l.bias);
    }
    return out.str();
}

DenseNetwork DenseNetwork::deserialize(const std::string& bytes) {
    std::istringstream in(bytes, std::ios::binary);
    binio::expect_magic(in, kModelMagic, "model file");
    if (const auto v = binio::read_u32(in); v != kModelVersion)
        throw SchemaError("unsupported model version " + std::to_string(v));
    const Seed seed = binio::read_u64(in);
    ArchitectureSpec spec;
    spec.input_dim = binio::read_u64(in);
    spec.output_classes = binio::read_u64(in);
    spec.dropout_p = binio::read_f64(in);
    const auto hidden = binio::read_u64(in);
    if (hidden > 64) throw SchemaError("model file declares too many hidden layers");
    for (std::uint64_t i = 0; i < hidden; ++i) {
        HiddenLayer h;
        h.width = binio::read_u64(in);
        const auto act = binio::read_u32(in);
        if (act > 2) throw SchemaError("model file has an unknown activation tag");
        h.activation = static_cast<Activation>(act);
        spec.hidden.push_back(h);
    }
    auto names = binio::read_strings(in);
    std::vector<DenseLayer> layers;
    for (std::uint64_t i = 0; i <= hidden; ++i) {
        DenseLayer l;
        l.weights = binio::read_matrix(in);
        l.bias = binio::read_vector(in);
        layers.push_back(std::move(l));
    }
    DenseNetwork net(std::move(spec), std::move(layers), seed);
    net.feature_names = std::move(names);
    net.validate();
    return net;
}

void DenseNetwork::save(const std::string& path) const { binio::atomic_write(path, serialize()); }

DenseNetwork DenseNetwork::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read model: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return deserialize(ss.str());
}

}  // namespace nidsrobust
