#pragma once

// Dense feed-forward classifier with a softmax head and hand-derived
// gradients for parameters and inputs.

#include "nidsrobust/attack_config.hpp"
#include "nidsrobust/datapipe.hpp"
#include "nidsrobust/types.hpp"

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace nidsrobust {

enum class Activation { relu, tanh, elu };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

struct HiddenLayer {
    std::size_t width = 0;
    Activation activation = Activation::relu;

    friend bool operator==(const HiddenLayer&, const HiddenLayer&) = default;
};

struct ArchitectureSpec {
    std::size_t input_dim = 0;
    std::vector<HiddenLayer> hidden;  ///< empty = multinomial logistic regression
    double dropout_p = 0.0;           ///< applied after every hidden layer in train mode
    std::size_t output_classes = 2;

    void validate() const;

    /// Hidden widths of the five reference architectures, depth 1..5.
    static const std::vector<std::size_t>& preset_widths(int depth);
    static ArchitectureSpec preset(int depth, std::size_t input_dim, Activation activation,
                                   double dropout_p = 0.0, std::size_t output_classes = 2);

    friend bool operator==(const ArchitectureSpec&, const ArchitectureSpec&) = default;
};

/// weights: in_dim x out_dim, bias: out_dim.
struct DenseLayer {
    Matrix weights;
    Vector bias;
};

class DenseNetwork {
public:
    DenseNetwork() = default;
    DenseNetwork(ArchitectureSpec spec, std::vector<DenseLayer> layers, Seed seed);

    [[nodiscard]] const ArchitectureSpec& spec() const { return spec_; }
    [[nodiscard]] const std::vector<DenseLayer>& layers() const { return layers_; }
    [[nodiscard]] std::vector<DenseLayer>& mutable_layers() { return layers_; }
    [[nodiscard]] Seed seed() const { return seed_; }
    [[nodiscard]] std::size_t parameter_count() const;

    /// Optional column names the network was trained on.
    std::vector<std::string> feature_names;

    /// Throws SchemaError if layer shapes do not chain or a parameter is
    /// non-finite.
    void validate() const;

    /// Flat little-endian file; a save/load round-trip is bit-exact.
    [[nodiscard]] std::string serialize() const;
    static DenseNetwork deserialize(const std::string& bytes);
    void save(const std::string& path) const;
    static DenseNetwork load(const std::string& path);

private:
    ArchitectureSpec spec_;
    std::vector<DenseLayer> layers_;
    Seed seed_ = 0;
};

/// Glorot-uniform weights, zero biases.
DenseNetwork init_network(const ArchitectureSpec& spec, Seed seed);

enum class Mode { train, infer };

/// Backpropagation cache. activations[0] is the input; activations.back()
/// holds the softmax probabilities. Masks are stored pre-scaled by 1/(1-p)
/// and are empty in infer mode.
struct ForwardTrace {
    Mode mode = Mode::infer;
    std::vector<Matrix> pre_activations;
    std::vector<Matrix> activations;
    std::vector<Matrix> dropout_masks;
};

struct ForwardResult {
    Matrix probabilities;
    ForwardTrace trace;
};

ForwardResult forward(const DenseNetwork& net, const Matrix& x, Mode mode = Mode::infer, Seed seed = 0);

/// Infer-mode probabilities without keeping a trace.
Matrix predict_proba(const DenseNetwork& net, const Matrix& x);
std::vector<int> argmax_rows(const Matrix& probabilities);

inline constexpr double kProbabilityFloor = 1e-12;

/// Mean categorical cross-entropy with probabilities clamped to >= 1e-12.
double loss_J(const Matrix& probabilities, const std::vector<int>& y);
/// Per-row cross-entropy with the same clamp.
Vector sample_losses(const Matrix& probabilities, const std::vector<int>& y);

struct LayerGradient {
    Matrix weights;
    Vector bias;
};
using GradientSet = std::vector<LayerGradient>;

/// Exact gradient of loss_J over the batch in `trace` with respect to every
/// weight and bias, honouring the trace's dropout masks.
GradientSet param_gradients(const DenseNetwork& net, const Matrix& x, const std::vector<int>& y,
                            const ForwardTrace& trace);

/// Row i is the gradient of sample i's own cross-entropy with respect to
/// x.row(i), evaluated in infer mode. Equal to N times the gradient of the
/// batch-mean loss, so rows never depend on batch composition.
Matrix input_gradients(const DenseNetwork& net, const Matrix& x, const std::vector<int>& y);

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

enum class Optimizer { sgd, adam };

std::string_view to_string(Optimizer o);
Optimizer parse_optimizer(std::string_view name);

struct TrainingConfig {
    std::size_t epochs = 20;
    std::size_t batch_size = 256;
    double learning_rate = 1e-3;
    Optimizer optimizer = Optimizer::adam;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_epsilon = 1e-8;
    Seed seed = 0;

    void validate() const;
};

/// A seeded fraction of every batch is replaced by adversarial counterparts
/// crafted against the current parameters.
struct AdvTrainConfig {
    AttackConfig inner_attack = AttackConfig::defaults(AttackKind::pgd, 0.3);
    double fraction = 0.5;
    std::size_t from_epoch = 1;  ///< 1-based

    void validate() const;
};

struct FitResult {
    DenseNetwork network;
    double train_seconds = 0.0;
    /// Infer-mode training-split loss after each epoch.
    std::vector<double> loss_curve;
};

FitResult fit(DenseNetwork net, const DatasetBundle& bundle, const TrainingConfig& cfg);
FitResult adversarial_fit(DenseNetwork net, const DatasetBundle& bundle, const TrainingConfig& cfg,
                          const AdvTrainConfig& adv);

}  // namespace nidsrobust
