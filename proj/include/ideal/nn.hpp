#pragma once

// Dense rectifier classifier with the reverse-mode passes the engine needs:
// parameter gradients for training and input-space gradients of the KL
// divergence for virtual adversarial perturbations.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ideal/common.hpp"

namespace ideal::nn {

struct DenseLayer {
    std::size_t inputs = 0;
    std::size_t outputs = 0;
    Vector weights;  // row-major, outputs x inputs
    Vector bias;     // outputs

    DenseLayer() = default;
    DenseLayer(std::size_t in, std::size_t out)
        : inputs(in), outputs(out), weights(in * out, 0.0), bias(out, 0.0) {}

    double& w(std::size_t o, std::size_t i) { return weights[o * inputs + i]; }
    double w(std::size_t o, std::size_t i) const { return weights[o * inputs + i]; }
};

/// Multilayer perceptron. Hidden layers use the rectifier; the last layer
/// emits logits. `tap_layer` selects the representation used for mixing,
/// perturbation and similarity: the input of layer `tap_layer` (0 is the raw
/// input, 1 the first hidden activation, ...).
class Classifier {
public:
    Classifier(std::vector<DenseLayer> layers, std::size_t tap_layer = 0);

    /// He-initialised weights, zero biases.
    static Classifier random(std::size_t input_dim, std::span<const std::size_t> hidden, std::size_t classes,
                             std::size_t tap_layer, Rng& rng);
    /// Every weight and bias zero; predicts the uniform distribution.
    static Classifier zeros(std::size_t input_dim, std::span<const std::size_t> hidden, std::size_t classes,
                            std::size_t tap_layer = 0);

    std::size_t input_dim() const noexcept { return layers_.front().inputs; }
    std::size_t class_count() const noexcept { return layers_.back().outputs; }
    std::size_t layer_count() const noexcept { return layers_.size(); }
    std::size_t tap_layer() const noexcept { return tap_; }
    std::size_t width_at(std::size_t layer) const { return layers_.at(layer).inputs; }
    std::size_t representation_dim() const { return width_at(tap_); }

    const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
    std::vector<DenseLayer>& layers() noexcept { return layers_; }

    /// Input to `layer` given a raw input.
    Vector activation_at(std::size_t layer, std::span<const double> x) const;
    Vector representation(std::span<const double> x) const { return activation_at(tap_, x); }

    /// Logits / probabilities from an activation entering `layer`.
    Vector logits_from(std::size_t layer, std::span<const double> h) const;
    PredictionDist predict_from(std::size_t layer, std::span<const double> h) const;
    PredictionDist predict(std::span<const double> x) const { return predict_from(0, x); }

    std::size_t parameter_count() const;

private:
    std::vector<DenseLayer> layers_;
    std::size_t tap_ = 0;
};

struct ForwardResult {
    Vector hidden;  // tap-layer activation
    PredictionDist probs;
};

ForwardResult forward(const Classifier& model, std::span<const double> x);

Vector softmax(std::span<const double> logits);
Vector log_softmax(std::span<const double> logits);

/// Floor applied to the second argument of the KL divergence.
inline constexpr double kProbabilityFloor = 1e-12;

/// KL(p || q) with 0 ln 0 = 0 and q clamped below at kProbabilityFloor.
double kl_divergence(const PredictionDist& p, const PredictionDist& q);

/// Gradient with respect to `offset` of KL(reference || p(. | base + offset)),
/// where base and offset live at the input of `layer`.
Vector grad_wrt_representation(const Classifier& model, std::size_t layer, std::span<const double> base,
                               const PredictionDist& reference, std::span<const double> offset);

inline Vector grad_wrt_input(const Classifier& model, std::span<const double> base, const PredictionDist& reference,
                             std::span<const double> offset) {
    return grad_wrt_representation(model, 0, base, reference, offset);
}

enum class PairKind { LL, LU, UU };

/// One MixUp example: the mixed tap-layer representation and target.
/// When the tap layer is interior, the raw inputs of the two partners (if
/// known) let the gradient reach the layers below the tap.
struct MixedExample {
    Vector mixed;
    PredictionDist target;
    double lambda = 1.0;
    PairKind kind = PairKind::LL;
    bool first_labeled = true;
    std::optional<Vector> first_input;
    std::optional<Vector> second_input;
};

struct TrainingBatch {
    std::vector<MixedExample> supervised;   // feeds the cross-entropy term
    std::vector<MixedExample> consistency;  // feeds the squared-distance term

    bool empty() const noexcept { return supervised.empty() && consistency.empty(); }
    std::size_t size() const noexcept { return supervised.size() + consistency.size(); }
};

struct TrainOptions {
    double learning_rate = 0.05;
    double lambda_u = 1.0;
};

/// Mean cross-entropy over the supervised set plus lambda_u times the mean
/// (class-averaged) squared distance over the consistency set.
double training_loss(const Classifier& model, const TrainingBatch& batch, double lambda_u);

/// Parameter gradients of training_loss, laid out like the model's layers.
std::vector<DenseLayer> training_gradients(const Classifier& model, const TrainingBatch& batch, double lambda_u,
                                           double* loss_out = nullptr);

/// One plain gradient-descent update. Returns the loss before the update.
double train_step(Classifier& model, const TrainingBatch& batch, const TrainOptions& options);

}  // namespace ideal::nn
