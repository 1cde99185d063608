#include "ideal/nn.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ideal::nn {

Classifier::Classifier(std::vector<DenseLayer> layers, std::size_t tap_layer)
    : layers_(std::move(layers)), tap_(tap_layer) {
    if (layers_.empty()) throw ShapeError("classifier needs at least one layer");
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& layer = layers_[l];
        if (layer.inputs == 0 || layer.outputs == 0) throw ShapeError("layer " + std::to_string(l) + " has zero width");
        if (layer.weights.size() != layer.inputs * layer.outputs || layer.bias.size() != layer.outputs)
            throw ShapeError("layer " + std::to_string(l) + " parameter sizes do not match its dimensions");
        if (l + 1 < layers_.size() && layer.outputs != layers_[l + 1].inputs)
            throw ShapeError("layer " + std::to_string(l) + " output width does not match the next layer");
    }
    if (tap_ >= layers_.size()) throw ShapeError("tap layer index out of range");
}

namespace {
std::vector<DenseLayer> make_layers(std::size_t input_dim, std::span<const std::size_t> hidden, std::size_t classes) {
    std::vector<DenseLayer> layers;
    std::size_t in = input_dim;
    for (std::size_t width : hidden) {
        layers.emplace_back(in, width);
        in = width;
    }
    layers.emplace_back(in, classes);
    return layers;
}
}  // namespace

Classifier Classifier::random(std::size_t input_dim, std::span<const std::size_t> hidden, std::size_t classes,
                              std::size_t tap_layer, Rng& rng) {
    auto layers = make_layers(input_dim, hidden, classes);
    for (std::size_t l = 0; l < layers.size(); ++l) {
        auto& layer = layers[l];
        const double gain = (l + 1 < layers.size()) ? 2.0 : 1.0;
        std::normal_distribution<double> init(0.0, std::sqrt(gain / static_cast<double>(layer.inputs)));
        for (double& w : layer.weights) w = init(rng);
    }
    return Classifier(std::move(layers), tap_layer);
}

Classifier Classifier::zeros(std::size_t input_dim, std::span<const std::size_t> hidden, std::size_t classes,
                             std::size_t tap_layer) {
    return Classifier(make_layers(input_dim, hidden, classes), tap_layer);
}

std::size_t Classifier::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.weights.size() + l.bias.size();
    return n;
}

namespace {

// Applies layer `l` to `in`, writing into `out`; rectifies unless it is the
// output layer.
void apply_layer(const DenseLayer& layer, bool rectify, std::span<const double> in, Vector& out) {
    out.assign(layer.bias.begin(), layer.bias.end());
    const double* w = layer.weights.data();
    for (std::size_t o = 0; o < layer.outputs; ++o, w += layer.inputs) {
        double acc = out[o];
        for (std::size_t i = 0; i < layer.inputs; ++i) acc += w[i] * in[i];
        out[o] = rectify ? std::max(acc, 0.0) : acc;
    }
}

// Activations entering layers [from, to]; entry k holds the input of layer
// from + k. When to == layer_count the last entry holds the logits.
struct Trace {
    std::size_t from = 0;
    std::vector<Vector> values;
    const Vector& at(std::size_t layer) const { return values[layer - from]; }
};

Trace run(const Classifier& model, std::size_t from, std::size_t to, std::span<const double> h) {
    Trace t;
    t.from = from;
    t.values.reserve(to - from + 1);
    t.values.emplace_back(h.begin(), h.end());
    const auto& layers = model.layers();
    for (std::size_t l = from; l < to; ++l) {
        Vector out;
        apply_layer(layers[l], l + 1 < layers.size(), t.values.back(), out);
        t.values.push_back(std::move(out));
    }
    return t;
}

// Propagates `grad` (w.r.t. the activation entering layer `to`) back to the
// activation entering layer `from`. Parameter gradients are accumulated into
// `grads` when given.
Vector backward(const Classifier& model, const Trace& trace, std::size_t from, std::size_t to, Vector grad,
                std::vector<DenseLayer>* grads) {
    const auto& layers = model.layers();
    for (std::size_t l = to; l-- > from;) {
        const auto& layer = layers[l];
        if (l + 1 < layers.size()) {
            const Vector& out = trace.at(l + 1);
            for (std::size_t o = 0; o < layer.outputs; ++o)
                if (out[o] <= 0.0) grad[o] = 0.0;
        }
        const Vector& in = trace.at(l);
        if (grads) {
            auto& g = (*grads)[l];
            for (std::size_t o = 0; o < layer.outputs; ++o) {
                const double go = grad[o];
                if (go == 0.0) continue;
                double* row = g.weights.data() + o * layer.inputs;
                for (std::size_t i = 0; i < layer.inputs; ++i) row[i] += go * in[i];
                g.bias[o] += go;
            }
        }
        Vector next(layer.inputs, 0.0);
        const double* w = layer.weights.data();
        for (std::size_t o = 0; o < layer.outputs; ++o, w += layer.inputs) {
            const double go = grad[o];
            if (go == 0.0) continue;
            for (std::size_t i = 0; i < layer.inputs; ++i) next[i] += go * w[i];
        }
        grad = std::move(next);
    }
    return grad;
}

void check_width(const Classifier& model, std::size_t layer, std::size_t size, const char* what) {
    if (layer >= model.layer_count()) throw ShapeError(std::string(what) + ": layer index out of range");
    if (size != model.width_at(layer)) {
        std::ostringstream msg;
        msg << what << ": expected dimension " << model.width_at(layer) << ", got " << size;
        throw ShapeError(msg.str());
    }
}

}  // namespace

Vector Classifier::activation_at(std::size_t layer, std::span<const double> x) const {
    check_width(*this, 0, x.size(), "input");
    if (layer > layers_.size()) throw ShapeError("activation layer out of range");
    Vector h(x.begin(), x.end());
    Vector out;
    for (std::size_t l = 0; l < layer; ++l) {
        apply_layer(layers_[l], l + 1 < layers_.size(), h, out);
        std::swap(h, out);
    }
    return h;
}

Vector Classifier::logits_from(std::size_t layer, std::span<const double> h) const {
    check_width(*this, layer, h.size(), "representation");
    Vector cur(h.begin(), h.end());
    Vector out;
    for (std::size_t l = layer; l < layers_.size(); ++l) {
        apply_layer(layers_[l], l + 1 < layers_.size(), cur, out);
        std::swap(cur, out);
    }
    return cur;
}

PredictionDist Classifier::predict_from(std::size_t layer, std::span<const double> h) const {
    return PredictionDist::trusted(softmax(logits_from(layer, h)));
}

ForwardResult forward(const Classifier& model, std::span<const double> x) {
    check_width(model, 0, x.size(), "input");
    Vector hidden = model.representation(x);
    PredictionDist probs = model.predict_from(model.tap_layer(), hidden);
    return {std::move(hidden), std::move(probs)};
}

Vector softmax(std::span<const double> logits) {
    const double peak = *std::max_element(logits.begin(), logits.end());
    Vector p(logits.size());
    double sum = 0.0;
    for (std::size_t c = 0; c < logits.size(); ++c) {
        p[c] = std::exp(logits[c] - peak);
        sum += p[c];
    }
    for (double& v : p) v /= sum;
    return p;
}

Vector log_softmax(std::span<const double> logits) {
    const double peak = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double z : logits) sum += std::exp(z - peak);
    const double log_norm = peak + std::log(sum);
    Vector out(logits.size());
    for (std::size_t c = 0; c < logits.size(); ++c) out[c] = logits[c] - log_norm;
    return out;
}

double kl_divergence(const PredictionDist& p, const PredictionDist& q) {
    if (p.size() != q.size()) throw ShapeError("kl_divergence: distributions have different lengths");
    double kl = 0.0;
    for (std::size_t c = 0; c < p.size(); ++c) {
        if (p[c] <= 0.0) continue;
        kl += p[c] * std::log(p[c] / std::max(q[c], kProbabilityFloor));
    }
    return std::max(kl, 0.0);
}

Vector grad_wrt_representation(const Classifier& model, std::size_t layer, std::span<const double> base,
                               const PredictionDist& reference, std::span<const double> offset) {
    check_width(model, layer, base.size(), "base point");
    if (offset.size() != base.size()) throw ShapeError("offset dimension does not match base point");
    if (reference.size() != model.class_count()) throw ShapeError("reference distribution has wrong class count");

    Vector point(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) point[i] = base[i] + offset[i];
    const Trace trace = run(model, layer, model.layer_count(), point);
    const Vector q = softmax(trace.values.back());
    // d/dz of -sum_c r_c log softmax(z)_c; the entropy term of KL is constant.
    Vector grad(q.size());
    for (std::size_t c = 0; c < q.size(); ++c) grad[c] = q[c] - reference[c];
    return backward(model, trace, layer, model.layer_count(), std::move(grad), nullptr);
}

namespace {

struct ExampleTerm {
    double loss = 0.0;
    Vector dlogits;
};

ExampleTerm cross_entropy_term(std::span<const double> logits, const PredictionDist& target) {
    const Vector logp = log_softmax(logits);
    ExampleTerm t;
    t.dlogits.resize(logits.size());
    double target_mass = 0.0;
    for (std::size_t c = 0; c < logits.size(); ++c) {
        t.loss -= target[c] * logp[c];
        target_mass += target[c];
    }
    for (std::size_t c = 0; c < logits.size(); ++c) t.dlogits[c] = std::exp(logp[c]) * target_mass - target[c];
    return t;
}

ExampleTerm squared_distance_term(std::span<const double> logits, const PredictionDist& target) {
    const Vector p = softmax(logits);
    const double inv_c = 1.0 / static_cast<double>(p.size());
    ExampleTerm t;
    Vector dp(p.size());
    double pg = 0.0;
    for (std::size_t c = 0; c < p.size(); ++c) {
        const double diff = p[c] - target[c];
        t.loss += diff * diff * inv_c;
        dp[c] = 2.0 * diff * inv_c;
        pg += p[c] * dp[c];
    }
    t.dlogits.resize(p.size());
    for (std::size_t c = 0; c < p.size(); ++c) t.dlogits[c] = p[c] * (dp[c] - pg);
    return t;
}

void check_example(const Classifier& model, const MixedExample& ex) {
    check_width(model, model.tap_layer(), ex.mixed.size(), "mixed example");
    if (ex.target.size() != model.class_count()) throw ShapeError("mixed target has wrong class count");
}

// Accumulates the gradient of `scale * term(example)` into grads; returns the
// unscaled term value.
template <typename Term>
double accumulate_example(const Classifier& model, const MixedExample& ex, double scale, Term term,
                          std::vector<DenseLayer>& grads) {
    check_example(model, ex);
    const std::size_t tap = model.tap_layer();
    const std::size_t depth = model.layer_count();
    const Trace upper = run(model, tap, depth, ex.mixed);
    ExampleTerm t = term(upper.values.back(), ex.target);
    for (double& g : t.dlogits) g *= scale;
    Vector g_mixed = backward(model, upper, tap, depth, std::move(t.dlogits), &grads);

    if (tap > 0) {
        const double weights[2] = {ex.lambda, 1.0 - ex.lambda};
        const std::optional<Vector>* sources[2] = {&ex.first_input, &ex.second_input};
        for (int s = 0; s < 2; ++s) {
            if (!sources[s]->has_value() || weights[s] == 0.0) continue;
            const Trace lower = run(model, 0, tap, **sources[s]);
            Vector g = g_mixed;
            for (double& v : g) v *= weights[s];
            backward(model, lower, 0, tap, std::move(g), &grads);
        }
    }
    return t.loss;
}

std::vector<DenseLayer> zero_like(const Classifier& model) {
    std::vector<DenseLayer> grads;
    grads.reserve(model.layer_count());
    for (const auto& l : model.layers()) grads.emplace_back(l.inputs, l.outputs);
    return grads;
}

}  // namespace

std::vector<DenseLayer> training_gradients(const Classifier& model, const TrainingBatch& batch, double lambda_u,
                                           double* loss_out) {
    if (batch.empty()) throw UsageError("training batch is empty");
    auto grads = zero_like(model);
    double sup = 0.0;
    double con = 0.0;
    if (!batch.supervised.empty()) {
        const double scale = 1.0 / static_cast<double>(batch.supervised.size());
        for (const auto& ex : batch.supervised) sup += accumulate_example(model, ex, scale, cross_entropy_term, grads);
        sup *= scale;
    }
    if (!batch.consistency.empty() && lambda_u != 0.0) {
        const double scale = lambda_u / static_cast<double>(batch.consistency.size());
        for (const auto& ex : batch.consistency)
            con += accumulate_example(model, ex, scale, squared_distance_term, grads);
        con /= static_cast<double>(batch.consistency.size());
    }
    const double loss = sup + lambda_u * con;
    if (!std::isfinite(loss)) {
        std::ostringstream msg;
        msg << "non-finite training loss (cross-entropy " << sup << ", consistency " << con << ", batch "
            << batch.supervised.size() << "+" << batch.consistency.size() << ")";
        throw NumericError(msg.str());
    }
    if (loss_out) *loss_out = loss;
    return grads;
}

double training_loss(const Classifier& model, const TrainingBatch& batch, double lambda_u) {
    if (batch.empty()) throw UsageError("training batch is empty");
    const std::size_t tap = model.tap_layer();
    double sup = 0.0;
    for (const auto& ex : batch.supervised) {
        check_example(model, ex);
        sup += cross_entropy_term(model.logits_from(tap, ex.mixed), ex.target).loss;
    }
    double con = 0.0;
    for (const auto& ex : batch.consistency) {
        check_example(model, ex);
        con += squared_distance_term(model.logits_from(tap, ex.mixed), ex.target).loss;
    }
    if (!batch.supervised.empty()) sup /= static_cast<double>(batch.supervised.size());
    if (!batch.consistency.empty()) con /= static_cast<double>(batch.consistency.size());
    return sup + lambda_u * con;
}

double train_step(Classifier& model, const TrainingBatch& batch, const TrainOptions& options) {
    if (!(options.learning_rate >= 0.0)) throw UsageError("learning rate must be nonnegative");
    double loss = 0.0;
    const auto grads = training_gradients(model, batch, options.lambda_u, &loss);
    if (options.learning_rate == 0.0) return loss;
    auto& layers = model.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
        for (std::size_t i = 0; i < layers[l].weights.size(); ++i)
            layers[l].weights[i] -= options.learning_rate * grads[l].weights[i];
        for (std::size_t o = 0; o < layers[l].bias.size(); ++o)
            layers[l].bias[o] -= options.learning_rate * grads[l].bias[o];
    }
    return loss;
}

}  // namespace ideal::nn
