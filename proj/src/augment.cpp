#include "ideal/augment.hpp"

#include <algorithm>
#include <cmath>

namespace ideal::augment {

std::string to_string(TransformKind kind) {
    switch (kind) {
        case TransformKind::roll: return "roll";
        case TransformKind::block_sign_flip: return "flip";
        case TransformKind::jitter: return "jitter";
    }
    return "unknown";
}

TransformKind transform_from_string(const std::string& name) {
    if (name == "roll") return TransformKind::roll;
    if (name == "flip") return TransformKind::block_sign_flip;
    if (name == "jitter") return TransformKind::jitter;
    throw UsageError("unknown transform '" + name + "'");
}

TransformFamily default_family() {
    return {TransformKind::roll, TransformKind::block_sign_flip, TransformKind::jitter};
}

namespace {

double sup_distance(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// Adds uniform noise rescaled so its sup-norm lies in (1.1 delta, 2 delta].
double add_jitter(Vector& v, double delta, Rng& rng) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Vector noise(v.size());
    double peak = 0.0;
    while (peak == 0.0) {
        for (double& n : noise) n = unit(rng);
        for (double n : noise) peak = std::max(peak, std::abs(n));
    }
    const double magnitude = delta * std::uniform_real_distribution<double>(1.1, 2.0)(rng);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += noise[i] * magnitude / peak;
    return magnitude;
}

}  // namespace

CoarseAugmentSet coarse_augment(SampleId id, std::span<const double> x, std::size_t k, double delta, Rng& rng,
                                const TransformFamily& family) {
    if (k == 0) throw UsageError("coarse_augment: k must be at least 1");
    if (!(delta > 0.0)) throw UsageError("coarse_augment: delta must be positive");
    if (x.empty()) throw ShapeError("coarse_augment: empty feature vector");
    if (family.empty()) throw UsageError("coarse_augment: empty transform family");

    const std::size_t d = x.size();
    CoarseAugmentSet set;
    set.source_id = id;
    set.variants.reserve(k);
    set.transforms.reserve(k);
    std::uniform_int_distribution<std::size_t> pick(0, family.size() - 1);

    for (std::size_t j = 0; j < k; ++j) {
        TransformDescriptor desc;
        desc.kind = family[pick(rng)];
        if (d == 1 && desc.kind == TransformKind::roll) desc.kind = TransformKind::jitter;
        Vector v(x.begin(), x.end());
        switch (desc.kind) {
            case TransformKind::roll: {
                desc.shift = std::uniform_int_distribution<std::size_t>(1, d - 1)(rng);
                std::rotate(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(d - desc.shift), v.end());
                break;
            }
            case TransformKind::block_sign_flip: {
                desc.block_length = std::uniform_int_distribution<std::size_t>(1, std::max<std::size_t>(1, d / 2))(rng);
                desc.block_begin = std::uniform_int_distribution<std::size_t>(0, d - desc.block_length)(rng);
                for (std::size_t i = desc.block_begin; i < desc.block_begin + desc.block_length; ++i)
                    v[i] = 2.0 * kFlipCentre - v[i];
                break;
            }
            case TransformKind::jitter: break;
        }
        // Too small to be perceivable: fall back to plain jitter on the
        // original, since noise added on top could cancel the transform.
        if (sup_distance(v, x) <= delta) {
            desc = TransformDescriptor{};
            desc.kind = TransformKind::jitter;
            v.assign(x.begin(), x.end());
            desc.jitter_magnitude = add_jitter(v, delta, rng);
        }
        set.variants.push_back(std::move(v));
        set.transforms.push_back(desc);
    }
    return set;
}

Perturbation vat_perturbation(const nn::Classifier& model, std::span<const double> x_bar, const PredictionDist& y_bar,
                              double epsilon, double xi, Rng& rng) {
    if (!(epsilon > 0.0)) throw UsageError("vat_perturbation: epsilon must be positive");
    if (!(xi > 0.0)) throw UsageError("vat_perturbation: xi must be positive");
    if (y_bar.size() != model.class_count()) throw ShapeError("vat_perturbation: reference has wrong class count");

    std::normal_distribution<double> normal(0.0, 1.0);
    Vector probe(x_bar.size());
    double probe_norm = 0.0;
    while (probe_norm == 0.0) {
        for (double& v : probe) v = normal(rng);
        probe_norm = l2_norm(probe);
    }
    for (double& v : probe) v /= probe_norm;

    Vector offset(probe.size());
    for (std::size_t i = 0; i < probe.size(); ++i) offset[i] = xi * probe[i];
    Vector grad = nn::grad_wrt_representation(model, model.tap_layer(), x_bar, y_bar, offset);
    const double grad_norm = l2_norm(grad);

    Perturbation p;
    p.epsilon = epsilon;
    if (!(grad_norm >= kDegenerateGradient)) {
        p.degenerate = true;
        p.r_adv = std::move(probe);
        for (double& v : p.r_adv) v *= epsilon;
        return p;
    }
    for (double& g : grad) g *= epsilon / grad_norm;
    p.r_adv = std::move(grad);
    return p;
}

std::vector<Vector> fine_augment_set(const nn::Classifier& model, const CoarseAugmentSet& coarse, double epsilon,
                                     double xi, Rng& rng, std::size_t* degenerate_count) {
    std::vector<Vector> out;
    out.reserve(coarse.variants.size());
    const std::size_t tap = model.tap_layer();
    for (const auto& variant : coarse.variants) {
        Vector x_bar = model.representation(variant);
        const PredictionDist y_bar = model.predict_from(tap, x_bar);
        const Perturbation p = vat_perturbation(model, x_bar, y_bar, epsilon, xi, rng);
        if (p.degenerate && degenerate_count) ++*degenerate_count;
        for (std::size_t i = 0; i < x_bar.size(); ++i) x_bar[i] += p.r_adv[i];
        out.push_back(std::move(x_bar));
    }
    return out;
}

}  // namespace ideal::augment
