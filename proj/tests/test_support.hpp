#pragma once

// Test-only oracles and generators. Nothing here calls into the backward
// passes under test; gradients are recomputed by finite differences or by a
// separate straightforward backprop.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "ideal/common.hpp"
#include "ideal/nn.hpp"
#include "ideal/selector.hpp"

namespace ideal::testing {

inline PredictionDist random_simplex(std::size_t classes, Rng& rng) {
    std::exponential_distribution<double> expo(1.0);
    Vector p(classes);
    double sum = 0.0;
    for (double& v : p) {
        v = expo(rng) + 1e-9;
        sum += v;
    }
    for (double& v : p) v /= sum;
    return PredictionDist(std::move(p));
}

inline Vector random_vector(std::size_t dim, Rng& rng, double lo = 0.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Vector v(dim);
    for (double& x : v) x = u(rng);
    return v;
}

inline double relative_error(double a, double b, double floor = 1e-8) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Pre-activations of every hidden layer for a raw input (naive loops).
inline std::vector<Vector> hidden_preactivations(const nn::Classifier& model, std::size_t from, const Vector& h0) {
    std::vector<Vector> out;
    Vector a = h0;
    const auto& layers = model.layers();
    for (std::size_t l = from; l + 1 < layers.size(); ++l) {
        Vector z(layers[l].outputs);
        for (std::size_t o = 0; o < z.size(); ++o) {
            z[o] = layers[l].bias[o];
            for (std::size_t i = 0; i < layers[l].inputs; ++i) z[o] += layers[l].w(o, i) * a[i];
        }
        out.push_back(z);
        for (double& v : z) v = std::max(v, 0.0);
        a = z;
    }
    return out;
}

/// Smallest |pre-activation| over the hidden units.
inline double kink_margin(const nn::Classifier& model, std::size_t from, const Vector& h0) {
    double m = INFINITY;
    for (const auto& z : hidden_preactivations(model, from, h0))
        for (double v : z) m = std::min(m, std::abs(v));
    return m;
}

struct GradientInstance {
    nn::Classifier model;
    Vector base;
    Vector offset;
    PredictionDist reference;
};

/// Random tiny model and point, rejected when base + offset sits within 1e-3
/// of a rectifier kink (finite differences are meaningless across a kink).
inline std::optional<GradientInstance> random_gradient_instance(std::size_t in, std::size_t hidden,
                                                               std::size_t classes, Rng& rng) {
    const std::size_t widths[] = {hidden};
    auto model = nn::Classifier::random(in, widths, classes, 0, rng);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (auto& layer : model.layers())
        for (double& b : layer.bias) b = 0.3 * normal(rng);
    Vector base(in);
    Vector offset(in);
    for (double& v : base) v = normal(rng);
    for (double& v : offset) v = 0.1 * normal(rng);
    Vector point(in);
    for (std::size_t i = 0; i < in; ++i) point[i] = base[i] + offset[i];
    if (kink_margin(model, 0, point) < 1e-3) return std::nullopt;
    return GradientInstance{std::move(model), std::move(base), std::move(offset), random_simplex(classes, rng)};
}

inline double kl_at(const nn::Classifier& model, std::size_t layer, const Vector& base, const PredictionDist& ref,
                    const Vector& offset) {
    Vector point(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) point[i] = base[i] + offset[i];
    return nn::kl_divergence(ref, model.predict_from(layer, point));
}

inline Vector finite_difference_kl_gradient(const nn::Classifier& model, std::size_t layer, const Vector& base,
                                            const PredictionDist& ref, const Vector& offset, double h) {
    Vector g(offset.size());
    for (std::size_t i = 0; i < offset.size(); ++i) {
        Vector plus = offset;
        Vector minus = offset;
        plus[i] += h;
        minus[i] -= h;
        g[i] = (kl_at(model, layer, base, ref, plus) - kl_at(model, layer, base, ref, minus)) / (2.0 * h);
    }
    return g;
}

inline std::vector<nn::DenseLayer> finite_difference_param_gradient(
    const nn::Classifier& model, const std::function<double(const nn::Classifier&)>& loss, double h) {
    std::vector<nn::DenseLayer> grads;
    for (const auto& l : model.layers()) grads.emplace_back(l.inputs, l.outputs);
    nn::Classifier probe = model;
    for (std::size_t l = 0; l < model.layer_count(); ++l) {
        for (std::size_t i = 0; i < model.layers()[l].weights.size(); ++i) {
            double& w = probe.layers()[l].weights[i];
            const double saved = w;
            w = saved + h;
            const double up = loss(probe);
            w = saved - h;
            const double down = loss(probe);
            w = saved;
            grads[l].weights[i] = (up - down) / (2.0 * h);
        }
        for (std::size_t i = 0; i < model.layers()[l].bias.size(); ++i) {
            double& b = probe.layers()[l].bias[i];
            const double saved = b;
            b = saved + h;
            const double up = loss(probe);
            b = saved - h;
            const double down = loss(probe);
            b = saved;
            grads[l].bias[i] = (up - down) / (2.0 * h);
        }
    }
    return grads;
}

/// Plain supervised SGD step on mean cross-entropy with one-hot targets,
/// written from scratch: explicit pre-activation caches and textbook backprop.
inline std::vector<nn::DenseLayer> supervised_step_oracle(const nn::Classifier& model,
                                                          const std::vector<std::pair<Vector, std::size_t>>& data,
                                                          double lr) {
    const auto& layers = model.layers();
    const std::size_t L = layers.size();
    std::vector<nn::DenseLayer> grad;
    for (const auto& l : layers) grad.emplace_back(l.inputs, l.outputs);
    const double n = static_cast<double>(data.size());

    for (const auto& [x, cls] : data) {
        std::vector<Vector> a{x};
        std::vector<Vector> z;
        for (std::size_t l = 0; l < L; ++l) {
            Vector zl(layers[l].outputs);
            for (std::size_t o = 0; o < zl.size(); ++o) {
                zl[o] = layers[l].bias[o];
                for (std::size_t i = 0; i < layers[l].inputs; ++i) zl[o] += layers[l].w(o, i) * a[l][i];
            }
            z.push_back(zl);
            Vector al = zl;
            if (l + 1 < L)
                for (double& v : al) v = v > 0.0 ? v : 0.0;
            a.push_back(al);
        }
        Vector logits = z.back();
        double mx = *std::max_element(logits.begin(), logits.end());
        double s = 0.0;
        for (double& v : logits) {
            v = std::exp(v - mx);
            s += v;
        }
        Vector delta(logits.size());
        for (std::size_t c = 0; c < delta.size(); ++c) delta[c] = (logits[c] / s - (c == cls ? 1.0 : 0.0)) / n;
        for (std::size_t l = L; l-- > 0;) {
            for (std::size_t o = 0; o < layers[l].outputs; ++o) {
                grad[l].bias[o] += delta[o];
                for (std::size_t i = 0; i < layers[l].inputs; ++i) grad[l].w(o, i) += delta[o] * a[l][i];
            }
            if (l == 0) break;
            Vector prev(layers[l].inputs, 0.0);
            for (std::size_t i = 0; i < layers[l].inputs; ++i) {
                for (std::size_t o = 0; o < layers[l].outputs; ++o) prev[i] += layers[l].w(o, i) * delta[o];
                if (z[l - 1][i] <= 0.0) prev[i] = 0.0;
            }
            delta = prev;
        }
    }
    std::vector<nn::DenseLayer> updated = layers;
    for (std::size_t l = 0; l < L; ++l) {
        for (std::size_t i = 0; i < updated[l].weights.size(); ++i) updated[l].weights[i] -= lr * grad[l].weights[i];
        for (std::size_t i = 0; i < updated[l].bias.size(); ++i) updated[l].bias[i] -= lr * grad[l].bias[i];
    }
    return updated;
}

/// Largest KL(reference || p(x + r)) over `points` directions evenly spaced on
/// the radius-epsilon circle (2-D representations only).
inline double sphere_grid_max_kl(const nn::Classifier& model, const Vector& x, const PredictionDist& ref,
                                 double epsilon, int points = 360) {
    double best = 0.0;
    const std::size_t tap = model.tap_layer();
    for (int k = 0; k < points; ++k) {
        const double theta = 2.0 * M_PI * k / points;
        const Vector r{epsilon * std::cos(theta), epsilon * std::sin(theta)};
        best = std::max(best, kl_at(model, tap, x, ref, r));
    }
    return best;
}

/// Two-stage selection by full sorts and pairwise cosine similarities.
inline std::vector<SampleId> brute_force_select(std::vector<selector::ScoreRecord> records, std::size_t m_cand,
                                                std::size_t budget, bool use_density = true) {
    std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
        return a.in_total != b.in_total ? a.in_total > b.in_total : a.sample_id < b.sample_id;
    });
    records.resize(m_cand);
    std::vector<std::pair<double, SampleId>> scored;
    for (const auto& r : records) {
        double factor = 1.0;
        if (use_density) {
            double sum = 0.0;
            for (const auto& other : records) {
                double uv = 0.0, uu = 0.0, vv = 0.0;
                for (std::size_t i = 0; i < r.representation.size(); ++i) {
                    uv += r.representation[i] * other.representation[i];
                    uu += r.representation[i] * r.representation[i];
                    vv += other.representation[i] * other.representation[i];
                }
                sum += uv / (std::sqrt(uu) * std::sqrt(vv));
            }
            factor = sum / static_cast<double>(records.size());
        }
        scored.emplace_back(r.entropy * factor, r.sample_id);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    std::vector<SampleId> out;
    for (std::size_t k = 0; k < budget; ++k) out.push_back(scored[k].second);
    return out;
}

/// Random pool of score records with raw inconsistencies, entropies and
/// nonnegative representations. Percentile fields are left unset.
inline std::vector<selector::ScoreRecord> random_records(std::size_t n, std::size_t dim, std::size_t classes,
                                                         Rng& rng) {
    std::vector<selector::ScoreRecord> records(n);
    std::vector<SampleId> ids(n);
    std::iota(ids.begin(), ids.end(), SampleId{1000});
    std::shuffle(ids.begin(), ids.end(), rng);
    std::exponential_distribution<double> expo(1.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto& r = records[i];
        r.sample_id = ids[i];
        r.in_coa = expo(rng);
        r.in_fin = expo(rng);
        PredictionDist p = random_simplex(classes, rng);
        double h = 0.0;
        for (double v : p.values()) h -= v > 0 ? v * std::log(v) : 0.0;
        r.entropy = h;
        r.representation = random_vector(dim, rng, 0.0, 1.0);
    }
    return records;
}

}  // namespace ideal::testing
