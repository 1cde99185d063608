#include "ideal/propagator.hpp"

#include <algorithm>
#include <numeric>

namespace ideal::propagator {

GuessedLabel guess_label(SampleId id, std::span<const PredictionDist> preds, std::span<const double> weights) {
    if (preds.empty()) throw UsageError("guess_label: no predictions");
    if (preds.size() != weights.size()) throw ShapeError("guess_label: one weight per prediction required");
    const std::size_t classes = preds.front().size();
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw UsageError("guess_label: weights must be nonnegative");
        total += w;
    }
    if (total == 0.0) throw UsageError("guess_label: all weights are zero");

    Vector avg(classes, 0.0);
    for (std::size_t k = 0; k < preds.size(); ++k) {
        if (preds[k].size() != classes) throw ShapeError("guess_label: predictions have different class counts");
        for (std::size_t c = 0; c < classes; ++c) avg[c] += weights[k] * preds[k][c];
    }
    for (double& v : avg) v /= total;
    return {id, PredictionDist::trusted(std::move(avg)), Vector(weights.begin(), weights.end())};
}

double fold_lambda(double raw) { return std::max(raw, 1.0 - raw); }

double sample_lambda(double alpha, Rng& rng) {
    if (!(alpha > 0.0)) throw UsageError("sample_lambda: alpha must be positive");
    std::gamma_distribution<double> gamma(alpha, 1.0);
    double a = 0.0;
    double b = 0.0;
    // Both draws can underflow to zero for tiny alpha; redraw.
    while (a + b == 0.0) {
        a = gamma(rng);
        b = gamma(rng);
    }
    return fold_lambda(a / (a + b));
}

nn::MixedExample mix_pair(std::span<const double> h1, const PredictionDist& y1, std::span<const double> h2,
                          const PredictionDist& y2, double lambda) {
    if (h1.size() != h2.size()) throw ShapeError("mix_pair: representation dimensions differ");
    if (y1.size() != y2.size()) throw ShapeError("mix_pair: target class counts differ");
    if (!(lambda >= 0.5 && lambda <= 1.0)) throw UsageError("mix_pair: lambda must lie in [0.5, 1]");
    nn::MixedExample ex;
    ex.lambda = lambda;
    ex.mixed.resize(h1.size());
    for (std::size_t i = 0; i < h1.size(); ++i) ex.mixed[i] = lambda * h1[i] + (1.0 - lambda) * h2[i];
    Vector y(y1.size());
    for (std::size_t c = 0; c < y.size(); ++c) y[c] = lambda * y1[c] + (1.0 - lambda) * y2[c];
    ex.target = PredictionDist::trusted(std::move(y));
    return ex;
}

nn::TrainingBatch build_training_batch(std::span<const BatchItem> labeled, std::span<const BatchItem> unlabeled,
                                       std::span<const BatchItem> augmented, double alpha, Rng& rng) {
    if (labeled.empty()) throw UsageError("build_training_batch: labeled batch is empty");
    std::vector<const BatchItem*> all;
    all.reserve(labeled.size() + unlabeled.size() + augmented.size());
    for (const auto& it : labeled) all.push_back(&it);
    for (const auto& it : unlabeled) all.push_back(&it);
    for (const auto& it : augmented) all.push_back(&it);
    const std::size_t n_labeled = labeled.size();

    std::vector<std::size_t> partner(all.size());
    std::iota(partner.begin(), partner.end(), std::size_t{0});
    std::shuffle(partner.begin(), partner.end(), rng);

    nn::TrainingBatch batch;
    for (std::size_t i = 0; i < all.size(); ++i) {
        const std::size_t j = partner[i];
        const BatchItem& a = *all[i];
        const BatchItem& b = *all[j];
        const double lambda = sample_lambda(alpha, rng);
        nn::MixedExample ex = mix_pair(a.representation, a.target, b.representation, b.target, lambda);
        const bool a_labeled = i < n_labeled;
        const bool b_labeled = j < n_labeled;
        ex.first_labeled = a_labeled;
        ex.kind = (a_labeled && b_labeled) ? nn::PairKind::LL
                  : (a_labeled || b_labeled) ? nn::PairKind::LU
                                             : nn::PairKind::UU;
        ex.first_input = a.input;
        ex.second_input = b.input;
        (a_labeled ? batch.supervised : batch.consistency).push_back(std::move(ex));
    }
    return batch;
}

}  // namespace ideal::propagator
