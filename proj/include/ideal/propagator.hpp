#pragma once

// Semi-supervised label propagation: guessed labels shared across a sample's
// augmentations, MixUp over labeled/unlabeled/augmented sources, and the
// routing of mixed examples onto the two loss terms.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ideal/common.hpp"
#include "ideal/nn.hpp"

namespace ideal::propagator {

struct GuessedLabel {
    SampleId sample_id = 0;
    PredictionDist distribution;
    Vector weights;  // (w_u, w_1, ..., w_K)
};

/// Weighted average of the original prediction and its K augmented
/// predictions. preds[0] is the original.
GuessedLabel guess_label(SampleId id, std::span<const PredictionDist> preds, std::span<const double> weights);

/// max(raw, 1 - raw).
double fold_lambda(double raw);

/// Draws from Beta(alpha, alpha) and folds onto [0.5, 1].
double sample_lambda(double alpha, Rng& rng);

nn::MixedExample mix_pair(std::span<const double> h1, const PredictionDist& y1, std::span<const double> h2,
                          const PredictionDist& y2, double lambda);

/// One entry of the pre-mix concatenation. `representation` is the tap-layer
/// vector that gets mixed; `input` is the raw feature vector when known.
struct BatchItem {
    Vector representation;
    PredictionDist target;
    std::optional<Vector> input;
};

/// Shuffles the concatenation of the three sources into mix partners, mixes
/// element i with partner perm[i] under a fresh lambda, and routes the result
/// by whether its first element is labeled.
nn::TrainingBatch build_training_batch(std::span<const BatchItem> labeled, std::span<const BatchItem> unlabeled,
                                       std::span<const BatchItem> augmented, double alpha, Rng& rng);

}  // namespace ideal::propagator
