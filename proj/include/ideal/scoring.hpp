#pragma once

// Per-sample inconsistency scoring over the unlabeled pool.
//
// score_pool fans the pool out over OpenMP threads; score_pool_serial is the
// single-threaded reference kept for testing and benchmarking. Each sample
// draws from its own stream derived from (stream_seed, sample id), so both
// produce bit-identical records regardless of thread count.

#include <cstddef>
#include <span>
#include <vector>

#include "ideal/augment.hpp"
#include "ideal/common.hpp"
#include "ideal/dataset.hpp"
#include "ideal/nn.hpp"
#include "ideal/selector.hpp"

namespace ideal::scoring {

struct ScoringParams {
    std::size_t k_aug = 5;
    double delta = 0.05;
    double epsilon = 0.1;
    double xi = 0.1;
    bool coarse = true;  // compute In_coa
    bool fine = true;    // compute In_fin
    augment::TransformFamily family = augment::default_family();
    std::uint64_t stream_seed = 0;
};

struct ScoredPool {
    std::vector<selector::ScoreRecord> records;  // same order as the requested rows
    std::size_t degenerate_perturbations = 0;
};

/// Scores one sample: prediction on the original, coarse variants and their
/// adversarially perturbed representations. Fills in_coa, in_fin, entropy and
/// representation; the percentile fields are left for fuse_inconsistency.
selector::ScoreRecord score_sample(const nn::Classifier& model, SampleId id, std::span<const double> x,
                                   const ScoringParams& params, std::size_t* degenerate = nullptr);

ScoredPool score_pool(const nn::Classifier& model, const FeatureMatrix& features, std::span<const std::size_t> rows,
                      std::span<const SampleId> ids, const ScoringParams& params);

ScoredPool score_pool_serial(const nn::Classifier& model, const FeatureMatrix& features,
                             std::span<const std::size_t> rows, std::span<const SampleId> ids,
                             const ScoringParams& params);

/// Prediction entropy and representation only (entropy and core-set
/// baselines). Parallel.
ScoredPool predict_pool(const nn::Classifier& model, const FeatureMatrix& features, std::span<const std::size_t> rows,
                        std::span<const SampleId> ids);

/// Number of OpenMP threads available (1 when built without OpenMP).
int max_threads();

}  // namespace ideal::scoring
