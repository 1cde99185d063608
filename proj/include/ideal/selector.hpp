#pragma once

// Inconsistency ranking and density-aware entropy re-ranking.

#include <cstddef>
#include <span>
#include <vector>

#include "ideal/common.hpp"

namespace ideal::selector {

struct ScoreRecord {
    SampleId sample_id = 0;
    double in_coa = 0.0;
    double in_fin = 0.0;
    double phi_coa = 0.0;
    double phi_fin = 0.0;
    double in_total = 0.0;
    double entropy = 0.0;
    double density_entropy = 0.0;
    Vector representation;  // tap-layer activation of the original sample
};

/// Sum over classes of the population variance of the per-class
/// probabilities across the original and its augmented predictions.
double coarse_inconsistency(std::span<const PredictionDist> preds);

/// Sum over k of KL(coarse_k || perturbed_k).
double fine_inconsistency(std::span<const PredictionDist> coarse, std::span<const PredictionDist> perturbed);

/// Fraction of the population strictly smaller than value. O(N).
double percentile(double value, std::span<const double> population);

/// percentile() for every member of the population at once. O(N log N).
std::vector<double> percentiles(std::span<const double> population);

double total_inconsistency(double phi_coa, double phi_fin, double gamma);

/// Shannon entropy in nats.
double entropy(const PredictionDist& pred);

double cosine_similarity(std::span<const double> u, std::span<const double> v);

/// Vectors at or below this norm have no direction and are left out of the
/// similarity average.
inline constexpr double kMinNorm = 1e-12;

/// entropy(target) times the mean cosine similarity between the target and
/// every candidate (the target itself included). Degenerate candidates are
/// dropped from the mean; a degenerate target scores 0.
double density_aware_entropy(std::span<const double> target, double target_entropy,
                             std::span<const Vector> candidates);

/// Fills phi_coa, phi_fin and in_total from the raw in_coa / in_fin values.
void fuse_inconsistency(std::span<ScoreRecord> records, double gamma);

struct SelectOptions {
    bool use_density = true;  // false: re-rank by plain entropy
};

struct Selection {
    std::vector<SampleId> ids;             // B ids, best first
    std::vector<SampleId> candidates;      // the M_cand set, best first
    std::size_t degenerate_representations = 0;
};

/// Top m_cand records by in_total, then top budget of those by
/// density-aware entropy computed over the candidate set. Ties go to the
/// smaller id. density_entropy of the candidate records is written back.
Selection select(std::span<ScoreRecord> records, std::size_t m_cand, std::size_t budget,
                 const SelectOptions& options = {});

/// Mean cosine similarity of each vector to the set (itself included), in
/// O(M d). Degenerate vectors get factor 0 and are excluded from the mean.
std::vector<double> density_factors(std::span<const Vector* const> reps, std::size_t* degenerate = nullptr);

}  // namespace ideal::selector
