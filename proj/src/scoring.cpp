#include "ideal/scoring.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ideal::scoring {

selector::ScoreRecord score_sample(const nn::Classifier& model, SampleId id, std::span<const double> x,
                                   const ScoringParams& params, std::size_t* degenerate) {
    Rng rng = make_rng(params.stream_seed, id);
    const std::size_t tap = model.tap_layer();

    selector::ScoreRecord rec;
    rec.sample_id = id;
    rec.representation = model.representation(x);
    const PredictionDist original = model.predict_from(tap, rec.representation);
    rec.entropy = selector::entropy(original);
    if (!params.coarse && !params.fine) return rec;

    const auto coarse = augment::coarse_augment(id, x, params.k_aug, params.delta, rng, params.family);
    std::vector<PredictionDist> preds;
    preds.reserve(params.k_aug + 1);
    preds.push_back(original);
    std::vector<Vector> coarse_reps;
    coarse_reps.reserve(params.k_aug);
    for (const auto& v : coarse.variants) {
        coarse_reps.push_back(model.representation(v));
        preds.push_back(model.predict_from(tap, coarse_reps.back()));
    }
    if (params.coarse) rec.in_coa = selector::coarse_inconsistency(preds);

    if (params.fine) {
        const std::span<const PredictionDist> coarse_preds(preds.data() + 1, params.k_aug);
        std::vector<PredictionDist> perturbed;
        perturbed.reserve(params.k_aug);
        for (std::size_t k = 0; k < params.k_aug; ++k) {
            const auto p = augment::vat_perturbation(model, coarse_reps[k], coarse_preds[k], params.epsilon,
                                                     params.xi, rng);
            if (p.degenerate && degenerate) ++*degenerate;
            Vector shifted = coarse_reps[k];
            for (std::size_t i = 0; i < shifted.size(); ++i) shifted[i] += p.r_adv[i];
            perturbed.push_back(model.predict_from(tap, shifted));
        }
        rec.in_fin = selector::fine_inconsistency(coarse_preds, perturbed);
    }
    return rec;
}

namespace {
void check_rows(const FeatureMatrix& features, std::span<const std::size_t> rows, std::span<const SampleId> ids) {
    if (rows.size() != ids.size()) throw ShapeError("score_pool: one id per row required");
    for (std::size_t r : rows)
        if (r >= features.rows()) throw LookupError("score_pool: row index out of range");
}
}  // namespace

ScoredPool score_pool(const nn::Classifier& model, const FeatureMatrix& features, std::span<const std::size_t> rows,
                      std::span<const SampleId> ids, const ScoringParams& params) {
    check_rows(features, rows, ids);
    ScoredPool out;
    out.records.resize(rows.size());
    const auto n = static_cast<std::ptrdiff_t>(rows.size());
    std::size_t degenerate = 0;
#pragma omp parallel for schedule(dynamic, 64) reduction(+ : degenerate)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        std::size_t local = 0;
        out.records[i] = score_sample(model, ids[i], features.row(rows[i]), params, &local);
        degenerate += local;
    }
    out.degenerate_perturbations = degenerate;
    return out;
}

ScoredPool score_pool_serial(const nn::Classifier& model, const FeatureMatrix& features,
                             std::span<const std::size_t> rows, std::span<const SampleId> ids,
                             const ScoringParams& params) {
    check_rows(features, rows, ids);
    ScoredPool out;
    out.records.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        out.records.push_back(
            score_sample(model, ids[i], features.row(rows[i]), params, &out.degenerate_perturbations));
    return out;
}

ScoredPool predict_pool(const nn::Classifier& model, const FeatureMatrix& features, std::span<const std::size_t> rows,
                        std::span<const SampleId> ids) {
    check_rows(features, rows, ids);
    ScoredPool out;
    out.records.resize(rows.size());
    const auto n = static_cast<std::ptrdiff_t>(rows.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        auto& rec = out.records[i];
        rec.sample_id = ids[i];
        rec.representation = model.representation(features.row(rows[i]));
        rec.entropy = selector::entropy(model.predict_from(model.tap_layer(), rec.representation));
    }
    return out;
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace ideal::scoring
