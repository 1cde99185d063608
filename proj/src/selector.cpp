#include "ideal/selector.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

#include "ideal/nn.hpp"

namespace ideal::selector {

double coarse_inconsistency(std::span<const PredictionDist> preds) {
    if (preds.size() < 2) throw UsageError("coarse_inconsistency: need the original and at least one augmentation");
    const std::size_t classes = preds.front().size();
    const double n = static_cast<double>(preds.size());
    double total = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
        // Shifted by the first value so identical predictions give exactly 0.
        const double origin = preds.front()[c];
        double mean = 0.0;
        for (const auto& p : preds) {
            if (p.size() != classes) throw ShapeError("coarse_inconsistency: class counts differ");
            mean += p[c] - origin;
        }
        mean /= n;
        double var = 0.0;
        for (const auto& p : preds) var += (p[c] - origin - mean) * (p[c] - origin - mean);
        total += var / n;
    }
    return total;
}

double fine_inconsistency(std::span<const PredictionDist> coarse, std::span<const PredictionDist> perturbed) {
    if (coarse.size() != perturbed.size()) throw ShapeError("fine_inconsistency: prediction lists differ in length");
    double total = 0.0;
    for (std::size_t k = 0; k < coarse.size(); ++k) total += nn::kl_divergence(coarse[k], perturbed[k]);
    return total;
}

double percentile(double value, std::span<const double> population) {
    if (population.empty()) throw UsageError("percentile: empty population");
    const auto smaller = std::count_if(population.begin(), population.end(), [&](double v) { return v < value; });
    return static_cast<double>(smaller) / static_cast<double>(population.size());
}

std::vector<double> percentiles(std::span<const double> population) {
    if (population.empty()) throw UsageError("percentile: empty population");
    std::vector<double> sorted(population.begin(), population.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    std::vector<double> out(population.size());
    for (std::size_t i = 0; i < population.size(); ++i) {
        const auto below = std::lower_bound(sorted.begin(), sorted.end(), population[i]) - sorted.begin();
        out[i] = static_cast<double>(below) / n;
    }
    return out;
}

double total_inconsistency(double phi_coa, double phi_fin, double gamma) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw UsageError("total_inconsistency: gamma must lie in [0, 1]");
    return gamma * phi_coa + (1.0 - gamma) * phi_fin;
}

double entropy(const PredictionDist& pred) {
    if (!is_simplex(pred.values())) throw UsageError("entropy: not a valid probability simplex");
    double h = 0.0;
    for (double p : pred.values())
        if (p > 0.0) h -= p * std::log(p);
    return std::max(h, 0.0);
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw ShapeError("cosine_similarity: dimension mismatch");
    const double nu = l2_norm(u);
    const double nv = l2_norm(v);
    if (nu <= kMinNorm || nv <= kMinNorm) throw NumericError("cosine_similarity: zero-norm vector");
    return std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0);
}

double density_aware_entropy(std::span<const double> target, double target_entropy,
                             std::span<const Vector> candidates) {
    if (candidates.empty()) throw UsageError("density_aware_entropy: empty candidate set");
    if (l2_norm(target) <= kMinNorm) {
        std::cerr << "warning: degenerate representation in density-aware entropy; scored 0\n";
        return 0.0;
    }
    double sum = 0.0;
    std::size_t used = 0;
    for (const auto& c : candidates) {
        if (c.size() != target.size()) throw ShapeError("density_aware_entropy: dimension mismatch");
        if (l2_norm(c) <= kMinNorm) continue;
        sum += cosine_similarity(target, c);
        ++used;
    }
    if (used < candidates.size())
        std::cerr << "warning: " << candidates.size() - used
                  << " degenerate representation(s) excluded from the density average\n";
    return target_entropy * (sum / static_cast<double>(used));
}

std::vector<double> density_factors(std::span<const Vector* const> reps, std::size_t* degenerate) {
    std::vector<double> factors(reps.size(), 0.0);
    if (reps.empty()) return factors;
    const std::size_t dim = reps.front()->size();
    Vector direction_sum(dim, 0.0);
    std::vector<double> norms(reps.size());
    std::size_t used = 0;
    for (std::size_t i = 0; i < reps.size(); ++i) {
        if (reps[i]->size() != dim) throw ShapeError("density_factors: dimension mismatch");
        norms[i] = l2_norm(*reps[i]);
        if (norms[i] <= kMinNorm) continue;
        ++used;
        for (std::size_t j = 0; j < dim; ++j) direction_sum[j] += (*reps[i])[j] / norms[i];
    }
    if (degenerate) *degenerate = reps.size() - used;
    if (used == 0) return factors;
    for (std::size_t i = 0; i < reps.size(); ++i) {
        if (norms[i] <= kMinNorm) continue;
        const double mean = dot(*reps[i], direction_sum) / (norms[i] * static_cast<double>(used));
        factors[i] = std::clamp(mean, -1.0, 1.0);
    }
    return factors;
}

void fuse_inconsistency(std::span<ScoreRecord> records, double gamma) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw UsageError("total_inconsistency: gamma must lie in [0, 1]");
    if (records.empty()) return;
    std::vector<double> coa(records.size());
    std::vector<double> fin(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        coa[i] = records[i].in_coa;
        fin[i] = records[i].in_fin;
    }
    const auto phi_coa = percentiles(coa);
    const auto phi_fin = percentiles(fin);
    for (std::size_t i = 0; i < records.size(); ++i) {
        records[i].phi_coa = phi_coa[i];
        records[i].phi_fin = phi_fin[i];
        records[i].in_total = total_inconsistency(phi_coa[i], phi_fin[i], gamma);
    }
}

Selection select(std::span<ScoreRecord> records, std::size_t m_cand, std::size_t budget,
                 const SelectOptions& options) {
    if (budget == 0) throw UsageError("select: budget must be positive");
    if (budget > m_cand) throw UsageError("select: budget exceeds candidate set size");
    if (m_cand > records.size()) throw UsageError("select: candidate set larger than the pool");

    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto by_inconsistency = [&](std::size_t a, std::size_t b) {
        if (records[a].in_total != records[b].in_total) return records[a].in_total > records[b].in_total;
        return records[a].sample_id < records[b].sample_id;
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m_cand), order.end(),
                      by_inconsistency);
    order.resize(m_cand);

    Selection out;
    out.candidates.reserve(m_cand);
    for (std::size_t i : order) out.candidates.push_back(records[i].sample_id);

    if (options.use_density) {
        std::vector<const Vector*> reps;
        reps.reserve(m_cand);
        for (std::size_t i : order) reps.push_back(&records[i].representation);
        const auto factors = density_factors(reps, &out.degenerate_representations);
        for (std::size_t k = 0; k < order.size(); ++k)
            records[order[k]].density_entropy = records[order[k]].entropy * factors[k];
        if (out.degenerate_representations > 0)
            std::cerr << "warning: " << out.degenerate_representations
                      << " degenerate representation(s) excluded from the density average\n";
    } else {
        for (std::size_t i : order) records[i].density_entropy = records[i].entropy;
    }

    auto by_density = [&](std::size_t a, std::size_t b) {
        if (records[a].density_entropy != records[b].density_entropy)
            return records[a].density_entropy > records[b].density_entropy;
        return records[a].sample_id < records[b].sample_id;
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(budget), order.end(), by_density);
    out.ids.reserve(budget);
    for (std::size_t k = 0; k < budget; ++k) out.ids.push_back(records[order[k]].sample_id);
    return out;
}

}  // namespace ideal::selector
