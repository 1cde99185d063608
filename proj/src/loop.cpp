#include "ideal/loop.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "ideal/augment.hpp"
#include "ideal/propagator.hpp"
#include "ideal/scoring.hpp"

namespace ideal::loop {

namespace {
// Independent random streams, one per purpose.
enum Stream : std::uint64_t {
    kSplitStream = 1,
    kModelStream = 2,
    kTrainStream = 3,
    kSelectStream = 4,
    kScoreStream = 5,
    kInitialStream = 6,
};
}  // namespace

// ---------------------------------------------------------------- Oracle

Oracle::Oracle(const Dataset& data) {
    truth_.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) truth_.emplace(data.ids[i], data.labels[i]);
}

int Oracle::label(SampleId id) {
    const auto it = truth_.find(id);
    if (it == truth_.end()) throw LookupError("oracle: unknown sample id " + std::to_string(id));
    ++queries_;
    revealed_.insert(id);
    return it->second;
}

std::size_t Oracle::unauthorized_reads(const std::map<SampleId, int>& labeled) const {
    return static_cast<std::size_t>(
        std::count_if(revealed_.begin(), revealed_.end(), [&](SampleId id) { return !labeled.contains(id); }));
}

// ---------------------------------------------------------------- Pool

Pool::Pool(std::vector<SampleId> members, const std::unordered_map<SampleId, std::size_t>& rows)
    : unlabeled_(std::move(members)) {
    std::sort(unlabeled_.begin(), unlabeled_.end());
    if (std::adjacent_find(unlabeled_.begin(), unlabeled_.end()) != unlabeled_.end())
        throw DataError("pool: duplicate sample id");
    rows_.reserve(unlabeled_.size());
    for (SampleId id : unlabeled_) {
        const auto it = rows.find(id);
        if (it == rows.end()) throw LookupError("pool: id " + std::to_string(id) + " not in dataset");
        rows_.emplace(id, it->second);
    }
}

std::size_t Pool::row_of(SampleId id) const {
    const auto it = rows_.find(id);
    if (it == rows_.end()) throw LookupError("pool: unknown sample id " + std::to_string(id));
    return it->second;
}

bool Pool::is_unlabeled(SampleId id) const { return std::binary_search(unlabeled_.begin(), unlabeled_.end(), id); }

void Pool::annotate(std::span<const SampleId> ids, Oracle& oracle) {
    std::vector<SampleId> sorted(ids.begin(), ids.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw UsageError("annotate: duplicate id in request");
    for (SampleId id : sorted)
        if (!is_unlabeled(id)) throw UsageError("annotate: id " + std::to_string(id) + " is not unlabeled");
    for (SampleId id : ids) labeled_.emplace(id, oracle.label(id));
    std::vector<SampleId> rest;
    rest.reserve(unlabeled_.size() - sorted.size());
    std::set_difference(unlabeled_.begin(), unlabeled_.end(), sorted.begin(), sorted.end(), std::back_inserter(rest));
    unlabeled_ = std::move(rest);
}

bool Pool::consistent() const {
    if (size() != rows_.size()) return false;
    for (SampleId id : unlabeled_)
        if (labeled_.contains(id) || !rows_.contains(id)) return false;
    for (const auto& [id, cls] : labeled_)
        if (!rows_.contains(id)) return false;
    return true;
}

// ---------------------------------------------------------------- Baselines

std::vector<SampleId> baseline_select(Strategy strategy, std::span<const selector::ScoreRecord> records,
                                      std::span<const Vector> labeled_reps, std::size_t budget, Rng& rng) {
    if (budget > records.size()) throw UsageError("baseline_select: budget exceeds unlabeled pool");
    std::vector<SampleId> out;
    out.reserve(budget);
    switch (strategy) {
        case Strategy::random: {
            std::vector<SampleId> ids;
            ids.reserve(records.size());
            for (const auto& r : records) ids.push_back(r.sample_id);
            std::sample(ids.begin(), ids.end(), std::back_inserter(out), budget, rng);
            return out;
        }
        case Strategy::entropy: {
            std::vector<std::size_t> order(records.size());
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(budget), order.end(),
                              [&](std::size_t a, std::size_t b) {
                                  if (records[a].entropy != records[b].entropy)
                                      return records[a].entropy > records[b].entropy;
                                  return records[a].sample_id < records[b].sample_id;
                              });
            for (std::size_t k = 0; k < budget; ++k) out.push_back(records[order[k]].sample_id);
            return out;
        }
        case Strategy::coreset: {
            // Greedy k-centre: repeatedly take the point farthest from every
            // chosen centre (labeled set plus picks so far).
            auto sq_dist = [](std::span<const double> a, std::span<const double> b) {
                if (a.size() != b.size()) throw ShapeError("coreset: representation dimensions differ");
                double s = 0.0;
                for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
                return s;
            };
            std::vector<double> nearest(records.size(), std::numeric_limits<double>::infinity());
            for (std::size_t i = 0; i < records.size(); ++i)
                for (const auto& c : labeled_reps)
                    nearest[i] = std::min(nearest[i], sq_dist(records[i].representation, c));
            std::vector<bool> taken(records.size(), false);
            for (std::size_t k = 0; k < budget; ++k) {
                std::size_t best = records.size();
                for (std::size_t i = 0; i < records.size(); ++i) {
                    if (taken[i]) continue;
                    if (best == records.size() || nearest[i] > nearest[best] ||
                        (nearest[i] == nearest[best] && records[i].sample_id < records[best].sample_id))
                        best = i;
                }
                taken[best] = true;
                out.push_back(records[best].sample_id);
                for (std::size_t i = 0; i < records.size(); ++i)
                    if (!taken[i])
                        nearest[i] = std::min(nearest[i], sq_dist(records[i].representation, records[best].representation));
            }
            return out;
        }
        case Strategy::ideal: break;
    }
    throw ConfigError("strategy", "'" + to_string(strategy) + "' is not a baseline strategy");
}

// ---------------------------------------------------------------- ActiveLearner

ActiveLearner::ActiveLearner(LoopConfig config, const Dataset& data)
    : config_(std::move(config)), data_(&data), rows_(index_by_id(data)), oracle_(data),
      model_(nn::Classifier::zeros(1, {}, 1)) {
    config_.validate();
    if (data.size() == 0) throw DataError("dataset is empty");
    if (data.classes < 1) throw DataError("dataset has no classes");

    Rng split = make_rng(config_.seed, kSplitStream);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), split);
    const auto n_test = static_cast<std::size_t>(std::floor(config_.test_fraction * static_cast<double>(data.size())));
    test_rows_.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
    std::sort(test_rows_.begin(), test_rows_.end());

    std::vector<SampleId> members;
    members.reserve(data.size() - n_test);
    for (std::size_t k = n_test; k < order.size(); ++k) members.push_back(data.ids[order[k]]);
    pool_ = Pool(members, rows_);

    // Class-balanced initial labeled set. Picking it uses ground truth, as a
    // stratified seed set does in practice; the labels themselves still come
    // from the oracle.
    Rng init = make_rng(config_.seed, kInitialStream);
    std::vector<std::vector<SampleId>> by_class(data.classes);
    for (SampleId id : pool_.unlabeled()) by_class[static_cast<std::size_t>(data.labels[rows_.at(id)])].push_back(id);
    std::vector<SampleId> initial;
    for (std::size_t c = 0; c < data.classes; ++c) {
        if (by_class[c].empty()) continue;
        if (by_class[c].size() < config_.initial_per_class)
            throw DataError("class " + std::to_string(c) + " has fewer pool samples than initial_per_class");
        std::sample(by_class[c].begin(), by_class[c].end(), std::back_inserter(initial), config_.initial_per_class,
                    init);
    }
    pool_.annotate(initial, oracle_);
    initial_labeled_ = initial.size();

    model_ = fresh_model();
    train_phase();
}

nn::Classifier ActiveLearner::fresh_model() const {
    Rng rng = make_rng(config_.seed, kModelStream, config_.cold_restart ? train_phases_ : 0);
    return nn::Classifier::random(data_->dim(), config_.hidden_layers, data_->classes, config_.tap_layer, rng);
}

double ActiveLearner::train_phase() {
    Rng rng = make_rng(config_.seed, kTrainStream, train_phases_++);
    const auto& features = data_->features;
    const std::size_t classes = data_->classes;
    const std::size_t tap = model_.tap_layer();
    const Vector weights = config_.effective_weights();
    const auto family = config_.transform_family();
    const nn::TrainOptions options{config_.learning_rate, config_.lambda_u};

    std::vector<std::pair<SampleId, int>> labeled(pool_.labeled().begin(), pool_.labeled().end());
    const auto& unlabeled = pool_.unlabeled();

    double total_loss = 0.0;
    std::vector<std::pair<SampleId, int>> lab_batch;
    std::vector<SampleId> unl_batch;
    for (std::size_t step = 0; step < config_.train_steps_per_cycle; ++step) {
        lab_batch.clear();
        unl_batch.clear();
        std::sample(labeled.begin(), labeled.end(), std::back_inserter(lab_batch),
                    std::min(config_.labeled_batch, labeled.size()), rng);
        std::sample(unlabeled.begin(), unlabeled.end(), std::back_inserter(unl_batch),
                    std::min(config_.unlabeled_batch, unlabeled.size()), rng);

        std::vector<propagator::BatchItem> lab_items;
        lab_items.reserve(lab_batch.size());
        for (const auto& [id, cls] : lab_batch) {
            const auto x = features.row(pool_.row_of(id));
            lab_items.push_back({model_.representation(x), PredictionDist::one_hot(classes, static_cast<std::size_t>(cls)),
                                 Vector(x.begin(), x.end())});
        }

        std::vector<propagator::BatchItem> unl_items;
        std::vector<propagator::BatchItem> aug_items;
        unl_items.reserve(unl_batch.size());
        aug_items.reserve(unl_batch.size() * config_.k_aug);
        std::vector<PredictionDist> preds;
        for (SampleId id : unl_batch) {
            const auto x = features.row(pool_.row_of(id));
            Vector rep = model_.representation(x);
            preds.clear();
            preds.push_back(model_.predict_from(tap, rep));
            const auto coarse = augment::coarse_augment(id, x, config_.k_aug, config_.delta, rng, family);
            auto fine = augment::fine_augment_set(model_, coarse, config_.epsilon, config_.xi, rng);
            for (const auto& f : fine) preds.push_back(model_.predict_from(tap, f));
            const auto guess = propagator::guess_label(id, preds, weights);
            for (auto& f : fine) {
                std::optional<Vector> input;
                if (tap == 0) input = f;
                aug_items.push_back({std::move(f), guess.distribution, std::move(input)});
            }
            unl_items.push_back({std::move(rep), guess.distribution, Vector(x.begin(), x.end())});
        }

        const auto batch = propagator::build_training_batch(lab_items, unl_items, aug_items, config_.alpha, rng);
        total_loss += nn::train_step(model_, batch, options);
    }
    return total_loss / static_cast<double>(config_.train_steps_per_cycle);
}

std::vector<SampleId> ActiveLearner::select_batch(std::vector<selector::ScoreRecord>* records_out,
                                                  double* elapsed_ms) {
    const std::size_t budget = config_.budget;
    const std::size_t n_unlabeled = pool_.unlabeled_count();
    if (n_unlabeled < budget)
        throw PoolExhausted("unlabeled pool has " + std::to_string(n_unlabeled) + " samples, budget is " +
                            std::to_string(budget));

    const auto start = std::chrono::steady_clock::now();
    const auto& ids = pool_.unlabeled();
    std::vector<std::size_t> rows;
    rows.reserve(ids.size());
    for (SampleId id : ids) rows.push_back(pool_.row_of(id));

    Rng select_rng = make_rng(config_.seed, kSelectStream, cycle_);
    const auto& flags = config_.ablation;
    Strategy strategy = config_.strategy;
    const bool ranker = !flags.disable_ranker && !(flags.disable_coarse && flags.disable_fine);
    const bool reranker = !flags.disable_reranker;
    if (strategy == Strategy::ideal && !ranker && !reranker) strategy = Strategy::random;

    std::vector<selector::ScoreRecord> records;
    std::vector<SampleId> chosen;
    switch (strategy) {
        case Strategy::ideal: {
            scoring::ScoringParams params;
            params.k_aug = config_.k_aug;
            params.delta = config_.delta;
            params.epsilon = config_.epsilon;
            params.xi = config_.xi;
            params.coarse = ranker && !flags.disable_coarse;
            params.fine = ranker && !flags.disable_fine;
            params.family = config_.transform_family();
            params.stream_seed = derive_seed(config_.seed, kScoreStream, cycle_);
            auto scored = scoring::score_pool(model_, data_->features, rows, ids, params);
            records = std::move(scored.records);

            std::size_t m_cand = n_unlabeled;
            if (ranker) {
                const double gamma = !params.coarse ? 0.0 : !params.fine ? 1.0 : config_.gamma;
                selector::fuse_inconsistency(records, gamma);
                m_cand = reranker ? std::min(config_.effective_m_cand(), n_unlabeled) : budget;
            }
            const auto sel = selector::select(records, m_cand, budget, {!flags.disable_density});
            chosen = sel.ids;
            break;
        }
        case Strategy::random: {
            records.resize(ids.size());
            for (std::size_t i = 0; i < ids.size(); ++i) records[i].sample_id = ids[i];
            chosen = baseline_select(Strategy::random, records, {}, budget, select_rng);
            break;
        }
        case Strategy::entropy:
        case Strategy::coreset: {
            records = scoring::predict_pool(model_, data_->features, rows, ids).records;
            std::vector<Vector> labeled_reps;
            if (strategy == Strategy::coreset) {
                labeled_reps.reserve(pool_.labeled_count());
                for (const auto& [id, cls] : pool_.labeled())
                    labeled_reps.push_back(model_.representation(data_->features.row(pool_.row_of(id))));
            }
            chosen = baseline_select(strategy, records, labeled_reps, budget, select_rng);
            break;
        }
    }
    const auto stop = std::chrono::steady_clock::now();
    if (elapsed_ms) *elapsed_ms = std::chrono::duration<double, std::milli>(stop - start).count();
    if (records_out) *records_out = std::move(records);
    return chosen;
}

CycleReport ActiveLearner::run_cycle() {
    if (pool_.unlabeled_count() < config_.budget)
        throw PoolExhausted("unlabeled pool has " + std::to_string(pool_.unlabeled_count()) +
                            " samples, budget is " + std::to_string(config_.budget));
    ++cycle_;
    CycleReport report;
    report.cycle = cycle_;

    std::vector<selector::ScoreRecord> records;
    report.selected = select_batch(&records, &report.select_ms);
    if (!records.empty()) {
        double sum = 0.0;
        double peak = 0.0;
        for (const auto& r : records) {
            sum += r.in_total;
            peak = std::max(peak, r.in_total);
        }
        report.mean_in_total = sum / static_cast<double>(records.size());
        report.max_in_total = peak;
    }

    pool_.annotate(report.selected, oracle_);
    if (config_.cold_restart) model_ = fresh_model();
    train_phase();
    report.accuracy = evaluate();
    report.n_labeled = pool_.labeled_count();
    return report;
}

double ActiveLearner::evaluate() const {
    const auto& features = data_->features;
    std::size_t correct = 0;
    std::size_t total = 0;
    auto score_row = [&](std::size_t r) {
        const auto pred = model_.predict(features.row(r));
        if (static_cast<int>(pred.argmax()) == data_->labels[r]) ++correct;
        ++total;
    };
    if (test_rows_.empty()) {
        for (std::size_t r = 0; r < data_->size(); ++r) score_row(r);
    } else {
        for (std::size_t r : test_rows_) score_row(r);
    }
    return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

std::vector<CycleReport> run(const LoopConfig& config, const Dataset& data, const ReportSink& sink) {
    config.validate();
    ActiveLearner learner(config, data);
    std::vector<CycleReport> reports;
    for (std::size_t t = 0; t < config.cycles; ++t) {
        if (learner.pool().unlabeled_count() < config.budget) break;
        reports.push_back(learner.run_cycle());
        if (sink) sink(reports.back());
    }
    return reports;
}

}  // namespace ideal::loop
