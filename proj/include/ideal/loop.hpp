#pragma once

// Pool-based active-learning loop: pool bookkeeping, the audited oracle,
// per-cycle train / score / select / annotate, and the baseline selectors.

#include <cstddef>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <unordered_map>
#include <vector>

#include "ideal/common.hpp"
#include "ideal/config.hpp"
#include "ideal/dataset.hpp"
#include "ideal/nn.hpp"
#include "ideal/selector.hpp"

namespace ideal::loop {

class PoolExhausted : public Error {
public:
    using Error::Error;
};

/// Stand-in for the human annotator. Every label handed out is recorded so
/// tests can check that the learner only ever saw labels it paid for.
class Oracle {
public:
    explicit Oracle(const Dataset& data);

    /// Ground-truth class of a pool sample. Throws LookupError for unknown ids.
    int label(SampleId id);

    const std::set<SampleId>& revealed() const noexcept { return revealed_; }
    std::size_t queries() const noexcept { return queries_; }

    /// Revealed ids that are not in `labeled`.
    std::size_t unauthorized_reads(const std::map<SampleId, int>& labeled) const;

private:
    std::unordered_map<SampleId, int> truth_;
    std::set<SampleId> revealed_;
    std::size_t queries_ = 0;
};

class Pool {
public:
    Pool() = default;
    Pool(std::vector<SampleId> members, const std::unordered_map<SampleId, std::size_t>& rows);

    const std::map<SampleId, int>& labeled() const noexcept { return labeled_; }
    const std::vector<SampleId>& unlabeled() const noexcept { return unlabeled_; }  // ascending
    std::size_t labeled_count() const noexcept { return labeled_.size(); }
    std::size_t unlabeled_count() const noexcept { return unlabeled_.size(); }
    std::size_t size() const noexcept { return labeled_.size() + unlabeled_.size(); }
    std::size_t row_of(SampleId id) const;
    bool is_unlabeled(SampleId id) const;

    /// Moves ids from the unlabeled to the labeled partition, asking the
    /// oracle for each label.
    void annotate(std::span<const SampleId> ids, Oracle& oracle);

    /// Disjointness and coverage of the two partitions.
    bool consistent() const;

private:
    std::map<SampleId, int> labeled_;
    std::vector<SampleId> unlabeled_;
    std::unordered_map<SampleId, std::size_t> rows_;
};

struct CycleReport {
    std::size_t cycle = 0;
    std::size_t n_labeled = 0;
    double accuracy = 0.0;
    double mean_in_total = 0.0;
    double max_in_total = 0.0;
    double select_ms = 0.0;
    std::vector<SampleId> selected;
};

/// Random, entropy and core-set selection over an already-predicted pool.
/// `labeled_reps` seeds the core-set's farthest-point iteration.
std::vector<SampleId> baseline_select(Strategy strategy, std::span<const selector::ScoreRecord> records,
                                      std::span<const Vector> labeled_reps, std::size_t budget, Rng& rng);

/// One active-learning run. Construction holds out the test split, draws the
/// class-balanced initial labeled set and trains the first model.
class ActiveLearner {
public:
    ActiveLearner(LoopConfig config, const Dataset& data);

    /// Score and select with the current model, annotate, retrain, evaluate.
    /// Throws PoolExhausted when fewer than `budget` samples remain.
    CycleReport run_cycle();

    /// The selection step alone (no annotation, no training). Returns the
    /// chosen ids and fills the optional records with the scores used.
    std::vector<SampleId> select_batch(std::vector<selector::ScoreRecord>* records = nullptr,
                                       double* elapsed_ms = nullptr);

    double evaluate() const;

    const LoopConfig& config() const noexcept { return config_; }
    const Pool& pool() const noexcept { return pool_; }
    const Oracle& oracle() const noexcept { return oracle_; }
    const nn::Classifier& model() const noexcept { return model_; }
    const std::vector<std::size_t>& test_rows() const noexcept { return test_rows_; }
    std::size_t cycle() const noexcept { return cycle_; }
    std::size_t initial_labeled() const noexcept { return initial_labeled_; }

    /// One training phase of train_steps_per_cycle steps; returns the mean loss.
    double train_phase();

private:
    nn::Classifier fresh_model() const;

    LoopConfig config_;
    const Dataset* data_;
    std::unordered_map<SampleId, std::size_t> rows_;
    Oracle oracle_;
    Pool pool_;
    std::vector<std::size_t> test_rows_;
    nn::Classifier model_;
    std::size_t cycle_ = 0;
    std::size_t train_phases_ = 0;
    std::size_t initial_labeled_ = 0;
};

using ReportSink = std::function<void(const CycleReport&)>;

/// config.cycles cycles, stopping early (with the reports so far) when the
/// pool runs out.
std::vector<CycleReport> run(const LoopConfig& config, const Dataset& data, const ReportSink& sink = {});

}  // namespace ideal::loop
