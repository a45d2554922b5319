#pragma once

#include "bdi/classifiers.hpp"
#include "bdi/metrics.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bdi {

// Test-fold membership: folds[f] lists record indices, ascending. Stratified
// folds deal each class's shuffled records round-robin, so fold sizes differ
// by at most one overall and per class.
std::vector<std::vector<std::size_t>> make_folds(const Dataset& ds, std::size_t k, bool stratified,
                                                 std::uint64_t seed);

// Confusion counts of `model` on every record of `ds`.
ConfusionCounts evaluate_counts(const TrainedModel& model, const Dataset& ds);

// Metrics are computed from counts pooled over all folds. Timings are the
// mean per-fold wall clock. Fold models are trained with seeds derived from
// `model_seed` (defaults to `seed`).
MetricsReport cross_validate(const Dataset& ds, const FeatureSubset& subset, const ModelConfig& config,
                             std::size_t k = 10, bool stratified = true, std::uint64_t seed = 42,
                             std::optional<std::uint64_t> model_seed = std::nullopt);

MetricsReport holdout_evaluate(const Dataset& ds, const FeatureSubset& subset, const ModelConfig& config,
                               double train_fraction = 0.8, bool stratified = true, std::uint64_t seed = 42,
                               std::optional<std::uint64_t> model_seed = std::nullopt);

// Index split used by holdout_evaluate: {train, test}, each ascending.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> holdout_split(const Dataset& ds,
                                                                            double train_fraction,
                                                                            bool stratified, std::uint64_t seed);

struct Protocol {
    enum class Kind { cross_validation, holdout };
    Kind kind = Kind::cross_validation;
    std::size_t folds = 10;
    double train_fraction = 0.8;
    bool stratified = true;
};

// "cv10", "cv5", "holdout80", "holdout70", ...
std::optional<Protocol> parse_protocol(std::string_view text);
std::string protocol_name(const Protocol& p);

MetricsReport run_protocol(const Dataset& ds, const FeatureSubset& subset, const ModelConfig& config,
                           const Protocol& protocol, std::uint64_t seed,
                           std::optional<std::uint64_t> model_seed = std::nullopt);

// The 31 non-empty subsets, by size, then lexicographically by column index.
std::vector<FeatureSubset> all_subsets();

struct SweepEntry {
    ModelKind kind;
    MetricsReport metrics;
};

struct SweepRow {
    FeatureSubset subset;
    std::vector<SweepEntry> per_model;  // in requested kind order
    ModelKind best_model = ModelKind::naive_bayes;
    double best_accuracy = 0;
};

struct SweepReport {
    Protocol protocol;
    std::uint64_t seed = 0;
    std::vector<SweepRow> rows;
};

struct SweepOptions {
    ModelConfig base;          // hyperparameters; kind is overridden per cell
    std::size_t threads = 0;   // 0 = hardware concurrency
    std::vector<FeatureSubset> subsets;  // empty = all 31
};

// Every (subset, kind) cell trains with a seed derived from
// (seed, subset index, kind), so thread count does not change the report.
// Best model per row: highest accuracy, ties by kind display name.
SweepReport sweep_combinations(const Dataset& ds, const std::vector<ModelKind>& kinds, const Protocol& protocol,
                               std::uint64_t seed, const SweepOptions& options = {});

// Columns: n_features,subset,model,tpr,fpr,precision,recall,f_measure,accuracy,
// train_s,predict_s,is_best. Timing columns are left empty when
// include_timing is false.
std::string sweep_csv(const SweepReport& report, bool include_timing = true);

}  // namespace bdi
