#pragma once

#include "bdi/encode.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace bdi {

enum class ModelKind { naive_bayes, decision_tree, random_forest };

inline constexpr std::array<ModelKind, 3> kAllModelKinds = {ModelKind::naive_bayes, ModelKind::decision_tree,
                                                            ModelKind::random_forest};

std::string_view model_short_name(ModelKind k);    // nb, dt, rf
std::string_view model_display_name(ModelKind k);  // NaiveBayes, DecisionTree, RandomForest
std::optional<ModelKind> parse_model_kind(std::string_view name);

enum class SplitCriterion { entropy, gini };

struct TreeOptions {
    std::optional<std::size_t> max_depth;  // unlimited when absent
    std::size_t min_leaf = 1;
    SplitCriterion criterion = SplitCriterion::entropy;
};

struct ForestOptions {
    std::size_t n_trees = 100;
    std::optional<std::size_t> features_per_split;  // floor(sqrt(|subset|)) when absent
    bool bootstrap = true;
    TreeOptions tree;
};

struct NaiveBayesOptions {
    double laplace_alpha = 1.0;
};

struct ModelConfig {
    ModelKind kind = ModelKind::random_forest;
    NaiveBayesOptions naive_bayes;
    TreeOptions tree;
    ForestOptions forest;
};

struct NaiveBayesModel {
    NaiveBayesOptions options;
    std::array<double, 2> prior{};  // by Label
    // conditional[i][label][slot]: P(code | label) for subset position i.
    std::vector<std::array<std::array<double, 3>, 2>> conditional;
};

// Flat multiway tree. `feature` is a position in the model's feature subset,
// or -1 for a leaf. Missing children (-1) fall back to the node's label.
struct TreeNode {
    int feature = -1;
    Label label = Label::legitimate;
    std::array<int, 3> children{-1, -1, -1};

    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct DecisionTreeModel {
    TreeOptions options;
    std::vector<TreeNode> nodes;  // root at 0

    Label predict(const std::array<Code, kFeatureCount>& projected) const;
};

struct RandomForestModel {
    ForestOptions options;
    std::vector<DecisionTreeModel> trees;
};

inline constexpr int kModelFormatVersion = 1;

struct TrainedModel {
    ModelKind kind = ModelKind::naive_bayes;
    FeatureSubset feature_subset;
    std::uint64_t seed = 0;
    int format_version = kModelFormatVersion;
    std::variant<NaiveBayesModel, DecisionTreeModel, RandomForestModel> parameters;

    ModelConfig config() const;
};

// Training-set view: codes projected onto a feature subset and collapsed to
// (pattern, per-class weight) cells. Pattern keys are base-3 numbers over the
// subset positions.
struct PatternTable {
    std::size_t width = 0;
    std::vector<std::uint32_t> keys;                 // distinct patterns present
    std::vector<std::array<double, 2>> weights;      // per key, by Label

    static std::uint32_t key_of(const FeatureVector& v, const FeatureSubset& subset);
    static Code code_at(std::uint32_t key, std::size_t position);
};

PatternTable build_pattern_table(const Dataset& ds, const FeatureSubset& subset);

TrainedModel train_naive_bayes(const Dataset& ds, const FeatureSubset& subset, NaiveBayesOptions options = {});
TrainedModel train_decision_tree(const Dataset& ds, const FeatureSubset& subset, TreeOptions options = {});
TrainedModel train_random_forest(const Dataset& ds, const FeatureSubset& subset, ForestOptions options = {},
                                 std::uint64_t seed = 42);
TrainedModel train_model(const Dataset& ds, const FeatureSubset& subset, const ModelConfig& config,
                         std::uint64_t seed);

// Grows one tree on weighted cells. `feature_sampler`, when set, picks the
// candidate subset positions at each split from the still-unused ones.
DecisionTreeModel grow_tree(const PatternTable& table, const TreeOptions& options,
                            const std::function<std::vector<std::size_t>(const std::vector<std::size_t>&)>&
                                feature_sampler = {});

Label predict(const TrainedModel& model, const FeatureVector& x);

// Impurity of a two-class weight pair under the criterion.
double impurity(const std::array<double, 2>& w, SplitCriterion criterion);

std::string model_to_json(const TrainedModel& model);
TrainedModel model_from_json(std::string_view text);
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

// Short stable identifier: hash of the serialized model.
std::string model_id(const TrainedModel& model);

}  // namespace bdi
