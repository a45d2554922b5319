#include "bdi/classifiers.hpp"

#include "bdi/error.hpp"
#include "bdi/rng.hpp"

#include <algorithm>
#include <cmath>

namespace bdi {

namespace {

constexpr std::array<std::uint32_t, kFeatureCount + 1> kPow3 = {1, 3, 9, 27, 81, 243};
constexpr double kGainEpsilon = 1e-12;

void check_subset(const FeatureSubset& subset) {
    if (subset.empty()) throw Error(ErrorCode::empty_subset, "feature subset is empty");
    if (subset.size() > kFeatureCount) throw Error(ErrorCode::invalid_argument, "feature subset is too large");
    for (std::size_t i = 0; i < subset.size(); ++i) {
        for (std::size_t j = i + 1; j < subset.size(); ++j) {
            if (subset[i] == subset[j]) throw Error(ErrorCode::invalid_argument, "feature subset has duplicates");
        }
    }
}

void check_labeled(const Dataset& ds) {
    if (ds.empty()) throw Error(ErrorCode::invalid_argument, "cannot train on an empty dataset");
    for (const auto& r : ds.records) {
        if (!r.label) throw Error(ErrorCode::invalid_argument, "training data contains an unlabeled record");
    }
}

Label majority(const std::array<double, 2>& w) {
    return w[1] > w[0] ? Label::phishing : Label::legitimate;
}

std::array<Code, kFeatureCount> project(const FeatureVector& x, const FeatureSubset& subset) {
    std::array<Code, kFeatureCount> out{};
    for (std::size_t i = 0; i < subset.size(); ++i) out[i] = x[subset[i]];
    return out;
}

using Sampler = std::function<std::vector<std::size_t>(const std::vector<std::size_t>&)>;

class TreeBuilder {
public:
    TreeBuilder(const PatternTable& table, const TreeOptions& options, const Sampler& sampler)
        : table_(table), options_(options), sampler_(sampler) {}

    std::vector<TreeNode> run() {
        std::vector<std::size_t> cells(table_.keys.size());
        for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = i;
        std::vector<std::size_t> unused(table_.width);
        for (std::size_t i = 0; i < unused.size(); ++i) unused[i] = i;
        build(cells, unused, 0);
        return std::move(nodes_);
    }

private:
    int build(const std::vector<std::size_t>& cells, const std::vector<std::size_t>& unused, std::size_t depth) {
        std::array<double, 2> total{};
        for (auto c : cells) {
            total[0] += table_.weights[c][0];
            total[1] += table_.weights[c][1];
        }
        const int id = static_cast<int>(nodes_.size());
        nodes_.push_back(TreeNode{-1, majority(total), {-1, -1, -1}});

        if (total[0] == 0 || total[1] == 0 || unused.empty()) return id;
        if (options_.max_depth && depth >= *options_.max_depth) return id;

        const auto candidates = sampler_ ? sampler_(unused) : unused;
        const double parent = impurity(total, options_.criterion);
        const double weight = total[0] + total[1];
        double best_gain = kGainEpsilon;
        int best = -1;
        for (auto p : candidates) {
            std::array<std::array<double, 2>, 3> child{};
            for (auto c : cells) {
                auto& slot_w = child[slot(PatternTable::code_at(table_.keys[c], p))];
                slot_w[0] += table_.weights[c][0];
                slot_w[1] += table_.weights[c][1];
            }
            bool admissible = true;
            double remainder = 0.0;
            for (const auto& w : child) {
                const double cw = w[0] + w[1];
                if (cw <= 0) continue;
                if (cw < static_cast<double>(options_.min_leaf)) admissible = false;
                remainder += (cw / weight) * impurity(w, options_.criterion);
            }
            if (!admissible) continue;
            const double gain = parent - remainder;
            if (gain > best_gain) {
                best_gain = gain;
                best = static_cast<int>(p);
            }
        }
        if (best < 0) return id;

        nodes_[static_cast<std::size_t>(id)].feature = best;
        std::vector<std::size_t> remaining;
        for (auto p : unused) {
            if (static_cast<int>(p) != best) remaining.push_back(p);
        }
        std::array<std::vector<std::size_t>, 3> parts;
        for (auto c : cells) {
            const auto& w = table_.weights[c];
            if (w[0] + w[1] > 0) parts[slot(PatternTable::code_at(table_.keys[c], static_cast<std::size_t>(best)))].push_back(c);
        }
        for (std::size_t v = 0; v < 3; ++v) {
            if (parts[v].empty()) continue;
            const int child = build(parts[v], remaining, depth + 1);
            nodes_[static_cast<std::size_t>(id)].children[v] = child;
        }
        return id;
    }

    const PatternTable& table_;
    const TreeOptions& options_;
    const Sampler& sampler_;
    std::vector<TreeNode> nodes_;
};

}  // namespace

std::string_view model_short_name(ModelKind k) {
    switch (k) {
        case ModelKind::naive_bayes: return "nb";
        case ModelKind::decision_tree: return "dt";
        case ModelKind::random_forest: return "rf";
    }
    return "?";
}

std::string_view model_display_name(ModelKind k) {
    switch (k) {
        case ModelKind::naive_bayes: return "NaiveBayes";
        case ModelKind::decision_tree: return "DecisionTree";
        case ModelKind::random_forest: return "RandomForest";
    }
    return "?";
}

std::optional<ModelKind> parse_model_kind(std::string_view name) {
    for (auto k : kAllModelKinds) {
        if (name == model_short_name(k) || name == model_display_name(k)) return k;
    }
    return std::nullopt;
}

ModelConfig TrainedModel::config() const {
    ModelConfig c;
    c.kind = kind;
    if (const auto* nb = std::get_if<NaiveBayesModel>(&parameters)) c.naive_bayes = nb->options;
    if (const auto* dt = std::get_if<DecisionTreeModel>(&parameters)) c.tree = dt->options;
    if (const auto* rf = std::get_if<RandomForestModel>(&parameters)) c.forest = rf->options;
    return c;
}

std::uint32_t PatternTable::key_of(const FeatureVector& v, const FeatureSubset& subset) {
    std::uint32_t key = 0;
    for (std::size_t i = 0; i < subset.size(); ++i) key += static_cast<std::uint32_t>(slot(v[subset[i]])) * kPow3[i];
    return key;
}

Code PatternTable::code_at(std::uint32_t key, std::size_t position) {
    return static_cast<Code>(static_cast<int>((key / kPow3[position]) % 3) - 1);
}

PatternTable build_pattern_table(const Dataset& ds, const FeatureSubset& subset) {
    check_subset(subset);
    std::vector<std::array<double, 2>> dense(kPow3[subset.size()]);
    for (const auto& r : ds.records) {
        dense[PatternTable::key_of(r, subset)][static_cast<std::size_t>(*r.label)] += 1.0;
    }
    PatternTable t;
    t.width = subset.size();
    for (std::uint32_t k = 0; k < dense.size(); ++k) {
        if (dense[k][0] + dense[k][1] > 0) {
            t.keys.push_back(k);
            t.weights.push_back(dense[k]);
        }
    }
    return t;
}

double impurity(const std::array<double, 2>& w, SplitCriterion criterion) {
    const double n = w[0] + w[1];
    if (n <= 0) return 0.0;
    const double p0 = w[0] / n;
    const double p1 = w[1] / n;
    if (criterion == SplitCriterion::gini) return 1.0 - p0 * p0 - p1 * p1;
    double h = 0.0;
    if (p0 > 0) h -= p0 * std::log2(p0);
    if (p1 > 0) h -= p1 * std::log2(p1);
    return h;
}

Label DecisionTreeModel::predict(const std::array<Code, kFeatureCount>& projected) const {
    std::size_t node = 0;
    while (true) {
        const auto& n = nodes[node];
        if (n.feature < 0) return n.label;
        const int child = n.children[slot(projected[static_cast<std::size_t>(n.feature)])];
        if (child < 0) return n.label;
        node = static_cast<std::size_t>(child);
    }
}

DecisionTreeModel grow_tree(const PatternTable& table, const TreeOptions& options, const Sampler& feature_sampler) {
    if (options.min_leaf == 0) throw Error(ErrorCode::invalid_argument, "min_leaf must be >= 1");
    DecisionTreeModel tree;
    tree.options = options;
    tree.nodes = TreeBuilder(table, options, feature_sampler).run();
    return tree;
}

TrainedModel train_naive_bayes(const Dataset& ds, const FeatureSubset& subset, NaiveBayesOptions options) {
    check_subset(subset);
    check_labeled(ds);
    if (options.laplace_alpha < 0) throw Error(ErrorCode::invalid_argument, "laplace_alpha must be >= 0");
    std::array<double, 2> class_n{};
    std::vector<std::array<std::array<double, 3>, 2>> counts(subset.size());
    for (const auto& r : ds.records) {
        const auto l = static_cast<std::size_t>(*r.label);
        class_n[l] += 1.0;
        for (std::size_t i = 0; i < subset.size(); ++i) counts[i][l][slot(r[subset[i]])] += 1.0;
    }
    if (class_n[0] == 0 || class_n[1] == 0) {
        throw Error(ErrorCode::one_class_dataset, "naive Bayes needs both classes present");
    }

    NaiveBayesModel nb;
    nb.options = options;
    const double n = class_n[0] + class_n[1];
    nb.prior = {class_n[0] / n, class_n[1] / n};
    nb.conditional = counts;
    for (auto& per_label : nb.conditional) {
        for (std::size_t l = 0; l < 2; ++l) {
            for (auto& p : per_label[l]) p = (p + options.laplace_alpha) / (class_n[l] + 3.0 * options.laplace_alpha);
        }
    }
    TrainedModel m;
    m.kind = ModelKind::naive_bayes;
    m.feature_subset = subset;
    m.parameters = std::move(nb);
    return m;
}

TrainedModel train_decision_tree(const Dataset& ds, const FeatureSubset& subset, TreeOptions options) {
    check_subset(subset);
    check_labeled(ds);
    TrainedModel m;
    m.kind = ModelKind::decision_tree;
    m.feature_subset = subset;
    m.parameters = grow_tree(build_pattern_table(ds, subset), options);
    return m;
}

TrainedModel train_random_forest(const Dataset& ds, const FeatureSubset& subset, ForestOptions options,
                                 std::uint64_t seed) {
    check_subset(subset);
    check_labeled(ds);
    if (options.n_trees == 0) throw Error(ErrorCode::invalid_argument, "n_trees must be >= 1");
    const std::size_t width = subset.size();
    const std::size_t per_split =
        options.features_per_split.value_or(std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(width)))));
    if (per_split == 0) throw Error(ErrorCode::invalid_argument, "features_per_split must be >= 1");

    const std::size_t n = ds.size();
    std::vector<std::uint32_t> row_cell(n);
    for (std::size_t i = 0; i < n; ++i) {
        row_cell[i] = PatternTable::key_of(ds.records[i], subset) * 2 + static_cast<std::uint32_t>(*ds.records[i].label);
    }

    RandomForestModel forest;
    forest.options = options;
    forest.trees.reserve(options.n_trees);
    std::vector<double> dense(kPow3[width] * 2);
    for (std::size_t t = 0; t < options.n_trees; ++t) {
        Rng rng = Rng::derive(seed, t);
        std::fill(dense.begin(), dense.end(), 0.0);
        if (options.bootstrap) {
            for (std::size_t i = 0; i < n; ++i) dense[row_cell[rng.below(n)]] += 1.0;
        } else {
            for (auto c : row_cell) dense[c] += 1.0;
        }
        PatternTable table;
        table.width = width;
        for (std::uint32_t k = 0; k < kPow3[width]; ++k) {
            if (dense[2 * k] + dense[2 * k + 1] > 0) {
                table.keys.push_back(k);
                table.weights.push_back({dense[2 * k], dense[2 * k + 1]});
            }
        }
        const Sampler sampler = [&rng, per_split](const std::vector<std::size_t>& unused) {
            if (per_split >= unused.size()) return unused;
            auto pool = unused;
            for (std::size_t i = 0; i < per_split; ++i) {
                std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
            }
            pool.resize(per_split);
            std::sort(pool.begin(), pool.end());
            return pool;
        };
        forest.trees.push_back(grow_tree(table, options.tree, sampler));
    }

    TrainedModel m;
    m.kind = ModelKind::random_forest;
    m.feature_subset = subset;
    m.seed = seed;
    m.parameters = std::move(forest);
    return m;
}

TrainedModel train_model(const Dataset& ds, const FeatureSubset& subset, const ModelConfig& config,
                         std::uint64_t seed) {
    TrainedModel m;
    switch (config.kind) {
        case ModelKind::naive_bayes: m = train_naive_bayes(ds, subset, config.naive_bayes); break;
        case ModelKind::decision_tree: m = train_decision_tree(ds, subset, config.tree); break;
        case ModelKind::random_forest: m = train_random_forest(ds, subset, config.forest, seed); break;
    }
    m.seed = seed;
    return m;
}

Label predict(const TrainedModel& model, const FeatureVector& x) {
    const auto projected = project(x, model.feature_subset);
    if (const auto* nb = std::get_if<NaiveBayesModel>(&model.parameters)) {
        std::array<double, 2> score{std::log(nb->prior[0]), std::log(nb->prior[1])};
        for (std::size_t i = 0; i < model.feature_subset.size(); ++i) {
            for (std::size_t l = 0; l < 2; ++l) score[l] += std::log(nb->conditional[i][l][slot(projected[i])]);
        }
        // Ties, including numerically indistinguishable ones, go to F.
        return score[1] - score[0] > 1e-9 ? Label::phishing : Label::legitimate;
    }
    if (const auto* dt = std::get_if<DecisionTreeModel>(&model.parameters)) {
        return dt->predict(projected);
    }
    const auto& rf = std::get<RandomForestModel>(model.parameters);
    std::size_t phishing_votes = 0;
    for (const auto& tree : rf.trees) phishing_votes += tree.predict(projected) == Label::phishing;
    return 2 * phishing_votes > rf.trees.size() ? Label::phishing : Label::legitimate;
}

}  // namespace bdi
