#include "bdi/classifiers.hpp"
#include "bdi/codec.hpp"
#include "bdi/error.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace bdi {

namespace {

using ordered_json = nlohmann::ordered_json;

[[noreturn]] void malformed(const std::string& what) {
    throw Error(ErrorCode::malformed_model, "malformed model: " + what);
}

std::string_view criterion_name(SplitCriterion c) {
    return c == SplitCriterion::gini ? "gini" : "entropy";
}

ordered_json tree_options_json(const TreeOptions& o) {
    ordered_json j;
    j["max_depth"] = o.max_depth ? ordered_json(*o.max_depth) : ordered_json(nullptr);
    j["min_leaf"] = o.min_leaf;
    j["criterion"] = std::string(criterion_name(o.criterion));
    return j;
}

TreeOptions tree_options_from(const ordered_json& j) {
    TreeOptions o;
    if (!j.is_object()) malformed("tree options must be an object");
    if (j.contains("max_depth") && !j["max_depth"].is_null()) o.max_depth = j["max_depth"].get<std::size_t>();
    o.min_leaf = j.at("min_leaf").get<std::size_t>();
    const auto crit = j.at("criterion").get<std::string>();
    if (crit == "gini") {
        o.criterion = SplitCriterion::gini;
    } else if (crit == "entropy") {
        o.criterion = SplitCriterion::entropy;
    } else {
        malformed("unknown criterion '" + crit + "'");
    }
    return o;
}

ordered_json nodes_json(const DecisionTreeModel& tree) {
    auto arr = ordered_json::array();
    for (const auto& n : tree.nodes) {
        arr.push_back({n.feature, std::string(1, label_char(n.label)), n.children[0], n.children[1], n.children[2]});
    }
    return arr;
}

DecisionTreeModel tree_from(const ordered_json& nodes, const TreeOptions& options, std::size_t width) {
    if (!nodes.is_array() || nodes.empty()) malformed("tree nodes must be a non-empty array");
    DecisionTreeModel tree;
    tree.options = options;
    const auto count = static_cast<int>(nodes.size());
    for (const auto& n : nodes) {
        if (!n.is_array() || n.size() != 5) malformed("tree node must be [feature, label, child-1, child0, child1]");
        TreeNode node;
        node.feature = n[0].get<int>();
        const auto label = parse_label(n[1].get<std::string>());
        if (!label) malformed("tree node label must be T or F");
        node.label = *label;
        for (std::size_t v = 0; v < 3; ++v) node.children[v] = n[2 + v].get<int>();
        if (node.feature >= static_cast<int>(width)) malformed("tree node feature out of range");
        for (int c : node.children) {
            if (c >= count || (c >= 0 && c <= static_cast<int>(tree.nodes.size()))) {
                malformed("tree child index out of range");
            }
        }
        tree.nodes.push_back(node);
    }
    return tree;
}

}  // namespace

std::string model_to_json(const TrainedModel& model) {
    ordered_json j;
    j["format_version"] = model.format_version;
    j["kind"] = std::string(model_short_name(model.kind));
    auto subset = ordered_json::array();
    for (auto f : model.feature_subset) subset.push_back(std::string(feature_name(f)));
    j["feature_subset"] = std::move(subset);
    j["seed"] = model.seed;

    ordered_json params;
    if (const auto* nb = std::get_if<NaiveBayesModel>(&model.parameters)) {
        params["laplace_alpha"] = nb->options.laplace_alpha;
        params["prior"] = {{"F", nb->prior[0]}, {"T", nb->prior[1]}};
        ordered_json cond;
        for (std::size_t i = 0; i < model.feature_subset.size(); ++i) {
            const auto& c = nb->conditional[i];
            cond[std::string(feature_name(model.feature_subset[i]))] = {
                {"F", {c[0][0], c[0][1], c[0][2]}}, {"T", {c[1][0], c[1][1], c[1][2]}}};
        }
        params["conditional"] = std::move(cond);
    } else if (const auto* dt = std::get_if<DecisionTreeModel>(&model.parameters)) {
        params["tree"] = tree_options_json(dt->options);
        params["nodes"] = nodes_json(*dt);
    } else {
        const auto& rf = std::get<RandomForestModel>(model.parameters);
        params["n_trees"] = rf.options.n_trees;
        params["features_per_split"] =
            rf.options.features_per_split ? ordered_json(*rf.options.features_per_split) : ordered_json(nullptr);
        params["bootstrap"] = rf.options.bootstrap;
        params["tree"] = tree_options_json(rf.options.tree);
        auto trees = ordered_json::array();
        for (const auto& t : rf.trees) trees.push_back(nodes_json(t));
        params["trees"] = std::move(trees);
    }
    j["parameters"] = std::move(params);
    return j.dump() + "\n";
}

TrainedModel model_from_json(std::string_view text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        malformed(e.what());
    }
    if (!j.is_object()) malformed("top level must be an object");
    if (!j.contains("format_version") || !j["format_version"].is_number_integer()) malformed("missing format_version");
    const int version = j["format_version"].get<int>();
    if (version != kModelFormatVersion) {
        throw Error(ErrorCode::version_error, "unsupported model format_version " + std::to_string(version) +
                                                  " (expected " + std::to_string(kModelFormatVersion) + ")");
    }

    try {
        TrainedModel m;
        m.format_version = version;
        const auto kind = parse_model_kind(j.at("kind").get<std::string>());
        if (!kind) malformed("unknown model kind");
        m.kind = *kind;
        std::string names;
        for (const auto& f : j.at("feature_subset")) names += f.get<std::string>() + ",";
        m.feature_subset = parse_feature_list(names);
        m.seed = j.at("seed").get<std::uint64_t>();
        const std::size_t width = m.feature_subset.size();

        const auto& p = j.at("parameters");
        switch (m.kind) {
            case ModelKind::naive_bayes: {
                NaiveBayesModel nb;
                nb.options.laplace_alpha = p.at("laplace_alpha").get<double>();
                nb.prior = {p.at("prior").at("F").get<double>(), p.at("prior").at("T").get<double>()};
                for (auto f : m.feature_subset) {
                    const auto& c = p.at("conditional").at(std::string(feature_name(f)));
                    std::array<std::array<double, 3>, 2> table{};
                    for (std::size_t l = 0; l < 2; ++l) {
                        const auto& row = c.at(l == 0 ? "F" : "T");
                        if (!row.is_array() || row.size() != 3) malformed("conditional rows need 3 values");
                        for (std::size_t v = 0; v < 3; ++v) table[l][v] = row[v].get<double>();
                    }
                    nb.conditional.push_back(table);
                }
                m.parameters = std::move(nb);
                break;
            }
            case ModelKind::decision_tree:
                m.parameters = tree_from(p.at("nodes"), tree_options_from(p.at("tree")), width);
                break;
            case ModelKind::random_forest: {
                RandomForestModel rf;
                rf.options.n_trees = p.at("n_trees").get<std::size_t>();
                if (!p.at("features_per_split").is_null()) {
                    rf.options.features_per_split = p["features_per_split"].get<std::size_t>();
                }
                rf.options.bootstrap = p.at("bootstrap").get<bool>();
                rf.options.tree = tree_options_from(p.at("tree"));
                for (const auto& t : p.at("trees")) rf.trees.push_back(tree_from(t, rf.options.tree, width));
                if (rf.trees.size() != rf.options.n_trees || rf.trees.empty()) malformed("tree count mismatch");
                m.parameters = std::move(rf);
                break;
            }
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        malformed(e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::malformed_model) throw;
        malformed(e.what());
    }
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
    const auto text = model_to_json(model);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot write model: " + path.string());
    out << text;
    out.close();
    if (!out) throw Error(ErrorCode::io, "failed writing model: " + path.string());
}

TrainedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open model: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return model_from_json(buf.str());
}

std::string model_id(const TrainedModel& model) {
    return std::string(model_short_name(model.kind)) + "-" + sha256_hex(model_to_json(model)).substr(0, 12);
}

}  // namespace bdi
