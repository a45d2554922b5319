#include "bdi/classifiers.hpp"
#include "bdi/domains.hpp"
#include "bdi/encode.hpp"
#include "bdi/error.hpp"
#include "bdi/evaluation.hpp"
#include "bdi/extract.hpp"
#include "bdi/scanner.hpp"
#include "bdi/select.hpp"
#include "bdi/snapshot.hpp"
#include "bdi/synthetic.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace bdi;

constexpr int kExitError = 1;
constexpr int kExitPhishing = 3;

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = std::string(trim(item));
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot write " + path);
    out << text;
    if (!out) throw Error(ErrorCode::io, "failed writing " + path);
}

std::string metric_line(const MetricsReport& m) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "TPR %.4f  FPR %.4f  Precision %.4f  Recall %.4f  F %.4f  Accuracy %.4f  train %.4fs  predict %.4fs",
                  m.tpr, m.fpr, m.precision, m.recall, m.f_measure, m.accuracy, m.train_time, m.predict_time);
    return buf;
}

struct PolicyArgs {
    double timeout_s = 10;
    double total_timeout_s = 30;
    int max_redirects = 10;
    std::vector<std::string> resolve;
    bool insecure_tls = false;
    bool verify_tls = false;

    void add_to(CLI::App* app) {
        app->add_option("--timeout", timeout_s, "Connect timeout in seconds")->capture_default_str();
        app->add_option("--total-timeout", total_timeout_s, "Per-request timeout in seconds")->capture_default_str();
        app->add_option("--max-redirects", max_redirects)->capture_default_str();
        app->add_option("--resolve", resolve, "Pin host to address, HOST:ADDR (repeatable)");
        auto* insecure = app->add_flag("--insecure-tls", insecure_tls, "Do not verify certificates (default)");
        app->add_flag("--verify-tls", verify_tls, "Verify certificate chain and host name")->excludes(insecure);
    }

    FetchPolicy policy() const {
        FetchPolicy p;
        p.connect_timeout = std::chrono::milliseconds(static_cast<long long>(timeout_s * 1000));
        p.total_timeout = std::chrono::milliseconds(static_cast<long long>(total_timeout_s * 1000));
        p.max_redirects = max_redirects;
        p.verify_tls = verify_tls && !insecure_tls;
        for (const auto& r : resolve) {
            const auto colon = r.find(':');
            if (colon == std::string::npos || colon == 0 || colon + 1 == r.size()) {
                throw Error(ErrorCode::invalid_argument, "--resolve expects HOST:ADDR, got '" + r + "'");
            }
            p.resolve_overrides[to_lower_ascii(r.substr(0, colon))] = r.substr(colon + 1);
        }
        p.validate();
        return p;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Brand-domain phishing feature toolkit"};
    app.require_subcommand(1);
    std::string psl = BDI_DEFAULT_PSL;

    // snapshot
    auto* snap_cmd = app.add_subcommand("snapshot", "Fetch pages and store offline snapshots");
    std::vector<std::string> snap_urls;
    std::string snap_out;
    std::size_t snap_parallel = 8;
    PolicyArgs snap_policy;
    snap_cmd->add_option("urls", snap_urls, "URLs to fetch")->required();
    snap_cmd->add_option("--out", snap_out, "Snapshot directory")->required();
    snap_cmd->add_option("--parallel", snap_parallel, "Concurrent fetches")->capture_default_str();
    snap_policy.add_to(snap_cmd);

    // extract
    auto* extract_cmd = app.add_subcommand("extract", "Encode snapshots into the feature CSV");
    std::string extract_in;
    std::string extract_out;
    std::string extract_label;
    std::string logo_keywords = "logo";
    std::size_t min_present = 3;
    extract_cmd->add_option("input", extract_in, "Snapshot file or directory")->required();
    extract_cmd->add_option("--psl", psl, "Public suffix list")->capture_default_str();
    extract_cmd->add_option("--label", extract_label, "Label for every row: T (phishing) or F")->required();
    extract_cmd->add_option("--logo-keywords", logo_keywords)->capture_default_str();
    extract_cmd->add_option("--min-present", min_present, "Keep rows with at least this many features")
        ->capture_default_str();
    extract_cmd->add_option("--out", extract_out, "Feature CSV (default stdout)");

    // rank
    auto* rank_cmd = app.add_subcommand("rank", "Score features with the four attribute evaluators");
    std::string rank_data;
    std::string rank_out;
    ReliefOptions relief;
    rank_cmd->add_option("--data", rank_data)->required();
    rank_cmd->add_option("--relieff-k", relief.neighbors_k)->capture_default_str();
    rank_cmd->add_option("--relieff-m", relief.sample_m, "Sampled instances (default: all)");
    rank_cmd->add_option("--seed", relief.seed)->capture_default_str();
    rank_cmd->add_option("--out", rank_out, "ranking.json (default: table on stdout)");

    // train
    auto* train_cmd = app.add_subcommand("train", "Train a classifier");
    std::string train_data;
    std::string train_kind = "rf";
    std::string train_features = "FAD,LD,CN,MCLD,CD";
    std::string train_out;
    std::uint64_t train_seed = 42;
    ModelConfig config;
    std::string criterion = "entropy";
    std::size_t max_depth = 0;
    train_cmd->add_option("--data", train_data)->required();
    train_cmd->add_option("--model", train_kind, "rf, dt or nb")->capture_default_str();
    train_cmd->add_option("--features", train_features)->capture_default_str();
    train_cmd->add_option("--out", train_out)->required();
    train_cmd->add_option("--seed", train_seed)->capture_default_str();
    train_cmd->add_option("--trees", config.forest.n_trees)->capture_default_str();
    train_cmd->add_option("--features-per-split", config.forest.features_per_split);
    train_cmd->add_option("--max-depth", max_depth, "0 = unlimited")->capture_default_str();
    train_cmd->add_option("--min-leaf", config.tree.min_leaf)->capture_default_str();
    train_cmd->add_option("--criterion", criterion, "entropy or gini")->capture_default_str();
    train_cmd->add_option("--alpha", config.naive_bayes.laplace_alpha, "Laplace smoothing")->capture_default_str();

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate a model's configuration on a dataset");
    std::string eval_data;
    std::string eval_model;
    std::string eval_protocol = "cv10";
    std::uint64_t eval_seed = 42;
    eval_cmd->add_option("--data", eval_data)->required();
    eval_cmd->add_option("--model-file", eval_model)->required();
    eval_cmd->add_option("--protocol", eval_protocol, "cvK, holdoutP, or apply (score the saved model as is)")
        ->capture_default_str();
    eval_cmd->add_option("--seed", eval_seed)->capture_default_str();

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "Evaluate every feature subset with every model");
    std::string sweep_data;
    std::string sweep_models = "rf,dt,nb";
    std::string sweep_protocol = "cv10";
    std::string sweep_out;
    std::uint64_t sweep_seed = 42;
    std::size_t sweep_threads = 0;
    bool sweep_no_timing = false;
    sweep_cmd->add_option("--data", sweep_data)->required();
    sweep_cmd->add_option("--models", sweep_models)->capture_default_str();
    sweep_cmd->add_option("--protocol", sweep_protocol)->capture_default_str();
    sweep_cmd->add_option("--out", sweep_out, "sweep.csv (default stdout)");
    sweep_cmd->add_option("--seed", sweep_seed)->capture_default_str();
    sweep_cmd->add_option("--threads", sweep_threads, "0 = all cores")->capture_default_str();
    sweep_cmd->add_flag("--no-timing", sweep_no_timing, "Leave timing columns empty (reproducible output)");

    // scan
    auto* scan_cmd = app.add_subcommand("scan", "Classify a live URL or a stored snapshot");
    std::string scan_target;
    std::string scan_model = BDI_DEFAULT_MODEL;
    bool scan_json = false;
    bool scan_offline_flag = false;
    PolicyArgs scan_policy;
    scan_cmd->add_option("target", scan_target, "URL, or snapshot file with --offline")->required();
    scan_cmd->add_option("--model-file", scan_model)->capture_default_str();
    scan_cmd->add_option("--psl", psl)->capture_default_str();
    scan_cmd->add_flag("--json", scan_json);
    scan_cmd->add_flag("--offline", scan_offline_flag, "Target is a snapshot file");
    scan_policy.add_to(scan_cmd);

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic feature CSV");
    std::size_t synth_rows = 10000;
    std::uint64_t synth_seed = 42;
    std::string synth_kind = "standard";
    std::string synth_out;
    synth_cmd->add_option("--rows", synth_rows)->capture_default_str();
    synth_cmd->add_option("--seed", synth_seed)->capture_default_str();
    synth_cmd->add_option("--generator", synth_kind, "standard, noise, or informative:<FEATURE>")
        ->capture_default_str();
    synth_cmd->add_option("--out", synth_out, "Feature CSV (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*snap_cmd) {
            const auto policy = snap_policy.policy();
            if (!std::filesystem::is_directory(snap_out)) std::filesystem::create_directories(snap_out);
            const auto snaps = fetch_batch(snap_urls, policy, snap_parallel);
            int failures = 0;
            for (const auto& s : snaps) {
                const auto path = save_snapshot(s, snap_out);
                const bool failed = s.status_code == 0;
                failures += failed;
                std::cout << (failed ? "FAIL " : "ok   ") << s.requested_url << " -> " << path.string() << "\n";
                for (const auto& n : s.fetch_errors) std::cout << "     " << n.stage << ": " << n.message << "\n";
            }
            return failures == static_cast<int>(snaps.size()) ? kExitError : 0;
        }

        if (*extract_cmd) {
            const auto rules = load_suffix_rules(psl);
            const auto label = parse_label(extract_label);
            if (!label) throw Error(ErrorCode::invalid_argument, "--label must be T or F");
            const auto keywords = split_list(logo_keywords);
            std::vector<FeatureVector> rows;
            for (const auto& path : list_snapshot_files(extract_in)) {
                const auto snap = load_snapshot(path);
                const std::string url = snap.final_url.empty() ? snap.requested_url : snap.final_url;
                DomainParts parts;
                try {
                    parts = parse_url_domain(url, rules);
                } catch (const Error& e) {
                    std::cerr << "skip " << path.string() << ": " << e.what() << "\n";
                    continue;
                }
                const auto ids = extract_all(snap, rules, keywords);
                rows.push_back(encode_vector(ids, parts, label, snap.requested_url));
            }
            std::vector<std::string> warnings;
            const auto ds = build_dataset(std::move(rows), min_present, &warnings);
            for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
            std::cerr << ds.provenance << "\n";
            write_text(extract_out, feature_csv_string(ds));
            return 0;
        }

        if (*rank_cmd) {
            const auto ds = read_feature_csv(rank_data);
            const auto report = rank_report(ds, relief);
            if (rank_out.empty()) {
                std::cout << ranking_table(report);
            } else {
                write_text(rank_out, ranking_json(report));
            }
            return 0;
        }

        if (*train_cmd) {
            const auto kind = parse_model_kind(train_kind);
            if (!kind) throw Error(ErrorCode::invalid_argument, "unknown model '" + train_kind + "'");
            config.kind = *kind;
            if (criterion == "gini") {
                config.tree.criterion = SplitCriterion::gini;
            } else if (criterion != "entropy") {
                throw Error(ErrorCode::invalid_argument, "criterion must be entropy or gini");
            }
            if (max_depth > 0) config.tree.max_depth = max_depth;
            config.forest.tree = config.tree;
            const auto ds = read_feature_csv(train_data);
            const auto model = train_model(ds, parse_feature_list(train_features), config, train_seed);
            save_model(model, train_out);
            std::cout << model_id(model) << "\n";
            return 0;
        }

        if (*eval_cmd) {
            const auto ds = read_feature_csv(eval_data);
            const auto model = load_model(eval_model);
            MetricsReport m;
            if (eval_protocol == "apply") {
                m = compute_metrics(evaluate_counts(model, ds));
            } else {
                const auto protocol = parse_protocol(eval_protocol);
                if (!protocol) throw Error(ErrorCode::invalid_argument, "unknown protocol '" + eval_protocol + "'");
                m = run_protocol(ds, model.feature_subset, model.config(), *protocol, eval_seed, model.seed);
            }
            std::cout << model_display_name(model.kind) << " [" << join_features(model.feature_subset) << "] "
                      << eval_protocol << "\n"
                      << metric_line(m) << "\n"
                      << "TP " << m.counts.tp << "  FN " << m.counts.fn << "  TN " << m.counts.tn << "  FP "
                      << m.counts.fp << "\n";
            return 0;
        }

        if (*sweep_cmd) {
            const auto ds = read_feature_csv(sweep_data);
            std::vector<ModelKind> kinds;
            for (const auto& name : split_list(sweep_models)) {
                const auto k = parse_model_kind(name);
                if (!k) throw Error(ErrorCode::invalid_argument, "unknown model '" + name + "'");
                kinds.push_back(*k);
            }
            const auto protocol = parse_protocol(sweep_protocol);
            if (!protocol) throw Error(ErrorCode::invalid_argument, "unknown protocol '" + sweep_protocol + "'");
            SweepOptions options;
            options.threads = sweep_threads;
            const auto report = sweep_combinations(ds, kinds, *protocol, sweep_seed, options);
            write_text(sweep_out, sweep_csv(report, !sweep_no_timing));
            if (!sweep_out.empty()) {
                for (const auto& row : report.rows) {
                    std::printf("%-22s %-13s %.4f\n", join_features(row.subset, "+").c_str(),
                                std::string(model_display_name(row.best_model)).c_str(), row.best_accuracy);
                }
            }
            return 0;
        }

        if (*scan_cmd) {
            const auto rules = load_suffix_rules(psl);
            const auto model = load_model(scan_model);
            const auto result = scan_offline_flag
                                    ? scan_offline(scan_target, model, rules)
                                    : scan(scan_target, model, scan_policy.policy(), rules);
            std::cout << (scan_json ? scan_result_json(result) : scan_result_text(result));
            return result.verdict == Label::phishing ? kExitPhishing : 0;
        }

        if (*synth_cmd) {
            SyntheticSpec spec;
            if (synth_kind == "standard") {
                spec = SyntheticSpec::standard();
            } else if (synth_kind == "noise") {
                spec = SyntheticSpec::noise();
            } else if (synth_kind.starts_with("informative:")) {
                const auto f = parse_feature(synth_kind.substr(12));
                if (!f) throw Error(ErrorCode::invalid_argument, "unknown feature in '" + synth_kind + "'");
                spec = SyntheticSpec::single_informative(*f);
            } else {
                throw Error(ErrorCode::invalid_argument, "unknown generator '" + synth_kind + "'");
            }
            write_text(synth_out, feature_csv_string(generate_synthetic(spec, synth_rows, synth_seed)));
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return 0;
}
