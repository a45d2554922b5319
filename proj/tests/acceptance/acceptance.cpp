// Acceptance checks. Prints one line per criterion and exits nonzero when
// any of them fails.

#include "bdi/classifiers.hpp"
#include "bdi/encode.hpp"
#include "bdi/error.hpp"
#include "bdi/evaluation.hpp"
#include "bdi/extract.hpp"
#include "bdi/metrics.hpp"
#include "bdi/scanner.hpp"
#include "bdi/select.hpp"
#include "bdi/synthetic.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>

using namespace bdi;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void fail(const std::string& why) {
        if (pass) detail = why;
        pass = false;
    }
};

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

std::array<Code, kFeatureCount> codes_of_key(int key) {
    std::array<Code, kFeatureCount> codes{};
    for (auto& c : codes) {
        c = *code_from_int(key % 3 - 1);
        key /= 3;
    }
    return codes;
}

// Expected code from the identified domain, derived without encode_feature.
Code expected_code(const std::optional<std::string>& id, const DomainParts& parts) {
    if (!id) return Code::absent;
    const auto norm = [](std::string s) {
        for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        while (!s.empty() && s.back() == '.') s.pop_back();
        while (s.rfind("www.", 0) == 0) s.erase(0, 4);
        return s;
    };
    const auto v = norm(*id);
    return v == norm(parts.full_domain) || v == norm(parts.root_domain) ? Code::match : Code::mismatch;
}

Outcome encoding_truth_table() {
    Outcome o;
    const auto& rules = fixtures::psl();
    for (int key = 0; key < 243; ++key) {
        const auto codes = codes_of_key(key);
        const auto snap = fixtures::snapshot_for_codes(codes);
        const auto parts = parse_url_domain(snap.final_url, rules);
        const auto ids = extract_all(snap, rules);
        const auto v = encode_vector(ids, parts, std::nullopt, snap.final_url);
        for (auto f : kAllFeatures) {
            if (v[f] != expected_code(identified_for(ids, f), parts) || v[f] != codes[index_of(f)]) {
                o.fail("case " + std::to_string(key) + " feature " + std::string(feature_name(f)));
            }
        }
    }
    if (o.pass) o.detail = "243 cases";
    return o;
}

Outcome walkthrough() {
    Outcome o;
    const auto& rules = fixtures::psl();
    const auto snap = fixtures::facebook_walkthrough();
    const auto ids = extract_all(snap, rules);
    for (auto f : kAllFeatures) {
        const auto id = identified_for(ids, f);
        if (id != std::optional<std::string>("facebook.com")) {
            o.fail(std::string(feature_name(f)) + " identified as " + id.value_or("(absent)"));
        }
    }
    const auto v = encode_vector(ids, parse_url_domain(snap.final_url, rules), std::nullopt, snap.final_url);
    for (auto c : v.codes) {
        if (c != Code::match) o.fail("vector is not (1,1,1,1,1)");
    }
    const auto gh = fixtures::github_facebook_variant();
    const auto w = encode_vector(extract_all(gh, rules), parse_url_domain(gh.final_url, rules), std::nullopt,
                                 gh.final_url);
    if (w[Feature::cn] != Code::mismatch) o.fail("github-facebook.com variant does not give CN = -1");
    if (o.pass) o.detail = "(1,1,1,1,1); variant CN = -1";
    return o;
}

Outcome metric_formulas() {
    Outcome o;
    Rng rng(3);
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
        ConfusionCounts c{rng.below(1000), rng.below(1000), rng.below(1000), rng.below(1000)};
        if (c.total() == 0) c.tp = 1;
        const auto m = compute_metrics(c);
        const auto d = oracle::metrics(c);
        for (auto [a, b] : {std::pair{m.tpr, d.tpr}, {m.fpr, d.fpr}, {m.precision, d.precision}, {m.recall, d.recall},
                            {m.f_measure, d.f}, {m.accuracy, d.accuracy}}) {
            worst = std::max(worst, std::abs(a - b));
        }
        if (m.tpr != m.recall) o.fail("TPR differs from recall");
    }
    if (worst > 1e-12) o.fail(fmt("max deviation %.3g", worst));
    if (o.pass) o.detail = fmt("1000 samples, max deviation %.3g", worst);
    return o;
}

Outcome evaluator_oracles() {
    Outcome o;
    Rng rng(44);
    double worst = 0;
    for (int iter = 0; iter < 200; ++iter) {
        const auto ds = oracle::random_dataset(rng, 2 + rng.below(11));
        ReliefOptions ro;
        ro.neighbors_k = 1 + rng.below(4);
        ro.sample_m = 1 + rng.below(12);
        ro.seed = rng.next();
        const auto corr = correlation_scores(ds);
        const auto ig = info_gain_scores(ds);
        const auto gr = gain_ratio_scores(ds);
        const auto rf = relieff_scores(ds, ro);
        const auto want_rf = oracle::relieff(ds, ro.neighbors_k, relieff_sample(ds.size(), ro));
        for (auto f : kAllFeatures) {
            worst = std::max({worst, std::abs(corr.score(f) - oracle::abs_pearson(ds, f)),
                              std::abs(ig.score(f) - oracle::info_gain(ds, f)),
                              std::abs(gr.score(f) - oracle::gain_ratio(ds, f))});
            if (rf.score(f) != want_rf[index_of(f)]) o.fail("ReliefF differs on dataset " + std::to_string(iter));
        }
    }
    if (worst > 1e-9) o.fail(fmt("max deviation %.3g", worst));
    if (o.pass) o.detail = fmt("200 datasets, max deviation %.3g, ReliefF exact", worst);
    return o;
}

Outcome partition_law() {
    Outcome o;
    Rng rng(5);
    std::size_t checked = 0;
    for (int iter = 0; iter < 100; ++iter) {
        const auto n = 10 + rng.below(200);
        const auto ds = oracle::random_dataset(rng, n);
        for (std::size_t k : {2u, 5u, 10u}) {
            for (bool stratified : {false, true}) {
                if (stratified && std::min(ds.count(Label::phishing), ds.count(Label::legitimate)) < k) continue;
                const auto folds = make_folds(ds, k, stratified, rng.next());
                std::vector<int> seen(n, 0);
                std::size_t lo = n, hi = 0;
                for (const auto& f : folds) {
                    for (auto i : f) ++seen[i];
                    lo = std::min(lo, f.size());
                    hi = std::max(hi, f.size());
                }
                if (folds.size() != k) o.fail("wrong fold count");
                for (auto s : seen) {
                    if (s != 1) o.fail("record not in exactly one fold");
                }
                if (hi - lo > 1) o.fail("fold sizes differ by more than one");
                ++checked;
            }
        }
    }
    if (o.pass) o.detail = std::to_string(checked) + " partitions";
    return o;
}

Outcome synthetic_reproduction() {
    Outcome o;
    const auto spec = SyntheticSpec::standard();
    const auto ds = generate_synthetic(spec, 10000, 606);
    ModelConfig config;
    config.forest.n_trees = 50;
    double best_single = 0, worst_gap = 0;
    for (auto f : kAllFeatures) {
        const double optimum = bayes_optimal_accuracy(spec, {f});
        for (auto kind : kAllModelKinds) {
            config.kind = kind;
            const double acc = cross_validate(ds, {f}, config, 10, true, 7).accuracy;
            best_single = std::max(best_single, acc);
            worst_gap = std::max(worst_gap, std::abs(acc - optimum));
            if (std::abs(acc - optimum) > 0.03) {
                o.fail(std::string(feature_name(f)) + " " + std::string(model_display_name(kind)) +
                       fmt(" accuracy %.4f vs optimum %.4f", acc, optimum));
            }
        }
    }
    double best_by_size[6] = {};
    SweepOptions options;
    options.base = config;
    for (const auto& s : all_subsets()) {
        if (s.size() == 3 || s.size() == 5) options.subsets.push_back(s);
    }
    const auto report = sweep_combinations(ds, {ModelKind::random_forest, ModelKind::decision_tree,
                                                ModelKind::naive_bayes},
                                           *parse_protocol("cv10"), 7, options);
    for (const auto& row : report.rows) {
        best_by_size[row.subset.size()] = std::max(best_by_size[row.subset.size()], row.best_accuracy);
    }
    if (best_by_size[3] < best_single + 0.05) o.fail(fmt("best 3-feature %.4f vs single %.4f", best_by_size[3], best_single));
    if (best_by_size[5] < best_single + 0.05) o.fail(fmt("best 5-feature %.4f vs single %.4f", best_by_size[5], best_single));
    if (o.pass) {
        o.detail = fmt("single within %.4f of optimum; best single %.4f", worst_gap, best_single) +
                   fmt(", best 3 %.4f, best 5 %.4f", best_by_size[3], best_by_size[5]);
    }
    return o;
}

Outcome sweep_completeness() {
    Outcome o;
    const auto ds = generate_synthetic(SyntheticSpec::standard(), 10000, 707);
    const std::vector<ModelKind> kinds = {ModelKind::random_forest, ModelKind::decision_tree, ModelKind::naive_bayes};
    const auto protocol = *parse_protocol("cv10");
    const auto start = std::chrono::steady_clock::now();
    const auto report = sweep_combinations(ds, kinds, protocol, 11);
    const double first = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (report.rows.size() != 31) o.fail(std::to_string(report.rows.size()) + " rows");
    std::set<std::string> subsets;
    for (const auto& row : report.rows) {
        subsets.insert(join_features(row.subset));
        if (row.per_model.size() != kinds.size()) o.fail("row without every model");
        std::size_t at_best = 0;
        for (const auto& e : row.per_model) at_best += e.kind == row.best_model;
        if (at_best != 1) o.fail("best model not unique");
    }
    if (subsets.size() != 31) o.fail("duplicate subsets");
    const auto again = sweep_combinations(ds, kinds, protocol, 11);
    if (sweep_csv(again, false) != sweep_csv(report, false)) o.fail("rerun differs");
    if (o.pass) o.detail = fmt("31 rows x 3 models, first sweep %.2f s, rerun identical", first);
    return o;
}

Outcome forest_degenerates() {
    Outcome o;
    const auto ds = generate_synthetic(SyntheticSpec::standard(), 2000, 808);
    const FeatureSubset full(kAllFeatures.begin(), kAllFeatures.end());
    ForestOptions opt;
    opt.n_trees = 1;
    opt.bootstrap = false;
    opt.features_per_split = full.size();
    const auto rf = train_random_forest(ds, full, opt, 9);
    const auto dt = train_decision_tree(ds, full, opt.tree);
    std::size_t agree = 0;
    for (const auto& x : oracle::all_inputs()) agree += predict(rf, x) == predict(dt, x);
    if (agree != 243) o.fail(std::to_string(243 - agree) + " of 243 inputs differ");
    if (o.pass) o.detail = "243 of 243 inputs agree";
    return o;
}

Outcome model_round_trip() {
    Outcome o;
    const auto ds = generate_synthetic(SyntheticSpec::standard(), 2000, 909);
    fixtures::TempDir dir;
    for (auto kind : kAllModelKinds) {
        ModelConfig config;
        config.kind = kind;
        config.forest.n_trees = 20;
        const auto model = train_model(ds, {Feature::fad, Feature::cn, Feature::mcld, Feature::cd}, config, 3);
        const auto path = dir.path() / (std::string(model_short_name(kind)) + ".json");
        save_model(model, path);
        const auto back = load_model(path);
        for (const auto& x : oracle::all_inputs()) {
            if (predict(back, x) != predict(model, x)) {
                o.fail(std::string(model_display_name(kind)) + " prediction changed");
                break;
            }
        }
    }
    if (o.pass) o.detail = "3 kinds x 243 inputs";
    return o;
}

Outcome live_path() {
    Outcome o;
    using fixtures::StubResponse;
    fixtures::StubServer server(
        true,
        [](const std::string& path) {
            StubResponse r;
            if (path == "/") {
                r.headers = {{"Set-Cookie", "s=1; Domain=.example-store.com"},
                             {"Set-Cookie", "t=2; Domain=.tracker-cdn.net"},
                             {"Set-Cookie", "u=3; Domain=.example-store.com"}};
                r.body = R"(<html><body>
<img src="/img/store-logo.png">
<a href="/a">a</a><a href="/b">b</a>
<a href="https://help.partner-site.org/x">x</a>
<form action="https://pay.checkout-hub.net/submit"></form>
</body></html>)";
            } else {
                r.status = 404;
            }
            return r;
        },
        "*.example-store.com");
    const std::string host = "shop.example-store.com";
    const auto model = load_model(std::string(BDI_MODELS_DIR) + "/demo-rf.json");
    const auto r = scan(server.origin(host) + "/", model, server.policy({host}), fixtures::psl());
    // FAD checkout-hub.net, LD self, CN example-store.com, MCLD self (2 of 3 links), CD example-store.com.
    const std::array<Code, kFeatureCount> want = {Code::mismatch, Code::match, Code::match, Code::match, Code::match};
    if (r.vector.codes != want) o.fail("scan vector differs from the expectation");

    fixtures::TempDir dir;
    std::vector<FeatureVector> rows;
    for (const auto& entry : fixtures::corpus40()) {
        const auto path = save_snapshot(entry.snapshot, dir.path());
        const auto snap = load_snapshot(path);
        const auto parts = parse_url_domain(snap.final_url, fixtures::psl());
        rows.push_back(encode_vector(extract_all(snap, fixtures::psl()), parts, entry.label, snap.final_url));
    }
    const auto ds = build_dataset(rows, 0);
    const auto ig = info_gain_scores(ds);
    for (auto f : kAllFeatures) {
        if (!(ig.score(f) > 0)) o.fail(std::string(feature_name(f)) + " has no information gain");
    }
    if (o.pass) {
        o.detail = "scan vector (-1,1,1,1,1); corpus InfoGain min " +
                   fmt("%.4f", *std::min_element(ig.scores.begin(), ig.scores.end()));
    }
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        int number;
        const char* name;
        double limit_s;  // 0 = not timed
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "encoding truth table", 1, encoding_truth_table},
        {2, "facebook walkthrough", 0, walkthrough},
        {3, "metric formulas", 1, metric_formulas},
        {4, "evaluator oracles", 10, evaluator_oracles},
        {5, "cross-validation partition law", 0, partition_law},
        {6, "synthetic reproduction", 30, synthetic_reproduction},
        {7, "sweep completeness", 60, sweep_completeness},
        {8, "forest degenerates to tree", 0, forest_degenerates},
        {9, "model round trip", 0, model_round_trip},
        {10, "live-path integration", 10, live_path},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.fail(std::string("exception: ") + e.what());
        }
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.limit_s > 0 && elapsed >= c.limit_s) o.fail(fmt("took %.2f s, limit %.0f s", elapsed, c.limit_s));
        failures += !o.pass;
        std::printf("criterion %d: %s  %s (%.2f s) %s\n", c.number, o.pass ? "PASS" : "FAIL", c.name, elapsed,
                    o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
