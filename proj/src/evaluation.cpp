#include "bdi/evaluation.hpp"

#include "bdi/error.hpp"
#include "bdi/rng.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

namespace bdi {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::array<std::vector<std::size_t>, 2> indices_by_class(const Dataset& ds) {
    std::array<std::vector<std::size_t>, 2> out;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto& l = ds.records[i].label;
        if (!l) throw Error(ErrorCode::invalid_argument, "evaluation needs labeled records");
        out[static_cast<std::size_t>(*l)].push_back(i);
    }
    return out;
}

Dataset gather(const Dataset& ds, const std::vector<std::size_t>& idx) {
    Dataset out;
    out.records.reserve(idx.size());
    for (auto i : idx) {
        FeatureVector v;
        v.codes = ds.records[i].codes;
        v.label = ds.records[i].label;
        out.records.push_back(std::move(v));
    }
    return out;
}

std::uint64_t fold_seed(std::uint64_t model_seed, std::size_t fold) {
    return Rng::derive(model_seed, fold + 1).next();
}

struct RunResult {
    ConfusionCounts counts;
    double train_time = 0;
    double predict_time = 0;
};

RunResult train_and_test(const Dataset& ds, const std::vector<std::size_t>& train_idx,
                         const std::vector<std::size_t>& test_idx, const FeatureSubset& subset,
                         const ModelConfig& config, std::uint64_t seed) {
    const Dataset train = gather(ds, train_idx);
    RunResult r;
    auto start = Clock::now();
    const TrainedModel model = train_model(train, subset, config, seed);
    r.train_time = seconds_since(start);

    start = Clock::now();
    std::array<std::optional<Label>, 243> cache;
    for (auto i : test_idx) {
        const auto& rec = ds.records[i];
        auto& hit = cache[PatternTable::key_of(rec, subset)];
        if (!hit) hit = predict(model, rec);
        r.counts.record(*rec.label, *hit);
    }
    r.predict_time = seconds_since(start);
    return r;
}

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

std::vector<std::vector<std::size_t>> make_folds(const Dataset& ds, std::size_t k, bool stratified,
                                                 std::uint64_t seed) {
    if (k < 2) throw Error(ErrorCode::invalid_argument, "k must be >= 2");
    if (k > ds.size()) {
        throw Error(ErrorCode::invalid_argument,
                    "k = " + std::to_string(k) + " exceeds the number of records (" + std::to_string(ds.size()) + ")");
    }
    Rng rng(seed);
    std::vector<std::size_t> order;
    if (stratified) {
        auto by_class = indices_by_class(ds);
        for (std::size_t l = 0; l < 2; ++l) {
            if (by_class[l].size() < k) {
                throw Error(ErrorCode::invalid_argument,
                            std::string("stratified ") + std::to_string(k) + "-fold split needs at least " +
                                std::to_string(k) + " records of class " + label_char(static_cast<Label>(l)));
            }
            rng.shuffle(std::span<std::size_t>(by_class[l]));
            order.insert(order.end(), by_class[l].begin(), by_class[l].end());
        }
    } else {
        order.resize(ds.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        rng.shuffle(std::span<std::size_t>(order));
    }
    std::vector<std::vector<std::size_t>> folds(k);
    for (std::size_t pos = 0; pos < order.size(); ++pos) folds[pos % k].push_back(order[pos]);
    for (auto& f : folds) std::sort(f.begin(), f.end());
    return folds;
}

ConfusionCounts evaluate_counts(const TrainedModel& model, const Dataset& ds) {
    ConfusionCounts c;
    for (const auto& r : ds.records) {
        if (!r.label) throw Error(ErrorCode::invalid_argument, "evaluation needs labeled records");
        c.record(*r.label, predict(model, r));
    }
    return c;
}

MetricsReport cross_validate(const Dataset& ds, const FeatureSubset& subset, const ModelConfig& config,
                             std::size_t k, bool stratified, std::uint64_t seed,
                             std::optional<std::uint64_t> model_seed) {
    const auto folds = make_folds(ds, k, stratified, seed);
    const std::uint64_t mseed = model_seed.value_or(seed);
    ConfusionCounts pooled;
    double train_time = 0;
    double predict_time = 0;
    std::vector<char> in_test(ds.size());
    for (std::size_t f = 0; f < k; ++f) {
        std::fill(in_test.begin(), in_test.end(), 0);
        for (auto i : folds[f]) in_test[i] = 1;
        std::vector<std::size_t> train_idx;
        train_idx.reserve(ds.size() - folds[f].size());
        for (std::size_t i = 0; i < ds.size(); ++i) {
            if (!in_test[i]) train_idx.push_back(i);
        }
        const auto r = train_and_test(ds, train_idx, folds[f], subset, config, fold_seed(mseed, f));
        pooled += r.counts;
        train_time += r.train_time;
        predict_time += r.predict_time;
    }
    auto m = compute_metrics(pooled);
    m.train_time = train_time / static_cast<double>(k);
    m.predict_time = predict_time / static_cast<double>(k);
    return m;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> holdout_split(const Dataset& ds,
                                                                            double train_fraction,
                                                                            bool stratified, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw Error(ErrorCode::invalid_argument, "train_fraction must be in (0, 1)");
    }
    Rng rng(seed);
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    const auto take = [&](std::vector<std::size_t>& pool) {
        rng.shuffle(std::span<std::size_t>(pool));
        const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(pool.size())));
        train.insert(train.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_train));
        test.insert(test.end(), pool.begin() + static_cast<std::ptrdiff_t>(n_train), pool.end());
    };
    auto by_class = indices_by_class(ds);
    if (stratified) {
        take(by_class[0]);
        take(by_class[1]);
    } else {
        std::vector<std::size_t> all(ds.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        take(all);
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    std::array<bool, 2> seen{};
    for (auto i : train) seen[static_cast<std::size_t>(*ds.records[i].label)] = true;
    for (std::size_t l = 0; l < 2; ++l) {
        if (!seen[l]) {
            throw Error(ErrorCode::invalid_argument,
                        std::string("class ") + label_char(static_cast<Label>(l)) + " is absent from the training part");
        }
    }
    if (test.empty()) throw Error(ErrorCode::invalid_argument, "holdout test part is empty");
    return {std::move(train), std::move(test)};
}

MetricsReport holdout_evaluate(const Dataset& ds, const FeatureSubset& subset, const ModelConfig& config,
                               double train_fraction, bool stratified, std::uint64_t seed,
                               std::optional<std::uint64_t> model_seed) {
    const auto [train, test] = holdout_split(ds, train_fraction, stratified, seed);
    const auto r = train_and_test(ds, train, test, subset, config, model_seed.value_or(seed));
    auto m = compute_metrics(r.counts);
    m.train_time = r.train_time;
    m.predict_time = r.predict_time;
    return m;
}

std::optional<Protocol> parse_protocol(std::string_view text) {
    const auto number = [](std::string_view digits) -> std::optional<std::size_t> {
        if (digits.empty() || digits.size() > 6) return std::nullopt;
        std::size_t v = 0;
        for (char c : digits) {
            if (c < '0' || c > '9') return std::nullopt;
            v = v * 10 + static_cast<std::size_t>(c - '0');
        }
        return v;
    };
    Protocol p;
    if (text.starts_with("cv")) {
        const auto k = number(text.substr(2));
        if (!k || *k < 2) return std::nullopt;
        p.kind = Protocol::Kind::cross_validation;
        p.folds = *k;
        return p;
    }
    if (text.starts_with("holdout")) {
        const auto pct = number(text.substr(7));
        if (!pct || *pct == 0 || *pct >= 100) return std::nullopt;
        p.kind = Protocol::Kind::holdout;
        p.train_fraction = static_cast<double>(*pct) / 100.0;
        return p;
    }
    return std::nullopt;
}

std::string protocol_name(const Protocol& p) {
    if (p.kind == Protocol::Kind::cross_validation) return "cv" + std::to_string(p.folds);
    return "holdout" + std::to_string(std::lround(p.train_fraction * 100.0));
}

MetricsReport run_protocol(const Dataset& ds, const FeatureSubset& subset, const ModelConfig& config,
                           const Protocol& protocol, std::uint64_t seed, std::optional<std::uint64_t> model_seed) {
    if (protocol.kind == Protocol::Kind::cross_validation) {
        return cross_validate(ds, subset, config, protocol.folds, protocol.stratified, seed, model_seed);
    }
    return holdout_evaluate(ds, subset, config, protocol.train_fraction, protocol.stratified, seed, model_seed);
}

std::vector<FeatureSubset> all_subsets() {
    std::vector<FeatureSubset> out;
    for (std::size_t size = 1; size <= kFeatureCount; ++size) {
        // Lexicographic combinations of column indices.
        std::vector<std::size_t> idx(size);
        for (std::size_t i = 0; i < size; ++i) idx[i] = i;
        while (true) {
            FeatureSubset s;
            for (auto i : idx) s.push_back(kAllFeatures[i]);
            out.push_back(std::move(s));
            std::size_t pos = size;
            while (pos > 0 && idx[pos - 1] == kFeatureCount - size + pos - 1) --pos;
            if (pos == 0) break;
            ++idx[pos - 1];
            for (std::size_t j = pos; j < size; ++j) idx[j] = idx[j - 1] + 1;
        }
    }
    return out;
}

SweepReport sweep_combinations(const Dataset& ds, const std::vector<ModelKind>& kinds, const Protocol& protocol,
                               std::uint64_t seed, const SweepOptions& options) {
    if (kinds.empty()) throw Error(ErrorCode::invalid_argument, "no model kinds requested");
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        for (std::size_t j = i + 1; j < kinds.size(); ++j) {
            if (kinds[i] == kinds[j]) throw Error(ErrorCode::invalid_argument, "duplicate model kind in sweep");
        }
    }
    const auto subsets = options.subsets.empty() ? all_subsets() : options.subsets;
    const std::size_t cells = subsets.size() * kinds.size();
    std::vector<MetricsReport> results(cells);

    std::size_t threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, cells);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto worker = [&] {
        while (true) {
            const std::size_t cell = next.fetch_add(1);
            if (cell >= cells) return;
            const std::size_t s = cell / kinds.size();
            const ModelKind kind = kinds[cell % kinds.size()];
            try {
                ModelConfig config = options.base;
                config.kind = kind;
                const auto mseed = Rng::derive(seed, s, static_cast<std::uint64_t>(kind) + 1).next();
                results[cell] = run_protocol(ds, subsets[s], config, protocol, seed, mseed);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(cells);
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    SweepReport report;
    report.protocol = protocol;
    report.seed = seed;
    for (std::size_t s = 0; s < subsets.size(); ++s) {
        SweepRow row;
        row.subset = subsets[s];
        for (std::size_t k = 0; k < kinds.size(); ++k) {
            const auto& m = results[s * kinds.size() + k];
            row.per_model.push_back({kinds[k], m});
            const bool better = row.per_model.size() == 1 || m.accuracy > row.best_accuracy ||
                                (m.accuracy == row.best_accuracy &&
                                 model_display_name(kinds[k]) < model_display_name(row.best_model));
            if (better) {
                row.best_accuracy = m.accuracy;
                row.best_model = kinds[k];
            }
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

std::string sweep_csv(const SweepReport& report, bool include_timing) {
    std::string out = "n_features,subset,model,tpr,fpr,precision,recall,f_measure,accuracy,train_s,predict_s,is_best\n";
    for (const auto& row : report.rows) {
        for (const auto& e : row.per_model) {
            const auto& m = e.metrics;
            out += std::to_string(row.subset.size()) + "," + join_features(row.subset, "+") + "," +
                   std::string(model_display_name(e.kind)) + "," + fixed6(m.tpr) + "," + fixed6(m.fpr) + "," +
                   fixed6(m.precision) + "," + fixed6(m.recall) + "," + fixed6(m.f_measure) + "," +
                   fixed6(m.accuracy) + ",";
            if (include_timing) out += fixed6(m.train_time) + "," + fixed6(m.predict_time);
            else out += ",";
            out += std::string(",") + (e.kind == row.best_model ? "1" : "0") + "\n";
        }
    }
    return out;
}

}  // namespace bdi
