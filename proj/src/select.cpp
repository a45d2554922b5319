#include "bdi/select.hpp"

#include "bdi/error.hpp"
#include "bdi/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace bdi {

namespace {

void require_two_classes(const Dataset& ds) {
    for (const auto& r : ds.records) {
        if (!r.label) throw Error(ErrorCode::invalid_argument, "dataset contains an unlabeled record");
    }
    if (ds.count(Label::phishing) == 0 || ds.count(Label::legitimate) == 0) {
        throw Error(ErrorCode::one_class_dataset, "feature evaluation needs both classes present");
    }
}

// counts[value slot][label]
std::array<std::array<double, 2>, 3> contingency(const Dataset& ds, Feature f) {
    std::array<std::array<double, 2>, 3> t{};
    for (const auto& r : ds.records) {
        t[slot(r[f])][static_cast<std::size_t>(*r.label)] += 1.0;
    }
    return t;
}

constexpr int hamming(const FeatureVector& a, const FeatureVector& b) {
    int d = 0;
    for (std::size_t i = 0; i < kFeatureCount; ++i) d += a.codes[i] != b.codes[i];
    return d;
}

}  // namespace

std::string_view evaluator_name(Evaluator e) {
    switch (e) {
        case Evaluator::correlation: return "Correlation";
        case Evaluator::info_gain: return "InfoGain";
        case Evaluator::gain_ratio: return "GainRatio";
        case Evaluator::relieff: return "ReliefF";
    }
    return "?";
}

FeatureRanking make_ranking(Evaluator e, const std::array<double, kFeatureCount>& scores) {
    FeatureRanking r;
    r.evaluator = e;
    r.scores = scores;
    r.order.assign(kAllFeatures.begin(), kAllFeatures.end());
    std::sort(r.order.begin(), r.order.end(), [&](Feature a, Feature b) {
        if (scores[index_of(a)] != scores[index_of(b)]) return scores[index_of(a)] > scores[index_of(b)];
        return feature_name(a) < feature_name(b);
    });
    return r;
}

double entropy_bits(std::span<const double> counts) {
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    if (total <= 0) return 0.0;
    double h = 0.0;
    for (double c : counts) {
        if (c > 0) {
            const double p = c / total;
            h -= p * std::log2(p);
        }
    }
    return h;
}

double class_entropy(const Dataset& ds) {
    const std::array<double, 2> counts{static_cast<double>(ds.count(Label::legitimate)),
                                       static_cast<double>(ds.count(Label::phishing))};
    return entropy_bits(counts);
}

double information_gain(const Dataset& ds, Feature f) {
    const auto t = contingency(ds, f);
    const double n = static_cast<double>(ds.size());
    std::array<double, 2> class_counts{};
    double conditional = 0.0;
    for (const auto& row : t) {
        class_counts[0] += row[0];
        class_counts[1] += row[1];
        const double nv = row[0] + row[1];
        if (nv > 0) conditional += (nv / n) * entropy_bits(row);
    }
    return std::max(0.0, entropy_bits(class_counts) - conditional);
}

double split_information(const Dataset& ds, Feature f) {
    const auto t = contingency(ds, f);
    const std::array<double, 3> value_counts{t[0][0] + t[0][1], t[1][0] + t[1][1], t[2][0] + t[2][1]};
    return entropy_bits(value_counts);
}

double gain_ratio(const Dataset& ds, Feature f) {
    const double si = split_information(ds, f);
    if (si <= 0.0) return 0.0;
    return information_gain(ds, f) / si;
}

std::optional<double> abs_correlation(const Dataset& ds, Feature f) {
    const double n = static_cast<double>(ds.size());
    double sx = 0, sy = 0;
    for (const auto& r : ds.records) {
        sx += value(r[f]);
        sy += *r.label == Label::phishing ? 1.0 : 0.0;
    }
    const double mx = sx / n;
    const double my = sy / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (const auto& r : ds.records) {
        const double dx = value(r[f]) - mx;
        const double dy = (*r.label == Label::phishing ? 1.0 : 0.0) - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
    return std::min(1.0, std::abs(sxy) / std::sqrt(sxx * syy));
}

FeatureRanking correlation_scores(const Dataset& ds) {
    require_two_classes(ds);
    std::array<double, kFeatureCount> scores{};
    std::vector<std::string> notes;
    for (auto f : kAllFeatures) {
        const auto r = abs_correlation(ds, f);
        if (!r) notes.push_back(std::string(feature_name(f)) + " has zero variance; scored 0");
        scores[index_of(f)] = r.value_or(0.0);
    }
    auto ranking = make_ranking(Evaluator::correlation, scores);
    ranking.notes = std::move(notes);
    return ranking;
}

FeatureRanking info_gain_scores(const Dataset& ds) {
    require_two_classes(ds);
    std::array<double, kFeatureCount> scores{};
    for (auto f : kAllFeatures) scores[index_of(f)] = information_gain(ds, f);
    return make_ranking(Evaluator::info_gain, scores);
}

FeatureRanking gain_ratio_scores(const Dataset& ds) {
    require_two_classes(ds);
    std::array<double, kFeatureCount> scores{};
    for (auto f : kAllFeatures) scores[index_of(f)] = gain_ratio(ds, f);
    return make_ranking(Evaluator::gain_ratio, scores);
}

std::vector<std::size_t> relieff_sample(std::size_t n, const ReliefOptions& options) {
    std::vector<std::size_t> sample;
    if (!options.sample_m || *options.sample_m >= n) {
        sample.resize(n);
        std::iota(sample.begin(), sample.end(), std::size_t{0});
        return sample;
    }
    Rng rng(options.seed);
    sample.reserve(*options.sample_m);
    for (std::size_t i = 0; i < *options.sample_m; ++i) sample.push_back(static_cast<std::size_t>(rng.below(n)));
    return sample;
}

FeatureRanking relieff_scores(const Dataset& ds, const ReliefOptions& options) {
    require_two_classes(ds);
    if (options.neighbors_k == 0) throw Error(ErrorCode::invalid_argument, "ReliefF needs k >= 1");

    const auto& recs = ds.records;
    const std::size_t n = recs.size();
    std::array<std::vector<std::size_t>, 2> by_class;
    for (std::size_t i = 0; i < n; ++i) by_class[static_cast<std::size_t>(*recs[i].label)].push_back(i);

    const auto sample = relieff_sample(n, options);
    const std::size_t k = options.neighbors_k;
    std::array<double, kFeatureCount> weights{};

    // Nearest k of `pool` to `target` under (distance, index) order. A single
    // pass keeps the first k indices seen at each distance; since the pool is
    // in index order these are the smallest.
    constexpr int kMaxDistance = static_cast<int>(kFeatureCount);
    auto nearest = [&](std::size_t target, const std::vector<std::size_t>& pool, std::size_t want,
                       std::vector<std::size_t>& out) {
        std::array<std::vector<std::size_t>, kMaxDistance + 1> levels;
        for (auto j : pool) {
            if (j == target) continue;
            const auto d = static_cast<std::size_t>(hamming(recs[target], recs[j]));
            if (levels[d].size() < want) levels[d].push_back(j);
        }
        out.clear();
        for (const auto& level : levels) {
            for (auto j : level) {
                if (out.size() == want) return;
                out.push_back(j);
            }
        }
    };

    std::vector<std::size_t> hits;
    std::vector<std::size_t> misses;
    for (auto r : sample) {
        const auto own = static_cast<std::size_t>(*recs[r].label);
        const auto& same = by_class[own];
        const auto& other = by_class[1 - own];
        const std::size_t k_hit = std::min(k, same.size() - 1);
        const std::size_t k_miss = std::min(k, other.size());
        nearest(r, same, k_hit, hits);
        nearest(r, other, k_miss, misses);

        for (std::size_t a = 0; a < kFeatureCount; ++a) {
            int hit_diff = 0;
            for (auto h : hits) hit_diff += recs[h].codes[a] != recs[r].codes[a];
            int miss_diff = 0;
            for (auto m : misses) miss_diff += recs[m].codes[a] != recs[r].codes[a];
            // With two classes the miss prior weight P(C) / (1 - P(class(r))) is 1.
            if (k_hit > 0) weights[a] -= static_cast<double>(hit_diff) / static_cast<double>(k_hit);
            if (k_miss > 0) weights[a] += static_cast<double>(miss_diff) / static_cast<double>(k_miss);
        }
    }
    for (auto& w : weights) w /= static_cast<double>(sample.size());
    return make_ranking(Evaluator::relieff, weights);
}

std::vector<FeatureRanking> rank_report(const Dataset& ds, const ReliefOptions& options) {
    return {correlation_scores(ds), info_gain_scores(ds), gain_ratio_scores(ds), relieff_scores(ds, options)};
}

std::string ranking_json(const std::vector<FeatureRanking>& rankings) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : rankings) {
        nlohmann::ordered_json scores;
        for (auto f : kAllFeatures) scores[std::string(feature_name(f))] = r.score(f);
        auto order = nlohmann::ordered_json::array();
        for (auto f : r.order) order.push_back(std::string(feature_name(f)));
        nlohmann::ordered_json item;
        item["evaluator"] = std::string(evaluator_name(r.evaluator));
        item["scores"] = std::move(scores);
        item["order"] = std::move(order);
        if (!r.notes.empty()) item["notes"] = r.notes;
        arr.push_back(std::move(item));
    }
    return arr.dump(2) + "\n";
}

std::string ranking_table(const std::vector<FeatureRanking>& rankings) {
    std::string out;
    char buf[64];
    for (const auto& r : rankings) {
        std::snprintf(buf, sizeof buf, "%-12s", std::string(evaluator_name(r.evaluator)).c_str());
        out += buf;
        for (auto f : r.order) {
            std::snprintf(buf, sizeof buf, "  %s=%.6f", std::string(feature_name(f)).c_str(), r.score(f));
            out += buf;
        }
        out.push_back('\n');
    }
    return out;
}

}  // namespace bdi
